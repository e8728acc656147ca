import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from twistlab.cyclo import CycloValue
from twistlab.errors import BudgetExceeded, MixedParameters, PlaceZero
from twistlab.ffield import extend, minimal_polynomial
from twistlab.wgroup import make_group

CASES = [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (4, 2), (4, 3), (5, 2), (9, 2), (5, 3)]


def brute_mul(F, a, b, d):
    """Truncated product of 1 + sum a_i t^i and 1 + sum b_i t^i."""
    x, y = (1,) + tuple(a), (1,) + tuple(b)
    out = [0] * (d + 1)
    for i in range(d + 1):
        for j in range(d + 1 - i):
            out[i + j] = F.add(out[i + j], F.mul(x[i], y[j]))
    return tuple(out[1:])


def brute_order(G, a):
    one = (0,) * G.d
    x, k = a.coeffs, 1
    while x != one:
        x = brute_mul(G.field, x, a.coeffs, G.d)
        k += 1
    return k


@pytest.mark.parametrize("q,d", CASES)
def test_basis_is_a_basis(q, d):
    G = make_group(q, d)
    assert G.order == q**d == math.prod(G.orders)
    for g, o in G.basis():
        assert brute_order(G, g) == o
    # every element is hit exactly once by the basis products
    table = G.element_table
    assert len({tuple(r) for r in table}) == q**d


def test_known_basis_shapes():
    assert make_group(2, 2).orders == (4,)
    assert make_group(2, 4).orders == (8, 2)
    assert make_group(5, 4).orders == (5, 5, 5, 5)
    assert make_group(4, 4).orders == (8, 8, 2, 2)


@pytest.mark.parametrize("q,d", CASES)
def test_dlog_is_a_homomorphism(q, d):
    G = make_group(q, d)
    rng = np.random.default_rng(q * 10 + d)
    els = G.element_table
    for i, j in rng.integers(0, G.order, size=(50, 2)):
        a, b = G.element(els[i]), G.element(els[j])
        ab = G.element(brute_mul(G.field, a.coeffs, b.coeffs, d))
        assert G.mul(a, b) == ab
        da, db, dab = G.dlog(a), G.dlog(b), G.dlog(ab)
        assert all((x + y - z) % o == 0 for x, y, z, o in zip(da, db, dab, G.orders))
        assert G.mul(a, G.inv(a)) == G.identity


@pytest.mark.parametrize("q,d", CASES)
def test_vectorized_multiplication(q, d):
    G = make_group(q, d)
    els = G.element_table
    rng = np.random.default_rng(1)
    i, j = rng.integers(0, G.order, size=(2, 40))
    out = G.vmul(els[i], els[j])
    for r, a, b in zip(out, i, j):
        assert tuple(r) == brute_mul(G.field, els[a], els[b], d)


@pytest.mark.parametrize("q,d", [(2, 2), (3, 2), (4, 2), (2, 3), (3, 3)])
def test_character_orthogonality_exact(q, d):
    G = make_group(q, d)
    els = G.all_elements()
    chars = G.characters()
    for a in els[: min(len(els), 12)]:
        total = sum((chi(a) for chi in chars), CycloValue.from_int(0, 1))
        assert total == (G.order if a == G.identity else 0)
    for chi in chars[:6]:
        total = sum((chi(a) for a in els), CycloValue.from_int(0, 1))
        assert total == (G.order if chi.is_trivial() else 0)


@given(st.sampled_from(CASES), st.data())
def test_characters_are_homomorphisms(qd, data):
    G = make_group(*qd)
    i, j, c = (data.draw(st.integers(0, G.order - 1)) for _ in range(3))
    a, b = G.element(G.element_table[i]), G.element(G.element_table[j])
    chi = G.character_from_index(c)
    assert chi(G.mul(a, b)) == chi(a) * chi(b)
    assert (chi * chi.conj()).is_trivial()
    assert chi(a) ** chi.order == CycloValue.from_int(1, 1)


def brute_conductor(G, chi):
    """1 + the largest J with chi nontrivial on {a : a = 1 + O(t^J)}; 0 if chi is trivial."""
    best = 0
    for a in G.all_elements():
        if chi.phase(a):
            J = next(i for i, c in enumerate(a.coeffs, start=1) if c)
            best = max(best, J)
    return best + 1 if best else 0


@pytest.mark.parametrize("q,d", [(2, 2), (2, 3), (2, 4), (3, 2), (4, 2), (3, 3), (4, 3)])
def test_conductor_against_brute_force(q, d):
    G = make_group(q, d)
    conds = G.conductor_exponents()
    for chi in G.characters():
        assert conds[chi.index] == brute_conductor(G, chi)
    assert int(np.sum(G.primitive_mask())) == G.num_primitive() == q**d - q ** (d - 1)


@given(st.sampled_from(CASES), st.data())
def test_reduce_polynomial_is_multiplicative(qd, data):
    G = make_group(*qd)
    F = G.field
    coeff = st.integers(0, G.q - 1)
    f = [data.draw(st.integers(1, G.q - 1))] + data.draw(st.lists(coeff, min_size=1, max_size=4))
    g = [data.draw(st.integers(1, G.q - 1))] + data.draw(st.lists(coeff, min_size=1, max_size=4))
    if f[-1] == 0 or g[-1] == 0:
        return
    fg = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        for j, b in enumerate(g):
            fg[i + j] = F.add(fg[i + j], F.mul(a, b))
    assert G.reduce_polynomial(fg) == G.mul(G.reduce_polynomial(f), G.reduce_polynomial(g))


def test_place_zero_and_mixed_groups():
    G = make_group(3, 2)
    with pytest.raises(PlaceZero):
        G.reduce_polynomial([0, 1, 1])
    H = make_group(3, 3)
    with pytest.raises(MixedParameters):
        G.mul(G.identity, H.identity)


@pytest.mark.parametrize("q,d,n", [(2, 3, 3), (3, 2, 2), (4, 2, 2), (5, 2, 2), (2, 4, 4)])
def test_level_norms_match_root_products(q, d, n):
    G = make_group(q, d)
    E = extend(G.field, n)
    norms = G.level_norms(n)
    idx = G.level_index(n)
    for x in range(0, E.q, max(1, E.q // 60)):
        # product of (1 - x^(q^i) t) over i < n, in F_{q^n}[t] / t^(d+1)
        poly = [1] + [0] * d
        y = x
        for _ in range(n):
            nxt = list(poly)
            for k in range(1, d + 1):
                nxt[k] = E.field.sub(nxt[k], E.field.mul(y, poly[k - 1]))
            poly, y = nxt, E.frobenius_q(y)
        coeffs = tuple(E.descend(c) for c in poly[1:])
        assert tuple(norms[x]) == coeffs
        assert G.norm_of_linear(x, n) == G.element(coeffs)
        assert idx[x] == G.flatten(G.dlog(G.element(coeffs)))


def test_budget(monkeypatch):
    monkeypatch.setenv("TWISTLAB_BUDGET", "10")
    with pytest.raises(BudgetExceeded):
        make_group(3, 3).characters()
