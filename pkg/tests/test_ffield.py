import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from twistlab import fpoly
from twistlab.errors import DegreeTooLarge, NotPrime
from twistlab.ffield import (extend, is_irreducible, least_irreducible, make_field,
                             minimal_polynomial)

from conftest import brute_irreducible, brute_poly_mul

FIELDS = [(2, 1), (2, 2), (2, 3), (3, 2), (5, 1), (5, 2), (7, 1), (2, 4), (3, 3)]


@pytest.mark.parametrize("p,e", [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (5, 2), (5, 3), (7, 2)])
def test_least_irreducible_matches_scan(p, e):
    # [DERIVED] first irreducible in encoding order by trial division
    for code in range(p**e):
        f = [(code // p**i) % p for i in range(e)] + [1]
        if brute_irreducible(f, p):
            break
    assert least_irreducible(p, e) == tuple(f)


def test_known_moduli():
    assert least_irreducible(2, 2) == (1, 1, 1)
    assert least_irreducible(5, 2) == (2, 0, 1)
    assert least_irreducible(3, 1) == (0, 1)


@pytest.mark.parametrize("p,n", [(2, 5), (3, 4), (5, 3)])
def test_rabin_agrees_with_trial_division(p, n):
    for low in itertools.product(range(p), repeat=n):
        f = list(low) + [1]
        assert is_irreducible(f, p) == brute_irreducible(f, p)


def test_bad_parameters():
    with pytest.raises(NotPrime):
        make_field(4, 1)
    with pytest.raises(NotPrime):
        make_field(1)
    with pytest.raises(DegreeTooLarge):
        make_field(2, 40)
    assert make_field(5, 2) is make_field(5, 2)


def _mul_oracle(F, a, b):
    """Schoolbook product of digit vectors reduced by the modulus."""
    prod = brute_poly_mul(F.digits(a), F.digits(b), F.p)
    f = list(F.modulus)
    return F.from_digits(fpoly.mod(prod, f, F.p) + [0] * F.e)


@pytest.mark.parametrize("p,e", FIELDS)
def test_multiplication_matches_polynomial_oracle(p, e):
    F = make_field(p, e)
    rng = np.random.default_rng(p * 100 + e)
    for a, b in rng.integers(0, F.q, size=(200, 2)):
        assert F.mul(int(a), int(b)) == _mul_oracle(F, int(a), int(b))


@given(st.sampled_from(FIELDS), st.data())
def test_field_axioms(pe, data):
    F = make_field(*pe)
    a, b, c = (data.draw(st.integers(0, F.q - 1)) for _ in range(3))
    assert F.add(a, F.neg(a)) == 0
    assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
    assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))
    assert F.pow(a, F.q) == a
    if a:
        assert F.mul(a, F.inv(a)) == 1
    # Frobenius is a ring map
    assert F.frobenius(F.add(a, b)) == F.add(F.frobenius(a), F.frobenius(b))
    assert F.frobenius(F.mul(a, b)) == F.mul(F.frobenius(a), F.frobenius(b))


@pytest.mark.parametrize("p,e", FIELDS)
def test_vector_ops_match_scalar(p, e):
    F = make_field(p, e)
    x = np.arange(F.q, dtype=np.int64)
    y = (x * 7 + 3) % F.q
    assert list(F.vmul(x, y)) == [F.mul(int(a), int(b)) for a, b in zip(x, y)]
    assert list(F.vadd(x, y)) == [F.add(int(a), int(b)) for a, b in zip(x, y)]
    assert list(F.vsub(x, y)) == [F.sub(int(a), int(b)) for a, b in zip(x, y)]
    assert list(F.vpow(x, 5)) == [F.pow(int(a), 5) for a in x]
    assert list(F.vfrobenius(x)) == [F.frobenius(int(a)) for a in x]


@pytest.mark.parametrize("p,e", FIELDS)
def test_log_tables_and_primitive_element(p, e):
    F = make_field(p, e)
    g = F.primitive_element
    seen = {F.pow(g, k) for k in range(F.q - 1)}
    assert len(seen) == F.q - 1
    exp, log = F.exp_table, F.log_table
    for a in range(1, F.q):
        assert exp[log[a]] == a


@pytest.mark.parametrize("p,e", [(3, 1), (5, 1), (5, 2), (7, 1), (3, 2)])
def test_quadratic_character(p, e):
    F = make_field(p, e)
    squares = {F.mul(a, a) for a in range(1, F.q)}
    chi = F.vquadratic_character(np.arange(F.q))
    for a in range(F.q):
        assert chi[a] == (0 if a == 0 else (1 if a in squares else -1))


@pytest.mark.parametrize("p,e", FIELDS)
def test_absolute_trace(p, e):
    F = make_field(p, e)
    for a in range(F.q):
        acc, y = 0, a
        for _ in range(F.e):
            acc = F.add(acc, y)
            y = F.frobenius(y)
        assert acc < p and F.absolute_trace(a) == acc


@pytest.mark.parametrize("p,e,n", [(2, 1, 3), (2, 2, 2), (3, 1, 2), (5, 1, 3), (3, 2, 2), (2, 2, 3)])
def test_extension_embedding_norm_trace(p, e, n):
    F = make_field(p, e)
    E = extend(F, n)
    assert E.q == F.q**n
    emb = [E.embed(a) for a in range(F.q)]
    assert len(set(emb)) == F.q
    for a in range(F.q):
        assert E.descend(emb[a]) == a
        for b in range(0, F.q, max(1, F.q // 4)):
            assert E.field.mul(emb[a], emb[b]) == E.embed(F.mul(a, b))
            assert E.field.add(emb[a], emb[b]) == E.embed(F.add(a, b))
    xs = np.arange(E.q, dtype=np.int64)
    norms, traces = E.vnorm_to_base(xs), E.vtrace_to_base(xs)
    for x in range(0, E.q, max(1, E.q // 50)):
        # norm and trace as products and sums over the q-Frobenius orbit
        prod, tot, y = 1, 0, x
        for _ in range(n):
            prod, tot = E.field.mul(prod, y), E.field.add(tot, y)
            y = E.frobenius_q(y)
        assert norms[x] == E.descend(prod) == E.norm_to_base(x)
        assert traces[x] == E.descend(tot) == E.trace_to_base(x)


@pytest.mark.parametrize("p,e,n", [(2, 1, 4), (3, 1, 3), (2, 2, 2), (5, 1, 2)])
def test_minimal_polynomial(p, e, n):
    F = make_field(p, e)
    E = extend(F, n)
    for x in range(E.q):
        f = minimal_polynomial(E, x)
        deg = len(f) - 1
        assert f[-1] == 1 and n % deg == 0
        # f(x) = 0 in the extension
        acc = 0
        for c in reversed(f):
            acc = E.field.add(E.field.mul(acc, x), E.embed(c))
        assert acc == 0
        orbit = {x}
        y = x
        for _ in range(n):
            y = E.frobenius_q(y)
            orbit.add(y)
        assert len(orbit) == deg
