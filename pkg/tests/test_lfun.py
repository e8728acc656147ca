import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from twistlab.cyclo import CycloValue
from twistlab.errors import ConsistencyFailure, PurityFailure, SlopeRegime
from twistlab.ffield import extend, minimal_polynomial
from twistlab.lfun import (compute_power_sums, empirical_depth, exp_log_coefficients,
                           l_polynomial, newton_coefficients, norm_formula_phases, power_sum,
                           predicted_degree, reconstruct, twist_family, unitarized_class)
from twistlab.tracefn import artin_schreier, kummer, legendre, trivial
from twistlab.wgroup import make_group


def _faithful(G):
    return next(c for c in G.characters() if c.order == 4)


def test_hand_case_q2_d2():
    G = make_group(2, 2)
    T = trivial()
    lam = _faithful(G)
    one_plus_t = G.element([1, 0])
    i = CycloValue.root(1, 4)
    if lam(one_plus_t) != i:
        lam = lam.conj()
    assert power_sum(T, lam, 1) == 1 + i
    ld = l_polynomial(T, lam)
    assert ld.degree == 1
    assert np.allclose(ld.coefficients, [1, 1 + 1j])
    assert np.allclose(ld.roots, [-(1 + 1j)])
    angles, det = unitarized_class(ld)
    assert np.allclose(angles, [-(1 + 1j) / np.sqrt(2)]) and abs(abs(det) - 1) < 1e-12
    order2 = next(c for c in G.characters() if c.order == 2)
    assert power_sum(T, order2, 1) == 0
    assert power_sum(T, G.trivial_character, 3) == 8


def test_cli_example_family():
    fam = twist_family(trivial(), 2, 2, population="all")
    assert len(fam) == 4
    assert sum(ld.primitive for ld in fam) == 2
    assert sorted(ld.degree for ld in fam if not ld.degenerate) == [0, 1, 1]
    (degenerate,) = [ld for ld in fam if ld.degenerate]
    assert degenerate.character == (0,)
    with pytest.raises(PurityFailure):
        unitarized_class(degenerate)


def euler_series(G, lam, upto):
    """Coefficients of sum over monic f of Lambda(f) T^deg f, with powers of x stripped."""
    F = G.field
    out = []
    for n in range(upto + 1):
        acc = CycloValue.from_int(0, 1)
        for low in itertools.product(range(G.q), repeat=n):
            f = list(low) + [1]
            while len(f) > 1 and f[0] == 0:
                f = f[1:]
            acc = acc + (lam(G.reduce_polynomial(f)) if len(f) > 1 else CycloValue.from_int(1, 1))
        out.append(acc.to_complex())
    return np.array(out)


@pytest.mark.parametrize("q,d", [(2, 3), (3, 2), (3, 3), (4, 2), (2, 4), (5, 2)])
def test_trivial_twists_match_euler_product(q, d):
    # [DERIVED] P(T) equals the Dirichlet series, a polynomial of degree <= d - 1
    G = make_group(q, d)
    fam = twist_family(trivial(), q, d, population="all")
    for ld in fam[: 12]:
        if ld.degenerate:
            continue
        series = euler_series(G, G.character(ld.character), d + 1)
        coeffs = np.zeros(d + 2, dtype=complex)
        coeffs[: len(ld.coefficients)] = ld.coefficients
        assert np.allclose(series, coeffs, atol=1e-9)


def brute_power_sum(T, G, lam, n):
    """Sum over x of T(x) Lambda(prod (1 - x^(q^i) t)) with minimal polynomials."""
    E = extend(G.field, n)
    acc = CycloValue.from_int(0, 1)
    vals = T.values(G.q, n)
    for x in range(E.q):
        v = vals.value(x)
        v = v if isinstance(v, CycloValue) else CycloValue.from_int(v, 1)
        if x == 0:
            acc = acc + v
            continue
        f = minimal_polynomial(E, x)
        cls = G.pow(G.reduce_polynomial(f), n // (len(f) - 1))
        acc = acc + v * lam(cls)
    return acc


@pytest.mark.parametrize("T,q,d,n", [
    (legendre(5), 5, 2, 1), (legendre(5), 5, 2, 2), (kummer(2, [1, 0, 1], 5), 5, 2, 2),
    (artin_schreier([0, 0, 1], 3), 3, 3, 2), (kummer(3, [1, 1], 7), 7, 2, 1), (trivial(), 4, 3, 2),
])
def test_power_sums_match_brute_force(T, q, d, n):
    G = make_group(q, d)
    ps = compute_power_sums(T, G, n)
    rng = np.random.default_rng(n)
    for idx in rng.choice(G.order, size=min(6, G.order), replace=False):
        lam = G.character_from_index(int(idx))
        expect = brute_power_sum(T, G, lam, n)
        from twistlab.cyclo import gr_to_cyclo

        assert gr_to_cyclo(ps.exact[n][idx]) == expect
        assert power_sum(T, lam, n) == expect


def test_sparse_and_dense_paths_agree():
    G = make_group(5, 2)
    T = legendre(5)
    dense = compute_power_sums(T, G, 2)
    chars = np.array([3, 7, 19])
    sparse = compute_power_sums(T, G, 2, chars)
    for n in (1, 2):
        assert np.array_equal(dense.exact[n][chars], sparse.exact[n])
    assert max(dense.float_check.values()) < 1e-8


def test_predicted_degrees():
    assert predicted_degree(trivial(), 4) == 3
    for d in range(1, 6):
        assert predicted_degree(legendre(5), d) == 2 * d
    assert predicted_degree(kummer(2, [1, 0, 1], 5), 3) == 4
    with pytest.raises(SlopeRegime):
        predicted_degree(artin_schreier([0, 0, 1], 5), 2)


@pytest.mark.parametrize("d", [1, 2])
def test_legendre_degree_and_purity(d):
    fam = twist_family(legendre(5), 5, d, population="primitive", strict=True)
    assert len(fam) == 4 * 5 ** (d - 1)
    for ld in fam:
        assert ld.degree == 2 * d
        assert np.allclose(np.abs(ld.roots), 5, rtol=1e-6)
        # real self-dual coefficients: angle multiset closed under conjugation
        ang = np.array(ld.angles)
        assert np.allclose(np.sort_complex(ang), np.sort_complex(ang.conj()), atol=1e-8) or not np.allclose(
            np.imag(ld.coefficients), 0)


@pytest.mark.parametrize("T,q,d", [(trivial(), 3, 3), (trivial(), 4, 3), (kummer(2, [1, 0, 1], 5), 5, 3),
                                   (legendre(5), 5, 2)])
def test_degree_drop_law(T, q, d):
    fam = twist_family(T, q, d, population="all")
    for ld in fam:
        if ld.degenerate:
            continue
        assert ld.consistent
        c = ld.conductor - 1
        if c >= 1:
            assert ld.purity_ok
            assert ld.degree == T.rank * (c - 1) + T.c_F


def test_wild_regime_exceeds_tame_formula():
    T = artin_schreier([0, 0, 0, 1], 5)  # slope 3
    d = 2
    fam = twist_family(T, 5, d, population="primitive")
    for ld in fam:
        assert ld.mode == "empirical" and ld.consistent
        assert ld.degree > T.rank * (d - 1) + T.c_F
    assert empirical_depth(T, d) >= 4


@given(st.lists(st.floats(-3, 3), min_size=2, max_size=12), st.integers(1, 6))
def test_newton_matches_exp_log(vals, N):
    S = np.array(vals[: len(vals) // 2 * 2:2]) + 1j * np.array(vals[1: len(vals) // 2 * 2:2])
    if len(S) < N:
        return
    assert np.allclose(newton_coefficients(S, N), exp_log_coefficients(S, N), atol=1e-9)


@given(st.integers(1, 7), st.integers(0, 10**6))
def test_reconstruct_synthetic_roots(N, seed):
    rng = np.random.default_rng(seed)
    q, w = 5, 1
    alphas = q * np.exp(2j * np.pi * rng.random(N))
    S = [-np.sum(alphas**n) for n in range(1, N + 3)]
    deg, coeffs, roots, err = reconstruct(S, w, q)
    assert deg == N and err < 1e-6
    assert np.allclose(np.sort_complex(roots), np.sort_complex(alphas), atol=1e-6)


def test_consistency_failure_is_raised():
    G = make_group(5, 2)
    fam = twist_family(legendre(5), 5, 2, chars=[int(np.nonzero(G.primitive_mask())[0][0])], mode="predicted")
    ld = fam[0]
    ld.expected_degree = ld.degree + 1
    from twistlab.lfun import check_ldata

    with pytest.raises(ConsistencyFailure):
        check_ldata(ld)


def test_threads_do_not_change_results():
    a = twist_family(legendre(5), 5, 2, threads=1)
    b = twist_family(legendre(5), 5, 2, threads=3)
    assert [x.coefficients for x in a] == [y.coefficients for y in b]


@pytest.mark.parametrize("q,d", [(2, 4), (3, 3), (4, 2), (5, 2)])
def test_norm_formula(q, d):
    G = make_group(q, d)
    rng = np.random.default_rng(q + d)
    for _ in range(40):
        lam = G.character_from_index(int(rng.integers(G.order)))
        n = int(rng.integers(1, 4))
        x = int(rng.integers(1, q**n))
        a, b = norm_formula_phases(G, lam, x, n)
        assert a == b
