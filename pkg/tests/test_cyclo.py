import cmath
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from twistlab.cyclo import (CycloValue, gr_abs2, gr_conj, gr_is_zero, gr_lift, gr_mul, gr_pow,
                            gr_reduce, gr_to_complex, gr_to_cyclo)

LS = [1, 2, 3, 4, 5, 6, 8, 9, 12, 25]


def _num(vec, L):
    return sum(c * cmath.exp(2j * cmath.pi * i / L) for i, c in enumerate(vec))


vecs = st.sampled_from(LS).flatmap(
    lambda L: st.tuples(st.just(L), st.lists(st.integers(-5, 5), min_size=L, max_size=L),
                        st.lists(st.integers(-5, 5), min_size=L, max_size=L)))


@given(vecs)
def test_ring_operations_match_complex(t):
    L, u, v = t
    a, b = CycloValue.from_group_ring(u, L), CycloValue.from_group_ring(v, L)
    za, zb = _num(u, L), _num(v, L)
    assert abs(a.to_complex() - za) < 1e-9
    assert abs((a + b).to_complex() - (za + zb)) < 1e-9
    assert abs((a * b).to_complex() - za * zb) < 1e-8
    assert abs(a.conj().to_complex() - za.conjugate()) < 1e-9
    assert abs(a.abs2().to_complex() - abs(za) ** 2) < 1e-8
    assert (a - a).is_zero()


@given(vecs)
def test_group_ring_helpers(t):
    L, u, v = t
    A, B = np.array([u]), np.array([v])
    assert gr_to_cyclo(gr_mul(A, B)[0]) == CycloValue.from_group_ring(u, L) * CycloValue.from_group_ring(v, L)
    assert gr_to_cyclo(gr_conj(A)[0]) == CycloValue.from_group_ring(u, L).conj()
    assert gr_to_cyclo(gr_abs2(A)[0]) == CycloValue.from_group_ring(u, L).abs2()
    assert gr_to_cyclo(gr_pow(A, 3)[0]) == CycloValue.from_group_ring(u, L) ** 3
    assert abs(gr_to_complex(A)[0] - _num(u, L)) < 1e-9
    assert list(gr_reduce(A)[0]) == list(CycloValue.from_group_ring(u, L).coeffs)
    lifted = gr_lift(A, 2 * L)
    assert gr_to_cyclo(lifted[0]) == CycloValue.from_group_ring(u, L)


def test_sum_of_all_roots_is_zero():
    for L in LS[1:]:
        assert CycloValue.from_group_ring([1] * L, L).is_zero()
        assert bool(gr_is_zero(np.ones((1, L), dtype=np.int64))[0])


def test_rational_and_division():
    x = CycloValue.from_int(6, 4) / 4
    assert x.rational() == Fraction(3, 2)
    assert CycloValue.root(1, 4).rational() is None
    assert CycloValue.root(1, 4) ** 2 == CycloValue.from_int(-1, 4)
    assert CycloValue.from_int(3, 1) == CycloValue.from_int(3, 6)  # cross-ring equality
    with pytest.raises(ValueError):
        CycloValue(4, [1, 2, 3])


def test_overflow_promotes_to_object():
    big = np.array([[2**40, 0, 0]], dtype=np.int64)
    out = gr_pow(big, 3)
    assert int(gr_to_cyclo(out[0]).rational()) == 2**120
