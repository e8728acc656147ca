"""Exact arithmetic in cyclotomic rings Z[zeta_L] (and Q[zeta_L]).

Two representations are used:

* ``CycloValue`` -- a single element, stored as coefficients on the power basis
  1, zeta, ..., zeta^(phi(L)-1), i.e. reduced modulo the L-th cyclotomic polynomial.
  Equality is coefficient equality.
* group-ring arrays -- numpy arrays whose last axis has length L and holds the
  coefficients of zeta^0..zeta^(L-1) *without* reduction.  These are what the
  vectorized power-sum code manipulates; multiplying by zeta^s is a roll.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np
from sympy import Poly, cyclotomic_poly, symbols, totient

_X = symbols("x")
# products of group-ring arrays switch to Python ints above this bound
_INT64_SAFE = 1 << 62


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n):
    """Coefficients (low -> high) of the n-th cyclotomic polynomial."""
    coeffs = Poly(cyclotomic_poly(n, _X), _X).all_coeffs()
    return tuple(int(c) for c in reversed(coeffs))


@lru_cache(maxsize=None)
def reduction_matrix(L):
    """Integer (L, phi(L)) matrix whose row j is zeta_L^j on the power basis."""
    phi = int(totient(L))
    f = cyclotomic_polynomial(L)
    rows = np.zeros((L, phi), dtype=np.int64)
    cur = [0] * phi
    cur[0] = 1
    for j in range(L):
        rows[j] = cur
        top = cur[-1]
        cur = [0] + cur[:-1]
        if top:
            # zeta^phi = -(f_0 + f_1 zeta + ... + f_{phi-1} zeta^{phi-1})
            cur = [c - top * f[i] for i, c in enumerate(cur)]
    rows.setflags(write=False)
    return rows


def lcm(*values):
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out


class CycloValue:
    """An element of Q(zeta_L) with exact (int or Fraction) coordinates."""

    __slots__ = ("L", "coeffs")

    def __init__(self, L, coeffs):
        phi = int(totient(L))
        coeffs = tuple(coeffs)
        if len(coeffs) != phi:
            raise ValueError(f"expected {phi} coordinates for L={L}, got {len(coeffs)}")
        self.L = L
        self.coeffs = coeffs

    # constructors
    @classmethod
    def from_int(cls, c, L=1):
        phi = int(totient(L))
        return cls(L, (c,) + (0,) * (phi - 1))

    @classmethod
    def root(cls, j, L):
        """zeta_L^j."""
        return cls.from_group_ring([1 if i == j % L else 0 for i in range(L)], L)

    @classmethod
    def from_group_ring(cls, vec, L):
        """Reduce sum_j vec[j] zeta^j; ``vec`` may hold ints or Fractions."""
        vec = list(vec)
        if len(vec) != L:
            raise ValueError("group-ring vector has the wrong length")
        R = reduction_matrix(L)
        phi = R.shape[1]
        out = [0] * phi
        for j, c in enumerate(vec):
            if c:
                row = R[j]
                for i in range(phi):
                    if row[i]:
                        out[i] += c * int(row[i])
        return cls(L, out)

    def to_group_ring(self):
        return list(self.coeffs) + [0] * (self.L - len(self.coeffs))

    # ring structure
    def _align(self, other):
        if not isinstance(other, CycloValue):
            if isinstance(other, (int, Fraction, np.integer)):
                other = CycloValue.from_int(other if not isinstance(other, np.integer) else int(other), self.L)
            else:
                return None, None
        if other.L == self.L:
            return self, other
        L = lcm(self.L, other.L)
        return self.lift(L), other.lift(L)

    def lift(self, L):
        """The same number viewed in Q(zeta_L), for a multiple L of self.L."""
        if L == self.L:
            return self
        if L % self.L:
            raise ValueError(f"{self.L} does not divide {L}")
        step = L // self.L
        vec = [0] * L
        for i, c in enumerate(self.coeffs):
            vec[i * step] = c
        return CycloValue.from_group_ring(vec, L)

    def __add__(self, other):
        a, b = self._align(other)
        if a is None:
            return NotImplemented
        return CycloValue(a.L, [x + y for x, y in zip(a.coeffs, b.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return CycloValue(self.L, [-c for c in self.coeffs])

    def __sub__(self, other):
        a, b = self._align(other)
        if a is None:
            return NotImplemented
        return CycloValue(a.L, [x - y for x, y in zip(a.coeffs, b.coeffs)])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, np.integer)):
            c = int(other) if isinstance(other, np.integer) else other
            return CycloValue(self.L, [x * c for x in self.coeffs])
        a, b = self._align(other)
        if a is None:
            return NotImplemented
        L = a.L
        vec = [0] * L
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in enumerate(b.coeffs):
                    if y:
                        vec[(i + j) % L] += x * y
        return CycloValue.from_group_ring(vec, L)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, np.integer)):
            c = Fraction(int(other) if isinstance(other, np.integer) else other)
            return CycloValue(self.L, [_normalize(Fraction(x) / c) for x in self.coeffs])
        return NotImplemented

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative powers are not supported")
        result = CycloValue.from_int(1, self.L)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conj(self):
        """Complex conjugation zeta -> zeta^-1."""
        L = self.L
        vec = [0] * L
        for i, c in enumerate(self.coeffs):
            vec[(-i) % L] += c
        return CycloValue.from_group_ring(vec, L)

    def abs2(self):
        return self * self.conj()

    # comparisons and conversions
    def is_zero(self):
        return not any(self.coeffs)

    def rational(self):
        """The value as an int/Fraction if it is rational, else None."""
        if any(self.coeffs[1:]):
            return None
        return _normalize(self.coeffs[0])

    def __eq__(self, other):
        a, b = self._align(other)
        if a is None:
            return NotImplemented
        return a.coeffs == b.coeffs

    def __hash__(self):
        r = self.rational()
        if r is not None:
            return hash(r)
        return hash((self.L, self.coeffs))

    def to_complex(self):
        L = self.L
        acc = 0j
        for i, c in enumerate(self.coeffs):
            if c:
                acc += float(c) * complex(math.cos(2 * math.pi * i / L), math.sin(2 * math.pi * i / L))
        return acc

    __complex__ = to_complex

    def __repr__(self):
        return f"CycloValue(L={self.L}, {list(self.coeffs)})"


def _normalize(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return int(c.numerator)
    return c


# -- group-ring arrays (last axis = exponent of zeta_L) -----------------------------


def _as_safe(a, b=None, factor=1):
    """Promote to object dtype when an int64 product could overflow."""
    if a.dtype == object or (b is not None and b.dtype == object):
        return a.astype(object), (None if b is None else b.astype(object))
    ma = int(np.abs(a).max(initial=0))
    mb = 1 if b is None else int(np.abs(b).max(initial=0))
    if ma * mb * factor >= _INT64_SAFE:
        return a.astype(object), (None if b is None else b.astype(object))
    return a, b


def gr_mul(a, b):
    """Cyclic convolution along the last axis (exact)."""
    a = np.asarray(a)
    b = np.asarray(b)
    L = a.shape[-1]
    a, b = _as_safe(a, b, L)
    shape = np.broadcast_shapes(a.shape, b.shape)
    out = np.zeros(shape, dtype=a.dtype if a.dtype == object else np.int64)
    for s in range(L):
        coef = a[..., s : s + 1]
        if np.any(coef != 0):
            out = out + coef * np.roll(b, s, axis=-1)
    return out


def gr_conj(a):
    a = np.asarray(a)
    L = a.shape[-1]
    return a[..., (-np.arange(L)) % L]


def gr_abs2(a):
    return gr_mul(a, gr_conj(a))


def gr_pow(a, k):
    a = np.asarray(a)
    result = np.zeros(a.shape, dtype=np.int64)
    result[..., 0] = 1
    base = a
    while k:
        if k & 1:
            result = gr_mul(result, base)
        k >>= 1
        if k:
            base = gr_mul(base, base)
    return result


def gr_reduce(a):
    """Power-basis coordinates (last axis phi(L)) of a group-ring array."""
    a = np.asarray(a)
    R = reduction_matrix(a.shape[-1])
    a, _ = _as_safe(a, None, R.shape[0] * int(np.abs(R).max(initial=1)))
    if a.dtype == object:
        return a @ R.astype(object)
    return a @ R


def gr_to_cyclo(vec):
    vec = np.asarray(vec)
    return CycloValue.from_group_ring([int(c) if not isinstance(c, Fraction) else c for c in vec], vec.shape[-1])


def gr_to_complex(a):
    a = np.asarray(a)
    L = a.shape[-1]
    roots = np.exp(2j * np.pi * np.arange(L) / L)
    if a.dtype == object:
        a = a.astype(np.float64)
    return a @ roots


def gr_lift(a, L):
    """Re-embed a group-ring array over zeta_l into zeta_L (l | L)."""
    a = np.asarray(a)
    l = a.shape[-1]
    if l == L:
        return a
    if L % l:
        raise ValueError(f"{l} does not divide {L}")
    out = np.zeros(a.shape[:-1] + (L,), dtype=a.dtype)
    out[..., :: L // l] = a
    return out


def gr_is_zero(a):
    """Per-element exact zero test (reduces first)."""
    return np.all(gr_reduce(a) == 0, axis=-1)
