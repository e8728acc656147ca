"""Finite fields F_{p^e}, extension levels F_{q^n}, and vectorized table arithmetic.

An element c_0 + c_1 X + ... + c_{e-1} X^{e-1} of F_p[X]/(modulus) is encoded as the
integer sum c_i p^i.  Integer order on encodings is therefore the lexicographic order
of coefficient vectors read from the highest coefficient down, and the same order is
used to pick moduli, primitive elements and embedding roots deterministically.
"""

from __future__ import annotations

import math
from functools import cached_property, lru_cache

import numpy as np
from sympy import factorint, isprime

from . import fpoly
from .errors import BudgetExceeded, DegreeTooLarge, NotPrime

MAX_BASE_DEGREE = 12
DEGREE_CAP = 24
# fields up to this size get full log/antilog tables (vectorized ops need them)
TABLE_LIMIT = 1 << 24
# below this size scalar multiplication goes through the tables too
SCALAR_TABLE_LIMIT = 1 << 16


def is_irreducible(f, p):
    """Rabin's test for a monic polynomial ``f`` (coefficients low -> high) over F_p."""
    n = len(f) - 1
    if n < 1:
        return False
    if n == 1:
        return True
    x = [0, 1]
    powers = {}
    h = x
    for k in range(1, n + 1):
        h = fpoly.powmod(h, p, f, p)
        powers[k] = h
    if fpoly.trim(list(powers[n])) != x:
        return False
    for ell in factorint(n):
        diff = list(powers[n // ell]) + [0] * 2
        diff[1] = (diff[1] - 1) % p
        if len(fpoly.gcd(f, fpoly.trim(diff), p)) > 1:
            return False
    return True


def least_irreducible(p, e):
    """Monic irreducible of degree ``e`` over F_p with the smallest integer encoding."""
    for code in range(p**e):
        coeffs = [(code // p**i) % p for i in range(e)] + [1]
        if is_irreducible(coeffs, p):
            return tuple(coeffs)
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


# -- the field ----------------------------------------------------------------------


class FiniteField:
    """F_{p^e} = F_p[X]/(modulus) with integer-encoded elements."""

    def __init__(self, p, e, modulus):
        self.p = p
        self.e = e
        self.q = p**e
        self.modulus = tuple(modulus)
        self.pows = np.array([p**i for i in range(e)], dtype=np.int64)
        self._pows = [p**i for i in range(e)]

    def __repr__(self):
        return f"FiniteField({self.p}^{self.e}, modulus={poly_str(self.modulus)})"

    def __reduce__(self):
        return (_field, (self.p, self.e))

    # encoding helpers
    def digits(self, a):
        return [(a // pw) % self.p for pw in self._pows]

    def from_digits(self, ds):
        return sum((int(c) % self.p) * pw for c, pw in zip(ds, self._pows))

    def to_digit_array(self, a):
        a = np.asarray(a, dtype=np.int64)
        return (a[..., None] // self.pows) % self.p

    def from_digit_array(self, ds):
        return (np.asarray(ds, dtype=np.int64) % self.p) @ self.pows

    def element(self, a):
        return FieldElement(self, self._coerce(a))

    __call__ = element

    def _coerce(self, a):
        if isinstance(a, FieldElement):
            return a.value
        if isinstance(a, (list, tuple)):
            return self.from_digits(a)
        a = int(a)
        if 0 <= a < self.q:
            return a
        raise ValueError(f"{a} does not encode an element of F_{self.q}")

    def elements(self):
        return [FieldElement(self, a) for a in range(self.q)]

    # -- scalar arithmetic on integer encodings
    def add(self, a, b):
        if self.p == 2:
            return a ^ b
        p = self.p
        return sum(((a // pw + b // pw) % p) * pw for pw in self._pows)

    def sub(self, a, b):
        if self.p == 2:
            return a ^ b
        p = self.p
        return sum(((a // pw - b // pw) % p) * pw for pw in self._pows)

    def neg(self, a):
        if self.p == 2:
            return a
        p = self.p
        return sum(((-(a // pw)) % p) * pw for pw in self._pows)

    def _use_tables(self):
        return self.q <= SCALAR_TABLE_LIMIT or "_tables" in self.__dict__

    def mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        if self._use_tables():
            exp, log = self._tables
            return int(exp[(int(log[a]) + int(log[b])) % (self.q - 1)])
        return self._mul_poly(a, b)

    def _mul_poly(self, a, b):
        prod = fpoly.mul(self.digits(a), self.digits(b), self.p)
        return self.from_digits(fpoly.mod(prod, list(self.modulus), self.p))

    def pow(self, a, k):
        if a == 0:
            if k < 0:
                raise ZeroDivisionError("0 has no inverse")
            return 0 if k > 0 else 1
        k %= self.q - 1
        if self._use_tables():
            exp, log = self._tables
            return int(exp[(int(log[a]) * k) % (self.q - 1)])
        return self._pow_poly(a, k)

    def _pow_poly(self, a, k):
        return self.from_digits(fpoly.powmod(self.digits(a), k, list(self.modulus), self.p))

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return self.pow(a, -1)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def frobenius(self, a, k=1):
        """a -> a^(p^k)."""
        if a == 0:
            return 0
        return self.pow(a, self.p ** (k % self.e))

    @cached_property
    def primitive_element(self):
        """Smallest-encoding generator of the multiplicative group."""
        n = self.q - 1
        if n == 1:
            return 1
        cofactors = [n // ell for ell in factorint(n)]
        for g in range(1, self.q):
            if all(self._pow_poly(g, c) != 1 for c in cofactors):
                return g
        raise AssertionError("no primitive element")  # pragma: no cover

    # -- tables and vectorized arithmetic
    def _mult_matrix(self, c):
        rows = [self.digits(self._mul_poly(pw, c)) for pw in self._pows]
        return np.array(rows, dtype=np.int64)

    @cached_property
    def _tables(self):
        q = self.q
        if q > TABLE_LIMIT:
            raise BudgetExceeded(f"F_{q} is above the table limit {TABLE_LIMIT}")
        n = q - 1
        g = self.primitive_element
        block = max(1, math.isqrt(n) + 1)
        first = [1]
        for _ in range(block - 1):
            first.append(self._mul_poly(first[-1], g))
        step = self._mult_matrix(self._mul_poly(first[-1], g) if q > 2 else 1)
        cur = self.to_digit_array(np.array(first, dtype=np.int64))
        out = []
        total = 0
        while total < n:
            out.append(cur @ self.pows)
            total += block
            cur = (cur @ step) % self.p
        exp = np.concatenate(out)[:n]
        counts = np.bincount(exp, minlength=q)
        if counts[0] != 0 or not np.all(counts[1:] == 1):
            raise AssertionError("antilog table is not a permutation")  # pragma: no cover
        log = np.zeros(q, dtype=np.int64)
        log[exp] = np.arange(n, dtype=np.int64)
        exp.setflags(write=False)
        log.setflags(write=False)
        return exp, log

    @property
    def exp_table(self):
        return self._tables[0]

    @property
    def log_table(self):
        return self._tables[1]

    def vadd(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.p == 2:
            return a ^ b
        out = np.zeros(np.broadcast(a, b).shape, dtype=np.int64)
        for pw in self._pows:
            out += ((a // pw + b // pw) % self.p) * pw
        return out

    def vsub(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.p == 2:
            return a ^ b
        out = np.zeros(np.broadcast(a, b).shape, dtype=np.int64)
        for pw in self._pows:
            out += ((a // pw - b // pw) % self.p) * pw
        return out

    def vneg(self, a):
        a = np.asarray(a, dtype=np.int64)
        if self.p == 2:
            return a.copy()
        out = np.zeros(a.shape, dtype=np.int64)
        for pw in self._pows:
            out += ((-(a // pw)) % self.p) * pw
        return out

    def vmul(self, a, b):
        exp, log = self._tables
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        r = exp[(log[a] + log[b]) % (self.q - 1)]
        return np.where((a == 0) | (b == 0), 0, r)

    def vpow(self, a, k):
        exp, log = self._tables
        a = np.asarray(a, dtype=np.int64)
        if k == 0:
            return np.ones(a.shape, dtype=np.int64)
        if k < 0 and np.any(a == 0):
            raise ZeroDivisionError("0 has no inverse")
        r = exp[(log[a] * (k % (self.q - 1))) % (self.q - 1)]
        return np.where(a == 0, 0, r)

    def vfrobenius(self, a, k=1):
        return self.vpow(a, self.p ** (k % self.e))

    def vquadratic_character(self, a):
        """Legendre symbol on F_q (q odd): 1, -1, or 0 at 0."""
        if self.p == 2:
            raise ValueError("quadratic character needs odd characteristic")
        a = np.asarray(a, dtype=np.int64)
        log = self.log_table
        return np.where(a == 0, 0, 1 - 2 * (log[a] % 2))

    def vpoly_eval(self, coeffs, xs):
        """Horner evaluation of a polynomial with coefficients (encodings, low -> high)."""
        xs = np.asarray(xs, dtype=np.int64)
        acc = np.zeros(xs.shape, dtype=np.int64)
        for c in reversed(list(coeffs)):
            acc = self.vadd(self.vmul(acc, xs), c)
        return acc

    def poly_eval(self, coeffs, x):
        acc = 0
        for c in reversed(list(coeffs)):
            acc = self.add(self.mul(acc, x), c)
        return acc

    @cached_property
    def trace_vector(self):
        """Absolute traces Tr_{F_q/F_p}(X^i); the trace is their dot product with digits."""
        out = []
        for pw in self._pows:
            acc, cur = 0, pw
            for _ in range(self.e):
                acc = self.add(acc, cur)
                cur = self.frobenius(cur)
            if acc >= self.p:
                raise AssertionError("trace left the prime field")  # pragma: no cover
            out.append(acc)
        return np.array(out, dtype=np.int64)

    def vabsolute_trace(self, a):
        return (self.to_digit_array(a) @ self.trace_vector) % self.p

    def absolute_trace(self, a):
        return int(sum(c * t for c, t in zip(self.digits(a), self.trace_vector)) % self.p)


class FieldElement:
    """Operator-friendly wrapper around an integer encoding."""

    __slots__ = ("field", "value")

    def __init__(self, field, value):
        self.field = field
        self.value = int(value)

    def _other(self, other):
        if isinstance(other, FieldElement):
            if other.field is not self.field:
                raise ValueError("elements of different fields")
            return other.value
        if isinstance(other, int) and self.field.e == 1:
            other %= self.field.p
        return self.field._coerce(other)

    def __add__(self, other):
        return FieldElement(self.field, self.field.add(self.value, self._other(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElement(self.field, self.field.sub(self.value, self._other(other)))

    def __rsub__(self, other):
        return FieldElement(self.field, self.field.sub(self._other(other), self.value))

    def __neg__(self):
        return FieldElement(self.field, self.field.neg(self.value))

    def __mul__(self, other):
        return FieldElement(self.field, self.field.mul(self.value, self._other(other)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return FieldElement(self.field, self.field.div(self.value, self._other(other)))

    def __pow__(self, k):
        return FieldElement(self.field, self.field.pow(self.value, k))

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return other.field is self.field and other.value == self.value
        if isinstance(other, int):
            return self.value == other
        return NotImplemented

    def __hash__(self):
        return hash((self.field.p, self.field.e, self.value))

    def __int__(self):
        return self.value

    __index__ = __int__

    def __repr__(self):
        return f"F{self.field.q}({self.value})"


@lru_cache(maxsize=None)
def _field(p, e):
    if e > DEGREE_CAP:
        raise DegreeTooLarge(f"degree {e} exceeds the cap {DEGREE_CAP}")
    return FiniteField(p, e, least_irreducible(p, e))


def make_field(p, e=1):
    """The deterministic model of F_{p^e}; repeated calls return the same object."""
    if not isinstance(p, (int, np.integer)) or p < 2 or not isprime(int(p)):
        raise NotPrime(f"{p} is not prime")
    if e < 1:
        raise ValueError("degree must be positive")
    if e > MAX_BASE_DEGREE:
        raise DegreeTooLarge(f"base degree {e} exceeds {MAX_BASE_DEGREE}")
    return _field(int(p), int(e))


def enumerate_field(F):
    """All elements in encoding order."""
    return F.elements()


class ExtensionField:
    """F_{q^n} modelled as the deterministic F_{p^{en}}, with an explicit embedding of F_q."""

    def __init__(self, base, n):
        if base.e * n > DEGREE_CAP:
            raise DegreeTooLarge(f"e*n = {base.e * n} exceeds the cap {DEGREE_CAP}")
        self.base = base
        self.n = n
        self.field = _field(base.p, base.e * n)
        self.root = self._find_root()
        F = self.field
        basis = [1]
        for _ in range(base.e - 1):
            basis.append(F.mul(basis[-1], self.root))
        self._basis = basis
        self._embed_matrix = F.to_digit_array(np.array(basis, dtype=np.int64))

    def __repr__(self):
        return f"ExtensionField(F_{self.base.q}^{self.n})"

    def _find_root(self):
        base, F = self.base, self.field
        if base.e == 1:
            return 0
        f = base.modulus
        if self.n == 1:
            return base.p  # X itself
        Q, q = F.q, base.q
        h = F.pow(F.primitive_element, (Q - 1) // (q - 1))
        s = 1
        for _ in range(q - 1):
            if F.poly_eval(f, s) == 0:
                orbit = [s]
                for _ in range(base.e - 1):
                    orbit.append(F.frobenius(orbit[-1]))
                return min(orbit)
            s = F.mul(s, h)
        raise AssertionError("base modulus has no root in the extension")  # pragma: no cover

    @property
    def q(self):
        return self.field.q

    def embed(self, a):
        F = self.field
        acc = 0
        for c, b in zip(self.base.digits(int(a)), self._basis):
            if c:
                acc = F.add(acc, F.mul(c % F.p, b))
        return acc

    def vembed(self, a):
        ds = self.base.to_digit_array(a)
        return self.field.from_digit_array((ds @ self._embed_matrix) % self.base.p)

    @cached_property
    def _descend_map(self):
        return {self.embed(a): a for a in range(self.base.q)}

    @cached_property
    def descend_table(self):
        table = np.full(self.field.q, -1, dtype=np.int64)
        table[self.vembed(np.arange(self.base.q))] = np.arange(self.base.q)
        table.setflags(write=False)
        return table

    def descend(self, x):
        if self.base.q <= SCALAR_TABLE_LIMIT:
            try:
                return self._descend_map[int(x)]
            except KeyError:
                raise ValueError(f"{x} is not in the base field") from None
        sol = _solve_mod_p(self._embed_matrix.tolist(), self.field.digits(int(x)), self.base.p)
        if sol is None:
            raise ValueError(f"{x} is not in the base field")
        return self.base.from_digits(sol)

    def vdescend(self, x):
        out = self.descend_table[np.asarray(x, dtype=np.int64)]
        if np.any(out < 0):
            raise ValueError("value outside the base field")
        return out

    def frobenius_q(self, x, i=1):
        return self.field.pow(x, self.base.q**i)

    def norm_to_base(self, x):
        F = self.field
        x = int(x)
        if x == 0:
            return 0
        return self.descend(F.pow(x, (F.q - 1) // (self.base.q - 1)))

    def trace_to_base(self, x):
        F = self.field
        acc, cur = 0, int(x)
        for _ in range(self.n):
            acc = F.add(acc, cur)
            cur = self.frobenius_q(cur)
        return self.descend(acc)

    def vnorm_to_base(self, x):
        F = self.field
        return self.vdescend(F.vpow(x, (F.q - 1) // (self.base.q - 1)))

    def vtrace_to_base(self, x):
        F = self.field
        cur = np.asarray(x, dtype=np.int64)
        acc = np.zeros(cur.shape, dtype=np.int64)
        for _ in range(self.n):
            acc = F.vadd(acc, cur)
            cur = F.vpow(cur, self.base.q)
        return self.vdescend(acc)


@lru_cache(maxsize=None)
def extend(F, n):
    """The level-n extension F_{q^n} of ``F`` (cached)."""
    if n < 1:
        raise ValueError("extension degree must be positive")
    return ExtensionField(F, n)


def minimal_polynomial(ext, x):
    """Minimal polynomial over the base field of ``x`` in ``ext``; monic, low -> high."""
    F = ext.field
    x = int(x)
    orbit = [x]
    cur = ext.frobenius_q(x)
    while cur != x:
        orbit.append(cur)
        cur = ext.frobenius_q(cur)
    poly = [1]
    for c in orbit:
        # poly * (X - c)
        shifted = [0] + poly
        scaled = [F.mul(c, a) for a in poly] + [0]
        poly = [F.sub(u, v) for u, v in zip(shifted, scaled)]
    return tuple(ext.descend(a) for a in poly)


def _solve_mod_p(rows, target, p):
    """Solve a . M = target over F_p, where ``rows`` are the rows of M."""
    m, n = len(rows), len(target)
    aug = [[rows[i][j] % p for i in range(m)] + [target[j] % p] for j in range(n)]
    pivots = []
    r = 0
    for c in range(m):
        piv = next((i for i in range(r, n) if aug[i][c]), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = pow(aug[r][c], -1, p)
        aug[r] = [(v * inv) % p for v in aug[r]]
        for i in range(n):
            if i != r and aug[i][c]:
                f = aug[i][c]
                aug[i] = [(u - f * v) % p for u, v in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
    if any(aug[i][m] for i in range(r, n)):
        return None
    sol = [0] * m
    for i, c in enumerate(pivots):
        sol[c] = aug[i][m]
    return sol


def poly_str(coeffs, var="X"):
    return fpoly.to_string(list(coeffs), var)
