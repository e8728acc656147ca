"""The group W_{d,q} = (F_q[t]/t^{d+1})^x / F_q^x and its characters.

Every class has a unique representative 1 + a_1 t + ... + a_d t^d, so an element is
just the coefficient vector (a_1, ..., a_d) over F_q.  The group is an abelian p-group
with an explicit basis: for each k <= d prime to p and each F_p-basis vector u^i of
F_q, the element 1 - u^i t^k has order p^l where l = #{j >= 0 : k p^j <= d}.  Its p^j-th
power is 1 - u^(i p^j) t^(k p^j), so these generators hit every layer of the
filtration by powers of t exactly once; the discrete-log table built below confirms it.

Characters are exponent vectors against this basis, with values in mu_M for the group
exponent M = p^(r+1).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .cyclo import CycloValue
from .errors import BudgetExceeded, MixedParameters, PlaceZero
from .ffield import extend, make_field, minimal_polynomial

DEFAULT_BUDGET = 10**8


def enumeration_budget():
    """Largest group/enumeration size allowed (TWISTLAB_BUDGET overrides)."""
    raw = os.environ.get("TWISTLAB_BUDGET")
    if raw:
        return int(float(raw))
    return DEFAULT_BUDGET


def _top_exponent(p, d):
    r = 0
    while p ** (r + 1) <= d:
        r += 1
    return r


@dataclass(frozen=True)
class WittGroupElement:
    """Class of 1 + a_1 t + ... + a_d t^d in W_{d,q}."""

    group: "WittGroup"
    coeffs: tuple

    def __mul__(self, other):
        return self.group.mul(self, other)

    def __pow__(self, k):
        return self.group.pow(self, k)

    def inverse(self):
        return self.group.inv(self)

    def is_identity(self):
        return not any(self.coeffs)

    def __repr__(self):
        terms = ["1"]
        for k, a in enumerate(self.coeffs, start=1):
            if a:
                mono = "t" if k == 1 else f"t^{k}"
                terms.append(mono if a == 1 else f"{a}*{mono}")
        return f"W[{' + '.join(terms)}]"


class WittGroup:
    """W_{d,q} for q = p^e; use :func:`make_group` for the cached instance."""

    def __init__(self, q, d):
        from sympy import perfect_power, isprime

        if d < 1:
            raise ValueError("d must be at least 1")
        if isprime(q):
            p, e = q, 1
        else:
            pp = perfect_power(q)
            if not pp or not isprime(pp[0]):
                raise ValueError(f"{q} is not a prime power")
            p, e = int(pp[0]), int(pp[1])
        self.q, self.d, self.p, self.e = q, d, p, e
        self.field = make_field(p, e)
        self.r = _top_exponent(p, d)
        self.M = p ** (self.r + 1)
        self.order = q**d

        gens, orders, labels = [], [], []
        for k in range(1, d + 1):
            if k % p == 0:
                continue
            ell = 0
            while k * p**ell <= d:
                ell += 1
            for i in range(e):
                coeffs = [0] * d
                coeffs[k - 1] = self.field.neg(p**i)
                gens.append(tuple(coeffs))
                orders.append(p**ell)
                labels.append((k, i))
        self.generators = gens
        self.orders = tuple(orders)
        self.labels = labels
        self.rank = len(orders)
        strides = [1] * self.rank
        for i in range(self.rank - 2, -1, -1):
            strides[i] = strides[i + 1] * orders[i + 1]
        self.strides = tuple(strides)
        self._weights = np.array([self.M // o for o in orders], dtype=np.int64)

    def __repr__(self):
        return f"WittGroup(q={self.q}, d={self.d})"

    def __reduce__(self):
        return (make_group, (self.q, self.d))

    # -- elements
    def element(self, coeffs):
        coeffs = tuple(int(c) for c in coeffs)
        if len(coeffs) == self.d + 1:
            if coeffs[0] == 0:
                raise ValueError("constant term must be a unit")
            inv = self.field.inv(coeffs[0])
            coeffs = tuple(self.field.mul(inv, c) for c in coeffs[1:])
        if len(coeffs) != self.d:
            raise ValueError(f"expected {self.d} coefficients")
        return WittGroupElement(self, coeffs)

    @property
    def identity(self):
        return WittGroupElement(self, (0,) * self.d)

    def basis(self):
        """[(generator, order)] for the fixed basis."""
        return [(WittGroupElement(self, g), o) for g, o in zip(self.generators, self.orders)]

    def _check(self, a):
        if a.group is not self:
            raise MixedParameters(f"element of {a.group} used in {self}")

    def mul(self, a, b):
        self._check(a)
        self._check(b)
        F = self.field
        x, y = (1,) + a.coeffs, (1,) + b.coeffs
        out = []
        for k in range(1, self.d + 1):
            acc = 0
            for i in range(k + 1):
                if x[i] and y[k - i]:
                    acc = F.add(acc, F.mul(x[i], y[k - i]))
            out.append(acc)
        return WittGroupElement(self, tuple(out))

    def inv(self, a):
        self._check(a)
        F = self.field
        x = (1,) + a.coeffs
        b = [1]
        for k in range(1, self.d + 1):
            acc = 0
            for i in range(1, k + 1):
                if x[i] and b[k - i]:
                    acc = F.add(acc, F.mul(x[i], b[k - i]))
            b.append(F.neg(acc))
        return WittGroupElement(self, tuple(b[1:]))

    def pow(self, a, k):
        if k < 0:
            a, k = self.inv(a), -k
        result, base = self.identity, a
        while k:
            if k & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            k >>= 1
        return result

    def all_elements(self):
        flat = self.element_table
        return [WittGroupElement(self, tuple(int(c) for c in row)) for row in flat]

    # -- vectorized arithmetic on (..., d) coefficient arrays
    def vmul(self, a, b):
        F = self.field
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        shape = np.broadcast_shapes(a.shape, b.shape)
        out = np.empty(shape, dtype=np.int64)
        for k in range(1, self.d + 1):
            acc = F.vadd(a[..., k - 1], b[..., k - 1])
            for i in range(1, k):
                acc = F.vadd(acc, F.vmul(a[..., i - 1], b[..., k - i - 1]))
            out[..., k - 1] = acc
        return out

    def encode(self, coeffs):
        """Integer index sum a_k q^(k-1) of coefficient arrays (..., d)."""
        coeffs = np.asarray(coeffs, dtype=np.int64)
        weights = np.array([self.q**k for k in range(self.d)], dtype=np.int64)
        return coeffs @ weights

    @cached_property
    def element_table(self):
        """(q^d, d) array: row c is the element with flat basis exponent index c."""
        if self.order > enumeration_budget():
            raise BudgetExceeded(f"|W_{{{self.d},{self.q}}}| = {self.order} exceeds the budget")
        cur = np.zeros((1, self.d), dtype=np.int64)
        for g, o in zip(self.generators, self.orders):
            powers = [np.zeros(self.d, dtype=np.int64)]
            gv = np.array(g, dtype=np.int64)
            for _ in range(o - 1):
                powers.append(self.vmul(powers[-1], gv))
            powers = np.array(powers)
            cur = self.vmul(cur[:, None, :], powers[None, :, :]).reshape(-1, self.d)
        cur.setflags(write=False)
        return cur

    @cached_property
    def dlog_table(self):
        """Map from encoded element to flat exponent index; proves the basis is a basis."""
        codes = self.encode(self.element_table)
        table = np.full(self.order, -1, dtype=np.int64)
        table[codes] = np.arange(self.order, dtype=np.int64)
        if np.any(table < 0):
            raise AssertionError("generators do not form a basis")  # pragma: no cover
        table.setflags(write=False)
        return table

    def vdlog_flat(self, coeffs):
        return self.dlog_table[self.encode(coeffs)]

    def unflatten(self, flat):
        flat = np.asarray(flat, dtype=np.int64)
        return np.stack([(flat // s) % o for s, o in zip(self.strides, self.orders)], axis=-1)

    def flatten(self, exps):
        exps = np.asarray(exps, dtype=np.int64)
        return (exps % np.array(self.orders)) @ np.array(self.strides, dtype=np.int64)

    def dlog(self, a):
        """Exponent vector of ``a`` against the basis."""
        self._check(a)
        flat = int(self.vdlog_flat(np.array(a.coeffs, dtype=np.int64)))
        return tuple(int(c) for c in self.unflatten(flat))

    # -- characters
    def character(self, exponents):
        exps = tuple(int(c) % o for c, o in zip(exponents, self.orders))
        if len(exps) != self.rank:
            raise ValueError(f"expected {self.rank} exponents")
        return Character(self, exps)

    def character_from_index(self, index):
        return self.character(self.unflatten(int(index)))

    @property
    def trivial_character(self):
        return Character(self, (0,) * self.rank)

    def characters(self):
        """All q^d characters in flat-index order."""
        if self.order > enumeration_budget():
            raise BudgetExceeded("too many characters to enumerate")
        return [Character(self, tuple(int(c) for c in row)) for row in self.unflatten(np.arange(self.order))]

    def phase_matrix(self, exps, flat_elements):
        """Phases (mod M) of characters ``exps`` (n, rank) at elements given by flat index."""
        exps = np.asarray(exps, dtype=np.int64)
        g = self.unflatten(flat_elements)
        return ((exps * self._weights) @ g.T) % self.M

    @cached_property
    def _conductor_probes(self):
        # dlogs of 1 - u^i t^J for every J <= d; these generate the filtration steps
        probes = np.zeros((self.d, self.e, self.d), dtype=np.int64)
        for J in range(1, self.d + 1):
            for i in range(self.e):
                probes[J - 1, i, J - 1] = self.field.neg(self.p**i)
        flat = self.vdlog_flat(probes.reshape(-1, self.d))
        return self.unflatten(flat).reshape(self.d, self.e, self.rank)

    def conductor_exponents(self, exps=None):
        """Vectorized conductor exponents; ``exps`` defaults to every character."""
        if exps is None:
            exps = self.unflatten(np.arange(self.order))
        exps = np.atleast_2d(np.asarray(exps, dtype=np.int64))
        probes = self._conductor_probes.reshape(-1, self.rank)
        phases = ((exps * self._weights) @ probes.T) % self.M
        nontrivial = (phases != 0).reshape(len(exps), self.d, self.e).any(axis=2)
        J = np.arange(1, self.d + 1)
        return np.where(nontrivial.any(axis=1), 1 + np.max(np.where(nontrivial, J, 0), axis=1), 0)

    def primitive_mask(self):
        return self.conductor_exponents() == self.d + 1

    def num_primitive(self):
        return self.q**self.d - self.q ** (self.d - 1)

    # -- norms of points
    def reduce_polynomial(self, f):
        """Class of f(1/t) t^deg f for a polynomial f over F_q (coefficients low -> high)."""
        F = self.field
        f = [int(c) for c in f]
        while f and f[-1] == 0:
            f.pop()
        if len(f) < 2:
            raise ValueError("need a polynomial of positive degree")
        if f[0] == 0:
            raise PlaceZero("polynomial vanishes at 0; the place 0 is excluded")
        lead_inv = F.inv(f[-1])
        D = len(f) - 1
        rev = [F.mul(lead_inv, f[D - j]) for j in range(1, D + 1)]
        rev = (rev + [0] * self.d)[: self.d]
        return WittGroupElement(self, tuple(rev))

    def norm_of_linear(self, x, n=1):
        """Class of prod_i (1 - x^(q^i) t) for x in F_{q^n}; the identity for x = 0."""
        x = int(x)
        if x == 0:
            return self.identity
        ext = extend(self.field, n)
        f = minimal_polynomial(ext, x)
        deg = len(f) - 1
        return self.pow(self.reduce_polynomial(f), n // deg)

    def level_norms(self, n):
        """(q^n, d) coefficient array of norm_of_linear over all x in F_{q^n}, vectorized."""
        return _level_norms(self, n)

    def level_index(self, n):
        """Flat basis index of norm_of_linear(x) for every x in F_{q^n}."""
        return _level_index(self, n)


@lru_cache(maxsize=None)
def make_group(q, d):
    return WittGroup(q, d)


@lru_cache(maxsize=8)
def _level_norms(group, n):
    ext = extend(group.field, n)
    F = ext.field
    Q = F.q
    d = group.d
    xs = np.arange(Q, dtype=np.int64)
    # elementary symmetric functions of the conjugates, truncated at degree d
    E = [np.ones(Q, dtype=np.int64)] + [np.zeros(Q, dtype=np.int64) for _ in range(d)]
    log = F.log_table
    exp = F.exp_table
    lx = log[xs]
    nz = xs != 0
    qpow = 1
    for _ in range(n):
        conj = np.where(nz, exp[(lx * qpow) % (Q - 1)], 0)
        for j in range(min(d, n), 0, -1):
            E[j] = F.vsub(E[j], F.vmul(conj, E[j - 1]))
        qpow = (qpow * group.q) % (Q - 1) if Q > 2 else 1
    out = np.zeros((Q, d), dtype=np.int64)
    for j in range(1, min(d, n) + 1):
        out[:, j - 1] = ext.vdescend(E[j])
    out.setflags(write=False)
    return out


@lru_cache(maxsize=16)
def _level_index(group, n):
    idx = group.vdlog_flat(_level_norms(group, n))
    idx.setflags(write=False)
    return idx


@dataclass(frozen=True)
class Character:
    """Character with Lambda(g_i) = zeta_{o_i}^{e_i} on the basis of its group."""

    group: WittGroup
    exponents: tuple

    @property
    def index(self):
        return int(self.group.flatten(self.exponents))

    def phase(self, a):
        """Exponent j with Lambda(a) = zeta_M^j."""
        G = self.group
        c = G.dlog(a)
        return sum(e * ci * (G.M // o) for e, ci, o in zip(self.exponents, c, G.orders)) % G.M

    def __call__(self, a):
        return CycloValue.root(self.phase(a), self.group.M)

    def __mul__(self, other):
        return self.group.character([a + b for a, b in zip(self.exponents, other.exponents)])

    def conj(self):
        return self.group.character([-a for a in self.exponents])

    def is_trivial(self):
        return not any(self.exponents)

    @property
    def order(self):
        from math import gcd

        out = 1
        for e, o in zip(self.exponents, self.group.orders):
            k = o // gcd(e, o)
            out = out * k // gcd(out, k)
        return out

    def conductor_exponent(self):
        return int(self.group.conductor_exponents([self.exponents])[0])

    def is_primitive(self):
        return self.conductor_exponent() == self.group.d + 1

    def __repr__(self):
        return f"Character(q={self.group.q}, d={self.group.d}, {list(self.exponents)})"


def char_eval(character, a):
    return character(a)


def characters(group):
    return group.characters()


def conductor_exponent(character):
    return character.conductor_exponent()


def basis(group):
    return group.basis()
