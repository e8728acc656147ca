"""Witt vectors W_m(F_q) as Galois rings GR(p^m, e), and the Artin-Schreier-Witt
parametrization of the characters of W_{d,q}.

The ring is Z/p^m[Y]/(g) where g lifts the field modulus and Y is the Teichmueller
lift of the class of X.  With that choice the Frobenius is simply Y -> Y^p.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .cyclo import CycloValue
from .errors import BudgetExceeded, NoPerfectMatching
from .ffield import _field, extend
from .wgroup import enumeration_budget, make_group


def _poly_mulmod(a, b, f, mod):
    """Product of coefficient lists modulo a monic ``f`` and the integer ``mod``."""
    n = len(f) - 1
    out = [0] * (2 * n - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    for i in range(len(out) - 1, n - 1, -1):
        c = out[i] % mod
        if c:
            for j in range(n + 1):
                out[i - n + j] -= c * f[j]
    return [c % mod for c in out[:n]]


def _poly_powmod(a, k, f, mod):
    n = len(f) - 1
    result = [1] + [0] * (n - 1)
    while k:
        if k & 1:
            result = _poly_mulmod(result, a, f, mod)
        a = _poly_mulmod(a, a, f, mod)
        k >>= 1
    return result


def _solve_unit_mod(A, b, mod):
    """Solve x A = b over Z/mod when A reduces to an invertible matrix mod p.

    Pivots are chosen as entries prime to p, so elimination never divides by a
    non-unit.  Returns x as a list of residues.
    """
    n = len(A)
    # work on columns: we need sum_i x_i A[i][j] = b[j], i.e. A^T x = b
    M = [[A[i][j] % mod for i in range(n)] + [b[j] % mod] for j in range(n)]
    p = _smallest_prime_factor(mod)
    for c in range(n):
        piv = next(r for r in range(c, n) if M[r][c] % p)
        M[c], M[piv] = M[piv], M[c]
        inv = pow(M[c][c], -1, mod)
        M[c] = [(v * inv) % mod for v in M[c]]
        for r in range(n):
            if r != c and M[r][c]:
                f = M[r][c]
                M[r] = [(u - f * v) % mod for u, v in zip(M[r], M[c])]
    return [M[r][n] for r in range(n)]


def _smallest_prime_factor(n):
    k = 2
    while n % k:
        k += 1
    return k


class GaloisRing:
    """GR(p^m, e), the unramified degree-e extension of Z/p^m, modelling W_m(F_{p^e})."""

    def __init__(self, field, m):
        if m < 1:
            raise ValueError("m must be positive")
        self.field = field
        self.p, self.e, self.m = field.p, field.e, m
        self.mod = field.p**m
        self.modulus = self._teichmuller_modulus()
        e, mod = self.e, self.mod
        # rows: Y^j on the basis 1..Y^(e-1), for j < p*e so Frobenius images are direct
        top = max(2 * e - 1, self.p * (e - 1) + 1)
        rows = [[1] + [0] * (e - 1)]
        if e == 1:
            rows *= top
        else:
            y = [0, 1] + [0] * (e - 2)
            for _ in range(top - 1):
                rows.append(_poly_mulmod(rows[-1], y, list(self.modulus), mod))
        self._ypow = np.array(rows, dtype=np.int64)
        self._ypow.setflags(write=False)

    def __repr__(self):
        return f"GaloisRing(p^m={self.mod}, e={self.e})"

    def _teichmuller_modulus(self):
        p, e, mod = self.p, self.e, self.mod
        f0 = [int(c) for c in self.field.modulus]
        if e == 1 or self.m == 1:
            return tuple(f0)
        q = p**e
        # Teichmueller lift of X in the naive lift Z/p^m[X]/(f0)
        w = [0, 1] + [0] * (e - 2)
        for _ in range(self.m + 1):
            nxt = _poly_powmod(w, q, f0, mod)
            if nxt == w:
                break
            w = nxt
        else:
            raise AssertionError("Teichmueller iteration did not stabilize")  # pragma: no cover
        powers = [[1] + [0] * (e - 1)]
        for _ in range(e):
            powers.append(_poly_mulmod(powers[-1], w, f0, mod))
        coeffs = _solve_unit_mod(powers[:e], powers[e], mod)
        # w^e = sum c_j w^j, so w is a root of Y^e - sum c_j Y^j
        return tuple((-c) % mod for c in coeffs) + (1,)

    # -- elements are integer coefficient arrays of shape (..., e)
    def lift(self, x):
        """Naive digit lift of field encodings (not multiplicative)."""
        return self.field.to_digit_array(x)

    def reduce(self, w):
        return self.field.from_digit_array(np.asarray(w) % self.p)

    def add(self, a, b):
        return (np.asarray(a) + np.asarray(b)) % self.mod

    def mul(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        e = self.e
        shape = np.broadcast_shapes(a.shape, b.shape)
        conv = np.zeros(shape[:-1] + (2 * e - 1,), dtype=np.int64)
        for i in range(e):
            conv[..., i : i + e] = (conv[..., i : i + e] + a[..., i : i + 1] * b) % self.mod
        return (conv @ self._ypow[: 2 * e - 1]) % self.mod

    def pow(self, a, k):
        a = np.asarray(a, dtype=np.int64)
        result = np.zeros(a.shape, dtype=np.int64)
        result[..., 0] = 1
        while k:
            if k & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            k >>= 1
        return result

    def scalar(self, c):
        out = np.zeros(self.e, dtype=np.int64)
        out[0] = c % self.mod
        return out

    @cached_property
    def frobenius_matrix(self):
        e, p = self.e, self.p
        return self._ypow[[p * j for j in range(e)]] if e > 1 else np.ones((1, 1), dtype=np.int64)

    def frobenius(self, w, k=1):
        w = np.asarray(w, dtype=np.int64)
        for _ in range(k % self.e if self.e > 1 else 0):
            w = (w @ self.frobenius_matrix) % self.mod
        return w

    @cached_property
    def trace_vector(self):
        e = self.e
        out = []
        for j in range(e):
            v = np.zeros(e, dtype=np.int64)
            v[j] = 1
            acc = np.zeros(e, dtype=np.int64)
            for _ in range(e):
                acc = (acc + v) % self.mod
                v = self.frobenius(v)
            if np.any(acc[1:]):
                raise AssertionError("trace left Z/p^m")  # pragma: no cover
            out.append(int(acc[0]))
        return np.array(out, dtype=np.int64)

    def trace_to_zpm(self, w):
        return (np.asarray(w, dtype=np.int64) @ self.trace_vector) % self.mod

    def teichmuller(self, x):
        """Multiplicative lift of a residue-field element, by iterating w -> w^q."""
        w = self.lift(x)
        q = self.field.q
        for _ in range(self.m + 1):
            nxt = self.pow(w, q)
            if np.array_equal(nxt, w):
                return w
            w = nxt
        raise AssertionError("Teichmueller iteration did not stabilize")  # pragma: no cover

    @cached_property
    def teichmuller_table(self):
        """(q, e) array: row c is tau(c), built from powers of tau(primitive element)."""
        F = self.field
        q = F.q
        if q > enumeration_budget():
            raise BudgetExceeded(f"Teichmueller table for F_{q} exceeds the budget")
        table = np.zeros((q, self.e), dtype=np.int64)
        if q == 2:
            table[1] = self.scalar(1)
            return table
        g = F.primitive_element
        tg = self.teichmuller(g)
        n = q - 1
        block = int(np.sqrt(n)) + 1
        first = [self.scalar(1)]
        for _ in range(block - 1):
            first.append(self.mul(first[-1], tg))
        first = np.array(first)
        step = self.mul(first[-1], tg)
        chunks, cur = [], first
        for _ in range(-(-n // block)):
            chunks.append(cur)
            cur = self.mul(cur, step)
        powers = np.concatenate(chunks)[:n]
        exp = F.exp_table
        table[exp] = powers
        table.setflags(write=False)
        return table

    def witt_pack(self, components):
        """sum_i p^i tau(c_i^(p^-i)) for Witt components (c_0, ..., c_{m-1})."""
        F = self.field
        acc = np.zeros(self.e, dtype=np.int64)
        for i, c in enumerate(components):
            if i >= self.m:
                break
            root = F.pow(int(c), self.p ** ((-i) % self.e)) if int(c) else 0
            acc = (acc + self.p**i * self.teichmuller(root)) % self.mod
        return acc

    def trace_tables(self):
        """Per component i, Tr(tau(c^(p^-i))) for every c in the residue field."""
        return _trace_tables(self)


@lru_cache(maxsize=None)
def make_galois_ring(field, m):
    return GaloisRing(field, m)


@lru_cache(maxsize=32)
def _trace_tables(R):
    F = R.field
    tr = R.trace_to_zpm(R.teichmuller_table)
    out = []
    cs = np.arange(F.q, dtype=np.int64)
    for i in range(R.m):
        k = R.p ** ((-i) % R.e)
        out.append(tr[F.vpow(cs, k)] if i else tr)
    return out


def teichmuller(R, x):
    return R.teichmuller(x)


def frobenius(R, w):
    return R.frobenius(w)


def trace_to_zpm(R, w):
    return int(R.trace_to_zpm(w))


def witt_pack(R, components):
    return R.witt_pack(components)


# -- Artin-Schreier-Witt characters -------------------------------------------------


def witt_components(y, p, d):
    """Split (a_1..a_d) into f_i(x) = sum_{p∤k, p^i k <= d} a_{p^i k} x^k, i = 0..r.

    Returns a list of dicts {k: a_{p^i k}}.
    """
    y = list(y)
    if len(y) != d:
        raise ValueError(f"expected {d} coordinates")
    comps = []
    i = 0
    while p**i <= d:
        comp = {}
        for k in range(1, d // p**i + 1):
            if k % p:
                comp[k] = y[p**i * k - 1]
        comps.append(comp)
        i += 1
    return comps


def parameter_count(p, d):
    """Total number of coefficients across all components (equals d)."""
    return sum(len(c) for c in witt_components([0] * d, p, d))


def _asw_exponents(base, d, ys, n):
    """ASW exponents mod p^(r+1) for parameter points ``ys`` (k, d) at all x in F_{q^n}."""
    p = base.p
    G = make_group(base.q, d)
    m = G.r + 1
    ext = extend(base, n)
    F = ext.field
    R = make_galois_ring(F, m)
    tables = R.trace_tables()
    xs = np.arange(F.q, dtype=np.int64)
    monos = {}
    cur = np.ones(F.q, dtype=np.int64)
    for k in range(1, d + 1):
        cur = F.vmul(cur, xs)
        monos[k] = cur
    ys = np.asarray(ys, dtype=np.int64)
    emb = ext.vembed(ys)  # (k, d) embedded coefficients
    out = np.zeros((len(ys), F.q), dtype=np.int64)
    # f_i has degree <= d/p^i and occupies Witt slot r - i, so the Swan conductor
    # max_i p^i deg f_i is at most d, with equality exactly when a_d != 0
    for i in range(m):
        slot = m - 1 - i
        for row in range(len(ys)):
            val = np.zeros(F.q, dtype=np.int64)
            for k in range(1, d // p**i + 1):
                if k % p == 0:
                    continue
                a = int(emb[row, p**i * k - 1])
                if a:
                    val = F.vadd(val, F.vmul(monos[k], a))
            out[row] += p**slot * tables[slot][val]
    return out % G.M


def asw_trace_value(y, x, q, d, n=1):
    """psi(Tr(z - F(z) = (f_0(x), ..., f_r(x)))) as an exact root of unity."""
    G = make_group(q, d)
    exps = _asw_exponents(G.field, d, [list(y)], n)
    return CycloValue.root(int(exps[0, int(x)]), G.M)


def asw_phase(y, x, q, d, n=1):
    G = make_group(q, d)
    return int(_asw_exponents(G.field, d, [list(y)], n)[0, int(x)])


@dataclass
class MatchResult:
    q: int
    d: int
    depth: int
    points: np.ndarray  # (q^d, d) parameter points in encoding order
    characters: np.ndarray  # flat character index matched to each point

    @property
    def size(self):
        return len(self.points)

    def is_bijection(self):
        return len(np.unique(self.characters)) == self.size == self.q**self.d

    def primitivity_agrees(self):
        """Lambda_y primitive exactly when the top coordinate a_d is nonzero."""
        G = make_group(self.q, self.d)
        cond = G.conductor_exponents(G.unflatten(self.characters))
        return bool(np.all((cond == self.d + 1) == (self.points[:, -1] != 0)))

    def rows(self):
        G = make_group(self.q, self.d)
        cond = G.conductor_exponents(G.unflatten(self.characters))
        for y, c, f in zip(self.points, self.characters, cond):
            yield tuple(int(v) for v in y), tuple(int(v) for v in G.unflatten(int(c))), int(f)


def match_characters(q, d, depth=None):
    """Match every ASW parameter point y with the unique character having its trace table."""
    G = make_group(q, d)
    B = d if depth is None else depth
    if B < d:
        raise ValueError("depth must be at least d")
    if G.order > enumeration_budget():
        raise BudgetExceeded(f"q^d = {G.order} exceeds the budget")
    base = G.field
    for n in range(1, B + 1):
        if base.e * n > 24:
            raise BudgetExceeded("depth exceeds the extension cap")
    exps = G.unflatten(np.arange(G.order))
    points = np.stack(
        [(np.arange(G.order) // q**k) % q for k in range(d)], axis=-1
    ).astype(np.int64)
    lam_cols, y_cols = [], []
    for n in range(1, B + 1):
        idx = G.level_index(n)
        lam_cols.append(G.phase_matrix(exps, idx))
        y_cols.append(_asw_exponents(base, d, points, n))
    lam = np.ascontiguousarray(np.concatenate(lam_cols, axis=1))
    ytab = np.ascontiguousarray(np.concatenate(y_cols, axis=1))
    lookup = {}
    for c, row in enumerate(lam):
        key = row.tobytes()
        if key in lookup:
            raise NoPerfectMatching(f"characters {lookup[key]} and {c} share a trace table")
        lookup[key] = c
    matched = np.empty(G.order, dtype=np.int64)
    for i, row in enumerate(ytab):
        c = lookup.get(row.tobytes())
        if c is None:
            raise NoPerfectMatching(f"parameter point {tuple(points[i])} matches no character")
        matched[i] = c
    result = MatchResult(q, d, B, points, matched)
    if not result.is_bijection():
        raise NoPerfectMatching("two parameter points map to the same character")
    return result
