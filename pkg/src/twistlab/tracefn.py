"""Trace functions x -> tr(Frob_{q^n}, F, x) of the sheaves that get twisted.

A trace function is evaluated all at once over a whole field F_{q^n} (in the field
encoding of ``extend(make_field(p, e), n).field``).  Values are either plain integers
or roots of unity zeta_L^j (stored as exponents, -1 meaning the value 0).

Polynomial data (Kummer g, Artin-Schreier g, Weierstrass a_i(x)) has coefficients in
the prime field F_p, so the same family can be used over every q = p^e.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import fpoly
from .cyclo import CycloValue
from .errors import (
    BadCharacteristic,
    BudgetExceeded,
    IdenticallySingular,
    NonMinimalModel,
    NotSquarefree,
    OrderIncompatible,
    SlopeDivisibleByP,
)
from .ffield import extend, make_field
from .wgroup import enumeration_budget, make_group


@dataclass
class TraceValues:
    """Values on every x of one field: integers, or zeta_order^exps (exps < 0 -> 0)."""

    ints: Optional[np.ndarray] = None
    exps: Optional[np.ndarray] = None
    order: int = 1

    def __len__(self):
        return len(self.ints if self.ints is not None else self.exps)

    def to_complex(self):
        if self.ints is not None:
            return self.ints.astype(np.complex128)
        vals = np.exp(2j * np.pi * self.exps / self.order)
        return np.where(self.exps >= 0, vals, 0)

    def abs2(self):
        """|value|^2 as exact integers."""
        if self.ints is not None:
            return self.ints * self.ints
        return (self.exps >= 0).astype(np.int64)

    def terms(self):
        """(exponent, weight) arrays with value = weight * zeta_order^exponent."""
        if self.ints is not None:
            return np.zeros(len(self.ints), dtype=np.int64), self.ints
        return np.where(self.exps >= 0, self.exps, 0), (self.exps >= 0).astype(np.int64)

    def value(self, i):
        if self.ints is not None:
            return int(self.ints[i])
        j = int(self.exps[i])
        if j < 0:
            return CycloValue.from_int(0, self.order)
        return CycloValue.root(j, self.order)


@dataclass
class TraceFunction:
    """A pure trace function with the metadata entering the rank formula."""

    kind: str
    p: int
    weight: int
    rank: int
    c_F: int
    slope: Fraction
    params: dict = field(default_factory=dict)
    value_order: int = 1
    fixed_q: Optional[int] = None
    name: str = ""
    _compute: Optional[Callable] = field(default=None, repr=False, compare=False)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def highest_slope_at_infinity(self):
        return self.slope

    @property
    def is_tame(self):
        return self.slope == 0

    def check_q(self, q):
        p = self.p
        e = 0
        while q % p == 0:
            q //= p
            e += 1
        if q != 1 or e == 0:
            raise ValueError(f"q is not a power of the characteristic {p}")
        return e

    def values(self, q, n=1):
        """TraceValues at every x in F_{q^n}."""
        key = (q, n)
        if key not in self._cache:
            self.check_q(q)
            if self.fixed_q is not None and q != self.fixed_q:
                raise ValueError(f"{self.kind} trace function only lives over F_{self.fixed_q}")
            vals = self._compute(q, n)
            self._check_bound(vals, q**n)
            self._cache[key] = vals
        return self._cache[key]

    def _check_bound(self, vals, Q):
        bound = self.rank**2 * Q**self.weight
        if int(vals.abs2().max(initial=0)) > bound:
            raise AssertionError(f"{self.kind}: trace value exceeds m q^(w/2)")

    def evaluate(self, x, q, n=1):
        return self.values(q, n).value(int(x))

    evaluator = evaluate

    def second_moment_ratio(self, q, n=1):
        total = int(self.values(q, n).abs2().sum())
        return Fraction(total, (q**n) ** (self.weight + 1))

    def exceptional_character(self, group):
        """The character Lambda whose twist has no H^1 (this T is itself a character)."""
        if self.kind == "trivial":
            return group.trivial_character
        if self.kind == "character_twist" and (group.q, group.d) == self.params["group"]:
            return group.character(self.params["exponents"]).conj()
        return None

    def describe(self):
        return {"kind": self.kind, "name": self.name, **{k: v for k, v in self.params.items() if k != "group"}}


def _poly_values(F, coeffs, xs):
    """Evaluate an F_p-coefficient polynomial at field encodings ``xs``."""
    return F.vpoly_eval([int(c) for c in coeffs], xs)


def _level(p, q, n):
    e = 0
    while q > 1:
        q //= p
        e += 1
    base = make_field(p, e)
    ext = extend(base, n)
    return base, ext


# -- families -----------------------------------------------------------------------


def trivial(p=None):
    """The constant sheaf: value 1 everywhere."""

    def compute(q, n):
        return TraceValues(ints=np.ones(q**n, dtype=np.int64))

    tf = TraceFunction("trivial", p or 0, 0, 1, 0, Fraction(0), name="trivial")
    tf._compute = compute
    if p is None:
        tf.check_q = lambda q: None
    return tf


def kummer(order, g, p):
    """x -> chi(N(g(x))) for the order-``order`` character chi(generator) = zeta_order."""
    g = fpoly.trim([int(c) % p for c in g])
    if order < 2:
        raise ValueError("character order must be at least 2")
    if len(g) < 2:
        raise ValueError("g must have positive degree")
    if not fpoly.is_squarefree(g, p):
        raise NotSquarefree(f"{fpoly.to_string(g)} is not squarefree")

    def compute(q, n):
        if (q - 1) % order:
            raise OrderIncompatible(f"order {order} does not divide q - 1 = {q - 1}")
        base, ext = _level(p, q, n)
        F = ext.field
        y = _poly_values(F, g, np.arange(F.q, dtype=np.int64))
        norm = ext.vnorm_to_base(y)
        exps = np.where(norm == 0, -1, base.log_table[norm] % order)
        return TraceValues(exps=exps, order=order)

    tf = TraceFunction(
        "kummer", p, 0, 1, len(g) - 1, Fraction(0),
        params={"order": order, "g": g}, value_order=order, name=f"kummer{order}",
    )
    tf._compute = compute
    return tf


def artin_schreier(g, p):
    """x -> psi_p(Tr_{F_{q^n}/F_p} g(x)) with psi_p(1) = zeta_p."""
    g = fpoly.trim([int(c) % p for c in g])
    D = len(g) - 1
    if D < 1:
        raise ValueError("g must have positive degree")
    if D % p == 0:
        raise SlopeDivisibleByP(f"deg g = {D} is divisible by p = {p}")

    def compute(q, n):
        _, ext = _level(p, q, n)
        F = ext.field
        y = _poly_values(F, g, np.arange(F.q, dtype=np.int64))
        return TraceValues(exps=F.vabsolute_trace(y), order=p)

    tf = TraceFunction(
        "artin_schreier", p, 0, 1, 0, Fraction(D),
        params={"g": g}, value_order=p, name="artin_schreier",
    )
    tf._compute = compute
    return tf


def character_twist(q, d, exponents):
    """x -> Lambda_0(norm_of_linear(x)) for a fixed character Lambda_0 of W_{d,q}."""
    G = make_group(q, d)
    chi = G.character(exponents)

    def compute(q_, n):
        idx = G.level_index(n)
        exps = G.phase_matrix([chi.exponents], idx)[0]
        return TraceValues(exps=exps, order=G.M)

    cond = chi.conductor_exponent()
    tf = TraceFunction(
        "character_twist", G.p, 0, 1, 0, Fraction(max(cond - 1, 0)),
        params={"group": (q, d), "exponents": list(chi.exponents)},
        value_order=G.M, fixed_q=q, name="character_twist",
    )
    tf._compute = compute
    return tf


# -- elliptic curves ----------------------------------------------------------------


@dataclass
class WeierstrassData:
    """Invariants of y^2 + a1 z y + a3 y = z^3 + a2 z^2 + a4 z + a6 over F_p[x]."""

    p: int
    a: tuple
    b2: list
    b4: list
    b6: list
    b8: list
    c4: list
    c6: list
    disc: list


def weierstrass_invariants(a1, a2, a3, a4, a6, p):
    P = lambda *terms: _lin(p, *terms)  # noqa: E731
    m = lambda x, y: fpoly.mul(x, y, p)  # noqa: E731
    a1, a2, a3, a4, a6 = (fpoly.trim([int(c) % p for c in v]) for v in (a1, a2, a3, a4, a6))
    b2 = P((1, m(a1, a1)), (4, a2))
    b4 = P((2, a4), (1, m(a1, a3)))
    b6 = P((1, m(a3, a3)), (4, a6))
    b8 = P((1, m(m(a1, a1), a6)), (4, m(a2, a6)), (-1, m(m(a1, a3), a4)), (1, m(a2, m(a3, a3))), (-1, m(a4, a4)))
    c4 = P((1, m(b2, b2)), (-24, b4))
    c6 = P((-1, m(b2, m(b2, b2))), (36, m(b2, b4)), (-216, b6))
    disc = P((-1, m(m(b2, b2), b8)), (-8, m(b4, m(b4, b4))), (-27, m(b6, b6)), (9, m(b2, m(b4, b6))))
    return WeierstrassData(p, (a1, a2, a3, a4, a6), b2, b4, b6, b8, c4, c6, disc)


def _lin(p, *terms):
    out = []
    for c, poly in terms:
        out = fpoly.add(out, fpoly.scale(poly, c % p, p), p)
    return out


def elliptic_conductor(W):
    """c_F = deg rad(Delta) + deg rad(gcd(Delta, c4)) for a model minimal at finite places."""
    p = W.p
    if not W.disc:
        raise IdenticallySingular("discriminant is identically zero")
    c4_high = fpoly.high_multiplicity_part(W.c4, 4, p)
    c6_high = fpoly.high_multiplicity_part(W.c6, 6, p)
    if c4_high is None and c6_high is None:
        raise NonMinimalModel("c4 and c6 both vanish")
    if c4_high is None:
        bad = c6_high
    elif c6_high is None:
        bad = c4_high
    else:
        bad = fpoly.gcd(c4_high, c6_high, p)
    if len(bad) > 1:
        raise NonMinimalModel(f"model is not minimal at the roots of {fpoly.to_string(bad)}")
    rad_disc = fpoly.radical(W.disc, p)
    additive = fpoly.gcd(rad_disc, W.c4, p) if W.c4 else rad_disc
    return fpoly.degree(rad_disc) + fpoly.degree(additive)


def reduction_types(W):
    """{place (monic irreducible-power-free factor): 'multiplicative' | 'additive'} by valuations.

    Only used as a test oracle; places are returned as the squarefree pieces of the
    discriminant split by whether c4 vanishes there.
    """
    p = W.p
    rad_disc = fpoly.radical(W.disc, p)
    additive = fpoly.gcd(rad_disc, W.c4, p) if W.c4 else rad_disc
    multiplicative = fpoly.exact_div(rad_disc, additive, p)
    return {"multiplicative": multiplicative, "additive": additive}


def _affine_structure(polys, p):
    """Write every poly as alpha + beta*h(x) for one common h, if possible."""
    h = None
    for f in polys:
        rest = [0] + list(f[1:]) if len(f) > 1 else []
        rest = fpoly.trim(rest)
        if rest:
            h = rest
            break
    if h is None:
        h = [0, 1]
    out = []
    lead = h[-1]
    for f in polys:
        const = f[0] if f else 0
        rest = fpoly.trim([0] + list(f[1:])) if len(f) > 1 else []
        if not rest:
            out.append((const, 0))
            continue
        if len(rest) != len(h):
            return None
        beta = (rest[-1] * pow(lead, -1, p)) % p
        if fpoly.scale(h, beta, p) != rest:
            return None
        out.append((const, beta))
    return h, out


def elliptic(a1=(), a2=(), a3=(), a4=(), a6=(), p=None, name="elliptic"):
    """x -> q^n + 1 - #W_x(F_{q^n}) for the Weierstrass fibre at x (characteristic >= 5)."""
    if p is None:
        raise ValueError("the characteristic p is required")
    if p < 5:
        raise BadCharacteristic("elliptic families need characteristic at least 5")
    W = weierstrass_invariants(a1, a2, a3, a4, a6, p)
    c_F = elliptic_conductor(W)
    inv2, inv4 = pow(2, -1, p), pow(4, -1, p)
    # completing the square: y'^2 = z^3 + (b2/4) z^2 + (b4/2) z + b6/4
    A = fpoly.scale(W.b2, inv4, p)
    B = fpoly.scale(W.b4, inv2, p)
    C = fpoly.scale(W.b6, inv4, p)
    affine = _affine_structure([A, B, C], p)

    def compute(q, n):
        _, ext = _level(p, q, n)
        F = ext.field
        if affine is not None:
            return TraceValues(ints=_elliptic_fast(F, affine))
        return TraceValues(ints=_elliptic_direct(F, A, B, C))

    tf = TraceFunction(
        "elliptic", p, 1, 2, c_F, Fraction(0),
        params={"a1": W.a[0], "a2": W.a[1], "a3": W.a[2], "a4": W.a[3], "a6": W.a[4]},
        name=name,
    )
    tf._compute = compute
    tf.weierstrass = W
    return tf


def legendre(p):
    """y^2 = z(z - 1)(z - x)."""
    return elliptic(a2=[p - 1, p - 1], a4=[0, 1], p=p, name="legendre")


def _elliptic_fast(F, affine):
    """All traces at once when the cubic is P0(z) + h(x) P1(z)."""
    h, ((a0, a1), (b0, b1), (c0, c1)) = affine
    Q = F.q
    z = np.arange(Q, dtype=np.int64)
    z2 = F.vmul(z, z)
    z3 = F.vmul(z2, z)
    P0 = F.vadd(F.vadd(z3, F.vmul(z2, a0)), F.vadd(F.vmul(z, b0), c0))
    P1 = F.vadd(F.vadd(F.vmul(z2, a1), F.vmul(z, b1)), np.full(Q, c1, dtype=np.int64))
    chi = F.vquadratic_character
    good = P1 != 0
    # sum_z chi(P0 + lam P1) = sum_u W(u) chi(lam + u) + C0, u = P0/P1
    u = F.vmul(P0[good], F.vpow(P1[good], -1))
    weight = np.bincount(u, weights=chi(P1[good]), minlength=Q)
    C0 = int(chi(P0[~good]).sum())
    shape = (F.p,) * F.e
    wneg = weight[F.vneg(np.arange(Q))]
    conv = np.fft.ifftn(np.fft.fftn(wneg.reshape(shape)) * np.fft.fftn(chi(np.arange(Q)).astype(float).reshape(shape)))
    G = conv.real.reshape(Q)
    Gi = np.rint(G).astype(np.int64)
    if np.max(np.abs(G - Gi), initial=0) > 1e-3:
        raise AssertionError("additive convolution lost integrality")  # pragma: no cover
    Gi += C0
    lam = F.vpoly_eval(h, np.arange(Q, dtype=np.int64))
    return -Gi[lam]


def _elliptic_direct(F, A, B, C):
    """O(Q^2) point count, one x at a time (no structure assumed)."""
    Q = F.q
    if Q * Q > enumeration_budget():
        raise BudgetExceeded(f"direct point count over F_{Q} exceeds the budget")
    z = np.arange(Q, dtype=np.int64)
    z2 = F.vmul(z, z)
    z3 = F.vmul(z2, z)
    xs = np.arange(Q, dtype=np.int64)
    Av, Bv, Cv = (F.vpoly_eval(f, xs) for f in (A, B, C))
    out = np.empty(Q, dtype=np.int64)
    for x in range(Q):
        P = F.vadd(F.vadd(z3, F.vmul(z2, Av[x])), F.vadd(F.vmul(z, Bv[x]), Cv[x]))
        out[x] = -int(F.vquadratic_character(P).sum())
    return out


def second_moment_ratio(T, q, n=1):
    return T.second_moment_ratio(q, n)
