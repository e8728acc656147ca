"""Moment identities and moment statistics over families of twists.

The exact identities are the finite-q statements inside the orthogonality arguments:
averaging |sum_x F(x) Lambda(1 - t x)|^(2k) over all characters of W_{d,q} counts
pairs of k-tuples with equal products, and similarly for the mixed fourth moment of
two functions.  The statistics compare 1/q^(w+1) |S_1|^2 = |tr phi_Lambda|^2 with the
random-matrix predictions k! and 1.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .cyclo import CycloValue, gr_abs2, gr_mul, gr_pow, gr_reduce, gr_to_complex, gr_to_cyclo, lcm
from .errors import DTooSmall, KExceedsD
from .lfun import _exact_dft, compute_power_sums, select_characters
from .tracefn import TraceFunction, TraceValues
from .wgroup import make_group

SAMPLE_THRESHOLD = 10**6
PATH_TOLERANCE = 1e-9


# -- inputs -------------------------------------------------------------------------


def _as_values(F, q):
    """Normalize F (trace function, TraceValues, ints, or None for F = 1) to TraceValues."""
    if F is None:
        return TraceValues(ints=np.ones(q, dtype=np.int64))
    if isinstance(F, TraceFunction):
        return F.values(q, 1)
    if isinstance(F, TraceValues):
        return F
    arr = np.asarray(F, dtype=np.int64)
    if arr.shape != (q,):
        raise ValueError(f"expected {q} values")
    return TraceValues(ints=arr)


def _cyclo_value(vals, i):
    v = vals.value(i)
    return v if isinstance(v, CycloValue) else CycloValue.from_int(v, 1)


def _all_sums(group, vals):
    """Exact S_1 for every character (group-ring rows) for level-1 values ``vals``."""
    L = lcm(group.M, vals.order)
    idx = group.level_index(1)
    j, w = vals.terms()
    flat = idx * L + j * (L // vals.order)
    hist = np.bincount(flat, weights=w.astype(np.float64), minlength=group.order * L)
    hist = np.rint(hist).astype(np.int64).reshape(group.order, L)
    return _exact_dft(group, hist, L)


# -- exact identities ---------------------------------------------------------------


def orthogonality_identity(q, d, k, F=None):
    """(lhs, rhs) of the 2k-th moment identity, both exact CycloValues.

    lhs = q^-d sum_Lambda |sum_x F(x) Lambda(1 - t x)|^(2k);
    rhs = sum over pairs of k-tuples with prod (1 - t x_i) = prod (1 - t y_i) of
    prod F(x_i) conj(F(y_i)), by brute force over all tuples.
    """
    if k > d:
        raise KExceedsD(f"k = {k} exceeds d = {d}")
    if k < 1:
        raise ValueError("k must be positive")
    G = make_group(q, d)
    vals = _as_values(F, q)
    S = _all_sums(G, vals)
    moments = gr_pow(gr_abs2(S), k)
    lhs = gr_to_cyclo(moments.sum(axis=0)) / G.order

    Fq = G.field
    buckets = {}
    for tup in itertools.product(range(q), repeat=k):
        poly = [1]
        weight = CycloValue.from_int(1, 1)
        for x in tup:
            nxt = poly + [0]
            for i in range(len(poly)):
                nxt[i + 1] = Fq.sub(nxt[i + 1], Fq.mul(x, poly[i]))
            poly = nxt
            weight = weight * _cyclo_value(vals, x)
        key = tuple(poly)
        buckets[key] = buckets.get(key, 0) + weight
    rhs = CycloValue.from_int(0, 1)
    for w in buckets.values():
        rhs = rhs + w.abs2()
    return _common_ring(lhs, rhs)


def independence_identity(q, d, F1=None, F2=None):
    """(lhs, rhs) of the mixed fourth moment identity for two functions on F_q.

    lhs = q^-d sum_Lambda |S(F1)|^2 |S(F2)|^2;
    rhs = (sum |F1|^2)(sum |F2|^2) + |sum F1 conj F2|^2 - sum |F1|^2 |F2|^2.
    """
    if d < 2:
        raise DTooSmall("the identity needs d >= 2")
    G = make_group(q, d)
    v1, v2 = _as_values(F1, q), _as_values(F2, q)
    L = lcm(G.M, v1.order, v2.order)
    S1 = _lift_rows(_all_sums(G, v1), L)
    S2 = _lift_rows(_all_sums(G, v2), L)
    lhs = gr_to_cyclo(gr_mul(gr_abs2(S1), gr_abs2(S2)).sum(axis=0)) / G.order

    a = [_cyclo_value(v1, x) for x in range(q)]
    b = [_cyclo_value(v2, x) for x in range(q)]
    n1 = sum((x.abs2() for x in a), CycloValue.from_int(0, 1))
    n2 = sum((x.abs2() for x in b), CycloValue.from_int(0, 1))
    cross = sum((x * y.conj() for x, y in zip(a, b)), CycloValue.from_int(0, 1))
    diag = sum((x.abs2() * y.abs2() for x, y in zip(a, b)), CycloValue.from_int(0, 1))
    rhs = n1 * n2 + cross.abs2() - diag
    return _common_ring(lhs, rhs)


def _lift_rows(S, L):
    from .cyclo import gr_lift

    return gr_lift(S, L)


def _common_ring(a, b):
    L = lcm(a.L, b.L)
    return a.lift(L), b.lift(L)


# -- moment reports -----------------------------------------------------------------


@dataclass
class MomentReport:
    q: int
    d: int
    k: int
    family_id: str
    population: str
    pop_size: int
    empirical: complex
    reference: float
    deviation: float
    seed: Optional[int] = None
    exact: Optional[object] = None  # Fraction when the population is Galois stable
    all_average: Optional[Fraction] = None
    correction: Optional[object] = None
    exceptional_term: Optional[Fraction] = None
    remaining: Optional[object] = None
    path_agreement: float = 0.0
    notes: list = field(default_factory=list)

    def csv_row(self):
        return {
            "q": self.q, "d": self.d, "k": self.k, "family_id": self.family_id,
            "population": self.population, "pop_size": self.pop_size,
            "empirical_re": repr(float(self.empirical.real)), "empirical_im": repr(float(self.empirical.imag)),
            "reference": repr(float(self.reference)), "deviation": repr(float(self.deviation)),
            "seed": "" if self.seed is None else self.seed,
        }

    def to_json(self):
        out = asdict(self)
        out["empirical"] = [float(self.empirical.real), float(self.empirical.imag)]
        for key in ("exact", "all_average", "correction", "exceptional_term", "remaining"):
            out[key] = _exact_to_json(getattr(self, key))
        return out


def _exact_to_json(v):
    if v is None:
        return None
    if isinstance(v, CycloValue):
        r = v.rational()
        if r is None:
            return {"L": v.L, "coeffs": [str(c) for c in v.coeffs]}
        v = r
    return str(v)


def _rational_or_value(v):
    r = v.rational()
    return r if r is not None else v


def _population(G, population, seed, sample_size):
    if population in ("all", "primitive") and G.order > SAMPLE_THRESHOLD:
        population = "sample"
    if population == "sample" and seed is None:
        seed = 0
    idx = select_characters(G, population, sample_size, seed)
    return population, idx, (seed if population == "sample" else None)


def moment_report(T, q, d, k, population="primitive", seed=None, sample_size=None, family_id=None):
    """Average of |tr phi_Lambda|^(2k) over a population, against k!."""
    if k > d:
        raise KExceedsD(f"k = {k} exceeds d = {d}")
    G = make_group(q, d)
    exc = T.exceptional_character(G)
    if exc is not None and k >= d:
        raise KExceedsD("k must be below d when the trace function is itself a character")
    population, idx, seed = _population(G, population, seed, sample_size)
    w = T.weight
    scale = q ** (k * (w + 1))

    full = population != "sample"
    ps = compute_power_sums(T, G, 1, None if full else idx)
    S_all = ps.exact[1]
    S = S_all[idx] if full else S_all
    moments = gr_pow(gr_abs2(S), k)
    exact = gr_to_cyclo(moments.sum(axis=0)) / (len(idx) * scale)
    numeric = ps.numeric[1][idx] if full else ps.numeric[1]
    empirical = complex(np.mean(np.abs(numeric) ** (2 * k)) / scale)
    agreement = abs(exact.to_complex() - empirical) / max(abs(empirical), 1e-300)

    report = MomentReport(
        q=q, d=d, k=k, family_id=family_id or T.name or T.kind, population=population,
        pop_size=int(len(idx)), empirical=empirical, reference=float(math.factorial(k)),
        deviation=abs(empirical - math.factorial(k)), seed=seed,
        exact=_rational_or_value(exact), path_agreement=float(agreement),
    )
    if full:
        all_m = gr_pow(gr_abs2(S_all), k)
        all_avg = gr_to_cyclo(all_m.sum(axis=0)) / (G.order * scale)
        report.all_average = _rational_or_value(all_avg)
        report.correction = _rational_or_value(exact - all_avg)
        if exc is not None:
            term = gr_to_cyclo(all_m[exc.index]) / (G.order * scale)
            report.exceptional_term = _rational_or_value(term)
            report.remaining = _rational_or_value(all_avg - term)
    if agreement > PATH_TOLERANCE:
        report.notes.append(f"exact and float paths differ by {agreement:.3g}")
    return report


def moment_report_from_ldata(family, k, family_id="family"):
    """Moment average straight from LData records (uses S_1; skips degenerate twists)."""
    rows = [ld for ld in family if not ld.degenerate]
    if not rows:
        raise ValueError("empty family")
    q, d, w = rows[0].q, rows[0].d, rows[0].weight
    vals = np.array([abs(ld.power_sums[0]) ** 2 / q ** (w + 1) for ld in rows])
    emp = float(np.mean(vals**k))
    return MomentReport(q=q, d=d, k=k, family_id=family_id, population="records", pop_size=len(rows),
                        empirical=complex(emp), reference=float(math.factorial(k)),
                        deviation=abs(emp - math.factorial(k)))


def _same_family(T1, T2):
    return T1 is T2 or (T1.kind == T2.kind and T1.params == T2.params and T1.p == T2.p)


def joint_moment_report(T1, T2, q, d, population="primitive", seed=None, sample_size=None, family_id=None):
    """Average of |tr phi_1|^2 |tr phi_2|^2 against 1 (2 when the families coincide)."""
    if d < 2:
        raise DTooSmall("joint moments need d >= 2")
    G = make_group(q, d)
    population, idx, seed = _population(G, population, seed, sample_size)
    full = population != "sample"
    excluded = set()
    for T in (T1, T2):
        exc = T.exceptional_character(G)
        if exc is not None:
            excluded.add(exc.index)
    if excluded:
        idx = np.array([i for i in idx if int(i) not in excluded], dtype=np.int64)
    chars = None if full else idx
    p1 = compute_power_sums(T1, G, 1, chars)
    p2 = compute_power_sums(T2, G, 1, chars)
    s1, s2 = p1.exact[1], p2.exact[1]
    if full:
        s1, s2 = s1[idx], s2[idx]
    L = lcm(p1.L, p2.L)
    from .cyclo import gr_lift

    prod = gr_mul(gr_abs2(gr_lift(s1, L)), gr_abs2(gr_lift(s2, L)))
    scale = q ** (T1.weight + 1) * q ** (T2.weight + 1)
    exact = gr_to_cyclo(prod.sum(axis=0)) / (len(idx) * scale)
    n1 = p1.numeric[1][idx] if full else p1.numeric[1]
    n2 = p2.numeric[1][idx] if full else p2.numeric[1]
    empirical = complex(np.mean(np.abs(n1) ** 2 * np.abs(n2) ** 2) / scale)
    reference = 2.0 if _same_family(T1, T2) else 1.0
    agreement = abs(exact.to_complex() - empirical) / max(abs(empirical), 1e-300)
    name = family_id or f"{T1.name or T1.kind}x{T2.name or T2.kind}"
    rep = MomentReport(q=q, d=d, k=2, family_id=name, population=population, pop_size=int(len(idx)),
                       empirical=empirical, reference=reference, deviation=abs(empirical - reference),
                       seed=seed, exact=_rational_or_value(exact), path_agreement=float(agreement))
    if agreement > PATH_TOLERANCE:
        rep.notes.append(f"exact and float paths differ by {agreement:.3g}")
    return rep


# -- random matrix references -------------------------------------------------------


def _partitions(n, largest=None):
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in _partitions(n - first, first):
            yield (first,) + rest


def _dimension(shape):
    """Number of standard Young tableaux (hook length formula)."""
    n = sum(shape)
    hooks = 1
    for i, row in enumerate(shape):
        for j in range(row):
            arm = row - j - 1
            leg = sum(1 for r in shape[i + 1 :] if r > j)
            hooks *= arm + leg + 1
    return math.factorial(n) // hooks


def cue_reference(N, k):
    """E |tr U|^(2k) over Haar U(N): sum of f_lambda^2 over partitions with <= N rows."""
    return sum(_dimension(lam) ** 2 for lam in _partitions(k) if len(lam) <= N)


def cue_power_trace_reference(N, j):
    """E |tr U^j|^2 over Haar U(N)."""
    return min(j, N)


def haar_unitary(N, size, rng):
    """``size`` Haar-distributed N x N unitaries (QR of complex Ginibre, phases fixed)."""
    Z = (rng.standard_normal((size, N, N)) + 1j * rng.standard_normal((size, N, N))) / math.sqrt(2)
    Qm, R = np.linalg.qr(Z)
    diag = np.diagonal(R, axis1=1, axis2=2)
    return Qm * (diag / np.abs(diag))[:, None, :]


def cue_monte_carlo(N, k=None, j=None, samples=100_000, seed=0, batch=10_000):
    """(mean, standard error) of |tr U|^(2k) or |tr U^j|^2 under Haar measure."""
    if (k is None) == (j is None):
        raise ValueError("give exactly one of k or j")
    rng = np.random.default_rng(seed)
    vals = []
    done = 0
    while done < samples:
        size = min(batch, samples - done)
        U = haar_unitary(N, size, rng)
        if k is not None:
            vals.append(np.abs(np.trace(U, axis1=1, axis2=2)) ** (2 * k))
        else:
            vals.append(np.abs(np.trace(np.linalg.matrix_power(U, j), axis1=1, axis2=2)) ** 2)
        done += size
    v = np.concatenate(vals)
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(len(v)))


# -- trends -------------------------------------------------------------------------

CSV_COLUMNS = ["q", "d", "k", "family_id", "population", "pop_size",
               "empirical_re", "empirical_im", "reference", "deviation", "seed"]


@dataclass
class TrendTable:
    reports: list
    trend: dict  # k -> bool or None

    @property
    def rows(self):
        return [r.csv_row() for r in self.reports]

    def to_csv(self):
        return write_csv(self.reports)


def write_csv(reports):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in reports:
        writer.writerow(r.csv_row())
    return buf.getvalue()


def trend_table(q_list, d, family, k_list, population="primitive", seed=None, sample_size=None):
    """Moment reports for each q and k, plus a flag per k for shrinking deviation.

    ``family`` is either a trace function usable at every q, or a callable q -> trace function.
    """
    reports = []
    for q in q_list:
        T = family(q) if callable(family) and not isinstance(family, TraceFunction) else family
        for k in k_list:
            reports.append(moment_report(T, q, d, k, population=population, seed=seed, sample_size=sample_size))
    trend = {}
    for k in k_list:
        rs = [r for r in reports if r.k == k]
        if len(set(r.q for r in rs)) < 2:
            trend[k] = None
            continue
        lo = min(rs, key=lambda r: r.q)
        hi = max(rs, key=lambda r: r.q)
        trend[k] = bool(hi.deviation < lo.deviation)
    return TrendTable(reports, trend)
