"""Twisted L-polynomials.

For a trace function T and a character Lambda of W_{d,q}

    S_n = sum_{x in F_{q^n}} T(x, n) Lambda(norm_of_linear(x))

and P(T) = det(1 - Frob T | H^1_c) has inverse roots alpha_j with
sum_j alpha_j^n = -S_n.  Power sums are computed for every character at once: the
values T(x, n) are binned by the class of norm_of_linear(x) (a histogram on the group),
and a discrete Fourier transform over the group turns the histogram into S_n for all
characters.  The transform is done exactly in the group ring Z[C_L] and, independently,
in floating point with numpy's FFT.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cyclo import gr_reduce, gr_to_complex, lcm
from .errors import (
    ConsistencyFailure,
    DegreeTooLarge,
    NotPrimitive,
    PurityFailure,
    SlopeRegime,
)
from .ffield import DEGREE_CAP
from .wgroup import make_group

TAU_PURITY = 1e-6
TAU_CONSIST = 1e-6


def predicted_degree(T, d):
    """m (d - 1) + c_F, valid when T is tame at infinity or d exceeds its top slope."""
    if not T.is_tame and d <= T.slope:
        raise SlopeRegime(f"d = {d} does not exceed the slope {T.slope}; only a lower bound holds")
    return T.rank * (d - 1) + T.c_F


def empirical_depth(T, d):
    """Number of power sums used to detect the degree without the rank formula."""
    top = max(d, math.ceil(T.slope))
    return T.rank * (top - 1) + T.c_F + T.rank + 1


# -- power sums ------------------------------------------------------------------------


def _binned(group, T, n, L):
    """Flat class index and zeta_L exponent/weight of every term of S_n."""
    idx = group.level_index(n)
    vals = T.values(group.q, n)
    j, w = vals.terms()
    return idx, j * (L // vals.order), w


def _histogram(group, T, n, L):
    """(q^d, L) integer array: value mass of T over each class norm_of_linear(x)."""
    idx, j, w = _binned(group, T, n, L)
    hist = np.bincount(idx * L + j, weights=w.astype(np.float64), minlength=group.order * L)
    if np.abs(hist).max(initial=0) >= 2**52:
        raise OverflowError("histogram too large for exact binning")  # pragma: no cover
    return np.rint(hist).astype(np.int64).reshape(group.order, L)


def _sparse_histogram(group, T, n, L):
    """Only the classes actually hit: (classes, (len, L) array)."""
    idx, j, w = _binned(group, T, n, L)
    classes, inv = np.unique(idx, return_inverse=True)
    hist = np.bincount(inv * L + j, weights=w.astype(np.float64), minlength=len(classes) * L)
    return classes, np.rint(hist).astype(np.int64).reshape(len(classes), L)


def _exact_dft(group, hist, L):
    """S(e) = sum_g hist[g] zeta^(<e, g>) for all e, in the group ring Z[C_L]."""
    orders = group.orders
    X = hist.reshape(tuple(orders) + (L,))
    for axis, o in enumerate(orders):
        X = np.moveaxis(X, axis, 0)
        out = np.zeros_like(X)
        step = L // o
        for e in range(o):
            acc = out[e]
            for c in range(o):
                s = (e * c * step) % L
                acc += np.roll(X[c], s, axis=-1) if s else X[c]
        X = np.moveaxis(out, 0, axis)
    return X.reshape(group.order, L)


def _float_dft(group, hist, L):
    vals = gr_to_complex(hist)
    A = vals.reshape(group.orders)
    return (np.fft.ifftn(A) * group.order).reshape(group.order)


def _sparse_sums(group, classes, hist, L, exps):
    """Power sums for selected characters only (rows of ``exps``)."""
    keep = np.any(hist != 0, axis=1)
    classes, hist = classes[keep], hist[keep]
    exps = np.asarray(exps, dtype=np.int64)
    out = np.zeros((len(exps), L), dtype=np.int64)
    step = L // group.M
    chunk = max(1, 2_000_000 // max(len(classes), 1))
    for start in range(0, len(exps), chunk):
        block = exps[start : start + chunk]
        ph = group.phase_matrix(block, classes) * step  # (b, classes)
        base = np.repeat(np.arange(len(block)), len(classes)) * L
        for jT in np.nonzero(np.any(hist != 0, axis=0))[0]:
            rows = base + ((ph + jT) % L).ravel()
            w = np.tile(hist[:, jT], len(block)).astype(np.float64)
            acc = np.bincount(rows, weights=w, minlength=len(block) * L)
            out[start : start + len(block)] += np.rint(acc).astype(np.int64).reshape(len(block), L)
    return out


@dataclass
class PowerSums:
    """S_n for n = 1..depth over a set of characters (flat indices ``chars``)."""

    group: object
    trace: object
    L: int
    chars: np.ndarray
    exact: dict = field(default_factory=dict)  # n -> (len(chars), L) group-ring arrays
    numeric: dict = field(default_factory=dict)  # n -> complex (len(chars),)
    float_check: dict = field(default_factory=dict)  # n -> max |exact - fft| (dense mode)

    @property
    def depth(self):
        return max(self.exact) if self.exact else 0

    def row(self, i, upto=None):
        upto = upto or self.depth
        return np.array([self.numeric[n][i] for n in range(1, upto + 1)])

    def exact_row(self, i, upto=None):
        upto = upto or self.depth
        return [gr_reduce(self.exact[n][i]).tolist() for n in range(1, upto + 1)]


def compute_power_sums(T, group, depth, chars=None, float_check=True):
    """Power sums S_1..S_depth for the characters with flat indices ``chars`` (default all)."""
    if group.e * depth > DEGREE_CAP:
        raise DegreeTooLarge(f"need F_(q^{depth}), beyond the extension cap")
    L = lcm(group.M, T.value_order)
    dense = chars is None or len(chars) * 4 >= group.order
    char_idx = np.arange(group.order) if chars is None else np.asarray(chars, dtype=np.int64)
    ps = PowerSums(group, T, L, char_idx)
    exps = group.unflatten(char_idx)
    for n in range(1, depth + 1):
        if dense:
            hist = _histogram(group, T, n, L)
            full = _exact_dft(group, hist, L)
            ex = full[char_idx]
            if float_check:
                fl = _float_dft(group, hist, L)[char_idx]
                ps.float_check[n] = float(np.max(np.abs(gr_to_complex(ex) - fl), initial=0.0))
        else:
            classes, hist = _sparse_histogram(group, T, n, L)
            ex = _sparse_sums(group, classes, hist, L, exps)
        ps.exact[n] = ex
        ps.numeric[n] = gr_to_complex(ex)
    return ps


def power_sum(T, character, n):
    """S_n for one character, exactly, as a CycloValue."""
    from .cyclo import gr_to_cyclo

    G = character.group
    L = lcm(G.M, T.value_order)
    classes, hist = _sparse_histogram(G, T, n, L)
    row = _sparse_sums(G, classes, hist, L, [character.exponents])[0]
    return gr_to_cyclo(row)


# -- reconstruction -------------------------------------------------------------------


def newton_coefficients(S, N):
    """Coefficients c_0..c_N of P with sum alpha^n = -S_n (S indexed from S_1)."""
    c = [1 + 0j]
    for j in range(1, N + 1):
        acc = 0j
        for i in range(1, j + 1):
            acc += S[i - 1] * c[j - i]
        c.append(acc / j)
    return np.array(c, dtype=np.complex128)


def exp_log_coefficients(S, N):
    """Same coefficients via exp(sum S_n T^n / n) expanded as a power series."""
    F = np.zeros(N + 1, dtype=np.complex128)
    for n in range(1, N + 1):
        F[n] = S[n - 1] / n
    out = np.zeros(N + 1, dtype=np.complex128)
    term = np.zeros(N + 1, dtype=np.complex128)
    term[0] = 1
    for j in range(0, N + 1):
        out += term
        nxt = np.zeros(N + 1, dtype=np.complex128)
        for a in range(N + 1):
            if term[a]:
                nxt[a + 1 :] += term[a] * F[1 : N + 1 - a]
        term = nxt / (j + 1)
    return out


def inverse_roots(coeffs):
    """alpha_j with P(T) = prod (1 - alpha_j T)."""
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    if len(coeffs) <= 1:
        return np.zeros(0, dtype=np.complex128)
    return np.roots(coeffs)


def _consistency(roots, S, start, w, q):
    worst = 0.0
    for n in range(start, len(S) + 1):
        pred = -np.sum(roots**n) if len(roots) else 0.0
        scale = q ** (n * (w + 1) / 2)
        worst = max(worst, abs(pred - S[n - 1]) / scale)
    return worst


def _purity_error(roots, w, q):
    if len(roots) == 0:
        return 0.0
    target = q ** ((w + 1) / 2)
    return float(np.max(np.abs(np.abs(roots) - target)) / target)


@dataclass
class LData:
    """Everything known about one twisted L-polynomial."""

    q: int
    d: int
    character: tuple
    trace_id: str
    weight: int
    conductor: int
    mode: str
    degree: Optional[int]
    power_sums: list
    exact_power_sums: Optional[list]
    coefficients: list
    roots: list
    angles: list
    det_phase: complex
    purity_error: float
    consistency_error: float
    purity_ok: bool
    consistent: bool
    degenerate: bool = False
    expected_degree: Optional[int] = None
    ring: int = 1  # exact power sums live in Z[zeta_ring]

    @property
    def primitive(self):
        return self.conductor == self.d + 1

    @property
    def ok(self):
        return self.degenerate or (self.purity_ok and self.consistent)


def _canonical_angles(thetas):
    arg = np.mod(np.angle(thetas), 2 * np.pi)
    order = np.lexsort((np.abs(thetas), np.round(arg, 12)))
    return thetas[order]


def reconstruct(S, w, q, N=None, max_degree=None):
    """Newton reconstruction; finds the minimal consistent degree when N is None.

    Returns (N, coeffs, roots, consistency_error).
    """
    S = list(S)
    if N is not None:
        coeffs = newton_coefficients(S, N)
        roots = inverse_roots(coeffs)
        err = _consistency(roots, S, N + 1, w, q)
        return N, coeffs, roots, err
    top = len(S) - 1 if max_degree is None else min(max_degree, len(S) - 1)
    best = None
    for cand in range(0, top + 1):
        coeffs = newton_coefficients(S, cand)
        roots = inverse_roots(coeffs)
        err = _consistency(roots, S, cand + 1, w, q)
        if best is None or err < best[3]:
            best = (cand, coeffs, roots, err)
        if err <= TAU_CONSIST:
            return cand, coeffs, roots, err
    return best


def _build_ldata(G, T, exps, cond, S, exact, mode, N_expected, degenerate, ring):
    q, w = G.q, T.weight
    base = dict(q=q, d=G.d, character=tuple(int(c) for c in exps), trace_id=T.name or T.kind,
                weight=w, conductor=int(cond), mode=mode, power_sums=[complex(s) for s in S],
                exact_power_sums=exact, expected_degree=N_expected, ring=ring)
    if degenerate:
        return LData(degree=None, coefficients=[], roots=[], angles=[], det_phase=1 + 0j,
                     purity_error=0.0, consistency_error=0.0, purity_ok=True, consistent=True,
                     degenerate=True, **base)
    if mode == "predicted":
        N, coeffs, roots, err = reconstruct(S, w, q, N=N_expected)
    else:
        N, coeffs, roots, err = reconstruct(S, w, q)
    perr = _purity_error(roots, w, q)
    thetas = _canonical_angles(roots / q ** ((w + 1) / 2)) if len(roots) else np.zeros(0, complex)
    det = complex(np.prod(thetas)) if len(thetas) else 1 + 0j
    return LData(degree=int(N), coefficients=[complex(c) for c in coeffs], roots=[complex(r) for r in roots],
                 angles=[complex(t) for t in thetas], det_phase=det, purity_error=perr,
                 consistency_error=float(err), purity_ok=bool(perr < TAU_PURITY),
                 consistent=bool(err <= TAU_CONSIST), **base)


def select_characters(group, population="primitive", sample_size=None, seed=0):
    """Flat indices of the requested population, in enumeration order."""
    if population == "all":
        idx = np.arange(group.order)
    elif population == "primitive":
        idx = np.nonzero(group.primitive_mask())[0]
    elif population == "sample":
        rng = np.random.default_rng(seed)
        size = min(sample_size or 1000, group.order)
        idx = np.sort(rng.choice(group.order, size=size, replace=False))
    else:
        raise ValueError(f"unknown population {population!r}")
    return idx


def twist_family(T, q, d, population="primitive", chars=None, mode="auto", threads=1,
                 seed=0, sample_size=None, strict=False):
    """LData for every twist T x Lambda in the population.

    ``mode`` is "auto" (rank formula for primitive characters, empirical otherwise),
    "predicted" (requires primitive characters) or "empirical".
    """
    G = make_group(q, d)
    if chars is None:
        chars = select_characters(G, population, sample_size, seed)
    chars = np.asarray(chars, dtype=np.int64)
    exps = G.unflatten(chars)
    conds = G.conductor_exponents(exps) if len(chars) else np.zeros(0, dtype=np.int64)
    exc = T.exceptional_character(G)
    exc_idx = exc.index if exc is not None else -1

    try:
        N_pred = predicted_degree(T, d)
    except SlopeRegime:
        N_pred = None
    modes = []
    for c in conds:
        if mode == "predicted" or (mode == "auto" and c == d + 1 and N_pred is not None):
            if c != d + 1:
                raise NotPrimitive("predicted mode needs primitive characters")
            if N_pred is None:
                raise SlopeRegime("no degree prediction in this slope regime")
            modes.append("predicted")
        else:
            modes.append("empirical")
    depth = 0
    if "predicted" in modes:
        depth = N_pred + 1
    if "empirical" in modes:
        depth = max(depth, empirical_depth(T, d))
    ps = compute_power_sums(T, G, depth, chars) if len(chars) else None

    def one(i):
        S = ps.row(i)
        exact = ps.exact_row(i)
        m = modes[i]
        use = S if m == "empirical" else S[: N_pred + 1]
        return _build_ldata(G, T, exps[i], conds[i], use, exact[: len(use)], m,
                            N_pred if m == "predicted" else _degree_drop(T, conds[i]),
                            int(chars[i]) == exc_idx, ps.L)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(one, range(len(chars))))
    else:
        out = [one(i) for i in range(len(chars))]
    if strict:
        for ld in out:
            check_ldata(ld)
    return out


def _degree_drop(T, cond):
    """Rank formula re-applied at the true conductor (tame T, conductor c + 1 >= 2)."""
    if not T.is_tame or cond < 2:
        return None
    return int(T.rank * (cond - 2) + T.c_F)


def check_ldata(ld):
    if ld.degenerate:
        return
    if not ld.consistent:
        raise ConsistencyFailure(f"character {ld.character}: power sums inconsistent with degree {ld.degree}")
    if ld.expected_degree is not None and ld.degree != ld.expected_degree:
        raise ConsistencyFailure(f"character {ld.character}: degree {ld.degree}, expected {ld.expected_degree}")
    if not ld.purity_ok:
        raise ConsistencyFailure(f"character {ld.character}: purity error {ld.purity_error:.3g}")


def l_polynomial(T, character, mode="auto"):
    """LData for a single twist (checks raise ConsistencyFailure)."""
    G = character.group
    out = twist_family(T, G.q, G.d, chars=[character.index], mode=mode)[0]
    check_ldata(out)
    return out


def unitarized_class(ld):
    """(angles theta_j, determinant phase) after dividing by q^((w+1)/2)."""
    if ld.degenerate:
        raise PurityFailure("degenerate twist has no unitarized class")
    if not ld.purity_ok:
        raise PurityFailure(f"purity error {ld.purity_error:.3g} exceeds tolerance")
    return list(ld.angles), ld.det_phase


# -- norm formula ---------------------------------------------------------------------


def norm_formula_phases(group, character, x, n):
    """Phase of Lambda at reduce_polynomial(minpoly(x))^(n/deg) and at the conjugate product.

    The two routes to Lambda(f(1/t) t^deg f) must agree exactly.
    """
    route_poly = character.phase(group.norm_of_linear(x, n))
    coeffs = group.level_norms(n)[int(x)]
    route_roots = character.phase(group.element(coeffs))
    return route_poly, route_roots
