"""JSON-lines cache of twisted L-polynomials.

Line 1 is a header ``{"schema": 1, "kind": "lfun", "p", "q", "d"}``; every further
line is one twist. Exact power sums are stored as integer vectors in the power
basis of Z[zeta_ring]; complex numbers as ``[re, im]`` pairs. Serialization is
canonical (sorted keys, fixed separators, shortest round-trip floats), so
reading a cache and writing it again reproduces the same bytes.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .lfun import LData, TAU_CONSIST, twist_family
from .wgroup import make_group

SCHEMA = 1


def _pair(z):
    return [float(z.real), float(z.imag)]


def _unpair(v):
    return complex(v[0], v[1])


def _dumps(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def ldata_to_row(ld):
    return {
        "trace": ld.trace_id,
        "character": list(ld.character),
        "conductor": ld.conductor,
        "primitive": ld.primitive,
        "mode": ld.mode,
        "weight": ld.weight,
        "degree": ld.degree,
        "expected_degree": ld.expected_degree,
        "ring": ld.ring,
        "S_exact": ld.exact_power_sums,
        "S": [_pair(s) for s in ld.power_sums],
        "P": [_pair(c) for c in ld.coefficients],
        "angles": [_pair(t) for t in ld.angles],
        "det_phase": _pair(ld.det_phase),
        "purity_error": ld.purity_error,
        "consistency_error": ld.consistency_error,
        "purity_ok": ld.purity_ok,
        "consistent": ld.consistent,
        "degenerate": ld.degenerate,
    }


def row_to_ldata(row, q, d):
    return LData(
        q=q, d=d, character=tuple(row["character"]), trace_id=row["trace"], weight=row["weight"],
        conductor=row["conductor"], mode=row["mode"], degree=row["degree"],
        power_sums=[_unpair(v) for v in row["S"]], exact_power_sums=row["S_exact"],
        coefficients=[_unpair(v) for v in row["P"]], roots=[],
        angles=[_unpair(v) for v in row["angles"]], det_phase=_unpair(row["det_phase"]),
        purity_error=row["purity_error"], consistency_error=row["consistency_error"],
        purity_ok=row["purity_ok"], consistent=row["consistent"], degenerate=row["degenerate"],
        expected_degree=row["expected_degree"], ring=row["ring"],
    )


def header(p, q, d, kind="lfun"):
    return {"schema": SCHEMA, "kind": kind, "p": p, "q": q, "d": d}


def dumps(head, rows):
    lines = [_dumps(head)] + [_dumps(r) for r in rows]
    return "\n".join(lines) + "\n"


def write(path, head, rows):
    text = dumps(head, rows)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return text


def loads(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty cache")
    head = json.loads(lines[0])
    if head.get("schema") != SCHEMA:
        raise ValueError(f"unsupported cache schema {head.get('schema')!r}")
    return head, [json.loads(ln) for ln in lines[1:]]


def read(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def verify_rows(head, rows, traces, fraction=0.01, seed=0, tol=TAU_CONSIST):
    """Recompute a random ``fraction`` of rows (at least one).

    ``traces`` maps trace ids to TraceFunctions. Exact power sums must agree
    exactly; floating values within ``tol`` relative to their size.
    Returns a list of (row index, problem) for every mismatch.
    """
    if not rows:
        return []
    q, d = head["q"], head["d"]
    G = make_group(q, d)
    rng = np.random.default_rng(seed)
    count = max(1, math.ceil(fraction * len(rows)))
    picks = sorted(rng.choice(len(rows), size=min(count, len(rows)), replace=False).tolist())
    problems = []
    for i in picks:
        row = rows[i]
        T = traces[row["trace"]]
        flat = int(G.flatten(row["character"]))
        mode = row["mode"] if row["mode"] == "empirical" else "auto"
        fresh = ldata_to_row(twist_family(T, q, d, chars=[flat], mode=mode)[0])
        if fresh["S_exact"] != row["S_exact"]:
            problems.append((i, "exact power sums differ"))
        if fresh["degree"] != row["degree"]:
            problems.append((i, "degree differs"))
        for key in ("S", "P", "angles"):
            a, b = np.array(fresh[key], dtype=float), np.array(row[key], dtype=float)
            if a.shape != b.shape or (a.size and np.max(np.abs(a - b)) > tol * max(1.0, np.max(np.abs(b)))):
                problems.append((i, f"{key} differs"))
    return problems
