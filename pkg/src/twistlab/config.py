"""Run configuration: flat ``key = value`` lines plus repeated ``[trace]`` blocks.

Example::

    p = 5
    e = 1, 2          # q = 5 and q = 25
    d = 2
    population = primitive
    k = 1, 2

    [trace]
    id = leg
    kind = legendre

    [trace]
    id = e2
    kind = elliptic
    a4 = 1
    a6 = x
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from sympy import isprime

from . import fpoly
from .errors import ConfigParse, TwistlabError
from .tracefn import artin_schreier, character_twist, elliptic, kummer, legendre, trivial

TOP_KEYS = {
    "p", "e", "q", "d", "population", "sample_size", "seed", "k", "depth",
    "tolerance.purity", "tolerance.consist", "mode", "out",
}
TRACE_KINDS = {"trivial", "legendre", "elliptic", "kummer", "artin_schreier", "character_twist"}
TRACE_KEYS = {"id", "kind", "g", "order", "a1", "a2", "a3", "a4", "a6", "exponents", "assert_distinct"}


@dataclass
class TraceDecl:
    id: str
    kind: str
    params: dict = field(default_factory=dict)


@dataclass
class RunConfig:
    p: int
    es: list
    d: int
    traces: list = field(default_factory=list)
    population: str = "primitive"
    sample_size: Optional[int] = None
    seed: int = 0
    k_list: list = field(default_factory=lambda: [1, 2])
    depth: Optional[int] = None
    mode: str = "auto"
    tau_purity: Optional[float] = None
    tau_consist: Optional[float] = None
    out: Optional[str] = None

    @property
    def qs(self):
        return [self.p**e for e in self.es]


def _ints(value, key, line):
    try:
        return [int(v) for v in value.replace(",", " ").split()]
    except ValueError:
        raise ConfigParse(f"line {line}: {key} needs integers, got {value!r}") from None


def parse_config(text):
    top = {}
    traces = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name != "trace":
                raise ConfigParse(f"line {lineno}: unknown section [{name}]")
            current = {"_line": lineno}
            traces.append(current)
            continue
        if "=" not in line:
            raise ConfigParse(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        target, allowed = (top, TOP_KEYS) if current is None else (current, TRACE_KEYS)
        if key not in allowed:
            raise ConfigParse(f"line {lineno}: unknown key {key!r}")
        if key in target:
            raise ConfigParse(f"line {lineno}: duplicate key {key!r}")
        target[key] = (value, lineno)
    return _build(top, traces)


def _build(top, traces):
    if "p" not in top:
        raise ConfigParse("missing p")
    p_val, line = top["p"]
    try:
        p = int(p_val)
    except ValueError:
        raise ConfigParse(f"line {line}: p must be an integer") from None
    if p < 2 or not isprime(p):
        raise ConfigParse(f"line {line}: p = {p} is not prime")
    if "e" in top and "q" in top:
        raise ConfigParse("give either e or q, not both")
    if "e" in top:
        es = _ints(*top["e"][:1], "e", top["e"][1])
    elif "q" in top:
        qs = _ints(top["q"][0], "q", top["q"][1])
        es = []
        for q in qs:
            e, r = 0, q
            while r % p == 0:
                r //= p
                e += 1
            if r != 1 or e == 0:
                raise ConfigParse(f"q = {q} is not a power of p = {p}")
            es.append(e)
    else:
        es = []
    if not es:
        raise ConfigParse("empty q-list")
    if any(e < 1 for e in es):
        raise ConfigParse("field degrees must be positive")
    if "d" not in top:
        raise ConfigParse("missing d")
    d = _ints(top["d"][0], "d", top["d"][1])
    if len(d) != 1 or d[0] < 1:
        raise ConfigParse("d must be a single integer >= 1")
    cfg = RunConfig(p=p, es=es, d=d[0])

    if "population" in top:
        pop = top["population"][0]
        if pop not in ("all", "primitive", "sample"):
            raise ConfigParse(f"population must be all, primitive or sample, got {pop!r}")
        cfg.population = pop
    if "sample_size" in top:
        cfg.sample_size = _ints(top["sample_size"][0], "sample_size", top["sample_size"][1])[0]
    if "seed" in top:
        cfg.seed = _ints(top["seed"][0], "seed", top["seed"][1])[0]
    if "k" in top:
        cfg.k_list = _ints(top["k"][0], "k", top["k"][1])
        if not cfg.k_list or min(cfg.k_list) < 1:
            raise ConfigParse("k values must be positive")
    if "depth" in top:
        cfg.depth = _ints(top["depth"][0], "depth", top["depth"][1])[0]
    if "mode" in top:
        if top["mode"][0] not in ("auto", "predicted", "empirical"):
            raise ConfigParse("mode must be auto, predicted or empirical")
        cfg.mode = top["mode"][0]
    for key, attr in (("tolerance.purity", "tau_purity"), ("tolerance.consist", "tau_consist")):
        if key in top:
            try:
                setattr(cfg, attr, float(top[key][0]))
            except ValueError:
                raise ConfigParse(f"{key} must be a number") from None
    if "out" in top:
        cfg.out = top["out"][0]

    seen = set()
    for i, block in enumerate(traces):
        line = block.pop("_line")
        if "kind" not in block:
            raise ConfigParse(f"line {line}: [trace] block without kind")
        kind = block.pop("kind")[0]
        if kind not in TRACE_KINDS:
            raise ConfigParse(f"line {line}: unknown trace kind {kind!r}")
        tid = block.pop("id", (f"{kind}{i}", line))[0]
        if tid in seen:
            raise ConfigParse(f"line {line}: duplicate trace id {tid!r}")
        seen.add(tid)
        params = {k: v[0] for k, v in block.items()}
        decl = TraceDecl(tid, kind, params)
        _validate(decl, p)
        cfg.traces.append(decl)
    return cfg


def _validate(decl, p):
    """Parse polynomial fields now so bad input fails at load time."""
    try:
        for key in ("g", "a1", "a2", "a3", "a4", "a6"):
            if key in decl.params:
                fpoly.parse(decl.params[key], p)
        if decl.kind in ("kummer", "artin_schreier") and "g" not in decl.params:
            raise ConfigParse(f"trace {decl.id}: {decl.kind} needs g")
        if decl.kind == "kummer" and "order" not in decl.params:
            raise ConfigParse(f"trace {decl.id}: kummer needs order")
        if decl.kind == "character_twist" and "exponents" not in decl.params:
            raise ConfigParse(f"trace {decl.id}: character_twist needs exponents")
    except ConfigParse:
        raise
    except Exception as exc:
        raise ConfigParse(f"trace {decl.id}: {exc}") from None


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigParse(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def build_trace(decl, p, q=None, d=None):
    """TraceFunction for a declaration (character twists need the group (q, d))."""
    P = decl.params
    try:
        if decl.kind == "trivial":
            tf = trivial()
        elif decl.kind == "legendre":
            tf = legendre(p)
        elif decl.kind == "elliptic":
            coeffs = {k: fpoly.parse(P[k], p) for k in ("a1", "a2", "a3", "a4", "a6") if k in P}
            tf = elliptic(p=p, name=decl.id, **coeffs)
        elif decl.kind == "kummer":
            tf = kummer(int(P["order"]), fpoly.parse(P["g"], p), p)
        elif decl.kind == "artin_schreier":
            tf = artin_schreier(fpoly.parse(P["g"], p), p)
        elif decl.kind == "character_twist":
            if q is None or d is None:
                raise ConfigParse("character_twist needs a concrete (q, d)")
            tf = character_twist(q, d, [int(v) for v in P["exponents"].replace(",", " ").split()])
        else:  # pragma: no cover - rejected at parse time
            raise ConfigParse(f"unknown kind {decl.kind}")
    except TwistlabError:
        raise
    except (ValueError, KeyError) as exc:
        raise ConfigParse(f"trace {decl.id}: {exc}") from None
    tf.name = decl.id
    return tf
