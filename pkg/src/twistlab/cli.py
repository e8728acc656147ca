"""Command-line entry point.

    twistlab <characters|bijection-check|lfun|identity-check|stats> --config PATH
             [--out DIR] [--threads N] [--seed S]

Exit codes: 0 all checks pass, 1 usage or configuration error, 2 identity
failure, 3 purity or degree failure, 4 bijection failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import os
import sys

from . import cache, lfun
from .config import build_trace, load_config
from .errors import (BudgetExceeded, ConfigParse, ConsistencyFailure, NoPerfectMatching,
                     TwistlabError)
from .stats import joint_moment_report, moment_report, orthogonality_identity, independence_identity, write_csv
from .wgroup import make_group
from .wittring import match_characters

EXIT_OK, EXIT_USAGE, EXIT_IDENTITY, EXIT_PURITY, EXIT_BIJECTION = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _write(out, name, text):
    path = os.path.join(out, name)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _vec(v):
    return " ".join(str(int(c)) for c in v)


def _traces_for(cfg, q):
    """(id, TraceFunction) for every declared trace usable at q."""
    out = []
    for decl in cfg.traces:
        T = build_trace(decl, cfg.p, q, cfg.d)
        if T.fixed_q is not None and T.fixed_q != q:
            raise ConfigParse(f"trace {decl.id} is tied to q = {T.fixed_q}, not {q}")
        out.append((decl.id, T))
    return out


def _log(msg):
    print(msg, file=sys.stderr)


# -- commands -------------------------------------------------------------------------


def cmd_characters(cfg, args):
    for q in cfg.qs:
        G = make_group(q, cfg.d)
        exps = G.unflatten(range(G.order))
        conds = G.conductor_exponents(exps)
        rows = [(i, _vec(e), int(c), int(c == cfg.d + 1)) for i, (e, c) in enumerate(zip(exps, conds))]
        path = _write(args.out, f"characters_q{q}_d{cfg.d}.csv",
                      _csv_text(["index", "exponents", "conductor", "primitive"], rows))
        basis = [(f"1-u^{i}t^{k}", _vec(g), o) for (k, i), g, o in zip(G.labels, G.generators, G.orders)]
        _write(args.out, f"basis_q{q}_d{cfg.d}.csv", _csv_text(["generator", "coefficients", "order"], basis))
        print(f"characters q={q} d={cfg.d}: {G.order} characters, {G.num_primitive()} primitive -> {path}")
    return EXIT_OK


def cmd_bijection_check(cfg, args):
    status = EXIT_OK
    for q in cfg.qs:
        try:
            res = match_characters(q, cfg.d, cfg.depth)
        except NoPerfectMatching as exc:
            print(f"bijection q={q} d={cfg.d}: FAIL ({exc})")
            status = EXIT_BIJECTION
            continue
        rows = [(_vec(y), _vec(c), f, int(y[-1] != 0)) for y, c, f in res.rows()]
        path = _write(args.out, f"bijection_q{q}_d{cfg.d}.csv",
                      _csv_text(["point", "character", "conductor", "top_nonzero"], rows))
        ok = res.is_bijection() and res.primitivity_agrees()
        print(f"bijection q={q} d={cfg.d}: {'PASS' if ok else 'FAIL'} "
              f"({res.size} points, primitivity {'agrees' if res.primitivity_agrees() else 'disagrees'}) -> {path}")
        if not ok:
            status = EXIT_BIJECTION
    return status


def _ldata_failures(ld, tau_purity, tau_consist):
    if ld.degenerate:
        return []
    bad = []
    if ld.purity_error >= tau_purity:
        bad.append(f"purity error {ld.purity_error:.3g}")
    if ld.consistency_error > tau_consist:
        bad.append(f"consistency error {ld.consistency_error:.3g}")
    if ld.expected_degree is not None and ld.degree != ld.expected_degree:
        bad.append(f"degree {ld.degree} != {ld.expected_degree}")
    return bad


def cmd_lfun(cfg, args):
    tau_p = cfg.tau_purity if cfg.tau_purity is not None else lfun.TAU_PURITY
    tau_c = cfg.tau_consist if cfg.tau_consist is not None else lfun.TAU_CONSIST
    status = EXIT_OK
    for q in cfg.qs:
        rows = []
        for tid, T in _traces_for(cfg, q):
            family = lfun.twist_family(T, q, cfg.d, population=cfg.population, mode=cfg.mode,
                                       threads=args.threads, seed=cfg.seed, sample_size=cfg.sample_size)
            fails = 0
            for ld in family:
                row = cache.ldata_to_row(ld)
                bad = _ldata_failures(ld, tau_p, tau_c)
                row["purity_ok"] = ld.degenerate or ld.purity_error < tau_p
                row["consistent"] = ld.degenerate or ld.consistency_error <= tau_c
                if bad:
                    fails += 1
                    _log(f"q={q} trace={tid} character={ld.character}: {'; '.join(bad)}")
                rows.append(row)
            degrees = sorted({ld.degree for ld in family if not ld.degenerate})
            print(f"lfun q={q} d={cfg.d} trace={tid}: {len(family)} twists, degrees {degrees}, "
                  f"{sum(ld.degenerate for ld in family)} degenerate, {fails} failures")
            if fails:
                status = EXIT_PURITY
        path = os.path.join(args.out, f"lfun_q{q}_d{cfg.d}.jsonl")
        cache.write(path, cache.header(cfg.p, q, cfg.d), rows)
        print(f"  -> {path}")
    return status


def _identity_record(name, q, d, k, lhs, rhs):
    return {"identity": name, "q": q, "d": d, "k": k, "lhs": _cyclo_json(lhs), "rhs": _cyclo_json(rhs),
            "equal": lhs == rhs}


def _cyclo_json(v):
    r = v.rational()
    if r is not None:
        return str(r)
    return {"L": v.L, "coeffs": [str(c) for c in v.coeffs]}


def cmd_identity_check(cfg, args):
    status = EXIT_OK
    for q in cfg.qs:
        records = []
        traces = _traces_for(cfg, q)
        funcs = [("1", None)] + traces
        for k in cfg.k_list:
            if k > cfg.d:
                continue
            for tid, F in funcs:
                lhs, rhs = orthogonality_identity(q, cfg.d, k, F)
                records.append(dict(_identity_record("orthogonality", q, cfg.d, k, lhs, rhs), trace=tid))
        if cfg.d >= 2:
            for (i1, F1), (i2, F2) in itertools.combinations(traces, 2):
                lhs, rhs = independence_identity(q, cfg.d, F1, F2)
                records.append(dict(_identity_record("independence", q, cfg.d, 2, lhs, rhs), trace=f"{i1},{i2}"))
        ok = all(r["equal"] for r in records)
        path = _write(args.out, f"identities_q{q}_d{cfg.d}.json",
                      json.dumps(records, sort_keys=True, indent=1) + "\n")
        for r in records:
            print(f"{r['identity']} q={q} d={cfg.d} k={r['k']} F={r['trace']}: "
                  f"{'PASS' if r['equal'] else 'FAIL'} ({r['lhs']} vs {r['rhs']})")
        print(f"  -> {path}")
        if not ok:
            status = EXIT_IDENTITY
    return status


def cmd_stats(cfg, args):
    status = EXIT_OK
    reports, joints = [], []
    for q in cfg.qs:
        traces = _traces_for(cfg, q)
        cached = os.path.join(args.out, f"lfun_q{q}_d{cfg.d}.jsonl")
        if os.path.exists(cached):
            head, rows = cache.read(cached)
            problems = cache.verify_rows(head, rows, dict(traces), seed=cfg.seed)
            for i, msg in problems:
                _log(f"cache {cached} row {i}: {msg}")
            print(f"cache check {cached}: {'PASS' if not problems else 'FAIL'}")
            if problems:
                status = EXIT_PURITY
        for tid, T in traces:
            for k in cfg.k_list:
                if k > cfg.d or (T.exceptional_character(make_group(q, cfg.d)) is not None and k >= cfg.d):
                    continue
                reports.append(moment_report(T, q, cfg.d, k, population=cfg.population, seed=cfg.seed,
                                             sample_size=cfg.sample_size, family_id=tid))
        if cfg.d >= 2:
            for (i1, T1), (i2, T2) in itertools.combinations(traces, 2):
                joints.append(joint_moment_report(T1, T2, q, cfg.d, population=cfg.population, seed=cfg.seed,
                                                  sample_size=cfg.sample_size, family_id=f"{i1}x{i2}"))
    path = _write(args.out, f"moments_d{cfg.d}.csv", write_csv(reports))
    for r in reports:
        print(f"moment q={r.q} k={r.k} family={r.family_id}: {r.empirical.real:.6f} vs {r.reference:g} "
              f"(deviation {r.deviation:.4f}, {r.pop_size} characters)")
    print(f"  -> {path}")
    if joints:
        jpath = _write(args.out, f"joint_d{cfg.d}.csv", write_csv(joints))
        for r in joints:
            print(f"joint q={r.q} family={r.family_id}: {r.empirical.real:.6f} vs {r.reference:g} "
                  f"(deviation {r.deviation:.4f})")
        print(f"  -> {jpath}")
    return status


COMMANDS = {
    "characters": cmd_characters,
    "bijection-check": cmd_bijection_check,
    "lfun": cmd_lfun,
    "identity-check": cmd_identity_check,
    "stats": cmd_stats,
}


def build_parser():
    parser = _Parser(prog="twistlab", description="L-functions of character twists over F_q(x).")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="run configuration file")
    parser.add_argument("--out", default=None, help="output directory (default: config 'out' or .)")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        args.out = args.out or cfg.out or "."
        os.makedirs(args.out, exist_ok=True)
        return COMMANDS[args.command](cfg, args)
    except ConfigParse as exc:
        _log(f"twistlab {args.command}: config error in {args.config}: {exc}")
        return EXIT_USAGE
    except ConsistencyFailure as exc:
        _log(f"twistlab {args.command}: {exc}")
        return EXIT_PURITY
    except BudgetExceeded as exc:
        _log(f"twistlab {args.command}: budget exceeded: {exc}")
        return EXIT_USAGE
    except TwistlabError as exc:
        _log(f"twistlab {args.command}: {type(exc).__name__}: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
