import json
import os

import pytest

from twistlab import cache
from twistlab.cli import main
from twistlab.config import build_trace, parse_config
from twistlab.errors import ConfigParse
from twistlab.tracefn import legendre

TRIVIAL = """
p = 2
e = 1
d = 2
population = all   # every character

[trace]
id = one
kind = trivial
"""

LEGENDRE = """
p = 5
e = 1
d = 1
population = primitive
[trace]
id = leg
kind = legendre
"""

TWO_CURVES = """
p = 5
q = 5
d = 2
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


def _cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def _rows(path):
    head, rows = cache.read(path)
    return head, rows


def test_parse_config():
    cfg = parse_config(TWO_CURVES)
    assert cfg.qs == [5] and cfg.d == 2 and cfg.k_list == [1, 2]
    assert [t.id for t in cfg.traces] == ["leg", "e2"]
    T = build_trace(cfg.traces[1], cfg.p)
    assert T.kind == "elliptic" and T.c_F == 2
    assert parse_config("p = 3\ne = 1 2\nd = 2").qs == [3, 9]


@pytest.mark.parametrize("text", [
    "p = 5\nd = 2",  # empty q-list
    "p = 5\ne =\nd = 2",
    "p = 6\ne = 1\nd = 2",
    "p = 5\nq = 10\nd = 2",
    "p = 5\ne = 1\nd = 0",
    "p = 5\ne = 1\nd = 2\ncolour = red",
    "p = 5\ne = 1\nd = 2\n[trace]\nkind = elliptic\na4 = x^^2",
    "p = 5\ne = 1\nd = 2\n[trace]\nkind = banana",
    "p = 5\ne = 1\nd = 2\n[trace]\nkind = kummer\ng = x",
    "p = 5\ne = 1\nd = 2\n[section]",
])
def test_bad_configs(text):
    with pytest.raises(ConfigParse):
        parse_config(text)


def test_lfun_trivial_example(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["lfun", "--config", _cfg(tmp_path, TRIVIAL), "--out", str(out)]) == 0
    head, rows = _rows(out / "lfun_q2_d2.jsonl")
    assert head == {"schema": 1, "kind": "lfun", "p": 2, "q": 2, "d": 2}
    assert len(rows) == 4
    assert sum(r["primitive"] for r in rows) == 2
    assert sorted(r["degree"] for r in rows if not r["degenerate"]) == [0, 1, 1]
    assert [r["character"] for r in rows if r["degenerate"]] == [[0]]


def test_lfun_legendre_example(tmp_path):
    out = tmp_path / "out"
    assert main(["lfun", "--config", _cfg(tmp_path, LEGENDRE), "--out", str(out)]) == 0
    _, rows = _rows(out / "lfun_q5_d1.jsonl")
    assert len(rows) == 4
    assert all(r["degree"] == 2 and r["purity_ok"] for r in rows)


def test_cache_round_trip_and_verification(tmp_path):
    out = tmp_path / "out"
    main(["lfun", "--config", _cfg(tmp_path, TWO_CURVES), "--out", str(out)])
    path = out / "lfun_q5_d2.jsonl"
    text = path.read_text()
    head, rows = cache.loads(text)
    assert cache.dumps(head, rows) == text
    ld = cache.row_to_ldata(rows[3], 5, 2)
    assert cache.ldata_to_row(ld)["S_exact"] == rows[3]["S_exact"]
    E2 = build_trace(parse_config(TWO_CURVES).traces[1], 5)
    traces = {"leg": legendre(5), "e2": E2}
    assert cache.verify_rows(head, rows, traces, fraction=0.2) == []
    rows[0]["S_exact"][0][0] += 1
    assert cache.verify_rows(head, rows, traces, fraction=1.0)[0][1] == "exact power sums differ"


def test_all_commands_and_determinism(tmp_path):
    cfg = _cfg(tmp_path, TWO_CURVES)
    outputs = []
    for run in ("a", "b"):
        out = tmp_path / run
        for cmd in ("characters", "bijection-check", "lfun", "identity-check", "stats"):
            code = main([cmd, "--config", cfg, "--out", str(out)])
            assert code == 0
        outputs.append({name: (out / name).read_bytes() for name in sorted(os.listdir(out))})
    assert outputs[0] == outputs[1]
    names = set(outputs[0])
    assert {"characters_q5_d2.csv", "basis_q5_d2.csv", "bijection_q5_d2.csv", "lfun_q5_d2.jsonl",
            "identities_q5_d2.json", "moments_d2.csv", "joint_d2.csv"} <= names
    ident = json.loads(outputs[0]["identities_q5_d2.json"])
    assert all(r["equal"] for r in ident)
    assert any(r["identity"] == "independence" and r["lhs"] == "364" for r in ident)


def test_exit_codes(tmp_path, capsys):
    assert main(["lfun", "--config", _cfg(tmp_path, "p = 5\nd = 2", "bad.cfg")]) == 1
    assert "empty q-list" in capsys.readouterr().err
    assert main(["lfun", "--config", str(tmp_path / "missing.cfg")]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate", "--config", "x"])
    assert exc.value.code == 1
    # an impossible degree is a purity/degree failure
    strict = TRIVIAL.replace("population = all", "population = all\ntolerance.purity = 1e-30")
    strict = strict.replace("p = 2\ne = 1\nd = 2", "p = 3\ne = 1\nd = 2")
    assert main(["lfun", "--config", _cfg(tmp_path, strict, "strict.cfg"), "--out", str(tmp_path / "s")]) == 3


def test_seed_option_changes_sample(tmp_path):
    text = LEGENDRE.replace("d = 1", "d = 2").replace("population = primitive", "population = sample\nsample_size = 5")
    cfg = _cfg(tmp_path, text)
    main(["lfun", "--config", cfg, "--out", str(tmp_path / "s1"), "--seed", "1"])
    main(["lfun", "--config", cfg, "--out", str(tmp_path / "s2"), "--seed", "2"])
    main(["lfun", "--config", cfg, "--out", str(tmp_path / "s3"), "--seed", "1"])
    a, b, c = ((tmp_path / s / "lfun_q5_d2.jsonl").read_bytes() for s in ("s1", "s2", "s3"))
    assert a == c and a != b


def test_failure_exit_codes(tmp_path, monkeypatch):
    import twistlab.cli as cli
    from twistlab.cyclo import CycloValue
    from twistlab.errors import NoPerfectMatching

    cfg = _cfg(tmp_path, TWO_CURVES)

    def no_match(*args):
        raise NoPerfectMatching("forced")

    monkeypatch.setattr(cli, "match_characters", no_match)
    assert main(["bijection-check", "--config", cfg, "--out", str(tmp_path / "x")]) == 4
    monkeypatch.setattr(cli, "orthogonality_identity",
                        lambda *a: (CycloValue.from_int(1, 1), CycloValue.from_int(2, 1)))
    assert main(["identity-check", "--config", cfg, "--out", str(tmp_path / "x")]) == 2
