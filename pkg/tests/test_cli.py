import csv
import io
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fixedbudget import cli
from fixedbudget.cli import (
    BOUNDS_HEADER,
    HITTING_HEADER,
    STATS_HEADER,
    ConfigError,
    ExperimentConfig,
    build_parser,
    cmd_bounds,
    cmd_mgf_check,
    main,
    parse_config,
    serialize_config,
)

MINIMAL = """\
# tiny run
problem = leadingones
n = 8
trials = 10
budget = 100
checkpoints = 10, 50, 100
master_seed = 7
"""


def write_cfg(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


@st.composite
def configs(draw):
    problem = draw(st.sampled_from(["onemax", "leadingones"]))
    cps = sorted(draw(st.sets(st.integers(1, 10**6), min_size=1, max_size=6)))
    budget = draw(st.one_of(st.none(), st.integers(cps[-1], 10**7)))
    names = draw(st.sets(st.sampled_from(cli.KNOWN_CONSTANTS), max_size=4))
    consts = {k: draw(st.floats(-1e6, 1e6, allow_nan=False)) for k in sorted(names)}
    return ExperimentConfig(
        problem=problem,
        n=draw(st.integers(1, 10**5)),
        trials=draw(st.integers(1, 10**6)),
        budget=budget,
        checkpoints=tuple(cps),
        master_seed=draw(st.integers(0, 2**64 - 1)),
        output_dir=draw(st.text("abcxyz/_-.0123456789", min_size=1, max_size=20).filter(lambda s: s.strip() == s)),
        simulator="fast" if problem == "leadingones" and draw(st.booleans()) else "bit",
        bracket_form=draw(st.sampled_from(["printed", "corrected"])),
        constants=consts,
    )


@settings(max_examples=200)
@given(configs())
def test_config_round_trip(cfg):
    assert parse_config(serialize_config(cfg)) == cfg


def test_parse_minimal_and_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.checkpoints == (10, 50, 100) and cfg.simulator == "bit" and cfg.output_dir == "out"
    assert cfg.constant_map()["lo_slack"] == 2.0
    cfg = parse_config(MINIMAL.replace("budget = 100", "budget = none").replace("n = 8", "n = 1e3"))
    assert cfg.budget is None and cfg.n == 1000


@pytest.mark.parametrize("extra, line, msg", [
    ("colour = red", 8, "unknown key 'colour'"),
    ("constant.fudge = 1", 8, "unknown constant 'fudge'"),
    ("n = 9", 8, "duplicate key 'n'"),
    ("just words", 8, "expected 'key = value'"),
])
def test_config_errors_name_the_line(extra, line, msg):
    with pytest.raises(ConfigError) as e:
        parse_config(MINIMAL + extra + "\n", "exp.cfg")
    assert f"exp.cfg:{line}:" in str(e.value) and msg in str(e.value)


def test_config_bad_value_line():
    with pytest.raises(ConfigError, match=r"cfg:4: bad value for 'trials'"):
        parse_config(MINIMAL.replace("trials = 10", "trials = ten"), "cfg")


@pytest.mark.parametrize("old, new", [
    ("n = 8", "n = 0"),
    ("trials = 10", "trials = -1"),
    ("checkpoints = 10, 50, 100", "checkpoints = 10, 200"),
    ("checkpoints = 10, 50, 100", "checkpoints = 50, 10"),
    ("problem = leadingones", "problem = twomax"),
    ("master_seed = 7", "master_seed = 18446744073709551616"),
])
def test_config_invariants(old, new):
    with pytest.raises(ConfigError):
        parse_config(MINIMAL.replace(old, new))


def test_config_missing_key():
    with pytest.raises(ConfigError, match="missing required key"):
        parse_config(MINIMAL.replace("master_seed = 7\n", ""))


def test_simulate_outputs(tmp_path):
    out = tmp_path / "nested" / "dir"
    cfg = write_cfg(tmp_path, MINIMAL + f"output_dir = {out}\n")
    assert main(["simulate", "--config", cfg]) == 0
    stats = (out / "stats.csv").read_text()
    hits = (out / "hitting_times.csv").read_text()
    rows = list(csv.reader(io.StringIO(stats)))
    assert rows[0] == STATS_HEADER and len(rows) == 4
    assert [r[0] for r in rows[1:]] == ["10", "50", "100"]
    assert all(r[-1] == "10" and r[-2] == "NA" for r in rows[1:])
    hrows = list(csv.reader(io.StringIO(hits)))
    assert hrows[0] == HITTING_HEADER and len(hrows) == 11
    for r in hrows[1:]:
        assert r[2] in ("0", "1") and (r[1] == "NA") == (r[2] == "1")
    # rerun, also with a different worker count: byte-identical
    assert main(["simulate", "--config", cfg, "--workers", "3"]) == 0
    assert (out / "stats.csv").read_text() == stats
    assert (out / "hitting_times.csv").read_text() == hits


def test_simulate_seed_and_out_override(tmp_path):
    cfg = write_cfg(tmp_path, MINIMAL)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--config", cfg, "--out", str(a)]) == 0
    assert main(["simulate", "--config", cfg, "--out", str(b), "--seed", "8"]) == 0
    assert (a / "hitting_times.csv").read_text() != (b / "hitting_times.csv").read_text()


def test_simulate_censoring(tmp_path):
    text = MINIMAL.replace("n = 8", "n = 60").replace("budget = 100", "budget = 120").replace(
        "checkpoints = 10, 50, 100", "checkpoints = 120")
    cfg = write_cfg(tmp_path, text + f"output_dir = {tmp_path}\n")
    assert main(["simulate", "--config", cfg]) == 0
    rows = list(csv.reader(open(tmp_path / "hitting_times.csv")))[1:]
    assert all(r[1:] == ["NA", "1"] for r in rows)


def test_uncreatable_output_is_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = write_cfg(tmp_path, MINIMAL + f"output_dir = {blocker}/sub\n")
    assert main(["simulate", "--config", cfg]) == 3


def test_exit_codes_for_config_problems(tmp_path, capsys):
    bad = write_cfg(tmp_path, MINIMAL + "colour = red\n")
    assert main(["simulate", "--config", bad]) == 2
    assert "run.cfg:8" in capsys.readouterr().err
    assert main(["verify", "--config", str(tmp_path / "absent.cfg")]) == 3


def test_workers_env_only_without_flag(tmp_path, monkeypatch):
    cfg = write_cfg(tmp_path, MINIMAL)
    parser = build_parser()
    monkeypatch.setenv("FIXEDBUDGET_WORKERS", "5")
    _, w = cli._resolve_run(parser.parse_args(["simulate", "--config", cfg]))
    assert w == 5
    _, w = cli._resolve_run(parser.parse_args(["simulate", "--config", cfg, "--workers", "2"]))
    assert w == 2
    monkeypatch.delenv("FIXEDBUDGET_WORKERS")
    _, w = cli._resolve_run(parser.parse_args(["simulate", "--config", cfg]))
    assert w == 1


def _bounds_rows(text):
    rows = list(csv.DictReader(io.StringIO(text)))
    assert list(rows[0].keys()) == BOUNDS_HEADER
    return rows


def test_bounds_trivial_row():
    lo = _bounds_rows(cmd_bounds("leadingones", 100, [0]))[0]
    assert lo["thm36_linear"] == lo["thm36_log"] == lo["thm43_additive"] == "-2"
    assert lo["thm35_sqrt_e"] == lo["thm51_point"] == "NA"
    om = _bounds_rows(cmd_bounds("onemax", 100, [0]))[0]
    assert om["thm35_sqrt_e"] == om["thm35_exp"] == "50"
    assert om["thm36_log"] == "NA"


def test_bounds_bracket_point_at_n1000():
    row = _bounds_rows(cmd_bounds("leadingones", 1000, [200000]))[0]
    assert float(row["thm51_point"]) == pytest.approx(510.8, abs=0.05)
    assert float(row["thm51_lower"]) <= float(row["thm51_point"]) <= float(row["thm51_upper"])
    assert row["thm36_log"] != "NA" and row["thm36_linear"] == "NA"


def test_bounds_outside_validity_are_na():
    rows = _bounds_rows(cmd_bounds("leadingones", 100, [100, 2000, 8000, 20000]))
    # the bracket needs t >= 10 n ln n = 4605; the log bound stops at (e-1) n^2/2 - n^1.5 = 7591
    assert rows[0]["thm51_point"] == "NA"
    assert rows[2]["thm36_log"] == "NA" and rows[3]["thm43_additive"] == "NA"
    for r in rows:
        for v in r.values():
            assert v == "NA" or math.isfinite(float(v))
    om = _bounds_rows(cmd_bounds("onemax", 1000, [100, 5000]))
    assert om[0]["thm35_sqrt_e"] != "NA" and om[1]["thm35_sqrt_e"] == "NA"


def test_bounds_cli(tmp_path, capsys):
    assert main(["bounds", "--problem", "leadingones", "--n", "1000", "--t", "0:200000:100000"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == ",".join(BOUNDS_HEADER) and len(out.splitlines()) == 4
    dest = tmp_path / "b.csv"
    assert main(["bounds", "--problem", "onemax", "--n", "50", "--t", "0", "5", "--constant", "onemax_rel_slack=0",
                 "--out", str(dest)]) == 0
    row = _bounds_rows(dest.read_text())[1]
    assert float(row["thm35_sqrt_e"]) == pytest.approx(25 + 5 / (2 * math.sqrt(math.e)))
    assert main(["bounds", "--problem", "onemax", "--n", "50", "--t", "1", "--constant", "bogus=1"]) == 2
    cfg = write_cfg(tmp_path, MINIMAL + "constant.lo_slack = 0.5\n")
    assert main(["bounds", "--config", cfg, "--t", "0", "--out", str(dest)]) == 0
    assert _bounds_rows(dest.read_text())[0]["thm36_log"] == "-0.5"


VERIFY_OK = """\
problem = leadingones
n = 100
trials = 400
budget = 2500
checkpoints = 1000, 2500
master_seed = 11
simulator = fast
"""


def test_verify_pass_and_report(tmp_path, capsys):
    cfg = write_cfg(tmp_path, VERIFY_OK + f"output_dir = {tmp_path}\n")
    assert main(["verify", "--config", cfg]) == 0
    first = capsys.readouterr().out
    assert "seed=11" in first and "lo_slack=2.0" in first
    assert "survival curves: djwz-lower-bound, empirical" in first
    assert "thm36_log" in first and "thm41_potential" in first and "ALL PASS" in first
    assert main(["verify", "--config", cfg]) == 0
    assert capsys.readouterr().out == first


def test_verify_synthetic_violation(tmp_path, capsys):
    cfg = write_cfg(tmp_path, VERIFY_OK + "constant.lo_slack = -100\n")
    assert main(["verify", "--config", cfg]) == 1
    out = capsys.readouterr().out
    assert "FAIL" in out and "lo_slack=-100.0" in out


def test_verify_onemax(tmp_path, capsys):
    text = "problem = onemax\nn = 200\ntrials = 3000\nbudget = 400\ncheckpoints = 20, 400\nmaster_seed = 1\n"
    assert main(["verify", "--config", write_cfg(tmp_path, text)]) == 0
    out = capsys.readouterr().out
    assert "thm35_sqrt_e" in out and "thm32_iterated" in out and "survival curves: not used" in out


def test_mgf_check_stability():
    results, stable = cmd_mgf_check((100, 200, 400))
    cs = [r.c for r in results]
    assert stable and all(math.isfinite(c) and c > 0 for c in cs)
    assert max(cs) / min(cs) - 1 <= 0.2
    for r in results:
        assert r.lambda_max == pytest.approx(1 / (2 * math.e * r.n), rel=1e-15)
        assert r.lambda_min == pytest.approx(1 / r.n**2, rel=1e-15)
        assert r.lambda_min <= r.argmax_lambda <= r.lambda_max


def test_mgf_check_r_dependence():
    base, _ = cmd_mgf_check((100, 200, 400), r_constant=0.0)
    shifted, _ = cmd_mgf_check((100, 200, 400), r_constant=1.0)
    # r/n adds r / (lam n) to every ratio, which is exactly 1 at lam = 1/n^2: an O(1) shift, not o(1)
    for b, s in zip(base, shifted):
        assert 0 < s.c - b.c <= 1 + 1e-9
        assert s.argmax_lambda == pytest.approx(1 / s.n**2)


def test_mgf_check_cli(tmp_path, capsys):
    assert main(["mgf-check", "--n", "100", "200", "400", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "STABLE" in out and "UNSTABLE" not in out
    assert (tmp_path / "mgf_check.csv").read_text().splitlines()[0].startswith("n,c,")
    assert main(["mgf-check", "--n", "100", "400", "--tolerance", "0.001"]) == 1
    with pytest.raises(ValueError):
        cmd_mgf_check((5,))
