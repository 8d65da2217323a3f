import csv
import io
import json
import math

import pytest

from conelab import cli
from conelab.cli import (COLUMNS, ConfigError, ReportRow, format_csv, main, parse_config, run,
                         validate_csv)

SWEEP = """
[run]
seed = 3

[experiment:far]
command = dyadic-sweep
n = 3
p = 2
q = 4
R = 2^3..2^9
profile = constant
"""

FAST = """
[run]
seed = 11

[experiment:schur-div]
command = schur
n = 3
q = 3

[experiment:schur-25]
command = schur
n = 2
q = 5

[experiment:holder]
command = lorentz-check
trials = 20

[experiment:hy]
command = hy-check
trials = 3

[experiment:bessel-n3]
command = bessel-check
n = 3

[experiment:ext]
command = extension-eval
n = 2
t = 0, 1.3
r = 4, 2
"""


def _rows(path):
    return list(csv.DictReader(io.StringIO(path.read_text())))


def test_minimal_sweep_config():
    cfg = parse_config(SWEEP)
    (e,) = cfg.experiments
    assert e.id == "far" and e.command == "dyadic-sweep"
    assert e.params["R"] == [2.0 ** k for k in range(3, 10)]
    assert e.params["q"] == 4.0 and cfg.seed == 3


def test_non_dyadic_R_rejected_with_line():
    with pytest.raises(ConfigError, match=r"line 10: .*R must be dyadic"):
        parse_config(SWEEP.replace("R = 2^3..2^9", "R = 3"))


def test_unknown_key_rejected_with_line():
    with pytest.raises(ConfigError, match=r"line 12: unknown key 'colour'"):
        parse_config(SWEEP + "colour = red\n")
    with pytest.raises(ConfigError, match="unknown key 'verbose' in \\[run\\]"):
        parse_config("[run]\nverbose = 1\n")


@pytest.mark.parametrize("text,msg", [
    ("[experiment:x]\ncommand = nope\n", "command must be one of"),
    ("[stuff]\na = 1\n", "unknown section"),
    ("[experiment:x]\ncommand = schur\n", "missing required key 'n'"),
    ("[experiment:x]\ncommand = schur\nn = 3\nq = 4\nexpect = maybe\n", "expect must be"),
    ("[run]\ntolerance = -1\n", "tolerance must be positive"),
    ("[run]\nworkers = 0\n", "workers must be at least 1"),
    ("[experiment:x]\ncommand = dyadic-sweep\nn = 3\nq = 4\nR = 2^1..5\n", "2\\^i..2\\^j"),
    ("[experiment:x]\ncommand = extension-eval\nn = 2\nt = 1\nr = 1, 2\n", "differ in length"),
    ("[experiment:x\n", "syntax"),
])
def test_config_errors(text, msg):
    with pytest.raises(ConfigError, match=msg):
        parse_config(text)


def test_schur_q3_config_runs_with_divergent_flag(tmp_path):
    cfg = parse_config("[experiment:s]\ncommand = schur\nn = 3\nq = 3\n")
    assert run(cfg, tmp_path) == 0
    rows = _rows(tmp_path / "report.csv")
    assert rows and all(r["flags"] == "divergent" for r in rows)
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["experiments"][0]["convergent"] is False


def test_empty_config(tmp_path):
    assert run(parse_config(""), tmp_path) == 0
    assert (tmp_path / "report.csv").read_text() == ",".join(COLUMNS) + "\n"
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["experiments"] == [] and summary["pass"] is True


def test_fast_experiments_pass_and_validate(tmp_path):
    assert run(parse_config(FAST), tmp_path) == 0
    text = (tmp_path / "report.csv").read_text()
    assert validate_csv(text) == []
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["schema_version"] == cli.SCHEMA_VERSION
    for s in summary["experiments"]:
        assert {"experiment", "params", "slope", "expected_slope", "tolerance", "pass"} <= set(s)
        assert s["pass"], s
    bessel = next(s for s in summary["experiments"] if s["experiment"] == "bessel-n3")
    assert bessel["sup_normalized"] == 0


def test_determinism_and_worker_independence(tmp_path):
    cfg = parse_config(FAST)
    run(cfg, tmp_path / "a")
    run(cfg, tmp_path / "b")
    a = (tmp_path / "a" / "report.csv").read_bytes()
    assert a == (tmp_path / "b" / "report.csv").read_bytes()
    assert main(["--config", _write(tmp_path, FAST), "--out", str(tmp_path / "c"),
                 "--workers", "2"]) == 0
    assert a == (tmp_path / "c" / "report.csv").read_bytes()


def test_seed_override_changes_random_corpora(tmp_path):
    path = _write(tmp_path, "[experiment:h]\ncommand = lorentz-check\ntrials = 5\n")
    main(["--config", path, "--out", str(tmp_path / "a"), "--seed", "1"])
    main(["--config", path, "--out", str(tmp_path / "b"), "--seed", "2"])
    assert (tmp_path / "a" / "report.csv").read_bytes() != (tmp_path / "b" / "report.csv").read_bytes()


def test_worker_env_variable(tmp_path, monkeypatch):
    seen = {}

    def fake_run(cfg, out):
        seen["workers"] = cfg.workers
        return 0

    monkeypatch.setattr(cli, "run", fake_run)
    monkeypatch.setenv(cli.WORKERS_ENV, "3")
    path = _write(tmp_path, "")
    assert main(["--config", path, "--out", str(tmp_path)]) == 0
    assert seen["workers"] == 3
    main(["--config", path, "--out", str(tmp_path), "--workers", "2"])
    assert seen["workers"] == 2


def test_main_reports_bad_config(tmp_path, capsys):
    assert main(["--config", str(tmp_path / "missing.ini")]) == 2
    path = _write(tmp_path, SWEEP.replace("R = 2^3..2^9", "R = 3"))
    assert main(["--config", path]) == 2
    assert "R must be dyadic" in capsys.readouterr().err


def test_failed_check_gives_nonzero_exit(tmp_path):
    cfg = parse_config("[experiment:s]\ncommand = schur\nn = 3\nq = 3\nexpect = convergent\n")
    assert run(cfg, tmp_path) == 1
    disabled = parse_config("[experiment:s]\ncommand = schur\nn = 3\nq = 3\n"
                            "expect = convergent\ncheck = false\n")
    assert run(disabled, tmp_path) == 0


def test_report_command_revalidates(tmp_path):
    good = tmp_path / "good.csv"
    good.write_text(format_csv([ReportRow("x", n=3, norm_value=1.5, flags=("divergent",))]))
    cfg = parse_config(f"[experiment:r]\ncommand = report\ninput = {good}\n")
    assert run(cfg, tmp_path / "out") == 0
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    cfg = parse_config(f"[experiment:r]\ncommand = report\ninput = {bad}\n")
    assert run(cfg, tmp_path / "out") == 1


def test_csv_format_and_validation():
    rows = [ReportRow("x", n=3, q=4.0, R=0.1, norm_value=1 / 3, flags=("divergent", "excluded-from-fit"))]
    text = format_csv(rows)
    rec = list(csv.reader(io.StringIO(text)))
    assert tuple(rec[0]) == COLUMNS
    assert float(rec[1][COLUMNS.index("norm_value")]) == 1 / 3
    assert rec[1][COLUMNS.index("flags")] == "divergent;excluded-from-fit"
    assert validate_csv(text) == []
    assert validate_csv(format_csv([ReportRow("x", flags=("odd",))]))[0].startswith("line 2: unknown flags")
    assert "non-finite" in validate_csv(format_csv([ReportRow("x", norm_value=math.inf)]))[0]
    assert validate_csv(format_csv([ReportRow("x", norm_value=math.inf, flags=("divergent",))])) == []
    assert "header" in validate_csv("a,b\n")[0]


def test_global_check_defaults_to_single_level():
    cfg = parse_config("[experiment:g]\ncommand = global-check\nn = 3\np = 2\nq = 4\n")
    P = cfg.experiments[0].params
    assert P["M"] == [1.0] and P["margin"] == 6 and P["near"] == 4


def _write(tmp_path, text):
    path = tmp_path / "cfg.ini"
    path.write_text(text)
    return str(path)
