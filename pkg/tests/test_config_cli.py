from pathlib import Path

import pytest

from holocurve.cli import main, suite_paths
from holocurve.config import KINDS, ConfigError, parse_config, parse_config_text
from holocurve.runner import run_experiment

SUITE = {p.stem: p for p in suite_paths("acceptance")}

FMT = """\
[experiment]
name = tiny
kind = fmt

[curve]
affine = "z"

[divisor]
Q = "w1"

[grid]
min = 2
max = 8
points = 3
"""


def write(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_minimal_config_is_valid():
    cfg = parse_config_text(FMT)
    assert cfg.name == "tiny" and cfg.kind == "fmt"


def test_suite_covers_every_kind():
    kinds = {parse_config(p).kind for p in SUITE.values()}
    assert kinds == set(KINDS)


def test_bad_expression_points_at_token():
    with pytest.raises(ConfigError) as info:
        parse_config_text(FMT.replace('affine = "z"', 'affine = "z +* 2"'))
    issue = info.value.issues[0]
    assert (issue.line, issue.column) == (6, 14)
    assert "unexpected '*'" in issue.message


def test_missing_section_is_named():
    text = FMT.replace("kind = fmt", "kind = smt-identity")
    with pytest.raises(ConfigError) as info:
        parse_config_text(text)
    assert any("requires a [fields] section" in i.message for i in info.value.issues)


def test_all_errors_are_collected():
    text = FMT.replace('Q = "w1"', 'Q = "w1^2 + w0"').replace("min = 2", "min = 0.5").replace("kind = fmt", "kind = fmtt")
    with pytest.raises(ConfigError) as info:
        parse_config_text(text)
    assert len(info.value.issues) >= 2
    assert all(i.line > 0 for i in info.value.issues)


def test_fmt_line_passes_with_csv(tmp_path):
    rep = run_experiment(parse_config(SUITE["fmt-line"]), tmp_path)
    assert rep.status == "pass", rep.summary_text()
    csv = (tmp_path / "fmt-line" / "fmt.csv").read_text().splitlines()
    assert csv[0] == "r,T,m,N,residual"
    assert len(csv) == 14
    assert (tmp_path / "fmt-line" / "summary.txt").read_text().startswith("experiment: fmt-line")


@pytest.mark.parametrize("name", ["thm24-square", "autoparallel-line", "first-integral-control", "siu-contained"])
def test_suite_experiments_pass(tmp_path, name):
    rep = run_experiment(parse_config(SUITE[name]), tmp_path)
    assert rep.status == "pass", rep.summary_text()


def test_runtime_error_is_reported_not_raised(tmp_path):
    # (z : z^2) has a common zero at the origin
    text = FMT.replace('affine = "z"', 'homogeneous = "z", "z^2"')
    rep = run_experiment(parse_config_text(text), tmp_path)
    assert rep.status == "fail" and rep.error
    assert "error:" in (tmp_path / "tiny" / "summary.txt").read_text()


def test_runs_are_deterministic(tmp_path):
    cfg = parse_config(SUITE["thm25-exp"])
    run_experiment(cfg, tmp_path / "a")
    run_experiment(cfg, tmp_path / "b")
    for f in sorted((tmp_path / "a" / cfg.name).iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / cfg.name / f.name).read_bytes()


def test_cli_exit_codes(tmp_path, capsys):
    good = write(tmp_path, FMT)
    assert main(["run", str(good), "--out", str(tmp_path / "out")]) == 0
    assert "1/1 passed" in capsys.readouterr().out
    failing = write(tmp_path, FMT.replace("name = tiny", "name = strict") + "\n[expect]\nresidual = 5\n", "fail.cfg")
    assert main(["run", str(failing), "--out", str(tmp_path / "out")]) == 1
    broken = write(tmp_path, FMT.replace("kind = fmt", "kind = nope"), "bad.cfg")
    assert main(["run", str(broken), "--out", str(tmp_path / "out")]) == 2
    assert main(["run", str(good), str(good), "--out", str(tmp_path / "out")]) == 2
    assert main(["check", str(good)]) == 0
    assert main(["check", str(broken)]) == 2
    assert main(["check", str(tmp_path / "missing.cfg")]) == 2


def test_list_kinds(capsys):
    assert main(["list-kinds"]) == 0
    out = capsys.readouterr().out
    assert all(kind in out for kind in KINDS)
