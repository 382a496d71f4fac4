import json
import subprocess
import sys

import pytest

from refform import corpus, schedule_from_clocks
from refform.cli import main, parse_schedule_spec
from refform.model import ReferringForm, ScheduleError
from refform.oracle import semantic_influence
from refform.render import form_table

GOLDEN_CASES = [("dff", 9), ("sync", 7), ("twoclock", 12), ("passthrough", 4)]


def cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("name, horizon", GOLDEN_CASES)
def test_analyze_matches_golden(capsys, circuits_dir, golden_dir, name, horizon):
    code, out, _ = cli(capsys, "analyze", circuits_dir / f"{name}.rfc", "--horizon", horizon)
    assert code == 0
    assert out == (golden_dir / f"{name}_h{horizon}.txt").read_text(encoding="utf-8")


@pytest.mark.parametrize("name, horizon", GOLDEN_CASES)
def test_golden_agrees_with_oracle(golden_dir, name, horizon):
    # golden tables are the oracle's perturbation result, rendered
    c = corpus.load(name)
    s = schedule_from_clocks(c, horizon)
    golden = (golden_dir / f"{name}_h{horizon}.txt").read_text(encoding="utf-8")
    body = golden.split("\n", 2)[2]
    assert body == form_table(semantic_influence(c, s))


def test_golden_shapes(golden_dir):
    dff = (golden_dir / "dff_h9.txt").read_text().splitlines()[4:]
    past = [line.split("|")[1].strip() for line in dff]
    assert past == ["{}"] + ["{I@0}"] * 4 + ["{I@4}"] * 4
    assert all(line.split("|")[2].strip() == "{}" for line in dff)
    pt = (golden_dir / "passthrough_h4.txt").read_text().splitlines()[4:]
    assert [line.split("|")[1].strip() for line in pt] == ["{}"] * 4
    assert [line.split("|")[2].strip() for line in pt] == ["{I}"] * 4


def test_analyze_json(capsys, circuits_dir):
    code, out, _ = cli(capsys, "analyze", circuits_dir / "twoclock.rfc", "--horizon", 12, "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert list(doc) == ["horizon", "steps"]
    form = ReferringForm.from_json(doc)
    c = corpus.load("twoclock")
    assert form == semantic_influence(c, schedule_from_clocks(c, 12))
    assert cli(capsys, "analyze", circuits_dir / "twoclock.rfc", "--horizon", 12, "--format", "json")[1] == out


def test_analyze_all_schedules(capsys, circuits_dir):
    code, out, _ = cli(capsys, "analyze", circuits_dir / "selmem.rfc", "--horizon", 3, "--all-schedules", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert len(doc["forms"]) == len(doc["schedules"]) > 1
    code, out, _ = cli(capsys, "analyze", circuits_dir / "selmem.rfc", "--horizon", 3, "--all-schedules")
    assert out.startswith(f"# {len(doc['forms'])} distinct referring forms of selmem, horizon 3")


def test_analyze_with_schedule(capsys, circuits_dir):
    code, out, _ = cli(
        capsys, "analyze", circuits_dir / "selmem.rfc", "--horizon", 4, "--schedule", "M1=1000;M2=0100;sel=0011"
    )
    assert code == 0
    assert "# schedule M1=1000;M2=0100;sel=0011" in out
    assert out.splitlines()[-1].split("|")[1].strip() == "{I2@1}"


def test_free_clock_needs_schedule(capsys, circuits_dir):
    code, _, err = cli(capsys, "analyze", circuits_dir / "selmem.rfc", "--horizon", 4)
    assert code == 1 and "--schedule" in err


def test_check_dff_preserving(capsys, circuits_dir):
    code, out, _ = cli(capsys, "check", circuits_dir / "dff.rfc", "--horizon", 9, "--all-schedules")
    assert code == 0 and out.strip() == "time-preserving"


def test_check_selmem_not_preserving(capsys, circuits_dir):
    code, out, _ = cli(capsys, "check", circuits_dir / "selmem.rfc", "--horizon", 10, "--all-schedules")
    assert code == 3
    lines = out.splitlines()
    assert lines[0] == "NOT time-preserving" and lines[1] == "witness cycle:"
    assert len(lines) == 4 and all("t1=" in line and "t2=" in line for line in lines[2:])


def test_check_json(capsys, circuits_dir):
    code, out, _ = cli(capsys, "check", circuits_dir / "selmem.rfc", "--horizon", 6, "--all-schedules", "--format", "json")
    assert code == 3
    doc = json.loads(out)
    assert doc["preserving"] is False
    used = {str(e["form"]) for e in doc["witness"]}
    assert set(doc["forms"]) == used == set(doc["schedules"])
    code, out, _ = cli(capsys, "check", circuits_dir / "dff.rfc", "--horizon", 6, "--format", "json")
    assert code == 0 and json.loads(out)["preserving"] is True


def test_check_missing_file(capsys):
    code, _, err = cli(capsys, "check", "missing.rfc", "--horizon", 4)
    assert code == 1 and "missing.rfc" in err and "cannot read" in err


def test_parse_error_diagnostic(capsys, tmp_path):
    p = tmp_path / "bad.rfc"
    p.write_text("circuit x {\n  input I;\n  output from {G};\n}\n")
    code, out, err = cli(capsys, "analyze", p, "--horizon", 3)
    assert code == 1 and not out
    assert err.strip() == f"error: {p}:3:16: unknown identifier G"


def test_usage_errors_exit_1(capsys, circuits_dir):
    assert cli(capsys, "analyze", circuits_dir / "dff.rfc")[0] == 1
    assert cli(capsys, "analyze", circuits_dir / "dff.rfc", "--horizon", 0)[0] == 1
    assert cli(capsys, "frobnicate")[0] == 1
    assert cli(capsys, "analyze", circuits_dir / "dff.rfc", "--horizon", 3, "--schedule", "F=1")[0] == 1


def test_help_exits_0(capsys):
    assert cli(capsys, "--help")[0] == 0


def test_verify_text(capsys):
    code, out, _ = cli(capsys, "verify", "--ffs", 1, "--horizon", 4, "--theorem", "--oracle-sample", 10)
    assert code == 0
    assert out.splitlines()[0] == "theorem: checked 9 circuits × 16 schedules: 0 failures"


def test_verify_json_and_both_kinds(capsys):
    code, out, _ = cli(capsys, "verify", "--ffs", 1, "--horizon", 3, "--format", "json", "--oracle-sample", 0)
    assert code == 0
    docs = json.loads(out)
    assert [d["kind"] for d in docs] == ["theorem", "lemma"]
    assert all(d["checked"] == 72 and d["failures"] == [] for d in docs)


def test_verify_budget(capsys, monkeypatch):
    assert cli(capsys, "verify", "--ffs", 3, "--horizon", 2)[0] == 2
    monkeypatch.setenv("REFFORM_BUDGET", "100")
    code, _, err = cli(capsys, "verify", "--ffs", 2, "--horizon", 6)
    assert code == 2 and "budget" in err


def test_analyze_budget(capsys, circuits_dir, monkeypatch):
    monkeypatch.setenv("REFFORM_BUDGET", "50")
    assert cli(capsys, "analyze", circuits_dir / "selmem.rfc", "--horizon", 6, "--all-schedules")[0] == 2


def test_oracle_diff(capsys, circuits_dir, tmp_path):
    code, out, _ = cli(capsys, "oracle-diff", circuits_dir / "dff.rfc", "--horizon", 6)
    assert code == 0 and out.strip() == "no differences"
    p = tmp_path / "reconv.rfc"
    p.write_text("circuit r { input I; clock c period 2 offset 0; ff A clock c from {I}; ff B clock c from {I}; output from {A, B}; }")
    code, out, _ = cli(capsys, "oracle-diff", p, "--horizon", 4, "--mode", "xor")
    assert code == 4
    assert "only-symbolic ['I@0']" in out


def test_render_dot(capsys, circuits_dir):
    code, out, _ = cli(capsys, "render", circuits_dir / "dff.rfc", "--horizon", 9, "--format", "dot")
    assert code == 0 and out.startswith('digraph "dff" {')
    latched = [t for t in range(9) if f'label="F@{t} L"' in out]
    assert latched == [0, 4, 8]
    assert out.count("[label=latch]") == 2 and out.count("[label=hold, style=dashed]") == 6


def test_render_ascii(capsys, circuits_dir):
    code, out, _ = cli(capsys, "render", circuits_dir / "dff.rfc", "--horizon", 9)
    assert code == 0
    row = next(line for line in out.splitlines() if line.startswith("F "))
    assert row.split() == ["F", "L", ".", ".", ".", "L", ".", ".", ".", "L"]
    assert "O@5 <- past {I@4} current {}" in out


def test_parse_schedule_spec():
    c = corpus.load("selmem")
    s = parse_schedule_spec(c, "c1=110; M2 = 001 ; sel=010", 3)
    assert s.to_spec(c) == "M1=110;M2=001;sel=010"
    for bad in ["M1", "M1=11", "M1=1x1", "=101"]:
        with pytest.raises(ScheduleError):
            parse_schedule_spec(c, bad + ";M2=000", 3)


def test_module_entry_point(circuits_dir):
    res = subprocess.run(
        [sys.executable, "-m", "refform", "check", str(circuits_dir / "dff.rfc"), "--horizon", "5"],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0 and res.stdout.strip() == "time-preserving"
