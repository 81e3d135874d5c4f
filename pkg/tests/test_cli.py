import json
import math
import subprocess
import sys

import pytest

from chanlab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_entropy_audit_random_states(capsys):
    code, out, _ = run(capsys, "entropy-audit", "--trials", "20", "--seed", "1")
    report = json.loads(out)
    assert code == 0 and report["schema"] == 1 and report["violations"] == []


@pytest.mark.slow
def test_entropy_audit_thousand_trials(capsys):
    code, out, _ = run(capsys, "entropy-audit", "--trials", "1000", "--dims", "2,2,2", "--seed", "1")
    assert code == 0 and json.loads(out)["trials"] == 1000


def test_entropy_audit_ghz_fixture(capsys, fixtures_dir):
    code, out, _ = run(capsys, "entropy-audit", "--trials", "1", "--state", str(fixtures_dir / "ghz.json"))
    assert code == 0
    reports = json.loads(out)["details"][0]["reports"]
    ssa = next(r for r in reports if r["name"] == "strong_subadditivity")
    assert ssa["slack"] == pytest.approx(math.log(2), abs=1e-12)


def test_entropy_audit_usage_errors(capsys, monkeypatch):
    monkeypatch.delenv("CHANLAB_SEED", raising=False)
    assert run(capsys, "entropy-audit", "--trials", "0", "--seed", "1")[0] == 1
    assert run(capsys, "entropy-audit", "--trials", "3")[0] == 1
    assert run(capsys, "entropy-audit", "--dims", "2,2", "--seed", "1")[0] == 1
    assert run(capsys, "entropy-audit", "--dims", "two", "--seed", "1")[0] == 1
    assert run(capsys, "no-such-command")[0] == 1


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("CHANLAB_SEED", "5")
    from_env = run(capsys, "recovery-sweep", "--trials", "3")
    from_flag = run(capsys, "recovery-sweep", "--trials", "3", "--seed", "5")
    assert from_env[0] == 0 and from_env[1] == from_flag[1]
    monkeypatch.setenv("CHANLAB_SEED", "abc")
    assert run(capsys, "recovery-sweep", "--trials", "3")[0] == 1


def test_ampss_demo(capsys):
    code, out, _ = run(capsys, "ampss-demo", "--seed", "2", "--trials", "50")
    report = json.loads(out)
    assert code == 0
    assert report["hand_input"]["contradiction"] is True
    assert report["sampled"]["iv_failures"] == 0 and report["sampled"]["joint_i_ii_iii"] == 0


def test_ampss_demo_table(capsys):
    code, out, _ = run(capsys, "ampss-demo", "--seed", "2", "--trials", "5", "--format", "table")
    assert code == 0
    assert "S(ABR) + S(B)" in out and "contradiction=True" in out


def test_channel_verify(capsys, fixtures_dir, tmp_path):
    assert run(capsys, "channel-verify", str(fixtures_dir / "identity_channel.json"))[0] == 0
    bad = tmp_path / "double.json"
    eye = {"re": [[1, 0], [0, 1]], "im": [[0, 0], [0, 0]], "row_dims": [2], "col_dims": [2]}
    bad.write_text(json.dumps({"kraus": [eye, eye], "in_dim": 2, "out_dim": 2}))
    code, out, _ = run(capsys, "channel-verify", str(bad))
    assert code == 2 and json.loads(out)["certificate"]["passed"] is False
    assert run(capsys, "channel-verify", str(tmp_path / "missing.json"))[0] == 1
    garbage = tmp_path / "garbage.json"
    garbage.write_text("{not json")
    assert run(capsys, "channel-verify", str(garbage))[0] == 1
    garbage.write_text("{}")
    assert run(capsys, "channel-verify", str(garbage))[0] == 1


def test_shor_demo(capsys):
    code, out, _ = run(capsys, "shor-demo", "--sweep")
    report = json.loads(out)
    assert code == 0 and report["corrected"] == 27 and len(report["rows"]) == 27
    code, out, _ = run(capsys, "shor-demo", "--sweep", "--format", "table")
    assert "27/27 corrected" in out


def test_shor_demo_single_errors(capsys):
    code, out, _ = run(capsys, "shor-demo", "--error", "Z5", "--logical", "0.6,0.8j")
    assert code == 0 and json.loads(out)["rows"][0]["correction"] == "Z4"
    assert run(capsys, "shor-demo", "--code", "three", "--error", "Z2")[0] == 2
    assert run(capsys, "shor-demo", "--error", "X1X2")[0] == 1
    assert run(capsys, "shor-demo", "--logical", "1,1")[0] == 1


def test_petz_demo(capsys):
    code, out, _ = run(capsys, "petz-demo", "--example", "erasure")
    assert code == 0 and json.loads(out)["max_residual"] <= 1e-8
    code, out, _ = run(capsys, "petz-demo", "--format", "table")
    assert "P(N(rho))" in out


def test_recovery_sweep(capsys):
    code, out, _ = run(capsys, "recovery-sweep", "--trials", "5", "--seed", "3", "--log-base", "bits")
    report = json.loads(out)
    assert code == 0 and report["violations"] == []
    assert all(t["base"] == "bits" for t in report["trials"])


def test_wedge_demo(capsys):
    code, out, _ = run(capsys, "wedge-demo", "--seed", "4", "--probes", "3")
    report = json.loads(out)
    assert code == 0 and report["chain"]["passed"] and len(report["chain"]["steps"]) == 4
    code, out, _ = run(capsys, "wedge-demo", "--seed", "4", "--kind", "product", "--probes", "2")
    assert code == 0 and json.loads(out)["reconstruction"]["epsilon"] <= 1e-8
    assert run(capsys, "wedge-demo", "--seed", "4", "--dims", "2,2,4")[0] == 1


def test_out_file_and_determinism(capsys, tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    for path in (first, second):
        assert run(capsys, "wedge-demo", "--seed", "9", "--probes", "2", "--out", str(path))[0] == 0
    assert first.read_bytes() == second.read_bytes()
    assert json.loads(first.read_text())["schema"] == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "chanlab", "shor-demo", "--error", "X3"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["rows"][0]["correction"] == "X3"
