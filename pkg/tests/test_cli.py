"""Exit-code contract, reproducibility, and parallelism neutrality of the CLI."""

import json

import pytest

from scoutsim.cli import main

SRW_TEXT = """\
dim 1
scouts 1
states A
init 1 A
trans A * -> 0.5 A (+1) | 0.5 A (-1)
"""


@pytest.fixture
def srw_file(tmp_path):
    f = tmp_path / "srw.proto"
    f.write_text(SRW_TEXT)
    return str(f)


def test_validate_ok(srw_file, capsys):
    assert main(["validate", srw_file]) == 0
    assert capsys.readouterr().out.startswith("ok:")


def test_validate_row_sum(tmp_path, capsys):
    f = tmp_path / "bad.proto"
    f.write_text(SRW_TEXT.replace("0.5 A (-1)", "0.6 A (-1)"))
    assert main(["validate", str(f)]) == 1
    assert "row sum" in capsys.readouterr().out


def test_validate_missing_file():
    assert main(["validate", "/nonexistent/file.proto"]) == 2


def test_usage_error_exit_code():
    assert main(["hitting", "--protocol"]) == 1
    assert main(["lemma", "unknown-check"]) == 1


def test_simulate_csv(capsys):
    assert main(["simulate", "--protocol", "builtin:srw?d=1",
                 "--horizon", "4", "--seed", "9"]) == 0
    out = capsys.readouterr().out
    lines = out.strip().splitlines()
    assert lines[0] == "time,scout,x,state"
    assert len(lines) == 6


def test_simulate_json_format(capsys):
    assert main(["simulate", "--protocol", "builtin:srw?d=1", "--horizon", "3",
                 "--seed", "2", "--format", "json"]) == 0
    body = json.loads(capsys.readouterr().out)
    assert len(body["configurations"]) == 4
    assert body["configurations"][0]["positions"] == [[0]]
    assert "protocol_hash" in body


def test_oracle_exact(capsys):
    assert main(["oracle", "--law", "srw", "--event", "hit:1",
                 "--horizon", "3"]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["probability"] == "3/8"


def test_lemma_pass_fail_and_precondition(capsys):
    # deviation check on the simple walk: PASS -> 0
    assert main(["lemma", "lemma50", "--law", "srw", "--mu", "0.2",
                 "--n", "50", "--y", "10", "--trials", "4000"]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["verdict"] == "PASS"
    assert body["lemma"] == "lemma50"
    # zero-drift law violates the escape precondition -> 1
    assert main(["lemma", "lemma6", "--law", "srw", "--x", "-5",
                 "--trials", "100"]) == 1
    # degenerate law violates the exit precondition -> 1
    assert main(["lemma", "lemma17", "--law", "zero", "--rho", "3",
                 "--trials", "100"]) == 1


def test_lemma_statistical_fail_exit_code(capsys):
    # deterministic +1 exit time is a step function: exponential fit fails -> 3
    assert main(["lemma", "lemma17", "--law", "up", "--rho", "5",
                 "--trials", "200"]) == 3


def test_lemma_corridor_via_cli(capsys):
    # separating drifts with the corridor behind both: flat survival, PASS
    assert main(["lemma", "prop22", "--law", "up", "--s0", "10",
                 "--law2", "1:-1", "--s02", "-10",
                 "--interval", "30:40", "--trials", "300", "--cap", "512"]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["verdict"] == "PASS"
    # missing second walk is a usage error
    assert main(["lemma", "prop22", "--law", "srw", "--trials", "10"]) == 1


def test_oracle_meeting_via_cli(capsys):
    assert main(["oracle", "--law", "srw", "--law2", "srw", "--event",
                 "meeting", "--horizon", "2"]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["probability"] == "3/8"


def test_hitting_outputs_and_reproducibility(srw_file, tmp_path, capsys):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    args = ["hitting", "--protocol", srw_file, "--targets", "1",
            "--replicas", "400", "--cap", "1024", "--seed", "5"]
    assert main(args + ["--out-dir", str(out1)]) == 0
    capsys.readouterr()
    assert main(args + ["--out-dir", str(out2)]) == 0
    capsys.readouterr()
    csv1 = (out1 / "survival_1.csv").read_bytes()
    csv2 = (out2 / "survival_1.csv").read_bytes()
    assert csv1 == csv2
    j1 = (out1 / "summary_1.json").read_bytes()
    j2 = (out2 / "summary_1.json").read_bytes()
    assert j1 == j2
    body = json.loads(j1)
    assert body["seed"] == 5
    assert "divergence" in body and "protocol_hash" in body
    # timestamps only in the sidecar
    assert "created" in json.loads((out1 / "survival_1.csv.meta.json").read_text())


def test_hitting_threads_neutral(srw_file, tmp_path, capsys):
    base = ["hitting", "--protocol", srw_file, "--targets", "1;-2",
            "--replicas", "500", "--cap", "512", "--seed", "7"]
    a = tmp_path / "t1"
    b = tmp_path / "t8"
    assert main(base + ["--threads", "1", "--out-dir", str(a)]) == 0
    capsys.readouterr()
    assert main(base + ["--threads", "8", "--out-dir", str(b)]) == 0
    capsys.readouterr()
    for name in ("survival_1.csv", "survival_m2.csv", "summary_1.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_analyze_json(capsys):
    assert main(["analyze", "--protocol", "builtin:srw?d=1"]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["classes"][0]["recurrent"] is True
    assert body["classes"][0]["drift"] == ["0"]


def test_analyze_with_rays(capsys):
    assert main(["analyze", "--protocol", "builtin:srw?d=2", "--ray-width", "4"]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["ray_domain"]["rays"][0]["zero_flag"] is True


def test_renewal_csv_and_tail(tmp_path, capsys):
    out = tmp_path / "r"
    assert main(["renewal", "--protocol", "builtin:anchored_geometric?d=1,p=1/2",
                 "--horizon", "512", "--tail", "--trials", "200",
                 "--cap", "2048", "--seed", "3", "--out-dir", str(out)]) == 0
    text = (out / "renewal.csv").read_text()
    assert text.splitlines()[0] == "k,Y,A,R"
    tail = json.loads((out / "meeting_tail.json").read_text())
    assert tail["passed"] is True


def test_config_file_defaults(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("horizon=4\nseed=9\n")
    assert main(["simulate", "--protocol", "builtin:srw?d=1",
                 "--config", str(cfg)]) == 0
    out1 = capsys.readouterr().out
    assert main(["simulate", "--protocol", "builtin:srw?d=1",
                 "--horizon", "4", "--seed", "9"]) == 0
    assert capsys.readouterr().out == out1


def test_config_cli_overrides(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("horizon=4\n")
    assert main(["simulate", "--protocol", "builtin:srw?d=1",
                 "--config", str(cfg), "--horizon", "2"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 4  # header + 3 configurations
