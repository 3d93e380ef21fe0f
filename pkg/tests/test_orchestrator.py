import os

import pytest

from main import build_parser, config_from_args, main
from src.core.errors import ConfigError, InputError, NoFreeWeightError, OracleDegeneracyError
from src.core.orchestrator import EXIT_FAILURE, EXIT_INPUT, EXIT_NO_WEIGHT, ReconstructionOrchestrator, exit_code_for
from src.core.run_config import RunConfig
from src.db.run_ledger import RunLedger
from src.utils.file_utils import load_json, load_jsonl


def run(tmp_path, name="out", **kwargs):
    kwargs.setdefault("ledger_path", None)
    config = RunConfig(out_dir=str(tmp_path / name), **kwargs)
    return ReconstructionOrchestrator(config).run()


def test_circle_reconstruction(tmp_path):
    result = run(tmp_path, m=1, synth="circle:n=400", landmarks=20)
    assert result.exit_code == 0
    topo = result.report["topology"]
    assert topo["chi"] == 0
    assert topo["betti"] == [1, 1]
    assert topo["manifold"]["passed"]
    assert topo["manifold"]["components"] == 1
    assert topo["slivers"] == 0

    out = tmp_path / "out"
    for name in ("complex.jsonl", "weights.json", "report.json", "net.json"):
        assert (out / name).exists()
    rows = load_jsonl(str(out / "complex.jsonl"))
    landmarks = load_json(str(out / "net.json"))["landmarks"]
    assert {r[0] for r in rows if len(r) == 1} == set(landmarks)
    assert len(rows) == 40
    assert load_json(str(out / "report.json"))["exit_code"] == 0


def test_report_carries_diagnostics(tmp_path):
    result = run(tmp_path, m=1, synth="circle:n=300", landmarks=12)
    report = result.report
    assert report["net"]["n_landmarks"] == 12
    assert report["sampling"]["eps_below_lambda"]
    assert report["sampling"]["reach"] == 1.0
    assert report["parameters"]["neighbor_cap"] == 18
    assert report["weights"]["relative_amplitude"] <= report["parameters"]["alpha0_tilde"] + 1e-12
    assert set(report["timings"]) == {"ingest", "net", "weights", "witness", "analytics"}


def test_matrix_input_matches_the_cloud_run(tmp_path):
    matrix = str(tmp_path / "circle.bin")
    first = run(tmp_path, "a", m=1, synth="circle:n=200,seed=5", landmarks=12, save_matrix=matrix)
    second = run(tmp_path, "b", m=1, input_path=matrix, input_format="binary", landmarks=12)
    assert first.exit_code == second.exit_code == 0
    a = (tmp_path / "a" / "complex.jsonl").read_bytes()
    b = (tmp_path / "b" / "complex.jsonl").read_bytes()
    assert a == b


def test_lambda_stop_rule(tmp_path):
    result = run(tmp_path, m=1, synth="circle:n=300", lambda_stop=0.2)
    assert result.exit_code == 0
    assert result.report["net"]["lambda"] <= 0.2


def test_off_and_render_outputs(tmp_path):
    off = tmp_path / "c.off"
    png = tmp_path / "c.png"
    result = run(tmp_path, m=1, synth="circle:n=200", landmarks=10, off_path=str(off), render_path=str(png))
    assert result.exit_code == 0
    assert off.read_text().startswith("OFF\n10 0 10\n")
    assert png.stat().st_size > 0


def test_oracle_section(tmp_path):
    result = run(tmp_path, m=1, synth="circle:n=200,noise=0.02", landmarks=10, oracle=True)
    assert result.exit_code == 0
    oracle = result.report["oracle"]
    assert not oracle["skipped"]
    assert oracle["inclusion"]["passed"]
    assert oracle["stability"]["mode"] == "oracle"


def test_missing_input_exits_with_input_code(tmp_path):
    result = run(tmp_path, m=1, input_path=str(tmp_path / "missing.csv"), landmarks=3)
    assert result.exit_code == EXIT_INPUT
    assert result.report["error"]["type"] == "InputError"
    assert os.path.exists(tmp_path / "out" / "report.json")


def test_bad_alpha_is_a_config_error(tmp_path):
    result = run(tmp_path, m=1, synth="circle:n=100", landmarks=5, alpha0=0.6)
    assert result.exit_code == EXIT_INPUT
    assert result.report["error"]["type"] == "ConfigError"


def test_theoretical_constants_are_infeasible_by_default(tmp_path):
    result = run(tmp_path, m=1, synth="circle:n=100", landmarks=5, theoretical=True)
    assert result.exit_code == EXIT_NO_WEIGHT
    assert result.report["feasibility"]["passed"] is False
    assert result.report["parameters"]["neighbor_cap"] == 66


def test_exit_codes():
    assert exit_code_for(InputError("dmatrix", "x")) == EXIT_INPUT
    assert exit_code_for(ConfigError("x")) == EXIT_INPUT
    assert exit_code_for(NoFreeWeightError(0, 1.0, [])) == EXIT_NO_WEIGHT
    assert exit_code_for(OracleDegeneracyError((0, 1), 0.0)) == EXIT_FAILURE


@pytest.mark.parametrize("changes", [
    {"synth": None},
    {"input_path": "x.csv"},
    {"landmarks": None},
    {"lambda_stop": 0.1},
    {"m": 0},
    {"delta0": 0.5},
    {"threads": 0},
    {"input_format": "xml", "synth": None, "input_path": "x"},
])
def test_config_validation(changes):
    fields = {"m": 1, "synth": "circle", "landmarks": 4, **changes}
    with pytest.raises(ConfigError):
        RunConfig(**fields).validate()


def test_cli_runs_end_to_end(tmp_path):
    code = main(["--synth", "circle:n=200", "--m", "1", "--landmarks", "12",
                 "--out", str(tmp_path / "cli"), "--no-ledger"])
    assert code == 0
    assert (tmp_path / "cli" / "complex.jsonl").exists()


def test_cli_missing_file_exit_code(tmp_path):
    code = main(["--input", str(tmp_path / "none.csv"), "--m", "1", "--landmarks", "3",
                 "--out", str(tmp_path / "cli"), "--no-ledger"])
    assert code == EXIT_INPUT


def test_cli_arguments_map_onto_the_config():
    args = build_parser().parse_args(["--synth", "torus3:n=100", "--m", "2", "--lambda", "0.3", "--theoretical",
                                      "--eta", "0.02", "--threads", "3", "--no-ledger"])
    config = config_from_args(args)
    assert config.lambda_stop == 0.3
    assert config.mode == "theoretical"
    assert config.eta_star == 0.02
    assert config.threads == 3
    assert config.ledger_path is None
    with pytest.raises(SystemExit):
        build_parser().parse_args(["--synth", "circle", "--m", "1", "--landmarks", "3", "--lambda", "0.1"])


def test_runs_are_recorded_in_the_ledger(tmp_path):
    ledger = str(tmp_path / "ledger" / "runs.db")
    run(tmp_path, m=1, synth="circle:n=150", landmarks=8, ledger_path=ledger)
    run(tmp_path, "bad", m=1, input_path=str(tmp_path / "missing.csv"), landmarks=3, ledger_path=ledger)
    rows = RunLedger(ledger).runs()
    assert [r["status"] for r in rows] == ["ok", "InputError"]
    assert rows[0]["n_witnesses"] == 150
    assert rows[0]["n_landmarks"] == 8
