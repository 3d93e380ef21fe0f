"""Desk-scale reconstructions; deselected by default, run with `pytest -m slow`."""
import pytest

from src.core.orchestrator import ReconstructionOrchestrator
from src.core.run_config import RunConfig

pytestmark = pytest.mark.slow

SPHERE = dict(m=2, synth="sphere2:n=4000", landmarks=150)
TORUS = dict(m=2, synth="torus3:n=8000,R=2,r=0.7", landmarks=300)

# At these densities the order-2 witness region of a nearly cocircular landmark
# quad is smaller than the witness spacing, so some Delaunay edges are never
# witnessed and their two triangles drop out. Weights capped at alpha~0 L(p)
# cannot widen those regions enough; see DESIGN.md.
SPARSE_WITNESSES = pytest.mark.xfail(reason="witness sample too sparse for every Delaunay edge", strict=False)


def reconstruct(tmp_path, name="out", **kwargs):
    config = RunConfig(out_dir=str(tmp_path / name), ledger_path=None, **kwargs)
    result = ReconstructionOrchestrator(config).run()
    assert result.exit_code == 0, result.report.get("error")
    return result


def assert_clean_weights(result):
    weights = result.report["weights"]
    assert weights["altitude_bound_violations"] == 0
    assert result.report["topology"]["over_dimension"] == 0


def assert_parity(tmp_path, params):
    matrix = str(tmp_path / "d.bin")
    reconstruct(tmp_path, "cloud", save_matrix=matrix, **params)
    again = {k: v for k, v in params.items() if k != "synth"}
    reconstruct(tmp_path, "matrix", input_path=matrix, input_format="binary", **again)
    a = (tmp_path / "cloud" / "complex.jsonl").read_bytes()
    b = (tmp_path / "matrix" / "complex.jsonl").read_bytes()
    assert a == b


def test_sphere_weights(tmp_path):
    assert_clean_weights(reconstruct(tmp_path, **SPHERE))


@SPARSE_WITNESSES
def test_sphere_is_a_closed_surface(tmp_path):
    topo = reconstruct(tmp_path, **SPHERE).report["topology"]
    assert topo["manifold"]["passed"]
    assert topo["chi"] == 2
    assert topo["betti"] == [1, 0, 1]


def test_sphere_parity(tmp_path):
    assert_parity(tmp_path, SPHERE)


def test_torus_weights(tmp_path):
    assert_clean_weights(reconstruct(tmp_path, **TORUS))


@SPARSE_WITNESSES
def test_torus_is_a_closed_surface(tmp_path):
    topo = reconstruct(tmp_path, **TORUS).report["topology"]
    assert topo["manifold"]["passed"]
    assert topo["chi"] == 0
    assert topo["betti"] == [1, 2, 1]


def test_torus_parity(tmp_path):
    assert_parity(tmp_path, TORUS)


def test_witness_pass_scales_linearly_in_witnesses(tmp_path):
    times = []
    for n in (400, 1600):
        result = reconstruct(tmp_path, f"circle{n}", m=1, synth=f"circle:n={n}", landmarks=20)
        times.append(result.report["timings"]["witness"])
    assert 3.0 <= times[1] / times[0] <= 5.5
