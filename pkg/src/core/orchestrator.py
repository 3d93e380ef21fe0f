import os
import time
import uuid
from dataclasses import dataclass, field
from datetime import datetime

from configs import settings
from src.core.errors import (
    ConfigError,
    DistWitError,
    InfeasibleParametersError,
    InputError,
    NoFreeWeightError,
    OracleDegeneracyError,
)
from src.core.run_config import RunConfig
from src.data.synth import known_reach, parse_spec, sample
from src.db.run_ledger import RunLedger
from src.geometry.dmatrix import (
    from_point_cloud,
    load_distance_matrix,
    load_point_cloud,
    save_binary,
    save_csv,
    validate_triangle,
)
from src.geometry.simplexgeo import FaceClassifier
from src.geometry.weightedgeo import eta
from src.oracle.protect_oracle import verify_witness_inclusion
from src.reconstruction.netsel import default_cap, estimate_eps, farthest_point_sample, sampling_diagnostics
from src.reconstruction.weights import (
    all_candidate_sets,
    assign_weights,
    feasibility_check,
    landmark_matrix,
    stability_audit,
)
from src.reconstruction.witness import build_witness_complex
from src.topology.scomplex import export_off, render_complex, topology_report
from src.utils.file_utils import save_json, save_jsonl
from src.utils.log_utils import get_logger

logger = get_logger("cli")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_NO_WEIGHT = 2
EXIT_INPUT = 3


def exit_code_for(error: Exception) -> int:
    if isinstance(error, (InputError, ConfigError)):
        return EXIT_INPUT
    if isinstance(error, (NoFreeWeightError, InfeasibleParametersError)):
        return EXIT_NO_WEIGHT
    return EXIT_FAILURE


@dataclass
class RunResult:
    exit_code: int
    results_dir: str
    report: dict = field(default_factory=dict)
    complex_: object = None
    weights: object = None
    net: object = None


class ReconstructionOrchestrator:
    """ingest -> net -> weights -> witness complex -> analytics, with artifacts under one directory."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.run_id = uuid.uuid4().hex[:8]
        if config.out_dir:
            self.results_dir = config.out_dir
        else:
            timestamp = datetime.now().strftime("%Y-%m-%d_%H-%M-%S")
            self.results_dir = os.path.join(settings.RESULTS_DIR, f"{timestamp}_run_{self.run_id}")
        os.makedirs(self.results_dir, exist_ok=True)
        self.timings: dict = {}
        self.report: dict = {"run_id": self.run_id, "input": config.label, "mode": config.mode}
        self.cloud = None
        self.dm = None
        self.spec = None
        self.classifier = None
        self.candidate_count = 0

    def run(self) -> RunResult:
        result = RunResult(EXIT_FAILURE, self.results_dir, self.report)
        status = "failed"
        try:
            self.config.validate()
            logger.info(f"🚀 Run {self.run_id} started. Results: {self.results_dir}")
            complex_, weights, net = self._pipeline()
            result.exit_code = EXIT_OK
            result.complex_, result.weights, result.net = complex_, weights, net
            status = "ok"
        except DistWitError as e:
            result.exit_code = exit_code_for(e)
            status = type(e).__name__
            self.report["error"] = {"type": status, "module": e.module, "message": e.message}
            logger.error(f"🔴 {e}")
        finally:
            self.report["timings"] = self.timings
            self.report["exit_code"] = result.exit_code
            save_json(os.path.join(self.results_dir, settings.REPORT_FILE), self.report)
            self._record(status)
            logger.info(f"--- Run {self.run_id} complete (exit {result.exit_code}); artifacts in {self.results_dir}")
        return result

    def _timed(self, stage: str, fn, *args, **kwargs):
        start = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        finally:
            self.timings[stage] = time.perf_counter() - start

    def _pipeline(self):
        cfg = self.config
        self.dm = self._timed("ingest", self._ingest)

        net = self._timed("net", farthest_point_sample, self.dm, cfg.seed, cfg.landmarks, cfg.lambda_stop)
        save_json(os.path.join(self.results_dir, settings.NET_FILE), net.to_json())
        self.report["net"] = {"n_witnesses": self.dm.n, "n_landmarks": net.size, "lambda": net.lambda_}
        self._diagnostics(net)

        weights, _ = self._timed("weights", self._weights, net)
        complex_ = self._timed("witness", build_witness_complex, self.dm, net, weights.w2, cfg.m, threads=cfg.threads)
        self._timed("analytics", self._analytics, net, weights, complex_)
        return complex_, weights, net

    def _ingest(self):
        cfg = self.config
        if cfg.synth:
            self.spec = parse_spec(cfg.synth)
            self.cloud = sample(self.spec)
            dm = from_point_cloud(self.cloud)
        elif cfg.input_format == "cloud":
            self.cloud = load_point_cloud(cfg.input_path)
            dm = from_point_cloud(self.cloud)
        else:
            dm = load_distance_matrix(cfg.input_path, cfg.input_format, strict=cfg.strict)

        if not cfg.strict:
            tri = validate_triangle(dm, settings.TRIANGLE_SAMPLE_COUNT, settings.TRIANGLE_TOL, seed=cfg.seed)
            self.report["triangle"] = {"checked": tri.checked, "violations": len(tri.violations),
                                       "exhaustive": tri.exhaustive}
            if not tri.passed:
                logger.warning(f"🟡 {len(tri.violations)} sampled triangle-inequality violations")
        if cfg.save_matrix:
            (save_binary if cfg.save_matrix.endswith(".bin") else save_csv)(dm, cfg.save_matrix)
        return dm

    def _diagnostics(self, net):
        if self.spec is not None:
            eps_hat = self.cloud.eps_hat
        else:
            eps_hat = estimate_eps(self.dm, net)
        reach = self.config.reach or (known_reach(self.spec) if self.spec is not None else None)
        self.report["sampling"] = sampling_diagnostics(net.lambda_, eps_hat, reach).to_json()

    def _weights(self, net):
        cfg = self.config
        gamma0, delta0, a_tilde, m = cfg.gamma0_value, cfg.delta0_value, cfg.alpha0_tilde, cfg.m
        cap, saturated = (cfg.cap, False) if cfg.cap else default_cap(m, cfg.mode)
        self.report["parameters"] = {
            "m": m, "gamma0": gamma0, "delta0": delta0, "alpha0": cfg.alpha0, "alpha0_tilde": a_tilde,
            "eta_star": cfg.eta_star, "neighbor_cap": cap, "neighbor_cap_saturated": saturated,
        }
        if cfg.theoretical:
            feasibility = feasibility_check(gamma0, delta0, a_tilde, m, cap)
            self.report["feasibility"] = feasibility.to_json()
            if not feasibility.passed:
                raise InfeasibleParametersError(feasibility)

        eta_value = eta(gamma0, delta0, m, net.lambda_, cfg.mode, cfg.eta_star)
        self.classifier = FaceClassifier(landmark_matrix(self.dm, net), gamma0)
        candidates = all_candidate_sets(self.dm, net, gamma0, m, cap, self.classifier, cfg.threads)
        self.candidate_count = sum(len(c) for c in candidates)
        try:
            weights, log = assign_weights(self.dm, net, gamma0, delta0, a_tilde, m, eta_value, cap,
                                          threads=cfg.threads, classifier=self.classifier,
                                          candidate_sets=candidates, mode=cfg.mode)
        except NoFreeWeightError as e:
            self.report["no_free_weight"] = {"landmark": e.landmark, "cap": e.cap,
                                             "intervals": [iv.to_json() for iv in e.intervals]}
            raise
        log.neighbor_cap_saturated = saturated
        save_json(os.path.join(self.results_dir, settings.WEIGHTS_FILE), {
            "landmarks": net.landmark_ids,
            "w2": weights.w2,
            "relative_amplitude": weights.relative_amplitude(net.nearest_dist) if net.size > 1 else 0.0,
            "log": log.to_json(),
        })
        self.report["weights"] = {
            "candidates": log.total_candidates,
            "altitude_bound_violations": log.altitude_bound_violations,
            "relative_amplitude": weights.relative_amplitude(net.nearest_dist) if net.size > 1 else 0.0,
            "eta": eta_value,
        }
        return weights, log

    def _analytics(self, net, weights, complex_):
        cfg = self.config
        save_jsonl(os.path.join(self.results_dir, settings.COMPLEX_FILE), complex_.to_jsonl_rows(net.landmark_ids))
        self.report["topology"] = topology_report(complex_, cfg.m)
        self.report["topology"]["over_dimension"] = complex_.flags.get("over_dimension", 0)
        higher = [s for d in range(2, complex_.max_dim + 1) for s in complex_.simplices(d)]
        self.report["topology"]["slivers"] = sum(self.classifier.sliver_many(higher))

        coords = self.cloud.coords[net.landmark_ids] if self.cloud is not None else None
        d2 = None if coords is not None else landmark_matrix(self.dm, net).dense()
        if cfg.off_path:
            export_off(complex_, cfg.off_path, coords=coords, d2=d2)
        if cfg.render_path:
            render_complex(complex_, cfg.render_path, coords=coords, d2=d2, title=cfg.label)
        if cfg.oracle:
            self.report["oracle"] = self._oracle(net, weights, complex_)

        topo = self.report["topology"]
        logger.info(f"✅ chi={topo['chi']} betti={topo['betti']} manifold={topo['manifold']['passed']}")
        if not topo["manifold"]["passed"]:
            boundary, branching, links = topo["manifold"]["failure_counts"]
            logger.warning(f"🟡 Not a closed manifold: {boundary} boundary faces, {branching} branching faces, "
                           f"{links} bad vertex links")

    def _oracle(self, net, weights, complex_) -> dict:
        cfg = self.config
        if self.cloud is None or self.cloud.dim > settings.ORACLE_MAX_DIM or net.size > settings.ORACLE_MAX_POINTS:
            logger.info("🟡 Oracle checks need a point cloud in dimension <= 3 with <= 64 landmarks; skipped")
            return {"skipped": True}
        out = {"skipped": False}
        try:
            out["inclusion"] = verify_witness_inclusion(self.cloud, net.landmark_ids, weights.w2, net=net,
                                                        witness_complex=complex_).to_json()
        except OracleDegeneracyError as e:
            out["inclusion"] = {"error": str(e)}
        out["stability"] = stability_audit(
            self.dm, net, weights.w2, cfg.gamma0_value, cfg.delta0_value, cfg.m, cfg.audit_sample,
            grid_size=cfg.audit_grid, eta_value=self.report["weights"]["eta"],
            cap=self.report["parameters"]["neighbor_cap"], cloud=self.cloud, classifier=self.classifier,
        ).to_json()
        return out

    def _record(self, status: str):
        cfg = self.config
        if not cfg.ledger_path:
            return
        net = self.report.get("net", {})
        RunLedger(cfg.ledger_path).add_run({
            "run_id": self.run_id,
            "label": cfg.label,
            "n_witnesses": net.get("n_witnesses", self.dm.n if self.dm is not None else 0),
            "n_landmarks": net.get("n_landmarks", 0),
            "m": cfg.m,
            "t_ingest": self.timings.get("ingest"),
            "t_net": self.timings.get("net"),
            "t_weights": self.timings.get("weights"),
            "t_witness": self.timings.get("witness"),
            "t_analytics": self.timings.get("analytics"),
            "candidates": self.candidate_count,
            "slivers": self.report.get("topology", {}).get("slivers", 0),
            "no_free_weight": int(status == "NoFreeWeightError"),
            "status": status,
        })
