"""Sliver-avoiding weight assignment.

Landmarks are processed in net insertion order. For landmark p the candidate
slivers S(p) are enumerated inside its neighborhood, each contributes a
forbidden interval for w(p)^2 computed under the weights assigned so far, and
p takes the smallest squared weight in [0, alpha~0^2 L(p)^2] outside all of them.

Everything here works on the landmark sub-matrix; simplices are tuples of
landmark ranks.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from configs import settings
from src.core.errors import ConfigError, ForbiddenMeasureError, NoFreeWeightError, OracleDegeneracyError
from src.geometry.dmatrix import DistanceMatrix, PointCloud
from src.geometry.simplexgeo import FaceClassifier, facets, stack_d2
from src.geometry.weightedgeo import (
    ForbiddenInterval,
    WeightAssignment,
    forbidden_interval,
    sliver_altitude_bound,
)
from src.oracle.protect_oracle import brute_delaunay
from src.reconstruction.netsel import Net, neighborhood_from_row
from src.utils.log_utils import get_logger, progress

logger = get_logger("weights")


@dataclass
class CandidateSet:
    focus: int
    simplices: list = field(default_factory=list)

    def __len__(self):
        return len(self.simplices)


@dataclass
class WeightLogEntry:
    landmark: int           # rank
    point: int              # index into W
    w2: float
    cap: float
    candidates: int
    intervals: int
    forbidden_measure: float
    free_fraction: float
    altitude_bound_violations: int = 0


@dataclass
class WeightLog:
    entries: list = field(default_factory=list)
    eta: float = 0.0
    neighbor_cap: int = 0
    neighbor_cap_saturated: bool = False

    @property
    def total_candidates(self) -> int:
        return sum(e.candidates for e in self.entries)

    @property
    def altitude_bound_violations(self) -> int:
        return sum(e.altitude_bound_violations for e in self.entries)

    def to_json(self) -> dict:
        return {
            "eta": self.eta,
            "neighbor_cap": self.neighbor_cap,
            "neighbor_cap_saturated": self.neighbor_cap_saturated,
            "total_candidates": self.total_candidates,
            "altitude_bound_violations": self.altitude_bound_violations,
            "landmarks": [e.__dict__ for e in self.entries],
        }


def landmark_matrix(dm: DistanceMatrix, net: Net) -> DistanceMatrix:
    return dm.restrict(net.landmark_ids)


def candidate_simplices(dm: DistanceMatrix, net: Net, p: int, gamma0: float, m: int, cap: int,
                        classifier: FaceClassifier | None = None) -> CandidateSet:
    """Gamma0-slivers of dimension 2..m+1 containing landmark rank p, inside N(p), with diameter <= 16 lambda.

    Sets are grown one vertex at a time from good p-containing faces; a set
    whose p-facets are not all good, or whose diameter is over the bound,
    is never extended.
    """
    classifier = classifier or FaceClassifier(landmark_matrix(dm, net), gamma0)
    ldm = classifier.dm
    members = neighborhood_from_row(ldm.row(p), p, cap).members
    max_d2 = (settings.CANDIDATE_DIAMETER_FACTOR * net.lambda_) ** 2
    others = sorted(v for v in members if v != p)

    level = [tuple(sorted((p, v))) for v in others if ldm.get(p, v) <= max_d2]
    found = []
    for size in range(3, m + 3):
        grown = sorted({tuple(sorted(s + (v,))) for s in level for v in others if v not in s})
        if not grown:
            break
        level_set = set(level)
        grown = [s for s in grown if all(f in level_set for f in facets(s) if p in f)]
        if grown:
            diam_ok = stack_d2(ldm, grown).max(axis=(-2, -1)) <= max_d2
            grown = [s for s, ok in zip(grown, diam_ok) if ok]
        slivers = classifier.sliver_many(grown)
        found.extend(s for s, bad in zip(grown, slivers) if bad)
        good = classifier.good_many(grown)
        level = [s for s, ok in zip(grown, good) if ok]
    found.sort(key=lambda s: (len(s), s))
    return CandidateSet(p, found)


def smallest_free_value(intervals: list, cap: float, step: float) -> float | None:
    """Smallest x in [0, cap] strictly outside every closed interval, or None."""
    x = 0.0
    for iv in sorted(intervals, key=lambda iv: (iv.lo, iv.hi)):
        if iv.lo > x:
            break
        if iv.hi >= x:
            x = iv.hi + step
    return x if x <= cap else None


def union_measure(intervals: list, lo: float = -math.inf, hi: float = math.inf) -> float:
    total = 0.0
    cur_lo = cur_hi = None
    for iv in sorted(intervals, key=lambda iv: (iv.lo, iv.hi)):
        a, b = max(iv.lo, lo), min(iv.hi, hi)
        if a >= b:
            continue
        if cur_hi is None or a > cur_hi:
            if cur_hi is not None:
                total += cur_hi - cur_lo
            cur_lo, cur_hi = a, b
        else:
            cur_hi = max(cur_hi, b)
    if cur_hi is not None:
        total += cur_hi - cur_lo
    return total


def all_candidate_sets(dm: DistanceMatrix, net: Net, gamma0: float, m: int, cap: int,
                       classifier: FaceClassifier | None = None, threads: int = 1) -> list:
    """S(p) for every landmark, in rank order; weight-independent, so computed up front."""
    classifier = classifier or FaceClassifier(landmark_matrix(dm, net), gamma0)
    ranks = range(net.size)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            return list(executor.map(lambda p: candidate_simplices(dm, net, p, gamma0, m, cap, classifier), ranks))
    return [candidate_simplices(dm, net, p, gamma0, m, cap, classifier)
            for p in progress(ranks, "candidates", total=net.size)]


def assign_weights(dm: DistanceMatrix, net: Net, gamma0: float, delta0: float, alpha0_tilde: float, m: int,
                   eta_value: float, cap: int, threads: int = 1, classifier: FaceClassifier | None = None,
                   candidate_sets: list | None = None, mode: str = "practical") -> tuple:
    alpha0 = math.sqrt(alpha0_tilde ** 2 + delta0 ** 2)
    if not alpha0 < 0.5:
        raise ConfigError(f"alpha0 = sqrt(alpha~0^2 + delta0^2) = {alpha0:.6g} must be < 1/2")
    if not 0.0 <= delta0 < alpha0:
        raise ConfigError(f"delta0 must lie in [0, alpha0), got {delta0}")

    weights = WeightAssignment.zeros(net.size)
    log = WeightLog(eta=eta_value, neighbor_cap=cap)
    if net.size < 2:
        logger.info("🟡 Fewer than two landmarks; all weights stay 0")
        return weights, log

    ldm = classifier.dm if classifier is not None else landmark_matrix(dm, net)
    classifier = classifier or FaceClassifier(ldm, gamma0)
    if candidate_sets is None:
        candidate_sets = all_candidate_sets(dm, net, gamma0, m, cap, classifier, threads)

    executor = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for p in progress(range(net.size), "weights", total=net.size):
            cands = candidate_sets[p].simplices
            w2 = weights.w2

            def interval(s, w2=w2, p=p):
                return forbidden_interval(ldm, s, p, w2, eta_value)

            intervals = list(executor.map(interval, cands)) if executor else [interval(s) for s in cands]
            measure = union_measure(intervals)
            bound = len(intervals) * eta_value
            if measure > bound * (1 + 1e-9):
                raise ForbiddenMeasureError(p, measure, bound)

            w_cap = alpha0_tilde ** 2 * float(net.nearest_dist[p]) ** 2
            x = smallest_free_value(intervals, w_cap, settings.WEIGHT_STEP_FACTOR * w_cap)
            if x is None:
                covering = [iv for iv in intervals if iv.hi >= 0.0 and iv.lo <= w_cap]
                raise NoFreeWeightError(p, w_cap, covering)

            if mode == "theoretical" and measure >= alpha0_tilde ** 2 * net.lambda_ ** 2:
                logger.warning(f"🟡 Landmark {p}: forbidden measure {measure:.3e} reaches alpha~0^2 lambda^2")
            clipped = union_measure(intervals, 0.0, w_cap)
            violations = sum(1 for s in cands if not sliver_altitude_bound(ldm, s, gamma0)[0])

            weights.w2[p] = x
            log.entries.append(WeightLogEntry(
                landmark=p,
                point=int(net.landmark_ids[p]),
                w2=x,
                cap=w_cap,
                candidates=len(cands),
                intervals=len(intervals),
                forbidden_measure=measure,
                free_fraction=1.0 - clipped / w_cap if w_cap > 0 else 0.0,
                altitude_bound_violations=violations,
            ))
    finally:
        if executor:
            executor.shutdown()

    if log.altitude_bound_violations:
        logger.warning(f"🟡 {log.altitude_bound_violations} candidate slivers exceed the altitude bound")
    logger.info(f"✅ Weights assigned: {log.total_candidates} candidate slivers, "
                f"relative amplitude {weights.relative_amplitude(net.nearest_dist):.4f}")
    return weights, log


@dataclass
class FeasibilityReport:
    passed: bool
    lhs: float
    rhs: float
    slack: float            # (rhs - lhs) / rhs, positive when the inequality holds
    n_simplices: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


def feasibility_check(gamma0: float, delta0: float, alpha0_tilde: float, m: int, n1: int) -> FeasibilityReport:
    """Gamma0 + delta0^2 / Gamma0^m < alpha~0^2 / (2^14 N) with N = sum_{j=2}^{m+1} N1^j."""
    try:
        n_total = float(sum(int(n1) ** j for j in range(2, m + 2)))
    except OverflowError:
        n_total = math.inf
    lhs = gamma0 + delta0 ** 2 / gamma0 ** m
    rhs = alpha0_tilde ** 2 / (2.0 ** 14 * n_total)
    slack = (rhs - lhs) / rhs if rhs > 0 else -math.inf
    return FeasibilityReport(bool(lhs < rhs), lhs, rhs, slack, n_total)


@dataclass
class StabilityFinding:
    landmark: int
    xi2: float
    simplex: tuple
    interval: tuple | None = None   # None for oracle findings

    def to_json(self) -> dict:
        return {"landmark": self.landmark, "xi2": self.xi2, "simplex": list(self.simplex),
                "interval": list(self.interval) if self.interval else None}


@dataclass
class StabilityReport:
    landmarks_checked: int
    grid_size: int
    mode: str
    findings: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.findings

    def to_json(self) -> dict:
        return {
            "landmarks_checked": self.landmarks_checked,
            "grid_size": self.grid_size,
            "mode": self.mode,
            "passed": self.passed,
            "findings": [f.to_json() for f in self.findings],
            "skipped": self.skipped,
        }


def _audit_ranks(size: int, sample: int) -> list:
    if sample <= 0 or size == 0:
        return []
    if sample >= size:
        return list(range(size))
    return sorted({int(r) for r in np.linspace(0, size - 1, sample).round()})


def stability_audit(dm: DistanceMatrix, net: Net, w2, gamma0: float, delta0: float, m: int, sample: int,
                    grid_size: int = 5, eta_value: float | None = None, cap: int | None = None,
                    cloud: PointCloud | None = None, classifier: FaceClassifier | None = None) -> StabilityReport:
    """Tries elementary perturbations xi of w at sampled landmarks for slivers.

    With a point cloud of ambient dimension <= 3 the true weighted Delaunay
    complex of the landmarks is rebuilt for each xi; otherwise a sliver is
    reported when its forbidden interval contains xi(p)^2, evaluated under the
    weights that were in force when p was assigned (later ranks at 0).
    """
    w2 = np.asarray(w2, dtype=float)
    use_oracle = (cloud is not None and cloud.dim <= settings.ORACLE_MAX_DIM
                  and net.size <= settings.ORACLE_MAX_POINTS)
    report = StabilityReport(0, max(grid_size, 0), "oracle" if use_oracle else "interval")
    if grid_size <= 0 or net.size < 2:
        return report

    classifier = classifier or FaceClassifier(landmark_matrix(dm, net), gamma0)
    ldm = classifier.dm
    cap = cap or settings.default_practical_cap(m)
    eta_value = eta_value if eta_value is not None else settings.DEFAULT_ETA_STAR * net.lambda_ ** 2
    top = delta0 ** 2 * net.lambda_ ** 2
    if use_oracle:
        landmark_cloud = PointCloud(cloud.coords[net.landmark_ids])

    for p in _audit_ranks(net.size, sample):
        report.landmarks_checked += 1
        cands = candidate_simplices(dm, net, p, gamma0, m, cap, classifier)
        for xi_p in np.linspace(w2[p], w2[p] + top, grid_size):
            xi = w2.copy()
            xi[p] = xi_p
            if use_oracle:
                try:
                    delaunay = brute_delaunay(landmark_cloud, xi)
                except OracleDegeneracyError as e:
                    report.skipped.append({"landmark": p, "xi2": float(xi_p), "reason": str(e)})
                    continue
                suspects = [s for dim in range(2, min(m + 1, delaunay.max_dim) + 1)
                            for s in delaunay.simplices(dim) if p in s]
                for s, bad in zip(suspects, classifier.sliver_many(suspects)):
                    if bad:
                        report.findings.append(StabilityFinding(p, float(xi_p), s))
                continue
            # intervals for p were fixed while every later rank still had weight 0
            in_force = np.where(np.arange(net.size) < p, xi, 0.0)
            for s in cands.simplices:
                iv: ForbiddenInterval = forbidden_interval(ldm, s, p, in_force, eta_value)
                if iv.contains(xi_p):
                    report.findings.append(StabilityFinding(p, float(xi_p), s, (iv.lo, iv.hi)))
    if report.findings:
        logger.warning(f"🟡 Stability audit: {len(report.findings)} sliver findings over {report.landmarks_checked} landmarks")
    return report
