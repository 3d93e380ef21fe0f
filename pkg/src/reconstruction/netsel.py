"""Landmark selection by farthest-point sampling, plus the per-landmark local
structures the weight assignment needs (nearest-landmark distance L(p) and the
capped neighborhood N(p)).

All queries are linear scans over rows of the distance matrix; ties are broken
by the smallest index everywhere so matrix and point-cloud inputs agree bit for bit.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from configs import settings
from src.core.errors import InputError
from src.geometry.dmatrix import DistanceMatrix
from src.utils.log_utils import get_logger

logger = get_logger("netsel")


@dataclass
class Net:
    landmark_ids: np.ndarray            # indices into W, insertion order; landmark rank = position
    lambda_: float                      # covering radius of L over W
    insertion_radii: np.ndarray         # distance of each inserted point to the previous set (first = inf)
    nearest_dist: np.ndarray | None = None
    n_points: int = 0
    witness_ids: np.ndarray | None = None
    witnesses_include_landmarks: bool = True

    @property
    def size(self) -> int:
        return len(self.landmark_ids)

    def to_json(self) -> dict:
        return {
            "landmarks": self.landmark_ids.tolist(),
            "lambda": self.lambda_,
            "nearest": self.nearest_dist.tolist() if self.nearest_dist is not None else None,
        }

    @classmethod
    def from_landmarks(cls, dm: DistanceMatrix, landmark_ids) -> "Net":
        """Net over a fixed landmark list (no sampling); lambda is the achieved covering radius."""
        ids = np.asarray(landmark_ids, dtype=np.int64)
        if len(ids) == 0:
            raise InputError("netsel", "a net needs at least one landmark")
        to_set = dm.submatrix(ids, np.arange(dm.n)).min(axis=0)
        net = cls(ids, math.sqrt(float(to_set.max())), np.full(len(ids), np.inf), n_points=dm.n,
                  witness_ids=np.arange(dm.n))
        if len(ids) >= 2:
            net.nearest_dist = compute_L_of_p(net, dm)
        return net


@dataclass
class Neighborhood:
    center: int
    members: list = field(default_factory=list)     # landmark ranks, ascending by (distance, rank)
    cap: int = 1


def farthest_point_sample(dm: DistanceMatrix, seed: int = 0, count: int | None = None,
                          radius: float | None = None) -> Net:
    n = dm.n
    if n == 0:
        raise InputError("netsel", "cannot sample landmarks from an empty input")
    if not 0 <= seed < n:
        raise InputError("netsel", f"seed index {seed} outside [0, {n})")
    if count is None and radius is None:
        raise InputError("netsel", "farthest-point sampling needs a landmark count or a radius")
    if count is not None and not 1 <= count <= n:
        raise InputError("netsel", f"landmark count {count} outside [1, {n}]")
    if radius is not None and radius <= 0:
        raise InputError("netsel", f"stop radius must be positive, got {radius}")
    target = count if count is not None else n
    stop_d2 = radius * radius if radius is not None else -1.0

    landmarks = [seed]
    radii = [np.inf]
    mind = dm.row(seed).copy()
    mind[seed] = -1.0
    while len(landmarks) < target:
        nxt = int(np.argmax(mind))      # first maximum = smallest index
        if mind[nxt] <= stop_d2:
            break
        radii.append(math.sqrt(mind[nxt]))
        landmarks.append(nxt)
        np.minimum(mind, dm.row(nxt), out=mind)
        mind[landmarks] = -1.0

    lam = math.sqrt(max(float(mind.max()), 0.0)) if len(landmarks) < n else 0.0
    ids = np.asarray(landmarks, dtype=np.int64)
    net = Net(ids, lam, np.asarray(radii), n_points=n, witness_ids=np.arange(n))
    if len(ids) >= 2:
        net.nearest_dist = compute_L_of_p(net, dm)
    logger.info(f"📍 Farthest-point sampling picked {len(ids)} landmarks of {n}, lambda={lam:.6g}")
    return net


def compute_L_of_p(net: Net, dm: DistanceMatrix) -> np.ndarray:
    if net.size < 2:
        raise InputError("netsel", "L(p) needs at least two landmarks")
    sub = dm.submatrix(net.landmark_ids, net.landmark_ids)
    np.fill_diagonal(sub, np.inf)
    return np.sqrt(sub.min(axis=1))


def neighborhood(net: Net, dm: DistanceMatrix, p: int, cap: int) -> Neighborhood:
    """The cap landmarks nearest to landmark rank p (p itself first), ties by rank."""
    if cap < 1:
        raise InputError("netsel", f"neighborhood cap must be >= 1, got {cap}")
    row = dm.submatrix([net.landmark_ids[p]], net.landmark_ids)[0]
    return neighborhood_from_row(row, p, cap)


def neighborhood_from_row(row: np.ndarray, p: int, cap: int) -> Neighborhood:
    row = np.array(row, dtype=float)
    row[p] = -1.0   # p first even when another landmark coincides with it
    order = np.lexsort((np.arange(len(row)), row))
    return Neighborhood(center=p, members=[int(x) for x in order[:cap]], cap=cap)


def default_cap(m: int, mode: str = "practical", k: int | None = None,
                max_cap: int = settings.MAX_NEIGHBOR_CAP) -> tuple:
    """(cap, saturated). Theoretical mode is the 66^m packing bound."""
    if m < 1:
        raise InputError("netsel", f"intrinsic dimension must be >= 1, got {m}")
    if mode == "theoretical":
        value = settings.THEORETICAL_NEIGHBOR_BASE ** m
        if value > max_cap:
            logger.warning(f"🟡 N1 = 66^{m} saturates at {max_cap}")
            return max_cap, True
        return value, False
    if mode == "practical":
        return (k if k is not None else settings.default_practical_cap(m)), False
    raise InputError("netsel", f"unknown cap mode '{mode}'")


def estimate_eps(dm: DistanceMatrix, net: Net, buckets_per_cell: int = 8) -> float:
    """Landmark-bucketed estimate of the sparsest witness spacing (max nearest-neighbor distance in W).

    Each witness is bucketed by its nearest landmark; its nearest neighbor is searched
    among witnesses in the buckets of the few landmarks closest to its own.
    """
    n = dm.n
    if n < 2:
        return 0.0
    to_landmarks = dm.submatrix(net.landmark_ids, np.arange(n))      # (|L|, n)
    owner = np.argmin(to_landmarks, axis=0)
    members = [np.flatnonzero(owner == r) for r in range(net.size)]
    landmark_d2 = to_landmarks[:, net.landmark_ids]
    worst = 0.0
    for r in range(net.size):
        if len(members[r]) == 0:
            continue
        near = neighborhood_from_row(landmark_d2[r], r, min(buckets_per_cell, net.size)).members
        pool = np.concatenate([members[q] for q in near])
        if len(pool) < 2:
            continue
        block = dm.submatrix(members[r], pool)
        block[members[r][:, None] == pool[None, :]] = np.inf
        nn = block.min(axis=1)
        worst = max(worst, float(nn[np.isfinite(nn)].max()) if np.any(np.isfinite(nn)) else 0.0)
    return math.sqrt(worst)


@dataclass
class SamplingDiagnostics:
    lambda_: float
    eps_hat: float
    eps_below_lambda: bool
    reach: float | None = None
    lambda_over_reach: float | None = None
    neighbor_bound_condition: bool | None = None     # lambda <= rch / 512
    interval_lemma_condition: bool | None = None     # lambda < rch (1 - sin theta0)^2 / 18

    def to_json(self) -> dict:
        return dict(self.__dict__)


def sampling_diagnostics(lam: float, eps_hat: float, reach: float | None = None,
                         theta0: float = math.pi / 32) -> SamplingDiagnostics:
    diag = SamplingDiagnostics(lam, eps_hat, eps_hat <= lam)
    if not diag.eps_below_lambda:
        logger.warning(f"🟡 Witness spacing estimate {eps_hat:.4g} exceeds lambda {lam:.4g}; landmarks may be too dense")
    if reach is not None and math.isfinite(reach) and reach > 0:
        diag.reach = reach
        diag.lambda_over_reach = lam / reach
        diag.neighbor_bound_condition = lam <= reach / 512.0
        diag.interval_lemma_condition = lam < reach * (1.0 - math.sin(theta0)) ** 2 / 18.0
    return diag
