"""Pairwise-distance ingestion: the only geometric input of the pipeline.

Distances are stored squared, packed as the row-major upper triangle
(diagonal included), so asymmetric data cannot exist after loading.
"""
import os
import struct
from dataclasses import dataclass, field

import numpy as np

from configs import settings
from src.core.errors import InputError
from src.utils.log_utils import get_logger

logger = get_logger("dmatrix")


@dataclass(frozen=True)
class PointCloud:
    coords: np.ndarray
    eps_hat: float | None = None    # covering-radius estimate, set by the synthetic samplers

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        if coords.ndim == 1:
            coords = coords.reshape(-1, 1)
        if coords.ndim != 2:
            raise InputError("dmatrix", f"point cloud must be 2-D, got shape {coords.shape}")
        if not np.all(np.isfinite(coords)):
            raise InputError("dmatrix", "point cloud has non-finite coordinates")
        object.__setattr__(self, "coords", coords)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.coords.shape[1]


class DistanceMatrix:
    def __init__(self, n: int, d2: np.ndarray):
        d2 = np.ascontiguousarray(d2, dtype=np.float64)
        if d2.shape != (n * (n + 1) // 2,):
            raise InputError("dmatrix", f"packed array has length {d2.size}, expected {n * (n + 1) // 2}")
        self.n = int(n)
        self.d2 = d2

    def __repr__(self):
        return f"DistanceMatrix(n={self.n})"

    # --- packed indexing ---
    def _index(self, i, j):
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        lo = np.minimum(i, j)
        hi = np.maximum(i, j)
        return lo * self.n - lo * (lo - 1) // 2 + (hi - lo)

    def get(self, i: int, j: int) -> float:
        return float(self.d2[self._index(i, j)])

    def pairs(self, i, j) -> np.ndarray:
        return self.d2[self._index(i, j)]

    def submatrix(self, rows, cols) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        return self.d2[self._index(rows[:, None], cols[None, :])]

    def row(self, i: int) -> np.ndarray:
        return self.submatrix([i], np.arange(self.n))[0]

    def dense(self) -> np.ndarray:
        idx = np.arange(self.n)
        return self.submatrix(idx, idx)

    def restrict(self, ids) -> "DistanceMatrix":
        ids = np.asarray(ids, dtype=np.int64)
        sub = self.submatrix(ids, ids)
        iu = np.triu_indices(len(ids))
        return DistanceMatrix(len(ids), sub[iu])

    @property
    def max_d2(self) -> float:
        return float(self.d2.max()) if self.d2.size else 0.0

    @classmethod
    def from_square_d2(cls, sq: np.ndarray) -> "DistanceMatrix":
        sq = np.asarray(sq, dtype=float)
        iu = np.triu_indices(sq.shape[0])
        return cls(sq.shape[0], sq[iu])


def from_point_cloud(cloud: PointCloud) -> DistanceMatrix:
    """Squared distances summed coordinate by coordinate in ascending order (deterministic)."""
    n, dim = cloud.n, cloud.dim
    if n < 1:
        raise InputError("dmatrix", "empty point cloud")
    coords = cloud.coords
    d2 = np.empty(n * (n + 1) // 2, dtype=np.float64)
    start = 0
    for i in range(n):
        diff = coords[i:] - coords[i]
        acc = np.zeros(n - i)
        for k in range(dim):
            acc += diff[:, k] * diff[:, k]
        d2[start:start + n - i] = acc
        start += n - i
    return DistanceMatrix(n, d2)


def _validate_square(a: np.ndarray, path: str) -> np.ndarray:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError("dmatrix", f"{path}: expected a square table, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError("dmatrix", f"{path}: non-finite entries")
    scale = float(np.abs(a).max()) if a.size else 0.0
    tol = settings.ASYMMETRY_TOL * scale
    if np.any(a < 0):
        i, j = np.argwhere(a < 0)[0]
        raise InputError("dmatrix", f"{path}: negative entry at ({i}, {j})")
    diag = np.abs(np.diag(a))
    if np.any(diag > tol):
        i = int(np.argmax(diag))
        raise InputError("dmatrix", f"{path}: nonzero diagonal entry at ({i}, {i}) = {a[i, i]:.6g}")
    asym = np.abs(a - a.T)
    if np.any(asym > tol):
        i, j = np.unravel_index(int(np.argmax(asym)), asym.shape)
        raise InputError("dmatrix", f"{path}: asymmetric entries ({i}, {j})={a[i, j]:.6g} vs ({j}, {i})={a[j, i]:.6g}")
    return a


def load_distance_matrix(path: str, fmt: str = "csv", strict: bool = False) -> DistanceMatrix:
    if not os.path.exists(path):
        raise InputError("dmatrix", f"input file not found: {path}")
    if fmt == "csv":
        try:
            a = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
        except ValueError as e:
            raise InputError("dmatrix", f"{path}: cannot parse csv ({e})") from e
        a = _validate_square(a, path)
        iu = np.triu_indices(a.shape[0])
        d2 = a[iu] ** 2
        d2[iu[0] == iu[1]] = 0.0
        dm = DistanceMatrix(a.shape[0], d2)
    elif fmt == "binary":
        dm = _load_binary(path)
    else:
        raise InputError("dmatrix", f"unknown distance matrix format '{fmt}'")

    logger.info(f"📥 Loaded {dm.n}x{dm.n} distance matrix from {path}")
    if strict:
        report = validate_triangle(dm, settings.TRIANGLE_SAMPLE_COUNT, settings.TRIANGLE_TOL, strict=True)
        if not report.passed:
            i, j, k, excess = report.violations[0]
            raise InputError("dmatrix", f"{path}: triangle inequality fails on ({i}, {j}, {k}) by {excess:.3e}")
    return dm


def _load_binary(path: str) -> DistanceMatrix:
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < 8 or raw[:4] != settings.BINARY_MAGIC:
        raise InputError("dmatrix", f"{path}: missing {settings.BINARY_MAGIC!r} header")
    (n,) = struct.unpack("<I", raw[4:8])
    count = n * (n + 1) // 2
    if len(raw) != 8 + 8 * count:
        raise InputError("dmatrix", f"{path}: expected {count} entries for n={n}, file has {(len(raw) - 8) / 8:g}")
    d2 = np.frombuffer(raw, dtype="<f8", offset=8, count=count).astype(np.float64)
    if not np.all(np.isfinite(d2)) or np.any(d2 < 0):
        raise InputError("dmatrix", f"{path}: negative or non-finite squared distance")
    dm = DistanceMatrix(n, d2)
    diag = dm.pairs(np.arange(n), np.arange(n))
    if np.any(np.abs(diag) > settings.ASYMMETRY_TOL * dm.max_d2):
        raise InputError("dmatrix", f"{path}: nonzero diagonal")
    return dm


def save_binary(dm: DistanceMatrix, path: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "wb") as f:
        f.write(settings.BINARY_MAGIC)
        f.write(struct.pack("<I", dm.n))
        f.write(dm.d2.astype("<f8").tobytes())
    return path


def save_csv(dm: DistanceMatrix, path: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    np.savetxt(path, np.sqrt(dm.dense()), delimiter=",", fmt="%.17g")
    return path


def load_point_cloud(path: str) -> PointCloud:
    if not os.path.exists(path):
        raise InputError("dmatrix", f"input file not found: {path}")
    try:
        coords = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    except ValueError as e:
        raise InputError("dmatrix", f"{path}: cannot parse point cloud csv ({e})") from e
    cloud = PointCloud(coords)
    logger.info(f"📥 Loaded {cloud.n} points in R^{cloud.dim} from {path}")
    return cloud


def save_point_cloud(cloud: PointCloud, path: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    np.savetxt(path, cloud.coords, delimiter=",", fmt="%.17g")
    return path


@dataclass
class TriangleReport:
    checked: int
    violations: list = field(default_factory=list)  # (i, j, k, excess) with d(i,k) > d(i,j) + d(j,k)
    exhaustive: bool = False

    @property
    def passed(self) -> bool:
        return not self.violations


def validate_triangle(dm: DistanceMatrix, sample_count: int, tol: float, seed: int = 0,
                      strict: bool = False, max_reported: int = 100) -> TriangleReport:
    n = dm.n
    if n < 3:
        return TriangleReport(checked=0, exhaustive=True)
    scale = np.sqrt(dm.max_d2)

    if strict and n <= settings.STRICT_EXHAUSTIVE_MAX_N:
        d = np.sqrt(dm.dense())
        violations = []
        for j in range(n):
            # slack[i, k] = d(i,j) + d(j,k) - d(i,k)
            slack = d[:, j][:, None] + d[j, :][None, :] - d
            bad = np.argwhere(slack < -tol * scale)
            for i, k in bad:
                if i < k and len(violations) < max_reported:
                    violations.append((int(i), j, int(k), float(-slack[i, k])))
        return TriangleReport(checked=n ** 3, violations=violations, exhaustive=True)

    rng = np.random.default_rng(seed)
    triples = rng.integers(0, n, size=(sample_count, 3))
    distinct = (triples[:, 0] != triples[:, 1]) & (triples[:, 1] != triples[:, 2]) & (triples[:, 0] != triples[:, 2])
    triples = np.unique(np.sort(triples[distinct], axis=1), axis=0)
    a, b, c = triples[:, 0], triples[:, 1], triples[:, 2]
    dab = np.sqrt(dm.pairs(a, b))
    dbc = np.sqrt(dm.pairs(b, c))
    dac = np.sqrt(dm.pairs(a, c))
    violations = []
    # each side against the sum of the other two, reported with the long side as (i, k)
    for (x, y, z, long_, s1, s2) in ((a, b, c, dac, dab, dbc), (b, a, c, dbc, dab, dac), (a, c, b, dab, dac, dbc)):
        excess = long_ - (s1 + s2)
        for idx in np.flatnonzero(excess > tol * scale):
            if len(violations) < max_reported:
                violations.append((int(x[idx]), int(y[idx]), int(z[idx]), float(excess[idx])))
    return TriangleReport(checked=len(triples), violations=violations)
