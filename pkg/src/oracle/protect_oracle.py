"""Exhaustive weighted Delaunay and power-protection measurements for small
point sets in ambient dimension <= 3.

For a simplex s with base vertex p0, the gap of q at c is
    g_q(c) = |c - q|^2 - w(q)^2 - |c - p0|^2 + w(p0)^2,
which is affine in c. The weighted Voronoi face of s is the part of the
equidistance flat {g_p = 0, p in s} where every other gap is positive, so
"is the face non-empty" and "how well protected is s" are both the
max-min of affine functions over that flat. That LP is solved exactly by
enumerating its vertices inside a large box.
"""
import math
from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np
import scipy.linalg

from configs import settings
from src.core.errors import EmptyVoronoiFaceError, InputError, OracleDegeneracyError
from src.geometry.dmatrix import PointCloud, from_point_cloud
from src.reconstruction.netsel import Net
from src.reconstruction.witness import build_witness_complex
from src.topology.scomplex import SimplicialComplex
from src.utils.log_utils import get_logger, progress

logger = get_logger("protect_oracle")

_CHUNK = 20000


@dataclass
class ProtectionRecord:
    simplex: tuple
    center: np.ndarray
    protection: float
    protected: bool

    def to_json(self) -> dict:
        return {"simplex": list(self.simplex), "center": self.center.tolist(),
                "protection": self.protection, "protected": self.protected}


class _Scene:
    """Points, squared weights and the scale-dependent tolerances of one oracle run."""

    def __init__(self, cloud: PointCloud, w2):
        if cloud.dim > settings.ORACLE_MAX_DIM:
            raise InputError("protect_oracle", f"ambient dimension {cloud.dim} > {settings.ORACLE_MAX_DIM}")
        if cloud.n > settings.ORACLE_MAX_POINTS:
            raise InputError("protect_oracle", f"{cloud.n} points exceed the exhaustive limit {settings.ORACLE_MAX_POINTS}")
        self.pts = cloud.coords
        self.w2 = np.zeros(cloud.n) if w2 is None else np.asarray(w2, dtype=float)
        if self.w2.shape != (cloud.n,):
            raise InputError("protect_oracle", f"expected {cloud.n} squared weights, got shape {self.w2.shape}")
        diff = self.pts[:, None, :] - self.pts[None, :, :]
        diam2 = float((diff * diff).sum(axis=-1).max()) if cloud.n > 1 else 0.0
        self.diam2 = diam2 if diam2 > 0 else 1.0
        self.tie_tol = settings.ORACLE_TIE_TOL * self.diam2
        self.box = settings.ORACLE_BOX_FACTOR * math.sqrt(self.diam2)

    @property
    def n(self) -> int:
        return len(self.pts)

    @property
    def dim(self) -> int:
        return self.pts.shape[1]

    def flat(self, simplex: tuple):
        """(c0, basis) of the equidistance flat of s, or None when s is affinely dependent."""
        p0 = self.pts[simplex[0]]
        rest = self.pts[list(simplex[1:])]
        if len(rest) == 0:
            return p0.copy(), np.eye(self.dim)
        a = 2.0 * (rest - p0)
        b = (rest * rest).sum(axis=1) - p0 @ p0 - self.w2[list(simplex[1:])] + self.w2[simplex[0]]
        if len(rest) > self.dim or np.linalg.matrix_rank(a, tol=1e-12 * math.sqrt(self.diam2)) < len(rest):
            return None
        c0 = np.linalg.lstsq(a, b, rcond=None)[0]
        return c0, scipy.linalg.null_space(a)

    def gap_pieces(self, simplex: tuple, c0: np.ndarray, basis: np.ndarray):
        """Affine gaps g_q(c0 + basis t) = a_q . t + b_q for every q outside s."""
        others = np.array([q for q in range(self.n) if q not in simplex], dtype=np.int64)
        p0 = self.pts[simplex[0]]
        q = self.pts[others]
        a = -2.0 * (q - p0) @ basis
        at_c0 = ((c0 - q) ** 2).sum(axis=1) - self.w2[others] - (c0 - p0) @ (c0 - p0) + self.w2[simplex[0]]
        return a, at_c0

    def best_gap(self, simplex: tuple):
        """(max over the flat of the min gap, maximizer) or None for dependent simplices."""
        found = self.flat(simplex)
        if found is None:
            return None
        c0, basis = found
        a, b = self.gap_pieces(simplex, c0, basis)
        gap, t = _max_min_affine(a, b, self.box)
        return gap, c0 + basis @ t


def _max_min_affine(a: np.ndarray, b: np.ndarray, box: float):
    """max over |t_i| <= box of min_q (a_q . t + b_q), by LP vertex enumeration."""
    m, r = a.shape
    if m == 0:
        return math.inf, np.zeros(r)
    if r == 0:
        return float(b.min()), np.zeros(0)

    best, best_t = -math.inf, np.zeros(r)
    scale = max(float(np.abs(a).max()), 1.0)
    for k in range(1, r + 2):
        n_box = r + 1 - k
        faces = [(coords, signs) for coords in combinations(range(r), n_box)
                 for signs in product((-1.0, 1.0), repeat=n_box)]
        piece_sets = np.array(list(combinations(range(m), k)), dtype=np.int64).reshape(-1, k)
        for start in range(0, len(piece_sets), _CHUNK):
            ps = piece_sets[start:start + _CHUNK]
            size = len(ps)
            for coords, signs in faces:
                mat = np.zeros((size, r + 1, r + 1))
                rhs = np.zeros((size, r + 1))
                mat[:, :k, :r] = a[ps]
                mat[:, :k, r] = -1.0
                rhs[:, :k] = -b[ps]
                for row, (i, sign) in enumerate(zip(coords, signs), start=k):
                    mat[:, row, i] = 1.0
                    rhs[:, row] = sign * box
                ok = np.abs(np.linalg.det(mat)) > 1e-12 * scale ** k
                if not np.any(ok):
                    continue
                sol = np.linalg.solve(mat[ok], rhs[ok][..., None])[..., 0]
                t = sol[:, :r]
                inside = np.all(np.abs(t) <= box * (1 + 1e-9), axis=1)
                if not np.any(inside):
                    continue
                t = t[inside]
                values = (t @ a.T + b[None, :]).min(axis=1)
                i = int(np.argmax(values))
                if values[i] > best:
                    best, best_t = float(values[i]), t[i]
    return best, best_t


def _next_level(level: list, n: int) -> list:
    present = set(level)
    grown = []
    for s in level:
        for v in range(s[-1] + 1, n):
            t = s + (v,)
            if all(f in present for f in combinations(t, len(s))):
                grown.append(t)
    return grown


def brute_delaunay(cloud: PointCloud, w2=None) -> SimplicialComplex:
    """Weighted Delaunay complex by testing every candidate simplex's Voronoi face, bottom-up."""
    scene = _Scene(cloud, w2)
    kept = []
    level = [(i,) for i in range(scene.n)]
    for dim in range(scene.dim + 1):
        if dim > 0:
            level = _next_level(level, scene.n)
        accepted = []
        for s in level:
            result = scene.best_gap(s)
            if result is None:
                continue
            gap, _ = result
            if abs(gap) <= scene.tie_tol:
                raise OracleDegeneracyError(s, gap)
            if gap > 0:
                accepted.append(s)
        kept.extend(accepted)
        level = accepted
        if not level:
            break
    return SimplicialComplex(kept, {"ambient_dim": scene.dim})


def measure_protection(cloud: PointCloud, w2, complex_: SimplicialComplex, simplex,
                       delta2: float = 0.0) -> ProtectionRecord:
    simplex = tuple(sorted(int(v) for v in simplex))
    if simplex not in complex_:
        raise InputError("protect_oracle", f"{simplex} is not in the complex")
    scene = _Scene(cloud, w2)
    result = scene.best_gap(simplex)
    if result is None:
        raise EmptyVoronoiFaceError(simplex, -math.inf)
    gap, center = result
    if gap < -scene.tie_tol:
        raise EmptyVoronoiFaceError(simplex, gap)
    return ProtectionRecord(simplex, center, gap, bool(gap > delta2))


def sphere_directions(dim: int, count: int = settings.ORACLE_BOUNDEDNESS_DIRECTIONS) -> np.ndarray:
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        theta = 2 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(theta), np.sin(theta)])
    i = np.arange(count) + 0.5
    z = 1 - 2 * i / count
    phi = np.pi * (1 + 5 ** 0.5) * i
    rho = np.sqrt(1 - z * z)
    return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])


def cell_is_bounded(cloud: PointCloud, p: int) -> bool:
    """Sampled test: the cell of p escapes along u iff u . (q - p) < 0 for every other q."""
    others = np.delete(cloud.coords, p, axis=0) - cloud.coords[p]
    if len(others) == 0:
        return False
    dirs = sphere_directions(cloud.dim)
    escapes = np.all(dirs @ others.T < 0, axis=1)
    return not bool(np.any(escapes))


@dataclass
class DecayReport:
    landmark: int
    bounded: bool
    hypothesis_holds: bool = False
    delta2: float | None = None
    top_protections: list = field(default_factory=list)      # (simplex, protection)
    face_checks: list = field(default_factory=list)          # (simplex, j, protection, bound, ok)
    notice: str | None = None

    @property
    def violations(self) -> int:
        return sum(1 for check in self.face_checks if not check[4])

    def to_json(self) -> dict:
        return {
            "landmark": self.landmark,
            "bounded": self.bounded,
            "hypothesis_holds": self.hypothesis_holds,
            "delta2": self.delta2,
            "top_protections": [[list(s), v] for s, v in self.top_protections],
            "face_checks": [[list(s), j, v, bound, ok] for s, j, v, bound, ok in self.face_checks],
            "violations": self.violations,
            "notice": self.notice,
        }


def verify_decay_lemma(cloud: PointCloud, w2, p: int, delta2: float | None = None,
                       complex_: SimplicialComplex | None = None, tol: float = 1e-9) -> DecayReport:
    """Checks that faces incident to p keep protection delta2 / (d - j + 1) when its top simplices have delta2."""
    d = cloud.dim
    if not cell_is_bounded(cloud, p):
        logger.info(f"🟡 Cell of point {p} is unbounded; decay check skipped")
        return DecayReport(p, bounded=False, notice="unbounded cell")
    complex_ = complex_ or brute_delaunay(cloud, w2)
    report = DecayReport(p, bounded=True)

    tops = [s for s in complex_.simplices(d) if p in s]
    report.top_protections = [(s, measure_protection(cloud, w2, complex_, s).protection) for s in tops]
    if not tops:
        report.notice = f"no {d}-simplices incident to {p}"
        return report
    measured_min = min(v for _, v in report.top_protections)
    report.delta2 = measured_min if delta2 is None else delta2
    report.hypothesis_holds = report.delta2 > 0 and measured_min >= report.delta2
    if not report.hypothesis_holds:
        report.notice = f"top simplices at {p} are not {report.delta2:.3e}-protected (min {measured_min:.3e})"
        return report

    for j in range(d):
        bound = report.delta2 / (d - j + 1)
        for s in complex_.simplices(j):
            if p not in s:
                continue
            value = measure_protection(cloud, w2, complex_, s).protection
            report.face_checks.append((s, j, value, bound, bool(value >= bound - tol)))
    return report


@dataclass
class InclusionReport:
    witnesses: int
    landmarks: int
    witness_simplices: int
    delaunay_simplices: int
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "witnesses": self.witnesses,
            "landmarks": self.landmarks,
            "witness_simplices": self.witness_simplices,
            "delaunay_simplices": self.delaunay_simplices,
            "passed": self.passed,
            "violations": [list(s) for s in self.violations],
        }


def verify_witness_inclusion(cloud: PointCloud, landmark_ids, w2=None, net: Net | None = None,
                             witness_complex: SimplicialComplex | None = None) -> InclusionReport:
    """Wit_w(L, W) built from the cloud's distance matrix against the brute-force Del_w(L)."""
    landmark_ids = np.asarray(landmark_ids, dtype=np.int64)
    w2 = np.zeros(len(landmark_ids)) if w2 is None else np.asarray(w2, dtype=float)
    delaunay = brute_delaunay(PointCloud(cloud.coords[landmark_ids]), w2)
    if witness_complex is None:
        dm = from_point_cloud(cloud)
        net = net or Net.from_landmarks(dm, landmark_ids)
        witness_complex = build_witness_complex(dm, net, w2, m=cloud.dim, depth=cloud.dim + 1)
    violations = [s for s in witness_complex.all_simplices() if s not in delaunay]
    if violations:
        logger.warning(f"🔴 {len(violations)} witnessed simplices are not weighted Delaunay, e.g. {violations[0]}")
    return InclusionReport(cloud.n, len(landmark_ids), len(witness_complex), len(delaunay), violations)


def protection_sweep(cloud: PointCloud, w2, complex_: SimplicialComplex, dims=None) -> list:
    """Protection of every simplex of the given dimensions, for reports."""
    dims = range(complex_.max_dim + 1) if dims is None else dims
    targets = [s for d in dims for s in complex_.simplices(d)]
    return [measure_protection(cloud, w2, complex_, s) for s in progress(targets, "protection", total=len(targets))]
