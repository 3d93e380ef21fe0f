"""Distance-only simplex geometry.

Every quantity here is computed from the squared-distance submatrix of a
simplex: Gram matrices, volumes, altitudes, thickness, Gamma0 classes and
distance-preserving embeddings. The batched kernels operate on stacks of
shape (B, k+1, k+1); the scalar API is a batch of one.
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations

import numpy as np

from configs import settings
from src.core.errors import InputError, NonEuclideanError
from src.geometry.dmatrix import DistanceMatrix


class SimplexClass(str, Enum):
    GOOD = "good"
    BAD = "bad"
    SLIVER = "sliver"


def as_simplex(vertices) -> tuple:
    simplex = tuple(sorted(int(v) for v in vertices))
    if not simplex or len(set(simplex)) != len(simplex):
        raise InputError("simplexgeo", f"a simplex needs distinct vertices, got {tuple(vertices)}")
    return simplex


def faces(simplex: tuple, dim: int) -> list:
    return list(combinations(simplex, dim + 1))


def facets(simplex: tuple) -> list:
    return faces(simplex, len(simplex) - 2) if len(simplex) > 1 else []


def opposite_facet(simplex: tuple, p: int) -> tuple:
    return tuple(v for v in simplex if v != p)


@dataclass
class SimplexMetrics:
    volume: float
    diameter: float
    shortest_edge: float
    altitudes: dict = field(default_factory=dict)
    thickness: float = 1.0
    degenerate: bool = False


@dataclass
class EmbeddedSimplex:
    vertices: tuple
    coords: np.ndarray      # (k+1, k), row 0 at the origin

    @property
    def k(self) -> int:
        return len(self.vertices) - 1

    def row(self, vertex: int) -> int:
        return self.vertices.index(vertex)


# --- batched kernels -------------------------------------------------------

def gram_from_d2(d2: np.ndarray) -> np.ndarray:
    d0 = d2[..., 1:, 0]
    return 0.5 * (d0[..., :, None] + d0[..., None, :] - d2[..., 1:, 1:])


def batch_volume(d2: np.ndarray) -> np.ndarray:
    k = d2.shape[-1] - 1
    if k == 0:
        return np.ones(d2.shape[:-2])
    det = np.linalg.det(gram_from_d2(d2))
    delta2 = d2.max(axis=(-2, -1))
    degenerate = np.abs(det) <= settings.DEGENERACY_TOL * delta2 ** k
    return np.where(degenerate, 0.0, np.sqrt(np.abs(det)) / math.factorial(k))


def batch_altitudes(d2: np.ndarray, vol: np.ndarray | None = None) -> np.ndarray:
    """Altitude of every vertex, shape (..., k+1); 0 where the opposite facet is degenerate."""
    n = d2.shape[-1]
    k = n - 1
    if vol is None:
        vol = batch_volume(d2)
    alts = np.zeros(d2.shape[:-2] + (n,))
    for i in range(n):
        keep = [j for j in range(n) if j != i]
        facet_vol = batch_volume(d2[..., keep, :][..., :, keep])
        with np.errstate(divide="ignore", invalid="ignore"):
            alts[..., i] = np.where(facet_vol > 0, k * vol / np.where(facet_vol > 0, facet_vol, 1.0), 0.0)
    return alts


def batch_thickness(d2: np.ndarray) -> np.ndarray:
    n = d2.shape[-1]
    k = n - 1
    if k <= 1:
        return np.ones(d2.shape[:-2])
    vol = batch_volume(d2)
    alts = batch_altitudes(d2, vol)
    delta = np.sqrt(d2.max(axis=(-2, -1)))
    with np.errstate(divide="ignore", invalid="ignore"):
        thick = alts.min(axis=-1) / (k * np.where(delta > 0, delta, 1.0))
    return np.where((vol > 0) & (delta > 0), np.minimum(thick, 1.0), 0.0)


def stack_d2(dm: DistanceMatrix, simplices) -> np.ndarray:
    idx = np.asarray(simplices, dtype=np.int64)
    return dm.pairs(idx[:, :, None], idx[:, None, :])


# --- scalar API --------------------------------------------------------------

def local_d2(dm: DistanceMatrix, simplex) -> np.ndarray:
    return dm.submatrix(simplex, simplex)


def gram_matrix(dm: DistanceMatrix, simplex) -> np.ndarray:
    return gram_from_d2(local_d2(dm, simplex))


def simplex_volume(dm: DistanceMatrix, simplex) -> float:
    return float(batch_volume(local_d2(dm, simplex)))


def diameter(dm: DistanceMatrix, simplex) -> float:
    return math.sqrt(float(local_d2(dm, simplex).max()))


def shortest_edge(dm: DistanceMatrix, simplex) -> float:
    if len(simplex) < 2:
        return 0.0
    d2 = local_d2(dm, simplex)
    return math.sqrt(float(d2[np.triu_indices(len(simplex), 1)].min()))


def altitude(dm: DistanceMatrix, simplex, p: int) -> float:
    simplex = tuple(simplex)
    if len(simplex) < 2 or p not in simplex:
        raise InputError("simplexgeo", f"altitude needs a vertex of a simplex of dimension >= 1, got {p} in {simplex}")
    return float(batch_altitudes(local_d2(dm, simplex))[simplex.index(p)])


def thickness(dm: DistanceMatrix, simplex) -> float:
    if len(simplex) <= 1:
        return 1.0
    return float(batch_thickness(local_d2(dm, simplex)))


def metrics(dm: DistanceMatrix, simplex) -> SimplexMetrics:
    simplex = tuple(simplex)
    d2 = local_d2(dm, simplex)
    vol = float(batch_volume(d2))
    alts = batch_altitudes(d2) if len(simplex) > 1 else np.zeros(1)
    return SimplexMetrics(
        volume=vol,
        diameter=math.sqrt(float(d2.max())),
        shortest_edge=shortest_edge(dm, simplex),
        altitudes={v: float(a) for v, a in zip(simplex, alts)},
        thickness=float(batch_thickness(d2)) if len(simplex) > 1 else 1.0,
        degenerate=vol == 0.0,
    )


class FaceClassifier:
    """Memoized Gamma0-goodness over one distance matrix.

    good(s) holds iff s is thick enough for its dimension and all its facets
    are good; facets are classified first, dimension by dimension. Inserts are
    idempotent, so one instance can be shared by worker threads.
    """

    def __init__(self, dm: DistanceMatrix, gamma0: float):
        if not 0.0 < gamma0 < 1.0:
            raise InputError("simplexgeo", f"Gamma0 must lie in (0, 1), got {gamma0}")
        self.dm = dm
        self.gamma0 = gamma0
        self._good: dict = {}

    def thickness_many(self, simplices: list) -> np.ndarray:
        if not simplices:
            return np.zeros(0)
        return batch_thickness(stack_d2(self.dm, simplices))

    def good_many(self, simplices: list) -> list:
        pending = sorted({s for s in simplices if len(s) > 2 and s not in self._good}, key=len)
        if pending:
            needed = {f for s in pending for f in facets(s) if len(f) > 2}
            self.good_many(list(needed))
            by_dim: dict = {}
            for s in pending:
                by_dim.setdefault(len(s) - 1, []).append(s)
            for dim, group in sorted(by_dim.items()):
                face_ok = [all(self._good.get(f, True) for f in facets(s)) for s in group]
                thick_needed = [s for s, ok in zip(group, face_ok) if ok]
                thick = dict(zip(thick_needed, self.thickness_many(thick_needed)))
                threshold = self.gamma0 ** dim
                for s, ok in zip(group, face_ok):
                    self._good[s] = bool(ok and thick[s] >= threshold)
        return [self._good.get(s, True) for s in simplices]

    def sliver_many(self, simplices: list) -> list:
        self.good_many(simplices)
        return [len(s) > 2 and not self._good[s] and all(self._good.get(f, True) for f in facets(s))
                for s in simplices]

    def classify(self, simplex) -> SimplexClass:
        simplex = as_simplex(simplex)
        if self.sliver_many([simplex])[0]:
            return SimplexClass.SLIVER
        return SimplexClass.GOOD if self._good.get(simplex, True) else SimplexClass.BAD


def classify(dm: DistanceMatrix, simplex, gamma0: float, classifier: FaceClassifier | None = None) -> SimplexClass:
    return (classifier or FaceClassifier(dm, gamma0)).classify(simplex)


# --- embeddings ---------------------------------------------------------------

def _pivoted_cholesky(gram: np.ndarray, rank_tol: float, neg_tol: float, simplex) -> np.ndarray:
    k = gram.shape[0]
    s = np.array(gram, dtype=float)
    factor = np.zeros((k, k))
    perm = np.arange(k)
    rank = 0
    for col in range(k):
        diag = np.diag(s)[col:]
        j = col + int(np.argmax(diag))
        if diag[j - col] <= rank_tol:
            break
        if j != col:
            s[[col, j]] = s[[j, col]]
            s[:, [col, j]] = s[:, [j, col]]
            factor[[col, j]] = factor[[j, col]]
            perm[[col, j]] = perm[[j, col]]
        pivot = math.sqrt(s[col, col])
        factor[col, col] = pivot
        factor[col + 1:, col] = s[col + 1:, col] / pivot
        s[col + 1:, col + 1:] -= np.outer(factor[col + 1:, col], factor[col + 1:, col])
        rank += 1
    residual = s[rank:, rank:]
    if residual.size:
        worst = min(float(np.diag(residual).min()), -float(np.abs(residual).max()))
        if worst < -neg_tol:
            raise NonEuclideanError(simplex, worst)
    coords = np.zeros((k, k))
    coords[perm] = factor
    return coords


def embed(dm: DistanceMatrix, simplex) -> EmbeddedSimplex:
    simplex = tuple(simplex)
    d2 = local_d2(dm, simplex)
    k = len(simplex) - 1
    if k == 0:
        return EmbeddedSimplex(simplex, np.zeros((1, 0)))
    delta2 = float(d2.max())
    factor = _pivoted_cholesky(
        gram_from_d2(d2),
        rank_tol=settings.DEGENERACY_TOL * delta2,
        neg_tol=settings.EMBEDDING_TOL * delta2,
        simplex=simplex,
    )
    return EmbeddedSimplex(simplex, np.vstack([np.zeros((1, k)), factor]))


def embedded_d2(emb: EmbeddedSimplex) -> np.ndarray:
    diff = emb.coords[:, None, :] - emb.coords[None, :, :]
    return (diff * diff).sum(axis=-1)


def edge_singular_values(emb: EmbeddedSimplex) -> np.ndarray:
    """Singular values, descending, of the k x k matrix with columns p_i - p_0."""
    edges = (emb.coords[1:] - emb.coords[0]).T
    return np.linalg.svd(edges, compute_uv=False)
