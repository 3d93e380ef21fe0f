"""Weighted circumscribing geometry, computed inside per-simplex embeddings.

Weighted distance of x to p^w is |x - p|^2 - w(p)^2. The weighted center of
a simplex is the point of its affine hull at equal weighted distance from all
vertices; its ortho-radius squared may be negative.
"""
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from configs import settings
from src.core.errors import DegenerateSimplexError, InputError
from src.geometry.dmatrix import DistanceMatrix
from src.geometry.simplexgeo import EmbeddedSimplex, altitude, embed, metrics, opposite_facet


@dataclass
class WeightAssignment:
    w2: np.ndarray      # squared weight per landmark rank

    @classmethod
    def zeros(cls, n: int) -> "WeightAssignment":
        return cls(np.zeros(n))

    def relative_amplitude(self, nearest_dist: np.ndarray) -> float:
        return relative_amplitude(self.w2, nearest_dist)

    def within_amplitude(self, nearest_dist: np.ndarray, bound: float) -> bool:
        return self.relative_amplitude(nearest_dist) <= bound + 1e-12

    def to_json(self) -> dict:
        return {"w2": self.w2.tolist()}


@dataclass
class OrthoCenter:
    center: np.ndarray
    radius2: float


@dataclass
class ForbiddenInterval:
    lo: float
    hi: float
    simplex: tuple
    focus: int

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def to_json(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "simplex": list(self.simplex), "focus": self.focus}


def relative_amplitude(w2: np.ndarray, nearest_dist: np.ndarray) -> float:
    if len(w2) == 0:
        return 0.0
    return float(np.max(np.sqrt(np.asarray(w2)) / np.asarray(nearest_dist)))


def is_ewp(omega_w2: np.ndarray, xi_w2: np.ndarray, delta0: float, lam: float) -> bool:
    """True iff xi raises at most one squared weight of omega, by at most delta0^2 lambda^2."""
    diff = np.asarray(xi_w2) - np.asarray(omega_w2)
    changed = np.flatnonzero(diff != 0)
    if len(changed) > 1:
        return False
    return bool(np.all(diff >= 0) and np.all(diff <= delta0 ** 2 * lam ** 2))


def _check_nondegenerate(edges: np.ndarray, simplex, module: str = "weightedgeo"):
    gram = edges @ edges.T
    r = gram.shape[0]
    if r == 0:
        return
    pts = np.vstack([np.zeros(edges.shape[1]), edges])
    diff = pts[:, None, :] - pts[None, :, :]
    delta2 = float((diff * diff).sum(axis=-1).max())
    if abs(np.linalg.det(gram)) <= settings.DEGENERACY_TOL * (delta2 ** r) or delta2 == 0.0:
        raise DegenerateSimplexError(module, simplex)


def weighted_center(emb: EmbeddedSimplex, w2) -> OrthoCenter:
    """Solves (p_j - p_0)^T C = (|p_j|^2 - w_j^2 - |p_0|^2 + w_0^2) / 2 in the embedding."""
    w2 = np.asarray(w2, dtype=float)
    pts = emb.coords
    if emb.k == 0:
        return OrthoCenter(pts[0].copy(), float(-w2[0]))
    edges = pts[1:] - pts[0]
    _check_nondegenerate(edges, emb.vertices)
    sq = (pts * pts).sum(axis=1)
    rhs = 0.5 * (sq[1:] - w2[1:] - sq[0] + w2[0])
    center = scipy.linalg.solve(edges, rhs)
    diff = center - pts[0]
    return OrthoCenter(center, float(diff @ diff - w2[0]))


def affine_center(points: np.ndarray, w2, simplex=()) -> OrthoCenter:
    """Weighted center of r+1 points restricted to their own affine hull (any ambient dimension)."""
    w2 = np.asarray(w2, dtype=float)
    base = points[0]
    if len(points) == 1:
        return OrthoCenter(base.copy(), float(-w2[0]))
    edges = points[1:] - base
    _check_nondegenerate(edges, simplex)
    gram = edges @ edges.T
    rhs = 0.5 * ((edges * edges).sum(axis=1) - w2[1:] + w2[0])
    t = scipy.linalg.solve(gram, rhs, assume_a="sym")
    center = base + edges.T @ t
    diff = center - base
    return OrthoCenter(center, float(diff @ diff - w2[0]))


def project_to_affine_hull(points: np.ndarray, x: np.ndarray) -> np.ndarray:
    base = points[0]
    if len(points) == 1:
        return base.copy()
    edges = points[1:] - base
    s = scipy.linalg.solve(edges @ edges.T, edges @ (x - base), assume_a="sym")
    return base + edges.T @ s


def _facet_rows(emb: EmbeddedSimplex, p: int) -> list:
    if p not in emb.vertices:
        raise InputError("weightedgeo", f"{p} is not a vertex of {emb.vertices}")
    return [i for i, v in enumerate(emb.vertices) if v != p]


def dist_to_normal_space(emb: EmbeddedSimplex, p: int, w2) -> float:
    """Distance from p to the weighted normal space of the facet opposite p.

    That normal space is the orthogonal complement of aff(facet) through the
    facet's weighted center, so only the in-plane offset of p's projection counts.
    Only facet weights are read.
    """
    rows = _facet_rows(emb, p)
    w2 = np.asarray(w2, dtype=float)
    facet_pts = emb.coords[rows]
    center = affine_center(facet_pts, w2[rows], opposite_facet(emb.vertices, p))
    proj = project_to_affine_hull(facet_pts, emb.coords[emb.row(p)])
    return float(np.linalg.norm(proj - center.center))


def _vertex_weights(simplex: tuple, w2, skip: int | None = None) -> np.ndarray:
    """Per-vertex squared weights; the skipped vertex is NaN so any read of it poisons the result."""
    w2 = np.asarray(w2, dtype=float)
    return np.array([np.nan if v == skip else w2[v] for v in simplex])


def forbidden_F(dm: DistanceMatrix, simplex, p: int, w2) -> float:
    """F = D(p, s)^2 + d(p, N(s_p))^2 - R(s_p)^2; independent of p's own weight."""
    simplex = tuple(simplex)
    emb = embed(dm, simplex)
    vertex_w2 = _vertex_weights(simplex, w2, skip=p)
    rows = _facet_rows(emb, p)
    facet_center = affine_center(emb.coords[rows], vertex_w2[rows], opposite_facet(simplex, p))
    d = dist_to_normal_space(emb, p, vertex_w2)
    D = altitude(dm, simplex, p)
    return D * D + d * d - facet_center.radius2


def eta(gamma0: float, delta0: float, m: int, lam: float, mode: str = "practical",
        eta_star: float = settings.DEFAULT_ETA_STAR) -> float:
    if mode == "theoretical":
        return 2.0 ** 14 * (gamma0 + delta0 ** 2 / gamma0 ** m) * lam ** 2
    if mode == "practical":
        return eta_star * lam ** 2
    raise InputError("weightedgeo", f"unknown eta mode '{mode}'")


def forbidden_interval(dm: DistanceMatrix, simplex, p: int, w2, eta_value: float) -> ForbiddenInterval:
    f = forbidden_F(dm, simplex, p, w2)
    return ForbiddenInterval(f - eta_value / 2.0, f + eta_value / 2.0, tuple(simplex), p)


def signed_excentricity(emb: EmbeddedSimplex, p: int, w2) -> float:
    """Signed distance of the weighted center of s from aff(s_p), positive on p's side."""
    w2 = np.asarray(w2, dtype=float)
    center = weighted_center(emb, w2).center
    rows = _facet_rows(emb, p)
    x_p = emb.coords[emb.row(p)]
    proj = project_to_affine_hull(emb.coords[rows], x_p)
    normal = x_p - proj
    length = float(np.linalg.norm(normal))
    if length == 0.0:
        raise DegenerateSimplexError("weightedgeo", emb.vertices)
    return float((center - proj) @ normal / length)


def pumping_check(dm: DistanceMatrix, simplex, p: int, w2) -> float:
    """Residual |2 D H - (F - w(p)^2)|; the identity holds exactly in real arithmetic."""
    simplex = tuple(simplex)
    emb = embed(dm, simplex)
    vertex_w2 = _vertex_weights(simplex, w2)
    H = signed_excentricity(emb, p, vertex_w2)
    D = altitude(dm, simplex, p)
    F = forbidden_F(dm, simplex, p, w2)
    return abs(2.0 * D * H - (F - float(np.asarray(w2)[p])))


def sliver_altitude_bound(dm: DistanceMatrix, simplex, gamma0: float) -> tuple:
    """(holds, worst ratio) for D(p, s) < 2 Gamma0 Delta^2 / L over all vertices."""
    met = metrics(dm, simplex)
    if met.shortest_edge == 0.0:
        return False, math.inf
    bound = 2.0 * gamma0 * met.diameter ** 2 / met.shortest_edge
    worst = max(met.altitudes.values()) / bound
    return worst < 1.0, worst
