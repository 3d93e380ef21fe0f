"""Abstract simplicial complexes and the analytics run on reconstructed output:
Euler characteristic, mod-2 Betti numbers, closed-manifold checks, OFF export
and rendering.
"""
import os
from dataclasses import dataclass, field
from itertools import combinations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.collections import LineCollection, PolyCollection  # noqa: E402
from mpl_toolkits.mplot3d.art3d import Line3DCollection, Poly3DCollection  # noqa: E402
from scipy.cluster.hierarchy import DisjointSet  # noqa: E402

from src.core.errors import InputError  # noqa: E402
from src.utils.log_utils import get_logger  # noqa: E402

logger = get_logger("scomplex")


class SimplicialComplex:
    """Simplices stored per dimension as sorted vertex tuples."""

    def __init__(self, simplices=(), flags: dict | None = None):
        self._by_dim: dict = {}
        for s in simplices:
            s = tuple(sorted(int(v) for v in s))
            if s:
                self._by_dim.setdefault(len(s) - 1, set()).add(s)
        self.flags = dict(flags or {})

    @classmethod
    def closure_of(cls, simplices, flags: dict | None = None) -> "SimplicialComplex":
        """Smallest complex containing the given simplices."""
        out = set()
        for s in simplices:
            s = tuple(sorted(int(v) for v in s))
            for r in range(1, len(s) + 1):
                out.update(combinations(s, r))
        return cls(out, flags)

    @property
    def max_dim(self) -> int:
        dims = [d for d, group in self._by_dim.items() if group]
        return max(dims) if dims else -1

    def simplices(self, dim: int) -> list:
        return sorted(self._by_dim.get(dim, ()))

    def all_simplices(self) -> list:
        """Dimension-ascending, lexicographic within a dimension."""
        return [s for d in range(self.max_dim + 1) for s in self.simplices(d)]

    def count(self, dim: int) -> int:
        return len(self._by_dim.get(dim, ()))

    def counts(self) -> list:
        return [self.count(d) for d in range(self.max_dim + 1)]

    @property
    def vertices(self) -> list:
        return [s[0] for s in self.simplices(0)]

    def __contains__(self, simplex) -> bool:
        s = tuple(sorted(simplex))
        return bool(s) and s in self._by_dim.get(len(s) - 1, ())

    def __len__(self):
        return sum(len(g) for g in self._by_dim.values())

    def __eq__(self, other):
        return isinstance(other, SimplicialComplex) and self.all_simplices() == other.all_simplices()

    def is_downward_closed(self) -> bool:
        for d in range(1, self.max_dim + 1):
            for s in self._by_dim.get(d, ()):
                if any(f not in self._by_dim.get(d - 1, ()) for f in combinations(s, d)):
                    return False
        return True

    def relabel(self, id_map) -> "SimplicialComplex":
        return SimplicialComplex(([int(id_map[v]) for v in s] for s in self.all_simplices()), self.flags)

    def to_jsonl_rows(self, id_map=None) -> list:
        target = self.relabel(id_map) if id_map is not None else self
        return [list(s) for s in target.all_simplices()]


def euler_characteristic(complex_: SimplicialComplex) -> int:
    return sum((-1) ** d * n for d, n in enumerate(complex_.counts()))


# --- mod-2 homology -------------------------------------------------------------

def boundary_columns(complex_: SimplicialComplex, dim: int) -> list:
    """Columns of the mod-2 boundary map from dim-simplices, each a set of (dim-1)-simplex row indices."""
    if dim < 1:
        return []
    row_of = {s: i for i, s in enumerate(complex_.simplices(dim - 1))}
    return [{row_of[f] for f in combinations(s, dim)} for s in complex_.simplices(dim)]


def gf2_rank(columns: list) -> int:
    """Rank by lowest-one column reduction; columns are sets of row indices."""
    pivot_of: dict = {}
    rank = 0
    for col in columns:
        col = set(col)
        while col:
            low = max(col)
            other = pivot_of.get(low)
            if other is None:
                pivot_of[low] = col
                rank += 1
                break
            col ^= other
    return rank


def betti_mod2(complex_: SimplicialComplex, up_to: int | None = None) -> list:
    top = complex_.max_dim if up_to is None else up_to
    if top < 0:
        return []
    ranks = [0] + [gf2_rank(boundary_columns(complex_, d)) for d in range(1, top + 2)]
    return [complex_.count(d) - ranks[d] - ranks[d + 1] for d in range(top + 1)]


# --- manifold checks ---------------------------------------------------------

@dataclass
class ManifoldReport:
    dimension: int
    pure: bool
    boundary2: bool
    links: bool | None          # None when not checked (m > 2)
    components: int
    details: list = field(default_factory=list)
    boundary_faces: list = field(default_factory=list)      # (m-1)-faces in fewer than two m-simplices
    branching_faces: list = field(default_factory=list)     # (m-1)-faces in three or more
    bad_links: list = field(default_factory=list)           # vertices whose link is not a sphere

    @property
    def passed(self) -> bool:
        return self.pure and self.boundary2 and self.links is not False

    def to_json(self) -> dict:
        return {
            "pure": self.pure,
            "boundary2": self.boundary2,
            "links": self.links,
            "components": self.components,
            "passed": self.passed,
            "details": self.details[:50],
            "boundary_faces": [list(f) for f in self.boundary_faces[:50]],
            "branching_faces": [list(f) for f in self.branching_faces[:50]],
            "bad_links": self.bad_links[:50],
            "failure_counts": [len(self.boundary_faces), len(self.branching_faces), len(self.bad_links)],
        }


def connected_components(complex_: SimplicialComplex) -> int:
    ds = DisjointSet(complex_.vertices)
    for a, b in complex_.simplices(1):
        ds.merge(a, b)
    return ds.n_subsets


def _link_is_cycle(edges: list) -> bool:
    if len(edges) < 3:
        return False
    degree: dict = {}
    for a, b in edges:
        degree[a] = degree.get(a, 0) + 1
        degree[b] = degree.get(b, 0) + 1
    if any(d != 2 for d in degree.values()):
        return False
    ds = DisjointSet(degree)
    for a, b in edges:
        ds.merge(a, b)
    return ds.n_subsets == 1


def closed_manifold_check(complex_: SimplicialComplex, m: int) -> ManifoldReport:
    details = []
    top = complex_.max_dim

    pure = top == m
    if top > m:
        details.append(f"{complex_.count(top)} simplices of dimension {top} > {m}")
    covered: set = set()
    for d in range(1, top + 1):
        for s in complex_.simplices(d):
            covered.update(combinations(s, d))
    for d in range(0, min(top, m - 1) + 1):
        loose = [s for s in complex_.simplices(d) if s not in covered]
        if loose:
            pure = False
            details.append(f"maximal {d}-simplex {loose[0]} (+{len(loose) - 1} more)")

    incidence = {s: 0 for s in complex_.simplices(m - 1)}
    for s in complex_.simplices(m):
        for f in combinations(s, m):
            incidence[f] = incidence.get(f, 0) + 1
    odd = [(f, c) for f, c in incidence.items() if c != 2]
    boundary_faces = sorted(f for f, c in odd if c < 2)
    branching_faces = sorted(f for f, c in odd if c > 2)
    boundary2 = bool(incidence) and not odd
    if odd:
        details.append(f"{len(odd)} ({m - 1})-simplices not in exactly two {m}-simplices, e.g. {odd[0]}")

    links = None
    bad: list = []
    if m == 1:
        links = boundary2
        bad = sorted({v for f in boundary_faces + branching_faces for v in f})
    elif m == 2:
        link_edges: dict = {v: [] for v in complex_.vertices}
        for a, b, c in complex_.simplices(2):
            link_edges[a].append((b, c))
            link_edges[b].append((a, c))
            link_edges[c].append((a, b))
        bad = sorted(v for v, edges in link_edges.items() if not _link_is_cycle(edges))
        links = bool(link_edges) and not bad
        if bad:
            details.append(f"{len(bad)} vertices whose link is not a single cycle, e.g. {bad[0]}")

    return ManifoldReport(m, pure, boundary2, links, connected_components(complex_), details,
                          boundary_faces, branching_faces, bad)


def topology_report(complex_: SimplicialComplex, m: int) -> dict:
    betti = betti_mod2(complex_)
    return {
        "counts": complex_.counts(),
        "chi": euler_characteristic(complex_),
        "betti": betti,
        "manifold": closed_manifold_check(complex_, m).to_json(),
        "flags": complex_.flags,
    }


# --- export -----------------------------------------------------------------------

def classical_mds(d2: np.ndarray, dim: int = 3) -> np.ndarray:
    """Coordinates from the top eigenpairs of the double-centered squared-distance matrix."""
    n = d2.shape[0]
    if n == 0:
        return np.zeros((0, dim))
    centering = np.eye(n) - np.ones((n, n)) / n
    b = -0.5 * centering @ d2 @ centering
    evals, evecs = np.linalg.eigh(b)
    order = np.argsort(evals)[::-1][:dim]
    evals, evecs = evals[order], evecs[:, order]
    keep = evals > 1e-12 * max(float(evals[0]), 0.0)
    if not np.any(keep):
        raise InputError("scomplex", "landmark embedding failed: no positive eigenvalues")
    coords = np.zeros((n, dim))
    coords[:, :int(keep.sum())] = evecs[:, keep] * np.sqrt(evals[keep])
    return coords


def _layout(complex_: SimplicialComplex, coords, d2) -> tuple:
    verts = complex_.vertices
    if coords is not None:
        xyz = np.asarray(coords, dtype=float)[verts]
    elif d2 is not None:
        xyz = classical_mds(np.asarray(d2, dtype=float)[np.ix_(verts, verts)], 3)
    else:
        raise InputError("scomplex", "export needs vertex coordinates or a distance matrix")
    if xyz.shape[1] < 3:
        xyz = np.hstack([xyz, np.zeros((len(verts), 3 - xyz.shape[1]))])
    return verts, xyz


def export_off(complex_: SimplicialComplex, path: str, coords=None, d2=None) -> str:
    """OFF with vertices and triangles; edges are listed in comment lines.

    coords (or a dense squared-distance matrix d2, embedded by classical MDS)
    are indexed by the complex's vertex labels.
    """
    if complex_.max_dim > 2:
        raise InputError("scomplex", f"OFF export supports dimension <= 2, complex has dimension {complex_.max_dim}")
    verts, xyz = _layout(complex_, coords, d2)
    index = {v: i for i, v in enumerate(verts)}
    edges = complex_.simplices(1)
    tris = complex_.simplices(2)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write("OFF\n")
        f.write(f"{len(verts)} {len(tris)} {len(edges)}\n")
        for x, y, z in xyz[:, :3]:
            f.write(f"{x:.17g} {y:.17g} {z:.17g}\n")
        for a, b, c in tris:
            f.write(f"3 {index[a]} {index[b]} {index[c]}\n")
        for a, b in edges:
            f.write(f"# edge {index[a]} {index[b]}\n")
    logger.info(f"💾 OFF written to {path} ({len(verts)} vertices, {len(tris)} triangles)")
    return path


def render_complex(complex_: SimplicialComplex, path: str, coords=None, d2=None, title: str | None = None) -> str:
    if complex_.max_dim > 2:
        raise InputError("scomplex", f"rendering supports dimension <= 2, complex has dimension {complex_.max_dim}")
    verts, xyz = _layout(complex_, coords, d2)
    index = {v: i for i, v in enumerate(verts)}
    flat = coords is not None and np.asarray(coords).shape[1] <= 2
    edges = [[xyz[index[a]], xyz[index[b]]] for a, b in complex_.simplices(1)]
    tris = [[xyz[index[v]] for v in t] for t in complex_.simplices(2)]

    fig = plt.figure(figsize=(6, 6))
    if flat:
        ax = fig.add_subplot(111)
        ax.add_collection(PolyCollection([np.array(t)[:, :2] for t in tris], facecolor="tab:blue", alpha=0.3))
        ax.add_collection(LineCollection([np.array(e)[:, :2] for e in edges], colors="k", linewidths=0.6))
        ax.scatter(xyz[:, 0], xyz[:, 1], s=6, c="tab:red")
        ax.set_aspect("equal")
        ax.autoscale_view()
    else:
        ax = fig.add_subplot(111, projection="3d")
        ax.add_collection3d(Poly3DCollection(tris, facecolor="tab:blue", alpha=0.3))
        ax.add_collection3d(Line3DCollection(edges, colors="k", linewidths=0.4))
        ax.scatter(xyz[:, 0], xyz[:, 1], xyz[:, 2], s=4, c="tab:red")
    if title:
        ax.set_title(title)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path
