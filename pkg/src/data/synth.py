"""Seeded samplers for manifolds with known topology and reach."""
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from src.core.errors import InputError
from src.geometry.dmatrix import PointCloud
from src.utils.log_utils import get_logger

logger = get_logger("synth")

SHAPES = ("circle", "sphere2", "torus3", "flat_torus4", "line_segment")
INTRINSIC_DIM = {"circle": 1, "sphere2": 2, "torus3": 2, "flat_torus4": 2, "line_segment": 1}
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class SamplerSpec:
    shape: str
    n: int
    noise: float = 0.0
    seed: int = 0
    jitter: float = 0.5     # fraction of a stratum each parameter may move
    phase: float = 0.0
    radius: float = 1.0     # circle / sphere radius, segment length
    R: float = 2.0          # torus3 center-line radius
    r: float = 0.5          # torus3 tube radius

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise InputError("synth", f"unknown shape '{self.shape}', expected one of {', '.join(SHAPES)}")
        if self.n < 1:
            raise InputError("synth", f"need at least one sample, got n={self.n}")
        if self.noise < 0 or not 0 <= self.jitter <= 1:
            raise InputError("synth", "noise must be >= 0 and jitter in [0, 1]")
        if self.radius <= 0 or self.r <= 0 or self.R <= 0:
            raise InputError("synth", "radii must be positive")
        if self.shape == "torus3" and not self.R > self.r:
            raise InputError("synth", f"torus3 needs R > r, got R={self.R}, r={self.r}")

    @property
    def intrinsic_dim(self) -> int:
        return INTRINSIC_DIM[self.shape]


def _strata(n: int, rng: np.random.Generator, jitter: float) -> np.ndarray:
    """One value per stratum [i/n, (i+1)/n), starting at the left edge when jitter is 0."""
    return (np.arange(n) + jitter * rng.random(n)) / n


def _lattice(n: int, rng: np.random.Generator, jitter: float) -> tuple:
    """Stratified first coordinate, golden-ratio second coordinate; both in [0, 1)."""
    s = _strata(n, rng, jitter)
    t = np.mod(np.arange(n) * GOLDEN + jitter * (rng.random(n) - 0.5) / n, 1.0)
    return s, t


def _torus_tube_angle(t: np.ndarray, R: float, r: float) -> np.ndarray:
    """Inverse CDF of the tube angle under the area measure (R + r cos v) dv."""
    grid = np.linspace(0.0, 2 * np.pi, 4097)
    cdf = (R * grid + r * np.sin(grid)) / (2 * np.pi * R)
    return np.interp(t, cdf, grid)


def _offsets(rng: np.random.Generator, n: int, noise: float) -> np.ndarray:
    return noise * rng.uniform(-1.0, 1.0, n) if noise > 0 else np.zeros(n)


def sample(spec: SamplerSpec, estimate: bool = True) -> PointCloud:
    """Seeded sample of the shape; with `estimate` the cloud carries its covering-radius estimate."""
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    if spec.shape == "circle":
        theta = 2 * np.pi * _strata(n, rng, spec.jitter) + spec.phase
        rad = spec.radius + _offsets(rng, n, spec.noise)
        coords = np.column_stack([rad * np.cos(theta), rad * np.sin(theta)])
    elif spec.shape == "sphere2":
        s, _ = _lattice(n, rng, spec.jitter)
        z = 1.0 - 2.0 * s if n > 1 else np.zeros(1)
        phi = 2 * np.pi * np.arange(n) * GOLDEN + spec.phase
        rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
        unit = np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
        coords = unit * (spec.radius + _offsets(rng, n, spec.noise))[:, None]
    elif spec.shape == "torus3":
        s, t = _lattice(n, rng, spec.jitter)
        u = 2 * np.pi * s + spec.phase
        v = _torus_tube_angle(t, spec.R, spec.r)
        tube = spec.r + _offsets(rng, n, spec.noise)
        ring = spec.R + tube * np.cos(v)
        coords = np.column_stack([ring * np.cos(u), ring * np.sin(u), tube * np.sin(v)])
    elif spec.shape == "flat_torus4":
        s, t = _lattice(n, rng, spec.jitter)
        u = 2 * np.pi * s + spec.phase
        v = 2 * np.pi * t
        scale = (1.0 + _offsets(rng, n, spec.noise))[:, None] * spec.radius / math.sqrt(2.0)
        coords = scale * np.column_stack([np.cos(u), np.sin(u), np.cos(v), np.sin(v)])
    else:
        x = spec.radius * (_strata(n, rng, spec.jitter) if n > 1 else np.zeros(1))
        coords = np.column_stack([x, _offsets(rng, n, spec.noise)])
    cloud = PointCloud(coords)
    if estimate:
        cloud = PointCloud(cloud.coords, covering_radius_estimate(spec, cloud))
    return cloud


def implicit_residual(spec: SamplerSpec, cloud: PointCloud) -> np.ndarray:
    x = cloud.coords
    if spec.shape == "circle":
        return np.abs(np.linalg.norm(x, axis=1) - spec.radius)
    if spec.shape == "sphere2":
        return np.abs(np.linalg.norm(x, axis=1) - spec.radius)
    if spec.shape == "torus3":
        ring = np.sqrt(x[:, 0] ** 2 + x[:, 1] ** 2)
        return np.abs((ring - spec.R) ** 2 + x[:, 2] ** 2 - spec.r ** 2)
    if spec.shape == "flat_torus4":
        half = spec.radius ** 2 / 2.0
        return np.maximum(np.abs(x[:, 0] ** 2 + x[:, 1] ** 2 - half), np.abs(x[:, 2] ** 2 + x[:, 3] ** 2 - half))
    return np.abs(x[:, 1])


def known_reach(spec: SamplerSpec) -> float:
    if spec.shape in ("circle", "sphere2"):
        return spec.radius
    if spec.shape == "torus3":
        return spec.r if spec.R >= 2 * spec.r else min(spec.r, spec.R - spec.r)
    if spec.shape == "flat_torus4":
        return spec.radius / math.sqrt(2.0)
    return math.inf


def covering_radius_estimate(spec: SamplerSpec, cloud: PointCloud, queries: int | None = None) -> float:
    """Largest distance from a dense noiseless sample of the shape to the cloud."""
    dense = SamplerSpec(spec.shape, queries or 8 * spec.n, 0.0, spec.seed + 7919, 1.0, 0.0,
                       spec.radius, spec.R, spec.r)
    dist, _ = cKDTree(cloud.coords).query(sample(dense, estimate=False).coords, k=1)
    eps_hat = float(dist.max())
    logger.info(f"📐 {spec.shape} n={spec.n}: covering radius estimate {eps_hat:.4g}")
    return eps_hat


def parse_spec(text: str) -> SamplerSpec:
    """'shape:key=value,...', e.g. 'torus3:n=8000,R=2,r=0.7,seed=3'."""
    shape, _, rest = text.partition(":")
    fields = {"n": 400}
    casts = {"n": int, "seed": int}
    for item in filter(None, (part.strip() for part in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq or key not in SamplerSpec.__dataclass_fields__ or key == "shape":
            raise InputError("synth", f"bad sampler option '{item}' in '{text}'")
        try:
            fields[key] = casts.get(key, float)(value)
        except ValueError as e:
            raise InputError("synth", f"bad value for '{key}': {value}") from e
    return SamplerSpec(shape.strip(), **fields)
