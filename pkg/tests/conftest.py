import numpy as np
import pytest

from src.geometry.dmatrix import DistanceMatrix, PointCloud, from_point_cloud
from src.reconstruction.netsel import Net


def dm_of(points) -> DistanceMatrix:
    return from_point_cloud(PointCloud(np.asarray(points, dtype=float)))


def net_of(points, landmark_ids):
    dm = dm_of(points)
    return dm, Net.from_landmarks(dm, landmark_ids)


@pytest.fixture
def equilateral_dm():
    return DistanceMatrix.from_square_d2(np.ones((3, 3)) - np.eye(3))


@pytest.fixture
def flat_triangle():
    """Three nearly collinear landmarks plus one witness far enough away to make lambda ~ 1."""
    points = [(0.0, 0.0), (1.0, 0.01), (2.0, 0.0), (1.0, 1.0)]
    return net_of(points, [0, 1, 2])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(autouse=True)
def _isolated_results(tmp_path, monkeypatch):
    monkeypatch.setattr("configs.settings.RESULTS_DIR", str(tmp_path / "results"))
