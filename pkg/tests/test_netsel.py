import math

import numpy as np
import pytest

from conftest import dm_of
from src.core.errors import InputError
from src.data.synth import SamplerSpec, sample
from src.geometry.dmatrix import from_point_cloud
from src.reconstruction.netsel import (
    Net,
    compute_L_of_p,
    default_cap,
    estimate_eps,
    farthest_point_sample,
    neighborhood,
    sampling_diagnostics,
)

LINE = [[0.0], [1.0], [2.0], [3.0], [10.0]]


def test_fps_on_a_line():
    net = farthest_point_sample(dm_of(LINE), seed=0, count=3)
    assert net.landmark_ids.tolist() == [0, 4, 3]
    assert net.lambda_ == pytest.approx(1.0)
    assert net.insertion_radii[1:].tolist() == [10.0, 3.0]
    assert np.isinf(net.insertion_radii[0])


def test_fps_all_points_and_single_point():
    dm = dm_of(LINE)
    full = farthest_point_sample(dm, count=5)
    assert sorted(full.landmark_ids.tolist()) == [0, 1, 2, 3, 4]
    assert full.lambda_ == 0.0

    one = farthest_point_sample(dm, count=1)
    assert one.landmark_ids.tolist() == [0]
    assert one.lambda_ == pytest.approx(10.0)
    assert one.nearest_dist is None


def test_fps_radius_stop():
    net = farthest_point_sample(dm_of(LINE), radius=1.5)
    assert net.landmark_ids.tolist() == [0, 4, 3]
    assert net.lambda_ == pytest.approx(1.0)


def test_fps_ties_take_the_smallest_index():
    square = dm_of([(0, 0), (1, 0), (0, 1), (1, 1)])
    # from 0, point 3 is farthest; then 1 and 2 tie
    assert farthest_point_sample(square, count=3).landmark_ids.tolist() == [0, 3, 1]


def test_fps_packing_and_covering(rng):
    pts = rng.uniform(size=(300, 2))
    dm = dm_of(pts)
    net = farthest_point_sample(dm, seed=5, count=25)
    landmarks = pts[net.landmark_ids]
    gaps = np.linalg.norm(landmarks[:, None] - landmarks[None, :], axis=-1)
    np.fill_diagonal(gaps, np.inf)
    assert gaps.min() >= net.lambda_ - 1e-12
    to_net = np.linalg.norm(pts[:, None] - landmarks[None, :], axis=-1).min(axis=1)
    assert to_net.max() == pytest.approx(net.lambda_, rel=1e-12)


@pytest.mark.parametrize("kwargs", [
    {"count": 0}, {"count": 6}, {"radius": -1.0}, {}, {"seed": 9, "count": 2},
])
def test_fps_rejects_bad_arguments(kwargs):
    with pytest.raises(InputError):
        farthest_point_sample(dm_of(LINE), **kwargs)


def test_nearest_landmark_distance():
    dm = dm_of([[0.0], [3.0], [10.0]])
    net = Net.from_landmarks(dm, [0, 1, 2])
    np.testing.assert_allclose(compute_L_of_p(net, dm), [3.0, 3.0, 7.0])
    assert net.lambda_ == 0.0
    with pytest.raises(InputError):
        compute_L_of_p(Net.from_landmarks(dm, [1]), dm)


def test_neighborhood_breaks_ties_by_rank():
    dm = dm_of([[0.0], [1.0], [2.0], [3.0], [4.0]])
    net = Net.from_landmarks(dm, [0, 1, 2, 3, 4])
    hood = neighborhood(net, dm, 2, 3)
    assert hood.members == [2, 1, 3]
    assert neighborhood(net, dm, 2, 1).members == [2]
    assert len(neighborhood(net, dm, 0, 50).members) == 5


def test_neighborhood_puts_a_coincident_center_first():
    dm = dm_of([[0.0], [0.0], [1.0]])
    net = Net.from_landmarks(dm, [0, 1, 2])
    assert neighborhood(net, dm, 1, 2).members == [1, 0]


def test_default_caps():
    assert default_cap(1, "theoretical") == (66, False)
    assert default_cap(2, "theoretical") == (4356, False)
    assert default_cap(2, "practical") == (32, False)
    assert default_cap(1, "practical", k=10) == (10, False)
    assert default_cap(3, "theoretical") == (100_000, True)
    with pytest.raises(InputError):
        default_cap(0)


def test_eps_estimate_matches_circle_spacing():
    cloud = sample(SamplerSpec("circle", 200, jitter=0.0))
    dm = from_point_cloud(cloud)
    net = farthest_point_sample(dm, count=12)
    spacing = 2 * math.sin(math.pi / 200)
    assert estimate_eps(dm, net) == pytest.approx(spacing, rel=1e-9)
    assert estimate_eps(dm, net) <= net.lambda_


def test_sampling_diagnostics_flags():
    diag = sampling_diagnostics(lam=0.01, eps_hat=0.005, reach=10.0)
    assert diag.eps_below_lambda
    assert diag.neighbor_bound_condition
    assert diag.interval_lemma_condition
    assert diag.lambda_over_reach == pytest.approx(1e-3)

    loose = sampling_diagnostics(lam=0.5, eps_hat=0.6, reach=1.0)
    assert not loose.eps_below_lambda
    assert not loose.neighbor_bound_condition
    assert not loose.interval_lemma_condition
    assert sampling_diagnostics(0.5, 0.1).reach is None
