import numpy as np
import pytest

from conftest import net_of
from src.core.errors import InputError
from src.data.synth import SamplerSpec, sample
from src.geometry.dmatrix import DistanceMatrix, from_point_cloud, load_distance_matrix, save_binary
from src.reconstruction.netsel import Net, farthest_point_sample
from src.reconstruction.witness import (
    build_witness_complex,
    check_membership,
    witness_order,
    witnessed_simplices,
)
from src.topology.scomplex import SimplicialComplex, betti_mod2, euler_characteristic


@pytest.fixture
def line_net():
    return net_of([[0.0], [1.0], [3.0], [0.9]], [0, 1, 2])


def test_witness_order_unweighted(line_net):
    dm, net = line_net
    order = witness_order(dm, net, np.zeros(3), 3, 3)
    assert order.landmarks == (1, 0, 2)
    np.testing.assert_allclose(order.distances, (0.01, 0.81, 4.41), rtol=1e-12)


def test_witness_order_with_a_weight(line_net):
    dm, net = line_net
    order = witness_order(dm, net, np.array([0.81, 0.0, 0.0]), 3, 3)
    assert order.landmarks == (0, 1, 2)
    assert order.distances[0] == pytest.approx(0.0, abs=1e-15)


def test_coincident_witness_sees_its_landmark_first(line_net):
    dm, net = line_net
    assert witness_order(dm, net, np.zeros(3), 1, 2).landmarks == (1, 0)
    with pytest.raises(InputError):
        witness_order(dm, net, np.zeros(3), 1, 0)


def test_tied_cut_witnesses_every_completion():
    dm = DistanceMatrix.from_square_d2(np.ones((3, 3)) - np.eye(3))
    net = Net.from_landmarks(dm, [0, 1, 2])
    witnessed = witnessed_simplices(dm, net, np.zeros(3), depth=3)
    assert witnessed[1] == {(0, 1), (0, 2), (1, 2)}
    assert witnessed[2] == {(0, 1, 2)}

    complex_ = build_witness_complex(dm, net, np.zeros(3), m=1, depth=3)
    assert complex_.counts() == [3, 3, 1]
    assert complex_.flags["over_dimension"] == 1


def test_no_witnesses_gives_an_empty_complex(line_net):
    dm, net = line_net
    net.witness_ids = np.array([], dtype=np.int64)
    complex_ = build_witness_complex(dm, net, np.zeros(3), m=1)
    assert len(complex_) == 0
    assert complex_.counts() == []


def circle_net(n=400, landmarks=8):
    cloud = sample(SamplerSpec("circle", n))
    dm = from_point_cloud(cloud)
    return dm, farthest_point_sample(dm, count=landmarks)


def test_dense_circle_gives_a_landmark_cycle():
    dm, net = circle_net()
    complex_ = build_witness_complex(dm, net, np.zeros(net.size), m=1)
    assert complex_.counts() == [8, 8]
    assert euler_characteristic(complex_) == 0
    assert betti_mod2(complex_) == [1, 1]
    assert complex_.is_downward_closed()


def test_every_simplex_is_witnessed_with_its_faces():
    dm, net = circle_net(300, 10)
    w2 = np.full(net.size, 1e-4)
    witnessed = witnessed_simplices(dm, net, w2, depth=3)
    complex_ = build_witness_complex(dm, net, w2, m=1, depth=3)
    for s in complex_.all_simplices():
        assert s in witnessed[len(s) - 1]
    assert complex_.is_downward_closed()


def test_thread_count_does_not_change_the_complex():
    dm, net = circle_net(500, 12)
    w2 = np.linspace(0.0, 1e-3, net.size)
    serial = witnessed_simplices(dm, net, w2, depth=3, threads=1, block_size=64)
    threaded = witnessed_simplices(dm, net, w2, depth=3, threads=4, block_size=64)
    assert serial == threaded
    assert build_witness_complex(dm, net, w2, m=1) == build_witness_complex(dm, net, w2, m=1, threads=4)


def test_matrix_and_cloud_inputs_agree(tmp_path):
    cloud = sample(SamplerSpec("circle", 200, seed=3))
    dm = from_point_cloud(cloud)
    again = load_distance_matrix(save_binary(dm, str(tmp_path / "d.bin")), "binary")
    net_a = farthest_point_sample(dm, count=9)
    net_b = farthest_point_sample(again, count=9)
    assert np.array_equal(net_a.landmark_ids, net_b.landmark_ids)
    a = build_witness_complex(dm, net_a, np.zeros(9), m=1)
    b = build_witness_complex(again, net_b, np.zeros(9), m=1)
    assert a.to_jsonl_rows(net_a.landmark_ids) == b.to_jsonl_rows(net_b.landmark_ids)


def test_membership():
    complex_ = SimplicialComplex.closure_of([(0, 1, 2)])
    assert check_membership(complex_, (0, 1, 2))
    assert check_membership(complex_, [2, 0])
    assert not check_membership(complex_, (0, 3))
    assert not check_membership(complex_, ())
    assert not check_membership(complex_, ("a", 1))


def test_more_witnesses_only_add_witnessed_simplices(rng):
    dm = from_point_cloud(sample(SamplerSpec("sphere2", 300, seed=2)))
    net = farthest_point_sample(dm, count=12)
    w2 = rng.uniform(0.0, 0.05, net.size) * net.lambda_ ** 2
    full = witnessed_simplices(dm, net, w2, depth=4)
    half = rng.choice(dm.n, 150, replace=False)
    for ids in (half, half[:40]):
        net.witness_ids = np.sort(ids)
        part = witnessed_simplices(dm, net, w2, depth=4)
        assert all(p <= f for p, f in zip(part, full))


# nearly cocircular square: 0-2 is the Delaunay diagonal, with a tiny witness region near the center
QUAD = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.02)]
EDGE_WITNESSES = [(0.95, 0.1), (0.1, 0.95), (0.45, 0.1), (0.1, 0.45)]


def test_an_unwitnessed_diagonal_leaves_a_hole():
    dm, net = net_of(QUAD + EDGE_WITNESSES, [0, 1, 2, 3])
    sparse = build_witness_complex(dm, net, np.zeros(4), m=2)
    assert (0, 2) not in sparse
    assert (1, 3) not in sparse
    assert sparse.counts() == [4, 4]
    assert betti_mod2(sparse) == [1, 1]

    dm, net = net_of(QUAD + EDGE_WITNESSES + [(0.499, 0.505)], [0, 1, 2, 3])
    dense = build_witness_complex(dm, net, np.zeros(4), m=2)
    assert (0, 2) in dense
    assert dense.simplices(2) == [(0, 1, 2), (0, 2, 3)]
    assert euler_characteristic(dense) == 1
    assert betti_mod2(dense) == [1, 0, 0]
