import numpy as np
import pytest

from configs import settings
from src.core.errors import InputError
from src.geometry.dmatrix import (
    DistanceMatrix,
    PointCloud,
    from_point_cloud,
    load_distance_matrix,
    load_point_cloud,
    save_binary,
    save_csv,
    save_point_cloud,
    validate_triangle,
)


def write_csv(path, rows):
    path.write_text("\n".join(",".join(str(x) for x in row) for row in rows) + "\n")
    return str(path)


def test_csv_is_stored_squared(tmp_path):
    dm = load_distance_matrix(write_csv(tmp_path / "d.csv", [[0, 1, 2], [1, 0, 1], [2, 1, 0]]))
    assert dm.n == 3
    assert dm.get(0, 2) == 4.0
    assert dm.get(2, 0) == 4.0
    assert dm.get(1, 1) == 0.0


def test_one_by_one_matrix_is_valid(tmp_path):
    dm = load_distance_matrix(write_csv(tmp_path / "d.csv", [[0]]))
    assert dm.n == 1
    assert dm.max_d2 == 0.0


@pytest.mark.parametrize("rows, fragment", [
    ([[0, 1], [2, 0]], "asymmetric entries (0, 1)"),
    ([[0, -1], [-1, 0]], "negative entry"),
    ([[1, 1], [1, 0]], "nonzero diagonal"),
    ([[0, 1, 2], [1, 0, 1]], "square"),
])
def test_malformed_csv_is_rejected(tmp_path, rows, fragment):
    with pytest.raises(InputError) as err:
        load_distance_matrix(write_csv(tmp_path / "d.csv", rows))
    assert fragment in str(err.value)
    assert str(err.value).startswith("[dmatrix]")


def test_missing_file_is_an_input_error(tmp_path):
    with pytest.raises(InputError):
        load_distance_matrix(str(tmp_path / "nope.csv"))


def test_point_cloud_distances():
    dm = from_point_cloud(PointCloud([[0.0, 0.0], [3.0, 4.0]]))
    assert dm.get(0, 1) == 25.0

    square = from_point_cloud(PointCloud([[0, 0], [1, 0], [1, 1], [0, 1]]))
    assert square.get(0, 2) == 2.0
    assert square.get(1, 3) == 2.0
    assert square.get(0, 1) == 1.0


def test_packed_views_agree_with_dense(rng):
    pts = rng.normal(size=(7, 3))
    dm = from_point_cloud(PointCloud(pts))
    dense = dm.dense()
    expected = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=-1)
    np.testing.assert_allclose(dense, expected, rtol=1e-12, atol=1e-12)
    np.testing.assert_array_equal(dm.row(3), dense[3])
    sub = dm.restrict([5, 1, 2])
    np.testing.assert_array_equal(sub.dense(), dense[np.ix_([5, 1, 2], [5, 1, 2])])


def test_binary_roundtrip_is_bit_identical(tmp_path, rng):
    dm = from_point_cloud(PointCloud(rng.normal(size=(10, 2))))
    path = save_binary(dm, str(tmp_path / "d.bin"))
    again = load_distance_matrix(path, "binary")
    assert again.n == dm.n
    assert np.array_equal(again.d2, dm.d2)


def test_binary_rejects_bad_header_and_length(tmp_path):
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"XXXX" + b"\x00" * 12)
    with pytest.raises(InputError, match="header"):
        load_distance_matrix(str(bad), "binary")

    short = tmp_path / "short.bin"
    short.write_bytes(settings.BINARY_MAGIC + (3).to_bytes(4, "little") + b"\x00" * 8)
    with pytest.raises(InputError, match="expected 6 entries"):
        load_distance_matrix(str(short), "binary")


def test_csv_and_cloud_writers_reload(tmp_path):
    cloud = PointCloud([[0.0, 0.0], [3.0, 4.0], [6.0, 8.0]])
    dm = from_point_cloud(cloud)
    again = load_distance_matrix(save_csv(dm, str(tmp_path / "d.csv")))
    np.testing.assert_allclose(again.dense(), dm.dense(), rtol=1e-12)
    reloaded = load_point_cloud(save_point_cloud(cloud, str(tmp_path / "cloud.csv")))
    np.testing.assert_array_equal(reloaded.coords, cloud.coords)


def test_triangle_violation_is_reported():
    dm = DistanceMatrix.from_square_d2(np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], dtype=float) ** 2)
    report = validate_triangle(dm, sample_count=100, tol=1e-9, strict=True)
    assert not report.passed
    assert report.exhaustive
    assert report.violations[0][:3] == (0, 1, 2)

    sampled = validate_triangle(dm, sample_count=200, tol=1e-9, seed=1)
    assert not sampled.passed


def test_triangle_check_is_vacuous_below_three_points():
    dm = DistanceMatrix.from_square_d2(np.array([[0.0, 4.0], [4.0, 0.0]]))
    report = validate_triangle(dm, sample_count=10, tol=1e-9, strict=True)
    assert report.passed
    assert report.checked == 0


def test_strict_load_rejects_non_metric(tmp_path):
    path = write_csv(tmp_path / "d.csv", [[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    assert load_distance_matrix(path).n == 3
    with pytest.raises(InputError, match="triangle inequality"):
        load_distance_matrix(path, strict=True)


def test_cloud_distances_survive_rigid_motion(rng):
    pts = rng.normal(size=(40, 3))
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    moved = pts @ q.T + rng.normal(size=3) * 10.0
    a = from_point_cloud(PointCloud(pts)).d2
    b = from_point_cloud(PointCloud(moved)).d2
    np.testing.assert_allclose(b, a, rtol=1e-9, atol=1e-9 * a.max())
