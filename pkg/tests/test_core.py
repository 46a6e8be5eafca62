import numpy as np
import pytest

from compresstest import RngStream, Sample, bin_partition, child_stream, load_sample
from compresstest.core import Coreset, save_points
from compresstest.errors import IndivisibleBinning


def test_sample_rejects_nonfinite():
    with pytest.raises(ValueError):
        Sample([[0.0, np.nan]])
    with pytest.raises(ValueError):
        Sample([[np.inf]])


def test_sample_shape_validation():
    with pytest.raises(ValueError):
        Sample(np.empty((0, 3)))
    s = Sample([1.0, 2.0, 3.0])
    assert (s.n, s.d) == (3, 1)


def test_sample_immutable():
    s = Sample([[1.0, 2.0]])
    with pytest.raises(ValueError):
        s.points[0, 0] = 5.0


def test_coreset_validation():
    s = Sample(np.arange(6.0).reshape(3, 2))
    c = Coreset(s, [2, 0])
    assert np.array_equal(c.points, s.points[[2, 0]])
    with pytest.raises(ValueError):
        Coreset(s, [0, 3])
    with pytest.raises(ValueError):
        Coreset(s, [1, 1])


def test_bin_partition_two_bins_of_four():
    s = Sample(np.arange(16.0).reshape(8, 2))
    views = bin_partition(s, 2)
    assert len(views) == 2
    assert all(v.n == 4 for v in views)
    assert np.array_equal(views[0].points, s.points[:4])
    assert np.array_equal(views[1].points, s.points[4:])


def test_bin_partition_indivisible():
    s = Sample(np.zeros((6, 1)))
    with pytest.raises(IndivisibleBinning):
        bin_partition(s, 4)


def test_bin_partition_roundtrip_16_bins():
    rng = np.random.default_rng(3)
    s = Sample(rng.normal(size=(64, 3)))
    views = bin_partition(s, 16)
    assert [v.n for v in views] == [4] * 16
    rebuilt = np.vstack([v.points for v in views])
    assert np.array_equal(rebuilt, s.points)


def test_bin_partition_views_share_storage():
    s = Sample(np.arange(8.0).reshape(4, 2))
    views = bin_partition(s, 2)
    assert views[0].points.base is s.points.base or views[0].points.base is s.points


def test_child_stream_determinism():
    a = child_stream(RngStream(42, 7), 3).generator().random(1000)
    b = child_stream(RngStream(42, 7), 3).generator().random(1000)
    assert np.array_equal(a, b)


def test_child_streams_differ():
    r = RngStream(42)
    a = child_stream(r, 0).generator().random(1000)
    b = child_stream(r, 1).generator().random(1000)
    assert (a != b).sum() >= 990


def test_child_of_child_deterministic():
    r = RngStream(5)
    a = child_stream(child_stream(r, 2), 9).generator().random(16)
    b = child_stream(child_stream(r, 2), 9).generator().random(16)
    assert np.array_equal(a, b)
    c = child_stream(child_stream(r, 9), 2).generator().random(16)
    assert not np.array_equal(a, c)


def test_csv_roundtrip(tmp_path):
    pts = np.array([[1.25, -3.5e-7], [0.1, 2.0 / 3.0]])
    path = tmp_path / "pts.csv"
    save_points(path, pts)
    loaded = load_sample(path)
    assert np.array_equal(loaded.points, pts)


def test_csv_header_skip_and_validation(tmp_path):
    path = tmp_path / "data.csv"
    path.write_text("a,b\n1.0,2.0\n3.0,4.0\n")
    with pytest.raises(ValueError):
        load_sample(path)
    s = load_sample(path, skip_header=True)
    assert s.n == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("1.0,nan\n")
    with pytest.raises(ValueError):
        load_sample(bad)
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("1.0,2.0\n3.0\n")
    with pytest.raises(ValueError):
        load_sample(ragged)
