import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geodib.data import (GaussianComponent, MixtureSpec, PointFileError, PointSet, PRESETS, isotropic,
                         load_points, preset_dataset, preset_spec, sample_mixture, save_points)


def test_single_component_labels():
    ps = sample_mixture(MixtureSpec((isotropic((0, 0)),)), 4, seed=3)
    assert ps.points.shape == (4, 2)
    assert np.all(ps.labels == 0)


def test_two_component_counts_binomial_bound():
    spec = MixtureSpec((isotropic((0, 0), weight=0.5), isotropic((5, 5), weight=0.5)))
    ps = sample_mixture(spec, 1000, seed=11)
    assert abs(np.sum(ps.labels == 0) - 500) <= 4 * np.sqrt(1000 * 0.25)


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=20, deadline=None)
def test_same_seed_bit_identical(seed):
    a, b = preset_dataset("three_equal", seed), preset_dataset("three_equal", seed)
    assert a.points.tobytes() == b.points.tobytes()
    assert np.array_equal(a.labels, b.labels)


def test_three_equal_geometry():
    spec, n = preset_spec("three_equal")
    assert n == 150 and len(spec.components) == 3
    assert np.allclose(spec.weights, 1 / 3)
    m = [c.mean for c in spec.components]
    d = [np.linalg.norm(m[a] - m[b]) for a, b in ((0, 1), (1, 2), (0, 2))]
    assert np.allclose(d, d[0])


def test_single_blob_and_skew_presets():
    assert len(preset_spec("single_blob")[0].components) == 1
    spec, n = preset_spec("symmetric_plus_skew")
    assert n == 1000 and np.allclose(spec.weights, 0.5)
    ev = [np.linalg.eigvalsh(c.covariance) for c in spec.components]
    assert np.allclose(ev[0], ev[0][0])
    assert not np.isclose(ev[1][0], ev[1][1])


def test_all_presets_sample():
    for name in PRESETS:
        ps = preset_dataset(name)
        assert ps.n == PRESETS[name][1]
        assert ps.labels.max() < len(PRESETS[name][0])


def test_unknown_preset_lists_names():
    with pytest.raises(KeyError, match="three_equal"):
        preset_spec("four_squares")


def test_component_validation():
    with pytest.raises(ValueError, match="positive-definite"):
        GaussianComponent(np.zeros(2), np.diag([1.0, -1.0]))
    with pytest.raises(ValueError, match="symmetric"):
        GaussianComponent(np.zeros(2), np.array([[1.0, 0.5], [0.0, 1.0]]))
    with pytest.raises(ValueError, match="shape"):
        GaussianComponent(np.zeros(2), np.eye(3))
    with pytest.raises(ValueError, match="weight"):
        GaussianComponent(np.zeros(2), np.eye(2), 0.0)


def test_pointset_validation():
    with pytest.raises(ValueError):
        PointSet(np.array([[np.nan, 0.0]]))
    with pytest.raises(ValueError):
        PointSet(np.zeros((2, 2)), labels=[0])
    with pytest.raises(ValueError):
        PointSet(np.zeros((2, 2)), labels=[0, -1])


def test_round_trip(tmp_path):
    ps = PointSet(np.array([[0.1, 2.0], [1 / 3, -4.5], [1e-17, 7.0]]), labels=[0, 1, 1])
    save_points(ps, tmp_path / "p.csv")
    back = load_points(tmp_path / "p.csv")
    assert back == ps
    unlabeled = PointSet(ps.points)
    save_points(unlabeled, tmp_path / "q.csv")
    assert load_points(tmp_path / "q.csv").labels is None


@given(st.lists(st.tuples(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6)), min_size=1, max_size=30))
@settings(max_examples=30, deadline=None)
def test_round_trip_property(tmp_path_factory, coords):
    path = tmp_path_factory.mktemp("rt") / "p.csv"
    ps = PointSet(np.array(coords))
    save_points(ps, path)
    assert np.array_equal(load_points(path).points, ps.points)


def test_parse_error_names_line(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("x1,x2\n1,2\n3,abc\n")
    with pytest.raises(PointFileError, match="line 3"):
        load_points(p)


def test_empty_file(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("")
    with pytest.raises(PointFileError, match="no points"):
        load_points(p)
    p.write_text("x1,x2\n")
    with pytest.raises(PointFileError, match="no points"):
        load_points(p)


def test_bad_header_and_width(tmp_path):
    p = tmp_path / "h.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(PointFileError, match="header"):
        load_points(p)
    p.write_text("x1,x2\n1,2,3\n")
    with pytest.raises(PointFileError, match="line 2"):
        load_points(p)
