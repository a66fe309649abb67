import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaplab.errors import ConfigError
from gaplab.geometry import DomainSpec, build_grid, metrics, refine


def test_interval_layout():
    g = build_grid(DomainSpec.interval(0.0, 1.0, 9))
    assert g.n_nodes == 9
    assert g.h == pytest.approx(1 / 8)
    assert list(g.boundary_nodes) == [0, 8]
    assert g.normals[0, 0] == -1 and g.normals[8, 0] == 1


def test_rectangle_counts_and_corners():
    g = build_grid(DomainSpec.rectangle((0, 1), (0, 1), 9))
    assert g.n_nodes == 81
    assert g.boundary_nodes.size == 32
    assert g.is_corner.sum() == 4
    c = np.flatnonzero(g.is_corner)[0]
    assert np.linalg.norm(g.normals[c]) == pytest.approx(1.0)


def test_disk_layout():
    g = build_grid(DomainSpec.disk(1.0, 16, 32))
    assert g.n_nodes == 1 + 16 * 32
    assert g.boundary_nodes.size == 32
    r = np.hypot(*g.points[g.boundary_nodes].T)
    np.testing.assert_allclose(r, 1.0)
    np.testing.assert_allclose(np.einsum("ij,ij->i", g.normals[g.boundary_nodes], g.points[g.boundary_nodes]), 1.0)
    assert g.h == pytest.approx(1 / 16)


@pytest.mark.parametrize("bad", [
    lambda: DomainSpec.interval(1.0, 0.0, 9),
    lambda: DomainSpec.interval(0.0, 0.0, 9),
    lambda: DomainSpec.disk(-1.0, 8, 16),
    lambda: DomainSpec("triangle"),
])
def test_rejects_malformed(bad):
    with pytest.raises(ConfigError):
        bad()


def test_rejects_coarse_resolution():
    with pytest.raises(ConfigError):
        build_grid(DomainSpec.interval(0, 1, 5))
    assert build_grid(DomainSpec.interval(0, 1, 5), min_resolution=3).n_nodes == 5


def test_metrics():
    assert metrics(build_grid(DomainSpec.interval(-8, 8, 17))).diameter == 16
    m = metrics(build_grid(DomainSpec.rectangle((0, 3), (0, 4), 9)))
    assert m.diameter == pytest.approx(5.0)
    assert m.curvature_min == 0
    assert np.isnan(m.mean_curvature).sum() == 4
    d = metrics(build_grid(DomainSpec.disk(2.0, 8, 16)))
    assert d.diameter == 4.0 and d.curvature_min == pytest.approx(0.5)


def test_refine_halves_h():
    for spec in (DomainSpec.interval(0, 1, 9), DomainSpec.rectangle((0, 1), (0, 2), 9, 17), DomainSpec.disk(1, 8, 16)):
        assert build_grid(refine(spec)).h == pytest.approx(build_grid(spec).h / 2)


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5), st.floats(0.1, 10), st.integers(8, 60))
def test_distance_to_boundary_nonnegative_and_zero_on_boundary(a, length, n):
    g = build_grid(DomainSpec.interval(a, a + length, n))
    d = g.distance_to_boundary()
    assert np.all(d >= 0)
    assert np.all(d[g.boundary_nodes] == 0)
    assert d.max() <= length / 2 + 1e-12


@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 5), st.integers(8, 24), st.sampled_from([8, 16, 24]))
def test_disk_distance_matches_radius(R, n_r, n_t):
    g = build_grid(DomainSpec.disk(R, n_r, n_t))
    np.testing.assert_allclose(g.distance_to_boundary(), R - np.hypot(*g.points.T), atol=1e-12)
    assert g.points[0].tolist() == [0.0, 0.0]
    assert math.isclose(g.spacing[1], 2 * math.pi / n_t)
