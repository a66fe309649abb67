import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaplab.errors import ConfigError
from gaplab.geometry import DomainSpec, build_grid
from gaplab.potential import PotentialSpec, hessian_lb_numeric, sample

DISK = build_grid(DomainSpec.disk(1.0, 8, 16))
RECT = build_grid(DomainSpec.rectangle((-2, 2), (-1, 3), 17))
LINE = build_grid(DomainSpec.interval(-3, 3, 61))


def test_harmonic_metadata():
    f = sample(PotentialSpec("harmonic", c=2.0), RECT)
    assert f.hessian_lb == 2.0 and f.sup_laplacian == 4.0 and f.metadata_source == "analytic"
    np.testing.assert_allclose(f.values, np.sum(RECT.points**2, axis=1))


def test_radial_derivative_on_disk():
    f = sample(PotentialSpec("harmonic", c=2.0), DISK)
    r2 = np.sum(DISK.points**2, axis=1)
    np.testing.assert_allclose(f.radial_derivative, 2 * r2)
    np.testing.assert_allclose(f.boundary_normal_derivative, 2.0)


def test_double_well_bounds():
    f = sample(PotentialSpec("double_well", a4=1.0, a2=-4.0), LINE)
    assert f.hessian_lb == -8.0
    assert f.sup_laplacian == pytest.approx(12 * 9 - 8)


def test_random_smooth_is_seeded_and_sampled():
    a = sample(PotentialSpec("random_smooth", seed=3, amplitude=1.0, wavenumber=3), RECT)
    b = sample(PotentialSpec("random_smooth", seed=3, amplitude=1.0, wavenumber=3), RECT)
    np.testing.assert_array_equal(a.values, b.values)
    assert a.metadata_source == "sampled"


@pytest.mark.parametrize("spec", [
    dict(family="harmonic", c=-1.0), dict(family="harmonic"), dict(family="double_well", a4=1, a2=1),
    dict(family="nope"),
])
def test_invalid_parameters(spec):
    with pytest.raises(ConfigError):
        PotentialSpec(**spec)


def test_dimension_mismatch():
    with pytest.raises(ConfigError):
        sample(PotentialSpec("tilted", slope=(1.0,)), RECT)


def test_overflow_guard():
    with pytest.raises(ConfigError):
        sample(PotentialSpec("harmonic", c=1e10), build_grid(DomainSpec.interval(-1e3, 1e3, 11)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 1000), st.floats(0.1, 2.0))
def test_analytic_gradient_matches_finite_differences(seed, amp):
    spec = PotentialSpec("random_smooth", seed=seed, amplitude=amp, wavenumber=2)
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1, 1, (5, 2))
    V, g, H = spec.evaluate(x)
    e = 1e-6
    for i in range(2):
        dx = np.zeros(2)
        dx[i] = e
        gp_ = (spec.evaluate(x + dx)[0] - spec.evaluate(x - dx)[0]) / (2 * e)
        np.testing.assert_allclose(g[:, i], gp_, atol=1e-6)
        Hp = (spec.evaluate(x + dx)[1] - spec.evaluate(x - dx)[1]) / (2 * e)
        np.testing.assert_allclose(H[:, i], Hp, atol=1e-5)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.1, 5))
def test_numeric_hessian_bound_matches_analytic_for_quadratics(c):
    f = sample(PotentialSpec("harmonic", c=c), RECT)
    assert hessian_lb_numeric(f, RECT) == pytest.approx(c, rel=1e-8)
