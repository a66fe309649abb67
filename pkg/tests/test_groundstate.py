import math

import numpy as np
import pytest

from gaplab.eigen import smallest_two
from gaplab.errors import EmptyMask, HypothesisFailed, NotADisk
from gaplab.geometry import DomainSpec, build_grid, metrics
from gaplab.groundstate import (cutoff_diagnostic, growth_check, hessian_extrema, laplacian_bounds_check,
                                log_ground_state, phi_identity_residual, polar_diagnostics, tol_check)
from gaplab.operator import assemble
from gaplab.potential import PotentialSpec, sample


def pipeline(spec, pot=PotentialSpec(), bc="dirichlet", delta=1e-6):
    g = build_grid(spec)
    f = sample(pot, g)
    s = smallest_two(assemble(g, f, bc))
    return g, f, s, log_ground_state(s, g, delta)


def test_sine_ground_state():
    g, f, s, gsl = pipeline(DomainSpec.interval(0, 1, 513))
    x = g.points[:, 0]
    mid = 256
    assert gsl.phi[mid] == pytest.approx(0.0, abs=1e-12)
    assert gsl.hessian[mid, 0, 0] == pytest.approx(math.pi**2, rel=1e-4)
    m = gsl.nodes
    np.testing.assert_allclose(gsl.phi[m], -np.log(np.sin(np.pi * x[m])), atol=1e-9)
    assert np.all(g.distance_to_boundary()[m] >= 2 * g.h - 1e-12)


def test_constant_ground_state():
    g, f, s, gsl = pipeline(DomainSpec.interval(0, 1, 65), bc="neumann")
    m = gsl.nodes
    assert np.abs(gsl.phi[m]).max() < 1e-10
    assert np.abs(gsl.hessian[m]).max() < 1e-5
    assert phi_identity_residual(gsl, f, s.lambda1) < 1e-5
    assert hessian_extrema(gsl)[0] == pytest.approx(0.0, abs=1e-5)


def test_gaussian_ground_state():
    g, f, s, gsl = pipeline(DomainSpec.interval(-8, 8, 1025), PotentialSpec("harmonic", c=2.0))
    m = gsl.nodes
    np.testing.assert_allclose(gsl.hessian[m, 0, 0], 1.0, atol=2e-3)
    hm, hd = hessian_extrema(gsl)
    assert hm <= hd
    assert hd >= math.sqrt(2.0 / 2) - tol_check(g.h)


def test_mask_rules():
    with pytest.raises(ValueError):
        pipeline(DomainSpec.interval(0, 1, 65), delta=1.0)
    # four nodes: no interior node sits 2h away from the wall
    g = build_grid(DomainSpec.interval(0, 1, 4), min_resolution=3)
    s = smallest_two(assemble(g, sample(PotentialSpec(), g), "dirichlet"))
    with pytest.raises(EmptyMask):
        log_ground_state(s, g)


def test_identity_residual_harmonic():
    runs = [pipeline(DomainSpec.interval(-8, 8, n), PotentialSpec("harmonic", c=2.0)) for n in (1025, 2049)]
    res = [phi_identity_residual(gsl, f, s.lambda1) for g, f, s, gsl in runs]
    # the three-point eigen-relation leaves h^2 (x^4/12 - x^2/2) at leading order, largest at the mask edge
    g, _, _, gsl = runs[0]
    x = np.abs(g.points[gsl.nodes, 0]).max()
    assert res[0] == pytest.approx(g.h**2 * (x**4 / 12 - x**2 / 2), rel=0.05)
    assert 3.5 <= res[0] / res[1] <= 4.5


def test_identity_residual_fixed_region_on_sine():
    # the closed form phi = -log sin(pi x) is singular at the wall, so compare on a fixed region
    res = [phi_identity_residual(gsl, f, s.lambda1)
           for g, f, s, gsl in (pipeline(DomainSpec.interval(0, 1, n), delta=0.5) for n in (257, 513, 1025))]
    orders = np.log2(np.array(res[:-1]) / res[1:])
    assert np.all(orders >= 1.8)


def test_hess_min_monotone_in_delta():
    g = build_grid(DomainSpec.interval(-6, 6, 769))
    f = sample(PotentialSpec("double_well", a4=0.25, a2=-1.0), g)
    s = smallest_two(assemble(g, f, "dirichlet"))
    prev = -np.inf
    for delta in (1e-1, 1e-3, 1e-6):
        hm = hessian_extrema(log_ground_state(s, g, delta))[0]
        assert hm <= (prev if np.isfinite(prev) else np.inf) + tol_check(g.h)
        prev = hm


def test_laplacian_bound_disk_zero_potential():
    g, f, s, gsl = pipeline(DomainSpec.disk(1, 16, 32), bc="neumann")
    lb = laplacian_bounds_check(gsl, f, metrics(g), s.lambda1)
    assert lb.interior_bound == 0
    assert lb.max_laplacian <= lb.bound + 1e-6


def test_laplacian_bound_shifted_harmonic_disk():
    g, f, s, gsl = pipeline(DomainSpec.disk(1, 32, 64), PotentialSpec("shifted_harmonic", c=2.0, center=(0, 0)),
                            bc="neumann")
    lb = laplacian_bounds_check(gsl, f, metrics(g), s.lambda1)
    assert lb.interior_bound == pytest.approx(2.0)
    assert lb.max_laplacian <= lb.bound + tol_check(g.h)


def test_laplacian_bound_flat_boundary_interior_only():
    g, f, s, gsl = pipeline(DomainSpec.interval(-3, 3, 385), PotentialSpec("double_well", a4=1, a2=-1), "neumann")
    lb = laplacian_bounds_check(gsl, f, metrics(g), s.lambda1)
    assert not lb.curvature_available and math.isnan(lb.boundary_bound)
    assert lb.bound == lb.interior_bound
    assert lb.margin == pytest.approx(lb.bound - lb.max_laplacian)


def test_laplacian_bound_needs_neumann():
    g, f, s, gsl = pipeline(DomainSpec.interval(0, 1, 65))
    with pytest.raises(HypothesisFailed):
        laplacian_bounds_check(gsl, f, metrics(g), s.lambda1)


def test_polar_radial_potential():
    g, f, s, gsl = pipeline(DomainSpec.disk(1, 16, 32), PotentialSpec("harmonic", c=2.0), "neumann")
    pd = polar_diagnostics(gsl, f, g, s.lambda1)
    assert abs(pd.max_theta_hessian) < 1e-8
    assert pd.spherical_bound == 0.125 and pd.spherical_margin > 0


def test_polar_zero_potential_and_tilted():
    g, f, s, gsl = pipeline(DomainSpec.disk(1, 16, 32), bc="neumann")
    pd = polar_diagnostics(gsl, f, g, s.lambda1)
    assert abs(pd.max_radial) < 1e-8 and abs(pd.max_theta_hessian) < 1e-8
    g, f, s, gsl = pipeline(DomainSpec.disk(1, 16, 32), PotentialSpec("tilted", slope=(1.0, 0.0)), "neumann")
    pd = polar_diagnostics(gsl, f, g, s.lambda1)
    assert all(math.isfinite(v) for v in vars(pd).values())
    with pytest.raises(NotADisk):
        polar_diagnostics(gsl, f, build_grid(DomainSpec.interval(0, 1, 9)), 0.0)


def test_growth_zero_potential_and_gate():
    g, f, s, gsl = pipeline(DomainSpec.disk(1, 16, 32), bc="neumann")
    assert abs(growth_check(gsl, f, g)) < 1e-10
    g, f, s, gsl = pipeline(DomainSpec.disk(1, 16, 32), PotentialSpec("tilted", slope=(1.0, 0.0)), "neumann")
    with pytest.raises(HypothesisFailed):
        growth_check(gsl, f, g)


def test_cutoff_diagnostic():
    g, f, s, gsl = pipeline(DomainSpec.interval(0, 1, 513))
    rec = cutoff_diagnostic(gsl, g, f, s.lambda1)
    x = g.points[gsl.nodes, 0]
    rho = np.minimum(x, 1 - x)
    assert rec["sup_rho2_lap_phi"] == pytest.approx(np.max(rho**2 * math.pi**2 / np.sin(math.pi * x) ** 2), rel=1e-3)
    assert rec["sup_grad_rho_sq"] == 1.0
    g, f, s, gsl = pipeline(DomainSpec.interval(0, 1, 65), bc="neumann")
    assert not cutoff_diagnostic(gsl, g, f, s.lambda1)["applicable"]
    g, f, s, gsl = pipeline(DomainSpec.interval(-8, 8, 513), PotentialSpec("harmonic", c=2.0))
    rec = cutoff_diagnostic(gsl, g, f, s.lambda1)
    assert all(math.isfinite(v) for k, v in rec.items() if k != "applicable")
