import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaplab.eigen import smallest_two
from gaplab.errors import DomainError, ExtrapolationUnstable, HypothesisFailed
from gaplab.gap import (Check, assemble_report, gap_lower_bounds, gradient_check_barrier, gradient_check_beta,
                        lemma1_check, maximize_thm1, proof_gradient_checks, quotient, quotient_residual, theta,
                        thm32_bound)
from gaplab.geometry import DomainSpec, build_grid, metrics
from gaplab.groundstate import hessian_extrema, log_ground_state, tol_check
from gaplab.operator import assemble
from gaplab.potential import PotentialSpec, sample

SQ2 = math.sqrt(2)


def pipeline(spec, pot=PotentialSpec(), bc="dirichlet", delta=1e-6):
    g = build_grid(spec)
    f = sample(pot, g)
    s = smallest_two(assemble(g, f, bc))
    return g, f, s, log_ground_state(s, g, delta), quotient(s, g)


def test_quotient_sine_closed_form():
    g, f, s, gsl, q = pipeline(DomainSpec.interval(0, 1, 513))
    x = g.points[:, 0]
    np.testing.assert_allclose(q.u, 2 * np.cos(np.pi * x), atol=1e-6)
    assert q.sup_abs == pytest.approx(2, rel=1e-6)
    np.testing.assert_allclose(q.nodal_points[:, 0], [0.5], atol=1e-9)
    assert lemma1_check(q, g) <= 20 * g.h**2


def test_quotient_harmonic_is_linear():
    g, f, s, gsl, q = pipeline(DomainSpec.interval(-8, 8, 1025), PotentialSpec("harmonic", c=2.0))
    m = q.reliable
    x = g.points[m, 0]
    slope = np.polyfit(x, q.u[m], 1)[0]
    np.testing.assert_allclose(q.u[m], slope * x, atol=1e-2 * np.abs(q.u[m]).max())
    # the wall is out of reach of the reliable region
    assert math.isnan(lemma1_check(q, g))


def test_quotient_double_well_is_odd():
    g, f, s, gsl, q = pipeline(DomainSpec.interval(-3, 3, 385), PotentialSpec("double_well", a4=1, a2=-2), "neumann")
    np.testing.assert_allclose(q.u, -q.u[::-1], atol=1e-8)
    np.testing.assert_allclose(q.nodal_points[:, 0], [0.0], atol=1e-9)


def test_neumann_lemma1_trivial():
    g, f, s, gsl, q = pipeline(DomainSpec.interval(0, 1, 257), bc="neumann")
    assert lemma1_check(q, g) < 20 * g.h**2


def test_extrapolation_guard(monkeypatch):
    import gaplab.gap as gp
    monkeypatch.setattr(gp, "EXTRAP_LIMIT", 1e-12)
    g = build_grid(DomainSpec.interval(0, 1, 65))
    s = smallest_two(assemble(g, sample(PotentialSpec(), g), "dirichlet"))
    with pytest.raises(ExtrapolationUnstable):
        quotient(s, g)


def test_quotient_residual_closed_form():
    g, f, s, gsl, q = pipeline(DomainSpec.interval(0, 1, 513), delta=0.1)
    assert quotient_residual(q, gsl, s.gap) < 0.1


def test_quotient_residual_trivial_neumann():
    g, f, s, gsl, q = pipeline(DomainSpec.interval(0, 1, 257), bc="neumann")
    x = g.points[:, 0]
    assert quotient_residual(q, gsl, s.gap) < 2 * np.max(np.abs(np.pi**2 * np.cos(np.pi * x))) * g.h**2


def test_theta_values():
    assert theta(SQ2 / 2) == pytest.approx(math.pi / 4)
    assert theta(1e-12) == pytest.approx(math.pi / 2, abs=1e-5)
    assert theta(SQ2 - 1e-12) == pytest.approx(0.0, abs=1e-5)
    for bad in (0.0, SQ2, -1.0, 2.0):
        with pytest.raises(DomainError):
            theta(bad)


def test_theta_monotone():
    b = np.linspace(0, SQ2, 1002)[1:-1]
    t = theta(b)
    assert np.all(np.diff(t) < 0) and np.all((t > 0) & (t < math.pi / 2))


def test_thm1_large_diameter():
    beta, val = maximize_thm1(2.0, 16.0)
    assert SQ2 - 1e-3 < beta < SQ2
    assert (SQ2 - 1e-4) * SQ2 <= val <= 2.0


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 20), st.floats(0.1, 30))
def test_thm1_maximum_dominates_samples(c, d):
    beta, val = maximize_thm1(c, d)
    b = np.linspace(0, SQ2, 401)[1:-1]
    samples = theta(b) ** 2 / d**2 + b * math.sqrt(c)
    assert val >= samples.max() - 1e-9
    assert 0 < beta < SQ2


def test_thm1_tends_to_linear_term():
    assert maximize_thm1(2.0, 1e4)[1] == pytest.approx(2.0, rel=1e-6)


def test_thm32_formula():
    assert thm32_bound(0.0, 1.0) == 2.0
    for a, d, s in ((0.3, 2.0, 3.0), (1.0, 1.5, 0.5)):
        assert thm32_bound(a, s * d) == pytest.approx(thm32_bound(a * s * s, d) / s**2, rel=1e-12)


def test_bounds_harmonic():
    g, f, s, gsl, q = pipeline(DomainSpec.interval(-8, 8, 1025), PotentialSpec("harmonic", c=2.0))
    hm = hessian_extrema(gsl)[0]
    b = gap_lower_bounds(metrics(g), 2.0, hm, s.gap, "dirichlet", g.h)
    assert b["bound_universal"].bound == pytest.approx(2.0)
    assert b["bound_universal"].status == "PASS" and abs(b["bound_universal"].margin) < 1e-3
    assert b["bound_thm1"].status == "PASS"
    assert not b["bound_thm32"].blocking


def test_bounds_inapplicable_without_convexity():
    b = gap_lower_bounds(metrics(build_grid(DomainSpec.interval(0, 1, 9))), 0.0, 0.0, 29.6, "dirichlet", 1 / 8)
    assert b["bound_universal"].status == b["bound_thm1"].status == "SKIPPED"
    assert b["bound_thm32"].bound == 2.0 and b["bound_thm32"].margin == pytest.approx(27.6)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 5), st.floats(0.5, 3), st.floats(0.25, 4), st.floats(0, 2))
def test_bound_scaling_covariance(c, d, s, a):
    # x -> s x and V -> V / s^2 scale c by 1/s^4, a by 1/s^2 and the gap by 1/s^2
    base = maximize_thm1(c, d)[1]
    scaled = maximize_thm1(c / s**4, s * d)[1]
    assert scaled == pytest.approx(base / s**2, rel=1e-8)
    assert math.sqrt(2 * c / s**4) == pytest.approx(math.sqrt(2 * c) / s**2)
    assert thm32_bound(a / s**2, s * d) == pytest.approx(thm32_bound(a, d) / s**2, rel=1e-12)


def test_gradient_beta_harmonic():
    g, f, s, gsl, q = pipeline(DomainSpec.interval(-8, 8, 1025), PotentialSpec("harmonic", c=2.0))
    assert gradient_check_beta(q, gsl, s.gap, 2.0, 1.0) <= tol_check(g.h)
    with pytest.raises(HypothesisFailed):
        gradient_check_beta(q, gsl, s.gap, 0.0)


def test_gradient_barrier_direct_evaluation():
    # u = cos(pi x) on [0, 1], c = 1 + eps: the barrier quantity is available in closed form
    g, f, s, gsl, q = pipeline(DomainSpec.interval(0, 1, 513), bc="neumann")
    eps, gap = 1.0, s.gap
    measured = gradient_check_barrier(q, gsl, gap, 0.0, eps)
    x = g.points[gsl.nodes, 0]
    u = np.cos(np.pi * x)
    keep = q.u[gsl.nodes] > 0  # same node set as the measured side
    lhs = np.pi * np.abs(np.sin(np.pi * x[keep])) / (1 + eps - u[keep])
    rhs = math.sqrt(4 * gap) * np.sqrt(np.log(1 + eps) - np.log(1 + eps - u[keep]))
    assert measured == pytest.approx(np.max(lhs - rhs), rel=1e-3)
    g, f, s, gsl, q = pipeline(DomainSpec.interval(0, 1, 65))
    with pytest.raises(HypothesisFailed):
        gradient_check_barrier(q, gsl, s.gap, 0.0, eps)


def test_proof_checks_gate():
    g, f, s, gsl, q = pipeline(DomainSpec.interval(0, 1, 129))
    out = proof_gradient_checks(q, gsl, s.gap, 0.0, 0.0)
    assert out["grad_beta"].status == "SKIPPED" and out["grad_barrier"].status == "SKIPPED"


def test_assemble_report_status():
    ok = Check("a", "PASS", 1, 0, 1)
    bad_advisory = Check("b", "FAIL", 0, 1, -1, blocking=False)
    assert assemble_report(1.0, [ok, bad_advisory]).status == "PASS"
    assert assemble_report(1.0, [ok, Check("c", "FAIL", 0, 1, -1)]).status == "FAIL"
