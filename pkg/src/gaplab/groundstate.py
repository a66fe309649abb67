"""phi = -log u1 and the checks built on it.

Covers the identity  lap(phi) = |grad phi|^2 - V + lambda1, the
log-concavity constant sqrt(c/2), the two-branch upper bound on lap(phi) for
Neumann problems, polar diagnostics on the disk, the radial growth estimate,
and the cutoff (rho^2 lap phi) diagnostic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .eigen import SpectrumResult
from .errors import EmptyMask, HypothesisFailed, NotADisk
from .fd import boundary_gradient, node_derivatives, polar_derivatives, stencil_valid
from .geometry import DomainGrid, DomainMetrics
from .potential import PotentialField

DEFAULT_DELTA = 1e-6


def tol_check(h):
    return 20 * h * h + 1e-6


@dataclass(frozen=True, eq=False)
class GroundStateLog:
    phi: np.ndarray        # -log(u1 / sup u1); +inf where u1 <= 0
    u: np.ndarray          # sup-normalized u1 on all nodes
    gradient: np.ndarray   # (N, dim), nan off the mask
    hessian: np.ndarray    # (N, dim, dim), nan off the mask
    laplacian: np.ndarray  # (N,), nan off the mask
    mask: np.ndarray       # (N,) bool
    delta: float
    grid: DomainGrid
    bc: str

    @property
    def nodes(self):
        return np.flatnonzero(self.mask)


def log_ground_state(spectrum: SpectrumResult, grid: DomainGrid, delta: float = DEFAULT_DELTA) -> GroundStateLog:
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    u = spectrum.nodal(1)
    u = u / u.max()
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = np.where(u > 0, -np.log(np.where(u > 0, u, 1.0)), np.inf)
    h = grid.h
    cand = np.flatnonzero(~grid.is_boundary & (grid.distance_to_boundary() >= 2 * h * (1 - 1e-9)) & (u >= delta))
    cand = cand[stencil_valid(u > 0, grid, cand)]
    if cand.size == 0:
        raise EmptyMask(f"no node with u1 >= {delta:g} sup u1 at distance >= 2h from the boundary")
    mask = np.zeros(grid.n_nodes, bool)
    mask[cand] = True
    dim = grid.dim
    grad = np.full((grid.n_nodes, dim), np.nan)
    hess = np.full((grid.n_nodes, dim, dim), np.nan)
    g, H = node_derivatives(phi, grid, cand)
    grad[cand], hess[cand] = g, H
    lap = np.trace(hess, axis1=1, axis2=2)
    return GroundStateLog(phi, u, grad, hess, lap, mask, delta, grid, spectrum.operator.bc)


def phi_identity_residual(gsl: GroundStateLog, field: PotentialField, lambda1: float) -> float:
    m = gsl.nodes
    g = gsl.gradient[m]
    r = gsl.laplacian[m] - np.sum(g * g, axis=1) + field.values[m] - lambda1
    return float(np.max(np.abs(r)))


def hessian_extrema(gsl: GroundStateLog):
    """(min smallest Hessian eigenvalue, min diagonal entry) over the mask."""
    H = gsl.hessian[gsl.nodes]
    hess_min = float(np.min(np.linalg.eigvalsh(H)[:, 0]))
    hess_diag_min = float(np.min(np.diagonal(H, axis1=1, axis2=2)))
    return hess_min, hess_diag_min


@dataclass(frozen=True)
class LaplacianBound:
    max_laplacian: float
    boundary_grad_sq_max: float
    interior_bound: float          # sqrt(n sup(lap V)_+ / 2)
    boundary_bound: float          # sup_bdry (dV/dnu / kappa - V) + lambda1; nan without curvature
    bound: float
    margin: float
    curvature_available: bool
    stated_prefactor_bound: float  # (n/2) sqrt(sup (lap V)_+), the alternative constant


def laplacian_bounds_check(gsl: GroundStateLog, field: PotentialField, metrics: DomainMetrics,
                           lambda1: float) -> LaplacianBound:
    if gsl.bc != "neumann":
        raise HypothesisFailed("the lap(phi) upper bound is stated for Neumann problems")
    n = gsl.grid.dim
    sup_pos = max(field.sup_laplacian, 0.0)
    B1 = math.sqrt(n * sup_pos / 2)
    bn = gsl.grid.boundary_nodes
    if metrics.curvature_min > 0:
        B2 = float(np.max(field.boundary_normal_derivative / metrics.curvature_min - field.values[bn])) + lambda1
        available = True
    else:
        B2, available = math.nan, False
    bound = B1 if not available else max(B1, B2)
    gb = boundary_gradient(gsl.phi, gsl.grid)
    bgrad = float(np.max(np.sum(gb * gb, axis=1)))
    max_lap = float(np.max(gsl.laplacian[gsl.nodes]))
    return LaplacianBound(max_lap, bgrad, B1, B2, bound, bound - max_lap, available,
                          0.5 * n * math.sqrt(sup_pos))


def _polar_potential(field: PotentialField, grid: DomainGrid):
    """V_r, r V_rr, r d_r(r V_r), V_tt per node from the Cartesian gradient/Hessian."""
    x = grid.points
    r = np.hypot(x[:, 0], x[:, 1])
    g, H = field.gradient, field.hessian
    xg = np.einsum("ni,ni->n", x, g)
    xHx = np.einsum("ni,nij,nj->n", x, H, x)
    t = np.column_stack([-x[:, 1], x[:, 0]])
    tHt = np.einsum("ni,nij,nj->n", t, H, t)
    safe = np.where(r > 0, r, 1.0)
    V_r = np.where(r > 0, xg / safe, 0.0)
    rV_rr = np.where(r > 0, xHx / safe, 0.0)
    return {"r": r, "V_r": V_r, "rV_rr": rV_rr, "r_dr_rV_r": xg + xHx, "V_tt": tHt - xg}


@dataclass(frozen=True)
class PolarDiagnostics:
    max_theta_laplacian: float     # max lap_theta phi (= d^2 phi / d theta^2 in the plane)
    max_theta_hessian: float       # max d^2 phi / d theta^2
    spherical_bound: float         # 1/8 + R sup (r V_tt)_+^{1/2}
    spherical_margin: float
    max_radial: float              # max r d_r (r d_r phi)
    radial_interior_bound: float   # sup sqrt((r V_rr / 2 + 2 r V_r + 2V - lambda1)_+)
    radial_boundary_bound: float   # (1/n) sup_bdry (-r^3 V_r - 2 r^2 (V - lambda1))
    radial_margin: float


def polar_diagnostics(gsl: GroundStateLog, field: PotentialField, grid: DomainGrid,
                      lambda1: float) -> PolarDiagnostics:
    if grid.kind != "disk":
        raise NotADisk("polar diagnostics need a disk grid")
    m = gsl.nodes
    p = polar_derivatives(gsl.phi, grid, m)
    r = np.hypot(grid.points[m, 0], grid.points[m, 1])
    max_tt = float(np.max(p["f_tt"]))
    radial = r * p["f_r"] + r * r * p["f_rr"]
    pv = _polar_potential(field, grid)
    R = grid.spec.radius
    n = grid.dim
    R213 = 0.125 + R * float(np.max(np.sqrt(np.maximum(pv["r"] * pv["V_tt"], 0.0))))
    V = field.values
    R217 = float(np.max(np.sqrt(np.maximum(0.5 * pv["rV_rr"] + 2 * pv["r"] * pv["V_r"] + 2 * V - lambda1, 0.0))))
    bn = grid.boundary_nodes
    rb = pv["r"][bn]
    R220 = float(np.max(-rb**3 * pv["V_r"][bn] - 2 * rb**2 * (V[bn] - lambda1))) / n
    max_rad = float(np.max(radial))
    return PolarDiagnostics(max_tt, max_tt, R213, R213 - max_tt, max_rad, R217, R220,
                            max(R217, R220) - max_rad)


def growth_check(gsl: GroundStateLog, field: PotentialField, grid: DomainGrid) -> float:
    """max_bdry(-2 phi) - max_mask(r d_r phi - 2 phi), the f = 0 growth estimate.

    Gated on r dV/dr >= 0 at every node; HypothesisFailed otherwise.
    """
    if grid.kind != "disk":
        raise NotADisk("the growth estimate is formulated on the disk")
    if gsl.bc != "neumann":
        raise HypothesisFailed("the growth estimate is stated for Neumann problems")
    rv = field.radial_derivative
    scale = max(1.0, float(np.max(np.abs(rv))))
    if np.any(rv < -1e-12 * scale):
        raise HypothesisFailed("dV/dr < 0 somewhere: the f = 0 growth estimate does not apply")
    m = gsl.nodes
    p = polar_derivatives(gsl.phi, grid, m)
    r = np.hypot(grid.points[m, 0], grid.points[m, 1])
    G = r * p["f_r"] - 2 * gsl.phi[m]
    return float(np.max(-2 * gsl.phi[grid.boundary_nodes]) - np.max(G))


def _distance_function(grid: DomainGrid):
    """rho, |grad rho|, lap rho for the distance-to-boundary function (a.e.)."""
    rho = grid.distance_to_boundary()
    grad_norm = np.ones(grid.n_nodes)
    if grid.kind == "disk":
        r = np.hypot(grid.points[:, 0], grid.points[:, 1])
        with np.errstate(divide="ignore"):
            lap = np.where(r > 0, -(grid.dim - 1) / np.where(r > 0, r, 1.0), -np.inf)
    else:
        lap = np.zeros(grid.n_nodes)
    return rho, grad_norm, lap


def cutoff_diagnostic(gsl: GroundStateLog, grid: DomainGrid, field: PotentialField, lambda1: float) -> dict:
    """sup rho^2 lap(phi) next to the four quantities that control it; no constant is asserted."""
    if gsl.bc != "dirichlet":
        return {"applicable": False, "reason": "needs a Dirichlet ground state"}
    m = gsl.nodes
    if grid.kind == "disk":
        m = m[m > 0]  # lap rho is singular at the centre
    rho, gnorm, lap_rho = _distance_function(grid)
    lapV = np.maximum(field.laplacian[m], 0.0)
    return {
        "applicable": True,
        "sup_rho2_lap_phi": float(np.max(rho[m] ** 2 * gsl.laplacian[m])),
        "sup_rho_lap_rho_minus_3grad2": float(np.max(rho[m] * lap_rho[m] - 3 * gnorm[m] ** 2)),
        "sup_grad_rho_sq": float(np.max(gnorm[m] ** 2)),
        "sup_rho2_sqrt_lapV": float(np.max(rho[m] ** 2 * np.sqrt(lapV))),
        "sup_grad_rho_sqrt_V_minus_lambda1": float(
            np.max(gnorm[m] * np.sqrt(np.maximum(field.values[m] - lambda1, 0.0)))),
    }


@dataclass
class PhiDiagnostics:
    hess_min: float
    hess_diag_min: float
    identity_residual: float
    laplacian: LaplacianBound | None = None
    polar: PolarDiagnostics | None = None
    growth_margin: float | None = None
    cutoff: dict = dc_field(default_factory=dict)
    skipped: dict = dc_field(default_factory=dict)   # check name -> reason
