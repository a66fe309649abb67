"""Potential families, their analytic derivatives, and grid sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .fd import interior_stencil_nodes, node_derivatives
from .geometry import DomainGrid

FAMILIES = ("zero", "harmonic", "shifted_harmonic", "double_well", "tilted", "random_smooth")
OVERFLOW = 1e12


@dataclass(frozen=True)
class PotentialSpec:
    """A potential family with its parameters.

    harmonic          V = (c/2)|x|^2
    shifted_harmonic  V = (c/2)|x - center|^2
    double_well       V = sum_i (a4 x_i^4 + a2 x_i^2)
    tilted            V = slope . x
    random_smooth     V = amplitude * sum_k w_k cos(k . x + phase_k), 0 < |k| <= wavenumber
    """

    family: str = "zero"
    c: float = 0.0
    center: tuple = ()
    a4: float = 0.0
    a2: float = 0.0
    slope: tuple = ()
    seed: int = 0
    amplitude: float = 0.0
    wavenumber: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown potential family {self.family!r}")
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))
        object.__setattr__(self, "slope", tuple(float(v) for v in self.slope))
        if self.family in ("harmonic", "shifted_harmonic") and not self.c > 0:
            raise ConfigError(f"{self.family} needs c > 0, got {self.c}")
        if self.family == "double_well" and not (self.a4 > 0 and self.a2 < 0):
            raise ConfigError(f"double_well needs a4 > 0 and a2 < 0, got a4={self.a4}, a2={self.a2}")
        if self.family == "random_smooth" and (self.amplitude < 0 or self.wavenumber < 1):
            raise ConfigError("random_smooth needs amplitude >= 0 and wavenumber >= 1")

    # -- analytic evaluation ----------------------------------------------------
    def _vector(self, values, dim, name):
        if len(values) != dim:
            raise ConfigError(f"{self.family}: {name} has length {len(values)}, domain dimension is {dim}")
        return np.asarray(values, float)

    def _modes(self, dim):
        K = int(math.floor(self.wavenumber))
        rng = np.random.default_rng(self.seed)
        if dim == 1:
            ks = np.arange(1, K + 1, dtype=float)[:, None]
        else:
            grid = [(i, j) for i in range(0, K + 1) for j in range(-K, K + 1)
                    if 0 < i * i + j * j <= K * K and (i > 0 or j > 0)]
            ks = np.array(grid, float)
        weights = rng.standard_normal(len(ks)) / math.sqrt(len(ks))
        phases = rng.uniform(0.0, 2 * np.pi, len(ks))
        return ks, weights, phases

    def evaluate(self, x):
        """Return (V, grad V, Hess V) at points x of shape (N, dim)."""
        x = np.atleast_2d(np.asarray(x, float))
        n, dim = x.shape
        eye = np.eye(dim)
        fam = self.family
        if fam == "zero":
            return np.zeros(n), np.zeros((n, dim)), np.zeros((n, dim, dim))
        if fam in ("harmonic", "shifted_harmonic"):
            z = x - (self._vector(self.center, dim, "center") if fam == "shifted_harmonic" else 0.0)
            V = 0.5 * self.c * np.sum(z * z, axis=1)
            return V, self.c * z, np.broadcast_to(self.c * eye, (n, dim, dim)).copy()
        if fam == "double_well":
            V = np.sum(self.a4 * x**4 + self.a2 * x**2, axis=1)
            grad = 4 * self.a4 * x**3 + 2 * self.a2 * x
            hess = np.zeros((n, dim, dim))
            idx = np.arange(dim)
            hess[:, idx, idx] = 12 * self.a4 * x**2 + 2 * self.a2
            return V, grad, hess
        if fam == "tilted":
            s = self._vector(self.slope, dim, "slope")
            return x @ s, np.broadcast_to(s, (n, dim)).copy(), np.zeros((n, dim, dim))
        ks, w, ph = self._modes(dim)
        arg = x @ ks.T + ph
        cw, sw = np.cos(arg) * w, np.sin(arg) * w
        A = self.amplitude
        V = A * cw.sum(axis=1)
        grad = -A * sw @ ks
        hess = -A * np.einsum("nm,mi,mj->nij", cw, ks, ks)
        return V, grad, hess


@dataclass(frozen=True, eq=False)
class PotentialField:
    values: np.ndarray
    gradient: np.ndarray
    hessian: np.ndarray
    laplacian: np.ndarray
    hessian_lb: float
    sup_laplacian: float
    boundary_normal_derivative: np.ndarray  # aligned with grid.boundary_nodes
    radial_derivative: np.ndarray | None    # r dV/dr per node (disk only)
    metadata_source: str                    # "analytic" or "sampled"
    spec: PotentialSpec | None = None


def _axis_sq_range(grid):
    """Per-axis (min, max) of x_i^2 over the continuous domain."""
    spec = grid.spec
    if spec.kind == "disk":
        R = spec.radius
        return [(0.0, R * R)] * 2
    out = []
    for a, b in spec.bounds:
        lo = 0.0 if a <= 0.0 <= b else min(a * a, b * b)
        out.append((lo, max(a * a, b * b)))
    return out


def _analytic_bounds(spec, grid, hess_nodes, lap_nodes):
    """(hessian_lb, sup_laplacian, source) over the continuous domain where closed forms exist."""
    n = grid.dim
    fam = spec.family
    if fam in ("zero", "tilted"):
        return 0.0, 0.0, "analytic"
    if fam in ("harmonic", "shifted_harmonic"):
        return float(spec.c), float(n * spec.c), "analytic"
    if fam == "double_well":
        rng = _axis_sq_range(grid)
        lb = min(12 * spec.a4 * lo + 2 * spec.a2 for lo, _ in rng)
        if grid.kind == "disk":
            # max of sum_i x_i^2 over the disk is R^2
            sup = 12 * spec.a4 * grid.spec.radius**2 + 2 * n * spec.a2
        else:
            sup = sum(12 * spec.a4 * hi + 2 * spec.a2 for _, hi in rng)
        return float(lb), float(sup), "analytic"
    lb = float(np.min(np.linalg.eigvalsh(hess_nodes)[:, 0]))
    return lb, float(np.max(lap_nodes)), "sampled"


def sample(spec: PotentialSpec, grid: DomainGrid) -> PotentialField:
    V, grad, hess = spec.evaluate(grid.points)
    if not np.all(np.isfinite(V)) or np.max(np.abs(V), initial=0.0) > OVERFLOW:
        raise ConfigError(f"potential exceeds overflow threshold {OVERFLOW:g} on this grid")
    lap = np.trace(hess, axis1=1, axis2=2)
    lb, sup, source = _analytic_bounds(spec, grid, hess, lap)
    bn = grid.boundary_nodes
    dVdn = np.einsum("ni,ni->n", grad[bn], grid.normals[bn])
    radial = np.einsum("ni,ni->n", grad, grid.points) if grid.kind == "disk" else None
    return PotentialField(V, grad, hess, lap, lb, sup, dVdn, radial, source, spec)


def hessian_lb_numeric(field: PotentialField, grid: DomainGrid) -> float:
    """Smallest eigenvalue of the central-difference Hessian of V, minimised over nodes
    whose stencil lies inside the grid."""
    nodes = interior_stencil_nodes(grid)
    _, H = node_derivatives(field.values, grid, nodes)
    return float(np.min(np.linalg.eigvalsh(H)[:, 0]))
