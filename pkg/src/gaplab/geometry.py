"""Discretized convex domains: interval, rectangle and disk.

Lattice conventions
-------------------
interval   nodes x_i = a + i*h, i = 0..n-1, h = (b - a)/(n - 1).
rectangle  nodes (x_i, y_j) on an n_x-by-n_y lattice, flat index i*n_y + j.
disk       node 0 is the centre; ring nodes r_j = j*dr (j = 1..n_r, dr = R/n_r)
           at angles theta_k = k*dtheta (k = 0..n_theta-1), flat index
           1 + (j - 1)*n_theta + k.  The ring j = n_r is the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

KINDS = ("interval", "rectangle", "disk")
MIN_RESOLUTION = 8


@dataclass(frozen=True)
class DomainSpec:
    kind: str
    bounds: tuple = ()
    radius: float = 0.0
    resolution: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown domain kind {self.kind!r}")
        object.__setattr__(self, "bounds", tuple(tuple(float(v) for v in ab) for ab in self.bounds))
        object.__setattr__(self, "resolution", tuple(int(n) for n in self.resolution))
        object.__setattr__(self, "radius", float(self.radius))
        naxes = {"interval": 1, "rectangle": 2, "disk": 0}[self.kind]
        if len(self.bounds) != naxes:
            raise ConfigError(f"{self.kind} needs {naxes} axis bounds, got {len(self.bounds)}")
        for a, b in self.bounds:
            if not (math.isfinite(a) and math.isfinite(b)) or not b > a:
                raise ConfigError(f"degenerate extent [{a}, {b}]: need b > a")
        if self.kind == "disk" and not (math.isfinite(self.radius) and self.radius > 0):
            raise ConfigError(f"disk radius must be positive, got {self.radius}")
        want = 2 if self.kind == "disk" else naxes
        if len(self.resolution) != want:
            raise ConfigError(f"{self.kind} needs {want} resolution entries, got {len(self.resolution)}")

    @property
    def dim(self):
        return 1 if self.kind == "interval" else 2

    def diameter(self):
        if self.kind == "disk":
            return 2.0 * self.radius
        return math.sqrt(sum((b - a) ** 2 for a, b in self.bounds))

    @classmethod
    def interval(cls, a, b, n):
        return cls("interval", bounds=((a, b),), resolution=(n,))

    @classmethod
    def rectangle(cls, xb, yb, nx, ny=None):
        return cls("rectangle", bounds=(tuple(xb), tuple(yb)), resolution=(nx, nx if ny is None else ny))

    @classmethod
    def disk(cls, radius, n_r, n_theta):
        return cls("disk", radius=radius, resolution=(n_r, n_theta))


@dataclass(frozen=True, eq=False)
class DomainGrid:
    spec: DomainSpec
    points: np.ndarray          # (N, dim) node coordinates
    spacing: tuple              # (h,) | (hx, hy) | (dr, dtheta)
    is_boundary: np.ndarray     # (N,) bool
    normals: np.ndarray         # (N, dim); zero rows on interior nodes
    shape: tuple                # lattice shape; (n_r, n_theta) for the disk rings
    is_corner: np.ndarray = field(default=None)

    @property
    def kind(self):
        return self.spec.kind

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def n_nodes(self):
        return self.points.shape[0]

    @property
    def h(self):
        """Characteristic mesh width: largest Cartesian spacing, or dr on the disk."""
        if self.kind == "disk":
            return self.spacing[0]
        return max(self.spacing)

    @property
    def boundary_nodes(self):
        return np.flatnonzero(self.is_boundary)

    @property
    def interior_nodes(self):
        return np.flatnonzero(~self.is_boundary)

    # disk helpers -----------------------------------------------------------
    def ring_index(self, j, k):
        """Flat index of ring j (1-based) at angle index k (taken mod n_theta)."""
        n_theta = self.shape[1]
        return 1 + (np.asarray(j) - 1) * n_theta + np.mod(k, n_theta)

    def polar(self):
        """(r, theta) per node; the centre gets theta = 0."""
        x, y = self.points[:, 0], self.points[:, 1]
        return np.hypot(x, y), np.mod(np.arctan2(y, x), 2 * np.pi)

    def lattice(self, flat):
        """Lattice coordinates of flat node indices ((i,) or (i, j) or (j, k) on the disk)."""
        flat = np.asarray(flat)
        if self.kind == "disk":
            n_theta = self.shape[1]
            return (flat - 1) // n_theta + 1, (flat - 1) % n_theta
        return np.unravel_index(flat, self.shape)

    def distance_to_boundary(self):
        """Analytic distance from every node to the boundary of the continuous shape."""
        p = self.points
        if self.kind == "disk":
            return self.spec.radius - np.hypot(p[:, 0], p[:, 1])
        d = np.full(self.n_nodes, np.inf)
        for axis, (a, b) in enumerate(self.spec.bounds):
            d = np.minimum(d, np.minimum(p[:, axis] - a, b - p[:, axis]))
        return np.maximum(d, 0.0)


@dataclass(frozen=True)
class DomainMetrics:
    diameter: float
    curvature_min: float        # lower bound on principal curvatures of the boundary
    mean_curvature: np.ndarray  # per boundary node (aligned with grid.boundary_nodes); nan at corners


def _interval_grid(spec):
    (a, b), = spec.bounds
    n, = spec.resolution
    x = np.linspace(a, b, n)
    is_b = np.zeros(n, bool)
    is_b[[0, -1]] = True
    normals = np.zeros((n, 1))
    normals[0, 0], normals[-1, 0] = -1.0, 1.0
    return DomainGrid(spec, x[:, None], ((b - a) / (n - 1),), is_b, normals, (n,), np.zeros(n, bool))


def _rectangle_grid(spec):
    (ax, bx), (ay, by) = spec.bounds
    nx, ny = spec.resolution
    X, Y = np.meshgrid(np.linspace(ax, bx, nx), np.linspace(ay, by, ny), indexing="ij")
    points = np.column_stack([X.ravel(), Y.ravel()])
    I, J = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    I, J = I.ravel(), J.ravel()
    nrm = np.zeros_like(points)
    nrm[I == 0, 0] -= 1.0
    nrm[I == nx - 1, 0] += 1.0
    nrm[J == 0, 1] -= 1.0
    nrm[J == ny - 1, 1] += 1.0
    is_b = np.any(nrm != 0, axis=1)
    length = np.linalg.norm(nrm, axis=1)
    nrm[is_b] /= length[is_b, None]
    corner = np.isclose(length, math.sqrt(2.0))
    spacing = ((bx - ax) / (nx - 1), (by - ay) / (ny - 1))
    return DomainGrid(spec, points, spacing, is_b, nrm, (nx, ny), corner)


def _disk_grid(spec):
    R = spec.radius
    n_r, n_theta = spec.resolution
    dr, dth = R / n_r, 2 * np.pi / n_theta
    r = dr * np.arange(1, n_r + 1)
    th = dth * np.arange(n_theta)
    Rr, Th = np.meshgrid(r, th, indexing="ij")
    pts = np.column_stack([(Rr * np.cos(Th)).ravel(), (Rr * np.sin(Th)).ravel()])
    points = np.vstack([np.zeros((1, 2)), pts])
    n = points.shape[0]
    is_b = np.zeros(n, bool)
    is_b[1 + (n_r - 1) * n_theta:] = True
    normals = np.zeros((n, 2))
    normals[is_b] = np.column_stack([np.cos(th), np.sin(th)])
    return DomainGrid(spec, points, (dr, dth), is_b, normals, (n_r, n_theta), np.zeros(n, bool))


def build_grid(spec: DomainSpec, min_resolution: int = MIN_RESOLUTION) -> DomainGrid:
    """Lay the lattice for `spec` and classify its nodes.

    Resolutions below `min_resolution` nodes per axis are rejected; callers
    that need textbook-sized matrices (3 unknowns and so on) lower it
    explicitly.
    """
    if min(spec.resolution) < max(min_resolution, 3):
        raise ConfigError(
            f"resolution {spec.resolution} below minimum {max(min_resolution, 3)} nodes per axis")
    build = {"interval": _interval_grid, "rectangle": _rectangle_grid, "disk": _disk_grid}[spec.kind]
    return build(spec)


def metrics(grid: DomainGrid) -> DomainMetrics:
    spec = grid.spec
    nb = grid.boundary_nodes.size
    if spec.kind == "disk":
        # in the plane the mean curvature (trace of the second fundamental form) is 1/R
        return DomainMetrics(spec.diameter(), 1.0 / spec.radius, np.full(nb, 1.0 / spec.radius))
    H = np.zeros(nb)
    H[grid.is_corner[grid.boundary_nodes]] = np.nan
    return DomainMetrics(spec.diameter(), 0.0, H)


def refine(spec: DomainSpec) -> DomainSpec:
    """Halve the mesh width on every axis."""
    if spec.kind == "disk":
        n_r, n_theta = spec.resolution
        return DomainSpec.disk(spec.radius, 2 * n_r, 2 * n_theta)
    return DomainSpec(spec.kind, bounds=spec.bounds, resolution=tuple(2 * (n - 1) + 1 for n in spec.resolution))
