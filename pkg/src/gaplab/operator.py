"""Finite-difference / finite-volume assembly of -Laplacian + V.

Every discretization is written as W^{-1} K + V, with K a symmetric
edge-conductance (stiffness) matrix and W the diagonal of nodal quadrature
weights.  The stored matrix is the similarity transform

    S = W^{-1/2} K W^{-1/2} + diag(V),

which is plainly symmetric and has the same spectrum; grid functions are
recovered as u = W^{-1/2} y.  For the 1D/rectangle Neumann case W carries the
half-cells at the boundary, which is exactly the symmetrized ghost-node
reflection scheme.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError
from .geometry import DomainGrid
from .potential import PotentialField

BCS = ("dirichlet", "neumann")


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    matrix: sp.csr_matrix
    dofs: np.ndarray        # grid node index of each degree of freedom
    weights: np.ndarray     # quadrature weight of each dof
    bc: str
    grid: DomainGrid
    potential: np.ndarray   # V on the dofs

    @property
    def size(self):
        return self.matrix.shape[0]

    def to_grid(self, y):
        """Nodal values on the full grid (zero on eliminated Dirichlet nodes)."""
        out = np.zeros(self.grid.n_nodes)
        out[self.dofs] = np.asarray(y) / np.sqrt(self.weights)
        return out

    def from_grid(self, u):
        return np.asarray(u)[self.dofs] * np.sqrt(self.weights)

    def conductances(self):
        """Symmetric edge conductances K_ij (i < j, positive) between dofs."""
        off = sp.triu(self.matrix, k=1).tocoo()
        sw = np.sqrt(self.weights)
        return off.row, off.col, -off.data * sw[off.row] * sw[off.col]


def _stiffness_1d(n, h):
    e = np.ones(n - 1) / h
    K = sp.diags([np.r_[e, 0] + np.r_[0, e], -e, -e], [0, 1, -1], format="csr")
    mass = np.full(n, h)
    mass[[0, -1]] = h / 2
    return K, mass


def _cartesian(grid: DomainGrid):
    if grid.kind == "interval":
        return _stiffness_1d(grid.shape[0], grid.spacing[0])
    (nx, ny), (hx, hy) = grid.shape, grid.spacing
    Kx, mx = _stiffness_1d(nx, hx)
    Ky, my = _stiffness_1d(ny, hy)
    K = sp.kron(Kx, sp.diags(my)) + sp.kron(sp.diags(mx), Ky)
    return K.tocsr(), np.kron(mx, my)


def _polar(grid: DomainGrid):
    """Conservative polar finite volumes; the boundary ring owns a half cell."""
    n_r, n_t = grid.shape
    dr, dt = grid.spacing
    R = grid.spec.radius
    N = grid.n_nodes
    k = np.arange(n_t)
    rows, cols, vals = [], [], []

    def edge(a, b, c):
        rows.append(a)
        cols.append(b)
        vals.append(c)

    # centre <-> first ring: flux through r = dr/2
    edge(np.zeros(n_t, int), grid.ring_index(1, k), np.full(n_t, dt / 2))
    for j in range(1, n_r):
        edge(grid.ring_index(j, k), grid.ring_index(j + 1, k), np.full(n_t, (j + 0.5) * dr * dt / dr))
    for j in range(1, n_r + 1):
        if j < n_r:
            c = dr / (j * dr * dt)
        else:
            c = (dr / 2) / ((R - dr / 4) * dt)
        edge(grid.ring_index(j, k), grid.ring_index(j, k + 1), np.full(n_t, c))
    r_, c_, v_ = (np.concatenate(a) for a in (rows, cols, vals))
    C = sp.coo_matrix((v_, (r_, c_)), shape=(N, N))
    C = (C + C.T).tocsr()
    K = (sp.diags(np.asarray(C.sum(axis=1)).ravel()) - C).tocsr()
    mass = np.empty(N)
    mass[0] = np.pi * dr**2 / 4
    for j in range(1, n_r):
        mass[grid.ring_index(j, k)] = j * dr * dr * dt
    mass[grid.ring_index(n_r, k)] = dt * dr * (R - dr / 4) / 2
    return K, mass


def assemble(grid: DomainGrid, field: PotentialField, bc: str) -> DiscreteOperator:
    if bc not in BCS:
        raise ConfigError(f"unknown boundary condition {bc!r}")
    V = np.asarray(field.values, float)
    if V.shape != (grid.n_nodes,):
        raise ConfigError(f"potential has {V.size} values, grid has {grid.n_nodes} nodes")
    if grid.kind == "disk" and bc == "neumann" and grid.shape[1] < 8:
        raise ConfigError("Neumann on the disk needs at least 8 angular nodes")
    K, mass = _polar(grid) if grid.kind == "disk" else _cartesian(grid)
    dofs = grid.interior_nodes if bc == "dirichlet" else np.arange(grid.n_nodes)
    # restricting K to interior rows keeps the boundary conductances on the diagonal: u = 0 there
    K = K[dofs][:, dofs]
    w = mass[dofs]
    s = 1.0 / np.sqrt(w)
    S = sp.diags(s) @ K @ sp.diags(s) + sp.diags(V[dofs])
    S = ((S + S.T) * 0.5).tocsr()
    S.sum_duplicates()
    S.sort_indices()
    return DiscreteOperator(S, dofs, w, bc, grid, V[dofs])


def apply(op: DiscreteOperator, v):
    v = np.asarray(v, float)
    if v.shape != (op.size,):
        raise ValueError(f"vector of length {v.size} does not match operator size {op.size}")
    return op.matrix @ v


def dump_matrix(op: DiscreteOperator, path):
    """Write one 'row col value' line per nonzero, 0-based, sorted by (row, col)."""
    A = op.matrix.tocoo()
    order = np.lexsort((A.col, A.row))
    with open(path, "w") as fh:
        for i, j, v in zip(A.row[order], A.col[order], A.data[order]):
            fh.write(f"{i} {j} {v:.17g}\n")
