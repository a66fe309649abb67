"""Second-order finite differences of nodal fields on a DomainGrid.

Interior derivatives are central differences; on the disk they are taken in
polar form and rotated to Cartesian components, with the centre node handled
through the Fourier modes 0, 1 and 2 of the first ring.  Boundary quantities
use one-sided second-order differences along the inward lattice line.
"""

import numpy as np

from .geometry import DomainGrid


def interior_stencil_nodes(grid: DomainGrid):
    """Nodes whose full central stencil exists (every non-boundary node)."""
    return grid.interior_nodes


def stencil_valid(valid, grid: DomainGrid, nodes):
    """True where every node touched by the derivative stencil at `nodes` is valid."""
    valid = np.asarray(valid, bool)
    nodes = np.asarray(nodes, dtype=int)
    if grid.kind == "interval":
        return valid[nodes - 1] & valid[nodes] & valid[nodes + 1]
    if grid.kind == "rectangle":
        ny = grid.shape[1]
        ok = np.ones(nodes.size, bool)
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                ok &= valid[nodes + di * ny + dj]
        return ok
    ok = np.ones(nodes.size, bool)
    ring = nodes > 0
    j, k = grid.lattice(nodes[ring])
    sub = np.ones(j.size, bool)
    for dj in (-1, 0, 1):
        for dk in (-1, 0, 1):
            jj = j + dj
            sub &= valid[np.where(jj == 0, 0, grid.ring_index(np.maximum(jj, 1), k + dk))]
    ok[ring] = sub
    ok[~ring] = valid[0] and bool(np.all(valid[grid.ring_index(1, np.arange(grid.shape[1]))]))
    return ok


def polar_derivatives(f, grid: DomainGrid, nodes):
    """Polar partials f_r, f_t, f_rr, f_tt, f_rt at disk nodes (zeros at the centre)."""
    f = np.asarray(f, float)
    nodes = np.asarray(nodes)
    dr, dth = grid.spacing
    out = {key: np.zeros(nodes.size) for key in ("f_r", "f_t", "f_rr", "f_tt", "f_rt")}
    ring = nodes > 0
    if not ring.any():
        return out
    j, k = grid.lattice(nodes[ring])

    def at(jj, kk):
        return np.where(jj == 0, f[0], f[grid.ring_index(np.maximum(jj, 1), kk)])

    c = at(j, k)
    up, dn = at(j + 1, k), at(j - 1, k)
    lf, rt = at(j, k - 1), at(j, k + 1)
    out["f_r"][ring] = (up - dn) / (2 * dr)
    out["f_rr"][ring] = (up - 2 * c + dn) / dr**2
    out["f_t"][ring] = (rt - lf) / (2 * dth)
    out["f_tt"][ring] = (rt - 2 * c + lf) / dth**2
    out["f_rt"][ring] = (at(j + 1, k + 1) - at(j + 1, k - 1) - at(j - 1, k + 1) + at(j - 1, k - 1)) / (4 * dr * dth)
    return out


def _disk_derivatives(f, grid, nodes):
    dr, _ = grid.spacing
    n_theta = grid.shape[1]
    grad = np.zeros((nodes.size, 2))
    hess = np.zeros((nodes.size, 2, 2))
    ring = nodes > 0
    if ring.any():
        p = polar_derivatives(f, grid, nodes[ring])
        r, th = grid.polar()
        r, th = r[nodes[ring]], th[nodes[ring]]
        er = np.column_stack([np.cos(th), np.sin(th)])
        et = np.column_stack([-np.sin(th), np.cos(th)])
        grad[ring] = p["f_r"][:, None] * er + (p["f_t"] / r)[:, None] * et
        h_rr = p["f_rr"]
        h_rt = p["f_rt"] / r - p["f_t"] / r**2
        h_tt = p["f_r"] / r + p["f_tt"] / r**2
        P = np.stack([er, et], axis=2)  # columns e_r, e_theta
        local = np.empty((r.size, 2, 2))
        local[:, 0, 0], local[:, 0, 1], local[:, 1, 0], local[:, 1, 1] = h_rr, h_rt, h_rt, h_tt
        hess[ring] = P @ local @ np.transpose(P, (0, 2, 1))
    if (~ring).any():
        th = grid.spacing[1] * np.arange(n_theta)
        f1 = f[grid.ring_index(1, np.arange(n_theta))]
        a1, b1 = 2 * np.mean(f1 * np.cos(th)), 2 * np.mean(f1 * np.sin(th))
        a2, b2 = 2 * np.mean(f1 * np.cos(2 * th)), 2 * np.mean(f1 * np.sin(2 * th))
        trace = 4 * (np.mean(f1) - f[0]) / dr**2
        diff = 4 * a2 / dr**2
        hxy = 2 * b2 / dr**2
        grad[~ring] = [a1 / dr, b1 / dr]
        hess[~ring] = [[(trace + diff) / 2, hxy], [hxy, (trace - diff) / 2]]
    return grad, hess


def node_derivatives(f, grid: DomainGrid, nodes):
    """Central-difference gradient (m, dim) and Hessian (m, dim, dim) at `nodes`.

    Every node must have its full stencil inside the grid.
    """
    f = np.asarray(f, float)
    nodes = np.asarray(nodes, dtype=int)
    if grid.kind == "interval":
        h, = grid.spacing
        fm, f0, fp = f[nodes - 1], f[nodes], f[nodes + 1]
        return ((fp - fm) / (2 * h))[:, None], ((fp - 2 * f0 + fm) / h**2)[:, None, None]
    if grid.kind == "rectangle":
        hx, hy = grid.spacing
        ny = grid.shape[1]
        F = lambda di, dj: f[nodes + di * ny + dj]  # noqa: E731
        c = F(0, 0)
        fx = (F(1, 0) - F(-1, 0)) / (2 * hx)
        fy = (F(0, 1) - F(0, -1)) / (2 * hy)
        fxx = (F(1, 0) - 2 * c + F(-1, 0)) / hx**2
        fyy = (F(0, 1) - 2 * c + F(0, -1)) / hy**2
        fxy = (F(1, 1) - F(1, -1) - F(-1, 1) + F(-1, -1)) / (4 * hx * hy)
        hess = np.empty((nodes.size, 2, 2))
        hess[:, 0, 0], hess[:, 0, 1], hess[:, 1, 0], hess[:, 1, 1] = fxx, fxy, fxy, fyy
        return np.column_stack([fx, fy]), hess
    return _disk_derivatives(f, grid, nodes)


def inward_lines(grid: DomainGrid):
    """For each boundary node: the three nodes stepping inward along the normal
    lattice direction, and that step length.  Rectangle corners get -1 rows."""
    bn = grid.boundary_nodes
    lines = -np.ones((bn.size, 3), dtype=int)
    step = np.full(bn.size, np.nan)
    if grid.kind == "interval":
        n, = grid.shape
        for row, b in enumerate(bn):
            s = 1 if b == 0 else -1
            lines[row] = b + s * np.arange(1, 4)
        step[:] = grid.spacing[0]
    elif grid.kind == "rectangle":
        nx, ny = grid.shape
        i, j = grid.lattice(bn)
        for row in range(bn.size):
            if grid.is_corner[bn[row]]:
                continue
            if i[row] in (0, nx - 1):
                s = 1 if i[row] == 0 else -1
                lines[row] = (i[row] + s * np.arange(1, 4)) * ny + j[row]
                step[row] = grid.spacing[0]
            else:
                s = 1 if j[row] == 0 else -1
                lines[row] = i[row] * ny + j[row] + s * np.arange(1, 4)
                step[row] = grid.spacing[1]
    else:
        n_r, _ = grid.shape
        _, k = grid.lattice(bn)
        for m in range(3):
            lines[:, m] = grid.ring_index(n_r - 1 - m, k)
        step[:] = grid.spacing[0]
    return lines, step


def normal_derivative(f, grid: DomainGrid, boundary_values=None):
    """Outward normal derivative per boundary node by one-sided second-order
    differences; nan at rectangle corners.  `boundary_values` overrides f on the
    boundary (e.g. extrapolated values)."""
    f = np.asarray(f, float)
    lines, step = inward_lines(grid)
    fb = f[grid.boundary_nodes] if boundary_values is None else np.asarray(boundary_values, float)
    ok = lines[:, 0] >= 0
    out = np.full(lines.shape[0], np.nan)
    L = lines[ok]
    out[ok] = (3 * fb[ok] - 4 * f[L[:, 0]] + f[L[:, 1]]) / (2 * step[ok])
    return out


def extrapolate_to_boundary(f, grid: DomainGrid):
    """Quadratic and linear extrapolants of f onto every boundary node from the
    inward line (nan at rectangle corners)."""
    f = np.asarray(f, float)
    lines, _ = inward_lines(grid)
    ok = lines[:, 0] >= 0
    quad = np.full(lines.shape[0], np.nan)
    lin = np.full(lines.shape[0], np.nan)
    L = lines[ok]
    f1, f2, f3 = f[L[:, 0]], f[L[:, 1]], f[L[:, 2]]
    quad[ok] = 3 * f1 - 3 * f2 + f3
    lin[ok] = 2 * f1 - f2
    return quad, lin


def boundary_gradient(f, grid: DomainGrid):
    """Full gradient on boundary nodes: one-sided along the normal, central along the boundary."""
    f = np.asarray(f, float)
    bn = grid.boundary_nodes
    if grid.kind == "interval":
        return normal_derivative(f, grid)[:, None] * grid.normals[bn]
    if grid.kind == "rectangle":
        hx, hy = grid.spacing
        F = f.reshape(grid.shape)
        out = []
        for axis, h in ((0, hx), (1, hy)):
            G = np.moveaxis(F, axis, 0)
            D = np.empty_like(G)
            D[1:-1] = (G[2:] - G[:-2]) / (2 * h)
            D[0] = (-3 * G[0] + 4 * G[1] - G[2]) / (2 * h)
            D[-1] = (3 * G[-1] - 4 * G[-2] + G[-3]) / (2 * h)
            out.append(np.moveaxis(D, 0, axis).ravel()[bn])
        return np.column_stack(out)
    n_r, n_theta = grid.shape
    dr, dth = grid.spacing
    R = grid.spec.radius
    k = np.arange(n_theta)
    fr = (3 * f[grid.ring_index(n_r, k)] - 4 * f[grid.ring_index(n_r - 1, k)]
          + f[grid.ring_index(n_r - 2, k)]) / (2 * dr)
    ft = (f[grid.ring_index(n_r, k + 1)] - f[grid.ring_index(n_r, k - 1)]) / (2 * dth)
    th = dth * k
    er = np.column_stack([np.cos(th), np.sin(th)])
    et = np.column_stack([-np.sin(th), np.cos(th)])
    return fr[:, None] * er + (ft / R)[:, None] * et
