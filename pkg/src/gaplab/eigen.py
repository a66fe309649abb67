"""Two lowest eigenpairs, a dense brute-force oracle, and the weighted gap quotient."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import NearDegenerateWarning, NoConvergence, PositivityWarning, ZeroDenominator
from .geometry import DomainGrid
from .operator import DiscreteOperator

ORACLE_MAX = 2000
BLOCK = 8


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    lambda1: float
    lambda2: float
    u1: np.ndarray          # unit 2-norm eigenvectors of the symmetric matrix (dof space)
    u2: np.ndarray
    residuals: tuple        # ||A u_i - lambda_i u_i||_2
    iterations: tuple       # iteration at which each pair met the tolerance
    operator: DiscreteOperator
    near_degenerate: bool = False
    positive: bool = True
    normalization: str = "unit 2-norm in the weighted inner product; u1 max entry > 0"

    @property
    def gap(self):
        return self.lambda2 - self.lambda1

    def nodal(self, which=1):
        """Grid function of eigenvector 1 or 2 on all grid nodes."""
        return self.operator.to_grid(self.u1 if which == 1 else self.u2)


def gershgorin_lower(A):
    A = sp.csr_matrix(A)
    d = A.diagonal()
    off = np.asarray(abs(A).sum(axis=1)).ravel() - np.abs(d)
    return float(np.min(d - off))


def _fix_signs(u1, u2, op, floor=1e-6):
    if u1[np.argmax(np.abs(u1))] < 0:
        u1 = -u1
    # only trust u2/u1 where u1 is well above round-off
    w = np.sqrt(op.weights)
    g1, g2 = u1 / w, u2 / w
    reliable = g1 >= floor * g1.max()
    q = np.zeros_like(g1)
    q[reliable] = g2[reliable] / g1[reliable]
    mag = np.abs(q)
    first = np.flatnonzero(mag >= (1 - 1e-8) * mag.max())[0]
    if q[first] < 0:
        u2 = -u2
    return u1, u2


def smallest_two(op: DiscreteOperator, tol: float = 1e-10, max_iter: int = 10000,
                 seed: int = 24029) -> SpectrumResult:
    """Two smallest eigenpairs by shift-invert block iteration with Rayleigh-Ritz.

    The initial shift sits one unit below the larger of the Gershgorin bound
    and min V (both lower bounds), so A - sigma*I is positive definite; it is moved next to lambda1 once both residuals drop
    below 0.1 (relative), which is a single re-factorization.  A pair counts as converged when
    its residual is at most tol * max(1, |lambda|), or at the attainable floor
    64 * eps * ||A||_inf for very fine grids.
    """
    A = op.matrix
    N = A.shape[0]
    if N < 2:
        raise ValueError("need at least two degrees of freedom")
    if not tol > 0:
        raise ValueError("tol must be positive")
    p = min(N, BLOCK)
    # K is positive semidefinite, so min V bounds the spectrum from below as well
    lower = gershgorin_lower(A)
    if isinstance(op, DiscreteOperator) and op.potential.size:
        lower = max(lower, float(np.min(op.potential)))
    sigma = lower - 1.0
    I = sp.identity(N, format="csc")
    lu = splu(sp.csc_matrix(A - sigma * I))
    refined = False
    rng = np.random.default_rng(seed)
    X, _ = np.linalg.qr(rng.standard_normal((N, p)))
    floor = 64 * np.finfo(float).eps * float(abs(A).sum(axis=1).max())
    done = [None, None]
    res = np.full(2, np.inf)
    for it in range(1, max_iter + 1):
        Q, _ = np.linalg.qr(lu.solve(X))
        AQ = A @ Q
        T = Q.T @ AQ
        theta, S = np.linalg.eigh(0.5 * (T + T.T))
        X = Q @ S
        R = AQ @ S[:, :2] - X[:, :2] * theta[:2]
        res = np.linalg.norm(R, axis=0)
        scale = np.maximum(1.0, np.abs(theta[:2]))
        thresh = np.maximum(tol * scale, floor)
        for i in range(2):
            if done[i] is None and res[i] <= thresh[i]:
                done[i] = it
        if res[0] <= thresh[0] and res[1] <= thresh[1]:
            break
        # a Gershgorin shift can sit far below lambda1 (strongly graded weights);
        # once the pairs are roughly resolved, re-factor once just below them
        if not refined and p < N and np.all(res <= 1e-1 * scale):
            gap = max(theta[1] - theta[0], 1e-8 * scale[0])
            sigma = theta[0] - gap - res[0]
            lu = splu(sp.csc_matrix(A - sigma * I))
            refined = True
    else:
        raise NoConvergence(f"no convergence in {max_iter} iterations", residuals=tuple(res),
                            iterations=max_iter)
    u1, u2 = _fix_signs(X[:, 0].copy(), X[:, 1].copy(), op)
    lam1, lam2 = float(theta[0]), float(theta[1])
    near = lam2 - lam1 < 10 * tol
    if near:
        warnings.warn(f"lambda2 - lambda1 = {lam2 - lam1:.3g} below 10*tol", NearDegenerateWarning)
    positive = bool(np.all(u1 > 0))
    if not positive:
        warnings.warn(f"ground state has {np.sum(u1 <= 0)} non-positive entries "
                      f"(min {u1.min():.3g})", PositivityWarning)
    return SpectrumResult(lam1, lam2, u1, u2, (float(res[0]), float(res[1])),
                          (done[0], done[1]), op, near, positive)


# -- dense oracle ------------------------------------------------------------


def _tridiagonalize(A):
    """Householder reduction of a dense symmetric matrix to (diagonal, off-diagonal)."""
    A = np.array(A, dtype=float)
    n = A.shape[0]
    for k in range(n - 2):
        x = A[k + 1:, k]
        alpha = -np.copysign(np.linalg.norm(x), x[0]) if x[0] != 0 else -np.linalg.norm(x)
        v = x.copy()
        v[0] -= alpha
        vnorm = np.linalg.norm(v)
        if vnorm == 0.0:
            continue
        v /= vnorm
        B = A[k + 1:, k + 1:]
        p = 2.0 * (B @ v)
        w = p - (v @ p) * v
        B -= np.outer(v, w) + np.outer(w, v)
        A[k + 1:, k] = 0.0
        A[k, k + 1:] = 0.0
        A[k + 1, k] = A[k, k + 1] = alpha
    return np.diag(A).copy(), np.diag(A, 1).copy()


def _sturm_count(d, e2, x):
    """Number of eigenvalues of the tridiagonal matrix strictly below each shift in x."""
    tiny = np.finfo(float).tiny ** 0.5
    q = d[0] - x
    count = (q < 0).astype(int)
    for i in range(1, d.size):
        q = np.where(np.abs(q) < tiny, -tiny, q)
        q = d[i] - x - e2[i - 1] / q
        count += q < 0
    return count


def _bisect_all(d, e):
    n = d.size
    if n == 1:
        return d.copy()
    ae = np.abs(e)
    rad = np.r_[ae, 0] + np.r_[0, ae]
    lo, hi = float(np.min(d - rad)), float(np.max(d + rad))
    scale = max(abs(lo), abs(hi), 1.0)
    lo -= 1e-12 * scale
    hi += 1e-12 * scale
    e2 = e * e
    a = np.full(n, lo)
    b = np.full(n, hi)
    target = np.arange(n)  # eigenvalue k is the point where the count passes k
    eps = np.finfo(float).eps
    for _ in range(200):
        mid = 0.5 * (a + b)
        below = _sturm_count(d, e2, mid) > target
        b = np.where(below, mid, b)
        a = np.where(below, a, mid)
        if np.all(b - a <= 4 * eps * np.maximum(np.abs(a), np.abs(b)) + eps * scale):
            break
    return 0.5 * (a + b)


def dense_oracle(op) -> np.ndarray:
    """Full ascending spectrum by Householder tridiagonalization and Sturm bisection."""
    A = op.matrix if isinstance(op, DiscreteOperator) else op
    A = A.toarray() if sp.issparse(A) else np.asarray(A, float)
    n = A.shape[0]
    if n > ORACLE_MAX:
        raise ValueError(f"dense oracle limited to N <= {ORACLE_MAX}, got {n}")
    A = 0.5 * (A + A.T)
    d, e = _tridiagonalize(A)
    return _bisect_all(d, e)


# -- weighted variational quotient ---------------------------------------------


def weighted_rayleigh(f, spectrum: SpectrumResult, grid: DomainGrid) -> float:
    """sum |grad f|^2 u1^2 / sum f^2 u1^2 over the grid, after projecting out the
    u1^2-weighted mean of f.

    f is given on the degrees of freedom.  Gradients live on lattice edges with
    u1^2 evaluated as u1_i u1_j there; for any admissible f the result is at
    least the discrete gap, with equality at f = u2/u1.
    """
    op = spectrum.operator
    f = np.asarray(f, float)
    if f.shape != (op.size,):
        if f.shape == (grid.n_nodes,):
            f = f[op.dofs]
        else:
            raise ValueError("f must live on the degrees of freedom or on all grid nodes")
    u = op.to_grid(spectrum.u1)[op.dofs]
    mass = op.weights * u * u
    g = f - np.sum(mass * f) / np.sum(mass)
    if np.linalg.norm(g) <= 1e-12 * max(np.linalg.norm(f), np.finfo(float).tiny):
        raise ZeroDenominator("f is constant after weighted projection")
    i, j, cond = op.conductances()
    num = np.sum(cond * u[i] * u[j] * (g[i] - g[j]) ** 2)
    den = np.sum(mass * g * g)
    return float(num / den)
