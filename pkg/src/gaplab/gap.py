"""The quotient u = u2/u1, gap lower bounds, and the run-level GapReport."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .eigen import SpectrumResult
from .errors import DomainError, ExtrapolationUnstable, HypothesisFailed
from .fd import extrapolate_to_boundary, inward_lines, node_derivatives, normal_derivative
from .geometry import DomainGrid, DomainMetrics
from .groundstate import DEFAULT_DELTA, GroundStateLog, tol_check

SQRT2 = math.sqrt(2.0)
INVPHI = (math.sqrt(5.0) - 1) / 2
EXTRAP_LIMIT = 0.1


@dataclass(frozen=True, eq=False)
class QuotientField:
    u: np.ndarray                # u2/u1 per node; boundary values extrapolated for Dirichlet, nan if unavailable
    sup_abs: float               # sup |u| over reliable nodes
    reliable: np.ndarray         # nodes with u1 >= delta sup u1 (plus accepted boundary extrapolants)
    nodal_edges: np.ndarray      # (m, 2) node pairs across which u changes sign
    nodal_points: np.ndarray     # (m, dim) linear-interpolated zero crossings
    normal_derivative: np.ndarray  # per boundary node, nan where not reliable
    boundary_reliable: np.ndarray  # per boundary node


def _edges(grid: DomainGrid):
    """Lattice edges (i, j) with i < j, Dirichlet boundary nodes included."""
    if grid.kind == "interval":
        i = np.arange(grid.n_nodes - 1)
        return np.column_stack([i, i + 1])
    if grid.kind == "rectangle":
        nx, ny = grid.shape
        idx = np.arange(grid.n_nodes).reshape(nx, ny)
        return np.vstack([np.column_stack([idx[:-1].ravel(), idx[1:].ravel()]),
                          np.column_stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()])])
    n_r, n_t = grid.shape
    k = np.arange(n_t)
    pairs = [np.column_stack([np.zeros(n_t, int), grid.ring_index(1, k)])]
    for j in range(1, n_r + 1):
        if j < n_r:
            pairs.append(np.column_stack([grid.ring_index(j, k), grid.ring_index(j + 1, k)]))
        pairs.append(np.column_stack([grid.ring_index(j, k), grid.ring_index(j, k + 1)]))
    e = np.vstack(pairs)
    return np.sort(e, axis=1)


def quotient(spectrum: SpectrumResult, grid: DomainGrid, delta: float = DEFAULT_DELTA) -> QuotientField:
    u1, u2 = spectrum.nodal(1), spectrum.nodal(2)
    reliable = u1 >= delta * u1.max()
    u = np.full(grid.n_nodes, np.nan)
    pos = u1 > 0
    u[pos] = u2[pos] / u1[pos]
    bn = grid.boundary_nodes
    lines, _ = inward_lines(grid)
    line_ok = (lines[:, 0] >= 0) & np.all(reliable[np.maximum(lines, 0)], axis=1)
    if spectrum.operator.bc == "dirichlet":
        # u1 = u2 = 0 on the boundary: take the limit from inside
        sup_in = float(np.max(np.abs(u[reliable])))
        quad, lin = extrapolate_to_boundary(np.where(np.isfinite(u), u, 0.0), grid)
        bad = line_ok & (np.abs(quad - lin) > EXTRAP_LIMIT * sup_in)
        if np.any(bad):
            worst = float(np.max(np.abs(quad - lin)[bad]))
            raise ExtrapolationUnstable(
                f"boundary extrapolants of u2/u1 disagree by {worst:.3g} > {EXTRAP_LIMIT} sup|u| = {EXTRAP_LIMIT * sup_in:.3g}")
        u[bn] = np.where(line_ok, quad, np.nan)
        reliable = reliable.copy()
        reliable[bn] = line_ok
    else:
        line_ok &= reliable[bn]
    sup_abs = float(np.max(np.abs(u[reliable])))
    if sup_abs == 0.0:
        raise DomainError("u2/u1 vanishes identically")
    mag = np.where(reliable, np.abs(np.nan_to_num(u)), -1.0)
    if u[np.flatnonzero(mag >= (1 - 1e-8) * sup_abs)[0]] < 0:  # first node on ties
        u = -u
    e = _edges(grid)
    a, b = u[e[:, 0]], u[e[:, 1]]
    cross = np.isfinite(a) & np.isfinite(b) & reliable[e[:, 0]] & reliable[e[:, 1]] & (a * b <= 0) & (a != b)
    e = e[cross]
    t = (a[cross] / (a[cross] - b[cross]))[:, None]
    pts = grid.points[e[:, 0]] * (1 - t) + grid.points[e[:, 1]] * t
    if e.shape[0] == 0:
        raise DomainError("u2/u1 does not change sign on the reliable region")
    dn = np.full(bn.size, np.nan)
    if line_ok.any():
        dn = normal_derivative(np.where(np.isfinite(u), u, 0.0), grid, u[bn])
        dn[~line_ok] = np.nan
    return QuotientField(u, sup_abs, reliable, e, pts, dn, line_ok)


def lemma1_check(q: QuotientField, grid: DomainGrid) -> float:
    """max |du/dnu| over boundary nodes with a reliable inward line; nan when there are none."""
    vals = q.normal_derivative[q.boundary_reliable]
    vals = vals[np.isfinite(vals)]
    return float(np.max(np.abs(vals))) if vals.size else math.nan


def _quotient_derivatives(q: QuotientField, gsl: GroundStateLog):
    m = gsl.nodes
    g, H = node_derivatives(q.u, gsl.grid, m)
    return m, g, np.trace(H, axis1=1, axis2=2)


def quotient_residual(q: QuotientField, gsl: GroundStateLog, gap: float) -> float:
    """max over the mask of |lap u + gap u - 2 grad phi . grad u|."""
    m, g, lap = _quotient_derivatives(q, gsl)
    r = lap + gap * q.u[m] - 2 * np.sum(gsl.gradient[m] * g, axis=1)
    return float(np.max(np.abs(r)))


# -- bounds -------------------------------------------------------------------


def theta(beta):
    b = np.asarray(beta, float)
    if np.any(~(b > 0)) or np.any(~(b < SQRT2)):
        raise DomainError(f"beta must lie in (0, sqrt 2), got {beta}")
    out = np.arcsin(1.0 / np.sqrt(1.0 + b / (SQRT2 - b)))
    return float(out) if np.ndim(beta) == 0 else out


def _golden_max(f, lo, hi, xtol=1e-10):
    """Golden-section search for a maximum of f on [lo, hi]; (argmax, value)."""
    a, b = lo, hi
    x1, x2 = b - INVPHI * (b - a), a + INVPHI * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > xtol:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INVPHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INVPHI * (b - a)
            f2 = f(x2)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def maximize_thm1(c: float, d: float, probes: int = 64, xtol: float = 1e-10):
    """sup over beta in (0, sqrt 2) of theta(beta)^2 / d^2 + beta sqrt(c); (beta*, value).

    A coarse probe decides unimodality; otherwise the interval is cut into 8
    sub-brackets and the best local result wins.
    """
    if not (c > 0 and d > 0):
        raise DomainError("need c > 0 and d > 0")
    sc = math.sqrt(c)

    def g(b):
        return theta(b) ** 2 / d**2 + b * sc

    eps = 1e-14
    lo, hi = eps, SQRT2 - eps
    xs = np.linspace(lo, hi, probes)
    ys = g(xs)
    ups = np.diff(ys) > 0
    unimodal = np.count_nonzero(ups[1:] != ups[:-1]) <= 1 and (ups[0] or not ups.any())
    if unimodal:
        b, v = _golden_max(g, lo, hi, xtol)
        return float(b), float(v)
    edges = np.linspace(lo, hi, 9)
    best = max((_golden_max(g, a, b, xtol) for a, b in zip(edges[:-1], edges[1:])), key=lambda t: t[1])
    return float(best[0]), float(best[1])


def thm32_bound(a: float, d: float) -> float:
    return 2.0 / d**2 * math.exp(-a * d * d)


@dataclass
class Check:
    name: str
    status: str                  # PASS, FAIL, SKIPPED, INFO
    value: float = math.nan      # measured side
    bound: float = math.nan
    margin: float = math.nan     # positive is good
    blocking: bool = True
    note: str = ""

    def to_dict(self):
        return {k: getattr(self, k) for k in ("name", "status", "value", "bound", "margin", "blocking", "note")}


def _judge(name, value, bound, margin, tol, blocking=True, note=""):
    status = "PASS" if margin >= -tol else "FAIL"
    return Check(name, status, float(value), float(bound), float(margin), blocking, note)


def skipped(name, reason, blocking=True):
    return Check(name, "SKIPPED", blocking=blocking, note=reason)


@dataclass
class BoundParams:
    beta: float = 1.0
    epsilon: float = 1.0
    a: float = 0.0

    @property
    def theta(self):
        return theta(self.beta)


def gap_lower_bounds(metrics: DomainMetrics, c: float, hess_min: float, gap_measured: float,
                     bc: str, h: float, convex: bool = True) -> dict:
    """The three lower bounds with margins gap - bound; keyed by check name."""
    tol = tol_check(h)
    d = metrics.diameter
    out = {}
    if c > 0:
        b = math.sqrt(2 * c)
        out["bound_universal"] = _judge("bound_universal", gap_measured, b, gap_measured - b, tol)
    else:
        out["bound_universal"] = skipped("bound_universal", "needs Hess V >= c > 0")
    if c > 0 and convex:
        beta_star, b = maximize_thm1(c, d)
        chk = _judge("bound_thm1", gap_measured, b, gap_measured - b, tol, note=f"beta*={beta_star:.12g}")
        chk.beta_star = beta_star
        out["bound_thm1"] = chk
    else:
        out["bound_thm1"] = skipped("bound_thm1", "needs c > 0 on a convex domain")
    a = max(0.0, -hess_min)
    b = thm32_bound(a, d)
    out["bound_thm32"] = _judge("bound_thm32", gap_measured, b, gap_measured - b, tol,
                                blocking=(bc == "neumann" and convex),
                                note=f"a={a:.12g}" + ("" if bc == "neumann" else "; advisory outside Neumann"))
    out["bound_thm32"].a = a
    return out


def _normalized_quotient(q: QuotientField, gsl: GroundStateLog):
    m, g, _ = _quotient_derivatives(q, gsl)
    s = q.sup_abs
    return m, q.u[m] / s, np.linalg.norm(g, axis=1) / s


def gradient_check_beta(q: QuotientField, gsl: GroundStateLog, gap: float, c: float, beta: float = 1.0) -> float:
    """max over the mask of |grad u| / sqrt(alpha (1 + beta/(sqrt2 - beta)) - alpha u^2) - 1,
    u scaled to sup |u| = 1 and alpha = gap - beta sqrt(c)."""
    if not c > 0:
        raise HypothesisFailed("needs Hess V >= c > 0")
    theta(beta)
    alpha = gap - beta * math.sqrt(c)
    if not alpha > 0:
        raise HypothesisFailed(f"alpha = gap - beta sqrt(c) = {alpha:.3g} is not positive")
    _, u, gu = _normalized_quotient(q, gsl)
    den = np.sqrt(alpha * (1 + beta / (SQRT2 - beta)) - alpha * u * u)
    return float(np.max(gu / den) - 1.0)


def gradient_check_barrier(q: QuotientField, gsl: GroundStateLog, gap: float, hess_min: float,
                           epsilon: float = 1.0) -> float:
    """max over the mask (where u > 0) of |grad u|/(c - u) - sqrt(alpha) sqrt(log c - log(c - u)),
    with sup u = 1, c = 1 + epsilon and alpha = 2 gap (1 + 1/epsilon) - 4 min(hess_min, 0)."""
    if gsl.bc != "neumann":
        raise HypothesisFailed("the barrier estimate is stated for Neumann problems")
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    alpha = 2 * gap * (1 + 1 / epsilon) - 4 * min(hess_min, 0.0)
    _, u, gu = _normalized_quotient(q, gsl)
    cb = 1.0 + epsilon
    keep = u > 0  # the right side is real only there
    u, gu = u[keep], gu[keep]
    lhs = gu / (cb - u)
    rhs = math.sqrt(alpha) * np.sqrt(np.log(cb) - np.log(cb - u))
    return float(np.max(lhs - rhs))


def proof_gradient_checks(q: QuotientField, gsl: GroundStateLog, gap: float, c: float, hess_min: float,
                          beta: float = 1.0, epsilon: float = 1.0, h: float | None = None) -> dict:
    tol = tol_check(gsl.grid.h if h is None else h)
    out = {}
    for name, fn in (("grad_beta", lambda: gradient_check_beta(q, gsl, gap, c, beta)),
                     ("grad_barrier", lambda: gradient_check_barrier(q, gsl, gap, hess_min, epsilon))):
        try:
            excess = fn()
        except HypothesisFailed as exc:
            out[name] = skipped(name, str(exc))
            continue
        out[name] = _judge(name, excess, 0.0, -excess, tol)
    return out


@dataclass
class GapReport:
    gap: float
    checks: list = dc_field(default_factory=list)
    beta_star: float = math.nan
    a_measured: float = math.nan
    status: str = "PASS"

    def check(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return {"gap": self.gap, "beta_star": self.beta_star, "a_measured": self.a_measured,
                "status": self.status, "checks": [c.to_dict() for c in self.checks]}


def assemble_report(gap: float, checks) -> GapReport:
    checks = list(checks)
    rep = GapReport(gap, checks)
    for c in checks:
        if c.name == "bound_thm1" and c.status != "SKIPPED":
            rep.beta_star = c.beta_star
        if c.name == "bound_thm32":
            rep.a_measured = c.a
    rep.status = "FAIL" if any(c.blocking and c.status == "FAIL" for c in checks) else "PASS"
    return rep
