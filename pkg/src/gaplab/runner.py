"""Experiment pipeline: config parsing, single runs, sweeps, refinement studies, oracle comparison."""

from __future__ import annotations

import copy
import csv
import io
import json
import math
import os
import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import gap as gp
from . import groundstate as gs
from .eigen import dense_oracle, smallest_two, ORACLE_MAX
from .errors import ConfigError, GapLabError, HypothesisFailed
from .geometry import DomainSpec, build_grid, metrics, refine
from .operator import BCS, assemble
from .potential import PotentialSpec, sample

CHECKS = (
    "positivity", "identity_residual", "log_concavity", "laplacian_bound", "polar_spherical",
    "polar_radial", "growth", "cutoff", "lemma1", "quotient_residual", "bound_universal",
    "bound_thm1", "bound_thm32", "grad_beta", "grad_barrier",
)
CSV_COLUMNS = (
    "run_id", "domain", "bc", "potential", "c", "d", "lambda1", "lambda2", "gap", "bound_universal",
    "bound_thm1", "beta_star", "bound_thm32", "a_measured", "hess_min", "res_eq15", "res_eq21",
    "lemma1_norm", "status",
)
CONFIG_KEYS = {"run_id", "domain", "potential", "bc", "tol", "max_iter", "seed", "delta", "beta",
               "epsilon", "checks", "min_resolution"}
DOMAIN_KEYS = {"kind", "bounds", "radius", "resolution", "h", "n_r", "n_theta"}
POTENTIAL_KEYS = {"family", "c", "center", "a4", "a2", "slope", "seed", "amplitude", "wavenumber"}
AXIS_ALIASES = {"c": "potential.c", "d": "domain.length", "length": "domain.length"}
SEED_ENV = "GAPLAB_SEED"


@dataclass
class RunConfig:
    domain: DomainSpec
    potential: PotentialSpec
    bc: str
    tol: float = 1e-10
    max_iter: int = 10000
    seed: int = 24029
    delta: float = gs.DEFAULT_DELTA
    beta: float = 1.0
    epsilon: float = 1.0
    checks: tuple = CHECKS
    run_id: str = "run"
    min_resolution: int = 8
    raw: dict = dc_field(default_factory=dict, repr=False)


def _unknown(keys, allowed, where):
    extra = sorted(set(keys) - allowed)
    if extra:
        raise ConfigError(f"unknown {where} key(s): {', '.join(extra)}")


def _nodes_from_h(a, b, h):
    n = (b - a) / h
    if abs(n - round(n)) > 1e-9 * max(1.0, n):
        raise ConfigError(f"h = {h} does not divide the extent [{a}, {b}]")
    return int(round(n)) + 1


def parse_domain(d: dict) -> DomainSpec:
    if not isinstance(d, dict):
        raise ConfigError("domain must be an object")
    _unknown(d, DOMAIN_KEYS, "domain")
    kind = d.get("kind")
    if kind == "disk":
        R = float(d.get("radius", 1.0))
        if "resolution" in d:
            n_r, n_t = d["resolution"]
        elif "h" in d:
            n_r = _nodes_from_h(0.0, R, float(d["h"])) - 1
            n_t = d.get("n_theta", max(8, 2 * n_r))
        else:
            n_r, n_t = d.get("n_r"), d.get("n_theta")
        if n_r is None or n_t is None:
            raise ConfigError("disk needs resolution, h, or n_r and n_theta")
        return DomainSpec.disk(R, int(n_r), int(n_t))
    if kind not in ("interval", "rectangle"):
        raise ConfigError(f"unknown domain kind {kind!r}")
    bounds = d.get("bounds")
    if bounds is None:
        raise ConfigError(f"{kind} needs bounds")
    bounds = [bounds] if kind == "interval" and len(bounds) == 2 and np.isscalar(bounds[0]) else bounds
    for ab in bounds:
        if len(ab) != 2 or not float(ab[1]) > float(ab[0]):
            raise ConfigError(f"degenerate extent {list(ab)}: need b > a")
    if "resolution" in d:
        res = d["resolution"]
        res = [res] if np.isscalar(res) else list(res)
        if kind == "rectangle" and len(res) == 1:
            res = res * 2
    elif "h" in d:
        res = [_nodes_from_h(float(a), float(b), float(d["h"])) for a, b in bounds]
    else:
        raise ConfigError(f"{kind} needs resolution or h")
    return DomainSpec(kind, bounds=tuple(tuple(ab) for ab in bounds), resolution=tuple(res))


def parse_config(doc) -> RunConfig:
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    _unknown(doc, CONFIG_KEYS, "config")
    for key in ("domain", "potential", "bc"):
        if key not in doc:
            raise ConfigError(f"config missing {key!r}")
    pot = doc["potential"]
    if isinstance(pot, str):
        pot = {"family": pot}
    _unknown(pot, POTENTIAL_KEYS, "potential")
    bc = doc["bc"]
    if bc not in BCS:
        raise ConfigError(f"unknown boundary condition {bc!r}")
    checks = tuple(doc.get("checks", CHECKS))
    _unknown(checks, set(CHECKS), "check")
    tol = float(doc.get("tol", 1e-10))
    if not tol > 0:
        raise ConfigError("tol must be positive")
    seed = int(os.environ.get(SEED_ENV, doc.get("seed", 24029)))
    delta = float(doc.get("delta", gs.DEFAULT_DELTA))
    if not 0 < delta < 1:
        raise ConfigError("delta must lie in (0, 1)")
    return RunConfig(
        domain=parse_domain(doc["domain"]), potential=PotentialSpec(**pot), bc=bc, tol=tol,
        max_iter=int(doc.get("max_iter", 10000)), seed=seed, delta=delta,
        beta=float(doc.get("beta", 1.0)), epsilon=float(doc.get("epsilon", 1.0)), checks=checks,
        run_id=str(doc.get("run_id", "run")), min_resolution=int(doc.get("min_resolution", 8)),
        raw=copy.deepcopy(doc))


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())


# -- a single run ------------------------------------------------------------------


def _domain_label(spec: DomainSpec):
    if spec.kind == "disk":
        return f"disk(R={spec.radius:g};{spec.resolution[0]}x{spec.resolution[1]})"
    box = "x".join(f"[{a:g};{b:g}]" for a, b in spec.bounds)
    return f"{spec.kind}{box}({'x'.join(str(n) for n in spec.resolution)})"


@dataclass
class RunReport:
    config: dict
    spectrum: dict
    diagnostics: dict
    gap: gp.GapReport
    timings: dict
    status: str
    row: dict

    @property
    def checks(self):
        return {c.name: c for c in self.gap.checks}

    @property
    def exit_code(self):
        return 1 if self.status == "FAIL" else 0

    def to_dict(self):
        return _clean({"config": self.config, "spectrum": self.spectrum, "diagnostics": self.diagnostics,
                       "gap": self.gap.to_dict(), "status": self.status, "timings": self.timings})


def _clean(obj):
    """JSON-safe copy: non-finite floats become None, numpy scalars become Python numbers."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _info(name, value, note=""):
    return gp.Check(name, "INFO", float(value), blocking=False, note=note)


def run(config: RunConfig) -> RunReport:
    """assemble -> solve -> ground state -> quotient and bounds, with one Check per enabled check."""
    t = {}
    t0 = time.perf_counter()
    grid = build_grid(config.domain, config.min_resolution)
    field = sample(config.potential, grid)
    op = assemble(grid, field, config.bc)
    t["assemble"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    spec = smallest_two(op, config.tol, config.max_iter, config.seed)
    t["solve"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    h = grid.h
    tol = gs.tol_check(h)
    met = metrics(grid)
    c = field.hessian_lb
    lam1, gap = spec.lambda1, spec.gap
    gsl = gs.log_ground_state(spec, grid, config.delta)
    hess_min, hess_diag_min = gs.hessian_extrema(gsl)
    res21 = gs.phi_identity_residual(gsl, field, lam1)
    diag = gs.PhiDiagnostics(hess_min, hess_diag_min, res21)
    checks = {}
    u1 = spec.nodal(1)
    interior_min = float(np.min(u1[grid.interior_nodes])) if grid.interior_nodes.size else math.nan
    checks["positivity"] = gp._judge("positivity", interior_min, 0.0, interior_min, 0.0,
                                     note="min u1 over interior nodes")
    if interior_min <= 0:
        checks["positivity"].status = "FAIL"
    checks["identity_residual"] = _info("identity_residual", res21, "max |lap phi - |grad phi|^2 + V - lambda1|")
    if config.bc == "dirichlet" and c > 0:
        b = math.sqrt(c / 2)
        checks["log_concavity"] = gp._judge("log_concavity", hess_diag_min, b, hess_diag_min - b, tol,
                                            note=f"hess_min={hess_min:.12g}")
    else:
        checks["log_concavity"] = gp.skipped("log_concavity", "needs Dirichlet and Hess V >= c > 0")
    if config.bc == "neumann":
        lb = gs.laplacian_bounds_check(gsl, field, met, lam1)
        diag.laplacian = lb
        note = "" if lb.curvature_available else "flat boundary: boundary branch unavailable, interior branch only"
        checks["laplacian_bound"] = gp._judge("laplacian_bound", lb.max_laplacian, lb.bound, lb.margin, tol,
                                              note=note)
    else:
        checks["laplacian_bound"] = gp.skipped("laplacian_bound", "needs a Neumann problem")
    if grid.kind == "disk" and config.bc == "neumann":
        pd = gs.polar_diagnostics(gsl, field, grid, lam1)
        diag.polar = pd
        checks["polar_spherical"] = gp._judge("polar_spherical", pd.max_theta_hessian, pd.spherical_bound,
                                              pd.spherical_margin, tol, blocking=False)
        checks["polar_radial"] = gp._judge("polar_radial", pd.max_radial,
                                           max(pd.radial_interior_bound, pd.radial_boundary_bound),
                                           pd.radial_margin, tol, blocking=False)
        try:
            m = gs.growth_check(gsl, field, grid)
            diag.growth_margin = m
            checks["growth"] = gp._judge("growth", -m, 0.0, m, 10 * h * h)
        except HypothesisFailed as exc:
            checks["growth"] = gp.skipped("growth", str(exc))
    else:
        for name in ("polar_spherical", "polar_radial", "growth"):
            checks[name] = gp.skipped(name, "needs a Neumann disk", blocking=name == "growth")
    cut = gs.cutoff_diagnostic(gsl, grid, field, lam1)
    diag.cutoff = cut
    if cut["applicable"]:
        checks["cutoff"] = _info("cutoff", cut["sup_rho2_lap_phi"], "sup rho^2 lap phi")
    else:
        checks["cutoff"] = gp.skipped("cutoff", cut["reason"], blocking=False)
    t["groundstate"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    q = gp.quotient(spec, grid, config.delta)
    l1 = gp.lemma1_check(q, grid)
    if math.isfinite(l1):
        checks["lemma1"] = gp._judge("lemma1", l1, 0.0, -l1, 20 * h * h, blocking=False)
    else:
        checks["lemma1"] = gp.skipped("lemma1", "u1 below delta next to the whole boundary", blocking=False)
    res15 = gp.quotient_residual(q, gsl, gap)
    checks["quotient_residual"] = _info("quotient_residual", res15, "max |lap u + gap u - 2 grad phi . grad u|")
    checks.update(gp.gap_lower_bounds(met, c, hess_min, gap, config.bc, h))
    checks.update(gp.proof_gradient_checks(q, gsl, gap, c, hess_min, config.beta, config.epsilon, h))
    report = gp.assemble_report(gap, [checks[n] for n in CHECKS if n in config.checks])
    t["gap"] = time.perf_counter() - t0

    spectrum = {"lambda1": lam1, "lambda2": spec.lambda2, "gap": gap, "residuals": list(spec.residuals),
                "iterations": list(spec.iterations), "n_dofs": op.size, "near_degenerate": spec.near_degenerate,
                "positive": spec.positive, "normalization": spec.normalization}
    diagnostics = {
        "c": c, "c_source": field.metadata_source, "h": h, "tol_check": tol, "diameter": met.diameter,
        "hess_min": hess_min, "hess_diag_min": hess_diag_min, "identity_residual": res21,
        "quotient_residual": res15, "lemma1_norm": l1, "mask_nodes": int(gsl.mask.sum()),
        "nodal_points": int(q.nodal_edges.shape[0]), "sup_abs_u": q.sup_abs,
        "laplacian": vars(diag.laplacian) if diag.laplacian else None,
        "polar": vars(diag.polar) if diag.polar else None, "growth_margin": diag.growth_margin,
        "cutoff": cut,
    }

    def val(name, attr="bound"):
        ch = checks[name]
        return getattr(ch, attr) if ch.status != "SKIPPED" else math.nan

    row = {
        "run_id": config.run_id, "domain": _domain_label(config.domain), "bc": config.bc,
        "potential": config.potential.family, "c": c, "d": met.diameter, "lambda1": lam1,
        "lambda2": spec.lambda2, "gap": gap, "bound_universal": val("bound_universal"),
        "bound_thm1": val("bound_thm1"), "beta_star": report.beta_star, "bound_thm32": val("bound_thm32"),
        "a_measured": report.a_measured, "hess_min": hess_min, "res_eq15": res15, "res_eq21": res21,
        "lemma1_norm": l1, "status": report.status,
    }
    cfg = config.raw or {"run_id": config.run_id}
    return RunReport(_clean(cfg), spectrum, diagnostics, report, t, report.status, row)


# -- CSV ---------------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r.get(k, "")) for k in CSV_COLUMNS])
    return buf.getvalue()


# -- sweeps ------------------------------------------------------------------------


def _set_axis(doc: dict, axis: str, value):
    path = AXIS_ALIASES.get(axis, axis)
    if path == "domain.length":
        dom = doc["domain"]
        if dom.get("kind") == "disk":
            dom["radius"] = value / 2
        else:
            bounds = dom["bounds"]
            flat = len(bounds) == 2 and np.isscalar(bounds[0])
            bounds = [bounds] if flat else bounds
            new = [[a, a + value] for a, _ in bounds]
            dom["bounds"] = new[0] if flat else new
        return
    parts = path.split(".")
    node = doc
    for p in parts[:-1]:
        if p not in node or not isinstance(node[p], dict):
            raise ConfigError(f"sweep axis {axis!r} does not name a config field")
        node = node[p]
    if parts[-1] not in node and not (parts[0] == "potential" and parts[-1] in POTENTIAL_KEYS) \
            and not (len(parts) == 1 and parts[0] in CONFIG_KEYS):
        raise ConfigError(f"sweep axis {axis!r} does not name a config field")
    node[parts[-1]] = value


@dataclass
class SweepResult:
    axis: str
    values: list
    reports: list           # RunReport or None per value
    rows: list
    errors: dict

    @property
    def csv(self):
        return csv_text(self.rows)

    @property
    def status(self):
        if self.errors:
            return "ERROR"
        return "FAIL" if any(r.status == "FAIL" for r in self.reports if r) else "PASS"


def sweep(base: dict, axis: str, values) -> SweepResult:
    """One independent run per value, ordered by value; per-run errors become rows with status ERROR."""
    if isinstance(base, RunConfig):
        base = base.raw
    values = sorted(float(v) for v in values)
    reports, rows, errors = [], [], {}
    for i, v in enumerate(values):
        doc = copy.deepcopy(base)
        if isinstance(doc.get("potential"), str):
            doc["potential"] = {"family": doc["potential"]}
        doc["run_id"] = f"{base.get('run_id', 'run')}-{i:03d}"
        try:
            _set_axis(doc, axis, v)
            rep = run(parse_config(doc))
        except GapLabError as exc:
            errors[v] = f"{type(exc).__name__}: {exc}"
            reports.append(None)
            rows.append({"run_id": doc["run_id"], "status": "ERROR"})
            continue
        reports.append(rep)
        rows.append(rep.row)
    return SweepResult(axis, values, reports, rows, errors)


# -- refinement study ------------------------------------------------------------------


def _orders(seq):
    """log2 ratios of successive differences a_i - a_{i+1}; len(seq) - 2 entries."""
    a = np.asarray(seq, float)
    d = np.abs(np.diff(a))
    with np.errstate(divide="ignore", invalid="ignore"):
        return list(np.log2(d[:-1] / d[1:]))


def _residual_orders(seq):
    a = np.abs(np.asarray(seq, float))
    with np.errstate(divide="ignore", invalid="ignore"):
        return list(np.log2(a[:-1] / a[1:]))


def _richardson(seq, p):
    a_c, a_f = seq[-2], seq[-1]
    return a_f + (a_f - a_c) / (2.0**p - 1.0)


def converge(base, refinements: int) -> dict:
    """Run on h, h/2, ..., h/2^refinements and report orders.

    Eigenvalue orders come from successive differences; the limit is the
    Richardson extrapolation of the two finest levels at the last measured
    order.  Residual orders are log2 ratios of the residuals themselves.
    """
    if int(refinements) < 2:
        raise ConfigError("converge needs at least 2 refinements")
    cfg = base if isinstance(base, RunConfig) else parse_config(base)
    levels = []
    spec = cfg.domain
    for _ in range(int(refinements) + 1):
        c = copy.copy(cfg)
        c.domain = spec
        levels.append(run(c))
        spec = refine(spec)
    table = {"h": [r.diagnostics["h"] for r in levels]}
    for key in ("lambda1", "lambda2", "gap"):
        seq = [r.spectrum[key] for r in levels]
        ords = _orders(seq)
        p = ords[-1] if ords and math.isfinite(ords[-1]) and ords[-1] > 0 else 2.0
        lim = _richardson(seq, p)
        table[key] = seq
        table[f"{key}_limit"] = lim
        table[f"{key}_error"] = [abs(v - lim) for v in seq]
        table[f"{key}_order"] = ords
    for key, src in (("res_eq21", "identity_residual"), ("res_eq15", "quotient_residual"),
                     ("lemma1", "lemma1_norm")):
        seq = [r.diagnostics[src] for r in levels]
        table[key] = seq
        table[f"{key}_order"] = _residual_orders(seq)
    return _clean(table)


# -- dense oracle ------------------------------------------------------------------------


def oracle(config: RunConfig, rtol: float = 1e-8) -> dict:
    grid = build_grid(config.domain, config.min_resolution)
    field = sample(config.potential, grid)
    op = assemble(grid, field, config.bc)
    if op.size > ORACLE_MAX:
        raise ConfigError(f"oracle comparison limited to {ORACLE_MAX} unknowns, got {op.size}")
    it = smallest_two(op, config.tol, config.max_iter, config.seed)
    ref = dense_oracle(op)
    err = [abs(it.lambda1 - ref[0]), abs(it.lambda2 - ref[1])]
    lim = [rtol * max(1.0, abs(ref[0])), rtol * max(1.0, abs(ref[1]))]
    ok = err[0] <= lim[0] and err[1] <= lim[1]
    return {"n": op.size, "iterative": [it.lambda1, it.lambda2], "oracle": [float(ref[0]), float(ref[1])],
            "abs_error": err, "allowed": lim, "status": "PASS" if ok else "FAIL"}
