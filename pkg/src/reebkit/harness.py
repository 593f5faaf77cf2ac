"""End-to-end systolic experiments with deterministic JSON/CSV reports.

``run_bump_experiment``
    A radial bump ``(1 + eps h) lambda_0`` supported near a regular fiber of a
    normalised ellipsoid (common period 1).  The center orbit shortens to
    ``1 - eps c_minus`` while every orbit outside the bump is stretched by
    ``1 + eps c_plus``; the volume grows only at second order.  For
    ``k > k0`` this makes ``rho_k`` strictly larger than its Besse value.

``run_local_max_probe``
    Random small conformal perturbations of E(p, q).  The continued short
    orbits and the orbit of the broken Besse family with smallest period give
    an upper bound for ``tau_k0``; with the measured volume this must not
    exceed ``rho_k0(E(p, q)) = pq``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize

from .charts import BumpSpec, EllipsoidChart, PolynomialFactor, bump_chart, perturb_conformal
from .errors import ConfigError, HypothesisViolated, NotSmallEnough, PredictionFailed, ReebkitError
from .reeb import CONTINUED, SHORT, contact_volume, find_periodic_orbit, first_return_data
from .spectra import PeriodMultiset, ellipsoid_model, period_multiset, tau_k


def quantize(x):
    """Round a float to the 13 significant digits written by reports."""
    return float("%.12e" % x)


# -- configuration ------------------------------------------------------------------

_LIST_KEYS = {"eps"}


@dataclass
class ExperimentConfig:
    experiment: str = "bump"
    p: int = 1
    q: int = 2
    k: int = 3
    eps: tuple = (0.0, 0.01, 0.02, 0.05)
    c_plus: float = 0.1
    rho: float = 0.35
    amplitude: float = 1e-3
    max_amplitude: float = 1e-2
    samples: int = 20
    degree: int = 2
    seed: int = 0
    int_tol: float = 1e-12
    quad_tol: float = 1e-10
    newton_tol: float = 1e-10
    vol_tol: float = 1e-6
    period_tol: float = 1e-7
    rho_tol: float = 1e-5

    def __post_init__(self):
        if self.experiment not in ("bump", "local_max"):
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        self.eps = tuple(float(e) for e in self.eps)
        if any(e < 0 for e in self.eps):
            raise ConfigError("eps values must be non-negative")
        if self.p < 1 or self.q < self.p:
            raise ConfigError("need 1 <= p <= q")

    def canonical(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ", ".join(repr(float(x)) for x in v)
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    def hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()


def parse_config(text: str) -> ExperimentConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    types = {f.name: f.type for f in fields(ExperimentConfig)}
    kw = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected 'key = value', got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ConfigError(f"line {n}: unknown key {key!r}")
        try:
            if key in _LIST_KEYS:
                kw[key] = tuple(float(v) for v in val.split(",") if v.strip())
            elif types[key] == "int":
                kw[key] = int(val)
            elif types[key] == "float":
                kw[key] = float(val)
            else:
                kw[key] = val
        except ValueError:
            raise ConfigError(f"line {n}: bad value for {key}: {val!r}") from None
    return ExperimentConfig(**kw)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read())


# -- reports ----------------------------------------------------------------------------

BUMP_COLUMNS = ["eps", "vol_measured", "vol_predicted", "tau_k_obs", "rho_k_obs", "pass"]
PROBE_COLUMNS = ["sample", "amplitude", "vol_measured", "tau_k_obs", "rho_k_obs", "rho_k_base", "status", "pass"]


def _clean(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return quantize(float(v))
    if isinstance(v, Fraction):
        return quantize(float(v))
    return v


@dataclass
class ExperimentReport:
    experiment: str
    config_hash: str
    columns: list
    rows: list = field(default_factory=list)

    def add(self, row: dict):
        # absent values are omitted so CSV and JSON round-trip identically
        self.rows.append({k: _clean(v) for k, v in row.items() if v is not None})

    @property
    def all_columns(self):
        extra = sorted({k for r in self.rows for k in r} - set(self.columns))
        return list(self.columns) + extra

    @property
    def passed(self):
        return all(r.get("pass", False) for r in self.rows if r.get("status", "OK") != "SKIP")

    def __eq__(self, other):
        return (isinstance(other, ExperimentReport) and self.experiment == other.experiment
                and self.config_hash == other.config_hash and self.rows == other.rows
                and list(self.columns) == list(other.columns))


def _json_value(v):
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return "%.12e" % v
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(v[k])}" for k in sorted(v)) + "}"
    raise TypeError(f"cannot serialise {type(v).__name__}")


def report_to_json(report: ExperimentReport) -> str:
    obj = {"experiment": report.experiment, "config_hash": report.config_hash,
           "columns": list(report.columns), "rows": report.rows, "pass": report.passed}
    return _json_value(obj) + "\n"


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "%.12e" % v
    return str(v)


def report_to_csv(report: ExperimentReport) -> str:
    buf = io.StringIO()
    buf.write(f"# experiment={report.experiment}\n# config_hash={report.config_hash}\n")
    buf.write("# columns=" + ",".join(report.columns) + "\n")
    cols = report.all_columns
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in report.rows:
        w.writerow([_csv_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def _parse_cell(s):
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def parse_report(text: str, fmt: str) -> ExperimentReport:
    if fmt == "json":
        obj = json.loads(text)
        return ExperimentReport(obj["experiment"], obj["config_hash"], obj["columns"], obj["rows"])
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("# ") and "=" in line:
            k, v = line[2:].split("=", 1)
            meta[k] = v
        else:
            body.append(line)
    reader = csv.reader(body)
    header = next(reader)
    rows = []
    for rec in reader:
        row = {c: _parse_cell(v) for c, v in zip(header, rec)}
        rows.append({k: v for k, v in row.items() if v is not None})
    cols = meta.get("columns", "")
    return ExperimentReport(meta["experiment"], meta["config_hash"], cols.split(",") if cols else [], rows)


def emit_report(report: ExperimentReport, path, fmt: str = "json"):
    text = report_to_json(report) if fmt == "json" else report_to_csv(report)
    if fmt not in ("json", "csv"):
        raise ValueError(f"unknown format {fmt!r}")
    with open(path, "w", newline="") as fh:
        fh.write(text)


# -- bump experiment ------------------------------------------------------------------------

def bump_model(cfg: ExperimentConfig, eps: float) -> BumpSpec:
    model = ellipsoid_model(cfg.p, cfg.q)
    vol0 = float(model.volume / model.common_period ** 2)
    outer = vol0 - np.pi * cfg.rho ** 2
    if outer < 0:
        raise ConfigError(f"bump disk of radius {cfg.rho} has more volume than the manifold ({vol0})")
    return BumpSpec(eps, cfg.c_plus, cfg.rho, outer)


def _bump_row(cfg, eps, base_ms, k, k0, vol0):
    spec = bump_model(cfg, eps)
    if not spec.admissible():
        raise NotSmallEnough(f"eps = {eps} violates the bump admissibility bounds")
    chart = bump_chart(spec)
    g_out = 1 + eps * spec.c_plus
    vol = contact_volume(chart, cfg.quad_tol) + g_out ** 2 * spec.outer_volume
    vol_pred = vol0 + spec.square_integral() * eps ** 2
    center = find_periodic_orbit(chart, [0.0, 0.0, 0.0], 1.0, tol=cfg.newton_tol, int_tol=cfg.int_tol, tag=SHORT)
    center_pred = 1 - eps * spec.c_minus

    # one-return windings on a radial seed line: none may complete a full turn
    r = spec.rho * np.linspace(0.05, 0.95, 19)
    ret = first_return_data(chart, np.column_stack([r, np.zeros_like(r)]), tol=cfg.int_tol)
    turns = np.abs(np.arctan2(ret.image[:, 1], ret.image[:, 0])) / (2 * np.pi)
    winding_ok = bool(spec.max_winding() < 1 and turns.max() < 1)

    # orbits outside the bump keep their shape and are stretched by g_out
    entries = {}
    for period, count in base_ms.entries:
        entries[float(period) * g_out] = count
    if abs(center.period - g_out) > 1e-12:
        entries[center.period] = entries.get(center.period, 0) + 1
    ms = PeriodMultiset(list(entries.items()))
    tau = tau_k(ms, k)
    tau0 = float(tau_k(base_ms, k))
    rho_obs = tau ** 2 / vol
    rho_base = tau0 ** 2 / vol0
    lower = (1 + 2 * eps * spec.c_plus) / vol_pred
    vol_ok = abs(vol - vol_pred) < cfg.vol_tol
    per_ok = abs(center.period - center_pred) < cfg.period_tol
    # which orbit realises tau_k: the shortened center orbit or a stretched outer one
    regime = "center" if tau == center.period else "outer"
    if eps == 0:
        dir_ok = abs(rho_obs / rho_base - 1) < 1e-12
    elif k > k0:
        dir_ok = rho_obs > rho_base and rho_obs >= lower - cfg.rho_tol
    elif regime == "center":
        dir_ok = rho_obs <= rho_base + cfg.rho_tol
    else:
        # outer orbits only rescale, so rho_k moves by g_out^2 vol0 / vol
        dir_ok = abs(rho_obs / rho_base - g_out ** 2 * vol0 / vol) < cfg.rho_tol
    return {
        "eps": eps, "vol_measured": vol, "vol_predicted": vol_pred, "tau_k_obs": tau, "rho_k_obs": rho_obs,
        "pass": bool(vol_ok and per_ok and dir_ok and winding_ok),
        "vol_residual": vol - vol_pred, "vol_tol": cfg.vol_tol,
        "center_period": center.period, "center_predicted": center_pred, "period_tol": cfg.period_tol,
        "center_residual": center.residual,
        "rho_k_base": rho_base, "rho_ratio": rho_obs / rho_base, "rho_lower_bound": lower,
        "rho_tol": cfg.rho_tol, "k": k, "k0": k0, "regime": regime, "g_out": g_out, "c_minus": spec.c_minus, "c_plus": spec.c_plus,
        "max_winding_bound": spec.max_winding(), "max_winding_measured": float(turns.max()),
    }


def run_bump_experiment(cfg: ExperimentConfig, raise_on_fail: bool = True, workers: int = 1) -> ExperimentReport:
    model = ellipsoid_model(cfg.p, cfg.q)
    T = model.common_period
    base = period_multiset(model)
    base_ms = PeriodMultiset([(p / T, c) for p, c in base.entries])
    vol0 = float(model.volume / T ** 2)
    report = ExperimentReport("bump", cfg.hash(), BUMP_COLUMNS)
    for row in _map(lambda e: _bump_row(cfg, e, base_ms, cfg.k, model.k0, vol0), cfg.eps, workers):
        report.add(row)
    _maybe_raise(report, raise_on_fail)
    return report


def _maybe_raise(report, raise_on_fail):
    if raise_on_fail:
        for row in report.rows:
            if row.get("status", "OK") != "SKIP" and not row["pass"]:
                err = PredictionFailed(f"{report.experiment}: prediction failed in row {row}", row)
                err.report = report
                raise err


# -- local maximality probe ---------------------------------------------------------------------

def orbit_average(ell: EllipsoidChart, f, psi, theta2, n=64):
    """Average of ``f`` over the unperturbed orbit through ``(psi, 0, theta2)``."""
    T = ell.p * ell.q
    t = np.arange(n) * T / n
    psi, theta2 = np.broadcast_arrays(np.atleast_1d(psi), np.atleast_1d(theta2))
    X = ell.point(psi, 0 * psi, theta2)
    pts = np.stack([ell.exact_flow(X, tt)[0] for tt in t])  # (n, m, 4)
    return f(pts.reshape(-1, 4)).reshape(n, -1).mean(axis=0)


def _min_orbit_average(ell, f):
    psi = np.linspace(0, np.pi / 2, 33)
    th = np.arange(32) * 2 * np.pi / 32
    P, TH = np.meshgrid(psi, th, indexing="ij")
    vals = orbit_average(ell, f, P.ravel(), TH.ravel())
    i = int(np.argmin(vals))
    res = minimize(lambda v: float(orbit_average(ell, f, np.clip(v[0], 0, np.pi / 2), v[1])[0]),
                   [P.ravel()[i], TH.ravel()[i]], method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-14})
    psi0, th0 = float(np.clip(res.x[0], 0, np.pi / 2)), float(res.x[1])
    return psi0, th0, float(orbit_average(ell, f, psi0, th0)[0])


def random_factor(cfg: ExperimentConfig, index: int):
    """Random polynomial factor with ``max |f| = 1`` on the ellipsoid (sampled)."""
    rng = np.random.default_rng([cfg.seed, index])
    f = PolynomialFactor.random(rng, dim=4, degree=cfg.degree)
    ell = EllipsoidChart(cfg.p, cfg.q)
    g = np.linspace(0, np.pi / 2, 17)
    th = np.arange(16) * 2 * np.pi / 16
    P, A, B = np.meshgrid(g, th, th, indexing="ij")
    sup = float(np.abs(f(ell.point(P.ravel(), A.ravel(), B.ravel()))).max())
    return PolynomialFactor(f.exponents, f.coefficients / sup)


def probe_sample(cfg: ExperimentConfig, index: int, amplitude: float):
    """Observed ``rho_k0`` of one perturbation ``(1 + amplitude f) lambda_{p,q}``."""
    if amplitude > cfg.max_amplitude:
        raise NotSmallEnough(f"amplitude {amplitude} exceeds the admissibility bound {cfg.max_amplitude}")
    p, q = cfg.p, cfg.q
    model = ellipsoid_model(p, q)
    k0 = model.k0
    ell = EllipsoidChart(p, q)
    f = random_factor(cfg, index)
    chart = perturb_conformal(ell, amplitude, f)
    vol = contact_volume(chart, cfg.quad_tol)
    kw = dict(tol=cfg.newton_tol, int_tol=cfg.int_tol)
    periods = []
    # continued singular orbits: the z1-circle (period p) when q > 1, the z2-circle (period q) when p > 1
    axes = {}
    if q > 1:
        axes["z1"] = (np.pi / 2, p)
    if p > 1:
        axes["z2"] = (0.0, q)
    for name, (psi_axis, period) in axes.items():
        x = ell.point(psi_axis, 0, 0)
        fbar_axis = float(orbit_average(ell, f, psi_axis, 0.0)[0])
        o = find_periodic_orbit(chart, x, period * (1 + amplitude * fbar_axis), tag=SHORT, **kw)
        periods.append(o.period)
    # the broken Besse family: its shortest member sits near the minimum of the orbit average
    psi0, th0, fbar = _min_orbit_average(ell, f)
    on_axis = [n for n, (psi_axis, _) in axes.items() if abs(psi0 - psi_axis) < 1e-3]
    if on_axis:
        # the minimum is a singular orbit whose iterate is already counted
        near = None
    else:
        near = find_periodic_orbit(chart, ell.point(psi0, 0, th0), p * q * (1 + amplitude * fbar),
                                   tag=CONTINUED, **kw).period
    counts = {}
    for per in periods + ([near] if near is not None else []):
        counts[per] = counts.get(per, 0) + 1
    ms = PeriodMultiset(list(counts.items()))
    tau = float(tau_k(ms, k0))
    out = {"vol_measured": vol, "tau_k_obs": tau, "rho_k_obs": tau ** 2 / vol, "k0": k0,
           "near_period": near, "orbit_average_min": fbar}
    out.update({f"short_period_{i}": per for i, per in enumerate(periods)})
    return out


def run_local_max_probe(cfg: ExperimentConfig, raise_on_fail: bool = True, workers: int = 1) -> ExperimentReport:
    model = ellipsoid_model(cfg.p, cfg.q)
    base = float(Fraction(model.common_period) ** 2 / model.volume)
    report = ExperimentReport("local_max", cfg.hash(), PROBE_COLUMNS)
    if cfg.amplitude > cfg.max_amplitude:
        raise NotSmallEnough(f"amplitude {cfg.amplitude} exceeds the admissibility bound {cfg.max_amplitude}")
    n = cfg.samples if cfg.amplitude > 0 else 1

    def one(i):
        row = {"sample": i, "amplitude": cfg.amplitude, "rho_k_base": base, "rho_tol": cfg.rho_tol}
        try:
            data = probe_sample(cfg, i, cfg.amplitude)
        except NotSmallEnough:
            raise
        except ReebkitError as exc:
            # detection failures are uninformative about the inequality
            row.update(status="SKIP", reason=type(exc).__name__, **{"pass": False})
            return row
        row.update(data)
        tol = 1e-8 if cfg.amplitude == 0 else cfg.rho_tol
        row["rho_tol"] = tol
        row["status"] = "OK"
        row["pass"] = bool(data["rho_k_obs"] <= base + tol)
        return row

    for row in _map(one, range(n), workers):
        report.add(row)
    _maybe_raise(report, raise_on_fail)
    return report


def _map(fn, items, workers):
    """Ordered map, optionally over a thread pool; results do not depend on ``workers``."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def run_experiment(cfg: ExperimentConfig, raise_on_fail: bool = True, workers: int = 1) -> ExperimentReport:
    if cfg.experiment == "bump":
        return run_bump_experiment(cfg, raise_on_fail, workers)
    return run_local_max_probe(cfg, raise_on_fail, workers)


# -- inequality chain --------------------------------------------------------------------------

def inequality_chain_check(a: float, V: float, V0: float, tol: float = 1e-12) -> dict:
    """From ``a + a^2/2 <= (V/V0 - 1)/2`` conclude ``(1 + a)^2 / V <= 1 / V0``."""
    if V <= 0 or V0 <= 0:
        raise HypothesisViolated("volumes must be positive")
    hyp_lhs = a + 0.5 * a * a
    hyp_rhs = 0.5 * (V / V0 - 1)
    if hyp_lhs > hyp_rhs + tol * max(1.0, abs(hyp_rhs)):
        raise HypothesisViolated(f"a + a^2/2 = {hyp_lhs} > (V/V0 - 1)/2 = {hyp_rhs}")
    lhs = (1 + a) ** 2 / V
    rhs = 1 / V0
    expanded = 1 + 2 * a + a * a
    return {
        "hypothesis_lhs": hyp_lhs, "hypothesis_rhs": hyp_rhs,
        "conclusion_lhs": lhs, "conclusion_rhs": rhs, "slack": rhs - lhs,
        "square_identity_defect": (1 + a) ** 2 - expanded,
        "equality": abs(rhs - lhs) <= tol * max(1.0, abs(rhs)),
        "pass": lhs <= rhs + tol * max(1.0, abs(rhs)),
    }
