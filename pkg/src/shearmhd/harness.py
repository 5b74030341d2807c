"""Sweeps, threshold bisection, rate fits and reproducible run directories.

Every harness entry point writes its outputs under ``runs/<hash>/`` where the
hash digests the canonical config; a manifest ties each output row back to
the exact configuration and seeds that produced it.  Sweep points land in
separate files so an interrupted sweep resumes by skipping finished points.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
import time as _time
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sstats

from . import __version__
from .diagnostics import EnergyRecord, bootstrap_monitor
from .grid import Grid
from .linear_modes import (
    IntegrationControls,
    ModeSystem,
    amplification_envelope,
    default_mode_sample,
    integrate_mode,
)
from .nonlinear import RunResult, SolverConfig, run
from .params import ConfigError, PhysicalParams, Regime, classify_regime


# ---------------------------------------------------------------------------
# manifests and run directories
# ---------------------------------------------------------------------------

def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_dataclass_default)


def _dataclass_default(o):
    if dataclasses.is_dataclass(o):
        return dataclasses.asdict(o)
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Regime):
        return o.name
    raise TypeError(f"cannot serialize {type(o)}")


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()[:12]


def make_run_dir(base: str, config: dict, command: str) -> str:
    h = config_hash(config)
    run_dir = os.path.join(base, h)
    os.makedirs(run_dir, exist_ok=True)
    manifest = {
        "config_hash": h,
        "code_version": __version__,
        "command": command,
        "created": _time.strftime("%Y-%m-%dT%H:%M:%S"),
        "config": config,
    }
    with open(os.path.join(run_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, default=_dataclass_default)
    return run_dir


def write_records_csv(path: str, records: list[EnergyRecord]):
    with open(path, "w") as fh:
        fh.write(EnergyRecord.csv_header() + "\n")
        for r in records:
            fh.write(r.csv_row() + "\n")


# ---------------------------------------------------------------------------
# linear runs
# ---------------------------------------------------------------------------

MODE_CSV_HEADER = ("t,component1_re,component1_im,component2_re,component2_im,"
                   "E_k,D_k,CK_k,envelope_ratio")


def linear_run_csv(path: str, system: ModeSystem, t_final: float,
                   rtol: float = 1e-10, w0=(1.0, 0.0), n_out: int = 801):
    traj = integrate_mode(system, (0.0, t_final),
                          IntegrationControls(rtol=rtol), w0=w0,
                          output_times=np.linspace(0.0, t_final, n_out))
    phys = traj.physical_states()
    with open(path, "w") as fh:
        fh.write(MODE_CSV_HEADER + "\n")
        for i, t in enumerate(traj.times):
            row = (t, phys[i, 0].real, phys[i, 0].imag,
                   phys[i, 1].real, phys[i, 1].imag,
                   traj.energy[i], traj.dissipation[i], traj.ck[i],
                   traj.envelope_ratio[i])
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    return traj


def linear_sweep_report(params: PhysicalParams, t_final: float | None = None,
                        modes=None, rtol: float = 1e-4) -> dict:
    modes = modes or default_mode_sample()
    if t_final is None:
        t_final = min(20.0 * params.lam ** (-1.0 / 3.0), 400.0)
    rep = amplification_envelope(modes, params, (0.0, t_final),
                                 IntegrationControls(rtol=rtol))
    return rep.to_dict()


# ---------------------------------------------------------------------------
# decay-rate regression
# ---------------------------------------------------------------------------

class WindowError(ValueError):
    """The requested fit window holds too few samples."""


@dataclass
class RateFit:
    t_lo: float
    t_hi: float
    slope: float                 # fitted d/dt log(nonzero-mode energy)
    predicted_rate: float        # regime decay rate of the amplitude envelope
    ratio: float                 # observed decay / (2 * predicted_rate)
    r_squared: float
    n_samples: int
    flagged: bool                # goodness-of-fit gate

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def fit_decay_rate(times, energies, params: PhysicalParams,
                   window: tuple[float, float] | None = None,
                   min_samples: int = 20, r2_gate: float = 0.98) -> RateFit:
    """Linear regression of log energy on the enhanced-dissipation window
    [5, 15] * lambda^(-1/3), clipped to the sampled span."""
    times = np.asarray(times, dtype=float)
    energies = np.asarray(energies, dtype=float)
    scale = params.lam ** (-1.0 / 3.0)
    lo, hi = window if window is not None else (5.0 * scale, 15.0 * scale)
    lo = max(lo, float(times[0]))
    hi = min(hi, float(times[-1]))
    sel = (times >= lo) & (times <= hi) & (energies > 0)
    if int(np.sum(sel)) < min_samples:
        raise WindowError(
            f"window [{lo:g}, {hi:g}] holds {int(np.sum(sel))} samples; "
            f"need >= {min_samples}")
    x = times[sel]
    y = np.log(energies[sel])
    res = sstats.linregress(x, y)
    predicted = params.decay_rate
    return RateFit(
        t_lo=float(lo), t_hi=float(hi), slope=float(res.slope),
        predicted_rate=float(predicted),
        ratio=float(-res.slope / (2.0 * predicted)),
        r_squared=float(res.rvalue**2), n_samples=int(np.sum(sel)),
        flagged=bool(res.rvalue**2 < r2_gate),
    )


# ---------------------------------------------------------------------------
# threshold sweep
# ---------------------------------------------------------------------------

@dataclass
class SweepSpec:
    """Sweep configuration.

    The eta lattice of each point's grid is sized so the k = 1 critical band
    eta ~ t stays inside the dealiased range for the whole horizon (the
    sustained-feedback dynamics that distinguish instability live there);
    doubling the horizon in robustness rechecks therefore also enlarges the
    grid consistently.
    """

    nu_grid: list[float]
    mu_grid: list[float]
    beta: float = 1.0
    regime_filter: str | None = None      # restrict to one regime name
    eps_lo: float = 1.0
    eps_hi: float = 1e6
    eps_tol: float = 0.10                 # relative bisection tolerance
    seeds: tuple[int, ...] = (0,)
    tail_factor: float = 0.5
    k_max: int = 6
    l_y: float = 8.0 * math.pi
    m_y_min: int = 96
    dt_initial: float = 0.1
    t_final_factor: float = 15.0          # horizon = factor * lambda^(-1/3)
    t_final_cap: float = 16.0
    output_stride: int = 5
    band_k: int = 2
    band_eta: float = 2.0
    early_exit: bool = True

    def __post_init__(self):
        if not self.eps_lo < self.eps_hi:
            raise ConfigError(f"eps_lo {self.eps_lo} must be below eps_hi {self.eps_hi}")
        if any(v <= 0 for v in list(self.nu_grid) + list(self.mu_grid)):
            raise ConfigError("nu_grid and mu_grid must be positive")
        if self.regime_filter is not None and self.regime_filter not in Regime.__members__:
            raise ConfigError(
                f"regime_filter must be one of {list(Regime.__members__)}, "
                f"got {self.regime_filter!r}")

    def points(self) -> list[tuple[float, float]]:
        pts = [(nu, mu) for nu in self.nu_grid for mu in self.mu_grid]
        if self.regime_filter:
            want = Regime[self.regime_filter]
            pts = [p for p in pts if classify_regime(*p) is want]
        return pts

    def horizon(self, params: PhysicalParams) -> float:
        return min(self.t_final_factor * params.lam ** (-1.0 / 3.0),
                   self.t_final_cap)

    def m_y_for(self, t_final: float) -> int:
        # 1.5x margin on the drift: cascade pileup at the eta edge inflates
        # the Sobolev norms and fakes instability when the band is tight
        needed = 3.0 * (self.band_eta + 1.5 * t_final) * self.l_y / math.pi
        m = max(self.m_y_min, int(math.ceil(needed / 2.0)) * 2)
        return m

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def log_spaced(cls, lo: float = 3e-3, hi: float = 3e-1, n: int = 5, **kw) -> "SweepSpec":
        g = list(np.geomspace(lo, hi, n))
        return cls(nu_grid=g, mu_grid=g, **kw)


def _point_config(spec: SweepSpec, nu: float, mu: float, epsilon: float,
                  seed: int, t_final: float | None = None) -> SolverConfig:
    params = PhysicalParams(nu=nu, mu=mu, beta=spec.beta)
    if t_final is None:
        t_final = spec.horizon(params)
    grid = Grid(k_max=spec.k_max, m_y=spec.m_y_for(t_final), l_y=spec.l_y,
                t_final=t_final)
    return SolverConfig(
        grid=grid, params=params, epsilon=epsilon, dt_initial=spec.dt_initial,
        t_final=t_final, output_stride=spec.output_stride, seed=seed,
        band_k=min(spec.band_k, spec.k_max), band_eta=spec.band_eta,
    )


class _StreamingBootstrap:
    """Incremental form of the bootstrap inequalities for early exit."""

    def __init__(self, params: PhysicalParams, epsilon: float):
        self.params = params
        self.coef = 1.0 / (100.0 * abs(params.beta))
        self.eps2 = epsilon * epsilon
        self.prev = None
        self.int_d0 = 0.0
        self.int_main = 0.0
        self.int_plain = 0.0

    def __call__(self, records) -> str | None:
        r = records[-1]
        if self.prev is not None:
            dt = r.t - self.prev.t
            self.int_d0 += 0.5 * (r.D0 + self.prev.D0) * dt
            if self.params.regime is Regime.NU_LE_MU3:
                self.int_main += 0.5 * ((r.D + r.CK) + (self.prev.D + self.prev.CK)) * dt
            else:
                self.int_main += 0.5 * ((r.Dbar + r.CKbar)
                                        + (self.prev.Dbar + self.prev.CKbar)) * dt
                self.int_plain += 0.5 * ((r.Dtilde + r.CKtilde)
                                         + (self.prev.Dtilde + self.prev.CKtilde)) * dt
        self.prev = r
        if r.E0 + self.coef * self.int_d0 > 10.0 * self.eps2:
            return "bootstrap_violation"
        if self.params.regime is Regime.NU_LE_MU3:
            if r.E + self.coef * self.int_main > 10.0 * self.eps2:
                return "bootstrap_violation"
        else:
            if r.Ebar + self.coef * self.int_main > 10.0 * self.eps2:
                return "bootstrap_violation"
            if (r.Etilde + self.coef * self.int_plain
                    > 1000.0 * self.eps2 * (1.0 + r.t * r.t)):
                return "bootstrap_violation"
        return None


@dataclass
class StabilityOutcome:
    epsilon: float
    stable: bool
    reason: str
    tail_ratio: float
    bootstrap_margin: float
    n_steps: int
    violation_time: float | None = None


def classify_stability(result: RunResult, spec: SweepSpec) -> StabilityOutcome:
    """Harness stability criterion: no bootstrap violation, no numerical
    abort, and a decaying nonzero-mode tail (final below half the running
    maximum).  This is a finite-horizon surrogate for the asymptotic claim."""
    cfg = result.config
    eps = cfg.epsilon
    if result.status == "aborted":
        t_abort = result.abort_record.get("t") if result.abort_record else None
        return StabilityOutcome(eps, False, "numerical_abort", math.inf, math.inf,
                                result.n_steps, violation_time=t_abort)
    e_neq = np.array([r.omega_neq_HN**2 + r.j_neq_HN**2 for r in result.records])
    peak = float(np.max(e_neq))
    tail = float(e_neq[-1] / peak) if peak > 0 else 0.0
    boot = bootstrap_monitor(result.records, eps, cfg.params)
    margin = max(boot.max_margins.values())
    if boot.violated or result.status.startswith("stopped:bootstrap"):
        return StabilityOutcome(eps, False, "bootstrap_violation", tail, margin,
                                result.n_steps,
                                violation_time=boot.first_violation_time
                                or float(result.records[-1].t))
    if tail >= spec.tail_factor:
        return StabilityOutcome(eps, False, "non_decaying_tail", tail, margin,
                                result.n_steps,
                                violation_time=float(result.records[-1].t))
    return StabilityOutcome(eps, True, "stable", tail, margin, result.n_steps)


def _stability_at(spec: SweepSpec, nu: float, mu: float, epsilon: float,
                  t_final: float | None = None) -> StabilityOutcome:
    outcomes = []
    for seed in spec.seeds:
        cfg = _point_config(spec, nu, mu, epsilon, seed, t_final)
        stop = _StreamingBootstrap(cfg.params, epsilon) if spec.early_exit else None
        outcomes.append(classify_stability(run(cfg, stop_condition=stop), spec))
    # a point is stable only if every trial is
    for o in outcomes:
        if not o.stable:
            return o
    return outcomes[0]


@dataclass
class PointResult:
    nu: float
    mu: float
    regime: str
    eps_star: float
    saturated: str | None           # "lo" / "hi" when the bracket saturates
    history: list
    max_amplification: float | None = None
    decay_ratio: float | None = None
    violation_time: float | None = None
    monotonic_consistent: bool = True

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def bisect_threshold(spec: SweepSpec, nu: float, mu: float,
                     t_final: float | None = None,
                     progress=None) -> PointResult:
    """Log-space bisection of the stability threshold at one (nu, mu)."""
    regime = classify_regime(nu, mu).name
    history: list[StabilityOutcome] = []

    def probe(eps: float) -> bool:
        out = _stability_at(spec, nu, mu, eps, t_final)
        history.append(out)
        if progress:
            progress(nu, mu, out)
        return out.stable

    lo, hi = spec.eps_lo, spec.eps_hi
    if probe(hi):
        result = PointResult(nu, mu, regime, hi, "hi", history)
    elif not probe(lo):
        result = PointResult(nu, mu, regime, lo, "lo", history)
        result.violation_time = history[-1].violation_time
    else:
        while hi / lo > 1.0 + spec.eps_tol:
            mid = math.sqrt(lo * hi)
            if probe(mid):
                lo = mid
            else:
                hi = mid
        result = PointResult(nu, mu, regime, math.sqrt(lo * hi), None, history)

    # criterion-noise check: outcomes should be monotone in epsilon
    stable_eps = [h.epsilon for h in history if h.stable]
    unstable_eps = [h.epsilon for h in history if not h.stable]
    if stable_eps and unstable_eps:
        result.monotonic_consistent = max(stable_eps) <= min(unstable_eps) * (1 + 1e-12)
    if stable_eps:
        _characterize_point(spec, result, max(stable_eps), t_final)
    result.history = [dataclasses.asdict(h) for h in history]
    return result


def _characterize_point(spec: SweepSpec, result: PointResult, eps_char: float,
                        t_final: float | None):
    """Fill transient-amplification and decay-ratio fields from a run at the
    largest stable epsilon."""
    res = run(_point_config(spec, result.nu, result.mu, eps_char,
                            spec.seeds[0], t_final))
    e_neq = np.array([r.omega_neq_HN**2 + r.j_neq_HN**2 for r in res.records])
    if e_neq[0] > 0:
        result.max_amplification = float(math.sqrt(np.max(e_neq) / e_neq[0]))
    try:
        fit = fit_decay_rate([r.t for r in res.records], e_neq, res.config.params)
        result.decay_ratio = fit.ratio
    except WindowError:
        result.decay_ratio = None


def run_sweep(spec: SweepSpec, out_dir: str, progress=None) -> list[PointResult]:
    """Bisect every sweep point; per-point JSON files make the sweep
    cancellation-safe and resumable."""
    os.makedirs(out_dir, exist_ok=True)
    results = []
    for nu, mu in spec.points():
        tag = f"point_nu{nu:.6g}_mu{mu:.6g}.json"
        path = os.path.join(out_dir, tag)
        if os.path.exists(path):
            with open(path) as fh:
                d = json.load(fh)
            results.append(PointResult(**d))
            continue
        res = bisect_threshold(spec, nu, mu, progress=progress)
        with open(path, "w") as fh:
            json.dump(res.to_dict(), fh, indent=2)
        results.append(res)
    return results


def robustness_recheck(spec: SweepSpec, point: PointResult,
                       factor: float = 2.0, bracket: float = 4.0) -> dict:
    """Re-bisect with the horizon scaled by ``factor``; reports the relative
    threshold shift (criterion robustness).

    The re-bisection brackets around the first pass's threshold; a shift
    beyond the bracket surfaces as a saturation flag, which is itself a
    robustness failure far beyond the tolerance of interest.
    """
    params = PhysicalParams(nu=point.nu, mu=point.mu, beta=spec.beta)
    base_t = spec.horizon(params)
    narrowed = dataclasses.replace(
        spec, eps_lo=point.eps_star / bracket, eps_hi=point.eps_star * bracket)
    redo = bisect_threshold(narrowed, point.nu, point.mu,
                            t_final=factor * base_t)
    rel = abs(redo.eps_star - point.eps_star) / point.eps_star
    return {
        "nu": point.nu, "mu": point.mu,
        "eps_star": point.eps_star, "eps_star_rechecked": redo.eps_star,
        "saturated": redo.saturated,
        "t_final_factor": factor, "relative_change": rel,
    }


# ---------------------------------------------------------------------------
# scaling regression
# ---------------------------------------------------------------------------

PREDICTED_EXPONENTS = {
    "NU_LE_MU3": {"gamma1": 0.5, "gamma2": 1.0 / 3.0, "form": "nu^(1/2) mu^(1/3)"},
    "MU3_LE_NU_LE_MU13": {"gamma_pairs": [[0.5, 0.0], [0.0, 0.5]],
                          "form": "min(nu^(1/2), mu^(1/2))"},
    "MU13_LE_NU": {"gamma1": -1.0, "gamma2": 5.0 / 6.0, "form": "nu^(-1) mu^(5/6)"},
}


@dataclass
class ScalingFit:
    regime: str
    gamma1: float
    gamma2: float
    intercept: float
    ci95_gamma1: tuple[float, float]
    ci95_gamma2: tuple[float, float]
    n_points: int
    r_squared: float
    predicted: dict
    flagged: str | None = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def regress_scaling(results: list[PointResult], regime: Regime) -> ScalingFit:
    """Least squares of log eps* against (log nu, log mu) within one regime."""
    pts = [r for r in results
           if r.regime == regime.name and r.saturated is None and r.eps_star > 0]
    predicted = PREDICTED_EXPONENTS[regime.name]
    if len(pts) < 4:
        return ScalingFit(regime.name, math.nan, math.nan, math.nan,
                          (math.nan, math.nan), (math.nan, math.nan),
                          len(pts), math.nan, predicted,
                          flagged="under-determined: fewer than 4 usable points")
    x1 = np.log([r.nu for r in pts])
    x2 = np.log([r.mu for r in pts])
    y = np.log([r.eps_star for r in pts])
    X = np.column_stack([np.ones_like(x1), x1, x2])
    if np.linalg.matrix_rank(X) < 3:
        return ScalingFit(regime.name, math.nan, math.nan, math.nan,
                          (math.nan, math.nan), (math.nan, math.nan),
                          len(pts), math.nan, predicted,
                          flagged="under-determined: degenerate design matrix")
    coef, res_ss, _, _ = np.linalg.lstsq(X, y, rcond=None)
    fitted = X @ coef
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum((y - fitted) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    dof = len(pts) - 3
    if dof > 0:
        sigma2 = ss_res / dof
        cov = sigma2 * np.linalg.inv(X.T @ X)
        tval = sstats.t.ppf(0.975, dof)
        ci = [(float(coef[i] - tval * math.sqrt(cov[i, i])),
               float(coef[i] + tval * math.sqrt(cov[i, i]))) for i in (1, 2)]
    else:
        ci = [(math.nan, math.nan), (math.nan, math.nan)]
    return ScalingFit(
        regime=regime.name, gamma1=float(coef[1]), gamma2=float(coef[2]),
        intercept=float(coef[0]), ci95_gamma1=ci[0], ci95_gamma2=ci[1],
        n_points=len(pts), r_squared=r2, predicted=predicted,
    )


# ---------------------------------------------------------------------------
# config files
# ---------------------------------------------------------------------------

def _require(d: dict, key: str, path: str):
    if key not in d:
        raise ConfigError(f"missing required config field: {path}.{key}")
    return d[key]


def _build(cls, d: dict, path: str):
    try:
        return cls(**d)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def solver_config_from_dict(doc: dict) -> SolverConfig:
    grid = _build(Grid, _require(doc, "grid", "config"), "config.grid")
    params = _build(PhysicalParams, _require(doc, "params", "config"), "config.params")
    solver = dict(doc.get("solver", {}))
    return _build(SolverConfig, {"grid": grid, "params": params, **solver},
                  "config.solver")


def sweep_spec_from_dict(doc: dict) -> SweepSpec:
    sweep = dict(_require(doc, "sweep", "config"))
    for key in ("nu_grid", "mu_grid"):
        val = _require(sweep, key, "config.sweep")
        if isinstance(val, dict):
            sweep[key] = list(np.geomspace(
                _require(val, "lo", f"config.sweep.{key}"),
                _require(val, "hi", f"config.sweep.{key}"),
                int(_require(val, "n", f"config.sweep.{key}"))))
    if "seeds" in sweep:
        sweep["seeds"] = tuple(sweep["seeds"])
    return _build(SweepSpec, sweep, "config.sweep")


def load_yaml_config(path: str) -> dict:
    import yaml

    with open(path) as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ConfigError(f"config file {path} must hold a mapping at top level")
    return doc
