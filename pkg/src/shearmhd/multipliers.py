"""Decay-weight multipliers, their closed forms, and the property suite.

Six scalar weights m1..m6 of (t, k, eta) damp the spectral energy along each
mode ray; together with the exponential amplifier ``A`` and the Sobolev
factor they form the composite weight that drives every energy functional.
Each weight solves a first-order ODE in t whose right-hand side has an
elementary antiderivative, so all evaluations here are closed-form and
pointwise in t.

Everything is computed and stored as log-values: with the default constants
(c1 ~ 3e6) the weights drop below the double-precision floor within a
fraction of a time unit past the critical time of a mode.  Exponentiate only
at use sites, and only after subtracting a reference log.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import quad

from .grid import gamma_symbol, p_symbol, sobolev_log_weight
from .params import PhysicalParams, Regime


def arctan_diff(a, b):
    """arctan(a) - arctan(b), stable for large same-sign arguments.

    Uses atan2(a - b, 1 + a*b), which equals the difference exactly for all
    finite a, b (the common positive factor cos(arctan a)cos(arctan b)
    cancels inside atan2).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.arctan2(a - b, 1.0 + a * b)


def _f3_diff(a, b):
    """a/sqrt(1+a^2) - b/sqrt(1+b^2) without cancellation for a ~ b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ra = np.sqrt(1.0 + a * a)
    rb = np.sqrt(1.0 + b * b)
    direct = a / ra - b / rb
    denom = a * rb + b * ra
    with np.errstate(divide="ignore", invalid="ignore"):
        conj = (a * a - b * b) / (denom * ra * rb)
    return np.where(a * b > 0, conj, direct)


def _broadcast(k, eta, t):
    k = np.asarray(k, dtype=float)
    eta = np.asarray(eta, dtype=float)
    t = np.asarray(t, dtype=float)
    return np.broadcast_arrays(k, eta, t)


def _ratio_eta_over_k(k, eta):
    with np.errstate(divide="ignore", invalid="ignore"):
        r = eta / k
    return np.where(k == 0, 0.0, r)


# ---------------------------------------------------------------------------
# closed-form log weights
# ---------------------------------------------------------------------------

def log_m1(k, eta, t, params: PhysicalParams):
    """Inviscid-damping weight; active for 0 < |k| <= c2*lambda^(-1/2)."""
    k, eta, t = _broadcast(k, eta, t)
    r = _ratio_eta_over_k(k, eta)
    active = (k != 0) & (np.abs(k) <= params.c2 * params.lam ** -0.5)
    val = -params.c1 * arctan_diff(r, r - t)
    return np.where(active, val, 0.0)


def log_m2(k, eta, t, params: PhysicalParams):
    """Enhanced-dissipation weight, active for every k != 0."""
    k, eta, t = _broadcast(k, eta, t)
    r = _ratio_eta_over_k(k, eta)
    a = (params.lam * k * k) ** (1.0 / 3.0)
    val = -2.0 * params.c2**2 * arctan_diff(a * r, a * (r - t))
    return np.where(k != 0, val, 0.0)


def log_m3(k, eta, t, params: PhysicalParams):
    """Sharp-coupling weight; same band as m1, (1+s^2)^(-3/2) profile."""
    k, eta, t = _broadcast(k, eta, t)
    r = _ratio_eta_over_k(k, eta)
    active = (k != 0) & (np.abs(k) <= params.c2 * params.lam ** -0.5)
    val = -params.c3 * _f3_diff(r, r - t)
    return np.where(active, val, 0.0)


def log_m4(k, eta, t, params: PhysicalParams):
    """Resistive-window weight; trivial outside the large-viscosity regime."""
    if params.regime is not Regime.MU13_LE_NU:
        k, eta, t = _broadcast(k, eta, t)
        return np.zeros_like(k, dtype=float)
    k, eta, t = _broadcast(k, eta, t)
    r = _ratio_eta_over_k(k, eta)
    active = (k != 0) & (np.abs(k) <= params.c2 * params.mu ** -0.5)
    val = -params.c4 * arctan_diff(params.nu * r, params.nu * (r - t))
    return np.where(active, val, 0.0)


def log_m5(k, eta, t, params: PhysicalParams):
    """Stretching guard on the window nu^-1 <= t - eta/k <= mu^(-1/3) * 4.

    Piecewise closed form; trivial outside the large-viscosity regime.
    """
    k, eta, t = _broadcast(k, eta, t)
    out = np.zeros_like(k, dtype=float)
    if params.regime is not Regime.MU13_LE_NU:
        return out
    wlo = 4.0 / params.nu
    whi = 4.0 * params.mu ** (-1.0 / 3.0)
    r = _ratio_eta_over_k(k, eta)
    s = t - r
    active = (k != 0) & (np.abs(k) <= params.c2 * params.mu ** -0.5)

    # started inside the window at t = 0 (-whi <= eta/k <= -wlo)
    started = active & (r >= -whi) & (r <= -wlo)
    during = 0.5 * (np.log1p(r * r) - np.log1p(s * s))
    frozen = 0.5 * (np.log1p(r * r) - math.log1p(whi * whi))
    out = np.where(started & (s <= whi), during, out)
    out = np.where(started & (s > whi), frozen, out)

    # window opens at t = eta/k + wlo > 0 (eta/k > -wlo)
    later = active & (r > -wlo)
    during2 = 0.5 * (math.log1p(wlo * wlo) - np.log1p(s * s))
    frozen2 = 0.5 * (math.log1p(wlo * wlo) - math.log1p(whi * whi))
    out = np.where(later & (s > wlo) & (s <= whi), during2, out)
    out = np.where(later & (s > whi), frozen2, out)
    return out


def log_m6(k, eta, t, params: PhysicalParams):
    """Stretching guard on the window 0 <= t - eta/k <= 4*mu^(-1/3).

    Piecewise closed form; trivial outside the small-viscosity regime.
    The activity cutoff is |k| <= c2*nu^(-1/2), following the defining ODE.
    """
    k, eta, t = _broadcast(k, eta, t)
    out = np.zeros_like(k, dtype=float)
    if params.regime is not Regime.NU_LE_MU3:
        return out
    whi = 4.0 * params.mu ** (-1.0 / 3.0)
    r = _ratio_eta_over_k(k, eta)
    s = t - r
    active = (k != 0) & (np.abs(k) <= params.c2 * params.nu ** -0.5)

    started = active & (r >= -whi) & (r <= 0)
    during = 0.5 * (np.log1p(r * r) - np.log1p(s * s))
    frozen = 0.5 * (np.log1p(r * r) - math.log1p(whi * whi))
    out = np.where(started & (s <= whi), during, out)
    out = np.where(started & (s > whi), frozen, out)

    later = active & (r > 0)
    during2 = -0.5 * np.log1p(s * s)
    frozen2 = -0.5 * math.log1p(whi * whi)
    out = np.where(later & (s > 0) & (s <= whi), during2, out)
    out = np.where(later & (s > whi), frozen2, out)
    return out


def log_amp(k, t, params: PhysicalParams):
    """log of the exponential amplifier: delta0*lambda^(1/3)*t on k != 0."""
    k = np.asarray(k, dtype=float)
    t = np.asarray(t, dtype=float)
    k, t = np.broadcast_arrays(k, t)
    return np.where(k != 0, params.delta0 * params.lam ** (1.0 / 3.0) * t, 0.0)


_FACTORS = {
    Regime.NU_LE_MU3: (log_m1, log_m2, log_m3, log_m6),
    Regime.MU3_LE_NU_LE_MU13: (log_m1, log_m2, log_m3),
    Regime.MU13_LE_NU: (log_m1, log_m2, log_m3, log_m4, log_m5),
}


def log_weight_total(k, eta, t, params: PhysicalParams):
    """log of the composite weight: amplifier + Sobolev factor + regime product."""
    k, eta, t = _broadcast(k, eta, t)
    total = log_amp(k, t, params) + sobolev_log_weight(k, eta, params.n)
    for f in _FACTORS[params.regime]:
        total = total + f(k, eta, t, params)
    return total


# convenience exponentiated forms (use only where magnitudes stay sane)

def eval_m1(k, eta, t, params):
    return np.exp(log_m1(k, eta, t, params))


def eval_m2(k, eta, t, params):
    return np.exp(log_m2(k, eta, t, params))


def eval_m3(k, eta, t, params):
    return np.exp(log_m3(k, eta, t, params))


def eval_m4(k, eta, t, params):
    return np.exp(log_m4(k, eta, t, params))


def eval_m5(k, eta, t, params):
    return np.exp(log_m5(k, eta, t, params))


def eval_m6(k, eta, t, params):
    return np.exp(log_m6(k, eta, t, params))


def eval_amp(k, t, params):
    return np.exp(log_amp(k, t, params))


def eval_weight_total(k, eta, t, params):
    return np.exp(log_weight_total(k, eta, t, params))


# ---------------------------------------------------------------------------
# defining rates d/dt log(m_i); the quadrature oracle integrates these
# ---------------------------------------------------------------------------

def rate_m1(k, eta, t, params: PhysicalParams):
    k, eta, t = _broadcast(k, eta, t)
    r = _ratio_eta_over_k(k, eta)
    active = (k != 0) & (np.abs(k) <= params.c2 * params.lam ** -0.5)
    s = r - t
    return np.where(active, -params.c1 / (1.0 + s * s), 0.0)


def rate_m2(k, eta, t, params: PhysicalParams):
    k, eta, t = _broadcast(k, eta, t)
    r = _ratio_eta_over_k(k, eta)
    a = (params.lam * k * k) ** (1.0 / 3.0)
    s = r - t
    val = -2.0 * params.c2**2 * a / (1.0 + a * a * s * s)
    return np.where(k != 0, val, 0.0)


def rate_m3(k, eta, t, params: PhysicalParams):
    k, eta, t = _broadcast(k, eta, t)
    r = _ratio_eta_over_k(k, eta)
    active = (k != 0) & (np.abs(k) <= params.c2 * params.lam ** -0.5)
    s = r - t
    return np.where(active, -params.c3 * (1.0 + s * s) ** -1.5, 0.0)


def rate_m4(k, eta, t, params: PhysicalParams):
    k, eta, t = _broadcast(k, eta, t)
    if params.regime is not Regime.MU13_LE_NU:
        return np.zeros_like(k, dtype=float)
    r = _ratio_eta_over_k(k, eta)
    active = (k != 0) & (np.abs(k) <= params.c2 * params.mu ** -0.5)
    s = r - t
    return np.where(active, -params.c4 * params.nu / (1.0 + params.nu**2 * s * s), 0.0)


def rate_m5(k, eta, t, params: PhysicalParams):
    k, eta, t = _broadcast(k, eta, t)
    if params.regime is not Regime.MU13_LE_NU:
        return np.zeros_like(k, dtype=float)
    r = _ratio_eta_over_k(k, eta)
    s = t - r
    active = (
        (k != 0)
        & (np.abs(k) <= params.c2 * params.mu ** -0.5)
        & (s >= 4.0 / params.nu)
        & (s <= 4.0 * params.mu ** (-1.0 / 3.0))
    )
    return np.where(active, -s / (1.0 + s * s), 0.0)


def rate_m6(k, eta, t, params: PhysicalParams):
    k, eta, t = _broadcast(k, eta, t)
    if params.regime is not Regime.NU_LE_MU3:
        return np.zeros_like(k, dtype=float)
    r = _ratio_eta_over_k(k, eta)
    s = t - r
    active = (
        (k != 0)
        & (np.abs(k) <= params.c2 * params.nu ** -0.5)
        & (s >= 0.0)
        & (s <= 4.0 * params.mu ** (-1.0 / 3.0))
    )
    return np.where(active, -s / (1.0 + s * s), 0.0)


_RATES = {
    Regime.NU_LE_MU3: (rate_m1, rate_m2, rate_m3, rate_m6),
    Regime.MU3_LE_NU_LE_MU13: (rate_m1, rate_m2, rate_m3),
    Regime.MU13_LE_NU: (rate_m1, rate_m2, rate_m3, rate_m4, rate_m5),
}

_RATE_BY_INDEX = {1: rate_m1, 2: rate_m2, 3: rate_m3, 4: rate_m4, 5: rate_m5, 6: rate_m6}
_LOG_BY_INDEX = {1: log_m1, 2: log_m2, 3: log_m3, 4: log_m4, 5: log_m5, 6: log_m6}


def dt_log_weight(k, eta, t, params: PhysicalParams):
    """d/dt of the composite log weight (amplifier rate plus factor rates)."""
    k, eta, t = _broadcast(k, eta, t)
    total = np.where(k != 0, params.delta0 * params.lam ** (1.0 / 3.0), 0.0)
    for rf in _RATES[params.regime]:
        total = total + rf(k, eta, t, params)
    return total


def log_multiplier_quadrature(index: int, k: float, eta: float, t: float,
                              params: PhysicalParams, tol: float = 1e-12) -> float:
    """Independent oracle: adaptive quadrature of the defining rate ODE.

    Scalar-only; used by tests and the ``multipliers check`` report to
    validate the closed forms.
    """
    rate = _RATE_BY_INDEX[index]
    if k == 0:
        return 0.0
    pts = []
    if k != 0:
        r = eta / k
        for b in (r, r + 4.0 / params.nu, r - 4.0 / params.nu,
                  r + 4.0 * params.mu ** (-1.0 / 3.0)):
            if 0.0 < b < t:
                pts.append(b)
    val, _ = quad(lambda tau: float(rate(k, eta, tau, params)), 0.0, t,
                  points=sorted(pts) or None, limit=400, epsabs=tol, epsrel=tol)
    return val


# ---------------------------------------------------------------------------
# window indicators
# ---------------------------------------------------------------------------

def chi_window(k, eta, t, mu: float):
    """1 on 0 < t - eta/k <= 4*mu^(-1/3) with k != 0, else 0 (strict entry)."""
    k, eta, t = _broadcast(k, eta, t)
    r = _ratio_eta_over_k(k, eta)
    s = t - r
    return np.where((k != 0) & (s > 0.0) & (s <= 4.0 * mu ** (-1.0 / 3.0)), 1.0, 0.0)


def chibar_window(k, eta, t, nu: float):
    """1 on |t - eta/k| <= 4*nu^(-1) with k != 0, else 0."""
    k, eta, t = _broadcast(k, eta, t)
    r = _ratio_eta_over_k(k, eta)
    return np.where((k != 0) & (np.abs(t - r) <= 4.0 / nu), 1.0, 0.0)


def chi_transition_times(k: float, eta: float, params: PhysicalParams,
                         variant_chi: str) -> list[float]:
    """Times where the window indicator for mode (k, eta) switches."""
    if k == 0:
        return []
    r = eta / k
    if variant_chi == "chi":
        return [r, r + 4.0 * params.mu ** (-1.0 / 3.0)]
    return [r - 4.0 / params.nu, r + 4.0 / params.nu]


# ---------------------------------------------------------------------------
# grid evaluation
# ---------------------------------------------------------------------------

@dataclass
class MultiplierStack:
    """Log weights and rates of the composite multiplier on a grid, at one t."""

    params: PhysicalParams
    t: float
    log_factors: dict
    log_total: np.ndarray
    rate_total: np.ndarray

    @classmethod
    def evaluate(cls, params: PhysicalParams, t: float, k, eta) -> "MultiplierStack":
        k = np.asarray(k, dtype=float)
        eta = np.asarray(eta, dtype=float)
        factors = {}
        for idx, f in ((1, log_m1), (2, log_m2), (3, log_m3),
                       (4, log_m4), (5, log_m5), (6, log_m6)):
            factors[idx] = f(k, eta, t, params)
        factors["amp"] = log_amp(k, t, params)
        factors["sobolev"] = sobolev_log_weight(k, eta, params.n)
        total = log_weight_total(k, eta, t, params)
        rate = dt_log_weight(k, eta, t, params)
        return cls(params, float(t), factors, total, rate)

    @classmethod
    def on_grid(cls, params: PhysicalParams, t: float, grid) -> "MultiplierStack":
        return cls.evaluate(params, t, grid.kk, grid.ee)


# ---------------------------------------------------------------------------
# property suite
# ---------------------------------------------------------------------------

def m6_demotion_factor(mu: float) -> float:
    """Exact supremum of max(Gamma, 1/<t>, mu^(1/3)) / m6 over all (t, k, eta).

    The strict lower bound fails after the stretching window, where
    m6 = mu^(1/3)/sqrt(mu^(2/3)+16) while the left side is still mu^(1/3);
    the worst ratio sqrt(16 + mu^(2/3)) is attained as eta -> 0.
    """
    return math.sqrt(16.0 + mu ** (2.0 / 3.0))


@dataclass
class PropertyLattice:
    """Sample lattice for the property scans."""

    k_values: np.ndarray
    eta_over_k: np.ndarray
    t_values: np.ndarray

    @classmethod
    def default(cls, n_k: int = 16, n_r: int = 80, n_t: int = 80,
                k_top: int = 64, r_top: float = 1e3, t_top: float = 1e3) -> "PropertyLattice":
        ks: list[int] = []
        for cand in np.rint(np.geomspace(1, k_top, 4 * n_k)).astype(int):
            if cand not in ks:
                ks.append(int(cand))
            if len(ks) == n_k:
                break
        rs = np.concatenate([
            -np.geomspace(r_top, 1e-2, n_r // 2),
            [0.0],
            np.geomspace(1e-2, r_top, n_r - n_r // 2 - 1),
        ])
        ts = np.concatenate([[0.0], np.geomspace(1e-2, t_top, n_t - 1)])
        return cls(np.array(ks, dtype=float), rs, ts)

    def size(self) -> int:
        return self.k_values.size * self.eta_over_k.size * self.t_values.size

    def mesh(self):
        k = self.k_values[:, None, None]
        r = self.eta_over_k[None, :, None]
        t = self.t_values[None, None, :]
        eta = r * k
        return np.broadcast_arrays(k, eta, t)


@dataclass
class PropertyReport:
    """Executable summary of the weight-property suite on a lattice."""

    params: dict
    lattice_points: int
    dissipation_gap_holds: bool           # hard: lam*p - rate_m2 >= c2*lam^(1/3)|k|^(2/3)
    dissipation_gap_min_margin: float
    dissipation_gap_witness: tuple | None
    m6_bound_strict_holds: bool           # strict: max(Gamma,1/<t>,mu^(1/3)) <= m6
    m6_bound_violations: int
    m6_bound_best_constant: float         # max observed ratio lhs/m6
    m6_bound_demoted_factor: float        # triaged bound sqrt(16+mu^(2/3))
    m6_bound_demoted_holds: bool
    m6_bound_witness: tuple | None
    eta_derivative_fitted_constant: float
    k_derivative_fitted_constant: float
    m5_inverse_fitted_constant: float
    log_weight_minima: dict
    tolerance: float = 1e-10

    def to_json(self, **kw) -> str:
        d = asdict(self)
        d["m6_demotion_note"] = (
            "strict lower bound demoted to a fitted property: "
            "max(Gamma, 1/<t>, mu^(1/3)) <= sqrt(16 + mu^(2/3)) * m6"
        )
        return json.dumps(d, indent=2, default=_json_default, **kw)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o)}")


def check_dissipation_gap(params: PhysicalParams, lattice: PropertyLattice,
                          tol: float = 1e-10):
    """Hard bound: lam*p - d/dt log m2 >= c2 * lam^(1/3) * |k|^(2/3), k != 0."""
    k, eta, t = lattice.mesh()
    lhs = params.lam * p_symbol(k, eta, t) - rate_m2(k, eta, t, params)
    rhs = params.c2 * params.lam ** (1.0 / 3.0) * np.abs(k) ** (2.0 / 3.0)
    margin = lhs - rhs * (1.0 - tol)
    ok = margin >= 0.0
    holds = bool(np.all(ok))
    worst = float(np.min(lhs / rhs))
    witness = None
    if not holds:
        i = np.unravel_index(np.argmin(margin), margin.shape)
        witness = (float(t[i]), float(k[i]), float(eta[i]))
    return holds, worst, witness


def check_m6_lower_bound(params: PhysicalParams, lattice: PropertyLattice,
                         tol: float = 1e-10):
    """Scan max(Gamma_k, 1/<t>, mu^(1/3)) <= m6 and its triaged fitted form."""
    k, eta, t = lattice.mesh()
    lm6 = log_m6(k, eta, t, params)
    gam = gamma_symbol(k, eta, t)
    lhs = np.maximum(np.maximum(gam, 1.0 / np.sqrt(1.0 + t * t)),
                     params.mu ** (1.0 / 3.0))
    log_ratio = np.log(lhs) - lm6
    best = float(np.exp(np.max(log_ratio)))
    violations = int(np.sum(log_ratio > math.log1p(tol)))
    strict = violations == 0
    factor = m6_demotion_factor(params.mu)
    demoted = bool(np.all(log_ratio <= math.log(factor) + math.log1p(tol)))
    witness = None
    if not strict:
        i = np.unravel_index(np.argmax(log_ratio), log_ratio.shape)
        witness = (float(t[i]), float(k[i]), float(eta[i]))
    return strict, violations, best, factor, demoted, witness


def _fd_log(f, k, eta, t, params, which: str, rel: float = 1e-5):
    if which == "eta":
        d = rel * np.maximum(1.0, np.abs(eta))
        return (f(k, eta + d, t, params) - f(k, eta - d, t, params)) / (2.0 * d)
    d = rel * np.maximum(1.0, np.abs(k))
    return (f(k + d, eta, t, params) - f(k - d, eta, t, params)) / (2.0 * d)


def fit_eta_derivative_constant(params: PhysicalParams, lattice: PropertyLattice) -> float:
    """Best constant in |d_eta log m_i| <= C (lam^(1/3)|k|^(-1/3) + |k|^(-1))."""
    k, eta, t = lattice.mesh()
    bound = params.lam ** (1.0 / 3.0) * np.abs(k) ** (-1.0 / 3.0) + 1.0 / np.abs(k)
    worst = 0.0
    indices = {Regime.NU_LE_MU3: (1, 2, 3, 6),
               Regime.MU3_LE_NU_LE_MU13: (1, 2, 3),
               Regime.MU13_LE_NU: (1, 2, 3, 4, 5)}[params.regime]
    for idx in indices:
        g = np.abs(_fd_log(_LOG_BY_INDEX[idx], k, eta, t, params, "eta"))
        worst = max(worst, float(np.max(g / bound)))
    return worst


def fit_k_derivative_constant(params: PhysicalParams, n_samples: int = 400,
                              seed: int = 7) -> float:
    """Best constant in |d_k log m2| <= C (lam^(1/3)|k|^(-4/3)|eta| + |k|^(-1))
    sampled beyond the m1/m3 activity cutoff."""
    rng = np.random.default_rng(seed)
    kc = params.c2 * params.lam ** -0.5
    k = kc * (1.0 + 9.0 * rng.random(n_samples))
    eta = rng.uniform(-1e3, 1e3, n_samples) * k
    t = rng.uniform(0.0, 1e3, n_samples)
    g = np.abs(_fd_log(log_m2, k, eta, t, params, "k"))
    bound = params.lam ** (1.0 / 3.0) * np.abs(k) ** (-4.0 / 3.0) * np.abs(eta) + 1.0 / np.abs(k)
    return float(np.max(g / bound))


def fit_m5_inverse_constant(params: PhysicalParams, lattice: PropertyLattice) -> float:
    """Best constant in 1/m5 <= C (1 + min(nu <t - eta/k>, alpha))."""
    if params.regime is not Regime.MU13_LE_NU:
        return 0.0
    k, eta, t = lattice.mesh()
    lm5 = log_m5(k, eta, t, params)
    r = _ratio_eta_over_k(k, eta)
    s = t - r
    bound = 1.0 + np.minimum(params.nu * np.sqrt(1.0 + s * s), params.alpha)
    return float(np.max(np.exp(-lm5) / bound))


def check_properties(params: PhysicalParams, lattice: PropertyLattice | None = None,
                     tol: float = 1e-10) -> PropertyReport:
    """Run the full weight-property suite; hard bounds plus fitted constants."""
    if lattice is None:
        lattice = PropertyLattice.default()
    gap_holds, gap_worst, gap_witness = check_dissipation_gap(params, lattice, tol)
    if params.regime is Regime.NU_LE_MU3:
        strict, nviol, best, factor, demoted, witness = check_m6_lower_bound(params, lattice, tol)
    else:
        strict, nviol, best, factor, demoted, witness = True, 0, 0.0, m6_demotion_factor(params.mu), True, None

    k, eta, t = lattice.mesh()
    minima = {}
    for idx in (1, 2, 3, 4):
        minima[f"log_m{idx}_min"] = float(np.min(_LOG_BY_INDEX[idx](k, eta, t, params)))

    return PropertyReport(
        params=params.to_dict(),
        lattice_points=lattice.size(),
        dissipation_gap_holds=gap_holds,
        dissipation_gap_min_margin=gap_worst,
        dissipation_gap_witness=gap_witness,
        m6_bound_strict_holds=strict,
        m6_bound_violations=nviol,
        m6_bound_best_constant=best,
        m6_bound_demoted_factor=factor,
        m6_bound_demoted_holds=demoted,
        m6_bound_witness=witness,
        eta_derivative_fitted_constant=fit_eta_derivative_constant(params, lattice),
        k_derivative_fitted_constant=fit_k_derivative_constant(params),
        m5_inverse_fitted_constant=fit_m5_inverse_constant(params, lattice),
        log_weight_minima=minima,
        tolerance=tol,
    )
