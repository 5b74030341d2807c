"""Pseudospectral solver for the full nonlinear pair dynamics in the
sheared frame.

Quadratic terms are formed in physical space from dealiased spectral factors
(sharp 2/3-rule truncation on both wavenumber axes before every product);
gradients carry the moving-frame symbols ik and i(eta - k t).  Time stepping
is a Lawson (integrating-factor) Heun scheme: the linear block - coupling,
diffusion and the linear stretching term - is propagated per mode with the
same closed-form Magnus step the mode solver uses, while the quadratic terms
are treated explicitly.  The nonlinear stage is therefore the only source of
a step-size restriction.
"""

from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import EnergyRecord, make_record
from .grid import Grid, MhdState, SpectralField, sobolev_log_weight
from .linear_modes import Variant, _Batch
from .params import ConfigError, PhysicalParams


class NumericalAbort(RuntimeError):
    """The solution left the representable range; carries a diagnostic record."""

    def __init__(self, message, record: dict | None = None):
        super().__init__(message)
        self.record = record or {}


class BudgetError(RuntimeError):
    """Active spectral support drifted beyond the representable lattice."""


@dataclass
class SolverConfig:
    grid: Grid
    params: PhysicalParams
    epsilon: float = 1e-6
    dt_initial: float = 0.05
    dealias_fraction: float = 2.0 / 3.0
    t_final: float | None = None
    output_stride: int = 10
    initial_profile: str = "band_random"
    seed: int = 0
    band_k: int | None = None
    band_eta: float | None = None
    cfl_safety: float = 0.4
    include_linear_stretching: bool = True
    freeze_symbol_time: float | None = None
    strict_budget: bool = False

    def __post_init__(self):
        if not 0.0 < self.dealias_fraction <= 1.0:
            raise ConfigError(
                f"dealias_fraction must lie in (0, 1], got {self.dealias_fraction}")
        if self.t_final is None:
            horizon = 20.0 * self.params.lam ** (-1.0 / 3.0)
            self.t_final = min(self.grid.t_final, horizon)
        if self.dt_initial <= 0:
            raise ConfigError(f"dt_initial must be positive, got {self.dt_initial}")
        if self.output_stride < 1:
            raise ConfigError(f"output_stride must be >= 1, got {self.output_stride}")
        if self.band_k is None:
            self.band_k = min(8, self.grid.k_max)
        if self.band_eta is None:
            self.band_eta = min(4.0, self.grid.eta_max / 4.0)
        margin = self.grid.budget_margin(self.band_eta, self.t_final)
        if self.strict_budget and margin < 0:
            raise BudgetError(
                f"resolution budget violated: drifted static-frame frequency "
                f"exceeds the eta lattice by {-margin:.3g}")

    def to_dict(self) -> dict:
        d = {
            "grid": self.grid.to_dict(),
            "params": self.params.to_dict(),
            "epsilon": self.epsilon,
            "dt_initial": self.dt_initial,
            "dealias_fraction": self.dealias_fraction,
            "t_final": self.t_final,
            "output_stride": self.output_stride,
            "initial_profile": self.initial_profile,
            "seed": self.seed,
            "band_k": self.band_k,
            "band_eta": self.band_eta,
            "cfl_safety": self.cfl_safety,
            "include_linear_stretching": self.include_linear_stretching,
            "freeze_symbol_time": self.freeze_symbol_time,
            "strict_budget": self.strict_budget,
        }
        return d


# ---------------------------------------------------------------------------
# initial data
# ---------------------------------------------------------------------------

def _normalize_pair(grid: Grid, wc: np.ndarray, jc: np.ndarray, n: int,
                    epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    """Scale so the joint static Sobolev norm at t = 0 equals epsilon."""
    lw = sobolev_log_weight(grid.kk, grid.ee, n)
    w2 = np.exp(2.0 * lw)
    total = grid.spectral_measure * float(
        np.sum((np.abs(wc) ** 2 + np.abs(jc) ** 2) * w2))
    if total == 0.0:
        raise ConfigError("initial profile is identically zero")
    s = epsilon / math.sqrt(total)
    return wc * s, jc * s


def _symmetrize(grid: Grid, c: np.ndarray) -> np.ndarray:
    rev = c[::-1, :][:, ::-1]
    rev = np.roll(np.roll(rev, 1, axis=0), 1, axis=1)
    return 0.5 * (c + rev.conj())


def band_random_state(config: SolverConfig) -> MhdState:
    """Band-limited random pair with prescribed joint Sobolev norm."""
    grid, params = config.grid, config.params
    rng = np.random.default_rng(config.seed)
    kk, ee = grid.kk, grid.ee
    band = (np.abs(kk) <= config.band_k) & (np.abs(ee) <= config.band_eta)
    band &= grid.dealias_mask(config.dealias_fraction)

    def draw():
        c = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
        c = _symmetrize(grid, c * band)
        c[0, 0] = 0.0
        return c

    wc, jc = _normalize_pair(grid, draw(), draw(), params.n, config.epsilon)
    return MhdState(SpectralField(grid, wc, 0.0), SpectralField(grid, jc, 0.0))


def single_mode_state(config: SolverConfig, k0: int = 1, m0: int = 2,
                      j_fraction: float = 0.5) -> MhdState:
    grid, params = config.grid, config.params
    wc = np.zeros(grid.shape, dtype=complex)
    jc = np.zeros(grid.shape, dtype=complex)
    wc[k0 % grid.nx, m0 % grid.ny] = 1.0
    jc[k0 % grid.nx, m0 % grid.ny] = j_fraction * (1.0 + 0.5j)
    wc = _symmetrize(grid, wc)
    jc = _symmetrize(grid, jc)
    wc, jc = _normalize_pair(grid, wc, jc, params.n, config.epsilon)
    return MhdState(SpectralField(grid, wc, 0.0), SpectralField(grid, jc, 0.0))


def gaussian_bump_state(config: SolverConfig, sigma_x: float = 0.8,
                        sigma_y: float = 1.5) -> MhdState:
    grid, params = config.grid, config.params
    x = grid.x[:, None]
    y = grid.y[None, :]
    bump = np.exp(-((x - math.pi) / sigma_x) ** 2 - (y / sigma_y) ** 2)
    w_phys = bump * np.sin(x - math.pi)
    j_phys = 0.5 * bump * np.cos(2.0 * (x - math.pi))
    mask = grid.dealias_mask(config.dealias_fraction)
    wc = np.fft.fft2(w_phys) * mask
    jc = np.fft.fft2(j_phys) * mask
    wc[0, 0] = 0.0
    jc[0, 0] = 0.0
    wc, jc = _normalize_pair(grid, wc, jc, params.n, config.epsilon)
    return MhdState(SpectralField(grid, wc, 0.0), SpectralField(grid, jc, 0.0))


def zero_mode_only_state(config: SolverConfig, width: float = 2.0) -> MhdState:
    """Pure x-averaged data; the dynamics reduce to 1D diffusion plus the
    zero-mode feedback terms, all transport with an x-derivative vanishing."""
    grid, params = config.grid, config.params
    y = grid.y
    w_row = np.fft.fft(np.exp(-(y / width) ** 2) * y)
    wc = np.zeros(grid.shape, dtype=complex)
    jc = np.zeros(grid.shape, dtype=complex)
    wc[0, :] = w_row
    jc[0, :] = 0.5 * w_row
    wc[0, 0] = 0.0
    jc[0, 0] = 0.0
    wc, jc = _normalize_pair(grid, wc, jc, params.n, config.epsilon)
    return MhdState(SpectralField(grid, wc, 0.0), SpectralField(grid, jc, 0.0))


INITIAL_PROFILES = {
    "band_random": band_random_state,
    "single_mode": single_mode_state,
    "gaussian_bump": gaussian_bump_state,
    "zero_mode_only": zero_mode_only_state,
}


def initial_state(config: SolverConfig) -> MhdState:
    try:
        maker = INITIAL_PROFILES[config.initial_profile]
    except KeyError:
        raise ConfigError(
            f"unknown initial_profile {config.initial_profile!r}; "
            f"choose one of {sorted(INITIAL_PROFILES)}") from None
    return maker(config)


# ---------------------------------------------------------------------------
# nonlinear terms
# ---------------------------------------------------------------------------

def compute_nonlinear(state: MhdState, t: float,
                      dealias_fraction: float = 2.0 / 3.0,
                      check_budget: bool = True,
                      strict_budget: bool = False) -> tuple[SpectralField, SpectralField, dict]:
    """Quadratic right-hand sides for the pair, plus physical-field stats.

    Every factor is dealiased before transforming; the products are formed
    pointwise in physical space and the result is re-truncated.  The returned
    stats carry the velocity extrema the step-size control needs.
    """
    grid = state.grid
    if state.t != t:
        raise ConfigError(f"state frame time {state.t} does not match t={t}")
    mask = grid.dealias_mask(dealias_fraction)
    kk, ee = grid.kk, grid.ee
    shifted = ee - kk * t
    p = kk * kk + shifted * shifted
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_p = np.where(p > 0, 1.0 / p, 0.0)

    wc = state.omega.coeffs * mask
    jc = state.j.coeffs * mask

    if check_budget:
        mags = np.abs(wc) + np.abs(jc)
        top = float(mags.max())
        if top > 0.0:
            active = mags > 1e-13 * top
            drift = float(np.max(np.abs(shifted) * active))
            if strict_budget and drift > grid.eta_max:
                raise BudgetError(
                    f"drifted frequency |eta - k t| = {drift:.4g} exceeds the "
                    f"eta lattice bound {grid.eta_max:.4g} at t = {t:.4g}")

    def phys(c):
        return np.real(np.fft.ifft2(c))

    u1 = phys(1j * shifted * inv_p * wc)
    u2 = phys(-1j * kk * inv_p * wc)
    b1 = phys(1j * shifted * inv_p * jc)
    b2 = phys(-1j * kk * inv_p * jc)
    dx_w = phys(1j * kk * wc)
    dy_w = phys(1j * shifted * wc)
    dx_j = phys(1j * kk * jc)
    dy_j = phys(1j * shifted * jc)
    # stretching blocks: 2 dX dYL lap^-1 f  and  f - 2 dXX lap^-1 f
    s_phi = phys(2.0 * kk * shifted * inv_p * jc)
    s_psi = phys(2.0 * kk * shifted * inv_p * wc)
    core_w = phys((1.0 - 2.0 * kk * kk * inv_p) * wc)
    core_j = phys((1.0 - 2.0 * kk * kk * inv_p) * jc)

    nl_w = -(u1 * dx_w + u2 * dy_w) + (b1 * dx_j + b2 * dy_j)
    nl_j = (-(u1 * dx_j + u2 * dy_j) + (b1 * dx_w + b2 * dy_w)
            + s_phi * core_w - s_psi * core_j)

    nlw_c = np.fft.fft2(nl_w) * mask
    nlj_c = np.fft.fft2(nl_j) * mask
    stats = {
        "max_u1": float(np.max(np.abs(u1))), "max_u2": float(np.max(np.abs(u2))),
        "max_b1": float(np.max(np.abs(b1))), "max_b2": float(np.max(np.abs(b2))),
        "max_shift": float(np.max(np.abs(shifted * mask))),
    }
    return (SpectralField(grid, nlw_c, t), SpectralField(grid, nlj_c, t), stats)


def stability_dt(grid: Grid, stats: dict, cfl_safety: float) -> float:
    """Advective step bound from the physical-space extrema."""
    kx = float(grid.k_max)
    speed = (kx * (stats["max_u1"] + stats["max_b1"])
             + stats["max_shift"] * (stats["max_u2"] + stats["max_b2"]))
    if speed <= 0.0:
        return math.inf
    return cfl_safety / speed


# ---------------------------------------------------------------------------
# time stepping
# ---------------------------------------------------------------------------

class Stepper:
    """Lawson-Heun stepper with the closed-form linear propagator."""

    def __init__(self, config: SolverConfig):
        self.config = config
        grid = config.grid
        self.batch = _Batch(
            np.broadcast_to(grid.kk, grid.shape).copy(),
            np.broadcast_to(grid.ee, grid.shape).copy(),
            config.params, Variant.OMEGA_J,
            zero_stretching=not config.include_linear_stretching,
            freeze_time=config.freeze_symbol_time,
            allow_static_mode=True,
        )

    def step(self, state: MhdState, t: float, dt: float) -> tuple[MhdState, float, dict]:
        """One Lawson-Heun step; dt is clamped to the advective stability
        bound measured on the current state.  Returns the dt actually taken."""
        cfg = self.config
        grid = state.grid
        nl1_w, nl1_j, stats = compute_nonlinear(
            state, t, cfg.dealias_fraction, strict_budget=cfg.strict_budget)
        dt_stable = stability_dt(grid, stats, cfg.cfl_safety)
        stats["dt_stable"] = dt_stable
        dt = min(dt, dt_stable)
        if dt <= 1e-9 * max(1.0, cfg.t_final):
            raise NumericalAbort(
                f"advective stability bound collapsed to {dt_stable:.3g} at t = {t:.6g}",
                record={"t": t, **stats},
            )
        e11, e12, e21, e22, dls = self.batch.step_matrix(t, dt)
        scale = np.exp(dls)  # fold the common decay factor back in
        p11, p12, p21, p22 = e11 * scale, e12 * scale, e21 * scale, e22 * scale

        w0, j0 = state.omega.coeffs, state.j.coeffs
        aw = w0 + dt * nl1_w.coeffs
        aj = j0 + dt * nl1_j.coeffs
        pred = MhdState(
            SpectralField(grid, p11 * aw + p12 * aj, t + dt),
            SpectralField(grid, p21 * aw + p22 * aj, t + dt),
        )
        nl2_w, nl2_j, _ = compute_nonlinear(
            pred, t + dt, cfg.dealias_fraction, check_budget=False)

        bw = w0 + 0.5 * dt * nl1_w.coeffs
        bj = j0 + 0.5 * dt * nl1_j.coeffs
        new_w = p11 * bw + p12 * bj + 0.5 * dt * nl2_w.coeffs
        new_j = p21 * bw + p22 * bj + 0.5 * dt * nl2_j.coeffs

        if not (np.all(np.isfinite(new_w)) and np.all(np.isfinite(new_j))):
            raise NumericalAbort(
                f"non-finite coefficients after step at t = {t:.6g}",
                record={"t": t, "dt": dt, **stats},
            )
        out = MhdState(SpectralField(grid, new_w, t + dt),
                       SpectralField(grid, new_j, t + dt))
        stats["dt"] = dt
        return out, dt, stats


@dataclass
class RunResult:
    config: SolverConfig
    records: list
    final_state: MhdState
    status: str
    n_steps: int
    wall_time: float
    abort_record: dict | None = None

    def record_array(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


def run(config: SolverConfig, state: MhdState | None = None,
        t_start: float = 0.0, record_hook=None, stop_condition=None,
        max_steps: int = 10_000_000) -> RunResult:
    """Integrate to t_final, emitting an EnergyRecord every output_stride
    steps; deterministic for a fixed config and seed.

    ``stop_condition(records)`` may return a reason string to end the run
    early; the result status becomes ``"stopped:<reason>"``.
    """
    t0_wall = _time.time()
    state = state if state is not None else initial_state(config)
    stepper = Stepper(config)
    params = config.params
    t = t_start
    records = [make_record(state, t, params, config.epsilon)]
    if record_hook:
        record_hook(records[-1], state)
    n = 0
    status = "ok"
    abort = None
    try:
        while t < config.t_final - 1e-12:
            dt = min(config.dt_initial, config.t_final - t)
            state, dt_taken, stats = stepper.step(state, t, dt)
            t += dt_taken
            n += 1
            if n % config.output_stride == 0 or t >= config.t_final - 1e-12:
                records.append(make_record(state, t, params, config.epsilon))
                if record_hook:
                    record_hook(records[-1], state)
                if stop_condition:
                    reason = stop_condition(records)
                    if reason:
                        status = f"stopped:{reason}"
                        break
            if n > max_steps:
                raise NumericalAbort(
                    f"step budget exhausted at t = {t:.6g}", record={"t": t, **stats})
    except NumericalAbort as exc:
        status = "aborted"
        abort = exc.record
    return RunResult(config=config, records=records, final_state=state,
                     status=status, n_steps=n, wall_time=_time.time() - t0_wall,
                     abort_record=abort)


# ---------------------------------------------------------------------------
# snapshots
# ---------------------------------------------------------------------------

def save_snapshot(path, state: MhdState, config: SolverConfig):
    np.savez_compressed(
        path,
        omega=state.omega.coeffs, j=state.j.coeffs, t=state.t,
        k_max=config.grid.k_max, m_y=config.grid.m_y, l_y=config.grid.l_y,
        grid_t_final=config.grid.t_final,
        nu=config.params.nu, mu=config.params.mu, beta=config.params.beta,
        n=config.params.n, delta0=config.params.delta0,
        c1=config.params.c1, c2=config.params.c2, c3=config.params.c3,
        c4=config.params.c4, epsilon=config.epsilon,
    )


def load_snapshot(path) -> tuple[MhdState, Grid, PhysicalParams, float]:
    d = np.load(path)
    grid = Grid(k_max=int(d["k_max"]), m_y=int(d["m_y"]), l_y=float(d["l_y"]),
                t_final=float(d["grid_t_final"]))
    params = PhysicalParams(
        nu=float(d["nu"]), mu=float(d["mu"]), beta=float(d["beta"]),
        n=int(d["n"]), delta0=float(d["delta0"]), c1=float(d["c1"]),
        c2=float(d["c2"]), c3=float(d["c3"]), c4=float(d["c4"]))
    t = float(d["t"])
    state = MhdState(SpectralField(grid, d["omega"], t),
                     SpectralField(grid, d["j"], t))
    return state, grid, params, t
