"""Field-level energy functionals, damping norms and bootstrap monitoring.

Every functional here is a weighted spectral sum over the lattice with the
grid's fixed measure.  Composite-weight factors enter through their logs and
are exponentiated relative to the lattice maximum, so records stay exact
wherever they are representable and degrade gracefully to zero where the
weight has collapsed below the double-precision floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .grid import (
    Grid,
    MhdState,
    SpectralField,
    gamma_symbol,
    inverse_transform,
    p_symbol,
    sobolev_log_weight,
)
from .multipliers import MultiplierStack, chi_window, chibar_window
from .params import PhysicalParams, Regime


@dataclass
class EnergyRecord:
    """One timestamped row of the diagnostic functionals.

    Column order of the CSV output follows the field order here.
    """

    t: float
    E: float            # weighted nonzero-mode energy of (omega, j), chi-mixed
    E0: float           # zero-mode energy of (u1_0, b1_0) plus <t>^-2 vorticity part
    D: float            # weighted dissipation of (omega, j), nonzero modes
    D0: float           # zero-mode dissipation
    CK: float           # weight-decay (Cauchy-Kovalevskaya) term of (omega, j)
    Ebar: float         # weighted energy of the symmetric pair, chibar-mixed
    Etilde: float       # plain weighted energy of (omega, j), all modes
    Dbar: float
    Dtilde: float
    CKbar: float
    CKtilde: float
    u1_neq: float       # L2 norms of nonzero-mode velocity/magnetic components
    u2_neq: float
    b1_neq: float
    b2_neq: float
    omega_neq_HN: float         # static-frame Sobolev norm
    j_neq_HN: float
    omega_neq_HN_moving: float  # sheared-frame Sobolev norm
    j_neq_HN_moving: float
    ratio_E: float      # E / (10 eps^2)
    ratio_Etilde: float  # Etilde / (1000 eps^2 <t>^2)
    ratio_E0: float     # E0 / (10 eps^2)

    @classmethod
    def csv_header(cls) -> str:
        return ",".join(f.name for f in fields(cls))

    def csv_row(self) -> str:
        return ",".join(repr(float(getattr(self, f.name))) for f in fields(self))

    @classmethod
    def from_csv(cls, path) -> list["EnergyRecord"]:
        names = [f.name for f in fields(cls)]
        out = []
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            idx = [header.index(n) for n in names]
            for line in fh:
                vals = line.strip().split(",")
                out.append(cls(**{n: float(vals[i]) for n, i in zip(names, idx)}))
        return out


def _stable_weight(log_w: np.ndarray) -> tuple[np.ndarray, float]:
    """exp(2*(log_w - ref)) together with exp-scale 2*ref, overflow-free."""
    ref = float(np.max(log_w))
    return np.exp(2.0 * (log_w - ref)), 2.0 * ref


def _wsum(grid: Grid, quad: np.ndarray, w2: np.ndarray, log_scale2: float) -> float:
    s = float(np.sum(quad * w2)) * grid.spectral_measure
    if s == 0.0:
        return 0.0
    return s * math.exp(min(log_scale2, 700.0 - math.log(max(s, 1e-300))))


def bracket_t(t: float) -> float:
    return math.sqrt(1.0 + t * t)


@dataclass
class FieldEnergyDetail:
    energy: float
    quad: float          # ||M a||^2 + ||M b||^2 part entering the sandwich
    mixed: float
    dissipation: float
    ck: float


def _pair_functionals(grid: Grid, a: np.ndarray, b: np.ndarray, t: float,
                      params: PhysicalParams, log_w: np.ndarray,
                      window: np.ndarray, beta_weight: float) -> FieldEnergyDetail:
    """Shared energy/dissipation/CK machinery for a weighted field pair."""
    kk, ee = grid.kk, grid.ee
    p = p_symbol(kk, ee, t)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_p = np.where(p > 0, 1.0 / p, 0.0)
    shifted = ee - kk * t
    w2, ls2 = _stable_weight(log_w)
    qa = np.abs(a) ** 2
    qb = np.abs(b) ** 2
    quad = _wsum(grid, qa + qb, w2, ls2)
    cross = np.imag(a * np.conj(b))
    mixed = _wsum(grid, 2.0 * beta_weight * shifted * inv_p * window * cross, w2, ls2)
    energy = 0.5 * (quad + mixed)
    diss = _wsum(grid, (params.nu * qa + params.mu * qb) * p, w2, ls2)
    gam2 = gamma_symbol(kk, ee, t) ** 2
    ckw = gam2 + params.lam ** (1.0 / 3.0) * np.abs(kk) ** (2.0 / 3.0)
    ck = _wsum(grid, ckw * (qa + qb), w2, ls2)
    return FieldEnergyDetail(energy, quad, mixed, diss, ck)


def field_energy(state: MhdState, t: float, params: PhysicalParams,
                 stack: MultiplierStack | None = None) -> FieldEnergyDetail:
    """Weighted nonzero-mode energy of (omega, j) with the chi-window mixed
    term, plus its dissipation and CK companions."""
    grid = state.grid
    stack = stack or MultiplierStack.on_grid(params, t, grid)
    a = state.omega.coeffs.copy()
    b = state.j.coeffs.copy()
    a[0, :] = 0.0
    b[0, :] = 0.0
    win = chi_window(grid.kk, grid.ee, t, params.mu)
    return _pair_functionals(grid, a, b, t, params, stack.log_total, win,
                             1.0 / params.beta)


def symmetric_energy(state: MhdState, t: float, params: PhysicalParams,
                     stack: MultiplierStack | None = None) -> FieldEnergyDetail:
    """Weighted energy of the symmetric pair with the chibar-window mixed term."""
    grid = state.grid
    stack = stack or MultiplierStack.on_grid(params, t, grid)
    gam = gamma_symbol(grid.kk, grid.ee, t)
    a = gam * state.omega.coeffs
    b = gam * state.j.coeffs
    win = chibar_window(grid.kk, grid.ee, t, params.nu)
    return _pair_functionals(grid, a, b, t, params, stack.log_total, win,
                             1.0 / abs(params.beta))


def plain_energy(state: MhdState, t: float, params: PhysicalParams,
                 stack: MultiplierStack | None = None) -> FieldEnergyDetail:
    """No-mixed-term weighted energy of (omega, j) over all modes."""
    grid = state.grid
    stack = stack or MultiplierStack.on_grid(params, t, grid)
    zero = np.zeros(grid.shape)
    return _pair_functionals(grid, state.omega.coeffs, state.j.coeffs, t,
                             params, stack.log_total, zero, 0.0)


def zero_mode_energy(state: MhdState, t: float, params: PhysicalParams) -> tuple[float, float]:
    """Zero-mode functionals: 1D Sobolev norms of the streamwise velocity and
    magnetic components plus the <t>^-2-weighted vorticity/current norms."""
    grid = state.grid
    eta = grid.eta
    n = params.n
    lw = sobolev_log_weight(0.0, eta, n)
    w2 = np.exp(2.0 * lw)
    measure = grid.spectral_measure

    om0 = state.omega.zero_mode_row()
    j0 = state.j.zero_mode_row()
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_eta = np.where(eta != 0, 1.0 / eta, 0.0)
    u10 = 1j * inv_eta * om0
    b10 = 1j * inv_eta * j0

    def n2(row, extra=None):
        q = np.abs(row) ** 2 * w2
        if extra is not None:
            q = q * extra
        return float(np.sum(q)) * measure

    t2 = 1.0 / (1.0 + t * t)
    e0 = 0.5 * (n2(u10) + n2(b10) + t2 * (n2(om0) + n2(j0)))
    eta2 = eta * eta
    d0 = (params.nu * n2(u10, eta2) + params.mu * n2(b10, eta2)
          + t2 * (params.nu * n2(om0, eta2) + params.mu * n2(j0, eta2)))
    return e0, d0


def damping_norms(state: MhdState, t: float) -> dict:
    """L2 norms of the nonzero-mode velocity and magnetic components and
    their time-weighted products used in the damping envelopes."""
    grid = state.grid
    measure = grid.spectral_measure
    u1, u2 = state.u
    b1, b2 = state.b

    def neq_norm(f: SpectralField) -> float:
        q = np.abs(f.coeffs) ** 2
        return math.sqrt(float(np.sum(q[1:, :])) * measure)

    out = {
        "u1_neq": neq_norm(u1), "u2_neq": neq_norm(u2),
        "b1_neq": neq_norm(b1), "b2_neq": neq_norm(b2),
    }
    br = bracket_t(t)
    out["weighted_first"] = br * math.hypot(out["u1_neq"], out["b1_neq"])
    out["weighted_second"] = br**2 * math.hypot(out["u2_neq"], out["b2_neq"])
    return out


def damping_envelope_log(params: PhysicalParams, t: float) -> float:
    """log of the regime envelope for the time-weighted damping norms."""
    br = bracket_t(t)
    if params.regime is Regime.NU_LE_MU3:
        return min(-math.log(params.mu) / 3.0, math.log(br)) - params.decay_rate * t
    if params.regime is Regime.MU3_LE_NU_LE_MU13:
        return -params.decay_rate * t
    return math.log(params.alpha) - params.decay_rate * t


def sobolev_neq_norm(f: SpectralField, n: float, moving: bool) -> float:
    grid = f.grid
    eta = grid.ee - grid.kk * f.frame_time if moving else grid.ee
    lw = sobolev_log_weight(grid.kk, eta, n)
    q = np.abs(f.coeffs) ** 2 * np.exp(2.0 * lw)
    return math.sqrt(float(np.sum(q[1:, :])) * grid.spectral_measure)


def make_record(state: MhdState, t: float, params: PhysicalParams,
                epsilon: float) -> EnergyRecord:
    stack = MultiplierStack.on_grid(params, t, state.grid)
    fe = field_energy(state, t, params, stack)
    se = symmetric_energy(state, t, params, stack)
    pe = plain_energy(state, t, params, stack)
    e0, d0 = zero_mode_energy(state, t, params)
    dn = damping_norms(state, t)
    br2 = 1.0 + t * t
    eps2 = epsilon * epsilon
    return EnergyRecord(
        t=t,
        E=fe.energy, E0=e0, D=fe.dissipation, D0=d0, CK=fe.ck,
        Ebar=se.energy, Etilde=pe.energy,
        Dbar=se.dissipation, Dtilde=pe.dissipation,
        CKbar=se.ck, CKtilde=pe.ck,
        u1_neq=dn["u1_neq"], u2_neq=dn["u2_neq"],
        b1_neq=dn["b1_neq"], b2_neq=dn["b2_neq"],
        omega_neq_HN=sobolev_neq_norm(state.omega, params.n, moving=False),
        j_neq_HN=sobolev_neq_norm(state.j, params.n, moving=False),
        omega_neq_HN_moving=sobolev_neq_norm(state.omega, params.n, moving=True),
        j_neq_HN_moving=sobolev_neq_norm(state.j, params.n, moving=True),
        ratio_E=fe.energy / (10.0 * eps2),
        ratio_Etilde=pe.energy / (1000.0 * eps2 * br2),
        ratio_E0=e0 / (10.0 * eps2),
    )


# ---------------------------------------------------------------------------
# zero-mode forcing diagnostics
# ---------------------------------------------------------------------------

def quadratic_zero_profiles(state: MhdState, t: float,
                            dealias_fraction: float = 2.0 / 3.0) -> dict:
    """x-averages of the quadratic nonzero-mode products feeding the
    zero-mode energy, as spectral rows over eta."""
    grid = state.grid
    mask = grid.dealias_mask(dealias_fraction)

    def neq_phys(coeffs):
        c = coeffs * mask
        c = c.copy()
        c[0, :] = 0.0
        return inverse_transform(SpectralField(grid, c, t))

    u1, u2 = state.u
    b1, b2 = state.b
    kk, ee = grid.kk, grid.ee
    p = p_symbol(kk, ee, t)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_p = np.where(p > 0, 1.0 / p, 0.0)

    om = neq_phys(state.omega.coeffs)
    jj = neq_phys(state.j.coeffs)
    u1p, u2p = neq_phys(u1.coeffs), neq_phys(u2.coeffs)
    b1p, b2p = neq_phys(b1.coeffs), neq_phys(b2.coeffs)
    core_om = neq_phys((1.0 - 2.0 * kk * kk * inv_p) * state.omega.coeffs)
    core_j = neq_phys((1.0 - 2.0 * kk * kk * inv_p) * state.j.coeffs)
    dx_b1 = neq_phys(1j * kk * b1.coeffs)
    dx_u1 = neq_phys(1j * kk * u1.coeffs)

    def zero_row(phys):
        c = np.fft.fft2(phys)
        return c[0, :] / grid.nx  # x-average in spectral form over eta

    return {
        "u2u1": zero_row(u2p * u1p),
        "b2b1": zero_row(b2p * b1p),
        "u2b1": zero_row(u2p * b1p),
        "b2u1": zero_row(b2p * u1p),
        "u2omega": zero_row(u2p * om),
        "b2j": zero_row(b2p * jj),
        "u2j": zero_row(u2p * jj),
        "b2omega": zero_row(b2p * om),
        "bx_core": zero_row(2.0 * dx_b1 * core_om),
        "ux_core": zero_row(2.0 * dx_u1 * core_j),
    }


def r_terms(state: MhdState, t: float, params: PhysicalParams,
            dealias_fraction: float = 2.0 / 3.0) -> dict:
    """Named magnitudes of the zero-mode forcing inner products.

    Note: the second stretching-core product pairs the vorticity with its own
    stream-function correction (omega - 2 dXX lap^-1 omega); the swap-symmetric
    partner uses the current analogue.
    """
    grid = state.grid
    eta = grid.eta
    n = params.n
    w2 = np.exp(2.0 * sobolev_log_weight(0.0, eta, n))
    measure = grid.spectral_measure
    prof = quadratic_zero_profiles(state, t, dealias_fraction)

    om0 = state.omega.zero_mode_row() / grid.nx  # x-average convention
    j0 = state.j.zero_mode_row() / grid.nx
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_eta = np.where(eta != 0, 1.0 / eta, 0.0)
    dy_u10 = 1j * eta * (1j * inv_eta * om0)      # d_Y of u1 zero mode
    dy_b10 = 1j * eta * (1j * inv_eta * j0)
    dy_om0 = 1j * eta * om0
    dy_j0 = 1j * eta * j0

    def pair(row, other):
        return abs(float(np.real(np.sum(row * np.conj(other) * w2))) * measure)

    t2 = 1.0 / (1.0 + t * t)
    return {
        "uu_vs_u0": pair(prof["u2u1"], dy_u10),
        "bb_vs_u0": pair(prof["b2b1"], dy_u10),
        "ub_vs_b0": pair(prof["u2b1"], dy_b10),
        "bu_vs_b0": pair(prof["b2u1"], dy_b10),
        "uomega_vs_omega0": t2 * pair(prof["u2omega"], dy_om0),
        "bj_vs_omega0": t2 * pair(prof["b2j"], dy_om0),
        "uj_vs_j0": t2 * pair(prof["u2j"], dy_j0),
        "bomega_vs_j0": t2 * pair(prof["b2omega"], dy_j0),
        "bx_core_vs_j0": t2 * pair(prof["bx_core"], j0),
        "ux_core_vs_j0": t2 * pair(prof["ux_core"], j0),
    }


# ---------------------------------------------------------------------------
# bootstrap monitoring
# ---------------------------------------------------------------------------

@dataclass
class BootstrapReport:
    regime: str
    epsilon: float
    violated: bool
    first_violation_time: float | None
    first_violation_kind: str | None
    max_margins: dict

    def ok(self) -> bool:
        return not self.violated


def bootstrap_monitor(records: list[EnergyRecord], epsilon: float,
                      params: PhysicalParams) -> BootstrapReport:
    """Running checks of the regime's bootstrap inequalities with trapezoidal
    time integrals; the first violation time, if any, is data."""
    if not records:
        raise ValueError("no records to monitor")
    eps2 = epsilon * epsilon
    coef = 1.0 / (100.0 * abs(params.beta))
    ts = np.array([r.t for r in records])
    dt = np.diff(ts)

    def running(vals):
        v = np.asarray(vals)
        return np.concatenate([[0.0], np.cumsum(0.5 * (v[1:] + v[:-1]) * dt)])

    checks: list[tuple[str, np.ndarray, np.ndarray]] = []
    e0 = np.array([r.E0 for r in records])
    i0 = coef * running([r.D0 for r in records])
    checks.append(("zero_mode", e0 + i0, np.full(ts.shape, 10.0 * eps2)))
    if params.regime is Regime.NU_LE_MU3:
        e = np.array([r.E for r in records])
        ig = coef * running([r.D + r.CK for r in records])
        checks.append(("nonzero_mode", e + ig, np.full(ts.shape, 10.0 * eps2)))
    else:
        eb = np.array([r.Ebar for r in records])
        ib = coef * running([r.Dbar + r.CKbar for r in records])
        checks.append(("symmetric", eb + ib, np.full(ts.shape, 10.0 * eps2)))
        et = np.array([r.Etilde for r in records])
        it_ = coef * running([r.Dtilde + r.CKtilde for r in records])
        checks.append(("plain_growth", et + it_, 1000.0 * eps2 * (1.0 + ts * ts)))

    violated = False
    first_t = None
    first_kind = None
    margins = {}
    for kind, lhs, rhs in checks:
        ratio = lhs / rhs
        margins[kind] = float(np.max(ratio))
        bad = np.where(ratio > 1.0)[0]
        if bad.size:
            tviol = float(ts[bad[0]])
            if not violated or tviol < first_t:
                violated, first_t, first_kind = True, tviol, kind
    return BootstrapReport(
        regime=params.regime.name, epsilon=epsilon, violated=violated,
        first_violation_time=first_t, first_violation_kind=first_kind,
        max_margins=margins,
    )
