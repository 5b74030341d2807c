"""Truncated Fourier lattice in the sheared frame and field containers.

Coordinates follow the moving frame X = x - y*t, Y = y on the periodic strip
x in T, y in [-L_y, L_y].  Fields never get remapped: the frame shift lives
entirely in the differential symbols, where the Y-derivative picks up the
drifting factor (eta - k*t).

Conventions fixed once and used by every norm in the package:

* forward transform = plain double sum (numpy ``fft2``), inverse carries the
  1/(nx*ny) factor (numpy ``ifft2``);
* the spectral measure is ``h * 2*pi/(2*k_max+1)`` with ``h = pi/L_y``; the
  physical quadrature weight per grid point is ``measure * nx * ny`` so that
  Parseval holds exactly between the two discrete norms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .params import ConfigError


def p_symbol(k, eta, t):
    """Symbol k^2 + (eta - k t)^2 of the (negated) moving-frame Laplacian."""
    k = np.asarray(k, dtype=float)
    eta = np.asarray(eta, dtype=float)
    shifted = eta - k * t
    return k * k + shifted * shifted


def dt_p_symbol(k, eta, t):
    """Time derivative of p: -2k(eta - k t)."""
    k = np.asarray(k, dtype=float)
    eta = np.asarray(eta, dtype=float)
    return -2.0 * k * (eta - k * t)


def gamma_symbol(k, eta, t):
    """|k| / sqrt(p); zero on the k = 0 modes, which it annihilates."""
    k = np.asarray(k, dtype=float)
    p = p_symbol(k, eta, t)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.abs(k) / np.sqrt(p)
    return np.where(k == 0, 0.0, out)


def sobolev_log_weight(k, eta, n: float):
    """log of the static-frame weight (1 + k^2 + eta^2)^(n/2)."""
    k = np.asarray(k, dtype=float)
    eta = np.asarray(eta, dtype=float)
    return 0.5 * n * np.log1p(k * k + eta * eta)


@dataclass(frozen=True)
class Grid:
    """Resolved band [-k_max, k_max] x {h*m : m in [-m_y/2, m_y/2)}.

    The collocation grid in x has ``nx = 3*k_max + 1`` points so the 2/3-rule
    dealiased band is exactly ``|k| <= k_max``.  ``t_final`` is the horizon
    the grid was sized for; ``budget_margin`` quantifies how much of the
    eta-lattice headroom survives the linear-in-time drift of the
    moving-frame frequency (eta - k*t) when the solution is pulled back to
    static-frame frequencies.
    """

    k_max: int
    m_y: int
    l_y: float = 8.0 * math.pi
    t_final: float = 10.0

    def __post_init__(self):
        if self.k_max < 1:
            raise ConfigError(f"k_max must be >= 1, got {self.k_max}")
        if self.m_y < 4 or self.m_y % 2:
            raise ConfigError(f"m_y must be an even integer >= 4, got {self.m_y}")
        if self.l_y <= 0:
            raise ConfigError(f"l_y must be positive, got {self.l_y}")

    @property
    def nx(self) -> int:
        return 3 * self.k_max + 1

    @property
    def ny(self) -> int:
        return self.m_y

    @property
    def h(self) -> float:
        """eta lattice spacing pi / l_y."""
        return math.pi / self.l_y

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def k(self) -> np.ndarray:
        """Integer wavenumbers along axis 0 in FFT layout."""
        return np.rint(np.fft.fftfreq(self.nx) * self.nx).astype(int)

    @property
    def eta(self) -> np.ndarray:
        """eta frequencies along axis 1 in FFT layout."""
        return np.fft.fftfreq(self.ny) * self.ny * self.h

    @property
    def kk(self) -> np.ndarray:
        return self.k[:, None].astype(float)

    @property
    def ee(self) -> np.ndarray:
        return self.eta[None, :]

    @property
    def eta_max(self) -> float:
        return self.h * (self.m_y // 2)

    @property
    def spectral_measure(self) -> float:
        return self.h * 2.0 * math.pi / (2 * self.k_max + 1)

    @property
    def physical_weight(self) -> float:
        """Per-point quadrature weight making Parseval exact."""
        return self.spectral_measure * self.nx * self.ny

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, 2.0 * math.pi, self.nx, endpoint=False)

    @property
    def y(self) -> np.ndarray:
        return -self.l_y + np.arange(self.ny) * (2.0 * self.l_y / self.ny)

    def dealias_mask(self, fraction: float = 2.0 / 3.0) -> np.ndarray:
        """Boolean keep-mask for the sharp truncation rule."""
        if not 0 < fraction <= 1:
            raise ConfigError(f"dealias fraction must lie in (0, 1], got {fraction}")
        kc = fraction * (self.nx // 2)
        mc = fraction * (self.ny // 2)
        mm = np.rint(np.fft.fftfreq(self.ny) * self.ny).astype(int)
        return (np.abs(self.k)[:, None] <= kc) & (np.abs(mm)[None, :] <= mc)

    def budget_margin(self, eta_data_max: float, t_final: float | None = None) -> float:
        """Headroom h*m_y/2 - (eta_data_max + k_max*t_final); >= 0 means the
        drifted static-frame frequencies of band-limited data stay on-lattice."""
        tf = self.t_final if t_final is None else t_final
        return self.eta_max - (eta_data_max + self.k_max * tf)

    def budget_ok(self, eta_data_max: float, t_final: float | None = None) -> bool:
        return self.budget_margin(eta_data_max, t_final) >= 0.0

    def to_dict(self) -> dict:
        return {"k_max": self.k_max, "m_y": self.m_y, "l_y": self.l_y, "t_final": self.t_final}


@dataclass
class SpectralField:
    """Complex coefficients of one real scalar field on the grid lattice.

    ``frame_time`` records the time at which moving-frame symbols should be
    evaluated for this snapshot; it does not affect the stored coefficients.
    """

    grid: Grid
    coeffs: np.ndarray
    frame_time: float = 0.0

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != self.grid.shape:
            raise ConfigError(
                f"coefficient shape {self.coeffs.shape} does not match grid {self.grid.shape}"
            )

    @classmethod
    def zeros(cls, grid: Grid, t: float = 0.0) -> "SpectralField":
        return cls(grid, np.zeros(grid.shape, dtype=complex), t)

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy(), self.frame_time)

    def conjugate_symmetry_defect(self) -> float:
        """max |c(-k,-eta) - conj(c(k,eta))| relative to the field scale."""
        flipped = _reverse_modes(self.coeffs)
        scale = float(np.max(np.abs(self.coeffs))) or 1.0
        return float(np.max(np.abs(flipped.conj() - self.coeffs))) / scale

    def enforce_conjugate_symmetry(self):
        flipped = _reverse_modes(self.coeffs)
        self.coeffs = 0.5 * (self.coeffs + flipped.conj())
        # the eta-Nyquist row has no conjugate partner on an even lattice
        self.coeffs[:, self.grid.ny // 2] = 0.0

    def zero_mode_row(self) -> np.ndarray:
        """The k = 0 row (x-average of the field)."""
        return self.coeffs[0, :]

    def nonzero_part(self) -> "SpectralField":
        out = self.copy()
        out.coeffs[0, :] = 0.0
        return out

    def active_eta_max(self, rel_threshold: float = 1e-13) -> float:
        """Largest |eta| carrying a coefficient above rel_threshold * max."""
        mags = np.abs(self.coeffs)
        top = mags.max()
        if top == 0.0:
            return 0.0
        active = mags > rel_threshold * top
        return float(np.max(np.abs(self.grid.ee) * active))


def _reverse_modes(c: np.ndarray) -> np.ndarray:
    """Index map (k, eta) -> (-k, -eta) in FFT layout."""
    out = c[::-1, :][:, ::-1]
    return np.roll(np.roll(out, 1, axis=0), 1, axis=1)


def forward_transform(values: np.ndarray, grid: Grid, t: float = 0.0) -> SpectralField:
    """Plain-sum DFT of physical samples; exact round trip with inverse_transform."""
    values = np.asarray(values)
    if values.shape != grid.shape:
        raise ConfigError(f"physical shape {values.shape} does not match grid {grid.shape}")
    return SpectralField(grid, np.fft.fft2(values), t)


def inverse_transform(f: SpectralField) -> np.ndarray:
    """Inverse DFT carrying the 1/(nx*ny) normalization; returns the real part."""
    phys = np.fft.ifft2(f.coeffs)
    return np.real(phys)


def spectral_norm2(f: SpectralField, log_weight=None) -> float:
    """Weighted squared l2 norm with the grid's spectral measure."""
    mags2 = np.abs(f.coeffs) ** 2
    if log_weight is not None:
        mags2 = mags2 * np.exp(2.0 * log_weight)
    return float(f.grid.spectral_measure * np.sum(mags2))


def physical_norm2(values: np.ndarray, grid: Grid) -> float:
    return float(grid.physical_weight * np.sum(np.abs(values) ** 2))


def sobolev_norm2(f: SpectralField, n: float, moving: bool = False) -> float:
    """H^n squared norm; ``moving`` swaps eta for the drifted eta - k*t."""
    g = f.grid
    eta = g.ee - g.kk * f.frame_time if moving else g.ee
    lw = sobolev_log_weight(g.kk, eta, n)
    return spectral_norm2(f, log_weight=lw)


def biot_savart(omega: SpectralField, t: float) -> tuple[SpectralField, SpectralField]:
    """Velocity components from a vorticity-like field via the moving-frame
    stream function: u1 = i(eta - kt) w / p, u2 = -i k w / p.

    The (0,0) mode of the stream function is gauged to zero, so the mean of
    both components vanishes.
    """
    if omega.frame_time != t:
        raise ConfigError(
            f"field frame_time {omega.frame_time} does not match requested t={t}"
        )
    g = omega.grid
    p = p_symbol(g.kk, g.ee, t)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_p = 1.0 / p
    inv_p[0, 0] = 0.0
    shifted = g.ee - g.kk * t
    u1 = SpectralField(g, 1j * shifted * inv_p * omega.coeffs, t)
    u2 = SpectralField(g, -1j * g.kk * inv_p * omega.coeffs, t)
    return u1, u2


def to_symmetric(omega: SpectralField, j: SpectralField, t: float) -> tuple[SpectralField, SpectralField]:
    """Apply the symmetrizer |k|/sqrt(p) to both fields; k = 0 rows map to 0."""
    g = omega.grid
    gam = gamma_symbol(g.kk, g.ee, t)
    return (
        SpectralField(g, gam * omega.coeffs, t),
        SpectralField(g, gam * j.coeffs, t),
    )


@dataclass
class MhdState:
    """Paired vorticity/current fields with cached derived quantities."""

    omega: SpectralField
    j: SpectralField
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.omega.grid is not self.j.grid and self.omega.grid != self.j.grid:
            raise ConfigError("omega and j must share one grid")
        if self.omega.frame_time != self.j.frame_time:
            raise ConfigError("omega and j must share one frame time")

    @property
    def grid(self) -> Grid:
        return self.omega.grid

    @property
    def t(self) -> float:
        return self.omega.frame_time

    def invalidate(self):
        self._cache.clear()

    def _derived(self):
        if "u" not in self._cache:
            t = self.t
            self._cache["u"] = biot_savart(self.omega, t)
            self._cache["b"] = biot_savart(self.j, t)
        return self._cache

    @property
    def u(self) -> tuple[SpectralField, SpectralField]:
        return self._derived()["u"]

    @property
    def b(self) -> tuple[SpectralField, SpectralField]:
        return self._derived()["b"]

    def stream_function(self) -> SpectralField:
        return _inverse_laplacian(self.omega)

    def flux_function(self) -> SpectralField:
        return _inverse_laplacian(self.j)

    def copy(self) -> "MhdState":
        return MhdState(self.omega.copy(), self.j.copy())

    def divergence_defect(self) -> float:
        """max |i k u1 + i(eta-kt) u2| over modes, relative to the u scale."""
        u1, u2 = self.u
        g = self.grid
        shifted = g.ee - g.kk * self.t
        div = 1j * g.kk * u1.coeffs + 1j * shifted * u2.coeffs
        scale = max(float(np.max(np.abs(u1.coeffs))), float(np.max(np.abs(u2.coeffs)))) or 1.0
        return float(np.max(np.abs(div))) / scale


def _inverse_laplacian(f: SpectralField) -> SpectralField:
    g = f.grid
    p = p_symbol(g.kk, g.ee, f.frame_time)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = -1.0 / p
    inv[0, 0] = 0.0
    return SpectralField(g, inv * f.coeffs, f.frame_time)
