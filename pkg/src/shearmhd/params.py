"""Physical parameters and dissipation-regime classification.

The stability machinery splits into three regimes according to how the fluid
viscosity ``nu`` compares with powers of the magnetic resistivity ``mu``.
Every weight, energy functional and envelope in the package dispatches on the
regime tag derived here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum


class ConfigError(ValueError):
    """A configuration value violates one of the documented constraints."""


class Regime(Enum):
    NU_LE_MU3 = "nu<=mu^3"
    MU3_LE_NU_LE_MU13 = "mu^3<=nu<=mu^(1/3)"
    MU13_LE_NU = "mu^(1/3)<=nu"


def classify_regime(nu: float, mu: float) -> Regime:
    """Classify (nu, mu) into a regime; boundary ties go to the smaller index."""
    if nu <= mu**3:
        return Regime.NU_LE_MU3
    if nu <= mu ** (1.0 / 3.0):
        return Regime.MU3_LE_NU_LE_MU13
    return Regime.MU13_LE_NU


@dataclass(frozen=True)
class PhysicalParams:
    """Viscosity/resistivity pair, background field and weight constants.

    ``c1``..``c4`` and ``delta0`` parameterize the decay weights.  The
    defaults are the smallest values satisfying the strict constraints
    ``c2 > 3000``, ``c1 > 1000*c2``, ``c3 > c1/(|beta|-1/2)`` and
    ``delta0 <= 1/(100|beta|)``; they make the weights astronomically small
    past critical times, which is why every consumer works with
    log-multiplier values.
    """

    nu: float
    mu: float
    beta: float = 1.0
    n: int = 4
    delta0: float | None = None
    c1: float | None = None
    c2: float = 3001.0
    c3: float | None = None
    c4: float = 10.0

    def __post_init__(self):
        if not self.nu > 0:
            raise ConfigError(f"nu must be positive, got {self.nu}")
        if not self.mu > 0:
            raise ConfigError(f"mu must be positive, got {self.mu}")
        if self.n < 4:
            raise ConfigError(f"weight index n must be >= 4, got {self.n}")
        if self.c2 <= 3000:
            raise ConfigError(f"c2 must exceed 3000, got {self.c2}")
        if self.c1 is None:
            object.__setattr__(self, "c1", 1000.4 * self.c2)
        if self.c1 <= 1000 * self.c2:
            raise ConfigError(f"c1 must exceed 1000*c2 = {1000 * self.c2}, got {self.c1}")
        if self.c3 is None:
            if abs(self.beta) > 0.5:
                object.__setattr__(self, "c3", 1.01 * self.c1 / (abs(self.beta) - 0.5))
            else:
                # |beta| <= 1/2 falls outside the coercivity range; keep a
                # finite placeholder so weight evaluation stays defined.
                object.__setattr__(self, "c3", 1.01 * self.c1)
        elif abs(self.beta) > 0.5 and self.c3 <= self.c1 / (abs(self.beta) - 0.5):
            raise ConfigError(
                f"c3 must exceed c1/(|beta|-1/2) = {self.c1 / (abs(self.beta) - 0.5)}, got {self.c3}"
            )
        if self.c4 <= 0:
            raise ConfigError(f"c4 must be positive, got {self.c4}")
        if self.delta0 is None:
            object.__setattr__(self, "delta0", 1.0 / (200.0 * max(abs(self.beta), 0.5)))
        if not 0 < self.delta0 <= 1.0 / (100.0 * abs(self.beta)):
            raise ConfigError(
                f"delta0 must lie in (0, 1/(100|beta|)] = (0, {1.0 / (100.0 * abs(self.beta)):g}], got {self.delta0}"
            )

    @property
    def lam(self) -> float:
        """Smaller of the two dissipation coefficients."""
        return min(self.nu, self.mu)

    @property
    def alpha(self) -> float:
        return self.nu * self.mu ** (-1.0 / 3.0)

    @property
    def regime(self) -> Regime:
        return classify_regime(self.nu, self.mu)

    @property
    def decay_rate(self) -> float:
        """Regime-specific exponential rate in the decay envelopes."""
        if self.regime is Regime.NU_LE_MU3:
            return self.delta0 * self.nu ** (1.0 / 3.0)
        if self.regime is Regime.MU3_LE_NU_LE_MU13:
            return self.delta0 * self.lam ** (1.0 / 3.0)
        return self.delta0 * self.mu ** (1.0 / 3.0)

    def requires_coercive_beta(self):
        if abs(self.beta) <= 0.5:
            raise ConfigError(
                f"|beta| must exceed 1/2 for coercivity-dependent checks, got beta={self.beta}"
            )

    def to_dict(self) -> dict:
        return {
            "nu": self.nu,
            "mu": self.mu,
            "beta": self.beta,
            "n": self.n,
            "delta0": self.delta0,
            "c1": self.c1,
            "c2": self.c2,
            "c3": self.c3,
            "c4": self.c4,
            "lambda": self.lam,
            "alpha": self.alpha,
            "regime": self.regime.name,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PhysicalParams":
        keys = ("nu", "mu", "beta", "n", "delta0", "c1", "c2", "c3", "c4")
        kwargs = {k: d[k] for k in keys if k in d}
        return cls(**kwargs)


def envelope_description(params: PhysicalParams) -> str:
    """Human-readable form of the regime's vorticity/current envelope."""
    d0 = params.delta0
    if params.regime is Regime.NU_LE_MU3:
        return f"min(mu^(-1/3), <t>) * exp(-{d0:g}*nu^(1/3)*t)"
    if params.regime is Regime.MU3_LE_NU_LE_MU13:
        return f"<t> * exp(-{d0:g}*lambda^(1/3)*t)"
    return f"nu*mu^(-1/3) * <t> * exp(-{d0:g}*mu^(1/3)*t)"


def envelope_log(params: PhysicalParams, t) -> "object":
    """log of the regime amplification envelope for unit data (vectorized).

    NU_LE_MU3:          min(mu^(-1/3), <t>) e^{-delta0 nu^(1/3) t}
    MU3_LE_NU_LE_MU13:  <t> e^{-delta0 lambda^(1/3) t}
    MU13_LE_NU:         nu mu^(-1/3) <t> e^{-delta0 mu^(1/3) t}
    """
    import numpy as np

    t = np.asarray(t, dtype=float)
    bracket = 0.5 * np.log1p(t * t)
    if params.regime is Regime.NU_LE_MU3:
        amp = np.minimum(-np.log(params.mu) / 3.0, bracket)
        return amp - params.decay_rate * t
    if params.regime is Regime.MU3_LE_NU_LE_MU13:
        return bracket - params.decay_rate * t
    return math.log(params.alpha) + bracket - params.decay_rate * t
