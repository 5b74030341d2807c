"""Spectral simulation and verification harness for 2D MHD stability around
a sheared background flow with a uniform magnetic field."""

__version__ = "0.1.0"

from .params import PhysicalParams, Regime, ConfigError, classify_regime  # noqa: F401
from .grid import Grid, SpectralField, MhdState  # noqa: F401
