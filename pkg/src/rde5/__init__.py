"""Simulation, classification and verification for the fifth-order rational
difference equation x[n+1] = a x[n-1] + b x[n-1] x[n-4] / (c x[n-4] + d x[n-2])."""

from .engine import ExactMode, FloatMode, Trajectory, simulate, transforms
from .model import (
    DiscriminantReport,
    EquilibriumSet,
    Params,
    Regime,
    RegimeKind,
    SeedValues,
    classify,
    discriminants,
    equilibria,
)

__all__ = [
    "DiscriminantReport",
    "EquilibriumSet",
    "ExactMode",
    "FloatMode",
    "Params",
    "Regime",
    "RegimeKind",
    "SeedValues",
    "Trajectory",
    "classify",
    "discriminants",
    "equilibria",
    "simulate",
    "transforms",
]

__version__ = "0.1.0"
