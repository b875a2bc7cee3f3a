"""Parameters, discriminants and regime classification.

The equation studied throughout the package is

    x[n+1] = a*x[n-1] + b*x[n-1]*x[n-4] / (c*x[n-4] + d*x[n-2])

with a, b, c, d > 0 and five positive seeds x[-4..0].  Its long-run behaviour
is decided by two scalars,

    A = (c + d)(1 - a) - b        B = b*d - (c + d)**2,

together with the roots of  lam**2 - (c + a*d)*lam - b*d = 0,  which govern the
ratio x[n+1]/x[n-1].
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real

from .errors import NonPositiveError


def _check_positive(name, value):
    try:
        ok = value > 0 and math.isfinite(value)
    except TypeError:
        ok = False
    if not ok:
        raise NonPositiveError(name, value)


@dataclass(frozen=True)
class Params:
    """The four positive coefficients (a, b, c, d)."""

    a: Real
    b: Real
    c: Real
    d: Real

    def __post_init__(self):
        for name in "abcd":
            _check_positive(name, getattr(self, name))

    def as_tuple(self):
        return (self.a, self.b, self.c, self.d)

    def exact(self) -> "Params":
        """Same parameters as exact fractions (floats convert without rounding)."""
        return Params(*(Fraction(v) for v in self.as_tuple()))

    def scaled(self, k) -> "Params":
        """Multiply (b, c, d) by ``k``; leaves L, p and the regime unchanged."""
        return Params(self.a, self.b * k, self.c * k, self.d * k)

    @classmethod
    def critical(cls, a, c, d) -> "Params":
        """Point on the A = 0 manifold, b = (c + d)(1 - a).  Requires a < 1."""
        return cls(a, (c + d) * (1 - a), c, d)


@dataclass(frozen=True)
class SeedValues:
    """Initial values x[-4], ..., x[0], oldest first."""

    values: tuple

    def __post_init__(self):
        vals = tuple(self.values)
        if len(vals) != 5:
            raise ValueError(f"exactly five seed values are required, got {len(vals)}")
        for i, v in enumerate(vals):
            _check_positive(f"x[{i - 4}]", v)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, w) -> "SeedValues":
        return cls((w,) * 5)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]


@dataclass(frozen=True)
class DiscriminantReport:
    """Every derived scalar of the asymptotic analysis.

    ``A``, ``B`` and ``p`` keep the numeric type of the parameters, so exact
    fractions in give exact values out; the roots and ``L`` are floats.
    """

    A: Real
    B: Real
    rho_plus: float
    rho_minus: float
    L: float
    p: Real


def char_poly(params: Params, lam):
    """lam**2 - (c + a d) lam - b d, whose roots are rho_plus and rho_minus."""
    a, b, c, d = params.as_tuple()
    return lam * lam - (c + a * d) * lam - b * d


def discriminants(params: Params) -> DiscriminantReport:
    a, b, c, d = params.as_tuple()
    A = (c + d) * (1 - a) - b
    B = b * d - (c + d) ** 2
    p = b * d / (c + d) ** 2

    s = float(c + a * d)
    q = float(b * d)
    root = math.sqrt(s * s + 4.0 * q)
    rho_plus = 0.5 * (s + root)
    # the textbook (s - root)/2 cancels badly when b*d << s**2
    rho_minus = -2.0 * q / (s + root)
    # L = (rho_plus - c)/d is the positive root of d L^2 + (c - a d) L - (a c + b);
    # solving that directly avoids cancellation when rho_plus is close to c
    e = float(c - a * d)
    k = float(a * c + b)
    root_L = math.sqrt(e * e + 4.0 * float(d) * k)
    L = 2.0 * k / (e + root_L) if e >= 0 else (root_L - e) / (2.0 * float(d))
    return DiscriminantReport(A=A, B=B, rho_plus=rho_plus, rho_minus=rho_minus, L=L, p=p)


class RegimeKind(enum.Enum):
    EXTINCTION = "Extinction"
    BLOWUP = "Blowup"
    CRITICAL_UNSTABLE = "CriticalUnstable"
    CRITICAL_CONVERGENT = "CriticalConvergent"

    def __str__(self):
        return self.value

    @property
    def is_critical(self):
        return self in (RegimeKind.CRITICAL_UNSTABLE, RegimeKind.CRITICAL_CONVERGENT)


_REGIME_SUMMARY = {
    RegimeKind.EXTINCTION: "all positive solutions converge to 0",
    RegimeKind.BLOWUP: "all positive solutions diverge to +infinity",
    RegimeKind.CRITICAL_UNSTABLE: "every constant solution is unstable",
    RegimeKind.CRITICAL_CONVERGENT: "non-constant solutions converging to a positive limit exist",
}


@dataclass(frozen=True)
class Regime:
    kind: RegimeKind
    report: DiscriminantReport

    @property
    def summary(self):
        return _REGIME_SUMMARY[self.kind]

    def __str__(self):
        return str(self.kind)


def classify(params: Params, tol=0) -> Regime:
    """Asymptotic verdict from the signs of A and, on the critical manifold, B.

    ``tol`` widens the critical band to |A| <= tol.  Note that A = 0 with
    positive parameters forces B = -(c + d)(a d + c) < 0, so CriticalUnstable
    is never returned for valid parameters at tol = 0.
    """
    if tol < 0:
        raise ValueError(f"tol must be nonnegative, got {tol!r}")
    rep = discriminants(params)
    if rep.A > tol:
        kind = RegimeKind.EXTINCTION
    elif rep.A < -tol:
        kind = RegimeKind.BLOWUP
    elif rep.B > 0:
        kind = RegimeKind.CRITICAL_UNSTABLE
    else:
        kind = RegimeKind.CRITICAL_CONVERGENT
    return Regime(kind, rep)


class EquilibriumSet(enum.Enum):
    """Fixed points of the equation.

    ONLY_ZERO: 0 is the unique equilibrium.  It is a limiting fixed point:
    the map is 0/0 on the diagonal at the origin and 0 is obtained from the
    limit of G(v, ..., v) as v -> 0.

    POSITIVE_CONTINUUM: every constant sequence x[n] = w > 0 is a solution.
    """

    ONLY_ZERO = "OnlyZero"
    POSITIVE_CONTINUUM = "PositiveContinuum"

    def __str__(self):
        return self.value

    @property
    def description(self):
        if self is EquilibriumSet.ONLY_ZERO:
            return "unique equilibrium 0 (limit of G along the diagonal)"
        return "every w > 0 is an equilibrium (constant solutions x_n = w)"


def equilibria(params: Params, tol=0) -> EquilibriumSet:
    if abs(discriminants(params).A) > tol:
        return EquilibriumSet.ONLY_ZERO
    return EquilibriumSet.POSITIVE_CONTINUUM
