"""Trajectory simulation and the ratio transforms used to analyse it.

Seeds occupy indices -4..0 and the recurrence produces x[1], x[2], ...  The
ratio y[k] = x[k] / x[k-2] obeys

    y[k+1] = a + b / (c + d*y[k-2]),

so along each residue class mod 3 the quantity c + d*y follows the Moebius map
w -> c + a*d + b*d/w.  Writing w = u[n]/u[n-1] turns that map into the linear
recurrence u[n+1] = (c + a*d) u[n] + b*d u[n-1], solved in closed form by the
roots rho_plus > rho_minus of the characteristic quadratic.
"""
from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import mpmath

from .errors import (
    ConsistencyError,
    DegenerateRootsError,
    ExactGrowthError,
    OverflowAbort,
    TooShortError,
    UnderflowAbort,
    ZeroDenominatorError,
)
from .model import DiscriminantReport, Params, RegimeKind, SeedValues

# Desk-scale stand-ins for "converges to 0" / "diverges to +infinity".
BLOWUP_THRESHOLD = 1e6
EXTINCTION_FACTOR = 1e-3
EXTINCTION_STEPS = 600
BLOWUP_STEPS = 2000

RATIO_WINDOW = 10
MOBIUS_RTOL = 1e-10


@dataclass(frozen=True)
class FloatMode:
    """Floating point with ``precision`` significand bits.

    53 bits uses native floats; anything else runs under mpmath at that
    working precision.  mpmath keeps its precision in a process-wide context,
    so high-precision runs should not be interleaved across threads.
    """

    precision: int = 53

    def __post_init__(self):
        if self.precision < 2:
            raise ValueError("precision must be at least 2 bits")

    @property
    def native(self):
        return self.precision == 53

    def convert(self, v):
        if self.native:
            return float(v)
        if isinstance(v, Fraction):
            return mpmath.mpf(v.numerator) / v.denominator
        return mpmath.mpf(v)

    def context(self):
        if self.native:
            return contextlib.nullcontext()
        return mpmath.workprec(self.precision)

    def __str__(self):
        return f"float{self.precision}"


@dataclass(frozen=True)
class ExactMode:
    """Exact rational arithmetic, capped at ``max_bits`` per numerator/denominator."""

    max_bits: int = 4096

    def convert(self, v):
        return Fraction(v)

    def context(self):
        return contextlib.nullcontext()

    def __str__(self):
        return "exact"


ArithmeticMode = Union[FloatMode, ExactMode]


@dataclass(frozen=True)
class Trajectory:
    params: Params
    seeds: SeedValues
    values: tuple
    mode: ArithmeticMode

    first_index = -4

    @property
    def last_index(self):
        return len(self.values) - 5

    @property
    def steps(self):
        return len(self.values) - 5

    def x(self, n):
        if n < -4 or n > self.last_index:
            raise IndexError(f"index {n} outside -4..{self.last_index}")
        return self.values[n + 4]

    def indexed(self):
        """Yield (n, x[n]) pairs from n = -4."""
        return zip(range(-4, self.last_index + 1), self.values)

    def __len__(self):
        return len(self.values)


def _step(a, b, c, d, x1, x2, x4):
    # x1 = x[n-1], x2 = x[n-2], x4 = x[n-4]
    return a * x1 + b * x1 * x4 / (c * x4 + d * x2)


def simulate(params: Params, seeds: SeedValues, steps: int, mode: ArithmeticMode = FloatMode()) -> Trajectory:
    """Iterate the recurrence ``steps`` times from the five seeds.

    Raises OverflowAbort / UnderflowAbort when a native float leaves the
    representable range and ExactGrowthError when an exact value exceeds the
    bit budget; the exception carries the partial trajectory.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if not isinstance(seeds, SeedValues):
        seeds = SeedValues(tuple(seeds))

    def partial(xs):
        return Trajectory(params, seeds, tuple(xs), mode)

    exact = isinstance(mode, ExactMode)
    native = isinstance(mode, FloatMode) and mode.native
    with mode.context():
        a, b, c, d = (mode.convert(v) for v in params.as_tuple())
        xs = [mode.convert(v) for v in seeds]
        for _ in range(steps):
            n = len(xs) - 4
            try:
                new = _step(a, b, c, d, xs[-2], xs[-3], xs[-5])
            except ZeroDivisionError:
                raise UnderflowAbort(n, partial(xs), "denominator underflowed to 0") from None
            if native:
                if not math.isfinite(new):
                    raise OverflowAbort(n, partial(xs))
                if new == 0.0:
                    raise UnderflowAbort(n, partial(xs))
            elif exact:
                bits = max(new.numerator.bit_length(), new.denominator.bit_length())
                if bits > mode.max_bits:
                    raise ExactGrowthError(n, partial(xs), f"{bits} bits > {mode.max_bits}")
            xs.append(new)
    return partial(xs)


@dataclass(frozen=True)
class TransformSequences:
    """Ratio sequences of a trajectory.

    ``y[i]`` holds y[k] = x[k]/x[k-2] for k = i - 2 (so y starts at k = -2).
    ``w``, ``w_prime`` and ``w_double_prime`` hold c + d*y at k = 3n, 3n+1,
    3n+2 for n = 0, 1, ...; ``u[0] = 1`` and ``u[n] = w[1]...w[n]``, truncated
    if a native float product overflows.
    """

    y: tuple
    w: tuple
    w_prime: tuple
    w_double_prime: tuple
    u: tuple
    mobius_residual: float

    y_start = -2

    def y_at(self, k):
        return self.y[k - self.y_start]

    @property
    def classes(self):
        return (self.w, self.w_prime, self.w_double_prime)


def _rel(x, y):
    scale = max(abs(x), abs(y))
    return 0.0 if scale == 0 else float(abs(x - y) / scale)


def transforms(traj: Trajectory) -> TransformSequences:
    if len(traj) < 8:
        raise TooShortError(f"need at least 8 values (n = -4..3), got {len(traj)}")
    mode = traj.mode
    exact = isinstance(mode, ExactMode)
    with mode.context():
        a, b, c, d = (mode.convert(v) for v in traj.params.as_tuple())
        vals = traj.values
        y = tuple(vals[i] / vals[i - 2] for i in range(2, len(vals)))
        # y[j] is y_k with k = j - 2; class r of w starts at k = r, i.e. j = r + 2
        w_classes = tuple(tuple(c + d * yk for yk in y[r + 2::3]) for r in range(3))

        shift = c + a * d
        bd = b * d
        worst = 0.0
        for seq in w_classes:
            for w_n, w_next in zip(seq, seq[1:]):
                predicted = shift + bd / w_n
                if exact:
                    if predicted != w_next:
                        raise ConsistencyError(f"Moebius recurrence fails exactly: {w_next} != {predicted}")
                else:
                    worst = max(worst, _rel(w_next, predicted))
        if worst > MOBIUS_RTOL:
            raise ConsistencyError(f"Moebius recurrence residual {worst:.3g} exceeds {MOBIUS_RTOL:g}")

        w = w_classes[0]
        u = [mode.convert(1)]
        for wn in w[1:]:
            nxt = u[-1] * wn
            if not exact and not mpmath.isfinite(nxt):
                break
            u.append(nxt)
    return TransformSequences(
        y=y,
        w=w,
        w_prime=w_classes[1],
        w_double_prime=w_classes[2],
        u=tuple(u),
        mobius_residual=worst,
    )


@dataclass(frozen=True)
class ClosedFormFit:
    """u[n] = l1*rho_plus**n + l2*rho_minus**n with u[0] = l1 + l2 = 1."""

    l1: float
    l2: float
    rho_plus: float
    rho_minus: float


def fit_closed_form(w1, report: DiscriminantReport) -> ClosedFormFit:
    rp, rm = report.rho_plus, report.rho_minus
    gap = rp - rm
    if abs(gap) <= 1e-14:
        raise DegenerateRootsError(f"rho_plus - rho_minus = {gap!r}")
    l1 = (float(w1) - rm) / gap
    return ClosedFormFit(l1=l1, l2=1.0 - l1, rho_plus=rp, rho_minus=rm)


def predict_w(fit: ClosedFormFit, n: int) -> float:
    """w[n+1] = u[n+1]/u[n] from the closed form.

    Evaluated after dividing through by rho_plus**n, which is algebraically
    identical and keeps large n finite.
    """
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    rn = (fit.rho_minus / fit.rho_plus) ** n
    den = fit.l1 + fit.l2 * rn
    if den == 0:
        raise ZeroDenominatorError(f"l1*rho_plus^n + l2*rho_minus^n vanishes at n={n}")
    return (fit.l1 * fit.rho_plus + fit.l2 * fit.rho_minus * rn) / den


def ratio_limit_estimate(traj: Trajectory, window: int = RATIO_WINDOW):
    """Mean of x[n+1]/x[n-1] over the last ``window`` available ratios."""
    vals = traj.values
    if len(vals) - 2 < window:
        raise TooShortError(f"need {window} ratio samples, trajectory has {len(vals) - 2}")
    with traj.mode.context():
        ratios = [vals[i] / vals[i - 2] for i in range(len(vals) - window, len(vals))]
        return sum(ratios) / window


def realizes_regime(params: Params, seeds: SeedValues, kind: RegimeKind):
    """Check the desk-scale form of the extinction / blow-up statement.

    Extinction: within EXTINCTION_STEPS the five most recent values all drop
    below EXTINCTION_FACTOR times the smallest seed.  Blow-up: some value
    exceeds BLOWUP_THRESHOLD within BLOWUP_STEPS.  Returns (ok, step) where
    step is the first step at which the condition held, or None.
    """
    if kind is RegimeKind.EXTINCTION:
        steps = EXTINCTION_STEPS
        limit = min(float(s) for s in seeds) * EXTINCTION_FACTOR
    elif kind is RegimeKind.BLOWUP:
        steps = BLOWUP_STEPS
        limit = BLOWUP_THRESHOLD
    else:
        raise ValueError(f"no desk-scale check for {kind}")
    try:
        values = simulate(params, seeds, steps).values
    except (OverflowAbort, UnderflowAbort) as exc:
        # the partial run still contains the threshold crossing, if any
        values = exc.partial.values

    if kind is RegimeKind.BLOWUP:
        for i, v in enumerate(values[5:], start=1):
            if v > limit:
                return True, i
        return False, None
    for i in range(5, len(values)):
        if max(values[i - 4:i + 1]) < limit:
            return True, i - 4
    return False, None
