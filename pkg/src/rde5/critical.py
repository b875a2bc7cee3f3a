"""Product-form solutions on the critical manifold.

With (a, b, c, d) = (1/2, 1, 1, 1) the recurrence reads

    x[n+1] = x[n-1] * (1/2 + x[n-4] / (x[n-4] + x[n-2])),

and from the seeds x0 = x1 = x2 = 1, x3 = x4 = mu (indices counted from the
first seed) every solution value is a running product

    x[3n + j] = K_0 K_1 ... K_n,  j = 0, 1, 2,

of the sequence K_0 = 1, K_1 = mu, K_{i+1} = 1/2 + 1/(1 + K_i).  The logs
ln K_i alternate in sign with decreasing magnitude, so the series converges
and consecutive partial products bracket the limit.

These parameters are forced: matching the rewritten recurrence against
x[n-1]*(1/2 + x[n-4]/(x[n-4] + x[n-2])) needs 1 - b/(c+d) = 1/2 and b = c = d.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .engine import ArithmeticMode, ExactMode, FloatMode, simulate
from .errors import NonConvergenceError, NonPositiveError
from .model import Params, SeedValues, classify

APPLICATION_PARAMS = Params(Fraction(1, 2), Fraction(1), Fraction(1), Fraction(1))
# engine index = application index - INDEX_SHIFT
INDEX_SHIFT = 4
MAX_TERMS = 10_000

REFERENCE_TABLE = ("0.5", "0.58333", "0.56089", "0.56639", "0.56501",
               "0.56535", "0.56527", "0.56529", "0.56528", "0.56528")


def application_seeds(mu) -> SeedValues:
    return SeedValues((1, 1, 1, mu, mu))


def _check_mu(mu):
    if not mu > 0:
        raise NonPositiveError("mu", mu)


def log_term(k) -> float:
    """ln K as a float, accurate when K is close to 1."""
    if isinstance(k, mpmath.mpf):
        return float(mpmath.log(k))
    return math.log1p(float(k - 1))


@dataclass(frozen=True)
class KSequence:
    mu: object
    terms: tuple

    @property
    def logs(self):
        return tuple(log_term(k) for k in self.terms)

    def __len__(self):
        return len(self.terms)


def k_sequence(mu, n: int, mode: ArithmeticMode = FloatMode()) -> KSequence:
    """K_0 .. K_n."""
    _check_mu(mu)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    with mode.context():
        mu_v = mode.convert(mu)
        half = mode.convert(Fraction(1, 2))
        one = mode.convert(1)
        terms = [one, mu_v]
        while len(terms) <= n:
            terms.append(half + one / (one + terms[-1]))
    return KSequence(mu=mu, terms=tuple(terms[: n + 1]))


@dataclass(frozen=True)
class SeriesEstimate:
    """Partial products P_0..P_n and the Leibniz bound |ln(limit) - ln P_n| <= tail_bound."""

    partial_products: tuple
    limit_estimate: object
    tail_bound: float
    terms_used: int

    @property
    def bracket(self):
        """Multiplicative enclosure [P e^-bound, P e^+bound] of the limit."""
        p = float(self.limit_estimate)
        return p * math.exp(-self.tail_bound), p * math.exp(self.tail_bound)


def product_limit(mu, tol, mode: ArithmeticMode = FloatMode(), max_terms: int = MAX_TERMS) -> SeriesEstimate:
    """Multiply K_0 K_1 ... until the next log-term is at most ``tol`` in size."""
    _check_mu(mu)
    if not tol > 0:
        raise NonPositiveError("tol", tol)
    with mode.context():
        one = mode.convert(1)
        half = mode.convert(Fraction(1, 2))
        k_next = mode.convert(mu)
        products = [one]
        while True:
            bound = abs(log_term(k_next))
            if bound <= tol:
                break
            if len(products) >= max_terms:
                raise NonConvergenceError(
                    f"tail bound {bound:.3g} still above {tol:g} after {max_terms} terms")
            products.append(products[-1] * k_next)
            k_next = half + one / (one + k_next)
    return SeriesEstimate(
        partial_products=tuple(products),
        limit_estimate=products[-1],
        tail_bound=bound,
        terms_used=len(products),
    )


def product_form_solution(mu, n_max: int, mode: ArithmeticMode = FloatMode()) -> tuple:
    """Solution values x0 .. x[3 n_max + 2] of the application, from the product formula."""
    _check_mu(mu)
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    ks = k_sequence(mu, max(n_max, 1), mode).terms
    out = []
    with mode.context():
        prod = mode.convert(1)
        for i in range(n_max + 1):
            if i:
                prod = prod * ks[i]
            out.extend((prod, prod, prod))
    return tuple(out)


def simulated_application(mu, n_max: int, mode: ArithmeticMode = FloatMode()) -> tuple:
    """Same values as product_form_solution, produced by direct simulation."""
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    traj = simulate(APPLICATION_PARAMS, application_seeds(mu), 3 * n_max + 2 - INDEX_SHIFT, mode)
    return traj.values


def oracle_equivalence(mu, n_max: int, max_bits: int = 4096) -> bool:
    """Exact term-by-term agreement of direct simulation and the product formula."""
    mu = Fraction(mu)
    mode = ExactMode(max_bits)
    return simulated_application(mu, n_max, mode) == product_form_solution(mu, n_max, mode)


def to_fraction(x) -> Fraction:
    if isinstance(x, mpmath.mpf):
        man, exp = x.man_exp
        return Fraction(int(man)) * Fraction(2) ** int(exp)
    return Fraction(x)


def display_round(x, places: int = 5) -> str:
    """Fixed-point string with round-half-to-even applied to the exact value of ``x``."""
    scaled = round(to_fraction(x) * 10**places)
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled), 10**places)
    return f"{sign}{whole}.{frac:0{places}d}" if places else f"{sign}{whole}"


def table(mu, rows: int = 10, mode: ArithmeticMode = FloatMode()) -> tuple:
    """(n, P_n) for n = 1..rows: the distinct values of the application's solution."""
    ks = k_sequence(mu, rows, mode).terms
    out = []
    with mode.context():
        prod = ks[0]
        for n in range(1, rows + 1):
            prod = prod * ks[n]
            out.append((n, prod))
    return tuple(out)


def chop(x, places: int) -> Fraction:
    """Truncate toward zero at ``places`` decimals."""
    f = to_fraction(x) * 10**places
    return Fraction(math.trunc(f), 10**places)


def chopped_table(mu, rows: int = 10, work_places: int = 6, display_places: int = 5) -> tuple:
    """(n, display string) with the running product held in chopped fixed point.

    Emulates a hand computation: K_i exact, each partial product truncated to
    ``work_places`` decimals, shown truncated to ``display_places``.  The true
    products are in ``table``; the two agree to within one unit of the last
    displayed digit.
    """
    ks = k_sequence(Fraction(mu), rows, ExactMode()).terms
    acc = Fraction(1)
    out = []
    for n in range(1, rows + 1):
        acc = chop(acc * ks[n], work_places)
        out.append((n, _fixed(chop(acc, display_places), display_places)))
    return tuple(out)


def _fixed(f: Fraction, places: int) -> str:
    scaled = f * 10**places
    assert scaled.denominator == 1
    whole, frac = divmod(scaled.numerator, 10**places)
    return f"{whole}.{frac:0{places}d}"


@dataclass(frozen=True)
class ExploreResult:
    params: Params
    final: float
    tail_spread: float
    steps: int


def explore(params: Params, seeds: SeedValues, steps: int = 600, window: int = 30) -> ExploreResult:
    """Simulate at a critical point other than the application and report the tail.

    Only measures how far the last ``window`` values spread relative to the
    final one; makes no product-form claim.
    """
    if not classify(params, tol=1e-12).kind.is_critical:
        raise ValueError("parameters are not on the critical manifold A = 0")
    traj = simulate(params, seeds, steps)
    tail = traj.values[-window:]
    final = float(tail[-1])
    spread = (max(tail) - min(tail)) / final
    return ExploreResult(params=params, final=final, tail_spread=float(spread), steps=steps)
