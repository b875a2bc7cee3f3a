"""Command-line front end.

    rde5 classify --a 0.5 --b 1 --c 0.5 --d 1
    rde5 simulate --a 0.5 --b 1 --c 1 --d 1 --seeds 3 3 3 3 3 --steps 50
    rde5 critical-limit --mu 0.5 --table
    rde5 scan --a 0.1:0.9:5 --b 1 --c 1 --d 1
    rde5 verify --only reference-table

Exit codes: 0 success, 1 verification failure, 2 invalid input,
3 arithmetic abort, 4 resource cap.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import itertools
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from . import critical, engine, model, spectral, verification
from .engine import ExactMode, FloatMode
from .errors import NonPositiveError, SimulationAborted
from .model import Params, SeedValues

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_INPUT = 2
EXIT_ARITH = 3
EXIT_CAP = 4

PRECISION_ENV = "RDE5_FLOAT_BITS"
DEFAULT_MAX_CELLS = 10**6


class InputError(Exception):
    pass


class CapExceeded(Exception):
    pass


def _number(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _positive(flag, value):
    if not value > 0:
        raise InputError(f"{flag} must be positive (got {value})")
    return value


def _fmt(x, digits=None):
    """Full round-trip precision by default, ``digits`` significant digits otherwise."""
    if isinstance(x, Fraction):
        if digits is None:
            return str(x)
        x = float(x)
    if isinstance(x, mpmath.mpf):
        return mpmath.nstr(x, digits or max(1, int(mpmath.mp.prec * 0.30103) + 1))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if digits is None:
        return repr(float(x))
    return format(float(x), f".{digits}g")


@dataclass(frozen=True)
class AxisSpec:
    lo: float
    hi: float
    count: int

    def values(self):
        if self.count == 1:
            return [self.lo]
        return np.linspace(self.lo, self.hi, self.count).tolist()


def parse_axis(flag, text) -> AxisSpec:
    """``lo:hi:count`` (inclusive, linear) or a single fixed value."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            v = float(Fraction(parts[0]))
            spec = AxisSpec(v, v, 1)
        elif len(parts) == 3:
            spec = AxisSpec(float(Fraction(parts[0])), float(Fraction(parts[1])), int(parts[2]))
            if not spec.lo < spec.hi or spec.count < 2:
                raise InputError(f"{flag}: need lo < hi and count >= 2 in {text!r}")
        else:
            raise ValueError
    except (ValueError, ZeroDivisionError):
        raise InputError(f"{flag}: malformed range spec {text!r} (expected lo:hi:count or a number)") from None
    _positive(f"{flag} lower bound", spec.lo)
    return spec


@dataclass(frozen=True)
class SweepGrid:
    axes: tuple  # AxisSpec for a, b, c, d

    @property
    def size(self):
        n = 1
        for ax in self.axes:
            n *= ax.count
        return n

    def cells(self):
        return itertools.product(*(ax.values() for ax in self.axes))


def _open_out(path):
    if path is None or path == "-":
        return contextlib.nullcontext(sys.stdout)
    return open(path, "w", encoding="utf-8", newline="\n")


def _params_from(args, exact):
    vals = []
    for name in "abcd":
        v = getattr(args, name)
        if v is None:
            raise InputError(f"--{name} is required")
        vals.append(_positive(f"--{name}", v))
    return Params(*(vals if exact else map(float, vals)))


def _float_mode(args):
    bits = args.precision
    if bits is None:
        env = os.environ.get(PRECISION_ENV)
        try:
            bits = int(env) if env else 53
        except ValueError:
            raise InputError(f"{PRECISION_ENV} must be an integer (got {env!r})") from None
    if bits < 2:
        raise InputError(f"--precision must be at least 2 (got {bits})")
    return FloatMode(bits)


# -- subcommands ---------------------------------------------------------------

def cmd_classify(args, out):
    params = _params_from(args, exact=True)
    regime = model.classify(params, args.crit_tol)
    rep = regime.report
    eq = model.equilibria(params, args.crit_tol)
    digits = args.digits
    fields = {
        "a": params.a, "b": params.b, "c": params.c, "d": params.d,
        "A": rep.A, "B": rep.B, "rho_plus": rep.rho_plus, "rho_minus": rep.rho_minus,
        "L": rep.L, "p": rep.p,
    }
    if args.csv:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(list(fields) + ["regime", "equilibria"])
        w.writerow([_fmt(v, digits) for v in fields.values()] + [regime.kind, eq])
        return EXIT_OK
    for k, v in fields.items():
        out.write(f"{k}={_fmt(v, digits)}\n")
    out.write(f"regime={regime.kind} ({regime.summary})\n")
    out.write(f"equilibria={eq} ({eq.description})\n")
    if regime.kind.is_critical:
        spec = spectral.characteristic_roots(float(rep.p))
        out.write(f"spectral_radius={_fmt(spec.spectral_radius, digits)}\n")
        out.write(f"linearized_verdict={spec.verdict}\n")
    return EXIT_OK


def cmd_simulate(args, out):
    mode = ExactMode(args.max_bits) if args.exact else _float_mode(args)
    exact = args.exact
    if args.app_mu is not None:
        mu = _positive("--app-mu", args.app_mu)
        params = critical.APPLICATION_PARAMS
        seeds = (1, 1, 1, mu, mu)
    else:
        params = _params_from(args, exact=True)
        seeds = args.seeds or [Fraction(1)] * 5
        for i, s in enumerate(seeds):
            _positive(f"--seeds[{i}]", s)
    if not exact:
        params = Params(*map(float, params.as_tuple()))
        seeds = tuple(float(s) for s in seeds)
    if args.steps < 1:
        raise InputError(f"--steps must be >= 1 (got {args.steps})")

    aborted = None
    try:
        traj = engine.simulate(params, SeedValues(tuple(seeds)), args.steps, mode)
    except SimulationAborted as exc:
        traj, aborted = exc.partial, exc

    w = csv.writer(out, lineterminator="\n")
    digits = args.digits
    with mode.context():
        if args.ratios:
            c, d = (mode.convert(v) for v in (params.c, params.d))
            w.writerow(["n", "x", "y", "w_residue"])
            for n, x in traj.indexed():
                if n >= -2:
                    y = x / traj.x(n - 2)
                    w.writerow([n, _fmt(x, digits), _fmt(y, digits), _fmt(c + d * y, digits)])
                else:
                    w.writerow([n, _fmt(x, digits), "", ""])
        else:
            w.writerow(["n", "x"])
            for n, x in traj.indexed():
                w.writerow([n, _fmt(x, digits)])
    if aborted is not None:
        out.write(f"# aborted: {aborted.reason} at n={aborted.index}\n")
        out.flush()
        print(f"rde5 simulate: {aborted}", file=sys.stderr)
        return EXIT_ARITH
    return EXIT_OK


def cmd_critical_limit(args, out):
    if args.explore:
        return _explore(args, out)
    if args.mu is None:
        raise InputError("--mu is required")
    mu = _positive("--mu", args.mu)
    tol = _positive("--tol", args.tol)
    mode = ExactMode(args.max_bits) if args.exact else FloatMode()
    mu_v = mu if args.exact else float(mu)

    if args.table:
        rows = critical.table(mu_v, args.rows, mode)
        chopped = dict(critical.chopped_table(mu, args.rows))
        if args.csv:
            w = csv.writer(out, lineterminator="\n")
            w.writerow(["n", "P_n", "rounded", "chopped"])
            for n, v in rows:
                w.writerow([n, _fmt(v, args.digits), critical.display_round(v), chopped[n]])
        else:
            out.write(f"{'n':>3}  {'P_n':<22} {'rounded':<9} chopped\n")
            for n, v in rows:
                out.write(f"{n:>3}  {_fmt(v, args.digits or 17):<22} {critical.display_round(v):<9} {chopped[n]}\n")
        return EXIT_OK

    est = critical.product_limit(mu_v, float(tol), mode)
    lo, hi = est.bracket
    out.write(f"mu={_fmt(mu_v, 6)}\n")
    out.write(f"limit={critical.display_round(est.limit_estimate)}\n")
    out.write(f"limit_full={_fmt(est.limit_estimate if not args.exact else float(est.limit_estimate))}\n")
    out.write(f"bracket=[{lo!r}, {hi!r}]\n")
    out.write(f"tail_bound={est.tail_bound!r}\n")
    out.write(f"terms_used={est.terms_used}\n")
    return EXIT_OK


def _explore(args, out):
    for name in "acd":
        if getattr(args, name) is None:
            raise InputError(f"--explore needs --{name}")
    a, c, d = (_positive(f"--{n}", getattr(args, n)) for n in "acd")
    if not a < 1:
        raise InputError(f"--a must be below 1 on the critical manifold (got {float(a)!r})")
    # b from the exact inputs, so 0.3 / 1 / 2 gives b = 2.1 rather than 2.0999999999999996
    exact = Params.critical(a, c, d)
    params = Params(*(float(v) for v in exact.as_tuple()))
    seeds = SeedValues(tuple(float(s) for s in args.seeds) if args.seeds else (1.0, 1.0, 1.0, 0.5, 0.5))
    res = critical.explore(params, seeds, args.steps)
    out.write("params=" + " ".join(f"{k}={_fmt(float(v))}" for k, v in zip("abcd", exact.as_tuple())) + "\n")
    out.write(f"steps={res.steps}\n")
    out.write(f"final={res.final!r}\n")
    out.write(f"tail_spread={res.tail_spread:.3e}\n")
    out.write("note=simulation only; no product-form claim at these parameters\n")
    return EXIT_OK


def _scan_row(cell, tol):
    params = Params(*cell)
    regime = model.classify(params, tol)
    rep = regime.report
    return (*cell, rep.A, rep.B, rep.L, rep.p, str(regime.kind))


def cmd_scan(args, out):
    axes = tuple(parse_axis(f"--{name}", getattr(args, name)) for name in "abcd")
    grid = SweepGrid(axes)
    if grid.size > args.max_cells:
        raise CapExceeded(f"grid has {grid.size} cells, cap is {args.max_cells}")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["a", "b", "c", "d", "A", "B", "L", "p", "regime"])
    tols = itertools.repeat(args.crit_tol)
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = pool.map(_scan_row, grid.cells(), tols, chunksize=1024)
            for row in rows:
                w.writerow([_fmt(v, args.digits) for v in row[:-1]] + [row[-1]])
    else:
        for row in map(_scan_row, grid.cells(), tols):
            w.writerow([_fmt(v, args.digits) for v in row[:-1]] + [row[-1]])
    return EXIT_OK


def cmd_verify(args, out):
    try:
        results = verification.run_all(args.only, args.seed)
    except KeyError as exc:
        raise InputError(exc.args[0]) from None
    for r in results:
        out.write(r.line + "\n")
    failed = [r for r in results if not r.passed]
    out.write(f"{len(results) - len(failed)}/{len(results)} checks passed\n")
    if failed:
        print(f"rde5 verify: first failing check: {failed[0].name}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def _add_params(p, required=False):
    for name in "abcd":
        p.add_argument(f"--{name}", type=_number, required=required, help=f"coefficient {name} (> 0; fractions like 1/2 allowed)")


def build_parser():
    parser = argparse.ArgumentParser(prog="rde5", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="discriminants, regime and equilibria")
    _add_params(p)
    p.add_argument("--crit-tol", type=float, default=0.0, help="|A| <= tol counts as critical (default 0)")
    p.add_argument("--csv", action="store_true")
    p.add_argument("--digits", type=int, default=6, help="significant digits (default 6)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("simulate", help="iterate the recurrence, CSV n,x")
    _add_params(p)
    p.add_argument("--seeds", type=_number, nargs=5, metavar="X", help="x[-4] .. x[0] (default all 1)")
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--exact", action="store_true", help="exact rational arithmetic")
    p.add_argument("--precision", type=int, help=f"float significand bits (default ${PRECISION_ENV} or 53)")
    p.add_argument("--max-bits", type=int, default=4096, help="exact-mode size cap per numerator/denominator")
    p.add_argument("--ratios", action="store_true", help="add y = x[n]/x[n-2] and w_residue = c + d*y columns")
    p.add_argument("--app-mu", type=_number, help="critical application: params (1/2,1,1,1), seeds (1,1,1,mu,mu)")
    p.add_argument("--digits", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("critical-limit", help="limit of the critical product-form solution")
    p.add_argument("--mu", type=_number)
    p.add_argument("--tol", type=_number, default=Fraction(1, 10**8), help="log-domain tail bound target")
    p.add_argument("--table", action="store_true", help="partial products P_1..P_rows")
    p.add_argument("--rows", type=int, default=10)
    p.add_argument("--exact", action="store_true")
    p.add_argument("--max-bits", type=int, default=4096)
    p.add_argument("--csv", action="store_true")
    p.add_argument("--digits", type=int)
    p.add_argument("--explore", action="store_true",
                   help="simulate at another critical point b = (c+d)(1-a) given --a --c --d")
    for name in "acd":
        p.add_argument(f"--{name}", type=_number)
    p.add_argument("--seeds", type=_number, nargs=5, metavar="X")
    p.add_argument("--steps", type=int, default=600)
    p.add_argument("--out")
    p.set_defaults(func=cmd_critical_limit, b=None)

    p = sub.add_parser("scan", help="regime atlas over a parameter grid")
    for name in "abcd":
        p.add_argument(f"--{name}", required=True, help="value or lo:hi:count")
    p.add_argument("--crit-tol", type=float, default=0.0)
    p.add_argument("--max-cells", type=int, default=DEFAULT_MAX_CELLS)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--digits", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--only", action="append", choices=list(verification.CHECKS))
    p.add_argument("--seed", type=int, default=verification.DEFAULT_SEED)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "crit_tol", 0) < 0:
            raise InputError("--crit-tol must be nonnegative")
        with _open_out(args.out) as out:
            return args.func(args, out)
    except (InputError, NonPositiveError) as exc:
        print(f"rde5 {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CapExceeded as exc:
        print(f"rde5 {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except ArithmeticError as exc:
        print(f"rde5 {args.command}: arithmetic error: {exc}", file=sys.stderr)
        return EXIT_ARITH
