"""Self-verification suite run by ``rde5 verify`` and by the acceptance tests.

Each check draws its random samples from ``random.Random(f"{seed}:{name}")``
so a given seed always produces the same output.
"""
from __future__ import annotations

import contextlib
import io
import math
import random
import time
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction

from . import critical, engine, model, spectral
from .engine import ExactMode, FloatMode
from .model import Params, RegimeKind, SeedValues

DEFAULT_SEED = 42


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    elapsed: float
    time_limit: float

    @property
    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name:<18} {self.elapsed:7.3f}s (limit {self.time_limit:g}s)  {self.detail}"


def _sign(x):
    return (x > 0) - (x < 0)


def _rel(x, y):
    scale = max(abs(x), abs(y))
    return 0.0 if scale == 0 else abs(x - y) / scale


def sample_normalized_params(rng, margin=0.05, lo=0.1, hi_ab=1.5, sign=0):
    """Draw (a, b, c, d) with c + d = 1 and |A| > margin.

    L and p depend on (b, c, d) only through their ratios while A scales with
    them, so fixing c + d = 1 makes the margin on A scale-free.  A nonzero
    ``sign`` additionally requires sign(A) == sign.
    """
    while True:
        a = rng.uniform(lo, hi_ab)
        b = rng.uniform(lo, hi_ab)
        c = rng.uniform(lo, 1.0)
        d = rng.uniform(lo, 1.0)
        s = c + d
        params = Params(a, b, c / s, d / s)
        A = model.discriminants(params).A
        if abs(A) > margin and (not sign or _sign(A) == sign):
            return params


def sample_seeds(rng, lo=0.5, hi=2.0):
    return SeedValues(tuple(rng.uniform(lo, hi) for _ in range(5)))


# -- individual checks: each returns (passed, detail) ------------------------

def check_reference_table(rng):
    from .cli import main

    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(["critical-limit", "--mu", "0.5", "--table", "--csv"])
    if code != 0:
        return False, f"critical-limit exited {code}"
    rows = [line.split(",") for line in buf.getvalue().splitlines()]
    header, body = rows[0], rows[1:]
    col = header.index("chopped")
    got = [r[col] for r in body]
    ok = len(got) == len(critical.REFERENCE_TABLE) and all(
        Decimal(g) == Decimal(p) for g, p in zip(got, critical.REFERENCE_TABLE))
    return ok, "table " + " ".join(got)


def check_golden_ratio_limit(rng):
    rep = model.discriminants(Params(0.5, 1, 0.5, 1))
    target = math.sqrt(5) / 2
    err_closed = abs(rep.L - target)
    traj = engine.simulate(Params(0.5, 1, 0.5, 1), SeedValues.constant(1.0), 200)
    err_sim = abs(engine.ratio_limit_estimate(traj) - target)
    ok = err_closed <= 1e-12 and err_sim <= 1e-6
    return ok, f"|L - sqrt5/2| = {err_closed:.2e}, |tail ratio - sqrt5/2| = {err_sim:.2e}"


def check_regimes(rng, n=200):
    fails = []
    counts = {RegimeKind.EXTINCTION: 0, RegimeKind.BLOWUP: 0}
    worst = {RegimeKind.EXTINCTION: 0, RegimeKind.BLOWUP: 0}
    for i in range(n):
        params = sample_normalized_params(rng, sign=1 if i % 2 else -1)
        seeds = sample_seeds(rng)
        kind = model.classify(params).kind
        ok, step = engine.realizes_regime(params, seeds, kind)
        counts[kind] += 1
        if ok:
            worst[kind] = max(worst[kind], step)
        else:
            fails.append(params)
    detail = (f"extinction {counts[RegimeKind.EXTINCTION]} (slowest {worst[RegimeKind.EXTINCTION]} steps), "
              f"blow-up {counts[RegimeKind.BLOWUP]} (slowest {worst[RegimeKind.BLOWUP]} steps)")
    if fails:
        detail += f"; {len(fails)} failed, first {fails[0]}"
    return not fails, detail


def check_constant_solution(rng, n=20, steps=100):
    worst_float = 0.0
    exact_ok = True
    for _ in range(n):
        a = Fraction(rng.randint(1, 99), 100)
        c = Fraction(rng.randint(1, 300), 100)
        d = Fraction(rng.randint(1, 300), 100)
        w = Fraction(rng.randint(1, 1000), rng.randint(1, 100))
        exact_params = Params.critical(a, c, d)
        traj = engine.simulate(exact_params, SeedValues.constant(w), steps, ExactMode())
        exact_ok &= all(v == w for v in traj.values)

        fp = Params.critical(float(a), float(c), float(d))
        wf = float(w)
        traj = engine.simulate(fp, SeedValues.constant(wf), steps)
        worst_float = max(worst_float, max(abs(v - wf) / wf for v in traj.values))
    ok = exact_ok and worst_float <= 1e-12
    return ok, f"exact deviation {'0' if exact_ok else 'nonzero'}, float max rel deviation {worst_float:.2e}"


def check_closed_form_w(rng, n=50, n_max=60):
    steps = 3 * (n_max + 1) + 2  # every residue class reaches w[n_max + 1]
    worst = 0.0
    for _ in range(n):
        params = sample_normalized_params(rng, margin=0.0)
        seeds = sample_seeds(rng)
        rep = model.discriminants(params)
        ts = engine.transforms(engine.simulate(params, seeds, steps))
        for seq in ts.classes:
            fit = engine.fit_closed_form(seq[1], rep)
            for k in range(n_max + 1):
                worst = max(worst, _rel(engine.predict_w(fit, k), seq[k + 1]))
    return worst <= 1e-9, f"max rel error {worst:.2e} over {n} samples x 3 residue classes"


def check_spectrum(rng, n=100):
    worst = 0.0
    eig_ok = True
    for _ in range(n):
        p = 10.0 * (1.0 - rng.random())
        eig_ok &= spectral.numeric_eigen_check(spectral.jacobian(p), 1e-10)
        expected = max(1.0, p ** (1.0 / 3.0))
        worst = max(worst, _rel(spectral.characteristic_roots(p).spectral_radius, expected))
    ok = eig_ok and worst <= 1e-12
    return ok, f"eigen residual check {'ok' if eig_ok else 'FAILED'}, radius rel error {worst:.2e}"


def check_oracle(rng, mus=(Fraction(1, 2), Fraction(1), Fraction(2), Fraction(7, 3)), n_max=20):
    results = {str(mu): critical.oracle_equivalence(mu, n_max) for mu in mus}
    return all(results.values()), ", ".join(f"mu={k}: {v}" for k, v in results.items())


def k_sequence_violations(mu, n_terms=100, limit_tol=1e-12):
    """Exact-rational audit of the K-sequence and its partial products."""
    mu = Fraction(mu)
    ks = critical.k_sequence(mu, n_terms, ExactMode()).terms
    bad = []
    one, half, bound = Fraction(1), Fraction(1, 2), Fraction(7, 6)
    for i in range(2, len(ks)):
        if not ks[i] > half:
            bad.append(f"K_{i} <= 1/2")
        if i >= 3 and not ks[i] <= bound:
            bad.append(f"K_{i} > 7/6")
    if mu != 1:
        for i in range(1, len(ks) - 1):
            s0, s1 = _sign(ks[i] - one), _sign(ks[i + 1] - one)
            if not s0 * s1 == -1:
                bad.append(f"ln K_{i}, ln K_{i + 1} not of opposite sign")
            # |ln K_{i+1}| < |ln K_i|  <=>  K_i K_{i+1} on the same side of 1 as K_i
            if not _sign(ks[i] * ks[i + 1] - one) == s0:
                bad.append(f"|ln K_{i + 1}| >= |ln K_{i}|")
    settle = next((i for i in range(len(ks)) if all(abs(k - 1) < 1e-8 for k in ks[i:])), None)
    if settle is None or settle > n_terms // 2:
        bad.append(f"K did not settle within 1e-8 of 1 (N = {settle})")

    est = critical.product_limit(mu, limit_tol, ExactMode())
    limit = est.limit_estimate
    prods = est.partial_products
    for n in range(1, len(prods) - 1):
        lo, hi = sorted((prods[n], prods[n + 1]))
        if not lo <= limit <= hi:
            bad.append(f"limit outside [P_{n}, P_{n + 1}]")
    return bad, settle


def check_k_sequence(rng, n=50):
    failures = []
    worst_settle = 0
    for _ in range(n):
        mu = Fraction(5.0 * (1.0 - rng.random()))
        bad, settle = k_sequence_violations(mu)
        if bad:
            failures.append((float(mu), bad[0]))
        else:
            worst_settle = max(worst_settle, settle)
    detail = f"{n} mu values, |K_n - 1| < 1e-8 from n = {worst_settle} at worst"
    if failures:
        detail += f"; {len(failures)} failed, first mu={failures[0][0]}: {failures[0][1]}"
    return not failures, detail


def check_root_link(rng, n=1000):
    sign_ok = True
    worst = 0.0
    for _ in range(n):
        a, b, c, d = (10.0 * (1.0 - rng.random()) for _ in range(4))
        params = Params(a, b, c, d)
        rep = model.discriminants(params)
        sign_ok &= _sign(rep.A) == _sign(1 - rep.L)
        lam = c + d
        f = model.char_poly(params, lam)
        scale = lam * lam + (c + a * d) * lam + b * d
        worst = max(worst, abs(f - d * rep.A) / scale)
    ok = sign_ok and worst <= 1e-12
    return ok, f"sign agreement {'ok' if sign_ok else 'FAILED'}, |f(c+d) - dA| / scale <= {worst:.2e}"


CHECKS = {
    "reference-table": (check_reference_table, 0.1),
    "golden-ratio": (check_golden_ratio_limit, 0.1),
    "regimes": (check_regimes, 5.0),
    "constant-solution": (check_constant_solution, 1.0),
    "closed-form-w": (check_closed_form_w, 2.0),
    "spectrum": (check_spectrum, 1.0),
    "oracle": (check_oracle, 1.0),
    "k-sequence": (check_k_sequence, 2.0),
    "root-link": (check_root_link, 0.5),
}


def run_check(name, seed=DEFAULT_SEED) -> CheckResult:
    fn, limit = CHECKS[name]
    rng = random.Random(f"{seed}:{name}")
    t0 = time.perf_counter()
    try:
        passed, detail = fn(rng)
    except Exception as exc:  # a crash is a failed check, reported by name
        passed, detail = False, f"raised {type(exc).__name__}: {exc}"
    elapsed = time.perf_counter() - t0
    if elapsed >= limit:
        passed = False
        detail += f"; too slow ({elapsed:.3f}s >= {limit:g}s)"
    return CheckResult(name, passed, detail, elapsed, limit)


def run_all(only=None, seed=DEFAULT_SEED):
    names = list(CHECKS) if not only else list(only)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown check(s): {', '.join(unknown)}")
    return [run_check(n, seed) for n in names]
