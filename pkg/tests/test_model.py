import math
from fractions import Fraction as F

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from rde5 import engine
from rde5.errors import NonPositiveError
from rde5.model import (
    EquilibriumSet,
    Params,
    RegimeKind,
    SeedValues,
    char_poly,
    classify,
    discriminants,
    equilibria,
)

pos = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False, allow_infinity=False)
pos_frac = st.fractions(min_value=F(1, 1000), max_value=100, max_denominator=1000).filter(lambda x: x > 0)
unit_frac = st.fractions(min_value=F(1, 1000), max_value=F(999, 1000), max_denominator=1000)


def rel(x, y):
    return abs(x - y) / max(abs(x), abs(y))


@pytest.mark.parametrize("bad", [0, -1, float("nan"), float("inf"), "x"])
def test_params_reject_nonpositive(bad):
    with pytest.raises(NonPositiveError):
        Params(1, bad, 1, 1)


def test_seeds_need_five_positive_values():
    with pytest.raises(ValueError):
        SeedValues((1, 1, 1, 1))
    with pytest.raises(NonPositiveError):
        SeedValues((1, 1, 0, 1, 1))
    assert SeedValues.constant(2).values == (2, 2, 2, 2, 2)


def test_golden_ratio_discriminants():
    rep = discriminants(Params(0.5, 1, 0.5, 1))
    assert rep.rho_plus == pytest.approx((1 + math.sqrt(5)) / 2, rel=1e-15)
    assert rep.L == pytest.approx(math.sqrt(5) / 2, rel=1e-15)
    assert rep.A == -0.25


def test_critical_application_discriminants():
    # hand evaluation: c + ad = 3/2, sqrt(9/4 + 4) = 5/2
    rep = discriminants(Params(F(1, 2), F(1), F(1), F(1)))
    assert rep.A == 0
    assert rep.B == -3
    assert rep.p == F(1, 4)
    assert rep.rho_plus == 2.0
    assert rep.rho_minus == -0.5
    assert rep.L == 1.0


def test_a_at_least_one_forces_blowup():
    rep = discriminants(Params(1, 1, 1, 1))
    assert rep.A == -1
    assert classify(Params(1, 1, 1, 1)).kind is RegimeKind.BLOWUP


def test_classify_examples():
    assert classify(Params(0.5, 1, 0.5, 1)).kind is RegimeKind.BLOWUP
    assert classify(Params(F(1, 2), 1, 1, 1)).kind is RegimeKind.CRITICAL_CONVERGENT
    ext = Params(0.5, 0.25, 0.5, 0.5)
    assert classify(ext).report.A == 0.25
    assert classify(ext).kind is RegimeKind.EXTINCTION


def test_extinction_example_confirmed_by_simulation():
    traj = engine.simulate(Params(0.5, 0.25, 0.5, 0.5), SeedValues.constant(1.0), 500)
    assert traj.values[-1] < 1e-6


def test_classify_tolerance_band():
    p = Params(0.5, 1 + 1e-12, 1, 1)
    assert classify(p).kind is RegimeKind.BLOWUP
    assert classify(p, tol=1e-9).kind is RegimeKind.CRITICAL_CONVERGENT
    with pytest.raises(ValueError):
        classify(p, tol=-1)


def test_critical_unstable_variant_exists_for_sign_function():
    # unreachable with valid parameters at tol 0, but the variant is total:
    # widen the band far enough that a B > 0 point counts as critical
    p = Params(0.01, 10, 0.1, 1)
    rep = discriminants(p)
    assert rep.B > 0
    assert classify(p, tol=abs(rep.A) + 1).kind is RegimeKind.CRITICAL_UNSTABLE


def test_equilibria_examples():
    assert equilibria(Params(0.5, 1, 0.5, 1)) is EquilibriumSet.ONLY_ZERO
    assert equilibria(Params(F(1, 2), 1, 1, 1)) is EquilibriumSet.POSITIVE_CONTINUUM
    assert equilibria(Params(2, 1, 1, 1)) is EquilibriumSet.ONLY_ZERO


@given(pos, pos, pos, pos)
def test_equilibria_consistent_with_classify(a, b, c, d):
    p = Params(a, b, c, d)
    assert (equilibria(p) is EquilibriumSet.POSITIVE_CONTINUUM) == classify(p).kind.is_critical


@given(pos, pos, pos, pos)
def test_report_invariants(a, b, c, d):
    p = Params(a, b, c, d)
    rep = discriminants(p)
    assert rep.rho_plus > 0
    assert rep.rho_plus > rep.rho_minus
    assert rep.L > 0 and rep.p > 0
    assert rep.p == pytest.approx(1 + rep.B / (c + d) ** 2, rel=1e-9, abs=1e-12)
    if rep.B != 0:
        assert (rep.B > 0) == (rep.p > 1) or abs(rep.p - 1) < 1e-12


@given(pos, pos, pos, pos)
def test_roots_solve_characteristic_equation(a, b, c, d):
    p = Params(a, b, c, d)
    rep = discriminants(p)
    s, q = c + a * d, b * d
    for r in (rep.rho_plus, rep.rho_minus):
        # relative to the size of the individual terms
        scale = r * r + s * abs(r) + q
        assert abs(char_poly(p, r)) <= 1e-12 * scale


@given(pos, pos, pos, pos)
def test_sign_of_A_matches_ratio_limit(a, b, c, d):
    rep = discriminants(Params(a, b, c, d))
    assume(abs(rep.A) > 1e-9 * (c + d + b))
    assert (rep.A > 0) == (rep.L < 1)


@given(pos, pos, pos, pos)
def test_char_poly_at_c_plus_d_equals_d_times_A(a, b, c, d):
    p = Params(a, b, c, d)
    lam = c + d
    scale = lam * lam + (c + a * d) * lam + b * d
    assert abs(char_poly(p, lam) - d * discriminants(p).A) <= 1e-12 * scale


@given(unit_frac, pos_frac, pos_frac)
def test_critical_manifold_forces_negative_B(a, c, d):
    p = Params.critical(a, c, d)
    rep = discriminants(p)
    assert rep.A == 0
    assert rep.B < 0
    assert rep.B == (c + d) * (-a * d - c)
    assert classify(p).kind is RegimeKind.CRITICAL_CONVERGENT
    assert abs(rep.L - 1) <= 1e-12


@given(unit_frac, pos_frac, pos_frac)
def test_critical_manifold_float_B_formula(a, c, d):
    a, c, d = float(a), float(c), float(d)
    rep = discriminants(Params.critical(a, c, d))
    assert rel(rep.B, (c + d) * (-a * d - c)) <= 1e-12


@settings(max_examples=200)
@given(pos_frac, pos_frac, pos_frac, pos_frac, pos_frac)
def test_scale_consistency(a, b, c, d, k):
    p = Params(a, b, c, d)
    q = p.scaled(k)
    rp, rq = discriminants(p), discriminants(q)
    assert rq.A == k * rp.A
    assert rq.p == rp.p
    assert rq.L == pytest.approx(rp.L, rel=1e-12)
    assert classify(q).kind is classify(p).kind


def test_sign_link_on_random_sample():
    import random

    rng = random.Random(0)
    for _ in range(1000):
        a, b, c, d = (rng.uniform(0.01, 10) for _ in range(4))
        rep = discriminants(Params(a, b, c, d))
        assert (rep.A > 0) - (rep.A < 0) == (1 - rep.L > 0) - (1 - rep.L < 0)


@given(pos, pos, pos, pos)
def test_ratio_limit_matches_dominant_root(a, b, c, d):
    rep = discriminants(Params(a, b, c, d))
    assert abs(rep.L * d + c - rep.rho_plus) <= 1e-13 * (rep.rho_plus + c)
