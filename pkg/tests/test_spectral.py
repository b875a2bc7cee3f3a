import cmath
import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rde5.errors import NonPositiveError
from rde5.model import Params, discriminants
from rde5.spectral import (
    Verdict,
    characteristic_polynomial,
    characteristic_roots,
    eigen_residual,
    jacobian,
    numeric_eigen_check,
    stability_verdict,
)

p_values = st.floats(min_value=1e-6, max_value=10.0, allow_nan=False)


def expand(p):
    """(lam^2 - 1)(lam^3 + p) multiplied out by convolution of coefficient lists."""
    left, right = [1, 0, -1], [1, 0, 0, p]
    out = [0] * 6
    for i, x in enumerate(left):
        for j, y in enumerate(right):
            out[i + j] += x * y
    return tuple(out)


@pytest.mark.parametrize("p", [F(1, 4), 1, 8])
def test_jacobian_rows(p):
    m = jacobian(p).matrix
    assert m[4].tolist() == [float(p), 0.0, -float(p), 1.0, 0.0]
    for i in range(4):
        row = [0.0] * 5
        row[i + 1] = 1.0
        assert m[i].tolist() == row


def test_jacobian_is_read_only_and_independent_of_anything_else():
    j1, j2 = jacobian(0.3), jacobian(0.3)
    assert j1 == j2
    with pytest.raises(ValueError):
        j1.matrix[0, 0] = 5.0


@pytest.mark.parametrize("bad", [0, -1.0])
def test_nonpositive_p(bad):
    with pytest.raises(NonPositiveError):
        jacobian(bad)
    with pytest.raises(NonPositiveError):
        characteristic_roots(bad)


def test_roots_p8():
    rep = characteristic_roots(8)
    s3 = math.sqrt(3)
    expected = [1, -1, -2, complex(1, s3), complex(1, -s3)]
    for got, want in zip(rep.eigenvalues, expected):
        assert abs(got - want) < 1e-15
    assert rep.moduli == pytest.approx((1, 1, 2, 2, 2), abs=1e-15)
    assert rep.spectral_radius == 2.0
    assert rep.verdict is Verdict.UNSTABLE


def test_roots_p1_all_on_unit_circle():
    rep = characteristic_roots(1)
    assert all(abs(abs(z) - 1) < 1e-15 for z in rep.eigenvalues)
    assert rep.spectral_radius == 1.0
    assert rep.verdict is Verdict.INCONCLUSIVE


def test_roots_quarter():
    rep = characteristic_roots(0.25)
    assert rep.moduli[2] == pytest.approx(0.629960524947, abs=1e-12)
    assert rep.spectral_radius == 1.0
    assert rep.verdict is Verdict.INCONCLUSIVE


def test_real_cube_root_is_negative():
    # lam^3 + p = 0 has real root -p^(1/3); +p^(1/3) is not an eigenvalue
    p = 2.0
    q = p ** (1 / 3)
    rep = characteristic_roots(p)
    assert any(abs(z + q) < 1e-14 for z in rep.eigenvalues)
    assert not any(abs(z - q) < 1e-6 for z in rep.eigenvalues)
    m = jacobian(p).matrix
    assert abs(np.linalg.det(m - q * np.eye(5))) > 1e-3


@given(p_values)
def test_closed_form_matches_general_eigensolver(p):
    closed = sorted(characteristic_roots(p).eigenvalues, key=lambda z: (round(z.real, 6), round(z.imag, 6)))
    numeric = sorted(np.linalg.eigvals(jacobian(p).matrix), key=lambda z: (round(z.real, 6), round(z.imag, 6)))
    for a, b in zip(closed, numeric):
        # -1 is a double root at p = 1, where eigvals is only sqrt(eps)-accurate
        assert abs(a - b) < 1e-6


@given(st.fractions(min_value=F(1, 10**6), max_value=10))
def test_polynomial_identity_exact(p):
    assert expand(p) == characteristic_polynomial(p)


@given(p_values)
def test_matrix_characteristic_polynomial(p):
    coeffs = np.poly(jacobian(p).matrix)
    assert np.allclose(coeffs, characteristic_polynomial(p), atol=1e-10)


@given(p_values)
def test_spectrum_invariants(p):
    rep = characteristic_roots(p)
    q = p ** (1 / 3)
    assert sorted(rep.moduli) == pytest.approx(sorted([1, 1, q, q, q]), rel=1e-12)
    assert rep.spectral_radius == pytest.approx(max(1.0, q), rel=1e-12)
    for z in rep.eigenvalues:
        assert abs((z * z - 1) * (z**3 + p)) <= 1e-12 * (1 + abs(z) ** 5 + p * (1 + abs(z) ** 2))
    assert rep.verdict in (Verdict.UNSTABLE, Verdict.INCONCLUSIVE)


@given(p_values)
def test_numeric_eigen_check(p):
    assert numeric_eigen_check(jacobian(p), 1e-10)


def test_eigen_residual_examples():
    m8 = jacobian(8)
    assert eigen_residual(m8, -2) <= 1e-12
    assert eigen_residual(jacobian(1), 1) == 0.0
    assert eigen_residual(jacobian(0.25), -1) <= 1e-12
    # not an eigenvalue
    assert eigen_residual(m8, 2) > 1


def test_eigen_check_rejects_wrong_matrix():
    m = jacobian(8)
    other = type(m)(p=8.0, matrix=jacobian(7).matrix)
    assert not numeric_eigen_check(other, 1e-10)


@pytest.mark.parametrize(
    "radius,tol,verdict",
    [(2, 1e-9, Verdict.UNSTABLE), (1, 1e-9, Verdict.INCONCLUSIVE), (0.9, 1e-9, Verdict.STABLE),
     (1 + 1e-12, 1e-9, Verdict.INCONCLUSIVE)],
)
def test_stability_verdict(radius, tol, verdict):
    assert stability_verdict(radius, tol) is verdict


def test_stability_verdict_rejects_negative_radius():
    with pytest.raises(ValueError):
        stability_verdict(-0.1)


@given(st.floats(0.01, 0.99), st.floats(0.01, 10), st.floats(0.01, 10))
def test_critical_manifold_is_inconclusive(a, c, d):
    p = discriminants(Params.critical(a, c, d)).p
    assert p < 1
    rep = characteristic_roots(p)
    assert rep.spectral_radius == 1.0
    assert rep.verdict is Verdict.INCONCLUSIVE


def test_cube_roots_of_minus_p_via_cmath():
    p = 3.7
    roots = [cmath.rect(p ** (1 / 3), math.pi / 3 + 2 * math.pi * k / 3) for k in range(3)]
    closed = characteristic_roots(p).eigenvalues[2:]
    for r in roots:
        assert min(abs(r - z) for z in closed) < 1e-14
