"""Linearisation of the critical (A = 0) system at a constant solution.

Stacking (x[n-4], ..., x[n]) into a 5-vector gives a map whose Jacobian at any
constant vector (w, ..., w) is the companion matrix

    [0 1  0 0 0]
    [0 0  1 0 0]
    [0 0  0 1 0]
    [0 0  0 0 1]
    [p 0 -p 1 0]      p = b d / (c + d)**2

with characteristic polynomial lam**5 - lam**3 + p lam**2 - p
= (lam**2 - 1)(lam**3 + p).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveError

VERDICT_TOL = 1e-9


class Verdict(enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    INCONCLUSIVE = "Inconclusive"

    def __str__(self):
        return self.value


def _check_p(p):
    if not p > 0:
        raise NonPositiveError("p", p)


@dataclass(frozen=True)
class JacobianMatrix:
    p: float
    matrix: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, JacobianMatrix):
            return NotImplemented
        return self.p == other.p and np.array_equal(self.matrix, other.matrix)

    __hash__ = None


def jacobian(p) -> JacobianMatrix:
    """Companion-form Jacobian; the same matrix for every constant solution w."""
    _check_p(p)
    p = float(p)
    m = np.zeros((5, 5))
    m[np.arange(4), np.arange(1, 5)] = 1.0
    m[4] = (p, 0.0, -p, 1.0, 0.0)
    m.setflags(write=False)
    return JacobianMatrix(p=p, matrix=m)


def characteristic_polynomial(p):
    """Coefficients of lam**5 - lam**3 + p lam**2 - p, highest degree first."""
    return (1, 0, -1, p, 0, -p)


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: tuple
    moduli: tuple
    spectral_radius: float
    verdict: Verdict


def stability_verdict(radius, tol=VERDICT_TOL) -> Verdict:
    """Linearised stability test: every |lam| < 1 is stable, some |lam| > 1 unstable."""
    if radius < 0:
        raise ValueError(f"radius must be nonnegative, got {radius!r}")
    if radius < 1 - tol:
        return Verdict.STABLE
    if radius > 1 + tol:
        return Verdict.UNSTABLE
    return Verdict.INCONCLUSIVE


def characteristic_roots(p, tol=VERDICT_TOL) -> SpectrumReport:
    """Closed-form eigenvalues: +1, -1 and the three cube roots of -p.

    The real cube root of -p is -p**(1/3).  Because +-1 are always
    eigenvalues the radius never drops below 1, so the verdict is either
    Inconclusive or Unstable.
    """
    _check_p(p)
    q = float(np.cbrt(float(p)))
    half = 0.5 * q
    im = half * np.sqrt(3.0)
    eigs = (
        complex(1.0, 0.0),
        complex(-1.0, 0.0),
        complex(-q, 0.0),
        complex(half, im),
        complex(half, -im),
    )
    moduli = (1.0, 1.0, q, q, q)
    radius = max(1.0, q)
    return SpectrumReport(eigenvalues=eigs, moduli=moduli, spectral_radius=radius, verdict=stability_verdict(radius, tol))


def eigen_residual(m: JacobianMatrix, lam) -> float:
    """||(M - lam I) v|| / ||v|| for the companion eigenvector v = (1, lam, ..., lam**4)."""
    v = np.array([lam**k for k in range(5)], dtype=complex)
    r = m.matrix @ v - lam * v
    return float(np.linalg.norm(r) / np.linalg.norm(v))


def numeric_eigen_check(m: JacobianMatrix, tol) -> bool:
    return all(eigen_residual(m, lam) <= tol for lam in characteristic_roots(m.p).eigenvalues)
