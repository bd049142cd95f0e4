"""Special functions and quadrature kernels for the closed-form outage math.

The hypergeometric evaluator only covers the family the interference
transforms need: real parameters with a non-positive argument.  Everything
here is pure and reentrant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
import scipy.integrate
import scipy.special


class NumericsError(ArithmeticError):
    """A numeric routine failed to reach its requested accuracy."""

    def __init__(self, message: str, best_estimate: float | None = None):
        super().__init__(message)
        self.best_estimate = best_estimate


# -- Gauss hypergeometric function for z <= 0 -------------------------------

_SERIES_MAX_TERMS = 20000
# Pfaff argument w = z/(z-1) stays below 8/9 for z >= -8, giving geometric
# convergence; beyond that switch to the 1/z connection formula.
_PFAFF_LIMIT = -8.0


def _gauss_series(a: float, b: float, c: float, z: float, tol: float) -> float:
    """Plain power series; needs |z| < 1 and converges fast for |z| <= 0.9."""
    term = 1.0
    total = 1.0
    for n in range(_SERIES_MAX_TERMS):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        total += term
        if abs(term) <= tol * max(abs(total), 1e-300):
            return total
    raise NumericsError(
        f"2F1 series did not converge for z={z}", best_estimate=total
    )


def gauss_2f1_neg(a: float, b: float, c: float, z: float, tol: float = 1e-14) -> float:
    """2F1(a, b; c; z) for real parameters and z <= 0.

    Three regimes: direct series for small |z|, the Pfaff transformation
    2F1(a,b;c;z) = (1-z)^(-a) 2F1(a, c-b; c; z/(z-1)) for moderate |z|, and
    the 1/z connection formula for large |z| (requires a - b non-integer,
    which holds throughout the path-loss family a=1, b=1-1/alpha).
    """
    if z > 0.0:
        raise NumericsError(f"gauss_2f1_neg only supports z <= 0, got z={z}")
    if c <= 0.0 and c == math.floor(c):
        raise NumericsError(f"c={c} is a non-positive integer")
    if z == 0.0:
        return 1.0
    if z >= -0.5:
        return _gauss_series(a, b, c, z, tol)
    if z >= _PFAFF_LIMIT:
        w = z / (z - 1.0)
        return (1.0 - z) ** (-a) * _gauss_series(a, c - b, c, w, tol)

    # |z| large: DLMF 15.8.2 with argument 1/z in (-1/8, 0).
    ab = a - b
    if abs(ab - round(ab)) < 1e-9:
        raise NumericsError(
            f"connection formula needs a-b non-integer, got a-b={ab} with z={z}"
        )
    gamma = scipy.special.gamma
    inv = 1.0 / z
    term1 = (
        gamma(c) * gamma(b - a) / (gamma(b) * gamma(c - a))
        * (-z) ** (-a)
        * _gauss_series(a, a - c + 1.0, a - b + 1.0, inv, tol)
    )
    term2 = (
        gamma(c) * gamma(a - b) / (gamma(a) * gamma(c - b))
        * (-z) ** (-b)
        * _gauss_series(b, b - c + 1.0, b - a + 1.0, inv, tol)
    )
    return term1 + term2


def beta_fn(a: float, b: float) -> float:
    """Euler beta function B(a, b) = Gamma(a)Gamma(b)/Gamma(a+b), a, b > 0."""
    if a <= 0.0 or b <= 0.0:
        raise NumericsError(f"beta_fn needs positive arguments, got ({a}, {b})")
    return float(scipy.special.beta(a, b))


# -- adaptive quadrature on (0, inf) ----------------------------------------

@dataclass(frozen=True)
class QuadratureSettings:
    abs_tol: float = 1e-11
    rel_tol: float = 1e-10
    max_subdivisions: int = 200

    def __post_init__(self):
        if self.abs_tol <= 0.0 or self.rel_tol <= 0.0:
            raise ValueError("quadrature tolerances must be positive")


DEFAULT_QUADRATURE = QuadratureSettings()


class IntegralResult(NamedTuple):
    value: float
    error_estimate: float


def integrate_semi_infinite(
    f: Callable[[float], float],
    settings: QuadratureSettings = DEFAULT_QUADRATURE,
) -> IntegralResult:
    """Adaptive quadrature of f over (0, inf).

    The infinite range is handled by mapping onto a finite interval
    (QUADPACK's rational transformation); the result carries an error
    estimate that is checked against the requested tolerances.
    """
    result = scipy.integrate.quad(
        f,
        0.0,
        np.inf,
        epsabs=settings.abs_tol,
        epsrel=settings.rel_tol,
        limit=settings.max_subdivisions,
        full_output=True,
    )
    value, abserr = result[0], result[1]
    quadpack_message = result[3] if len(result) > 3 else None
    tolerance = max(settings.abs_tol, settings.rel_tol * abs(value))
    if (
        not math.isfinite(value)
        or quadpack_message is not None
        or abserr > 10.0 * tolerance
    ):
        raise NumericsError(
            f"semi-infinite quadrature stalled (estimate {value}, error {abserr},"
            f" diagnostic: {quadpack_message})",
            best_estimate=value,
        )
    return IntegralResult(float(value), float(abserr))


# -- Gauss-Chebyshev abscissas ----------------------------------------------

@dataclass(frozen=True)
class ChebyshevNodes:
    """Abscissas cos((2n-1)pi/2N), n = 1..N, strictly decreasing."""

    n_points: int
    thetas: np.ndarray

    def __post_init__(self):
        if self.n_points < 1:
            raise ValueError(f"need at least one node, got N={self.n_points}")


def chebyshev_nodes(n_points: int) -> ChebyshevNodes:
    if n_points < 1:
        raise ValueError(f"need at least one node, got N={n_points}")
    n = np.arange(1, n_points + 1)
    thetas = np.cos((2.0 * n - 1.0) * np.pi / (2.0 * n_points))
    return ChebyshevNodes(n_points=n_points, thetas=thetas)


# -- numeric differentiation -------------------------------------------------

def numeric_derivative(
    f: Callable[[float], float], x: float, rel_step: float = 1e-4
) -> float:
    """Central difference with one Richardson extrapolation step.

    The step is relative (h = rel_step * x), so x must be nonzero; 1e-4
    balances truncation against cancellation at double precision.
    """
    if x == 0.0:
        raise NumericsError("numeric_derivative needs a nonzero expansion point")
    h = rel_step * abs(x)

    def central(step):
        return (f(x + step) - f(x - step)) / (2.0 * step)

    d1 = central(h)
    d2 = central(0.5 * h)
    out = (4.0 * d2 - d1) / 3.0
    if not math.isfinite(out):
        raise NumericsError(f"derivative evaluations not finite near x={x}")
    return out
