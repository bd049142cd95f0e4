"""Closed-form interference transforms and outage probabilities.

The far user's outage follows from the Laplace transform of the normalized
interference power, split into a same-road factor (hypergeometric closed
form) and an other-roads factor (double semi-infinite integral).  The near
users add a position average over their segment, done with Gauss-Chebyshev
abscissas.  Asymptotic variants cover the dense-roads / sparse-BS limit in
which the interferer field degrades to a planar Poisson process.

Everything is pure; the other-roads transform is memoized per argument
(it is geometry-independent), which individual workers each do privately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import gamma as _gamma

from .config import SystemConfig, derive
from .numerics import (
    NumericsError,
    QuadratureSettings,
    beta_fn,
    chebyshev_nodes,
    gauss_2f1_neg,
    integrate_semi_infinite,
    numeric_derivative,
)

TOWARD_FAR_BS = "toward_far_bs"
AWAY_FROM_FAR_BS = "away_from_far_bs"

DEFAULT_CHEBYSHEV_N = 64
CLAMP_TOL = 1e-12

BRANCH_UNEQUAL = "d1_ne_d2"
BRANCH_EQUAL = "d1_eq_d2"
BRANCH_CASE_I = "case_i"
BRANCH_CASE_II = "case_ii"
BRANCH_INFEASIBLE = "infeasible"

# relative spread of d^alpha0 below which the two-term outage formula
# cancels catastrophically and the derivative form takes over
EQUAL_DISTANCE_RTOL = 1e-6


@dataclass(frozen=True)
class OutageValue:
    p: float
    branch: str


@dataclass(frozen=True)
class LaplaceSpec:
    """Which transform to evaluate, with its distance arguments.

    geometry carries (d1, d2) for the same-road variants and (d1, d2, r1)
    for the near-user ones; densities are taken from the config.
    """

    variant: str
    s: float
    geometry: tuple = ()

    def evaluate(self, cfg: SystemConfig) -> float:
        if self.variant == "intra":
            d1, d2 = self.geometry
            return laplace_intra(self.s, d1, d2, cfg.lambda_b, cfg.alpha0)
        if self.variant == "inter":
            return laplace_inter(self.s, cfg.lambda_l, cfg.lambda_b, cfg.alpha1)
        if self.variant == "total":
            d1, d2 = self.geometry
            return laplace_total(self.s, d1, d2, cfg)
        if self.variant in (TOWARD_FAR_BS, AWAY_FROM_FAR_BS):
            d1, d2, r1 = self.geometry
            return laplace_noma(self.s, d1, d2, r1, self.variant, cfg)
        if self.variant == "asymptotic":
            return laplace_asymptotic(self.s, cfg.lambda_l * cfg.lambda_b, cfg.alpha1)
        raise ValueError(f"unknown Laplace variant {self.variant!r}")


def _check_s(s: float) -> None:
    if s < 0.0 or not math.isfinite(s):
        raise NumericsError(f"transform argument must be finite and >= 0, got {s}")


# -- same-road interference ----------------------------------------------------

def half_line_integral(s: float, alpha: float) -> float:
    """integral_0^inf s / (s + r^alpha) dr = s^(1/alpha) (pi/alpha) csc(pi/alpha)."""
    if s == 0.0:
        return 0.0
    return s ** (1.0 / alpha) * (math.pi / alpha) / math.sin(math.pi / alpha)


def intra_tail_integral(d: float, s: float, alpha: float) -> float:
    """integral_d^inf s / (s + r^alpha) dr via the hypergeometric closed form.

    For s <= d^alpha this is the direct form
    s d^(1-alpha)/(alpha-1) 2F1(1, 1-1/alpha; 2-1/alpha; -s/d^alpha); beyond
    that the complement over (0, d) keeps the series argument in [-1, 0].
    """
    _check_s(s)
    if s == 0.0:
        return 0.0
    if d <= 0.0:
        raise ValueError(f"boundary must be positive, got d={d}")
    w = s / d**alpha
    if w <= 1.0:
        f = gauss_2f1_neg(1.0, 1.0 - 1.0 / alpha, 2.0 - 1.0 / alpha, -w)
        return s * d ** (1.0 - alpha) / (alpha - 1.0) * f
    head = d * gauss_2f1_neg(1.0, 1.0 / alpha, 1.0 + 1.0 / alpha, -1.0 / w)
    return half_line_integral(s, alpha) - head


def intra_head_integral(r: float, s: float, alpha: float) -> float:
    """integral_0^r s / (s + x^alpha) dx (finite even at r = 0)."""
    _check_s(s)
    if s == 0.0 or r == 0.0:
        return 0.0
    z = r**alpha / s
    if z <= 1.0:
        return r * gauss_2f1_neg(1.0, 1.0 / alpha, 1.0 + 1.0 / alpha, -z)
    return half_line_integral(s, alpha) - intra_tail_integral(r, s, alpha)


def laplace_intra(
    s: float, d1: float, d2: float, lambda_b: float, alpha0: float
) -> float:
    """Transform of the same-road interference, interferers beyond d1 and d2."""
    _check_s(s)
    if s == 0.0 or lambda_b == 0.0:
        return 1.0
    exponent = lambda_b * (
        intra_tail_integral(d1, s, alpha0) + intra_tail_integral(d2, s, alpha0)
    )
    return math.exp(-exponent)


# -- other-roads interference ----------------------------------------------------

_PROFILE_LN_RANGE = 46.0
_PROFILE_POINTS = 1601


@lru_cache(maxsize=8)
def _inter_profile(alpha1: float):
    """Scaled inner integral of the other-roads transform.

    Substituting u = s^(1/alpha1) v reduces the per-road factor to
    Q(x, s) = s^(1/alpha1) g(T) with T = x^alpha1 / s and
    g(T) = integral_0^inf dv / (1 + (T^(2/alpha1) + v^2)^(alpha1/2)),
    a single smooth positive profile per exponent, tabulated once over
    ln T and spline-interpolated; outside the table the exact limits
    g(0+) and the algebraic tail take over.
    """
    g0 = (math.pi / alpha1) / math.sin(math.pi / alpha1)
    c_inf = 0.5 * math.sqrt(math.pi) * _gamma((alpha1 - 1.0) / 2.0) / _gamma(alpha1 / 2.0)
    settings = QuadratureSettings(abs_tol=1e-13, rel_tol=5e-13, max_subdivisions=400)
    ln_ts = np.linspace(-_PROFILE_LN_RANGE, _PROFILE_LN_RANGE, _PROFILE_POINTS)
    ln_g = np.empty_like(ln_ts)
    half = 0.5 * alpha1
    for i, lt in enumerate(ln_ts):
        c = math.exp(lt / alpha1)    # T^(1/alpha1)
        if c <= 1.0:
            c2 = c * c
            value = integrate_semi_infinite(
                lambda v: 1.0 / (1.0 + (c2 + v * v) ** half), settings
            ).value
            ln_g[i] = math.log(value)
        else:
            # rescale v = c y so the integrand stays O(1) for large T
            inv = c**-alpha1
            value = integrate_semi_infinite(
                lambda y: 1.0 / (inv + (1.0 + y * y) ** half), settings
            ).value
            ln_g[i] = math.log(value) + (1.0 - alpha1) * math.log(c)
    spline = CubicSpline(ln_ts, ln_g)
    ln_c_inf = math.log(c_inf)
    tail_slope = 1.0 / alpha1 - 1.0

    def profile(ln_t: float) -> float:
        if ln_t < -_PROFILE_LN_RANGE:
            return g0
        if ln_t > _PROFILE_LN_RANGE:
            return math.exp(ln_c_inf + tail_slope * ln_t)
        return math.exp(float(spline(ln_t)))

    return profile


@lru_cache(maxsize=200000)
def laplace_inter(s: float, lambda_l: float, lambda_b: float, alpha1: float) -> float:
    """Transform of the interference from all other roads.

    exp(-2 pi lambda_l * integral_0^inf (1 - G(x, s)) dx) with
    G(x, s) = exp(-2 lambda_b * integral_0^inf s / (s + (x^2+u^2)^(alpha1/2)) du);
    the inner integral comes from the cached one-parameter profile, the
    outer one runs through the adaptive semi-infinite quadrature.
    """
    _check_s(s)
    if alpha1 <= 2.0:
        raise NumericsError(f"alpha1 must exceed 2, got {alpha1}")
    if s == 0.0 or lambda_l == 0.0 or lambda_b == 0.0:
        return 1.0
    profile = _inter_profile(alpha1)
    s_scale = s ** (1.0 / alpha1)
    ln_s = math.log(s)
    rate = 2.0 * lambda_b * s_scale

    def integrand(x: float) -> float:
        ln_t = alpha1 * math.log(x) - ln_s if x > 0.0 else -math.inf
        return -math.expm1(-rate * profile(ln_t))

    value = integrate_semi_infinite(integrand).value
    return math.exp(-2.0 * math.pi * lambda_l * value)


def laplace_inter_direct(
    s: float,
    lambda_l: float,
    lambda_b: float,
    alpha1: float,
    settings: QuadratureSettings = QuadratureSettings(abs_tol=1e-12, rel_tol=1e-10),
) -> float:
    """Same transform with both integrals evaluated by nested quadrature.

    Slower than laplace_inter and free of its interpolation table; kept as
    the independent route for the validation suite and tests.  The inner
    integral runs in the scale-free coordinates u = s^(1/alpha1) v, where
    its integrand is O(1), so the adaptive rule stays well conditioned for
    any argument.
    """
    _check_s(s)
    if s == 0.0 or lambda_l == 0.0 or lambda_b == 0.0:
        return 1.0
    half = 0.5 * alpha1
    s_scale = s ** (1.0 / alpha1)

    def inner(x: float) -> float:
        c = x / s_scale
        if c <= 1.0:
            c2 = c * c
            val = integrate_semi_infinite(
                lambda v: 1.0 / (1.0 + (c2 + v * v) ** half), settings
            ).value
        else:
            inv = c**-alpha1
            val = c ** (1.0 - alpha1) * integrate_semi_infinite(
                lambda y: 1.0 / (inv + (1.0 + y * y) ** half), settings
            ).value
        return s_scale * val

    def outer(x: float) -> float:
        return -math.expm1(-2.0 * lambda_b * inner(x))

    value = integrate_semi_infinite(outer, settings).value
    return math.exp(-2.0 * math.pi * lambda_l * value)


def laplace_total(s: float, d1: float, d2: float, cfg: SystemConfig) -> float:
    """Product of the same-road and other-roads transforms."""
    return laplace_intra(s, d1, d2, cfg.lambda_b, cfg.alpha0) * laplace_inter(
        s, cfg.lambda_l, cfg.lambda_b, cfg.alpha1
    )


def laplace_noma(
    s: float, d1: float, d2: float, r1: float, side: str, cfg: SystemConfig
) -> float:
    """Interference transform seen by a near user at distance r1 from its BS.

    Toward the far BS the same-road interferers start at r1 on the near
    side and d1+d2-r1 on the far side.  Away from it, the stretch between
    BS and user folds over: double intensity on (0, r1), plus boundaries
    r1 and d1+d2+r1.  A collocated user (r1 = 0) evaluates the lower
    boundary at 1e-9 m, where the integral is finite since the integrand
    is bounded by 1.
    """
    _check_s(s)
    if not 0.0 <= r1 <= cfg.seg_radius:
        raise ValueError(f"r1={r1} outside the segment [0, {cfg.seg_radius}]")
    if s == 0.0:
        return 1.0
    near = max(r1, 1e-9)
    inter = laplace_inter(s, cfg.lambda_l, cfg.lambda_b, cfg.alpha1)
    if side == TOWARD_FAR_BS:
        return laplace_intra(s, near, d1 + d2 - r1, cfg.lambda_b, cfg.alpha0) * inter
    if side == AWAY_FROM_FAR_BS:
        fold = math.exp(-2.0 * cfg.lambda_b * intra_head_integral(r1, s, cfg.alpha0))
        return fold * laplace_intra(s, near, d1 + d2 + r1, cfg.lambda_b, cfg.alpha0) * inter
    raise ValueError(f"side must be {TOWARD_FAR_BS!r} or {AWAY_FROM_FAR_BS!r}, got {side!r}")


def laplace_asymptotic(s: float, lambda_product: float, alpha1: float) -> float:
    """Dense-roads limit: exp(-(2 pi^2 lambda / alpha1) s^(2/alpha1) B(2/alpha1, 1-2/alpha1))."""
    _check_s(s)
    if alpha1 <= 2.0:
        raise NumericsError(f"alpha1 must exceed 2 for the asymptotic transform, got {alpha1}")
    if s == 0.0 or lambda_product == 0.0:
        return 1.0
    b = beta_fn(2.0 / alpha1, 1.0 - 2.0 / alpha1)
    return math.exp(
        -2.0 * math.pi**2 * lambda_product / alpha1 * s ** (2.0 / alpha1) * b
    )


# -- outage probabilities --------------------------------------------------------

def mu_threshold(eps: float, d: float, alpha0: float, beta: float) -> float:
    """d^alpha0 eps / (1 - beta - eps beta); callers ensure the split is feasible."""
    return d**alpha0 * eps / (1.0 - beta - eps * beta)


def _clamp_probability(p: float, context: str) -> float:
    p = float(p)
    if -CLAMP_TOL <= p <= 1.0 + CLAMP_TOL:
        return min(max(p, 0.0), 1.0)
    raise NumericsError(
        f"{context}: probability {p} violates [0, 1] beyond the {CLAMP_TOL} "
        "floating-point allowance; this indicates a formula or quadrature bug",
        best_estimate=p,
    )


def outage_comp(cfg: SystemConfig) -> OutageValue:
    """Far-user outage probability for fixed serving distances.

    Infeasible power splits (1 - beta - eps0 beta <= 0) mean the target
    rate is unreachable even without noise, so the probability is 1 rather
    than an error.  Nearly equal distances route to the derivative form,
    which is exact at equality and avoids the cancelling two-term form.
    """
    der = derive(cfg)
    if not der.comp_feasible:
        return OutageValue(p=1.0, branch=BRANCH_INFEASIBLE)
    eps0 = der.eps[0]
    if eps0 == 0.0:
        return OutageValue(p=0.0, branch=BRANCH_EQUAL)
    rho = der.rho
    a0 = cfg.alpha0
    da, db = cfg.d1**a0, cfg.d2**a0
    if abs(da - db) < EQUAL_DISTANCE_RTOL * da:
        mu = mu_threshold(eps0, cfg.d1, a0, cfg.beta)
        lap = laplace_total(mu, cfg.d1, cfg.d1, cfg)
        lap_deriv = numeric_derivative(
            lambda s: laplace_total(s, cfg.d1, cfg.d1, cfg), mu
        )
        damp = math.exp(-mu / rho)
        p = 1.0 - damp * (1.0 + mu / rho) * lap + damp * mu * lap_deriv
        return OutageValue(_clamp_probability(p, "far-user outage"), BRANCH_EQUAL)
    mu1 = mu_threshold(eps0, cfg.d1, a0, cfg.beta)
    mu2 = mu_threshold(eps0, cfg.d2, a0, cfg.beta)
    p = (
        1.0
        - db / (db - da) * math.exp(-mu1 / rho) * laplace_total(mu1, cfg.d1, cfg.d2, cfg)
        + da / (db - da) * math.exp(-mu2 / rho) * laplace_total(mu2, cfg.d1, cfg.d2, cfg)
    )
    return OutageValue(_clamp_probability(p, "far-user outage"), BRANCH_UNEQUAL)


def _noma_sum(cfg: SystemConfig, eps0: float, eps_k: float, rho: float,
              n_nodes: int, laplace) -> tuple:
    """Gauss-Chebyshev position average shared by the exact and asymptotic forms.

    `laplace(s, c, side)` supplies the interference transform; the exact
    route conditions on the user position, the asymptotic one ignores it.
    Returns (sum, branch).
    """
    beta = cfg.beta
    a0 = cfg.alpha0
    dsum = cfg.d1 + cfg.d2
    denom0 = 1.0 - beta - eps0 * beta
    threshold = eps0 * beta / denom0
    nodes = chebyshev_nodes(n_nodes)
    thetas = nodes.thetas
    cs = 0.5 * cfg.seg_radius * (1.0 + thetas)
    weights = np.sqrt(1.0 - thetas**2)
    sides = {1: TOWARD_FAR_BS, 2: AWAY_FROM_FAR_BS}

    total = 0.0
    if eps_k >= threshold:
        for cn, w in zip(cs, weights):
            cp = cn**a0
            s = cp * eps_k / beta
            for t in (1, 2):
                dist = dsum + (-1) ** t * cn
                dp = dist**a0
                term = (
                    dp / (dp + eps_k * cp)
                    * math.exp(-s / rho)
                    * laplace(s, cn, sides[t])
                )
                total += w * term
        return total, BRANCH_CASE_I

    eta = (eps0 * beta - eps_k * denom0) / (beta * denom0 * (1.0 + eps_k))
    for cn, w in zip(cs, weights):
        cp = cn**a0
        s_star = cp * eps0 / denom0
        for t in (1, 2):
            dist = dsum + (-1) ** t * cn
            dp = dist**a0
            phi = (dp - cp) * eta + cp * eps0 / denom0
            psi = cp * eps_k / beta + (dp + cp * eps_k) * eta
            a_term = dp / (dp - cp) * (
                math.exp(-s_star / rho) * laplace(s_star, cn, sides[t])
                - math.exp(-phi / rho) * laplace(phi, cn, sides[t])
            )
            d_term = (
                dp / (dp + eps_k * cp)
                * math.exp(-psi / rho)
                * laplace(psi, cn, sides[t])
            )
            total += w * (a_term + d_term)
    return total, BRANCH_CASE_II


def outage_noma(
    cfg: SystemConfig, user_k: int, n_nodes: int = DEFAULT_CHEBYSHEV_N
) -> OutageValue:
    """Near-user outage: fails unless it can decode the far user's stream
    and then, after cancelling it, its own."""
    if user_k not in (1, 2):
        raise ValueError(f"user_k must be 1 or 2, got {user_k}")
    der = derive(cfg)
    if not der.comp_feasible or cfg.beta == 0.0:
        return OutageValue(p=1.0, branch=BRANCH_INFEASIBLE)
    eps0, eps_k = der.eps[0], der.eps[user_k]
    if eps0 == 0.0 and eps_k == 0.0:
        return OutageValue(p=0.0, branch=BRANCH_CASE_I)

    def laplace(s, cn, side):
        return laplace_noma(s, cfg.d1, cfg.d2, cn, side, cfg)

    total, branch = _noma_sum(cfg, eps0, eps_k, der.rho, n_nodes, laplace)
    p = 1.0 - math.pi / (4.0 * n_nodes) * total
    return OutageValue(_clamp_probability(p, "near-user outage"), branch)


def outage_comp_asymptotic(cfg: SystemConfig) -> OutageValue:
    """Far-user outage in the dense-roads limit at fixed lambda_l * lambda_b."""
    der = derive(cfg)
    if not der.comp_feasible:
        return OutageValue(p=1.0, branch=BRANCH_INFEASIBLE)
    eps0 = der.eps[0]
    if eps0 == 0.0:
        return OutageValue(p=0.0, branch=BRANCH_EQUAL)
    lam = cfg.lambda_l * cfg.lambda_b
    rho = der.rho
    a0 = cfg.alpha0
    da, db = cfg.d1**a0, cfg.d2**a0
    if abs(da - db) < EQUAL_DISTANCE_RTOL * da:
        mu = mu_threshold(eps0, cfg.d1, a0, cfg.beta)
        lap = laplace_asymptotic(mu, lam, cfg.alpha1)
        lap_deriv = numeric_derivative(
            lambda s: laplace_asymptotic(s, lam, cfg.alpha1), mu
        )
        damp = math.exp(-mu / rho)
        p = 1.0 - damp * (1.0 + mu / rho) * lap + damp * mu * lap_deriv
        return OutageValue(_clamp_probability(p, "asymptotic far-user outage"), BRANCH_EQUAL)
    mu1 = mu_threshold(eps0, cfg.d1, a0, cfg.beta)
    mu2 = mu_threshold(eps0, cfg.d2, a0, cfg.beta)
    p = (
        1.0
        - db / (db - da) * math.exp(-mu1 / rho) * laplace_asymptotic(mu1, lam, cfg.alpha1)
        + da / (db - da) * math.exp(-mu2 / rho) * laplace_asymptotic(mu2, lam, cfg.alpha1)
    )
    return OutageValue(_clamp_probability(p, "asymptotic far-user outage"), BRANCH_UNEQUAL)


def outage_noma_asymptotic(
    cfg: SystemConfig, user_k: int, n_nodes: int = DEFAULT_CHEBYSHEV_N
) -> OutageValue:
    """Near-user outage in the dense-roads limit; the same-road factors drop."""
    if user_k not in (1, 2):
        raise ValueError(f"user_k must be 1 or 2, got {user_k}")
    der = derive(cfg)
    if not der.comp_feasible or cfg.beta == 0.0:
        return OutageValue(p=1.0, branch=BRANCH_INFEASIBLE)
    eps0, eps_k = der.eps[0], der.eps[user_k]
    if eps0 == 0.0 and eps_k == 0.0:
        return OutageValue(p=0.0, branch=BRANCH_CASE_I)
    lam = cfg.lambda_l * cfg.lambda_b

    def laplace(s, cn, side):
        return laplace_asymptotic(s, lam, cfg.alpha1)

    total, branch = _noma_sum(cfg, eps0, eps_k, der.rho, n_nodes, laplace)
    p = 1.0 - math.pi / (4.0 * n_nodes) * total
    return OutageValue(_clamp_probability(p, "asymptotic near-user outage"), branch)
