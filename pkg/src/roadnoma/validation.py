"""Self-validation suites: cross-checks between independent computation routes.

Each suite returns a list of CheckResult rows; the CLI aggregates them into
a pass/fail report.  The closed-form implementations are injectable so a
deliberately broken variant can prove the harness actually bites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import analytic, montecarlo
from .config import SystemConfig
from .numerics import QuadratureSettings, gauss_2f1_neg, integrate_semi_infinite


@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str


def _result(suite, name, passed, detail):
    return CheckResult(suite=suite, name=name, passed=bool(passed), detail=detail)


def check_special_functions(
    seed: int = 0,
    n_grid: int = 100,
    laplace_intra_fn=analytic.laplace_intra,
    gauss_2f1_fn=gauss_2f1_neg,
) -> list:
    """Closed forms against direct quadrature.

    The same-road transform is compared with its defining integral on a
    random (s, d1, d2, alpha0) grid; the hypergeometric evaluator against
    the Euler integral representation and a logarithmic identity.
    """
    rng = np.random.default_rng(seed)
    rows = []

    value = gauss_2f1_fn(1.0, 1.0, 2.0, -1.0)
    rows.append(_result(
        "special-functions", "2F1(1,1;2;-1) = ln 2",
        abs(value - math.log(2.0)) < 1e-10, f"got {value!r}",
    ))

    worst = 0.0
    for _ in range(n_grid):
        alpha0 = rng.uniform(2.05, 5.0)
        d1 = rng.uniform(20.0, 400.0)
        d2 = rng.uniform(20.0, 400.0)
        s = 10.0 ** rng.uniform(0.0, 8.0)
        lam_b = 10.0 ** rng.uniform(-3.5, -2.0)
        closed = laplace_intra_fn(s, d1, d2, lam_b, alpha0)
        settings = QuadratureSettings(abs_tol=1e-13, rel_tol=1e-11, max_subdivisions=400)
        quad_exp = 0.0
        for d in (d1, d2):
            quad_exp += integrate_semi_infinite(
                lambda r: s / (s + (r + d) ** alpha0), settings
            ).value
        direct = math.exp(-lam_b * quad_exp)
        rel = abs(closed - direct) / direct
        worst = max(worst, rel)
    rows.append(_result(
        "special-functions",
        f"same-road transform vs quadrature on {n_grid}-point grid",
        worst < 1e-8, f"worst relative deviation {worst:.3e}",
    ))

    from .numerics import beta_fn

    b = beta_fn(0.5, 0.5)
    rows.append(_result(
        "special-functions", "B(1/2,1/2) = pi",
        abs(b - math.pi) < 1e-12 * math.pi, f"got {b!r}",
    ))
    return rows


def check_inter_transform(seed: int = 1, n_grid: int = 6) -> list:
    """Profile-accelerated other-roads transform against nested quadrature."""
    rng = np.random.default_rng(seed)
    rows = []
    worst = 0.0
    for _ in range(n_grid):
        alpha1 = rng.choice([3.0, 3.5, 4.0])
        s = 10.0 ** rng.uniform(2.0, 8.0)
        lam_l = 10.0 ** rng.uniform(-4.0, -3.0)
        lam_b = 10.0 ** rng.uniform(-3.0, -2.0)
        fast = analytic.laplace_inter(s, lam_l, lam_b, float(alpha1))
        direct = analytic.laplace_inter_direct(s, lam_l, lam_b, float(alpha1))
        worst = max(worst, abs(fast - direct) / direct)
    rows.append(_result(
        "inter-transform", f"cached profile vs nested quadrature ({n_grid} points)",
        worst < 1e-6, f"worst relative deviation {worst:.3e}",
    ))
    return rows


def check_lemma1(cfg: SystemConfig | None = None, seed: int = 2,
                 n_realizations: int = 30, n_draws: int = 20000) -> list:
    """Two-slot aggregate interference power equals P * zeta for any split."""
    cfg = cfg or SystemConfig(lambda_l=2e-3, lambda_b=1e-2)
    report = montecarlo.validate_lemma1(
        cfg, q_grid=(0.0, 0.25, 0.5, 1.0), n_realizations=n_realizations,
        seed=seed, n_draws=n_draws,
    )
    rows = []
    for q, z in report.per_q_z.items():
        rows.append(_result(
            "two-slot-power", f"pairing fraction {q}: measured vs P*zeta",
            abs(z) < 4.0, f"pooled z = {z:.2f}",
        ))
    for (qa, qb), z in report.cross_q_z.items():
        rows.append(_result(
            "two-slot-power", f"pairing fractions {qa} vs {qb}",
            abs(z) < 4.0, f"pooled z = {z:.2f}",
        ))
    return rows


def check_truncation(cfg: SystemConfig | None = None, seed: int = 3,
                     n_trials: int = 20000, workers: int = 1) -> list:
    """Outage stability under a growing sampling window."""
    cfg = cfg or SystemConfig()
    report = montecarlo.truncation_convergence(
        cfg, radii_grid=(500.0, 1000.0, 2000.0), n_trials=n_trials,
        seed=seed, workers=workers,
    )
    detail = ", ".join(f"r={r:g}: {est.p_hat:.5f}" for r, est in report.rows)
    return [_result("truncation", "window convergence", report.converged, detail)]


def check_chebyshev_stability(seed: int = 4) -> list:
    """Position-average stability: N = 64 vs N = 256 abscissas."""
    scenarios = [
        SystemConfig(rates=(0.5, 0.5, 0.5)),
        SystemConfig(rates=(2.0, 1.0, 1.0)),
        SystemConfig(rates=(1.0, 0.5, 0.5), beta=0.4, seg_radius=40.0),
    ]
    worst = 0.0
    for cfg in scenarios:
        p64 = analytic.outage_noma(cfg, 1, n_nodes=64).p
        p256 = analytic.outage_noma(cfg, 1, n_nodes=256).p
        worst = max(worst, abs(p64 - p256))
    return [_result(
        "chebyshev", "near-user outage at N=64 vs N=256",
        worst < 1e-4, f"worst absolute gap {worst:.2e}",
    )]


def run_all(seed: int = 0, n_trials: int = 20000, workers: int = 1,
            laplace_intra_fn=analytic.laplace_intra) -> list:
    rows = []
    rows += check_special_functions(seed=seed, laplace_intra_fn=laplace_intra_fn)
    rows += check_inter_transform(seed=seed + 1)
    rows += check_lemma1(seed=seed + 2)
    rows += check_truncation(seed=seed + 3, n_trials=n_trials, workers=workers)
    rows += check_chebyshev_stability(seed=seed + 4)
    return rows


def format_report(rows: list) -> str:
    lines = []
    n_failed = 0
    for row in rows:
        status = "PASS" if row.passed else "FAIL"
        if not row.passed:
            n_failed += 1
        lines.append(f"[{status}] {row.suite}: {row.name} ({row.detail})")
    lines.append(
        f"{len(rows) - n_failed}/{len(rows)} checks passed"
        + ("" if n_failed == 0 else f", {n_failed} FAILED")
    )
    return "\n".join(lines)
