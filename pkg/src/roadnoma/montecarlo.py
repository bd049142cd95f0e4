"""Monte Carlo outage and sum-rate estimation.

Each trial draws a fresh network realization, fading, and interference
power, then tests the SINR events.  Trials use independent random streams
derived from (seed, trial index), so estimates are reproducible and
independent of how trials are distributed over workers.  Per-trial
statistics are reduced to (own gain, far gain, zeta) triples per user,
which lets one sampling pass serve sweeps that only move thresholds
(target rates, power split).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig, DerivedParams, derive
from .geometry import (
    DEFAULT_TRUNCATION,
    Truncation,
    _draw_realization_arrays,
)
from .link import LinkGains, sinr_comp, sinr_noma_stage2, make_partition, two_slot_interference_power
from . import geometry

USERS = ("comp", "noma1", "noma2")
_CHUNK = 4096


@dataclass(frozen=True)
class OutageEstimate:
    p_hat: float
    n_trials: int
    stderr: float
    seed: int


@dataclass(frozen=True)
class SumRateEstimate:
    per_user: dict      # user -> R_k * (1 - p_hat_k), bps/Hz
    total: float
    scheme: str         # "nnoma" | "oma"


@dataclass
class SampleBank:
    """Reduced per-trial statistics for one user.

    own2/far2 are the squared serving-channel gains (left/right BS for the
    far user; own BS and far cooperating BS for near users); zeta is the
    normalized interference power at the user's position.
    """

    own2: np.ndarray
    far2: np.ndarray
    zeta: np.ndarray


def trial_generator(seed: int, index: int) -> np.random.Generator:
    """Counter-style independent stream for one trial."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, index))))


def _simulate_trial(cfg: SystemConfig, trunc: Truncation, rng, users) -> dict:
    """One trial's (own2, far2, zeta) per requested user.

    Replays exactly the draw order of geometry.sample_realization, then per
    user the gain order of link.compute_zeta (inter-road, same-road) plus
    the two serving fades.
    """
    arrays = _draw_realization_arrays(cfg, trunc, rng)
    counts = arrays["counts"]
    offsets = arrays["offsets"]
    n_lines = arrays["rho"].size
    if offsets.size:
        line_idx = np.repeat(np.arange(n_lines), counts)
        order = np.lexsort((offsets, line_idx))
        u = offsets[order]
        rho, theta = arrays["rho"], arrays["theta"]
        ct, st = np.cos(theta), np.sin(theta)
        px = np.repeat(rho * ct, counts) - u * np.repeat(st, counts)
        py = np.repeat(rho * st, counts) + u * np.repeat(ct, counts)
    else:
        px = py = np.empty(0)
    intra_pos = np.concatenate([-arrays["left_x"], arrays["right_x"]])

    sides = (geometry.TOWARD_ORIGIN, geometry.AWAY_FROM_ORIGIN)
    positions = {"comp": 0.0}
    serving = {"comp": (cfg.d1, cfg.d2)}
    r1, r2 = arrays["r1"], arrays["r2"]
    if sides[arrays["side1"]] == geometry.TOWARD_ORIGIN:
        positions["noma1"] = -cfg.d1 + r1
        serving["noma1"] = (r1, cfg.d1 + cfg.d2 - r1)
    else:
        positions["noma1"] = -cfg.d1 - r1
        serving["noma1"] = (r1, cfg.d1 + cfg.d2 + r1)
    if sides[arrays["side2"]] == geometry.TOWARD_ORIGIN:
        positions["noma2"] = cfg.d2 - r2
        serving["noma2"] = (r2, cfg.d1 + cfg.d2 - r2)
    else:
        positions["noma2"] = cfg.d2 + r2
        serving["noma2"] = (r2, cfg.d1 + cfg.d2 + r2)

    out = {}
    for user in users:
        xu = positions[user]
        g_inter = rng.standard_exponential(px.size)
        g_intra = rng.standard_exponential(intra_pos.size)
        e_own, e_far = rng.standard_exponential(2)
        if px.size:
            dx = px - xu
            dist2 = dx * dx + py * py
            zeta_inter = float(g_inter @ dist2 ** (-0.5 * cfg.alpha1))
        else:
            zeta_inter = 0.0
        if intra_pos.size:
            d_intra = np.abs(intra_pos - xu)
            zeta_intra = float(g_intra @ d_intra ** (-cfg.alpha0))
        else:
            zeta_intra = 0.0
        d_own, d_far = serving[user]
        own2 = e_own / d_own**cfg.alpha0 if d_own > 0.0 else math.inf
        far2 = e_far / d_far**cfg.alpha0
        out[user] = (own2, far2, zeta_intra + zeta_inter)
    return out


def _run_chunk(args):
    cfg, trunc, users, seed, start, stop = args
    n = stop - start
    data = {user: (np.empty(n), np.empty(n), np.empty(n)) for user in users}
    for i in range(n):
        rng = trial_generator(seed, start + i)
        row = _simulate_trial(cfg, trunc, rng, users)
        for user in users:
            own2, far2, zeta = row[user]
            data[user][0][i] = own2
            data[user][1][i] = far2
            data[user][2][i] = zeta
    return data


def collect_samples(
    cfg: SystemConfig,
    users=USERS,
    n_trials: int = 100000,
    seed: int = 0,
    trunc: Truncation | None = None,
    workers: int = 1,
) -> dict:
    """Sample (own2, far2, zeta) banks for the requested users.

    Identical output for any worker count: trial i always consumes the
    stream keyed (seed, i), and chunks are reassembled in index order.
    """
    if n_trials < 1:
        raise ValueError(f"n_trials must be at least 1, got {n_trials}")
    cfg.validate()
    users = tuple(users)
    for user in users:
        if user not in USERS:
            raise ValueError(f"unknown user {user!r}, expected subset of {USERS}")
    trunc = trunc or DEFAULT_TRUNCATION
    bounds = list(range(0, n_trials, _CHUNK)) + [n_trials]
    tasks = [
        (cfg, trunc, users, seed, start, stop)
        for start, stop in zip(bounds[:-1], bounds[1:])
    ]
    if workers <= 1 or len(tasks) == 1:
        parts = [_run_chunk(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, tasks))
    out = {}
    for user in users:
        own2 = np.concatenate([p[user][0] for p in parts])
        far2 = np.concatenate([p[user][1] for p in parts])
        zeta = np.concatenate([p[user][2] for p in parts])
        out[user] = SampleBank(own2=own2, far2=far2, zeta=zeta)
    return out


def outage_indicators(
    bank: SampleBank,
    user: str,
    der: DerivedParams,
    beta: float,
) -> np.ndarray:
    """Boolean outage indicator per trial.

    Far user: decoding SINR below its threshold.  Near user: fails unless
    it first decodes the far user's stream and then its own after
    cancellation.
    """
    lg = LinkGains(hl2=bank.own2, hr2=bank.far2)
    stage1 = sinr_comp(lg, beta, bank.zeta, der.rho)
    if user == "comp":
        return stage1 < der.eps[0]
    k = int(user[-1])
    stage2 = sinr_noma_stage2(bank.own2, bank.far2, beta, bank.zeta, der.rho)
    return ~((stage1 > der.eps[0]) & (stage2 > der.eps[k]))


def _estimate_from_indicators(ind: np.ndarray, seed: int) -> OutageEstimate:
    n = ind.size
    p = float(np.count_nonzero(ind)) / n
    return OutageEstimate(
        p_hat=p, n_trials=n, stderr=math.sqrt(p * (1.0 - p) / n), seed=seed
    )


def estimate_outage(
    cfg: SystemConfig,
    user: str,
    n_trials: int = 100000,
    seed: int = 0,
    trunc: Truncation | None = None,
    workers: int = 1,
) -> OutageEstimate:
    """Plain Monte Carlo outage estimate over fresh network realizations."""
    bank = collect_samples(cfg, (user,), n_trials, seed, trunc, workers)[user]
    der = derive(cfg)
    ind = outage_indicators(bank, user, der, cfg.beta)
    return _estimate_from_indicators(ind, seed)


def estimate_sum_rate(
    cfg: SystemConfig,
    scheme: str,
    n_trials: int = 100000,
    seed: int = 0,
    trunc: Truncation | None = None,
    workers: int = 1,
) -> SumRateEstimate:
    """Outage sum rate: sum of R_k (1 - p_hat_k) over the served users.

    The baseline scheme serves only the far user with the full power
    budget, i.e. the same outage event evaluated at beta = 0.
    """
    der = derive(cfg)
    if scheme == "nnoma":
        banks = collect_samples(cfg, USERS, n_trials, seed, trunc, workers)
        per_user = {}
        for k, user in enumerate(USERS):
            ind = outage_indicators(banks[user], user, der, cfg.beta)
            per_user[user] = cfg.rates[k] * (1.0 - _estimate_from_indicators(ind, seed).p_hat)
    elif scheme == "oma":
        bank = collect_samples(cfg, ("comp",), n_trials, seed, trunc, workers)["comp"]
        ind = outage_indicators(bank, "comp", der, beta=0.0)
        per_user = {"comp": cfg.rates[0] * (1.0 - _estimate_from_indicators(ind, seed).p_hat)}
    else:
        raise ValueError(f"scheme must be 'nnoma' or 'oma', got {scheme!r}")
    return SumRateEstimate(per_user=per_user, total=sum(per_user.values()), scheme=scheme)


# -- validation statistics -----------------------------------------------------

@dataclass
class Lemma1Row:
    pairing_fraction: float
    realization: int
    n_interferers: int
    measured: float
    reference: float
    stderr: float


@dataclass
class Lemma1Report:
    rows: list
    per_q_z: dict        # pairing fraction -> pooled z-score vs reference
    cross_q_z: dict      # (q_a, q_b) -> pooled z-score of the difference

    def max_abs_z(self) -> float:
        zs = list(self.per_q_z.values()) + list(self.cross_q_z.values())
        return max(abs(z) for z in zs) if zs else 0.0


def validate_lemma1(
    cfg: SystemConfig,
    q_grid=(0.0, 0.25, 0.5, 1.0),
    n_realizations: int = 50,
    seed: int = 0,
    trunc: Truncation | None = None,
    n_draws: int = 20000,
    user: str = "comp",
) -> Lemma1Report:
    """Two-slot measured interference power against P * zeta.

    Realizations and fading are shared across pairing fractions (the
    signal stream is re-seeded per realization), so cross-q comparisons
    cancel the fading variability.
    """
    trunc = trunc or Truncation(r_max=500.0, half_length=500.0, typical_half_length=2000.0)
    rows = []
    for i in range(n_realizations):
        real = geometry.sample_realization(cfg, trunc, trial_generator(seed, 2 * i))
        n = sum(ln.offsets.size for ln in real.other_lines)
        n += real.typical.left_interferers.size + real.typical.right_interferers.size
        for q in q_grid:
            partition = make_partition(n, q)
            check = two_slot_interference_power(
                cfg, real, user, partition, trial_generator(seed, 2 * i + 1), n_draws
            )
            rows.append(Lemma1Row(
                pairing_fraction=q, realization=i, n_interferers=n,
                measured=check.measured, reference=check.reference, stderr=check.stderr,
            ))

    per_q_z = {}
    for q in q_grid:
        sub = [r for r in rows if r.pairing_fraction == q]
        var = sum(r.stderr**2 for r in sub)
        diff = sum(r.measured - r.reference for r in sub)
        per_q_z[q] = diff / math.sqrt(var) if var > 0.0 else 0.0
    cross_q_z = {}
    for a in range(len(q_grid)):
        for b in range(a + 1, len(q_grid)):
            qa, qb = q_grid[a], q_grid[b]
            sub_a = [r for r in rows if r.pairing_fraction == qa]
            sub_b = [r for r in rows if r.pairing_fraction == qb]
            diff = sum(x.measured - y.measured for x, y in zip(sub_a, sub_b))
            var = sum(x.stderr**2 + y.stderr**2 for x, y in zip(sub_a, sub_b))
            cross_q_z[(qa, qb)] = diff / math.sqrt(var) if var > 0.0 else 0.0
    return Lemma1Report(rows=rows, per_q_z=per_q_z, cross_q_z=cross_q_z)


@dataclass
class TruncationReport:
    rows: list           # (r_max, OutageEstimate)
    converged: bool      # last two radii agree within 2 combined stderr


def truncation_convergence(
    cfg: SystemConfig,
    radii_grid=(500.0, 1000.0, 2000.0),
    n_trials: int = 20000,
    seed: int = 0,
    user: str = "comp",
    workers: int = 1,
) -> TruncationReport:
    """Outage estimates at growing sampling windows.

    The same seed runs every radius (common random numbers); only the
    interfering-roads window moves, the tagged road keeps its long window.
    """
    rows = []
    for r in radii_grid:
        trunc = Truncation(
            r_max=r,
            half_length=r,
            typical_half_length=DEFAULT_TRUNCATION.typical_half_length,
        )
        rows.append((r, estimate_outage(cfg, user, n_trials, seed, trunc, workers)))
    last, prev = rows[-1][1], rows[-2][1]
    combined = math.sqrt(last.stderr**2 + prev.stderr**2)
    converged = abs(last.p_hat - prev.p_hat) <= 2.0 * combined if combined > 0.0 else True
    return TruncationReport(rows=rows, converged=converged)
