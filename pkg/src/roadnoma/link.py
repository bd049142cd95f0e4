"""Channel gains, SINRs, and the two-slot signal-level interference check.

Interference enters the SINRs only through the normalized power sums
zeta = sum |g|^2 / dist^alpha; the full two-slot construction exists to
verify that cooperating interferer pairs aggregate to exactly that power
under the space-time detection, for any way of splitting interferers into
independent transmitters and cooperating pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig, derive
from .geometry import NetworkRealization, noma_user_position

USERS = ("comp", "noma1", "noma2")


@dataclass
class LinkGains:
    """Squared serving-channel gains |h|^2 of the two cooperating BSs."""

    hl2: float
    hr2: float

    @property
    def c2(self) -> float:
        return self.hl2 + self.hr2


@dataclass
class InterferenceSample:
    """Normalized interference powers for one realization and one user."""

    zeta_intra: float   # same-road interferers, 1/m^alpha0
    zeta_inter: float   # other roads, 1/m^alpha1

    @property
    def zeta(self) -> float:
        return self.zeta_intra + self.zeta_inter


def user_x_position(real: NetworkRealization, user: str) -> float:
    if user == "comp":
        return 0.0
    if user in ("noma1", "noma2"):
        return noma_user_position(real.typical, int(user[-1]))
    raise ValueError(f"unknown user {user!r}, expected one of {USERS}")


def _interferer_distances(real: NetworkRealization, user: str):
    """(intra distances, inter distances) from the user's position.

    Intra covers the tagged road's interferers (both serving BSs excluded);
    inter covers every node on other roads, with no exclusion zone.
    """
    xu = user_x_position(real, user)
    lay = real.typical
    d_intra = np.concatenate([
        np.abs(-lay.left_interferers - xu),
        np.abs(lay.right_interferers - xu),
    ])
    chunks = []
    for ln in real.other_lines:
        pos = ln.positions()
        chunks.append(np.hypot(pos[:, 0] - xu, pos[:, 1]))
    d_inter = np.concatenate(chunks) if chunks else np.empty(0)
    return d_intra, d_inter


def compute_zeta(
    cfg: SystemConfig,
    real: NetworkRealization,
    user: str,
    rng: np.random.Generator,
) -> InterferenceSample:
    """Draw |g|^2 ~ Exp(1) per interferer and accumulate |g|^2 / dist^alpha.

    Distances are measured from the named user's position (far user at the
    origin, near users at their sampled offsets).  Inter-road gains are
    drawn first (road order, node order within road), then same-road gains
    (left side, then right); the Monte Carlo engine replays the same order.
    """
    d_intra, d_inter = _interferer_distances(real, user)
    g_inter = rng.standard_exponential(d_inter.size)
    g_intra = rng.standard_exponential(d_intra.size)
    zeta_inter = float(g_inter @ d_inter ** -cfg.alpha1) if d_inter.size else 0.0
    zeta_intra = float(g_intra @ d_intra ** -cfg.alpha0) if d_intra.size else 0.0
    return InterferenceSample(zeta_intra=zeta_intra, zeta_inter=zeta_inter)


def sinr_comp(lg: LinkGains, beta: float, zeta, rho: float):
    """Far-user SINR: both near-user signals act as noise."""
    c2 = lg.c2
    return c2 * (1.0 - beta) / (c2 * beta + zeta + 1.0 / rho)


def sinr_noma_stage1(lg: LinkGains, beta: float, zeta, rho: float):
    """Near user decoding the far user's signal before cancellation."""
    return sinr_comp(lg, beta, zeta, rho)


def sinr_noma_stage2(own2, other2, beta: float, zeta, rho: float):
    """Near user decoding its own signal after cancelling the far user's.

    own2 is the squared gain to the serving BS, other2 to the far
    cooperating BS whose near-user signal remains as interference.
    """
    return own2 * beta / (other2 * beta + zeta + 1.0 / rho)


# -- detection / space-time combining -----------------------------------------

def detection_coefficients(hl: complex, hr: complex) -> np.ndarray:
    """Rows (theta_p1, theta_p2) of the conjugate-transposed detection matrix.

    Row p recovers slot-p's far-user symbol from [r(1), r*(2)]; rows have
    unit norm, so combined noise keeps its variance.
    """
    c = math.sqrt(abs(hl) ** 2 + abs(hr) ** 2)
    if c == 0.0:
        raise ZeroDivisionError("degenerate serving channel: |hL|^2 + |hR|^2 = 0")
    return np.array(
        [
            [np.conj(hl) / c, hr / c],
            [np.conj(hr) / c, -hl / c],
        ]
    )


def alamouti_decode(received, serving):
    """Combine a two-slot observation pair into two parallel symbol estimates.

    received: (r1, r2) scalars or arrays; serving: (hl, hr) complex gains.
    Returns (y1, y2) with y_p = theta_p1 * r1 + theta_p2 * conj(r2).
    """
    r1, r2 = received
    theta = detection_coefficients(*serving)
    r2c = np.conj(r2)
    y1 = theta[0, 0] * r1 + theta[0, 1] * r2c
    y2 = theta[1, 0] * r1 + theta[1, 1] * r2c
    return y1, y2


# -- cooperation partition -----------------------------------------------------

@dataclass
class CooperationPartition:
    """Split of the interferers into independent singles and cooperating pairs.

    pairing_fraction records the requested share of paired transmitters; the
    measured interference power is provably independent of the split, which
    the invariance tests exploit.
    """

    pairing_fraction: float
    singles: list   # interferer indices transmitting independently
    pairs: list     # (i, j) index pairs cooperating

    def covered_indices(self) -> set:
        out = set(self.singles)
        for i, j in self.pairs:
            out.update((i, j))
        return out


def make_partition(n_interferers: int, pairing_fraction: float) -> CooperationPartition:
    """Pair adjacent indices until the requested fraction is covered."""
    if not 0.0 <= pairing_fraction <= 1.0:
        raise ValueError(f"pairing_fraction must lie in [0, 1], got {pairing_fraction}")
    n_paired = int(round(pairing_fraction * n_interferers))
    n_paired -= n_paired % 2
    pairs = [(i, i + 1) for i in range(0, n_paired, 2)]
    singles = list(range(n_paired, n_interferers))
    return CooperationPartition(
        pairing_fraction=pairing_fraction, singles=singles, pairs=pairs
    )


@dataclass
class TwoSlotPowerCheck:
    measured: float      # mean of |I~_{k,p}|^2 over symbol draws, averaged over p
    reference: float     # P * zeta_k from the same fading draws
    stderr: float
    n_draws: int


def _complex_gaussian(rng, size, variance=1.0):
    scale = math.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def _pair_signals(rng, n_draws, p_mw, beta):
    """Two-slot signals of one cooperating pair (u, v).

    Each BS superposes its own near-user signal (power beta*P) on the shared
    far-user stream (power (1-beta)*P), with the second slot carrying the
    conjugated/negated far-user symbols.
    """
    zu_own = _complex_gaussian(rng, (2, n_draws), beta * p_mw)
    zv_own = _complex_gaussian(rng, (2, n_draws), beta * p_mw)
    w = _complex_gaussian(rng, (2, n_draws), (1.0 - beta) * p_mw)
    zu = np.array([zu_own[0] + w[0], zu_own[1] - np.conj(w[1])])
    zv = np.array([zv_own[0] + w[1], zv_own[1] + np.conj(w[0])])
    return zu, zv


def two_slot_interference_power(
    cfg: SystemConfig,
    real: NetworkRealization,
    user: str,
    partition: CooperationPartition,
    rng: np.random.Generator,
    n_draws: int = 20000,
) -> TwoSlotPowerCheck:
    """Measure E|I~_{k,p}|^2 by simulating the two-slot transmissions.

    Fading (interferer channels and the user's serving channels) is drawn
    once and held fixed; only symbols are redrawn.  Returns the measurement
    alongside P * zeta_k computed from the same fading draws.
    """
    der = derive(cfg)
    d_intra, d_inter = _interferer_distances(real, user)
    dist = np.concatenate([d_intra, d_inter])
    alpha = np.concatenate([
        np.full(d_intra.size, cfg.alpha0),
        np.full(d_inter.size, cfg.alpha1),
    ])
    n = dist.size
    if partition.covered_indices() != set(range(n)):
        raise ValueError(
            f"partition covers {len(partition.covered_indices())} interferers, "
            f"realization has {n}"
        )

    h = _complex_gaussian(rng, n) / np.sqrt(dist**alpha)
    reference = der.p_tx_mw * float(np.sum(np.abs(h) ** 2))

    # serving channels fix the detection rows
    hl = _complex_gaussian(rng, ()) / math.sqrt(_serving_distances(real, user)[0] ** cfg.alpha0)
    hr = _complex_gaussian(rng, ()) / math.sqrt(_serving_distances(real, user)[1] ** cfg.alpha0)
    theta = detection_coefficients(complex(hl), complex(hr))

    if n == 0:
        return TwoSlotPowerCheck(measured=0.0, reference=0.0, stderr=0.0, n_draws=n_draws)

    i1 = np.zeros(n_draws, dtype=complex)
    i2 = np.zeros(n_draws, dtype=complex)
    if partition.singles:
        idx = np.asarray(partition.singles)
        z = _complex_gaussian(rng, (2, idx.size, n_draws), der.p_tx_mw)
        i1 += h[idx] @ z[0]
        i2 += h[idx] @ z[1]
    for i, j in partition.pairs:
        zu, zv = _pair_signals(rng, n_draws, der.p_tx_mw, cfg.beta)
        i1 += h[i] * zu[0] + h[j] * zv[0]
        i2 += h[i] * zu[1] + h[j] * zv[1]

    combined = np.stack([
        theta[0, 0] * i1 + theta[0, 1] * np.conj(i2),
        theta[1, 0] * i1 + theta[1, 1] * np.conj(i2),
    ])
    w = 0.5 * (np.abs(combined[0]) ** 2 + np.abs(combined[1]) ** 2)
    measured = float(np.mean(w))
    stderr = float(np.std(w, ddof=1) / math.sqrt(n_draws))
    return TwoSlotPowerCheck(measured=measured, reference=reference,
                             stderr=stderr, n_draws=n_draws)


def _serving_distances(real: NetworkRealization, user: str):
    """Distances to the left and right cooperating BS from the user."""
    lay = real.typical
    xu = user_x_position(real, user)
    return abs(-lay.serving_left - xu), abs(lay.serving_right - xu)
