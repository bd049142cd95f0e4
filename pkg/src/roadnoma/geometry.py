"""Sampling of the road network and node layout for one realization.

Roads are lines parameterized by (rho, theta): perpendicular foot at
distance rho from the origin, angle theta.  BSs fall on each road as
independent 1D Poisson processes.  The tagged line lies on the x-axis with
the far user at the origin, its two serving BSs at -d1 and +d2, and
same-line interferers beyond the serving distances on either side.

All samplers take an explicit numpy Generator and are deterministic given
its state; callers own parallelism.  `_draw_realization_arrays` is the
single source of truth for the draw order, shared with the Monte Carlo
engine so both consume identical random streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig

TOWARD_ORIGIN = "toward_origin"
AWAY_FROM_ORIGIN = "away_from_origin"


@dataclass(frozen=True)
class Line:
    """A road: x cos(theta) + y sin(theta) = rho, with rho >= 0."""

    rho: float
    theta: float

    def __post_init__(self):
        if self.rho < 0.0:
            raise ValueError(f"rho must be non-negative, got {self.rho}")
        if not 0.0 <= self.theta < 2.0 * math.pi:
            raise ValueError(f"theta must lie in [0, 2pi), got {self.theta}")


@dataclass
class LineNodes:
    """Nodes on one road as signed offsets from the foot of the perpendicular."""

    line: Line
    offsets: np.ndarray  # sorted ascending, m

    def positions(self) -> np.ndarray:
        """(n, 2) Cartesian node coordinates."""
        ct, st = math.cos(self.line.theta), math.sin(self.line.theta)
        x = self.line.rho * ct - self.offsets * st
        y = self.line.rho * st + self.offsets * ct
        return np.column_stack([x, y])

    def origin_distances(self) -> np.ndarray:
        return np.hypot(self.line.rho, self.offsets)


@dataclass(frozen=True)
class NomaUser:
    r: float        # distance to its serving BS, in [0, seg_radius]
    side: str       # TOWARD_ORIGIN or AWAY_FROM_ORIGIN


@dataclass
class TypicalLineLayout:
    """Geometry on the tagged road, all distances measured from the origin."""

    serving_left: float                 # d1
    serving_right: float                # d2
    left_interferers: np.ndarray        # origin distances > d1, ascending
    right_interferers: np.ndarray       # origin distances > d2, ascending
    noma_user_1: NomaUser
    noma_user_2: NomaUser


@dataclass(frozen=True)
class Truncation:
    """Sampling window. r_max bounds line distances, half_length bounds
    node offsets on interfering roads.  The tagged road keeps a much longer
    window: its interference tail decays only like r^(1-alpha0), so cutting
    it at 2 km would bias high-threshold outage estimates above Monte Carlo
    noise at 1e5 trials."""

    r_max: float = 2000.0
    half_length: float = 2000.0
    typical_half_length: float = 20000.0


DEFAULT_TRUNCATION = Truncation()


@dataclass
class NetworkRealization:
    other_lines: list          # list[LineNodes], interfering roads
    typical: TypicalLineLayout
    trunc: Truncation


def sample_plp(lambda_l: float, r_max: float, rng: np.random.Generator) -> list:
    """Lines within distance r_max of the origin.

    Count is Poisson(lambda_l * r_max * 2pi); each line draws
    rho ~ U(0, r_max) and theta ~ U[0, 2pi).
    """
    if lambda_l < 0.0 or r_max <= 0.0:
        raise ValueError("need lambda_l >= 0 and r_max > 0")
    n = rng.poisson(lambda_l * r_max * 2.0 * np.pi)
    rho = rng.uniform(0.0, r_max, n)
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    return [Line(rho=float(r), theta=float(t)) for r, t in zip(rho, theta)]


def sample_line_nodes(
    line: Line, lambda_b: float, half_length: float, rng: np.random.Generator
) -> LineNodes:
    """1D Poisson nodes on a line, offsets uniform on (-half_length, half_length)."""
    if half_length <= 0.0:
        raise ValueError("half_length must be positive")
    n = rng.poisson(lambda_b * 2.0 * half_length)
    offsets = np.sort(rng.uniform(-half_length, half_length, n))
    return LineNodes(line=line, offsets=offsets)


def sample_typical_layout(
    cfg: SystemConfig, half_length: float, rng: np.random.Generator
) -> TypicalLineLayout:
    """Serving BSs at d1/d2 plus interferers beyond them on each side."""
    arrays = _draw_typical_arrays(cfg, half_length, rng)
    return _typical_from_arrays(cfg, arrays)


def sample_realization(
    cfg: SystemConfig, trunc: Truncation, rng: np.random.Generator
) -> NetworkRealization:
    """One full network realization; deterministic given the generator state."""
    arrays = _draw_realization_arrays(cfg, trunc, rng)
    other_lines = []
    split_points = np.cumsum(arrays["counts"])[:-1]
    per_line = np.split(arrays["offsets"], split_points)
    for rho, theta, offs in zip(arrays["rho"], arrays["theta"], per_line):
        other_lines.append(
            LineNodes(line=Line(rho=float(rho), theta=float(theta)), offsets=np.sort(offs))
        )
    typical = _typical_from_arrays(cfg, arrays)
    return NetworkRealization(other_lines=other_lines, typical=typical, trunc=trunc)


def noma_user_position(layout: TypicalLineLayout, user: int) -> float:
    """Signed x-coordinate of NOMA user 1 or 2 on the tagged road."""
    if user == 1:
        u = layout.noma_user_1
        bs = -layout.serving_left
        return bs + u.r if u.side == TOWARD_ORIGIN else bs - u.r
    if user == 2:
        u = layout.noma_user_2
        bs = layout.serving_right
        return bs - u.r if u.side == TOWARD_ORIGIN else bs + u.r
    raise ValueError(f"user must be 1 or 2, got {user}")


# -- shared draw order --------------------------------------------------------
#
# The Monte Carlo engine replays these draws without building objects; both
# paths must consume the generator identically, so any change here is a
# breaking change there.

def _draw_typical_arrays(cfg: SystemConfig, half_length: float, rng) -> dict:
    out = {}
    n_left = rng.poisson(cfg.lambda_b * max(half_length - cfg.d1, 0.0))
    out["left_x"] = np.sort(rng.uniform(cfg.d1, half_length, n_left))
    n_right = rng.poisson(cfg.lambda_b * max(half_length - cfg.d2, 0.0))
    out["right_x"] = np.sort(rng.uniform(cfg.d2, half_length, n_right))
    out["r1"] = rng.uniform(0.0, cfg.seg_radius)
    out["side1"] = int(rng.integers(0, 2))
    out["r2"] = rng.uniform(0.0, cfg.seg_radius)
    out["side2"] = int(rng.integers(0, 2))
    return out


def _draw_realization_arrays(cfg: SystemConfig, trunc: Truncation, rng) -> dict:
    n_lines = rng.poisson(cfg.lambda_l * trunc.r_max * 2.0 * np.pi)
    rho = rng.uniform(0.0, trunc.r_max, n_lines)
    theta = rng.uniform(0.0, 2.0 * np.pi, n_lines)
    counts = rng.poisson(cfg.lambda_b * 2.0 * trunc.half_length, n_lines)
    offsets = rng.uniform(-trunc.half_length, trunc.half_length, int(counts.sum()))
    arrays = {"rho": rho, "theta": theta, "counts": counts, "offsets": offsets}
    arrays.update(_draw_typical_arrays(cfg, trunc.typical_half_length, rng))
    return arrays


def _typical_from_arrays(cfg: SystemConfig, arrays: dict) -> TypicalLineLayout:
    sides = (TOWARD_ORIGIN, AWAY_FROM_ORIGIN)
    return TypicalLineLayout(
        serving_left=cfg.d1,
        serving_right=cfg.d2,
        left_interferers=arrays["left_x"],
        right_interferers=arrays["right_x"],
        noma_user_1=NomaUser(r=float(arrays["r1"]), side=sides[arrays["side1"]]),
        noma_user_2=NomaUser(r=float(arrays["r2"]), side=sides[arrays["side2"]]),
    )


# -- snapshot support ---------------------------------------------------------

def sample_users(
    cfg: SystemConfig, realization: NetworkRealization, rng: np.random.Generator
) -> list:
    """Vehicle users on every road, for network snapshots only."""
    users = []
    for ln in realization.other_lines:
        users.append(
            sample_line_nodes(ln.line, cfg.lambda_u, realization.trunc.half_length, rng)
        )
    x_axis = Line(rho=0.0, theta=0.5 * math.pi)  # the tagged road
    users.append(
        sample_line_nodes(x_axis, cfg.lambda_u, realization.trunc.typical_half_length, rng)
    )
    return users


def realization_rows(
    cfg: SystemConfig, realization: NetworkRealization, users: list | None = None
) -> list:
    """Rows (kind, rho, theta, offset, x, y) for the snapshot CSV."""
    rows = []
    for ln in realization.other_lines:
        rows.append(("line", ln.line.rho, ln.line.theta, math.nan, math.nan, math.nan))
        for off, (x, y) in zip(ln.offsets, ln.positions()):
            rows.append(("bs", ln.line.rho, ln.line.theta, off, x, y))
    lay = realization.typical
    rows.append(("line", 0.0, 0.5 * math.pi, math.nan, math.nan, math.nan))
    for x in np.concatenate([[-lay.serving_left, lay.serving_right],
                             -lay.left_interferers, lay.right_interferers]):
        rows.append(("bs", 0.0, 0.5 * math.pi, x, x, 0.0))
    rows.append(("user", 0.0, 0.5 * math.pi, 0.0, 0.0, 0.0))
    for k in (1, 2):
        x = noma_user_position(lay, k)
        rows.append(("user", 0.0, 0.5 * math.pi, x, x, 0.0))
    if users is not None:
        for ln in users:
            for off, (x, y) in zip(ln.offsets, ln.positions()):
                rows.append(("user", ln.line.rho, ln.line.theta, off, x, y))
    return rows
