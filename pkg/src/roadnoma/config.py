"""Scenario parameters and derived quantities.

All internal math runs in linear units (mW, meters); dBm appears only at
this boundary.  The carrier frequency is recorded for bookkeeping but never
enters the pure power-law channel model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace


class ConfigError(ValueError):
    """A scenario parameter violates one of its invariants."""


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


def mw_to_dbm(mw: float) -> float:
    if mw <= 0.0:
        raise ValueError("power must be positive to express in dBm")
    return 10.0 * math.log10(mw)


@dataclass(frozen=True)
class SystemConfig:
    """One network scenario.  Densities/distances in SI, powers in dBm."""

    lambda_l: float = 5e-4       # line intensity on R+ x [0, 2pi), nodes/m^2
    lambda_b: float = 5e-3       # BS intensity per line, nodes/m
    lambda_u: float = 1e-2       # user intensity per line, nodes/m (snapshots only)
    p_tx_dbm: float = 30.0       # BS transmit power
    noise_psd_dbm_hz: float = -170.0
    bandwidth_hz: float = 1e7
    carrier_hz: float = 2e9      # recorded, unused (no frequency term in the path loss)
    beta: float = 0.2            # power allocation coefficient, share of the near users
    alpha0: float = 3.0          # same-road path-loss exponent, > 1
    alpha1: float = 4.0          # cross-road path-loss exponent, > 2
    d1: float = 100.0            # origin -> left serving BS, m
    d2: float = 100.0            # origin -> right serving BS, m
    exclusion_d: float = 50.0    # minimum serving distance for the far user, m
    seg_radius: float = 20.0     # near-user segment half-length, m
    rates: tuple = (1.0, 0.5, 0.5)  # target rates (R0, R1, R2), bps/Hz

    def validate(self) -> None:
        """Raise ConfigError naming the first violated invariant."""
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError(f"beta must lie in [0, 1], got {self.beta}")
        if not self.alpha0 > 1.0:
            raise ConfigError(f"alpha0 must exceed 1, got {self.alpha0}")
        if not self.alpha1 > 2.0:
            raise ConfigError(f"alpha1 must exceed 2, got {self.alpha1}")
        for name in ("lambda_l", "lambda_b", "lambda_u"):
            if getattr(self, name) < 0.0:
                raise ConfigError(f"{name} must be non-negative, got {getattr(self, name)}")
        for name in ("bandwidth_hz", "d1", "d2", "exclusion_d"):
            if not getattr(self, name) > 0.0:
                raise ConfigError(f"{name} must be strictly positive, got {getattr(self, name)}")
        if self.seg_radius < 0.0:
            raise ConfigError(f"seg_radius must be non-negative, got {self.seg_radius}")
        if self.d1 < self.exclusion_d or self.d2 < self.exclusion_d:
            raise ConfigError(
                f"serving distances d1={self.d1}, d2={self.d2} must be at least "
                f"exclusion_d={self.exclusion_d}"
            )
        if not self.seg_radius < 0.5 * (self.d1 + self.d2):
            raise ConfigError(
                f"seg_radius={self.seg_radius} must be below (d1+d2)/2="
                f"{0.5 * (self.d1 + self.d2)} so the near user stays nearer its own BS"
            )
        if len(self.rates) != 3:
            raise ConfigError(f"rates must hold exactly (R0, R1, R2), got {self.rates}")
        for k, r in enumerate(self.rates):
            if r < 0.0:
                raise ConfigError(f"rates[{k}] must be non-negative, got {r}")


@dataclass(frozen=True)
class DerivedParams:
    """Linear-unit quantities the outage formulas consume."""

    sigma2_mw: float       # noise power = PSD * bandwidth
    p_tx_mw: float
    rho: float             # transmit SNR = p_tx_mw / sigma2_mw
    eps: tuple             # decoding thresholds 2^Rk - 1 for k = 0, 1, 2
    comp_feasible: bool    # whether 1 - beta - eps0*beta > 0


def derive(cfg: SystemConfig) -> DerivedParams:
    """Compute derived parameters; pure function of the config."""
    cfg.validate()
    sigma2_mw = dbm_to_mw(cfg.noise_psd_dbm_hz) * cfg.bandwidth_hz
    p_tx_mw = dbm_to_mw(cfg.p_tx_dbm)
    eps = tuple(2.0 ** r - 1.0 for r in cfg.rates)
    return DerivedParams(
        sigma2_mw=sigma2_mw,
        p_tx_mw=p_tx_mw,
        rho=p_tx_mw / sigma2_mw,
        eps=eps,
        comp_feasible=(1.0 - cfg.beta - eps[0] * cfg.beta) > 0.0,
    )


# -- flat key-value config files ------------------------------------------
#
# One `key = value` pair per line, `#` comments, keys equal to the
# SystemConfig field names.  `rates` takes three comma-separated values.

_FLOAT_FIELDS = [f.name for f in fields(SystemConfig) if f.name != "rates"]


def _parse_rates(text: str) -> tuple:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 3:
        raise ConfigError(f"rates needs three values (R0, R1, R2), got {text!r}")
    return tuple(float(p) for p in parts)


def parse_config_text(text: str) -> dict:
    """Parse flat key-value text into a field dict (values still strings -> floats)."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key == "rates":
            out[key] = _parse_rates(value)
        elif key in _FLOAT_FIELDS:
            try:
                out[key] = float(value)
            except ValueError as exc:
                raise ConfigError(f"field {key}: not a number: {value!r}") from exc
        else:
            raise ConfigError(f"unknown config field: {key}")
    return out


def load_config(path) -> SystemConfig:
    """Load a complete config file; every field must be present."""
    with open(path, "r", encoding="utf-8") as fh:
        values = parse_config_text(fh.read())
    missing = [f.name for f in fields(SystemConfig) if f.name not in values]
    if missing:
        raise ConfigError(f"missing required field: {missing[0]}")
    cfg = SystemConfig(**values)
    cfg.validate()
    return cfg


def config_to_text(cfg: SystemConfig) -> str:
    lines = []
    for f in fields(SystemConfig):
        value = getattr(cfg, f.name)
        if f.name == "rates":
            value = ", ".join(repr(v) for v in value)
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


def with_overrides(cfg: SystemConfig, **overrides) -> SystemConfig:
    """Copy the config with the given fields replaced, revalidating."""
    new = replace(cfg, **overrides)
    new.validate()
    return new
