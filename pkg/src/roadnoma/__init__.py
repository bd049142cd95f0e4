"""Outage analysis of two-BS cooperative NOMA on Poisson-line-Cox road networks.

Closed-form outage probabilities (interference Laplace transforms, far- and
near-user theorems, dense-roads asymptotics) next to a reproducible Monte
Carlo engine that cross-validates them.
"""

from .config import ConfigError, DerivedParams, SystemConfig, derive, load_config, with_overrides
from .analytic import (
    LaplaceSpec,
    OutageValue,
    laplace_asymptotic,
    laplace_inter,
    laplace_intra,
    laplace_noma,
    laplace_total,
    outage_comp,
    outage_comp_asymptotic,
    outage_noma,
    outage_noma_asymptotic,
)
from .montecarlo import (
    OutageEstimate,
    SumRateEstimate,
    estimate_outage,
    estimate_sum_rate,
    truncation_convergence,
    validate_lemma1,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DerivedParams",
    "LaplaceSpec",
    "OutageEstimate",
    "OutageValue",
    "SumRateEstimate",
    "SystemConfig",
    "derive",
    "estimate_outage",
    "estimate_sum_rate",
    "laplace_asymptotic",
    "laplace_inter",
    "laplace_intra",
    "laplace_noma",
    "laplace_total",
    "load_config",
    "outage_comp",
    "outage_comp_asymptotic",
    "outage_noma",
    "outage_noma_asymptotic",
    "truncation_convergence",
    "validate_lemma1",
    "with_overrides",
]
