import math

import numpy as np
import pytest

from roadnoma import geometry, link, montecarlo
from roadnoma.config import SystemConfig, derive, with_overrides
from roadnoma.geometry import Truncation, sample_realization
from roadnoma.montecarlo import (
    collect_samples,
    estimate_outage,
    estimate_sum_rate,
    outage_indicators,
    trial_generator,
    truncation_convergence,
    validate_lemma1,
)


class TestEngineConsistency:
    def test_trial_replays_api_sampler_streams(self, base_cfg):
        """The engine and the object-level sampler consume identical streams:
        same geometry, and the same zeta once gains come from a shared stream."""
        trunc = Truncation(800.0, 800.0, 3000.0)
        for trial in range(5):
            rng_api = trial_generator(404, trial)
            real = sample_realization(base_cfg, trunc, rng_api)
            stats_api = {}
            for user in montecarlo.USERS:
                gains = trial_generator(505, trial)
                stats_api[user] = link.compute_zeta(base_cfg, real, user, gains).zeta

            spliced = _SplicedRng(
                trial_generator(404, trial),
                [trial_generator(505, trial) for _ in montecarlo.USERS],
            )
            row = montecarlo._simulate_trial(base_cfg, trunc, spliced, montecarlo.USERS)
            for user in montecarlo.USERS:
                assert row[user][2] == pytest.approx(stats_api[user], rel=1e-12)

    def test_indicator_matches_scalar_sinrs(self, base_cfg):
        der = derive(base_cfg)
        bank = collect_samples(base_cfg, ("noma1",), 200, seed=1)["noma1"]
        ind = outage_indicators(bank, "noma1", der, base_cfg.beta)
        for i in range(bank.zeta.size):
            lg = link.LinkGains(float(bank.own2[i]), float(bank.far2[i]))
            s1 = link.sinr_noma_stage1(lg, base_cfg.beta, float(bank.zeta[i]), der.rho)
            s2 = link.sinr_noma_stage2(float(bank.own2[i]), float(bank.far2[i]),
                                       base_cfg.beta, float(bank.zeta[i]), der.rho)
            assert ind[i] == (not (s1 > der.eps[0] and s2 > der.eps[1]))


class _SplicedRng:
    """Geometry draws from one stream, per-user gain draws from others.

    The engine draws geometry first (uniform/poisson only), then per user
    exponentials only; splitting on the method tells them apart.
    """

    def __init__(self, geometry_rng, gain_rngs):
        self._geo = geometry_rng
        self._gains = gain_rngs
        self._counts = 0

    def poisson(self, lam, size=None):
        return self._geo.poisson(lam, size)

    def uniform(self, lo=0.0, hi=1.0, size=None):
        return self._geo.uniform(lo, hi, size)

    def integers(self, lo, hi):
        return self._geo.integers(lo, hi)

    def standard_exponential(self, size=None):
        idx = min(self._counts // 3, len(self._gains) - 1)
        out = self._gains[idx].standard_exponential(size)
        self._counts += 1
        return out


class TestEstimateOutage:
    def test_infeasible_rate_outage_one(self):
        cfg = SystemConfig(rates=(3.0, 0.5, 0.5), beta=0.2)
        for user in montecarlo.USERS:
            assert estimate_outage(cfg, user, 500, seed=0).p_hat == 1.0

    def test_beta_zero_near_users_fail(self, base_cfg):
        cfg = with_overrides(base_cfg, beta=0.0)
        assert estimate_outage(cfg, "noma1", 500, seed=0).p_hat == 1.0
        assert estimate_outage(cfg, "noma2", 500, seed=0).p_hat == 1.0

    def test_zero_trials_rejected(self, base_cfg):
        with pytest.raises(ValueError):
            estimate_outage(base_cfg, "comp", 0, seed=0)

    def test_unknown_user_rejected(self, base_cfg):
        with pytest.raises(ValueError):
            estimate_outage(base_cfg, "relay", 10, seed=0)

    def test_reproducible(self, base_cfg):
        a = estimate_outage(base_cfg, "comp", 4000, seed=11)
        b = estimate_outage(base_cfg, "comp", 4000, seed=11)
        assert a == b

    def test_worker_count_invariance(self, base_cfg):
        serial = collect_samples(base_cfg, montecarlo.USERS, 6000, seed=3, workers=1)
        parallel = collect_samples(base_cfg, montecarlo.USERS, 6000, seed=3, workers=2)
        for user in montecarlo.USERS:
            assert np.array_equal(serial[user].zeta, parallel[user].zeta)
            assert np.array_equal(serial[user].own2, parallel[user].own2)

    def test_stderr_definition_and_scaling(self, base_cfg):
        est = estimate_outage(base_cfg, "comp", 20000, seed=4)
        assert est.stderr == pytest.approx(
            math.sqrt(est.p_hat * (1.0 - est.p_hat) / est.n_trials))
        est4 = estimate_outage(base_cfg, "comp", 80000, seed=4)
        # quadrupling trials halves the standard error, within 20%
        assert est4.stderr == pytest.approx(est.stderr / 2.0, rel=0.2)

    def test_common_random_numbers_beta_monotone(self, base_cfg):
        # same seed, increasing beta: the far user's outage indicator can
        # only switch on, never off
        der = derive(base_cfg)
        bank = collect_samples(base_cfg, ("comp",), 4000, seed=5)["comp"]
        counts = [
            int(outage_indicators(bank, "comp", der, beta).sum())
            for beta in (0.1, 0.2, 0.3, 0.5, 0.7)
        ]
        assert counts == sorted(counts)


class TestSumRate:
    def test_zero_rates(self, base_cfg):
        cfg = with_overrides(base_cfg, rates=(0.0, 0.0, 0.0))
        assert estimate_sum_rate(cfg, "nnoma", 300, seed=0).total == 0.0
        assert estimate_sum_rate(cfg, "oma", 300, seed=0).total == 0.0

    def test_total_is_sum_of_users(self, base_cfg):
        est = estimate_sum_rate(base_cfg, "nnoma", 2000, seed=1)
        assert est.total == pytest.approx(sum(est.per_user.values()))
        assert est.total <= sum(base_cfg.rates)

    def test_oma_outage_never_worse(self, base_cfg):
        # full-power single-user transmission outperforms the split
        der = derive(base_cfg)
        bank = collect_samples(base_cfg, ("comp",), 5000, seed=2)["comp"]
        p_oma = outage_indicators(bank, "comp", der, beta=0.0).mean()
        p_nnoma = outage_indicators(bank, "comp", der, base_cfg.beta).mean()
        assert p_oma <= p_nnoma

    def test_unknown_scheme(self, base_cfg):
        with pytest.raises(ValueError):
            estimate_sum_rate(base_cfg, "tdma", 10, seed=0)


class TestLemma1Validation:
    def test_report_shape_and_agreement(self):
        cfg = SystemConfig(lambda_l=2e-3, lambda_b=1e-2)
        report = validate_lemma1(cfg, q_grid=(0.0, 1.0), n_realizations=8,
                                 seed=6, n_draws=8000)
        assert {r.pairing_fraction for r in report.rows} == {0.0, 1.0}
        assert report.max_abs_z() < 4.0


class TestTruncationConvergence:
    def test_no_roads_identical_across_radii(self):
        cfg = SystemConfig(lambda_l=0.0, rates=(1.0, 0.5, 0.5))
        report = truncation_convergence(cfg, radii_grid=(500.0, 1000.0, 2000.0),
                                        n_trials=2000, seed=7)
        ps = [est.p_hat for _, est in report.rows]
        assert ps[0] == ps[1] == ps[2]
        assert report.converged

    def test_default_scenario_converged(self, base_cfg):
        cfg = with_overrides(base_cfg, rates=(1.0, 0.5, 0.5))
        report = truncation_convergence(cfg, radii_grid=(1000.0, 2000.0, 4000.0),
                                        n_trials=20000, seed=8)
        assert report.converged
        # doubling the window beyond the default moves the estimate by
        # less than one standard error
        (_, prev), (_, last) = report.rows[-2:]
        assert abs(last.p_hat - prev.p_hat) <= max(last.stderr, prev.stderr)
