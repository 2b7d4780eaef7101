"""Harness-level tests: KS oracle, growth fits, LLN ratios, determinism."""
import math

import numpy as np
import pytest
from scipy.stats import kstest

from hypermle.equations import preset
from hypermle.fundamental import PsiValues
from hypermle.montecarlo import (
    ExperimentConfig,
    exp_weight_lln_fixture,
    fit_growth,
    ks_statistic,
    run_consistency,
    run_normality,
    run_replicates,
    two_sample_ks,
    verify_lln,
)
from hypermle.simulate import TimeGrid


class TestKsStatistic:
    def test_matches_scipy(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal(500)
        D, crit = ks_statistic(x)
        assert D == pytest.approx(kstest(x, "norm").statistic, rel=1e-10)
        assert crit[0.01] == pytest.approx(1.628 / math.sqrt(500))
        assert crit[0.05] == pytest.approx(1.358 / math.sqrt(500))

    def test_point_mass_at_median(self):
        D, _ = ks_statistic(np.zeros(100))
        assert D == pytest.approx(0.5)

    def test_unit_shift_gap(self):
        rng = np.random.default_rng(1)
        D, _ = ks_statistic(rng.standard_normal(100000) + 1.0)
        # sup_x |Phi(x) - Phi(x-1)| = Phi(1/2) - Phi(-1/2)
        want = 0.3829249
        assert D == pytest.approx(want, abs=0.01)

    def test_calibration(self):
        # normal samples rarely exceed the 5% critical value
        rng = np.random.default_rng(2)
        hits = 0
        for _ in range(100):
            D, crit = ks_statistic(rng.standard_normal(1000))
            hits += D < crit[0.05]
        assert hits >= 94

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            ks_statistic(np.zeros(10))


class TestFitGrowth:
    def test_power_columns(self):
        rows = [PsiValues(n, 2.0 * n ** 3, 0.5 * n, 0.0, 0.0, 0.0)
                for n in (50, 100, 200, 400, 800)]
        fit = fit_growth(rows)
        assert fit["psi1"]["slope"] == pytest.approx(3.0, abs=1e-9)
        assert fit["psi2"]["slope"] == pytest.approx(1.0, abs=1e-9)
        assert not fit["psi1"]["log_flag"] and not fit["psi2"]["log_flag"]

    def test_log_column_flagged(self):
        rows = [PsiValues(n, 3.0 + math.log(n), n ** 2, 0.0, 0.0, 0.0)
                for n in (50, 100, 200, 400, 800)]
        fit = fit_growth(rows)
        assert fit["psi1"]["log_flag"]
        assert not fit["psi2"]["log_flag"]

    def test_needs_four_points(self):
        rows = [PsiValues(n, n, n, 0.0, 0.0, 0.0) for n in (10, 20, 30)]
        with pytest.raises(ValueError):
            fit_growth(rows)


class TestLlnFixture:
    def test_exponential_weights_do_not_stabilize(self):
        # the sequence keeps making O(1) moves arbitrarily late
        r = exp_weight_lln_fixture(400, seed=3)
        tail = r[200:]
        assert np.max(tail) - np.min(tail) > 0.5
        # compare: uniform weights settle by the same index
        rng = np.random.default_rng(3)
        xi2 = rng.standard_normal(400) ** 2
        flat = np.cumsum(xi2) / np.arange(1, 401)
        assert np.max(flat[200:]) - np.min(flat[200:]) < 0.25


class TestHarness:
    def setup_method(self):
        spec, params = preset("alg_ex1", d=1)
        self.cfg = ExperimentConfig(
            spec=spec, params=params, N_list=[10, 20, 40], replicates=40,
            grid=TimeGrid(1.0, 512), seed=101,
        )

    def test_consistency_errors_decay(self):
        res = run_consistency(self.cfg)
        rows = res["rows"]
        assert rows[0]["mean_abs_err1"] > rows[-1]["mean_abs_err1"]
        assert res["slope1"] < -0.8
        assert all(r["n_excluded"] == 0 for r in rows)
        # opportunistic identity check ran and held on every replicate
        assert all(r["identity_max_rel"] < 1e-9 for r in rows)

    def test_normality_report_shape(self):
        rep = run_normality(self.cfg)
        assert rep.N == 40
        assert len(rep.norm_err1) == 40
        assert 0.0 <= rep.ks1 <= 1.0 and 0.0 <= rep.ks2 <= 1.0
        assert -1.0 <= rep.corr12 <= 1.0
        assert rep.route == "stats"

    def test_verify_lln_ratios(self):
        rows = verify_lln(self.cfg)
        last = rows[-1]
        assert 0.6 < last["K1_over_psi1"][0] < 1.4
        assert 0.5 < last["iota1_isometry"] < 1.5

    def test_full_determinism(self):
        a = run_consistency(self.cfg)
        b = run_consistency(self.cfg)
        for ra, rb in zip(a["rows"], b["rows"]):
            assert ra["mean_abs_err1"] == rb["mean_abs_err1"]
            assert ra["mean_abs_err2"] == rb["mean_abs_err2"]

    def test_determinism_across_worker_counts(self):
        spec, params = preset("alg_ex1", d=1)
        grid = TimeGrid(1.0, 256)
        a = run_replicates(spec, params, 12, grid, seed=700, M=20, workers=1)
        b = run_replicates(spec, params, 12, grid, seed=700, M=20, workers=5)
        assert np.array_equal(a.theta1_hat, b.theta1_hat)
        assert np.array_equal(a.theta2_hat, b.theta2_hat)
        assert np.array_equal(a.K12, b.K12)

    def test_consistency_monotone_with_bootstrap_confidence(self):
        # errors at the largest N are below those at the smallest N, with the
        # bootstrap intervals separated (99%-style confidence statement)
        res = run_consistency(self.cfg)
        first, last = res["rows"][0], res["rows"][-1]
        assert last["mean_abs_err1_ci"][1] < first["mean_abs_err1_ci"][0]
        assert last["mean_abs_err2_ci"][1] < first["mean_abs_err2_ci"][0]
        lo, hi = res["slope1_ci"]
        assert lo <= res["slope1"] <= hi
        assert hi < 0.0  # decaying with confidence

    def test_decomposition_route_for_stiff_spectra(self):
        spec, params = preset("sec5_example")
        batch = run_replicates(spec, params, 25, TimeGrid(1.0, 256), seed=7, M=40)
        assert batch.route == "decomposition"
        assert batch.underresolved_modes > 0
        assert np.all(np.isfinite(batch.err1[~batch.excluded]))

    def test_routes_agree_when_resolved(self):
        spec, params = preset("alg_ex1", d=1)
        batch = run_replicates(spec, params, 20, TimeGrid(1.0, 1024), seed=9, M=30)
        assert batch.route == "stats"
        # decomposition errors from the same batch approximate the direct ones
        dec1 = batch.err1  # stats route
        rec1 = (batch.iota1 / batch.K1 - batch.iota2 * batch.K12 / (batch.K1 * batch.K2)) / (
            1 - batch.D_N
        )
        assert np.max(np.abs(dec1 - rec1)) < 0.05 * np.std(dec1) + 5e-3


class TestTwoSampleKs:
    def test_identical_distributions(self):
        rng = np.random.default_rng(11)
        D, crit = two_sample_ks(rng.standard_normal(3000), rng.standard_normal(3000))
        assert D < crit

    def test_shift_detected(self):
        rng = np.random.default_rng(12)
        D, crit = two_sample_ks(rng.standard_normal(3000), rng.standard_normal(3000) + 0.3)
        assert D > crit
