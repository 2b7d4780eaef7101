"""Eigenvalue sequences, hyperbolicity verdicts, algebraic classification."""
import math

import numpy as np
import pytest

from hypermle.equations import preset
from hypermle.spectrum import (
    AlgebraicClass,
    Constant,
    Explicit,
    ExpLaw,
    LogLaw,
    LogLogLaw,
    ModelParams,
    NonAlgebraicSpectrumError,
    PowerLaw,
    SignedAlternating,
    SpectrumSpec,
    check_hyperbolic,
    classify_algebraic,
    conditions_1_2,
    consistency_conditions,
    eigenvalues,
    lambda_mu,
    slowly_increasing_test,
    verify_lower_bound_props,
)


def box_params(theta1=1.0, theta2=1.0, box1=(0.5, 2.0), box2=(0.5, 2.0), T=1.0):
    return ModelParams(theta1, theta2, box1, box2, T)


class TestGenerators:
    def test_power_law_exact(self):
        spec = SpectrumSpec(PowerLaw(1.0, 2.0), Constant(0), Constant(0), Constant(0))
        assert eigenvalues(spec, 3)[0] == 9.0

    def test_explicit_lookup(self):
        spec = SpectrumSpec(Explicit([5.0, 7.0]), Constant(0), Constant(0), Constant(0))
        assert eigenvalues(spec, 2)[0] == 7.0
        assert spec.k_max == 2
        with pytest.raises(ValueError):
            eigenvalues(spec, 3)

    def test_exp_law(self):
        assert ExpLaw(1.0, 2.0).value(4) == pytest.approx(math.exp(8.0), rel=1e-14)

    def test_log_laws(self):
        assert LogLaw(2.0, 3.0, 1.0).value(4) == pytest.approx(2.0 * math.log(5.0) ** 3, rel=1e-12)
        assert LogLogLaw(1.0, 3.0).value(1) == pytest.approx(math.log(math.log(4.0)), rel=1e-12)

    def test_signed_alternating(self):
        gen = SignedAlternating(PowerLaw(1.0, -1.0))
        assert gen.value(1) == pytest.approx(-1.0)
        assert gen.value(2) == pytest.approx(0.5)

    def test_sign_exact_beyond_float_range(self):
        gen = ExpLaw(-1.0, 2.0)
        s, logmag = gen.slog(500)
        assert s == -1.0 and logmag == pytest.approx(1000.0)
        assert gen.value(500) == -math.inf  # saturates, sign preserved

    def test_generator_determinism(self):
        gen = LogLaw(1.5, 2.0, 1.0)
        assert gen.slog(17) == gen.slog(17)


class TestLambdaMu:
    def test_arithmetic(self):
        spec = SpectrumSpec(PowerLaw(1, 2), PowerLaw(1, 2), Constant(0), Constant(1))
        assert lambda_mu(spec, 2.0, -0.5, 3) == (27.0, -0.5)

    def test_zero_thetas(self):
        spec = SpectrumSpec(PowerLaw(1, 2), PowerLaw(3, 1), Constant(5), Constant(1))
        lam, mu = lambda_mu(spec, 0.0, 0.0, 4)
        assert (lam, mu) == (16.0, 5.0)

    def test_exponential_spectrum_value(self):
        spec, params = preset("sec5_example")
        lam, mu = lambda_mu(spec, 1.0, 1.0, 1)
        assert lam == pytest.approx(math.e ** 2 + math.e, rel=1e-12)
        assert mu == pytest.approx(math.log(math.log(4.0)), rel=1e-12)


class TestCheckHyperbolic:
    def test_damped_wave_passes(self):
        spec, params = preset("wave_damped")
        assert check_hyperbolic(spec, params, (1, 500)).hyperbolic == "pass"

    def test_antidissipative_fails_with_witnesses(self):
        spec, params = preset("wave_antidissipative")
        rep = check_hyperbolic(spec, params, (1, 500))
        assert rep.hyperbolic == "fail"
        assert rep.witnesses
        # every witness re-evaluates as a violation of T mu <= ln lambda + C
        C = rep.constants_used["C"]
        for k, _, _ in rep.witnesses:
            lam, mu = lambda_mu(spec, params.theta1, params.theta2, k)
            assert params.T * mu > math.log(lam) + C

    def test_unbounded_amplification_admitted(self):
        spec = SpectrumSpec(Constant(0), ExpLaw(1, 1), Constant(0), LogLaw(1, 1, 0))
        rep = check_hyperbolic(spec, box_params(), (2, 500))
        assert rep.hyperbolic == "pass"

    def test_fail_is_monotone_in_range(self):
        # re-checking a longer range with the constants fitted on the short
        # one can only keep failing
        spec, params = preset("wave_antidissipative")
        rep = check_hyperbolic(spec, params, (1, 200))
        assert rep.hyperbolic == "fail"
        again = check_hyperbolic(spec, params, (1, 500), constants=rep.constants_used)
        assert again.hyperbolic == "fail"

    def test_degenerate_box_rejected(self):
        spec, params = preset("wave_damped")
        with pytest.raises(ValueError):
            ModelParams(1.0, 1.0, (2.0, 0.5), (1.0, 1.0), 1.0)
        with pytest.raises(ValueError):
            check_hyperbolic(spec, params, (5, 2))


class TestLowerBoundProps:
    def test_shifted_quadratic(self):
        spec = SpectrumSpec(PowerLaw(1, 2), Constant(1), Constant(0), Constant(1))
        rep = verify_lower_bound_props(spec, box_params(box1=(1.0, 2.0)), (1, 500))
        assert rep.hyperbolic == "pass"
        assert rep.constants_used["c0"] <= 1.0

    def test_pure_theta_scaling(self):
        spec = SpectrumSpec(Constant(0), PowerLaw(1, 2), Constant(0), Constant(1))
        rep = verify_lower_bound_props(spec, box_params(box1=(1.0, 2.0)), (1, 500))
        assert rep.hyperbolic == "pass"
        assert rep.constants_used["c0"] == pytest.approx(1.0, rel=1e-9)

    def test_exponential_ratio_vanishes(self):
        spec, params = preset("sec5_example")
        rep = verify_lower_bound_props(spec, params, (1, 200))
        assert rep.hyperbolic == "pass"
        assert rep.constants_used["c0"] < 0.5  # tau/lambda ~ e^{-k}


class TestClassifyAlgebraic:
    def test_alg_ex1(self):
        spec, params = preset("alg_ex1", d=1)
        cls = classify_algebraic(spec, params, (1, 1000))
        assert (cls.alpha, cls.alpha1, cls.beta, cls.beta1) == (2.0, 2.0, 0.0, 0.0)

    def test_alg_ex3(self):
        spec, params = preset("alg_ex3", d=1)
        cls = classify_algebraic(spec, params, (1, 1000))
        assert (cls.alpha, cls.alpha1, cls.beta, cls.beta1) == (2.0, 2.0, 4.0, 4.0)

    def test_constants_have_zero_exponent(self):
        spec = SpectrumSpec(Constant(0), Constant(2.0), Constant(0), Constant(3.0))
        cls = classify_algebraic(spec, box_params(), (1, 1000))
        assert cls.alpha == 0.0 and cls.alpha1 == 0.0 and cls.beta == 0.0 and cls.beta1 == 0.0

    def test_regression_path_recovers_exponent(self):
        ks = np.arange(1, 1001)
        spec = SpectrumSpec(
            Explicit(0.7 * ks ** 1.5), Explicit(2.0 * ks ** 1.5),
            Constant(0.0), Constant(1.0), k_max=1000,
        )
        cls = classify_algebraic(spec, box_params(), (1, 1000))
        assert cls.alpha == pytest.approx(1.5, abs=1e-2)
        assert cls.alpha1 == pytest.approx(1.5, abs=1e-2)

    def test_alpha_positive_under_hyperbolicity(self):
        for name in ("alg_ex1", "alg_ex2", "alg_ex3", "alg_ex4", "alg_ex5", "alg_ex6"):
            spec, params = preset(name, d=2)
            assert check_hyperbolic(spec, params, (1, 400)).hyperbolic == "pass"
            assert classify_algebraic(spec, params, (1, 400)).alpha > 0.0

    def test_oscillating_sign_refused(self):
        spec = SpectrumSpec(
            PowerLaw(1, 2), SignedAlternating(PowerLaw(1, -1)), Constant(0), Constant(1)
        )
        with pytest.raises(NonAlgebraicSpectrumError):
            classify_algebraic(spec, box_params(), (1, 1000))

    def test_exponential_refused(self):
        spec, params = preset("sec5_example")
        with pytest.raises(NonAlgebraicSpectrumError):
            classify_algebraic(spec, params, (1, 500))


class TestConsistencyConditions:
    def test_alg_ex1_values(self):
        cond = consistency_conditions(AlgebraicClass(2.0, 2.0, 0.0, 0.0, 0.0))
        assert cond["gamma1"] == 2.0 and cond["theta1_ok"]
        assert cond["gamma2"] == 0.0 and cond["theta2_ok"]

    def test_alg_ex5_values(self):
        cond = consistency_conditions(AlgebraicClass(4.0, 0.0, 4.0, 2.0, 0.0))
        assert cond["gamma1"] == -8.0 and not cond["theta1_ok"]
        assert cond["gamma2"] == 0.0 and cond["theta2_ok"]

    def test_boundary_case(self):
        # alpha1 = (alpha + beta - 1)/2 exactly: gamma1 = -1, still admissible
        cond = consistency_conditions(AlgebraicClass(2.0, 1.0, 1.0, 0.5, 0.0))
        assert cond["gamma1"] == -1.0 and cond["theta1_ok"]

    def test_defining_arithmetic_on_random_tuples(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            a, a1, b, b1 = rng.uniform(-3, 5, size=4)
            cond = consistency_conditions(AlgebraicClass(a, a1, b, b1, 0.0))
            assert cond["gamma1"] == pytest.approx(2 * a1 - a - b, rel=1e-12)
            assert cond["gamma2"] == pytest.approx(2 * b1 - b, rel=1e-12)
            assert cond["gamma12"] == pytest.approx(a1 - a + b1 - b, rel=1e-12)
            assert cond["theta1_ok"] == (2 * a1 - a - b >= -1)
            assert cond["theta2_ok"] == (2 * b1 - b >= -1)


class TestSlowlyIncreasing:
    N_MAX = 10 ** 5

    @pytest.mark.parametrize("gamma", [-2.0, -1.5, -1.0, -0.5, 0.0, 1.0])
    def test_power_boundary(self, gamma):
        ks = np.arange(1.0, self.N_MAX + 1)
        res = slowly_increasing_test(ks ** gamma)
        expected = "pass" if gamma >= -1.0 else "fail"
        assert res["verdict"] == expected, f"gamma={gamma}: {res['verdict']}"

    def test_exp_fails(self):
        ks = np.arange(1.0, 501.0)
        res = slowly_increasing_test(np.exp(ks))
        assert res["verdict"] == "fail"
        # ratio tends to the geometric-series constant, bounded away from 0
        assert res["ratio_curve"][-1, 1] == pytest.approx(
            (1 - math.exp(-1)) ** 2 / (1 - math.exp(-2)), rel=1e-6
        )

    def test_exp_sqrt_passes(self):
        res = slowly_increasing_test(lambda k: math.exp(math.sqrt(k)), n_max=self.N_MAX)
        assert res["verdict"] == "pass"

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            slowly_increasing_test(np.array([1.0] * 20 + [0.0]))


class TestConditions12:
    def test_sec5_example_both_pass(self):
        spec, params = preset("sec5_example")
        res = conditions_1_2(spec, params, n_max=1000)
        assert res["cond1"] == "pass" and res["cond2"] == "pass"

    def test_alg_ex1_both_pass(self):
        spec, params = preset("alg_ex1", d=1)
        res = conditions_1_2(spec, params, n_max=2000)
        assert res["cond1"] == "pass" and res["cond2"] == "pass"

    def test_exponential_weights_fail_condition1(self):
        # tau = e^k with lambda ~ e^k and bounded mu: weights ~ e^k
        spec = SpectrumSpec(Constant(0), ExpLaw(1, 1), Constant(0), Constant(1))
        params = box_params(theta2=-0.5, box2=(-1.0, 1.0))
        res = conditions_1_2(spec, params, n_max=500)
        assert res["cond1"] == "fail"
        assert res["cond2"] == "pass"


class TestSerialization:
    def test_round_trip(self):
        from hypermle.config import generator_from_config, spectrum_from_config

        spec, _ = preset("sec5_example")
        cfg = spec.to_config()
        assert cfg["tau"] == {"kind": "exp_law", "coefficient": 1.0, "rate": 1.0}
        back = spectrum_from_config(cfg)
        assert back.nu.value(5) == spec.nu.value(5)

    def test_signed_alternating_round_trip(self):
        from hypermle.config import generator_from_config

        gen = SignedAlternating(PowerLaw(2.0, -1.0))
        back = generator_from_config(gen.to_config())
        assert back.value(3) == gen.value(3)
