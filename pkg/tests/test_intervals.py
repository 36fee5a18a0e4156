import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from renewal_intrusion import Family, IntervalModel, fit_mle
from renewal_intrusion.exceptions import DomainError, EstimationError, ParameterError
from renewal_intrusion.intervals import log_diff_exp, quadrature_reference

EXP1 = IntervalModel.exponential(1.0)
G21 = IntervalModel.gamma(2.0, 1.0)
LN = math.log

TAILS = {
    "survival": "log_survival",
    "sq_tail": "log_sq_tail",
    "lb_tail": "log_lb_tail",
    "lb_sq_tail": "log_lb_sq_tail",
}


class TestConstruction:
    def test_rejects_nonpositive_rate(self):
        with pytest.raises(ParameterError):
            IntervalModel.gamma(2.0, 0.0)

    def test_rejects_heavy_shapes(self):
        with pytest.raises(ParameterError, match="0.5"):
            IntervalModel.gamma(0.5, 1.0)

    def test_exponential_shape_is_fixed(self):
        with pytest.raises(ParameterError):
            IntervalModel("exponential", 2.0, 1.0)

    def test_family_from_string(self):
        assert IntervalModel("gamma", 3, 2).family is Family.GAMMA

    def test_unknown_family(self):
        with pytest.raises(ParameterError):
            IntervalModel("weibull", 2.0, 1.0)

    def test_immutable(self):
        with pytest.raises(Exception):
            G21.rate = 3.0


@pytest.mark.parametrize("model,method,x,expected", [
    (EXP1, "log_density", 0.0, 0.0),
    (G21, "log_density", 1.0, -1.0),
    (IntervalModel.gamma(1.0, 2.0), "log_density", 0.5, LN(2) - 1),
    (G21, "log_survival", 0.0, 0.0),
    (EXP1, "log_survival", 2.0, -2.0),
    (G21, "log_survival", 1.0, LN(2 * math.exp(-1))),
    (EXP1, "log_sq_tail", 0.0, LN(0.5)),
    (EXP1, "log_sq_tail", 1.0, LN(0.5) - 2),
    (G21, "log_sq_tail", 0.0, LN(0.25)),
    (EXP1, "log_lb_tail", 0.0, 0.0),
    (EXP1, "log_lb_tail", 2.0, -2.0),
    (G21, "log_lb_tail", 0.0, LN(2)),
    (EXP1, "log_lb_sq_tail", 0.0, LN(0.25)),
    (EXP1, "log_lb_sq_tail", 2.0, LN(0.25) - 4),
    (G21, "log_lb_sq_tail", 0.0, LN(0.375)),
])
def test_closed_form_examples(model, method, x, expected):
    assert float(getattr(model, method)(x)) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("model,expected", [
    (IntervalModel.exponential(2.0), 0.0),
    (G21, LN(0.25)),
    (IntervalModel.gamma(1.0, 1.0), LN(0.5)),
])
def test_mean_density_examples(model, expected):
    assert model.log_mean_density() == pytest.approx(expected, abs=1e-12)


def test_frozen_gamma_tails():
    # Gamma(2, 1) at x = 0.5 and x = 2
    expected = {
        0.5: (0.9097959895689501, 0.22992465073215143, 1.5163266492815834, 0.25291711580536674),
        2.0: (0.40600584970983833, 0.05952582638838608, 0.5413411329464501, 0.04349964236074391),
    }
    for x, values in expected.items():
        got = [math.exp(float(getattr(G21, m)(x))) for m in TAILS.values()]
        np.testing.assert_allclose(got, values, rtol=1e-13)


@pytest.mark.parametrize("method", ["log_density", *TAILS.values()])
def test_negative_argument_is_a_domain_error(method):
    with pytest.raises(DomainError):
        getattr(G21, method)(-0.1)


def test_vectorised_evaluation_matches_scalar():
    x = np.array([0.0, 0.3, 1.0, 7.0])
    for method in TAILS.values():
        vec = getattr(G21, method)(x)
        assert vec.shape == x.shape
        np.testing.assert_array_equal(vec, [getattr(G21, method)(float(v)) for v in x])


@given(st.sampled_from((0.25, 1.0, 3.0)), st.floats(0.0, 50.0))
def test_exponential_equals_unit_shape_gamma(rate, x):
    e = IntervalModel.exponential(rate)
    g = IntervalModel.gamma(1.0, rate)
    for method in ("log_density", *TAILS.values()):
        a, b = float(getattr(e, method)(x)), float(getattr(g, method)(x))
        assert a == pytest.approx(b, abs=1e-12) or (a == b == -np.inf)
    assert e.log_mean_density() == pytest.approx(g.log_mean_density(), abs=1e-12)


@pytest.mark.parametrize("shape", [0.75, 1.0, 2.0, 4.0, 8.0])
@pytest.mark.parametrize("rate", [0.5, 1.0, 4.0])
@pytest.mark.parametrize("x", [0.0, 0.1, 1.0, 5.0])
def test_closed_forms_match_quadrature(shape, rate, x):
    model = IntervalModel.gamma(shape, rate)
    for integrand, method in TAILS.items():
        closed = math.exp(float(getattr(model, method)(x)))
        ref = quadrature_reference(model, integrand, x)
        assert closed == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize("model,integrand,x,expected,tol", [
    (EXP1, "sq_tail", 0.0, 0.5, 1e-9),
    (G21, "lb_sq_tail", 0.0, 0.375, 1e-9),
    (IntervalModel.gamma(4.0, 2.0), "survival", 0.0, 1.0, 1e-10),
])
def test_quadrature_examples(model, integrand, x, expected, tol):
    assert quadrature_reference(model, integrand, x) == pytest.approx(expected, abs=tol)


def test_quadrature_rejects_unknown_integrand():
    with pytest.raises(ParameterError):
        quadrature_reference(G21, "hazard", 0.0)


@pytest.mark.parametrize("shape", [0.75, 1.0, 2.5, 8.0])
def test_tails_are_non_increasing(shape):
    model = IntervalModel.gamma(shape, 1.3)
    x = np.linspace(0.0, 40.0, 400)
    for method in TAILS.values():
        assert np.all(np.diff(getattr(model, method)(x)) <= 1e-12)


@pytest.mark.parametrize("shape", [0.6, 1.0, 3.0, 8.0])
def test_mean_density_is_the_sq_tail_at_zero(shape):
    model = IntervalModel.gamma(shape, 2.0)
    assert model.log_mean_density() == pytest.approx(float(model.log_sq_tail(0.0)), abs=1e-12)


def test_log_diff_exp():
    assert log_diff_exp(LN(5.0), LN(3.0)) == pytest.approx(LN(2.0))
    assert log_diff_exp(-np.inf, -np.inf) == -np.inf


class TestSampling:
    def test_seeded_draws_repeat(self):
        a = EXP1.sample(np.random.default_rng(7), 5)
        b = EXP1.sample(np.random.default_rng(7), 5)
        np.testing.assert_array_equal(a, b)

    def test_gamma_sample_mean(self):
        draws = IntervalModel.gamma(4.0, 4.0).sample(np.random.default_rng(1), 100_000)
        se = draws.std() / math.sqrt(draws.size)
        assert abs(draws.mean() - 1.0) < 3 * se

    def test_unit_shape_draws_follow_the_exponential(self):
        draws = IntervalModel.gamma(1.0, 2.5).sample(np.random.default_rng(2), 2000)
        result = stats.kstest(draws, stats.expon(scale=1 / 2.5).cdf)
        critical = 1.63 / math.sqrt(draws.size)  # 1% level
        assert result.statistic < critical

    def test_cdf_complements_survival(self):
        x = np.array([0.1, 1.0, 4.0])
        np.testing.assert_allclose(G21.cdf(x), stats.gamma(2.0).cdf(x), rtol=1e-12)


class TestFitMle:
    def test_exponential_rate_is_reciprocal_mean(self):
        assert fit_mle("exponential", [2.0, 2.0, 2.0]).rate == pytest.approx(0.5)

    def test_gamma_recovers_parameters(self):
        draws = IntervalModel.gamma(4.0, 4.0).sample(np.random.default_rng(3), 10_000)
        fit = fit_mle("gamma", draws)
        assert fit.shape == pytest.approx(4.0, rel=0.10)
        assert fit.rate == pytest.approx(4.0, rel=0.10)

    @pytest.mark.parametrize("shape,rate", [(1.5, 0.5), (6.0, 2.0)])
    def test_large_sample_fixed_point(self, shape, rate):
        draws = IntervalModel.gamma(shape, rate).sample(np.random.default_rng(4), 100_000)
        fit = fit_mle("gamma", draws)
        assert fit.shape == pytest.approx(shape, rel=0.05)
        assert fit.rate == pytest.approx(rate, rel=0.05)

    def test_matches_scipy_fit(self):
        draws = IntervalModel.gamma(3.0, 2.0).sample(np.random.default_rng(5), 500)
        shape, _, scale = stats.gamma.fit(draws, floc=0)
        fit = fit_mle("gamma", draws)
        assert fit.shape == pytest.approx(shape, rel=1e-4)
        assert fit.rate == pytest.approx(1 / scale, rel=1e-4)

    @pytest.mark.parametrize("data", [[], [1.0, -1.0], [0.0, 1.0], [1.0, np.nan]])
    def test_bad_input(self, data):
        with pytest.raises(EstimationError):
            fit_mle("gamma", data)

    def test_constant_intervals_cannot_fit_a_gamma(self):
        with pytest.raises(EstimationError):
            fit_mle("gamma", [1.5, 1.5, 1.5])

    def test_heavy_data_names_the_constraint(self):
        draws = IntervalModel.gamma(0.6, 1.0).sample(np.random.default_rng(6), 5000)
        draws = np.r_[draws, 1e-9, 1e-8]
        with pytest.raises(EstimationError, match="E\\[f"):
            fit_mle("gamma", draws ** 2)

    def test_min_shape_clips_the_estimate(self):
        draws = IntervalModel.gamma(0.6, 1.0).sample(np.random.default_rng(6), 5000) ** 2
        fit = fit_mle("gamma", draws, min_shape=0.55)
        assert fit.shape == 0.55
        assert fit.rate == pytest.approx(0.55 / draws.mean())

    def test_min_shape_must_keep_the_density_square_integrable(self):
        with pytest.raises(ParameterError):
            fit_mle("gamma", [1.0, 2.0], min_shape=0.5)
