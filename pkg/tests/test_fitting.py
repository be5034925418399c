import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sklearn.base import clone

from symdiv.distributions import LogLogistic
from symdiv.exceptions import AllCensored, DimensionMismatch, InvalidParam, NonConvergent, SeparationDetected
from symdiv.fitting import (
    FitConfig,
    POSurvivalRegressor,
    SurvivalDataset,
    fit_po_mle,
    linear_predictor,
    po_loglik,
    sample_po,
)


@pytest.fixture(scope="module")
def synthetic():
    return sample_po([1.0, -1.0], censor_rate=0.2, n=2000, seed=7)


@pytest.fixture(scope="module")
def synthetic_fit(synthetic):
    return fit_po_mle(synthetic)


def test_linear_predictor():
    assert linear_predictor([0.0, 0.0], [5.0, -2.0]) == 0.0
    assert linear_predictor([1.0, 2.0], [3.0, -1.0]) == 1.0
    with pytest.raises(DimensionMismatch):
        linear_predictor([1.0, 2.0], [1.0])


def test_fixture_values_pass_through():
    # bypass mode: a stored beta'z is used as a coefficient on a unit covariate
    for x in (2.305, -8.753, 23.896):
        assert linear_predictor([x], [1.0]) == x


def test_sampler_is_deterministic():
    a = sample_po([0.5], censor_rate=0.3, n=300, seed=11)
    b = sample_po([0.5], censor_rate=0.3, n=300, seed=11)
    np.testing.assert_array_equal(a.time, b.time)
    np.testing.assert_array_equal(a.event, b.event)
    np.testing.assert_array_equal(a.covariates, b.covariates)


def test_no_censoring_observes_everything():
    d = sample_po([1.0], censor_rate=0.0, n=500, seed=3)
    assert d.event.all()


def test_censoring_rate_is_close_to_target(synthetic):
    assert 1 - synthetic.event.mean() == pytest.approx(0.2, abs=0.03)


def test_null_marginal_is_log_logistic():
    d = sample_po([0.0], baseline=(2.0, 1.0), n=5000, seed=5)
    t = np.sort(d.time)
    ecdf = np.arange(1, t.size + 1) / t.size
    assert np.max(np.abs(ecdf - LogLogistic(2.0, 1.0).cdf(t))) < 0.03


def test_recovers_coefficients(synthetic_fit):
    fit = synthetic_fit
    assert fit.converged
    assert np.all(np.abs(fit.beta - np.array([1.0, -1.0])) < 3 * fit.se)
    assert fit.grad_norm <= 1e-8


def test_null_coefficients_near_zero():
    fit = fit_po_mle(sample_po([0.0, 0.0], censor_rate=0.2, n=2000, seed=9))
    assert np.all(np.abs(fit.beta) < 0.1)


def test_fit_never_worse_than_null(synthetic, synthetic_fit):
    null = fit_po_mle(synthetic, subset=[])
    assert synthetic_fit.loglik >= null.loglik
    assert null.beta.size == 0


def test_subset_by_name(synthetic):
    a = fit_po_mle(synthetic, subset=["z2"])
    b = fit_po_mle(synthetic, subset=[1])
    np.testing.assert_allclose(a.beta, b.beta)
    assert a.names == ("z2",)


def test_fitted_survival_curves_are_valid(synthetic_fit, rng):
    t = np.concatenate([[0.0], np.geomspace(1e-3, 50, 60)])
    for z in rng.normal(size=(10, 2)):
        s = synthetic_fit.survival(t, z)
        assert s[0] == pytest.approx(1.0)
        assert np.all(np.diff(s) <= 0)
        assert np.all((s >= 0) & (s <= 1))


@pytest.mark.parametrize("seed", range(5))
def test_gradient_and_hessian_match_finite_differences(seed, synthetic):
    rng = np.random.default_rng(seed)
    params = np.concatenate([[rng.normal(0.5, 0.3), rng.normal(0, 0.5)], rng.normal(0, 1, 2)])
    args = (synthetic.time, synthetic.event, synthetic.covariates)
    _, grad, hess = po_loglik(params, *args, derivatives=True)
    num = np.empty_like(grad)
    num_h = np.empty_like(hess)
    for i in range(params.size):
        h = 1e-6 * max(1.0, abs(params[i]))
        e = np.zeros_like(params)
        e[i] = h
        num[i] = (po_loglik(params + e, *args) - po_loglik(params - e, *args)) / (2 * h)
        gp = po_loglik(params + e, *args, derivatives=True)[1]
        gm = po_loglik(params - e, *args, derivatives=True)[1]
        num_h[:, i] = (gp - gm) / (2 * h)
    assert np.max(np.abs(grad - num)) / max(1.0, np.max(np.abs(grad))) < 1e-5
    assert np.max(np.abs(hess - num_h)) / np.max(np.abs(hess)) < 1e-5


def test_all_censored_rejected():
    d = SurvivalDataset([1.0, 2.0, 3.0], [False, False, False], np.zeros((3, 1)))
    with pytest.raises(AllCensored):
        fit_po_mle(d)


def test_empty_dataset_rejected():
    d = SurvivalDataset(np.empty(0), np.empty(0, bool), np.empty((0, 1)))
    with pytest.raises((AllCensored, NonConvergent)):
        fit_po_mle(d)


def test_separation_detected():
    # every unit with z = 1 is censored, so the likelihood keeps rising as beta grows
    z = np.r_[np.zeros(50), np.ones(50)]
    t = np.r_[np.linspace(0.1, 3.0, 50), np.linspace(0.1, 3.0, 50)]
    d = SurvivalDataset(t, z == 0, z[:, None])
    with pytest.raises((SeparationDetected, NonConvergent)):
        fit_po_mle(d, config=FitConfig(max_iter=400))


def test_dataset_validation():
    with pytest.raises(DimensionMismatch):
        SurvivalDataset([1.0, 2.0], [True], np.zeros((2, 1)))
    with pytest.raises(InvalidParam):
        SurvivalDataset([1.0, -2.0], [True, True], np.zeros((2, 1)))


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=3), st.integers(0, 10_000))
def test_fit_loglik_dominates_truth(beta, seed):
    d = sample_po(beta, censor_rate=0.1, n=300, seed=seed)
    fit = fit_po_mle(d)
    truth = np.concatenate([[np.log(2.0), 0.0], beta])
    assert fit.loglik >= po_loglik(truth, d.time, d.event, d.covariates) - 1e-8


class TestEstimator:
    def test_fit_predict(self, synthetic):
        y = np.column_stack([synthetic.time, synthetic.event])
        est = POSurvivalRegressor().fit(synthetic.covariates, y)
        direct = fit_po_mle(synthetic)
        np.testing.assert_allclose(est.coef_, direct.beta, rtol=1e-10)
        np.testing.assert_allclose(est.predict(synthetic.covariates[:3]), synthetic.covariates[:3] @ direct.beta)
        s = est.predict_survival(synthetic.covariates[:2], [0.5, 1.0, 2.0])
        assert s.shape == (2, 3) and np.all(np.diff(s, axis=1) < 0)
        assert est.score(synthetic.covariates, y) == pytest.approx(direct.loglik / synthetic.n, rel=1e-10)

    def test_structured_target_and_clone(self, synthetic):
        y = np.zeros(synthetic.n, dtype=[("event", bool), ("time", float)])
        y["event"], y["time"] = synthetic.event, synthetic.time
        est = POSurvivalRegressor(tol=1e-7)
        fitted = est.fit(synthetic.covariates, y)
        assert clone(est).get_params() == {"tol": 1e-7, "max_iter": 200, "separation_threshold": 30.0}
        with pytest.raises(DimensionMismatch):
            fitted.predict(np.zeros((2, 3)))
