import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from symdiv.distributions import Exponential, Logistic, Normal, Weibull
from symdiv.exceptions import ConstraintViolated, InvalidParam
from symdiv.links import (
    LinkedModel,
    POLink,
    PiecewiseUniformLink,
    PowerLink,
    asymmetric_pw_density,
    gll_transform,
    piecewise_uniform_transform,
    po_transform,
    power_transform,
    real_link,
    uniform_link,
)
from symdiv.numerics import DEFAULT_QUADRATURE, integrate_adaptive

GRID = np.linspace(0.05, 6.0, 40)


def test_identity_tilt_reproduces_base():
    base = Weibull(1.5, 2.0)
    m = po_transform(1.0, base)
    np.testing.assert_allclose(m.sf(GRID), base.sf(GRID), atol=1e-15)
    np.testing.assert_allclose(m.pdf(GRID), base.pdf(GRID), rtol=1e-12)


@pytest.mark.parametrize("alpha", [0.3, 2.0, 7.5])
def test_logistic_base_stays_logistic(alpha):
    lam = 1.7
    base = Logistic(0.0, 1.0 / lam)
    m = po_transform(alpha, base)
    x = np.linspace(-4, 4, 33)
    eta = -math.log(alpha)
    np.testing.assert_allclose(m.sf(x), 1.0 / (1.0 + np.exp(eta + lam * x)), rtol=1e-12)


def test_po_exponential_at_log_two():
    m = po_transform(2.0, Exponential(1.0))
    assert m.sf(math.log(2.0)) == pytest.approx(2.0 / 3.0, abs=1e-12)


def test_po_link_closed_forms():
    g = POLink(3.0)
    u = np.linspace(0.0, 1.0, 11)
    np.testing.assert_allclose(g.ppf(g.cdf(u)), u, atol=1e-14)
    h = 1e-6
    num = (g.cdf(u[1:-1] + h) - g.cdf(u[1:-1] - h)) / (2 * h)
    np.testing.assert_allclose(g.pdf(u[1:-1]), num, rtol=1e-7)
    num2 = (g.pdf(u[1:-1] + h) - g.pdf(u[1:-1] - h)) / (2 * h)
    np.testing.assert_allclose(g.dpdf(u[1:-1]), num2, rtol=1e-6)


def test_piecewise_uniform_change_point_and_continuity():
    p = 0.25
    m = piecewise_uniform_transform(p, Exponential(1.0))
    x_p = Exponential(1.0).isf(p)
    assert x_p == pytest.approx(math.log(4.0), abs=1e-12)
    assert m.sf(x_p) == pytest.approx(1.0 - p, abs=1e-14)
    assert m.sf(x_p - 1e-12) == pytest.approx(1.0 - p, abs=1e-10)
    assert m.sf(x_p + 1e-12) == pytest.approx(1.0 - p, abs=1e-10)
    assert PiecewiseUniformLink(0.3).cdf(0.3) == pytest.approx(0.7, abs=1e-15)


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.1, 1.5])
def test_piecewise_uniform_parameter_range(bad):
    with pytest.raises(InvalidParam):
        PiecewiseUniformLink(bad)


def test_power_link_is_proportional_hazards():
    base = Exponential(1.0)
    m = power_transform(2.0, base)
    np.testing.assert_allclose(m.sf(GRID), base.sf(GRID) ** 2, rtol=1e-12)


def test_zero_shift_reproduces_base():
    base = Normal(0.3, 2.0)
    m = gll_transform(real_link("logit"), 0.0, base)
    x = np.linspace(-5, 5, 21)
    np.testing.assert_allclose(m.cdf(x), base.cdf(x), atol=1e-14)


@pytest.mark.parametrize("theta", [-1.2, 0.4, 2.0])
def test_probit_link_on_normal_is_location_shift(theta):
    m = gll_transform(real_link("probit"), theta, Normal())
    x = np.linspace(-4, 4, 17)
    np.testing.assert_allclose(m.cdf(x), Normal().cdf(x + theta), atol=1e-14)


def test_logit_link_on_exponential():
    m = gll_transform(real_link("logit"), 1.0, Exponential(1.0))
    # mpmath oracle
    assert m.cdf(1.0) == pytest.approx(0.82365723756505, abs=1e-12)


def test_asymmetric_pw_constraint_and_normalization():
    link = asymmetric_pw_density(0.16, 2.0, 2.5, 2.0)
    dist = link.dist
    assert (2.0 + 2.5) / 2 == pytest.approx(1 / 0.16 - 2 * 2 / (2 - 1))
    val, _ = integrate_adaptive(dist.pdf, -np.inf, np.inf, DEFAULT_QUADRATURE.replace(scale=0.16),
                                points=dist.breakpoints)
    assert val == pytest.approx(1.0, abs=1e-9)
    # rectangle-area sum over 60 bands
    assert dist.truncated_mass() == pytest.approx(1.0, abs=1e-9)


def test_asymmetric_pw_plateaus_one_period_apart():
    theta = 0.16
    dist = asymmetric_pw_density(theta, 2.0, 2.5, 2.0).dist
    x = np.linspace(-theta / 2, theta / 2, 41)[1:-1]
    np.testing.assert_array_equal(dist.pdf(x + theta), dist.pdf(x - theta))


def test_asymmetric_pw_rejects_violated_constraint():
    with pytest.raises(ConstraintViolated):
        asymmetric_pw_density(0.16, 2.0, 3.0, 2.0)


def test_unknown_real_link():
    with pytest.raises(InvalidParam):
        real_link("cauchy")


@given(st.floats(0.05, 1.0), st.floats(1.0, 20.0))
def test_po_stochastic_ordering(a_small, a_large):
    base = Weibull(1.3, 1.0)
    np.testing.assert_array_less(po_transform(a_small, base).sf(GRID), base.sf(GRID) + 1e-15)
    np.testing.assert_array_less(base.sf(GRID), po_transform(a_large, base).sf(GRID) + 1e-15)


@given(st.floats(0.05, 20.0))
def test_po_failure_odds_scale_by_inverse_alpha(alpha):
    # S1 = aS/(1 - (1-a)S) gives F1 = F/(1 - (1-a)S), so F1/S1 = (F/S)/a
    base = Weibull(1.3, 1.0)
    m = po_transform(alpha, base)
    odds_base = base.cdf(GRID) / base.sf(GRID)
    odds_linked = m.cdf(GRID) / m.sf(GRID)
    np.testing.assert_allclose(odds_linked, odds_base / alpha, rtol=1e-10)


@given(st.floats(0.1, 10.0), st.floats(0.1, 10.0))
def test_po_composition(a1, a2):
    base = Exponential(0.7)
    inner = po_transform(a1, base)
    twice = po_transform(a2, inner)
    once = po_transform(a1 * a2, base)
    np.testing.assert_allclose(twice.sf(GRID), once.sf(GRID), rtol=1e-12)


@given(st.sampled_from(["probit", "logit", "laplace", "gumbel"]), st.floats(-2.0, 2.0))
def test_gll_group_property(kind, theta):
    link = real_link(kind)
    base = Normal(0.0, 1.5)
    back = gll_transform(link, -theta, gll_transform(link, theta, base))
    x = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(back.cdf(x), base.cdf(x), atol=1e-10)


LINKED = [
    po_transform(4.0, Weibull(2.0, 1.0)),
    piecewise_uniform_transform(0.2, Exponential(1.0)),
    power_transform(0.5, Exponential(2.0)),
    gll_transform(real_link("student_t", 4.0), 1.0, Normal()),
    gll_transform(real_link("gumbel"), -0.7, Logistic()),
    gll_transform(asymmetric_pw_density(0.16, 2.0, 2.5, 2.0), 0.16, Normal()),
]


@pytest.mark.parametrize("m", LINKED, ids=lambda m: m.family)
def test_linked_models_are_valid_distributions(m):
    lo, hi = m.support
    val, _ = integrate_adaptive(m.pdf, lo, hi, DEFAULT_QUADRATURE.replace(scale=m.typical_scale),
                                points=[b for b in m.breakpoints if lo < b < hi])
    assert val == pytest.approx(1.0, abs=1e-8)
    x = m.ppf(np.linspace(0.01, 0.99, 50))
    assert np.all(np.diff(m.cdf(x)) >= 0)
    np.testing.assert_allclose(m.cdf(x), np.linspace(0.01, 0.99, 50), atol=1e-8)


def test_linked_model_rejects_shift_on_unit_link():
    with pytest.raises(InvalidParam):
        LinkedModel(Exponential(), uniform_link(), 1.0)


def test_power_link_rejects_nonpositive():
    with pytest.raises(InvalidParam):
        PowerLink(0.0)
