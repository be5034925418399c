import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from symdiv.distributions import (
    Exponential,
    Gumbel,
    Laplace,
    Logistic,
    LogLogistic,
    Normal,
    PiecewiseExponential,
    StudentT,
    Uniform,
    Weibull,
    make_model,
)
from symdiv.exceptions import InvalidParam, NonConvergent, NonFinite, NoSignChange
from symdiv.links import PiecewiseUniformLink
from symdiv.numerics import (
    DEFAULT_QUADRATURE,
    QuadratureSpec,
    find_root,
    integrate_2d,
    integrate_adaptive,
    model_mean_via_survival,
    scan_roots,
)

FAMILIES = [
    Exponential(2.0),
    Weibull(2.0, 1.0),
    Weibull(0.7, 2.0),
    Logistic(0.5, 2.0),
    Normal(-1.0, 0.5),
    Laplace(0.0, 1.5),
    StudentT(4.0),
    Gumbel(0.0, 1.0),
    LogLogistic(2.0, 1.0),
    PiecewiseExponential([1.0, 0.5, 2.0], [1.0, 2.5]),
    Uniform(0.0, 3.0),
]


def test_constant_integrand():
    val, err = integrate_adaptive(lambda x: np.ones_like(x), 0.0, 1.0)
    assert val == pytest.approx(1.0, abs=1e-14)
    assert err < 1e-12


def test_exponential_normalization_on_half_line():
    val, _ = integrate_adaptive(lambda x: np.exp(-x), 0.0, np.inf)
    assert val == pytest.approx(1.0, abs=1e-12)


def test_piecewise_uniform_entropy_with_jump_point():
    g = PiecewiseUniformLink(0.25)
    val, _ = integrate_adaptive(lambda u: g.pdf(u) * g.logpdf(u), 0.0, 1.0, points=[0.25])
    # mpmath oracle
    assert val == pytest.approx(0.549306144334055, abs=1e-12)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=6), st.floats(-3, 0), st.floats(0.1, 3))
def test_polynomials_up_to_degree_five_are_exact(coefs, a, width):
    b = a + width
    poly = np.polynomial.Polynomial(coefs)
    exact = poly.integ()(b) - poly.integ()(a)
    val, _ = integrate_adaptive(poly, a, b)
    assert val == pytest.approx(exact, abs=1e-12 * max(1.0, abs(exact)))


def test_doubly_infinite_gaussian():
    val, _ = integrate_adaptive(lambda x: np.exp(-0.5 * x * x), -np.inf, np.inf)
    assert val == pytest.approx(math.sqrt(2 * math.pi), rel=1e-12)


def test_unordered_limits_rejected():
    with pytest.raises(InvalidParam):
        integrate_adaptive(np.sin, 2.0, 0.0)


def test_non_finite_integrand_raises():
    with pytest.raises(NonFinite):
        integrate_adaptive(lambda x: np.where(x > 0.5, np.nan, 1.0), 0.0, 1.0)


def test_subdivision_budget_exhausted():
    spec = DEFAULT_QUADRATURE.replace(max_subdivisions=3)
    with pytest.raises(NonConvergent):
        integrate_adaptive(lambda x: np.sin(1.0 / x), 1e-6, 1.0, spec)


def test_spec_validation():
    with pytest.raises(InvalidParam):
        QuadratureSpec(rel_tol=-1.0)


def test_integrate_2d_product():
    val, _ = integrate_2d(lambda x, y: x * y * y, (0.0, 1.0), (0.0, 2.0))
    assert val == pytest.approx(0.5 * 8.0 / 3.0, rel=1e-12)


def test_scan_roots_odd_function_has_only_zero():
    roots = scan_roots(lambda m: np.exp(m) - np.exp(-m) - 2 * m, (-10.0, 10.0))
    assert len(roots) == 1
    assert abs(roots[0]) < 1e-8


def test_find_root_linear():
    assert find_root(lambda x: x - 1.0, (0.0, 2.0)) == pytest.approx(1.0, abs=1e-14)


def test_find_root_no_sign_change():
    with pytest.raises(NoSignChange):
        find_root(lambda x: x * x + 1.0, (-1.0, 1.0))


def test_normal_quantile_by_root_finding():
    n = Normal()
    x = find_root(lambda t: n.cdf(t) - 0.975, (0.0, 5.0))
    # mpmath oracle
    assert x == pytest.approx(1.95996398454005, abs=1e-9)
    assert n.ppf(0.975) == pytest.approx(1.95996398454005, abs=1e-9)


@pytest.mark.parametrize(
    "model, expected",
    [
        (Exponential(2.0), 0.5),
        # mpmath oracle, Gamma(1.5)
        (Weibull(2.0, 1.0), 0.886226925452758),
    ],
)
def test_mean_via_survival(model, expected):
    assert model_mean_via_survival(model) == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize("model", FAMILIES, ids=lambda m: m.family)
def test_density_integrates_to_one(model):
    lo, hi = model.support
    val, _ = integrate_adaptive(model.pdf, lo, hi, DEFAULT_QUADRATURE.replace(scale=model.typical_scale),
                                points=[b for b in model.breakpoints if lo < b < hi])
    assert val == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("model", FAMILIES, ids=lambda m: m.family)
def test_quantile_inverts_cdf(model):
    probs = np.linspace(0.01, 0.99, 25)
    x = model.ppf(probs)
    np.testing.assert_allclose(model.cdf(x), probs, atol=1e-8)
    back = model.ppf(model.cdf(x))
    assert np.all(np.abs(back - x) <= 1e-8 * np.maximum(1.0, np.abs(x)))


@pytest.mark.parametrize("model", FAMILIES, ids=lambda m: m.family)
def test_cdf_monotone_and_complements_survival(model):
    x = model.ppf(np.linspace(0.001, 0.999, 200))
    cdf = model.cdf(x)
    assert np.all(np.diff(cdf) >= 0)
    np.testing.assert_allclose(model.sf(x), 1.0 - cdf, atol=1e-12)
    lo, hi = model.support
    assert model.cdf(lo) == pytest.approx(0.0, abs=1e-12)
    assert model.cdf(hi) == pytest.approx(1.0, abs=1e-12)


def test_make_model_unknown_family():
    with pytest.raises(InvalidParam):
        make_model("cauchy", 1.0)
