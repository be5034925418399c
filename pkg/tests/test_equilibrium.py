import math

import numpy as np
import pytest
from scipy.special import gamma

from symdiv.distributions import Exponential, LogLogistic, Normal, Uniform, Weibull
from symdiv.divergence import kl_generic, kl_po_null
from symdiv.equilibrium import (
    crkl,
    crkl_symmetry_defect,
    ed_link_parent,
    equilibrium_of,
    scaled_survival_divergence,
)
from symdiv.exceptions import ConstraintViolated, DivergentMean, InvalidParam, SupportMismatch
from symdiv.links import POLink, PiecewiseUniformLink, PowerLink, uniform_link

# mpmath values from tests/oracles/compute_oracles.py
ED_KL_PO2_EXP = 0.0794415416798359
CRKL_PO2_FORWARD = 0.545177444479562
CRKL_PO2_REVERSE = 0.386294361119891

X = np.linspace(0.0, 6.0, 31)


def po_ed_parent_survival(x, alpha):
    return alpha**2 * np.exp(-x) / (1 - (1 - alpha) * np.exp(-x)) ** 2


def test_exponential_is_its_own_equilibrium():
    e = equilibrium_of(Exponential(2.0))
    assert e.mean == pytest.approx(0.5, rel=1e-12)
    np.testing.assert_allclose(e.ed.pdf(X), Exponential(2.0).pdf(X), rtol=1e-10)
    np.testing.assert_allclose(e.ed.sf(X), Exponential(2.0).sf(X), rtol=1e-9, atol=1e-15)


def test_uniform_equilibrium_density():
    e = equilibrium_of(Uniform(0.0, 1.0))
    u = np.linspace(0.0, 1.0, 11)
    np.testing.assert_allclose(e.ed.pdf(u), 2 * (1 - u), atol=1e-14)


def test_weibull_equilibrium_density():
    e = equilibrium_of(Weibull(2.0, 1.0))
    np.testing.assert_allclose(e.ed.pdf(X), np.exp(-X**2) / gamma(1.5), rtol=1e-9)


def test_infinite_mean_is_rejected():
    with pytest.raises(DivergentMean):
        equilibrium_of(LogLogistic(1.0, 1.0))


def test_real_line_support_is_rejected():
    with pytest.raises(SupportMismatch):
        equilibrium_of(Normal())


def test_uniform_link_parent_is_base():
    base = Weibull(1.5, 1.0)
    parent, mu1 = ed_link_parent(uniform_link(), base)
    np.testing.assert_allclose(parent.sf(X), base.sf(X), rtol=1e-12)
    assert mu1 == pytest.approx(equilibrium_of(base).mean, rel=1e-12)


@pytest.mark.parametrize("alpha", [0.3, 1.0, 2.0])
def test_po_parent_closed_form(alpha):
    parent, mu1 = ed_link_parent(POLink(alpha), Exponential(1.0))
    np.testing.assert_allclose(parent.sf(X), po_ed_parent_survival(X, alpha), rtol=1e-8, atol=1e-15)
    assert mu1 == pytest.approx(alpha * 1.0, rel=1e-8)


def test_po_parent_mean_by_quadrature():
    parent, mu1 = ed_link_parent(POLink(2.0), Exponential(1.0))
    assert mu1 == pytest.approx(2.0, rel=1e-12)
    from symdiv.numerics import model_mean_via_survival

    assert model_mean_via_survival(parent) == pytest.approx(2.0, rel=1e-8)


def test_steep_po_tilt_gives_invalid_parent():
    with pytest.raises(ConstraintViolated):
        ed_link_parent(POLink(5.0), Exponential(1.0))


def test_discontinuous_link_rejected():
    with pytest.raises(InvalidParam):
        ed_link_parent(PiecewiseUniformLink(0.3), Exponential(1.0))


@pytest.mark.parametrize(
    "link, base",
    [
        (POLink(0.5), Exponential(1.0)),
        (POLink(2.0), Exponential(1.0)),
        (PowerLink(0.6), Exponential(1.0)),
        (POLink(0.5), Weibull(1.7, 2.0)),
        (PowerLink(1.5), Weibull(0.8, 2.0)),
    ],
    ids=repr,
)
def test_parent_round_trip_and_mean_relation(link, base):
    parent, mu1 = ed_link_parent(link, base)
    e2 = equilibrium_of(base)
    assert mu1 * float(link.pdf(1.0)) == pytest.approx(e2.mean, rel=1e-12)
    e1 = equilibrium_of(parent)
    assert e1.mean == pytest.approx(mu1, rel=1e-7)
    x = np.asarray(base.ppf(np.linspace(0.02, 0.98, 15)))
    np.testing.assert_allclose(e1.ed.sf(x), link.cdf(e2.ed.sf(x)), atol=1e-6)


class TestScaledSurvivalDivergence:
    def test_identical(self):
        assert scaled_survival_divergence(Weibull(2.0), Weibull(2.0)).value == pytest.approx(0.0, abs=1e-14)

    def test_exponential_pair(self):
        assert scaled_survival_divergence(Exponential(1.0), Exponential(2.0)).value == pytest.approx(
            0.306852819440055, abs=1e-10
        )

    def test_po_linked_pair_is_symmetric(self):
        parent, _ = ed_link_parent(POLink(2.0), Exponential(1.0))
        fwd = scaled_survival_divergence(parent, Exponential(1.0)).value
        rev = scaled_survival_divergence(Exponential(1.0), parent).value
        assert fwd == pytest.approx(ED_KL_PO2_EXP, abs=1e-8)
        assert rev == pytest.approx(ED_KL_PO2_EXP, abs=1e-8)
        assert fwd == pytest.approx(kl_po_null(math.log(2.0)), abs=1e-8)

    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("q", [0.5, 1.0, 2.0])
    def test_identity_with_equilibrium_densities(self, seed, q):
        rng = np.random.default_rng(seed)
        # p2 gets the heavier tail so that every order in the grid is finite
        k2 = rng.uniform(0.8, 2.0)
        p1 = Weibull(k2 + rng.uniform(0.2, 1.0), rng.uniform(0.5, 2.0))
        p2 = Weibull(k2, rng.uniform(0.5, 2.0))
        direct = scaled_survival_divergence(p1, p2, q).value
        via_ed = kl_generic(equilibrium_of(p1).ed, equilibrium_of(p2).ed, q).value
        assert direct == pytest.approx(via_ed, abs=1e-6)


class TestCumulativeResidual:
    def test_identical(self):
        assert crkl(Exponential(1.0), Exponential(1.0)) == pytest.approx(0.0, abs=1e-14)

    def test_exponential_pair(self):
        assert crkl(Exponential(1.0), Exponential(2.0)) == pytest.approx(0.5, abs=1e-10)

    def test_po_linked_pair(self):
        parent, mu1 = ed_link_parent(POLink(2.0), Exponential(1.0))
        fwd = crkl(parent, Exponential(1.0))
        rev = crkl(Exponential(1.0), parent)
        assert fwd == pytest.approx(CRKL_PO2_FORWARD, abs=1e-8)
        assert rev == pytest.approx(CRKL_PO2_REVERSE, abs=1e-8)
        defect = crkl_symmetry_defect(POLink(2.0))
        assert abs(defect) > 1e-3
        assert fwd - rev == pytest.approx(mu1 * defect, abs=1e-8)

    def test_uniform_link_has_no_defect(self):
        assert crkl_symmetry_defect(uniform_link()) == pytest.approx(0.0, abs=1e-14)
