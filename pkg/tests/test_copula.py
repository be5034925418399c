import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from symdiv.copula import (
    FGMCopula,
    GaussianCopula,
    IndependentCopula,
    check_dependence_symmetry,
    copula_density,
    dependence_divergence,
    make_copula,
    normalized_dependence_index,
)
from symdiv.exceptions import InvalidParam, OutOfDomain
from symdiv.numerics import integrate_adaptive

# mpmath values from tests/oracles/compute_oracles.py
GAUSS_MI_06 = 0.22314355131421
GAUSS_KHALF_06 = 0.128832871842968
GAUSS_INDEX_06 = 0.120879120879121
FGM05_FORWARD = 0.014108815011278
FGM05_REVERSE = 0.0145740141691221


def test_densities():
    assert copula_density(IndependentCopula(), 0.3, 0.9) == 1.0
    assert copula_density(FGMCopula(0.5), 0.0, 0.0) == pytest.approx(1.5)
    assert copula_density(GaussianCopula(0.6), 0.5, 0.5) == pytest.approx(1.25, rel=1e-14)


def test_out_of_domain():
    with pytest.raises(OutOfDomain):
        copula_density(FGMCopula(0.2), 1.2, 0.5)


@pytest.mark.parametrize("bad", [("fgm", 1.5), ("gaussian", 1.0), ("clayton", 2.0)])
def test_invalid_parameters(bad):
    with pytest.raises(InvalidParam):
        make_copula(*bad)


@pytest.mark.parametrize("cop", [FGMCopula(-0.7), FGMCopula(0.5), GaussianCopula(0.6), GaussianCopula(-0.3)], ids=repr)
@pytest.mark.parametrize("u", [0.1, 0.5, 0.83])
def test_marginals_are_uniform(cop, u):
    val, _ = integrate_adaptive(lambda v: cop.density(u, v), 0.0, 1.0)
    assert val == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("q", [0.5, 1.0, 2.0])
def test_independence_has_zero_divergence(q):
    assert dependence_divergence(IndependentCopula(), q).value == 0.0
    assert check_dependence_symmetry(IndependentCopula(), (q,)).defect == 0.0


def test_gaussian_mutual_information():
    r = dependence_divergence(GaussianCopula(0.6), 1.0)
    assert r.value == pytest.approx(-0.5 * math.log(1 - 0.36), abs=1e-12)
    assert r.value == pytest.approx(GAUSS_MI_06, abs=1e-10)


def test_gaussian_reverse_kl_is_larger():
    rev = dependence_divergence(GaussianCopula(0.6), 1.0, "reverse").value
    # -E[log c] under independence: 0.5 log(1 - rho^2) + rho^2 / (1 - rho^2)
    assert rev == pytest.approx(0.5 * math.log(0.64) + 0.36 / 0.64, abs=1e-10)
    rep = check_dependence_symmetry(GaussianCopula(0.6), (1.0,))
    assert rep.verdict == "asymmetric" and abs(rep.defect) > 1e-4


def test_fgm_kl_is_asymmetric():
    fwd = dependence_divergence(FGMCopula(0.5), 1.0).value
    rev = dependence_divergence(FGMCopula(0.5), 1.0, "reverse").value
    assert fwd == pytest.approx(FGM05_FORWARD, abs=1e-10)
    assert rev == pytest.approx(FGM05_REVERSE, abs=1e-10)
    assert abs(fwd - rev) > 1e-4
    assert not check_dependence_symmetry(FGMCopula(0.5), (1.0,)).symmetric


def test_half_order_value_and_index():
    assert dependence_divergence(GaussianCopula(0.6), 0.5).value == pytest.approx(GAUSS_KHALF_06, abs=1e-9)
    idx = normalized_dependence_index(GaussianCopula(0.6))
    assert 0.0 < idx < 1.0
    assert idx == pytest.approx(GAUSS_INDEX_06, abs=1e-9)
    assert normalized_dependence_index(IndependentCopula()) == 0.0


def test_index_grows_with_correlation():
    assert normalized_dependence_index(GaussianCopula(0.8)) > normalized_dependence_index(GaussianCopula(0.4))


@given(st.one_of(st.floats(-0.95, 0.95).map(GaussianCopula), st.floats(-1.0, 1.0).map(FGMCopula)))
def test_half_order_is_direction_free(cop):
    fwd = dependence_divergence(cop, 0.5, "forward").value
    rev = dependence_divergence(cop, 0.5, "reverse").value
    assert fwd == pytest.approx(rev, abs=1e-8)


@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99), st.floats(-0.9, 0.9), st.floats(-1, 1))
def test_exchangeable(u, v, rho, theta):
    for cop in (GaussianCopula(rho), FGMCopula(theta)):
        assert cop.density(u, v) == pytest.approx(cop.density(v, u), rel=1e-14)
