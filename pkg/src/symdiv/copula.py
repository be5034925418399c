"""Dependence divergence through copula densities.

The divergence between a bivariate density and the product of its
marginals equals the divergence between its copula density ``c`` and the
independence copula ``c* = 1``, so everything here is an integral of a
function of ``c`` over the unit square.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np
from scipy import special

from .divergence import (
    DivergenceResult,
    SymmetryReport,
    _both_directions,
    _check_direction,
    _check_q,
    _finish,
    _grid,
    _log_integral_to_renyi,
    _symmetry_report,
)
from .exceptions import InvalidParam, NonConvergent, NonFinite, OutOfDomain
from .numerics import DEFAULT_QUADRATURE, QuadratureSpec, integrate_2d

__all__ = [
    "CopulaModel",
    "IndependentCopula",
    "GaussianCopula",
    "FGMCopula",
    "make_copula",
    "copula_density",
    "dependence_divergence",
    "check_dependence_symmetry",
    "normalized_dependence_index",
]


class CopulaModel:
    """Bivariate density on the unit square with uniform marginals."""

    family = "copula"

    @property
    def params(self):
        return ()

    def __repr__(self):
        return f"{type(self).__name__}({', '.join(f'{p:g}' for p in self.params)})"

    def logdensity(self, u, v):
        raise NotImplementedError

    def density(self, u, v):
        return np.exp(self.logdensity(u, v))

    def _integrate(self, h, spec):
        """``int int h(log c, 0) du dv`` over the unit square.

        ``h(lc, lw)`` receives the log density and the log of the measure's
        own density (zero here), so that subclasses can change coordinates.
        """
        return integrate_2d(lambda u, v: h(self.logdensity(u, v), 0.0), (0.0, 1.0), (0.0, 1.0), spec)


class IndependentCopula(CopulaModel):
    family = "independent"

    def logdensity(self, u, v):
        return np.zeros(np.broadcast(np.asarray(u), np.asarray(v)).shape)


class FGMCopula(CopulaModel):
    """Farlie-Gumbel-Morgenstern copula ``c = 1 + theta (1 - 2u)(1 - 2v)``."""

    family = "fgm"

    def __init__(self, theta: float):
        theta = float(theta)
        if not -1.0 <= theta <= 1.0:
            raise InvalidParam(f"FGM theta must lie in [-1, 1], got {theta}")
        self.theta = theta

    @property
    def params(self):
        return (self.theta,)

    def density(self, u, v):
        u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
        return 1.0 + self.theta * (1.0 - 2.0 * u) * (1.0 - 2.0 * v)

    def logdensity(self, u, v):
        with np.errstate(divide="ignore"):
            return np.log(self.density(u, v))


class GaussianCopula(CopulaModel):
    """Gaussian copula with correlation ``rho``.

    Integrals are taken in normal-score coordinates ``(a, b) = (Phi^-1(u), Phi^-1(v))``,
    where the density is smooth; on the unit square it is unbounded at two corners.
    """

    family = "gaussian"

    def __init__(self, rho: float):
        rho = float(rho)
        if not -1.0 < rho < 1.0:
            raise InvalidParam(f"gaussian copula rho must lie in (-1, 1), got {rho}")
        self.rho = rho
        self._one_minus = 1.0 - rho * rho

    @property
    def params(self):
        return (self.rho,)

    def _log_from_scores(self, a, b):
        r = self.rho
        quad = (r * r * (a * a + b * b) - 2.0 * r * a * b) / (2.0 * self._one_minus)
        return -0.5 * math.log(self._one_minus) - quad

    def logdensity(self, u, v):
        a = special.ndtri(np.asarray(u, dtype=float))
        b = special.ndtri(np.asarray(v, dtype=float))
        with np.errstate(invalid="ignore"):
            out = self._log_from_scores(a, b)
        return np.where(np.isnan(out), -np.inf, out)

    def _integrate(self, h, spec):
        log_phi = -0.5 * math.log(2 * math.pi)

        def f(a, b):
            return h(self._log_from_scores(a, b), 2 * log_phi - 0.5 * (a * a + b * b))

        return integrate_2d(f, (-np.inf, np.inf), (-np.inf, np.inf), spec, points_x=(0.0,), points_y=(0.0,))


def make_copula(family: str, *params: float) -> CopulaModel:
    if family == "independent":
        return IndependentCopula()
    if family == "gaussian":
        return GaussianCopula(*params)
    if family == "fgm":
        return FGMCopula(*params)
    raise InvalidParam(f"unknown copula family {family!r}; choose independent, gaussian or fgm")


def copula_density(cop: CopulaModel, u, v):
    """Evaluate ``c(u, v)``; points outside the closed unit square raise :class:`OutOfDomain`."""
    ua, va = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    if np.any(~((ua >= 0) & (ua <= 1))) or np.any(~((va >= 0) & (va <= 1))):
        raise OutOfDomain("copula arguments must lie in [0, 1]")
    out = np.asarray(cop.density(ua, va), dtype=float)
    return float(out) if out.ndim == 0 else out


def dependence_divergence(
    cop: CopulaModel,
    q: float = 1.0,
    direction: str = "forward",
    *,
    spec: Optional[QuadratureSpec] = None,
) -> DivergenceResult:
    """Renyi divergence between ``c`` and the independence copula.

    ``forward`` is ``K_q(c : c*)`` (``-H(c)`` at ``q = 1``); ``reverse`` is
    ``K_q(c* : c)`` (``-E*[log c]`` at ``q = 1``).
    """
    q = _check_q(q)
    _check_direction(direction)
    if isinstance(cop, IndependentCopula):
        return DivergenceResult(0.0, q, direction, "closed_form", 0.0)
    spec = spec or DEFAULT_QUADRATURE.replace(rel_tol=1e-9)
    if q == 1.0:
        if direction == "forward":

            def h(lc, lw):
                w = np.exp(lc + lw)
                return np.where(w == 0, 0.0, w * lc)

        else:

            def h(lc, lw):
                w = np.exp(lw)
                return np.where(w == 0, 0.0, -lc * w)

        value, err = _guarded(cop, h, spec)
        return _finish(value, err, q, direction, "quadrature")

    power = q if direction == "forward" else 1.0 - q

    def h(lc, lw):
        with np.errstate(over="ignore", invalid="ignore"):
            out = np.exp(power * lc + lw)
        return np.where(np.isnan(out), 0.0, out)

    integral, err = _guarded(cop, h, spec)
    value, err = _log_integral_to_renyi(integral, err, q)
    return _finish(value, err, q, direction, "quadrature")


def _guarded(cop, h, spec):
    try:
        return cop._integrate(h, spec)
    except NonFinite as exc:
        raise NonConvergent(f"dependence integral diverges for {cop!r}: {exc}") from exc


def check_dependence_symmetry(
    cop: CopulaModel,
    q_grid: Sequence[float] = (1.0,),
    tol: float = 1e-6,
    *,
    spec: Optional[QuadratureSpec] = None,
) -> SymmetryReport:
    """Test ``K_q(c : c*) == K_q(c* : c)`` on a grid of orders (``H(c) = E*[log c]`` at ``q = 1``)."""
    grid = _grid(q_grid)
    pairs = [_both_directions(lambda q, d: dependence_divergence(cop, q, d, spec=spec), q) for q in grid]
    return _symmetry_report(pairs, grid, tol)


def normalized_dependence_index(cop: CopulaModel, *, spec: Optional[QuadratureSpec] = None) -> float:
    """``1 - exp(-K_{1/2}(c : c*))``, in ``[0, 1)`` and zero only under independence."""
    k_half = dependence_divergence(cop, 0.5, spec=spec).value
    return -math.expm1(-k_half)
