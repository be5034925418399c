"""Equilibrium distributions and divergences between scaled survival functions.

The equilibrium distribution (ED) of a nonnegative lifetime with survival
``S`` and mean ``mu`` has density ``S(x)/mu``. Divergences between two
scaled survival functions ``S_i/mu_i`` are therefore divergences between
EDs, and a unit link applied to the EDs (``S1^e = G(S2^e)``) pins down the
parent of the first model.
"""

from __future__ import annotations

import math
from typing import Optional, Tuple

import numpy as np

from .distributions import UnivariateModel, _arr, _ret
from .divergence import (
    DivergenceResult,
    _check_q,
    _finish,
    _kl_density,
    _log_integral_to_renyi,
    _renyi_density,
    renyi_unit_link,
)
from .exceptions import (
    ConstraintViolated,
    DegenerateLink,
    DivergentMean,
    InvalidParam,
    NonConvergent,
    SupportMismatch,
)
from .links import UnitLink
from .numerics import DEFAULT_QUADRATURE, QuadratureSpec, integrate_adaptive, model_mean_via_survival

__all__ = [
    "EquilibriumDistribution",
    "EquilibriumModel",
    "equilibrium_of",
    "EDLinkParent",
    "ed_link_parent",
    "scaled_survival_divergence",
    "crkl",
    "crkl_symmetry_defect",
]


def _require_lifetime(m: UnivariateModel):
    if m.support[0] != 0.0:
        raise SupportMismatch(f"equilibrium transforms need support starting at 0, got {m.support}")


class EquilibriumDistribution(UnivariateModel):
    """Density ``S(x)/mu`` of the parent's equilibrium distribution."""

    def __init__(self, parent: UnivariateModel, mean: float):
        self.parent = parent
        self.mu = float(mean)
        self._log_mu = math.log(self.mu)
        self.support = parent.support
        self.breakpoints = tuple(parent.breakpoints)
        self.family = f"equilibrium({parent.family})"
        self._freeze()

    def __repr__(self):
        return f"EquilibriumDistribution({self.parent!r})"

    @property
    def params(self):
        return self.parent.params

    @property
    def typical_scale(self):
        return self.parent.typical_scale

    def logpdf(self, x):
        x = _arr(x)
        with np.errstate(divide="ignore"):
            out = np.asarray(self.parent.logsf(x), dtype=float) - self._log_mu
        return _ret(x, np.where(x < 0, -np.inf, out))

    def pdf(self, x):
        x = _arr(x)
        return _ret(x, np.where(x < 0, 0.0, np.asarray(self.parent.sf(x), dtype=float) / self.mu))

    def sf(self, x):
        """``int_x^inf S(t) dt / mu`` by quadrature."""
        x = _arr(x)
        spec = DEFAULT_QUADRATURE.replace(scale=self.typical_scale)
        out = np.empty(x.shape)
        for idx, xv in np.ndenumerate(x):
            if xv <= 0:
                out[idx] = 1.0
                continue
            pts = [b for b in self.breakpoints if b > xv]
            val, _ = integrate_adaptive(self.parent.sf, xv, np.inf, spec, points=pts)
            out[idx] = min(val / self.mu, 1.0)
        return _ret(x, out)

    def mean(self):
        # E[X_e] = E[X^2] / (2 mu) = int_0^inf x S(x) dx / mu
        spec = DEFAULT_QUADRATURE.replace(scale=self.typical_scale)
        val, _ = integrate_adaptive(lambda t: t * self.parent.sf(t), 0.0, np.inf, spec, points=self.breakpoints)
        return val / self.mu


class EquilibriumModel:
    """A lifetime model together with its mean and equilibrium distribution."""

    def __init__(self, parent: UnivariateModel, mean: Optional[float] = None):
        _require_lifetime(parent)
        if mean is None:
            mean = model_mean_via_survival(parent)
        mean = float(mean)
        if not (mean > 0 and math.isfinite(mean)):
            raise DivergentMean(f"mean must be positive and finite, got {mean}")
        self.parent = parent
        self.mean = mean
        self.ed = EquilibriumDistribution(parent, mean)

    def __repr__(self):
        return f"EquilibriumModel({self.parent!r}, mean={self.mean:.6g})"


def equilibrium_of(parent: UnivariateModel) -> EquilibriumModel:
    """Wrap ``parent`` with its mean and equilibrium distribution.

    Raises :class:`DivergentMean` if the mean is infinite.
    """
    return EquilibriumModel(parent)


class EDLinkParent(UnivariateModel):
    """Parent whose ED is ``G(S2^e)``: ``S1(x) = S2(x) g(S2^e(x)) / g(1)``."""

    def __init__(self, link: UnitLink, base: EquilibriumModel):
        self.link = link
        self.base = base
        self.g1 = float(link.pdf(1.0))
        self.support = base.parent.support
        self.breakpoints = tuple(base.parent.breakpoints)
        self.family = f"ed_{link.kind}({base.parent.family})"
        self._freeze()

    def __repr__(self):
        return f"EDLinkParent({self.link!r}, {self.base.parent!r})"

    @property
    def params(self):
        return tuple(self.link.params) + tuple(self.base.parent.params)

    @property
    def typical_scale(self):
        return self.base.parent.typical_scale

    def sf(self, x):
        x = _arr(x)
        s2 = np.asarray(self.base.parent.sf(x), dtype=float)
        u = np.asarray(self.base.ed.sf(x), dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = s2 * self.link.pdf(u) / self.g1
        # far tail where S2e underflowed: g(0) may be infinite but S1 is negligible
        return _ret(x, np.where(u > 0, out, 0.0))

    def pdf(self, x):
        # -d/dx [S2 g(S2e)] = f2 g(S2e) + S2^2 g'(S2e) / mu2
        x = _arr(x)
        p = self.base.parent
        s2 = np.asarray(p.sf(x), dtype=float)
        f2 = np.asarray(p.pdf(x), dtype=float)
        u = np.asarray(self.base.ed.sf(x), dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = (f2 * self.link.pdf(u) + s2 * s2 * self.link.dpdf(u) / self.base.mean) / self.g1
        return _ret(x, np.where((x < 0) | (u <= 0), 0.0, out))

    def mean(self):
        return self.base.mean / self.g1


def ed_link_parent(link: UnitLink, base, *, check_grid: int = 201) -> Tuple[EDLinkParent, float]:
    """Parent model whose ED is the link transform of the base's ED.

    Returns ``(parent, mu1)`` with ``mu1 = mu2 / g(1)``. The implied density
    is checked on ``check_grid`` base quantiles; links that would make it
    negative raise :class:`ConstraintViolated`.
    """
    if not getattr(link, "continuous_density", True):
        raise InvalidParam(f"{link!r} has a discontinuous density; the implied parent is not a survival function")
    g1 = float(link.pdf(1.0))
    if not (g1 > 0 and math.isfinite(g1)):
        raise DegenerateLink(f"link density at 1 is {g1}; need a positive finite value")
    if not isinstance(base, EquilibriumModel):
        base = equilibrium_of(base)
    parent = EDLinkParent(link, base)
    if check_grid:
        probs = np.linspace(0.0, 1.0, check_grid + 2)[1:-1]
        xs = np.asarray(base.parent.isf(probs), dtype=float)
        dens = np.asarray(parent.pdf(xs), dtype=float)
        if np.any(dens < -1e-12):
            worst = xs[np.argmin(dens)]
            raise ConstraintViolated(
                f"{link!r} on {base.parent!r} implies a negative parent density (at x={worst:.4g}); "
                "S2 g(S2^e)/g(1) is not a survival function"
            )
    return parent, base.mean / g1


def _as_equilibrium(m) -> EquilibriumModel:
    return m if isinstance(m, EquilibriumModel) else equilibrium_of(m)


def scaled_survival_divergence(
    p1,
    p2,
    q: float = 1.0,
    *,
    spec: Optional[QuadratureSpec] = None,
) -> DivergenceResult:
    """Renyi divergence of order ``q`` between ``S1/mu1`` and ``S2/mu2``.

    At ``q = 1`` this is ``int S1 log(S1/S2) / mu1 - log(mu1/mu2)``. The
    integrands are built from the parents' survival functions, not from
    the ED objects, so comparing against :func:`~symdiv.divergence.kl_generic`
    on ``p.ed`` is a genuine cross-check.
    """
    q = _check_q(q)
    e1, e2 = _as_equilibrium(p1), _as_equilibrium(p2)
    s1, s2 = e1.parent, e2.parent
    mu1, mu2 = e1.mean, e2.mean
    scale = max(s1.typical_scale, s2.typical_scale)
    spec = (spec or DEFAULT_QUADRATURE).replace(scale=scale)
    points = sorted(set(s1.breakpoints) | set(s2.breakpoints))

    if q == 1.0:

        def integrand(x):
            return _kl_density(s1.logsf(x), s2.logsf(x))

        val, err = integrate_adaptive(integrand, 0.0, np.inf, spec, points=points)
        value = val / mu1 - math.log(mu1 / mu2)
        return _finish(value, err / mu1, q, "forward", "quadrature")

    log_mu1, log_mu2 = math.log(mu1), math.log(mu2)

    def integrand(x):
        return _renyi_density(np.asarray(s1.logsf(x)) - log_mu1, np.asarray(s2.logsf(x)) - log_mu2, q)

    integral, err = integrate_adaptive(integrand, 0.0, np.inf, spec, points=points)
    value, err = _log_integral_to_renyi(integral, err, q)
    return _finish(value, err, q, "forward", "quadrature")


def crkl(p1, p2, *, spec: Optional[QuadratureSpec] = None) -> float:
    """Cumulative residual KL ``int [S1 log(S1/S2) + S2 - S1] dx``.

    Equal to ``int S1 log(S1/S2) + mu2 - mu1``; the terms are integrated
    jointly so that two large means do not cancel.
    """
    m1 = p1.parent if isinstance(p1, EquilibriumModel) else p1
    m2 = p2.parent if isinstance(p2, EquilibriumModel) else p2
    _require_lifetime(m1)
    _require_lifetime(m2)
    scale = max(m1.typical_scale, m2.typical_scale)
    spec = (spec or DEFAULT_QUADRATURE).replace(scale=scale)
    points = sorted(set(m1.breakpoints) | set(m2.breakpoints))

    def integrand(x):
        a = np.asarray(m1.sf(x), dtype=float)
        b = np.asarray(m2.sf(x), dtype=float)
        return _kl_density(m1.logsf(x), m2.logsf(x)) + b - a

    try:
        val, _ = integrate_adaptive(integrand, 0.0, np.inf, spec, points=points)
    except NonConvergent as exc:
        raise DivergentMean(f"cumulative residual divergence did not converge: {exc}") from exc
    return max(val, 0.0)


def crkl_symmetry_defect(link: UnitLink, *, spec: Optional[QuadratureSpec] = None) -> float:
    """``K(g:g*) - g(1) K(g*:g) - 2[1 - g(1)] - [1 + g(1)] log g(1)``.

    Under ``S1^e = G(S2^e)`` the two cumulative residual divergences differ by
    ``mu1`` times this quantity, so a zero defect would make them symmetric.
    """
    g1 = float(link.pdf(1.0))
    if not (g1 > 0 and math.isfinite(g1)):
        raise DegenerateLink(f"link density at 1 is {g1}")
    forward = renyi_unit_link(link, 1.0, "forward", spec=spec).value
    reverse = renyi_unit_link(link, 1.0, "reverse", spec=spec).value
    return forward - g1 * reverse - 2.0 * (1.0 - g1) - (1.0 + g1) * math.log(g1)
