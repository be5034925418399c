"""Link functions and the models they generate.

Two kinds of link are supported:

* :class:`UnitLink` -- a CDF ``G`` on ``[0, 1]`` applied to a survival
  function, ``S1(x) = G(S2(x))`` (proportional odds, piecewise uniform,
  power/proportional hazards, or user supplied);
* :class:`RealLink` -- a CDF ``G`` on the real line used as a generalized
  location link, ``F1(x) = G(G^-1(F2(x)) + theta)``.

Both produce a :class:`LinkedModel`, which is itself a
:class:`~symdiv.distributions.UnivariateModel`.
"""

from __future__ import annotations

import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from .distributions import (
    Gumbel,
    Laplace,
    Logistic,
    Normal,
    StudentT,
    UnivariateModel,
    _arr,
    _positive,
    _ret,
)
from .exceptions import ConstraintViolated, InvalidParam, QuantileFailure, SupportMismatch

__all__ = [
    "UnitLink",
    "POLink",
    "PiecewiseUniformLink",
    "PowerLink",
    "CustomUnitLink",
    "uniform_link",
    "RealLink",
    "AsymmetricPiecewiseUniform",
    "real_link",
    "asymmetric_pw_density",
    "LinkedModel",
    "po_transform",
    "piecewise_uniform_transform",
    "power_transform",
    "survival_transform",
    "gll_transform",
]


# ---------------------------------------------------------------------------
# links on the unit interval
# ---------------------------------------------------------------------------


class UnitLink:
    """CDF ``G`` with density ``g`` on ``[0, 1]``."""

    kind = "custom"
    #: points in (0, 1) where g jumps
    jumps: Tuple[float, ...] = ()
    continuous_density = True

    @property
    def params(self) -> Tuple[float, ...]:
        return ()

    def __repr__(self):
        return f"{type(self).__name__}({', '.join(f'{p:g}' for p in self.params)})"

    def __eq__(self, other):
        return type(self) is type(other) and self.params == other.params and self.kind != "custom"

    def __hash__(self):
        return hash((type(self).__name__, self.params))

    def pdf(self, u):
        return _ret(u, np.exp(self.logpdf(_arr(u))))

    def logpdf(self, u):
        with np.errstate(divide="ignore"):
            return _ret(u, np.log(self.pdf(_arr(u))))

    def cdf(self, u):
        raise NotImplementedError

    def logcdf(self, u):
        with np.errstate(divide="ignore"):
            return _ret(u, np.log(self.cdf(_arr(u))))

    def complement(self, u, one_minus_u):
        """``1 - G(u)``; ``one_minus_u`` is supplied to keep precision near u=1."""
        return 1.0 - self.cdf(u)

    def ppf(self, y):
        raise NotImplementedError

    def dpdf(self, u):
        """Derivative of the link density."""
        u = _arr(u)
        h = 1e-6
        lo = np.clip(u - h, 0.0, 1.0)
        hi = np.clip(u + h, 0.0, 1.0)
        return _ret(u, (self.pdf(hi) - self.pdf(lo)) / (hi - lo))


class POLink(UnitLink):
    """Proportional-odds (Marshall-Olkin) link with tilt ``alpha``.

    ``G(u) = alpha u / (1 - (1 - alpha) u)``. Survival odds are multiplied by
    ``alpha``: ``S1/F1 = alpha * S2/F2``.
    """

    kind = "po"

    def __init__(self, alpha: float):
        self.alpha = _positive("alpha", alpha)
        self.log_alpha = math.log(self.alpha)
        self.alpha_bar = 1.0 - self.alpha

    @property
    def params(self):
        return (self.alpha,)

    def _denominator(self, u):
        # 1 - (1 - alpha) u, written to stay accurate for alpha far from 1
        return 1.0 + (self.alpha - 1.0) * u

    def logpdf(self, u):
        u = _arr(u)
        return _ret(u, self.log_alpha - 2.0 * np.log(self._denominator(u)))

    def cdf(self, u):
        u = _arr(u)
        with np.errstate(divide="ignore"):
            return _ret(u, special.expit(self.log_alpha + special.logit(u)))

    def logcdf(self, u):
        u = _arr(u)
        with np.errstate(divide="ignore"):
            return _ret(u, self.log_alpha + np.log(u) - np.log(self._denominator(u)))

    def complement(self, u, one_minus_u):
        return one_minus_u / self._denominator(u)

    def ppf(self, y):
        y = _arr(y)
        return _ret(y, y / (self.alpha + self.alpha_bar * y))

    def dpdf(self, u):
        u = _arr(u)
        return _ret(u, -2.0 * self.alpha * (self.alpha - 1.0) / self._denominator(u) ** 3)


class PiecewiseUniformLink(UnitLink):
    """Two-plateau link: density ``(1-p)/p`` on ``[0, p)`` and ``p/(1-p)`` on ``[p, 1]``."""

    kind = "piecewise_uniform"
    continuous_density = False

    def __init__(self, p: float):
        p = float(p)
        if not 0.0 < p < 1.0:
            raise InvalidParam(f"p must lie in (0, 1), got {p}")
        self.p = p
        self.jumps = (p,)
        self._low = (1.0 - p) / p
        self._high = p / (1.0 - p)

    @property
    def params(self):
        return (self.p,)

    def pdf(self, u):
        u = _arr(u)
        return _ret(u, np.where(u < self.p, self._low, self._high))

    def cdf(self, u):
        u = _arr(u)
        p = self.p
        return _ret(u, np.where(u <= p, self._low * u, 1.0 - p + self._high * (u - p)))

    def complement(self, u, one_minus_u):
        u = _arr(u)
        p = self.p
        return np.where(u <= p, 1.0 - self._low * u, self._high * one_minus_u)

    def ppf(self, y):
        y = _arr(y)
        p = self.p
        return _ret(y, np.where(y <= 1.0 - p, y / self._low, p + (y - (1.0 - p)) / self._high))

    def dpdf(self, u):
        return _ret(u, np.zeros_like(_arr(u)))


class PowerLink(UnitLink):
    """``G(u) = u**pi``; applied to survival functions this is the proportional hazards model."""

    kind = "power"

    def __init__(self, pi: float):
        self.pi = _positive("pi", pi)

    @property
    def params(self):
        return (self.pi,)

    def logpdf(self, u):
        u = _arr(u)
        with np.errstate(divide="ignore"):
            if self.pi == 1.0:
                return _ret(u, np.zeros_like(u))
            return _ret(u, math.log(self.pi) + (self.pi - 1.0) * np.log(u))

    def cdf(self, u):
        return _ret(u, _arr(u) ** self.pi)

    def logcdf(self, u):
        with np.errstate(divide="ignore"):
            return _ret(u, self.pi * np.log(_arr(u)))

    def complement(self, u, one_minus_u):
        u = _arr(u)
        with np.errstate(divide="ignore"):
            return -np.expm1(self.pi * np.log(u))

    def ppf(self, y):
        return _ret(y, _arr(y) ** (1.0 / self.pi))

    def dpdf(self, u):
        u = _arr(u)
        with np.errstate(divide="ignore"):
            return _ret(u, self.pi * (self.pi - 1.0) * u ** (self.pi - 2.0))


class CustomUnitLink(UnitLink):
    """Link built from callables for ``G`` and ``g`` (and optionally ``g'`` and ``G^-1``)."""

    kind = "custom"

    def __init__(
        self,
        cdf: Callable,
        pdf: Callable,
        *,
        ppf: Optional[Callable] = None,
        dpdf: Optional[Callable] = None,
        jumps: Sequence[float] = (),
        name: str = "custom",
    ):
        self._cdf, self._pdf, self._ppf, self._dpdf = cdf, pdf, ppf, dpdf
        self.jumps = tuple(float(j) for j in jumps)
        self.continuous_density = not self.jumps
        self.name = name

    def __repr__(self):
        return f"CustomUnitLink({self.name})"

    def pdf(self, u):
        return _ret(u, np.asarray(self._pdf(_arr(u)), dtype=float))

    def cdf(self, u):
        return _ret(u, np.asarray(self._cdf(_arr(u)), dtype=float))

    def ppf(self, y):
        if self._ppf is not None:
            return _ret(y, np.asarray(self._ppf(_arr(y)), dtype=float))
        from .numerics import find_root

        y = _arr(y)
        out = np.empty(y.shape)
        for idx, yv in np.ndenumerate(y):
            out[idx] = yv if yv in (0.0, 1.0) else find_root(lambda u: self.cdf(u) - yv, (0.0, 1.0), 1e-14)
        return _ret(y, out)

    def dpdf(self, u):
        if self._dpdf is None:
            return super().dpdf(u)
        return _ret(u, np.asarray(self._dpdf(_arr(u)), dtype=float))


def uniform_link() -> UnitLink:
    """The identity link ``G(u) = u`` (uniform density on [0, 1])."""
    return PowerLink(1.0)


# ---------------------------------------------------------------------------
# links on the real line
# ---------------------------------------------------------------------------


class AsymmetricPiecewiseUniform(UnivariateModel):
    """Piecewise-uniform density that is asymmetric yet has symmetric shift divergences.

    Height ``a1`` on ``[-theta/2, 0)``, ``a2`` on ``[0, theta/2)`` and
    ``b_k = n**-(k-1)`` on the band pair ``(2k-1) theta/2 <= |x| < (2k+1) theta/2``
    for ``k = 1, 2, ...``. Normalization requires
    ``(a1 + a2)/2 = 1/theta - 2n/(n-1)``.

    The density is evaluated exactly for every band; ``truncation`` only sets
    how many bands are used by :meth:`truncated_mass` and as quadrature
    breakpoints.
    """

    family = "asymmetric_pw"

    def __init__(self, theta: float, a1: float, a2: float, n: float, truncation: int = 60):
        self.theta = _positive("theta", theta)
        self.a1 = _positive("a1", a1)
        self.a2 = _positive("a2", a2)
        n = float(n)
        if not n > 1:
            raise InvalidParam(f"n must exceed 1, got {n}")
        self.n = n
        self.truncation = int(truncation)
        if self.truncation < 1:
            raise InvalidParam("truncation must be >= 1")
        if n ** (-self.truncation) > 1e-9:
            raise InvalidParam(f"truncation {truncation} leaves tail mass n^-K = {n ** -truncation:.3g} above 1e-9")
        target = 1.0 / self.theta - 2.0 * n / (n - 1.0)
        defect = 0.5 * (self.a1 + self.a2) - target
        if abs(defect) > 1e-9:
            raise ConstraintViolated(
                f"(a1 + a2)/2 = {0.5 * (self.a1 + self.a2):.12g} but 1/theta - 2n/(n-1) = {target:.12g}"
            )
        self._log_n = math.log(n)
        # mass of all bands beyond band k on one side: theta n^(1-k) / (n - 1)
        self._side_mass = self.theta * n / (n - 1.0)
        self._freeze()

    @property
    def params(self):
        return (self.theta, self.a1, self.a2, self.n)

    @property
    def typical_scale(self):
        return self.theta

    @property
    def breakpoints(self):
        k = np.arange(self.truncation + 1)
        edges = (2 * k + 1) * self.theta / 2
        return tuple(np.concatenate([-edges[::-1], [0.0], edges]).tolist())

    def band(self, x):
        """Band index ``k`` of each point (0 for the central plateaus)."""
        ax = np.abs(_arr(x))
        return np.where(ax < self.theta / 2, 0, np.floor(ax / self.theta + 0.5)).astype(float)

    def logpdf(self, x):
        x = _arr(x)
        k = self.band(x)
        centre = np.where(x < 0, math.log(self.a1), math.log(self.a2))
        return _ret(x, np.where(k == 0, centre, -(k - 1) * self._log_n))

    def _tail_beyond(self, k):
        return self.theta * np.exp(-k * self._log_n) * self.n / (self.n - 1.0)

    def cdf(self, x):
        x = _arr(x)
        th = self.theta
        k = self.band(x)
        b = np.exp(-(np.maximum(k, 1) - 1) * self._log_n)
        left = self._tail_beyond(k) + b * (x + (2 * k + 1) * th / 2)
        centre_left = self._side_mass + self.a1 * (x + th / 2)
        centre_right = self._side_mass + self.a1 * th / 2 + self.a2 * x
        right = 1.0 - (self._tail_beyond(k) + b * ((2 * k + 1) * th / 2 - x))
        out = np.where(k == 0, np.where(x < 0, centre_left, centre_right), np.where(x < 0, left, right))
        return _ret(x, np.clip(out, 0.0, 1.0))

    def sf(self, x):
        x = _arr(x)
        k = self.band(x)
        b = np.exp(-(np.maximum(k, 1) - 1) * self._log_n)
        right = self._tail_beyond(k) + b * ((2 * k + 1) * self.theta / 2 - x)
        out = np.where((k > 0) & (x > 0), right, 1.0 - self.cdf(x))
        return _ret(x, out)

    def truncated_mass(self, truncation: Optional[int] = None) -> float:
        """Sum of rectangle areas over the central plateaus and bands 1..K."""
        K = self.truncation if truncation is None else int(truncation)
        k = np.arange(1, K + 1)
        return float(self.theta * (self.a1 + self.a2) / 2 + 2 * self.theta * np.sum(self.n ** (-(k - 1.0))))

    def mean(self):
        # bands are mirror images, only the centre is asymmetric
        return self.theta**2 * (self.a2 - self.a1) / 8


_REAL_KINDS = ("probit", "logit", "laplace", "student_t", "gumbel", "asymmetric_pw")


class RealLink:
    """Link CDF on the real line, backed by a standard location model.

    ``kinks`` are the points where ``g`` is not smooth; divergence
    quadratures split there.
    """

    def __init__(self, kind: str, dist: UnivariateModel, theta: Optional[float] = None):
        if kind not in _REAL_KINDS:
            raise InvalidParam(f"unknown real-line link {kind!r}")
        if dist.support != (-np.inf, np.inf):
            raise SupportMismatch("a location link needs support on the whole real line")
        self.kind = kind
        self.dist = dist
        self.theta = theta

    def __repr__(self):
        return f"RealLink({self.kind}, {self.dist!r})"

    @property
    def params(self):
        return self.dist.params

    @property
    def kinks(self) -> Tuple[float, ...]:
        return tuple(self.dist.breakpoints)

    @property
    def scale(self) -> float:
        return self.dist.typical_scale

    def pdf(self, v):
        return self.dist.pdf(v)

    def logpdf(self, v):
        return self.dist.logpdf(v)

    def cdf(self, v):
        return self.dist.cdf(v)

    def sf(self, v):
        return self.dist.sf(v)

    def ppf(self, y):
        return self.dist.ppf(y)

    def isf(self, y):
        return self.dist.isf(y)


def real_link(kind: str, *params: float, truncation: int = 60) -> RealLink:
    """Build a standard real-line link by name.

    ``student_t`` takes the degrees of freedom; ``asymmetric_pw`` takes
    ``(theta, a1, a2, n)``; the others take no parameters.
    """
    if kind == "probit":
        return RealLink(kind, Normal())
    if kind == "logit":
        return RealLink(kind, Logistic())
    if kind == "laplace":
        return RealLink(kind, Laplace())
    if kind == "gumbel":
        return RealLink(kind, Gumbel())
    if kind == "student_t":
        if len(params) != 1:
            raise InvalidParam("student_t link needs the degrees of freedom")
        return RealLink(kind, StudentT(params[0]))
    if kind == "asymmetric_pw":
        return asymmetric_pw_density(*params, truncation=truncation)
    raise InvalidParam(f"unknown real-line link {kind!r}; choose from {_REAL_KINDS}")


def asymmetric_pw_density(theta: float, a1: float, a2: float, n: float, truncation: int = 60) -> RealLink:
    """Asymmetric piecewise-uniform link density (see :class:`AsymmetricPiecewiseUniform`)."""
    dist = AsymmetricPiecewiseUniform(theta, a1, a2, n, truncation)
    return RealLink("asymmetric_pw", dist, theta=dist.theta)


# ---------------------------------------------------------------------------
# linked models
# ---------------------------------------------------------------------------


class LinkedModel(UnivariateModel):
    """Model obtained from ``base`` through a link.

    With a :class:`UnitLink`: ``S(x) = G(S_base(x))``.
    With a :class:`RealLink` and shift ``theta``: ``F(x) = G(G^-1(F_base(x)) + theta)``.
    """

    def __init__(self, base: UnivariateModel, link, theta: Optional[float] = None):
        self.base = base
        self.link = link
        if isinstance(link, UnitLink):
            if theta is not None:
                raise InvalidParam("survival links take no shift")
            self.mode = "survival"
            self.theta = None
        elif isinstance(link, RealLink):
            self.mode = "location"
            self.theta = float(theta if theta is not None else 0.0)
            if not np.isfinite(self.theta):
                raise InvalidParam("shift must be finite")
        else:
            raise InvalidParam(f"not a link: {link!r}")
        self.support = base.support
        self.family = f"{link.kind}({base.family})"
        self._freeze()

    def __repr__(self):
        shift = "" if self.theta is None else f", theta={self.theta:g}"
        return f"LinkedModel({self.base!r}, {self.link!r}{shift})"

    @property
    def derived(self) -> "LinkedModel":
        return self

    @property
    def params(self):
        extra = () if self.theta is None else (self.theta,)
        return tuple(self.link.params) + extra + tuple(self.base.params)

    @property
    def typical_scale(self):
        return self.base.typical_scale

    @property
    def typical_location(self):
        return self.base.typical_location

    @property
    def breakpoints(self):
        pts = list(self.base.breakpoints)
        if self.mode == "survival":
            pts += [float(self.base.isf(j)) for j in self.link.jumps]
        else:
            for k in self.link.kinks:
                for v in (k, k - self.theta):
                    pts.append(float(self.base.ppf(self.link.cdf(v))))
        lo, hi = self.support
        return tuple(sorted(p for p in set(pts) if lo < p < hi))

    # --- generalized location helpers -------------------------------------
    def _latent(self, x):
        """``v = G^-1(F_base(x))`` computed from the nearer tail."""
        x = _arr(x)
        F = np.asarray(self.base.cdf(x), dtype=float)
        S = np.asarray(self.base.sf(x), dtype=float)
        v = np.empty(x.shape)
        lower = F <= 0.5
        try:
            if lower.any():
                v[lower] = self.link.ppf(F[lower])
            if (~lower).any():
                v[~lower] = self.link.isf(S[~lower])
        except QuantileFailure:
            raise
        except Exception as exc:  # pragma: no cover - defensive
            raise QuantileFailure(str(exc)) from exc
        return v

    # --- model interface ---------------------------------------------------
    def logpdf(self, x):
        x = _arr(x)
        base_lp = np.asarray(self.base.logpdf(x), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if self.mode == "survival":
                u = np.asarray(self.base.sf(x), dtype=float)
                out = self.link.logpdf(u) + base_lp
                # S_base underflowed: g(0) may be infinite but the density is negligible
                out = np.where(u > 0, out, -np.inf)
            else:
                v = self._latent(x)
                out = base_lp + self.link.logpdf(v + self.theta) - self.link.logpdf(v)
                # F_base has under/overflowed to 0 or 1; the density is negligible there
                out = np.where(np.isfinite(v), out, -np.inf)
            out = np.where(np.isneginf(base_lp), -np.inf, out)
        return _ret(x, out)

    def sf(self, x):
        x = _arr(x)
        if self.mode == "survival":
            return _ret(x, self.link.cdf(np.asarray(self.base.sf(x), dtype=float)))
        return _ret(x, self.link.sf(self._latent(x) + self.theta))

    def cdf(self, x):
        x = _arr(x)
        if self.mode == "survival":
            u = np.asarray(self.base.sf(x), dtype=float)
            return _ret(x, self.link.complement(u, np.asarray(self.base.cdf(x), dtype=float)))
        return _ret(x, self.link.cdf(self._latent(x) + self.theta))

    def logsf(self, x):
        x = _arr(x)
        if self.mode == "survival":
            with np.errstate(divide="ignore"):
                return _ret(x, self.link.logcdf(np.asarray(self.base.sf(x), dtype=float)))
        return super().logsf(x)

    def ppf(self, p):
        p = _arr(p)
        if self.mode == "survival":
            # F1 = p  <=>  S2 = G^-1(1 - p)
            return _ret(p, self.base.isf(self.link.ppf(1.0 - p)))
        return _ret(p, self.base.ppf(self.link.cdf(self.link.ppf(p) - self.theta)))

    def isf(self, p):
        p = _arr(p)
        if self.mode == "survival":
            return _ret(p, self.base.isf(self.link.ppf(p)))
        return _ret(p, self.base.isf(self.link.sf(self.link.isf(p) - self.theta)))


def survival_transform(link: UnitLink, base: UnivariateModel) -> LinkedModel:
    """``S1 = G(S_base)`` for an arbitrary unit-interval link."""
    return LinkedModel(base, link)


def po_transform(alpha: float, base: UnivariateModel) -> LinkedModel:
    """Proportional-odds model with tilt ``alpha``: ``S1 = alpha S / (1 - (1-alpha) S)``."""
    return LinkedModel(base, POLink(alpha))


def piecewise_uniform_transform(p: float, base: UnivariateModel) -> LinkedModel:
    """Change-point model from the two-plateau link; the change point is ``base.isf(p)``."""
    return LinkedModel(base, PiecewiseUniformLink(p))


def power_transform(pi: float, base: UnivariateModel) -> LinkedModel:
    """Proportional-hazards model ``S1 = S_base**pi``."""
    return LinkedModel(base, PowerLink(pi))


def gll_transform(link: RealLink, theta: float, base: UnivariateModel) -> LinkedModel:
    """Generalized location model ``F1 = G(G^-1(F_base) + theta)``."""
    if not isinstance(link, RealLink):
        raise SupportMismatch("generalized location models need a link on the real line")
    return LinkedModel(base, link, theta)
