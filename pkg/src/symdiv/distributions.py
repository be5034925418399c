"""Univariate continuous models.

Every model exposes ``pdf``, ``logpdf``, ``cdf``, ``sf``, ``logsf``, ``ppf``,
``isf`` and ``mean`` and a ``support`` interval. Methods accept scalars or
arrays and return the same shape. Subclasses only need to provide one of
``pdf``/``logpdf`` and one of ``cdf``/``sf``; the rest has generic defaults
(quantiles by bracketed root-finding, means by integrating the survival
function).

Models are immutable after construction.
"""

from __future__ import annotations

import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from .exceptions import DivergentMean, InvalidParam, QuantileFailure
from .numerics import DEFAULT_QUADRATURE, find_root, integrate_adaptive, model_mean_via_survival

__all__ = [
    "UnivariateModel",
    "Exponential",
    "Weibull",
    "Logistic",
    "Normal",
    "Laplace",
    "StudentT",
    "Gumbel",
    "LogLogistic",
    "PiecewiseExponential",
    "Uniform",
    "CustomModel",
    "make_model",
]


def _arr(x):
    return np.asarray(x, dtype=float)


def _ret(x, value):
    return float(value) if np.ndim(x) == 0 else value


def _positive(name, value):
    value = float(value)
    if not (value > 0 and np.isfinite(value)):
        raise InvalidParam(f"{name} must be a positive finite number, got {value}")
    return value


class UnivariateModel:
    """Base class for a continuous distribution on an interval."""

    family = "custom"
    support: Tuple[float, float] = (-np.inf, np.inf)
    breakpoints: Tuple[float, ...] = ()

    @property
    def params(self) -> Tuple[float, ...]:
        return ()

    @property
    def typical_scale(self) -> float:
        return 1.0

    @property
    def typical_location(self) -> float:
        return 0.0

    def __repr__(self):
        args = ", ".join(f"{p:g}" for p in self.params)
        return f"{type(self).__name__}({args})"

    def __setattr__(self, name, value):
        if getattr(self, "_frozen", False):
            raise AttributeError(f"{type(self).__name__} is immutable")
        object.__setattr__(self, name, value)

    def _freeze(self):
        object.__setattr__(self, "_frozen", True)

    # --- density -----------------------------------------------------------
    def pdf(self, x):
        with np.errstate(under="ignore"):
            return _ret(x, np.exp(self.logpdf(_arr(x))))

    def logpdf(self, x):
        with np.errstate(divide="ignore"):
            return _ret(x, np.log(self.pdf(_arr(x))))

    # --- distribution function ---------------------------------------------
    def cdf(self, x):
        return _ret(x, 1.0 - self.sf(_arr(x)))

    def sf(self, x):
        return _ret(x, 1.0 - self.cdf(_arr(x)))

    def logsf(self, x):
        with np.errstate(divide="ignore"):
            return _ret(x, np.log(self.sf(_arr(x))))

    def logcdf(self, x):
        with np.errstate(divide="ignore"):
            return _ret(x, np.log(self.cdf(_arr(x))))

    # --- quantiles ---------------------------------------------------------
    def _bracket(self, target, fn, increasing):
        lo, hi = self.support
        loc, s = self.typical_location, self.typical_scale
        a = lo if np.isfinite(lo) else loc - s
        b = hi if np.isfinite(hi) else loc + s
        step = s
        for _ in range(1100):
            va, vb = fn(a), fn(b)
            low_ok = va <= target if increasing else va >= target
            high_ok = vb >= target if increasing else vb <= target
            if low_ok and high_ok:
                return a, b
            step *= 2.0
            if not low_ok:
                if np.isfinite(lo):
                    break
                a = loc - step
            if not high_ok:
                if np.isfinite(hi):
                    break
                b = loc + step
        raise QuantileFailure(f"could not bracket quantile {target} for {self!r}")

    def _invert(self, p, increasing):
        fn = self.cdf if increasing else self.sf
        p = _arr(p)
        out = np.empty(p.shape)
        lo, hi = self.support
        for idx, pv in np.ndenumerate(p):
            if not 0.0 <= pv <= 1.0:
                out[idx] = np.nan
                continue
            if increasing:
                edge = lo if pv == 0 else hi if pv == 1 else None
            else:
                edge = hi if pv == 0 else lo if pv == 1 else None
            if edge is not None:
                out[idx] = edge
                continue
            a, b = self._bracket(pv, fn, increasing)
            scale = max(abs(a), abs(b), self.typical_scale)
            out[idx] = find_root(lambda x: fn(x) - pv, (a, b), tol=1e-14 * scale)
        return out

    def ppf(self, p):
        return _ret(p, self._invert(p, True))

    def isf(self, p):
        return _ret(p, self._invert(p, False))

    # --- moments -----------------------------------------------------------
    def mean(self) -> float:
        lo, hi = self.support
        if lo >= 0:
            return model_mean_via_survival(self)
        val, _ = integrate_adaptive(
            lambda x: x * self.pdf(x),
            lo,
            hi,
            DEFAULT_QUADRATURE.replace(scale=self.typical_scale),
            points=self.breakpoints,
        )
        return val


class Exponential(UnivariateModel):
    """Exponential lifetime with ``S(x) = exp(-rate * x)``; params ``(rate,)``."""

    family = "exponential"
    support = (0.0, np.inf)

    def __init__(self, rate: float = 1.0):
        self.rate = _positive("rate", rate)
        self._freeze()

    @property
    def params(self):
        return (self.rate,)

    @property
    def typical_scale(self):
        return 1.0 / self.rate

    def logpdf(self, x):
        x = _arr(x)
        with np.errstate(divide="ignore"):
            out = np.where(x >= 0, math.log(self.rate) - self.rate * x, -np.inf)
        return _ret(x, out)

    def sf(self, x):
        x = _arr(x)
        return _ret(x, np.where(x >= 0, np.exp(-self.rate * np.maximum(x, 0)), 1.0))

    def logsf(self, x):
        x = _arr(x)
        return _ret(x, np.where(x >= 0, -self.rate * x, 0.0))

    def cdf(self, x):
        x = _arr(x)
        return _ret(x, -np.expm1(-self.rate * np.maximum(x, 0)))

    def ppf(self, p):
        p = _arr(p)
        return _ret(p, -np.log1p(-p) / self.rate)

    def isf(self, p):
        p = _arr(p)
        with np.errstate(divide="ignore"):
            return _ret(p, -np.log(p) / self.rate)

    def mean(self):
        return 1.0 / self.rate


class Weibull(UnivariateModel):
    """Weibull with ``S(x) = exp(-(x/scale)**shape)``; params ``(shape, scale)``."""

    family = "weibull"
    support = (0.0, np.inf)

    def __init__(self, shape: float, scale: float = 1.0):
        self.shape = _positive("shape", shape)
        self.scale = _positive("scale", scale)
        self._freeze()

    @property
    def params(self):
        return (self.shape, self.scale)

    @property
    def typical_scale(self):
        return self.scale

    def _z(self, x):
        return np.maximum(x, 0) / self.scale

    def logpdf(self, x):
        x = _arr(x)
        k = self.shape
        with np.errstate(divide="ignore", invalid="ignore"):
            z = self._z(x)
            out = math.log(k / self.scale) + (k - 1) * np.log(z) - z**k
            if k == 1:
                out = np.where(x == 0, math.log(1 / self.scale), out)
            out = np.where(x < 0, -np.inf, out)
        return _ret(x, out)

    def logsf(self, x):
        x = _arr(x)
        return _ret(x, -self._z(x) ** self.shape)

    def sf(self, x):
        return _ret(x, np.exp(self.logsf(_arr(x))))

    def cdf(self, x):
        return _ret(x, -np.expm1(self.logsf(_arr(x))))

    def ppf(self, p):
        p = _arr(p)
        return _ret(p, self.scale * (-np.log1p(-p)) ** (1.0 / self.shape))

    def isf(self, p):
        p = _arr(p)
        with np.errstate(divide="ignore"):
            return _ret(p, self.scale * (-np.log(p)) ** (1.0 / self.shape))

    def mean(self):
        return self.scale * math.gamma(1.0 + 1.0 / self.shape)


class Logistic(UnivariateModel):
    """Logistic with ``S(x) = 1 / (1 + exp((x - loc)/scale))``."""

    family = "logistic"

    def __init__(self, loc: float = 0.0, scale: float = 1.0):
        self.loc = float(loc)
        self.scale = _positive("scale", scale)
        self._freeze()

    @property
    def params(self):
        return (self.loc, self.scale)

    @property
    def typical_scale(self):
        return self.scale

    @property
    def typical_location(self):
        return self.loc

    def logpdf(self, x):
        z = (_arr(x) - self.loc) / self.scale
        a = np.abs(z)
        return _ret(x, -a - 2.0 * np.log1p(np.exp(-a)) - math.log(self.scale))

    def cdf(self, x):
        return _ret(x, special.expit((_arr(x) - self.loc) / self.scale))

    def sf(self, x):
        return _ret(x, special.expit(-(_arr(x) - self.loc) / self.scale))

    def logsf(self, x):
        return _ret(x, special.log_expit(-(_arr(x) - self.loc) / self.scale))

    def logcdf(self, x):
        return _ret(x, special.log_expit((_arr(x) - self.loc) / self.scale))

    def ppf(self, p):
        p = _arr(p)
        return _ret(p, self.loc + self.scale * special.logit(p))

    def isf(self, p):
        p = _arr(p)
        return _ret(p, self.loc - self.scale * special.logit(p))

    def mean(self):
        return self.loc


class Normal(UnivariateModel):
    family = "normal"

    def __init__(self, loc: float = 0.0, scale: float = 1.0):
        self.loc = float(loc)
        self.scale = _positive("scale", scale)
        self._freeze()

    @property
    def params(self):
        return (self.loc, self.scale)

    @property
    def typical_scale(self):
        return self.scale

    @property
    def typical_location(self):
        return self.loc

    def logpdf(self, x):
        z = (_arr(x) - self.loc) / self.scale
        return _ret(x, -0.5 * z * z - 0.5 * math.log(2 * math.pi) - math.log(self.scale))

    def cdf(self, x):
        return _ret(x, special.ndtr((_arr(x) - self.loc) / self.scale))

    def sf(self, x):
        return _ret(x, special.ndtr(-(_arr(x) - self.loc) / self.scale))

    def logsf(self, x):
        return _ret(x, special.log_ndtr(-(_arr(x) - self.loc) / self.scale))

    def logcdf(self, x):
        return _ret(x, special.log_ndtr((_arr(x) - self.loc) / self.scale))

    def ppf(self, p):
        return _ret(p, self.loc + self.scale * special.ndtri(_arr(p)))

    def isf(self, p):
        return _ret(p, self.loc - self.scale * special.ndtri(_arr(p)))

    def mean(self):
        return self.loc


class Laplace(UnivariateModel):
    family = "laplace"

    def __init__(self, loc: float = 0.0, scale: float = 1.0):
        self.loc = float(loc)
        self.scale = _positive("scale", scale)
        self._freeze()

    @property
    def params(self):
        return (self.loc, self.scale)

    @property
    def breakpoints(self):
        return (self.loc,)

    @property
    def typical_scale(self):
        return self.scale

    @property
    def typical_location(self):
        return self.loc

    def logpdf(self, x):
        z = (_arr(x) - self.loc) / self.scale
        return _ret(x, -np.abs(z) - math.log(2 * self.scale))

    def cdf(self, x):
        z = (_arr(x) - self.loc) / self.scale
        return _ret(x, np.where(z < 0, 0.5 * np.exp(np.minimum(z, 0)), 1 - 0.5 * np.exp(-np.maximum(z, 0))))

    def sf(self, x):
        z = (_arr(x) - self.loc) / self.scale
        return _ret(x, np.where(z > 0, 0.5 * np.exp(-np.maximum(z, 0)), 1 - 0.5 * np.exp(np.minimum(z, 0))))

    def logsf(self, x):
        z = (_arr(x) - self.loc) / self.scale
        return _ret(x, np.where(z > 0, math.log(0.5) - z, np.log1p(-0.5 * np.exp(np.minimum(z, 0)))))

    def ppf(self, p):
        p = _arr(p)
        with np.errstate(divide="ignore"):
            z = np.where(p < 0.5, np.log(2 * p), -np.log(2 * (1 - p)))
        return _ret(p, self.loc + self.scale * z)

    def isf(self, p):
        p = _arr(p)
        with np.errstate(divide="ignore"):
            z = np.where(p < 0.5, -np.log(2 * p), np.log(2 * (1 - p)))
        return _ret(p, self.loc + self.scale * z)

    def mean(self):
        return self.loc


class StudentT(UnivariateModel):
    """Student-t location-scale model.

    The distribution function is the integral of the density, taken from the
    nearer tail and mirrored through the centre.
    """

    family = "student_t"

    def __init__(self, df: float, loc: float = 0.0, scale: float = 1.0):
        self.df = _positive("df", df)
        self.loc = float(loc)
        self.scale = _positive("scale", scale)
        nu = self.df
        self._lognorm = math.lgamma((nu + 1) / 2) - math.lgamma(nu / 2) - 0.5 * math.log(nu * math.pi)
        self._freeze()

    @property
    def params(self):
        return (self.df, self.loc, self.scale)

    @property
    def typical_scale(self):
        return self.scale

    @property
    def typical_location(self):
        return self.loc

    def _std_logpdf(self, z):
        nu = self.df
        return self._lognorm - 0.5 * (nu + 1) * np.log1p(z * z / nu)

    def logpdf(self, x):
        z = (_arr(x) - self.loc) / self.scale
        return _ret(x, self._std_logpdf(z) - math.log(self.scale))

    def _upper_tail(self, z):
        # P(Z > z) for z >= 0
        val, _ = integrate_adaptive(lambda t: np.exp(self._std_logpdf(t)), z, np.inf)
        return val

    def sf(self, x):
        z = (_arr(x) - self.loc) / self.scale
        out = np.empty(z.shape)
        for idx, zv in np.ndenumerate(z):
            tail = self._upper_tail(abs(zv))
            out[idx] = tail if zv >= 0 else 1.0 - tail
        return _ret(x, out)

    def cdf(self, x):
        z = (_arr(x) - self.loc) / self.scale
        out = np.empty(z.shape)
        for idx, zv in np.ndenumerate(z):
            tail = self._upper_tail(abs(zv))
            out[idx] = tail if zv <= 0 else 1.0 - tail
        return _ret(x, out)

    def mean(self):
        if self.df <= 1:
            raise DivergentMean("Student-t mean is undefined for df <= 1")
        return self.loc


class Gumbel(UnivariateModel):
    """Gumbel (maximum) model, ``F(x) = exp(-exp(-(x - loc)/scale))``."""

    family = "gumbel"

    def __init__(self, loc: float = 0.0, scale: float = 1.0):
        self.loc = float(loc)
        self.scale = _positive("scale", scale)
        self._freeze()

    @property
    def params(self):
        return (self.loc, self.scale)

    @property
    def typical_scale(self):
        return self.scale

    @property
    def typical_location(self):
        return self.loc

    def logpdf(self, x):
        z = (_arr(x) - self.loc) / self.scale
        with np.errstate(over="ignore"):
            return _ret(x, -z - np.exp(-z) - math.log(self.scale))

    def logcdf(self, x):
        z = (_arr(x) - self.loc) / self.scale
        with np.errstate(over="ignore"):
            return _ret(x, -np.exp(-z))

    def cdf(self, x):
        return _ret(x, np.exp(self.logcdf(_arr(x))))

    def sf(self, x):
        return _ret(x, -np.expm1(self.logcdf(_arr(x))))

    def ppf(self, p):
        p = _arr(p)
        with np.errstate(divide="ignore"):
            return _ret(p, self.loc - self.scale * np.log(-np.log(p)))

    def isf(self, p):
        p = _arr(p)
        with np.errstate(divide="ignore"):
            return _ret(p, self.loc - self.scale * np.log(-np.log1p(-p)))

    def mean(self):
        return self.loc + np.euler_gamma * self.scale


class LogLogistic(UnivariateModel):
    """Log-logistic lifetime, ``S(x) = 1 / (1 + (x/scale)**shape)``."""

    family = "log_logistic"
    support = (0.0, np.inf)

    def __init__(self, shape: float, scale: float = 1.0):
        self.shape = _positive("shape", shape)
        self.scale = _positive("scale", scale)
        self._freeze()

    @property
    def params(self):
        return (self.shape, self.scale)

    @property
    def typical_scale(self):
        return self.scale

    def _w(self, x):
        with np.errstate(divide="ignore"):
            return self.shape * (np.log(np.maximum(x, 0)) - math.log(self.scale))

    def logpdf(self, x):
        x = _arr(x)
        w = self._w(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = math.log(self.shape) - np.log(x) + w - 2 * np.logaddexp(0, w)
        out = np.where(x > 0, out, -np.inf)
        return _ret(x, out)

    def logsf(self, x):
        return _ret(x, -np.logaddexp(0, self._w(_arr(x))))

    def sf(self, x):
        return _ret(x, special.expit(-self._w(_arr(x))))

    def cdf(self, x):
        return _ret(x, special.expit(self._w(_arr(x))))

    def ppf(self, p):
        p = _arr(p)
        with np.errstate(divide="ignore"):
            return _ret(p, self.scale * np.exp(special.logit(p) / self.shape))

    def isf(self, p):
        p = _arr(p)
        with np.errstate(divide="ignore"):
            return _ret(p, self.scale * np.exp(-special.logit(p) / self.shape))

    def mean(self):
        k = self.shape
        if k <= 1:
            raise DivergentMean("log-logistic mean is infinite for shape <= 1")
        b = math.pi / k
        return self.scale * b / math.sin(b)


class PiecewiseExponential(UnivariateModel):
    """Piecewise-constant hazard: ``rates[i]`` on ``[breaks[i-1], breaks[i])``.

    ``breaks`` are the interior change points (one fewer than ``rates``).
    """

    family = "piecewise_exponential"
    support = (0.0, np.inf)

    def __init__(self, rates: Sequence[float], breaks: Sequence[float] = ()):
        rates = tuple(_positive("rate", r) for r in rates)
        breaks = tuple(float(b) for b in breaks)
        if len(rates) != len(breaks) + 1:
            raise InvalidParam("need exactly one more rate than change points")
        if any(b <= 0 for b in breaks) or any(b2 <= b1 for b1, b2 in zip(breaks, breaks[1:])):
            raise InvalidParam("change points must be positive and increasing")
        self.rates = rates
        self.breaks = breaks
        edges = np.concatenate([[0.0], breaks])
        self._edges = edges
        self._cumhaz = np.concatenate([[0.0], np.cumsum(np.diff(edges) * np.array(rates[:-1]))])
        self._freeze()

    @property
    def params(self):
        return self.rates + self.breaks

    @property
    def breakpoints(self):
        return self.breaks

    @property
    def typical_scale(self):
        return 1.0 / self.rates[0]

    def _piece(self, x):
        return np.clip(np.searchsorted(self._edges, x, side="right") - 1, 0, len(self.rates) - 1)

    def cumhaz(self, x):
        x = np.maximum(_arr(x), 0)
        i = self._piece(x)
        return self._cumhaz[i] + np.asarray(self.rates)[i] * (x - self._edges[i])

    def logsf(self, x):
        return _ret(x, -self.cumhaz(x))

    def sf(self, x):
        return _ret(x, np.exp(-self.cumhaz(x)))

    def cdf(self, x):
        return _ret(x, -np.expm1(-self.cumhaz(x)))

    def logpdf(self, x):
        x = _arr(x)
        i = self._piece(np.maximum(x, 0))
        out = np.log(np.asarray(self.rates)[i]) - self.cumhaz(x)
        return _ret(x, np.where(x >= 0, out, -np.inf))


class Uniform(UnivariateModel):
    family = "uniform"

    def __init__(self, lo: float = 0.0, hi: float = 1.0):
        lo, hi = float(lo), float(hi)
        if not (np.isfinite(lo) and np.isfinite(hi) and hi > lo):
            raise InvalidParam(f"uniform needs finite lo < hi, got ({lo}, {hi})")
        self.lo, self.hi = lo, hi
        self.support = (lo, hi)
        self._freeze()

    @property
    def params(self):
        return (self.lo, self.hi)

    @property
    def typical_scale(self):
        return self.hi - self.lo

    @property
    def typical_location(self):
        return 0.5 * (self.lo + self.hi)

    def pdf(self, x):
        x = _arr(x)
        return _ret(x, np.where((x >= self.lo) & (x <= self.hi), 1.0 / (self.hi - self.lo), 0.0))

    def cdf(self, x):
        x = _arr(x)
        return _ret(x, np.clip((x - self.lo) / (self.hi - self.lo), 0.0, 1.0))

    def sf(self, x):
        x = _arr(x)
        return _ret(x, np.clip((self.hi - x) / (self.hi - self.lo), 0.0, 1.0))

    def ppf(self, p):
        p = _arr(p)
        return _ret(p, self.lo + p * (self.hi - self.lo))

    def isf(self, p):
        p = _arr(p)
        return _ret(p, self.hi - p * (self.hi - self.lo))

    def mean(self):
        return 0.5 * (self.lo + self.hi)


class CustomModel(UnivariateModel):
    """Model assembled from user callables.

    At least one of ``pdf``/``logpdf`` and one of ``sf``/``cdf`` is needed.
    """

    family = "custom"

    def __init__(
        self,
        *,
        pdf: Optional[Callable] = None,
        logpdf: Optional[Callable] = None,
        sf: Optional[Callable] = None,
        cdf: Optional[Callable] = None,
        logsf: Optional[Callable] = None,
        support: Tuple[float, float] = (-np.inf, np.inf),
        breakpoints: Sequence[float] = (),
        scale: float = 1.0,
        location: float = 0.0,
        name: str = "custom",
    ):
        if pdf is None and logpdf is None:
            raise InvalidParam("custom model needs pdf or logpdf")
        if sf is None and cdf is None:
            raise InvalidParam("custom model needs sf or cdf")
        self._pdf, self._logpdf, self._sf, self._cdf, self._logsf = pdf, logpdf, sf, cdf, logsf
        self.support = (float(support[0]), float(support[1]))
        self.breakpoints = tuple(float(b) for b in breakpoints)
        self._scale = float(scale)
        self._location = float(location)
        self.name = name
        self._freeze()

    def __repr__(self):
        return f"CustomModel({self.name})"

    @property
    def typical_scale(self):
        return self._scale

    @property
    def typical_location(self):
        return self._location

    def pdf(self, x):
        if self._pdf is None:
            return super().pdf(x)
        return _ret(x, np.asarray(self._pdf(_arr(x)), dtype=float))

    def logpdf(self, x):
        if self._logpdf is None:
            return super().logpdf(x)
        return _ret(x, np.asarray(self._logpdf(_arr(x)), dtype=float))

    def sf(self, x):
        if self._sf is None:
            return super().sf(x)
        return _ret(x, np.asarray(self._sf(_arr(x)), dtype=float))

    def cdf(self, x):
        if self._cdf is None:
            return super().cdf(x)
        return _ret(x, np.asarray(self._cdf(_arr(x)), dtype=float))

    def logsf(self, x):
        if self._logsf is None:
            return super().logsf(x)
        return _ret(x, np.asarray(self._logsf(_arr(x)), dtype=float))


_FAMILIES = {
    "exponential": Exponential,
    "weibull": Weibull,
    "logistic": Logistic,
    "normal": Normal,
    "laplace": Laplace,
    "student_t": StudentT,
    "gumbel": Gumbel,
    "log_logistic": LogLogistic,
    "uniform": Uniform,
}


def make_model(family: str, *params: float) -> UnivariateModel:
    """Build a built-in model from its family name and positional parameters."""
    if family == "piecewise_exponential":
        n = (len(params) + 1) // 2
        return PiecewiseExponential(params[:n], params[n:])
    try:
        cls = _FAMILIES[family]
    except KeyError:
        raise InvalidParam(f"unknown family {family!r}; choose from {sorted(_FAMILIES)}") from None
    return cls(*params)
