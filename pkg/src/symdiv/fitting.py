"""Maximum-likelihood fitting of proportional-odds survival models.

The baseline is log-logistic, ``S0(t) = 1 / (1 + (t/s)^k)``. Tilting it by
``alpha = exp(beta'z)`` keeps the log-odds linear:

    S(t | z) = 1 / (1 + exp(w)),    w = k log t + c - beta'z,    c = -k log s

so right-censored data give a smooth, concave-in-``(c, beta)`` likelihood
that damped Newton handles well.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import special
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .distributions import LogLogistic
from .exceptions import (
    AllCensored,
    DimensionMismatch,
    EmptyInput,
    InvalidParam,
    NonConvergent,
    SeparationDetected,
)
from .links import LinkedModel, po_transform
from .numerics import find_root

__all__ = [
    "SurvivalDataset",
    "FitConfig",
    "FitResult",
    "po_loglik",
    "fit_po_mle",
    "sample_po",
    "linear_predictor",
    "POSurvivalRegressor",
]

logger = logging.getLogger(__name__)

# standardized units; a converged fit leaves a step many orders smaller
_SEPARATION_STEP = 0.05


@dataclass(frozen=True)
class SurvivalDataset:
    """Right-censored lifetimes with covariates.

    ``covariates`` is an ``(n, p)`` array; missing covariate values are
    allowed as NaN and dropped by :meth:`complete_cases`.
    """

    time: np.ndarray
    event: np.ndarray
    covariates: np.ndarray
    names: Tuple[str, ...] = ()
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        time = np.asarray(self.time, dtype=float).ravel()
        event = np.asarray(self.event).ravel().astype(bool)
        z = np.asarray(self.covariates, dtype=float)
        if z.ndim == 1:
            z = z.reshape(-1, 1) if z.size == time.size and time.size else z.reshape(time.size, -1)
        if event.size != time.size or z.shape[0] != time.size:
            raise DimensionMismatch(
                f"time ({time.size}), event ({event.size}) and covariates ({z.shape[0]}) lengths differ"
            )
        if np.any(~np.isfinite(time)) or np.any(time <= 0):
            raise InvalidParam("survival times must be positive and finite")
        names = tuple(self.names) if self.names else tuple(f"z{i + 1}" for i in range(z.shape[1]))
        if len(names) != z.shape[1]:
            raise DimensionMismatch(f"{len(names)} names for {z.shape[1]} covariates")
        for arr in (time, event, z):
            arr.setflags(write=False)
        object.__setattr__(self, "time", time)
        object.__setattr__(self, "event", event)
        object.__setattr__(self, "covariates", z)
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.time.size

    @property
    def p(self) -> int:
        return self.covariates.shape[1]

    @property
    def n_events(self) -> int:
        return int(self.event.sum())

    def column_index(self, key: Union[int, str]) -> int:
        if isinstance(key, str):
            try:
                return self.names.index(key)
            except ValueError:
                raise DimensionMismatch(f"no covariate named {key!r}") from None
        key = int(key)
        if not 0 <= key < self.p:
            raise DimensionMismatch(f"covariate index {key} out of range for p={self.p}")
        return key

    def select(self, columns: Sequence[Union[int, str]]) -> "SurvivalDataset":
        idx = [self.column_index(c) for c in columns]
        return SurvivalDataset(
            self.time, self.event, self.covariates[:, idx], tuple(self.names[i] for i in idx), self.meta
        )

    def complete_cases(self) -> "SurvivalDataset":
        keep = np.all(np.isfinite(self.covariates), axis=1)
        if keep.all():
            return self
        return SurvivalDataset(self.time[keep], self.event[keep], self.covariates[keep], self.names, self.meta)


@dataclass(frozen=True)
class FitConfig:
    """Optimizer settings. ``tol`` bounds the max-norm of the per-observation score."""

    tol: float = 1e-8
    max_iter: int = 200
    # |beta| (in standardized units) beyond this is treated as separation
    separation_threshold: float = 30.0


@dataclass(frozen=True)
class FitResult:
    """Fitted proportional-odds model with log-logistic baseline.

    ``covariance`` is the inverse observed information for
    ``(log shape, c, beta...)``; ``se`` holds the standard errors of ``beta``.
    """

    beta: np.ndarray
    baseline_params: Tuple[float, float]
    loglik: float
    converged: bool
    iterations: int
    grad_norm: float
    subset: Tuple[int, ...] = ()
    names: Tuple[str, ...] = ()
    covariance: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def se(self) -> np.ndarray:
        if self.covariance is None:
            return np.full(self.beta.size, np.nan)
        return np.sqrt(np.diag(self.covariance)[2:])

    @property
    def shape(self) -> float:
        return self.baseline_params[0]

    @property
    def scale(self) -> float:
        return self.baseline_params[1]

    def baseline(self) -> LogLogistic:
        return LogLogistic(*self.baseline_params)

    def model(self, z) -> LinkedModel:
        """Survival model for covariate vector ``z``."""
        return po_transform(math.exp(linear_predictor(self, z)), self.baseline())

    def survival(self, t, z):
        return self.model(z).sf(t)

    def to_dict(self) -> dict:
        return {
            "beta": self.beta.tolist(),
            "se": self.se.tolist(),
            "baseline_shape": self.shape,
            "baseline_scale": self.scale,
            "loglik": self.loglik,
            "converged": self.converged,
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
            "subset": list(self.subset),
            "names": list(self.names),
        }


def linear_predictor(fit: Union[FitResult, Sequence[float], np.ndarray], z) -> float:
    """``beta'z``; ``fit`` may be a :class:`FitResult` or a coefficient vector."""
    beta = np.asarray(fit.beta if isinstance(fit, FitResult) else fit, dtype=float).ravel()
    z = np.asarray(z, dtype=float).ravel()
    if beta.size != z.size:
        raise DimensionMismatch(f"coefficient length {beta.size} does not match covariate length {z.size}")
    return float(beta @ z)


# ---------------------------------------------------------------------------
# likelihood
# ---------------------------------------------------------------------------


def _pieces(params, log_t, z):
    a, c, beta = params[0], params[1], params[2:]
    k = math.exp(a)
    w = k * log_t + c - z @ beta
    return k, w


def po_loglik(params, time, event, z, *, derivatives: bool = False):
    """Log-likelihood of ``(log shape, c, beta...)`` for right-censored data.

    With ``derivatives=True`` returns ``(loglik, gradient, hessian)``.
    """
    params = np.asarray(params, dtype=float)
    log_t = np.log(np.asarray(time, dtype=float))
    d = np.asarray(event, dtype=float)
    z = np.asarray(z, dtype=float).reshape(log_t.size, -1)
    k, w = _pieces(params, log_t, z)
    sp = np.logaddexp(0.0, w)
    ll = float(np.sum(d * (params[0] - log_t + w) - (1.0 + d) * sp))
    if not derivatives:
        return ll
    sig = special.expit(w)
    r = d - (1.0 + d) * sig
    h = -(1.0 + d) * sig * (1.0 - sig)
    klt = k * log_t
    # columns of dw/dparams
    J = np.column_stack([klt, np.ones_like(w), -z])
    grad = J.T @ r
    grad[0] += d.sum()
    hess = (J * h[:, None]).T @ J
    # second derivative of w with respect to log shape
    hess[0, 0] += np.sum(r * klt)
    return ll, grad, hess


def _standardize(z):
    mean = z.mean(axis=0) if z.shape[0] else np.zeros(z.shape[1])
    sd = z.std(axis=0) if z.shape[0] else np.ones(z.shape[1])
    sd = np.where(sd > 0, sd, 1.0)
    return (z - mean) / sd, mean, sd


def _initial(log_t, event):
    lt = log_t[event] if event.any() else log_t
    spread = float(np.std(lt)) if lt.size > 1 else 1.0
    spread = spread if spread > 0 else 1.0
    k = math.pi / (math.sqrt(3.0) * spread)
    return math.log(k), -k * float(np.median(lt))


def fit_po_mle(
    data: SurvivalDataset,
    subset: Optional[Sequence[Union[int, str]]] = None,
    config: Optional[FitConfig] = None,
) -> FitResult:
    """Maximize the proportional-odds log-likelihood over ``(shape, scale, beta)``.

    ``subset`` selects covariates by index or name (``None`` means all, an
    empty list fits the baseline alone). Rows with missing values in the
    selected covariates are dropped. Covariates are standardized internally.
    """
    config = config or FitConfig()
    if subset is None:
        subset = range(data.p)
    idx = tuple(data.column_index(c) for c in subset)
    sub = data.select(idx).complete_cases()
    if sub.n == 0 or sub.n_events == 0:
        raise AllCensored(f"need at least one observed event (n={sub.n}, events={sub.n_events})")

    log_t = np.log(sub.time)
    zs, mean, sd = _standardize(sub.covariates)
    p = zs.shape[1]
    a0, c0 = _initial(log_t, sub.event)
    theta = np.concatenate([[a0, c0], np.zeros(p)])
    n = sub.n

    ll, grad, hess = po_loglik(theta, sub.time, sub.event, zs, derivatives=True)
    converged = False
    it = 0
    for it in range(1, config.max_iter + 1):
        if np.max(np.abs(grad)) / n <= config.tol:
            converged = True
            it -= 1
            break
        try:
            chol = np.linalg.cholesky(-hess)
            step = np.linalg.solve(chol.T, np.linalg.solve(chol, grad))
        except np.linalg.LinAlgError:
            # not concave here; fall back to a scaled gradient step
            step = grad / max(np.max(np.abs(grad)), 1.0)
        t = 1.0
        while True:
            trial = theta + t * step
            ll_new = po_loglik(trial, sub.time, sub.event, zs)
            if np.isfinite(ll_new) and ll_new >= ll + 1e-4 * t * float(grad @ step):
                break
            t *= 0.5
            if t < 1e-12:
                break
        if t < 1e-12:
            # no ascent possible; the gradient test decides convergence
            converged = np.max(np.abs(grad)) / n <= 10 * config.tol
            break
        theta = trial
        ll, grad, hess = po_loglik(theta, sub.time, sub.event, zs, derivatives=True)
        if p and np.max(np.abs(theta[2:])) > config.separation_threshold:
            raise SeparationDetected(
                f"coefficients diverging (max standardized |beta| = {np.max(np.abs(theta[2:])):.3g}); "
                "the likelihood appears unbounded"
            )
    else:
        converged = np.max(np.abs(grad)) / n <= config.tol

    grad_norm = float(np.max(np.abs(grad)) / n)
    if not converged:
        raise NonConvergent(f"Newton iterations stopped with score max-norm {grad_norm:.3g} > {config.tol:.3g}")
    if p:
        # At a true maximum the next Newton step vanishes. Along a separating
        # direction the likelihood flattens like -C exp(-beta), the score
        # underflows the tolerance, yet the Newton step stays near 1.
        try:
            pending = np.linalg.solve(-hess, grad)[2:]
        except np.linalg.LinAlgError:
            pending = np.full(p, np.inf)
        if np.max(np.abs(pending)) > _SEPARATION_STEP:
            raise SeparationDetected(
                f"likelihood still rising along the coefficients (pending Newton step {np.max(np.abs(pending)):.3g}); "
                "the maximum is at infinity"
            )

    # back to the original covariate scale
    beta = theta[2:] / sd
    c = theta[1] + float(beta @ mean)
    a = theta[0]
    J = np.eye(2 + p)
    J[2:, 2:] = np.diag(1.0 / sd)
    J[1, 2:] = mean / sd
    try:
        cov_std = np.linalg.inv(-hess)
        cov = J @ cov_std @ J.T
    except np.linalg.LinAlgError:
        cov = None
    k = math.exp(a)
    scale = math.exp(-c / k)
    ll_final = po_loglik(np.concatenate([[a, c], beta]), sub.time, sub.event, sub.covariates)
    logger.debug("fit subset=%s converged in %d iterations, loglik=%.6f", idx, it, ll_final)
    return FitResult(
        beta=beta,
        baseline_params=(k, scale),
        loglik=ll_final,
        converged=True,
        iterations=it,
        grad_norm=grad_norm,
        subset=idx,
        names=sub.names,
        covariance=cov,
    )


# ---------------------------------------------------------------------------
# synthetic data
# ---------------------------------------------------------------------------


def _draw_covariates(spec, rng, n, p):
    if spec is None:
        spec = "normal"
    if isinstance(spec, str):
        if spec == "normal":
            return rng.standard_normal((n, p))
        if spec == "uniform":
            return rng.uniform(-1.0, 1.0, (n, p))
        if spec == "bernoulli":
            return rng.integers(0, 2, (n, p)).astype(float)
        raise InvalidParam(f"unknown covariate design {spec!r}; choose normal, uniform or bernoulli")
    if callable(spec):
        z = np.asarray(spec(rng, n, p), dtype=float)
    else:
        z = np.asarray(spec, dtype=float)
    if z.shape != (n, p):
        raise DimensionMismatch(f"covariates must have shape {(n, p)}, got {z.shape}")
    return z


def sample_po(
    beta: Sequence[float],
    baseline: Tuple[float, float] = (2.0, 1.0),
    covariates: Union[None, str, np.ndarray, Callable] = None,
    censor_rate: float = 0.0,
    n: int = 1000,
    seed: Optional[int] = None,
) -> SurvivalDataset:
    """Draw a right-censored sample from the proportional-odds log-logistic model.

    Event times invert ``S(t | z) = U``: ``t = s (alpha (1 - U) / U)^(1/k)``
    with ``alpha = exp(beta'z)``. Censoring times are exponential with the
    rate chosen so that the expected censored share equals ``censor_rate``.
    ``covariates`` is ``"normal"`` (default), ``"uniform"``, ``"bernoulli"``,
    an ``(n, p)`` array, or a callable ``(rng, n, p) -> array``.
    """
    beta = np.asarray(beta, dtype=float).ravel()
    shape, scale = (float(v) for v in baseline)
    if not (shape > 0 and scale > 0):
        raise InvalidParam("baseline shape and scale must be positive")
    if not 0.0 <= censor_rate < 1.0:
        raise InvalidParam(f"censor_rate must lie in [0, 1), got {censor_rate}")
    n = int(n)
    if n <= 0:
        raise EmptyInput("n must be positive")
    rng = np.random.default_rng(seed)
    z = _draw_covariates(covariates, rng, n, beta.size)
    u = rng.uniform(size=n)
    log_odds = z @ beta + np.log1p(-u) - np.log(u)
    t = scale * np.exp(log_odds / shape)
    event = np.ones(n, dtype=bool)
    if censor_rate > 0:
        target = censor_rate

        def censored_share(log_rate):
            return float(np.mean(-np.expm1(-math.exp(log_rate) * t))) - target

        log_rate = find_root(censored_share, (-60.0, 60.0), tol=1e-12, scan=False)
        c = rng.exponential(1.0 / math.exp(log_rate), size=n)
        event = t <= c
        t = np.minimum(t, c)
    names = tuple(f"z{i + 1}" for i in range(beta.size))
    return SurvivalDataset(t, event, z, names)


# ---------------------------------------------------------------------------
# estimator
# ---------------------------------------------------------------------------


def _split_target(y):
    y = np.asarray(y)
    if y.dtype.names:
        names = y.dtype.names
        return np.asarray(y[names[1]], dtype=float), np.asarray(y[names[0]]).astype(bool)
    y = check_array(y, ensure_2d=True, dtype=float)
    if y.shape[1] != 2:
        raise DimensionMismatch("y must have two columns: (time, event)")
    return y[:, 0], y[:, 1].astype(bool)


class POSurvivalRegressor(BaseEstimator):
    """Proportional-odds regression with a log-logistic baseline.

    ``fit(X, y)`` takes ``y`` as an ``(n, 2)`` array of ``(time, event)`` or
    a structured array with fields ``(event, time)``. ``predict`` returns the
    linear predictor ``beta'z``; ``predict_survival`` evaluates ``S(t | z)``.
    """

    def __init__(self, tol: float = 1e-8, max_iter: int = 200, separation_threshold: float = 30.0):
        self.tol = tol
        self.max_iter = max_iter
        self.separation_threshold = separation_threshold

    def fit(self, X, y):
        X = check_array(X, dtype=float, ensure_min_features=0)
        time, event = _split_target(y)
        if time.size != X.shape[0]:
            raise DimensionMismatch(f"X has {X.shape[0]} rows but y has {time.size}")
        data = SurvivalDataset(time, event, X)
        cfg = FitConfig(self.tol, self.max_iter, self.separation_threshold)
        self.result_ = fit_po_mle(data, config=cfg)
        self.coef_ = self.result_.beta
        self.baseline_shape_, self.baseline_scale_ = self.result_.baseline_params
        self.n_features_in_ = X.shape[1]
        return self

    def _check_X(self, X):
        check_is_fitted(self, "result_")
        X = check_array(X, dtype=float, ensure_min_features=0)
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatch(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return X

    def predict(self, X):
        return self._check_X(X) @ self.coef_

    def predict_survival(self, X, t):
        X = self._check_X(X)
        t = np.asarray(t, dtype=float)
        w = self.baseline_shape_ * (np.log(t)[None, :] - math.log(self.baseline_scale_)) - (X @ self.coef_)[:, None]
        return special.expit(-w)

    def score(self, X, y):
        """Mean log-likelihood per observation."""
        X = self._check_X(X)
        time, event = _split_target(y)
        k = self.baseline_shape_
        params = np.concatenate([[math.log(k), -k * math.log(self.baseline_scale_)], self.coef_])
        return po_loglik(params, time, event, X) / time.size
