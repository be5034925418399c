"""Information analysis of all covariate subsets under proportional odds.

Each nonempty subset ``V_j`` of the covariates gives a PO model whose tilt
against the null at a prediction point ``z`` is ``exp(x_j)`` with
``x_j = beta_j'z``. Because the PO divergence from the null is symmetric,
``K_j0 = kl_po_null(x_j)`` ranks the subsets unambiguously and supplies the
information weights ``w_j = K_j0 / sum K``.

Divergences among PO models that share a baseline do not depend on the
baseline, so quantities like the Jensen-Shannon divergence are computed in
log-odds coordinates ``t = logit S0(X)``, where model ``j`` is a standard
logistic located at ``-x_j``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import special
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .distributions import UnivariateModel
from .divergence import _kl_density, kl_po_null
from .exceptions import BoundViolation, DimensionMismatch, EmptyInput, InvalidParam, TooLarge
from .fitting import FitConfig, FitResult, SurvivalDataset, fit_po_mle, linear_predictor
from .links import po_transform
from .numerics import DEFAULT_QUADRATURE, QuadratureSpec, integrate_adaptive

__all__ = [
    "SubsetModel",
    "EvaluationTable",
    "PairwiseDivergences",
    "enumerate_subsets",
    "subset_label",
    "evaluate_table",
    "average_parameter",
    "reference_divergences",
    "mixture_survival",
    "pairwise_matrix",
    "js_and_bounds",
    "SubsetInformationAnalysis",
]

MAX_FEATURES = 20


def enumerate_subsets(p: int) -> List[Tuple[int, ...]]:
    """All nonempty subsets of ``range(p)``, by size and then lexicographically."""
    p = int(p)
    if p < 1:
        raise InvalidParam(f"need at least one feature, got p={p}")
    if p > MAX_FEATURES:
        raise TooLarge(f"p={p} would give {2**p - 1} subsets; the limit is p <= {MAX_FEATURES}")
    return [c for r in range(1, p + 1) for c in itertools.combinations(range(p), r)]


def subset_label(subset: Sequence[int], names: Optional[Sequence[str]] = None) -> str:
    names = names or [f"z{i + 1}" for i in range(max(subset) + 1)]
    return ",".join(names[i] for i in subset)


@dataclass(frozen=True)
class SubsetModel:
    j: int
    subset: Tuple[str, ...]
    x: float
    k_null: float
    rank: int
    weight: float

    def to_dict(self) -> dict:
        return {
            "j": self.j,
            "subset": list(self.subset),
            "x": self.x,
            "k_null": self.k_null,
            "rank": self.rank,
            "weight": self.weight,
        }


@dataclass(frozen=True)
class EvaluationTable:
    """Per-subset divergences, ranks and weights at one prediction point.

    ``beta_r_lin`` is the weighted average ``sum w_j x_j``; ``k_r0`` its
    divergence from the null; ``bound_null`` the bound ``sum w_j K_j0``.
    ``H_w`` is the weight entropy, ``B_wJ = sum_{j<k} w_j w_k J_jk`` and
    ``fraction_below`` the share of pairwise ``K_jk`` below ``min(H_w, B_wJ)``.
    """

    label: str
    models: Tuple[SubsetModel, ...]
    sum_k: float
    beta_r_lin: float
    k_r0: float
    bound_null: float
    H_w: float
    B_wJ: float
    fraction_below: float
    n_pairs: int
    point: Optional[Tuple[float, ...]] = None
    js: Optional[float] = None

    @property
    def x(self) -> np.ndarray:
        return np.array([m.x for m in self.models])

    @property
    def k(self) -> np.ndarray:
        return np.array([m.k_null for m in self.models])

    @property
    def weights(self) -> np.ndarray:
        return np.array([m.weight for m in self.models])

    @property
    def ranks(self) -> np.ndarray:
        return np.array([m.rank for m in self.models])

    def __len__(self):
        return len(self.models)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "point": None if self.point is None else list(self.point),
            "models": [m.to_dict() for m in self.models],
            "sum_k": self.sum_k,
            "beta_r_lin": self.beta_r_lin,
            "k_r0": self.k_r0,
            "bound_null": self.bound_null,
            "H_w": self.H_w,
            "B_wJ": self.B_wJ,
            "fraction_below": self.fraction_below,
            "n_pairs": self.n_pairs,
            "js": self.js,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvaluationTable":
        models = tuple(
            SubsetModel(m["j"], tuple(m["subset"]), m["x"], m["k_null"], m["rank"], m["weight"]) for m in d["models"]
        )
        return cls(
            label=d["label"],
            models=models,
            sum_k=d["sum_k"],
            beta_r_lin=d["beta_r_lin"],
            k_r0=d["k_r0"],
            bound_null=d["bound_null"],
            H_w=d["H_w"],
            B_wJ=d["B_wJ"],
            fraction_below=d["fraction_below"],
            n_pairs=d["n_pairs"],
            point=None if d.get("point") is None else tuple(d["point"]),
            js=d.get("js"),
        )


@dataclass(frozen=True)
class PairwiseDivergences:
    """Pairwise PO divergences ``K_jk`` (symmetric), Jeffreys ``J = 2K`` and intrinsic ``min(K_jk, K_kj) = K``."""

    K: np.ndarray
    labels: Tuple[str, ...] = ()

    @property
    def J(self) -> np.ndarray:
        return 2.0 * self.K

    @property
    def intrinsic(self) -> np.ndarray:
        return np.minimum(self.K, self.K.T)

    @property
    def n_pairs(self) -> int:
        n = self.K.shape[0]
        return n * (n - 1) // 2

    def upper(self) -> np.ndarray:
        """The ``N(N-1)/2`` distinct off-diagonal values."""
        return self.K[np.triu_indices(self.K.shape[0], 1)]


def _kl_po_null_vec(x) -> np.ndarray:
    x = np.abs(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    small = x < 1e-3
    xs = x[small] ** 2
    out[small] = xs / 6 - xs * xs / 360 + xs**3 / 15120
    xl = x[~small]
    out[~small] = xl / np.tanh(xl / 2) - 2.0
    return out


def _pairwise_k(x: np.ndarray) -> np.ndarray:
    K = _kl_po_null_vec(x[:, None] - x[None, :])
    np.fill_diagonal(K, 0.0)
    return K


def _ranks(k: np.ndarray) -> np.ndarray:
    # descending K, ties go to the lower index
    order = np.lexsort((np.arange(k.size), -k))
    ranks = np.empty(k.size, dtype=int)
    ranks[order] = np.arange(1, k.size + 1)
    return ranks


def _weights(k: np.ndarray) -> np.ndarray:
    total = k.sum()
    if total <= 0:
        return np.full(k.size, 1.0 / k.size)
    return k / total


def _entropy(w: np.ndarray) -> float:
    pos = w[w > 0]
    return float(-np.sum(pos * np.log(pos)))


def evaluate_table(
    predictors: Sequence[Union[float, FitResult]],
    z_label: str = "",
    *,
    subsets: Optional[Sequence[Sequence[str]]] = None,
    point: Optional[Sequence[float]] = None,
) -> EvaluationTable:
    """Build the information table from linear predictors ``x_j``.

    ``predictors`` holds raw ``x_j`` values or :class:`FitResult` objects;
    the latter need ``point``, the full covariate vector, from which each
    fit picks its own subset.
    """
    if len(predictors) == 0:
        raise EmptyInput("no models to evaluate")
    xs = []
    for p in predictors:
        if isinstance(p, FitResult):
            if point is None:
                raise InvalidParam("a prediction point is needed to evaluate fitted models")
            z = np.asarray(point, dtype=float)
            xs.append(linear_predictor(p, z[list(p.subset)]))
        else:
            xs.append(float(p))
    x = np.asarray(xs, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InvalidParam("linear predictors must be finite")
    n = x.size
    if subsets is None:
        subsets = [
            tuple(p.names) if isinstance(p, FitResult) and p.names else (f"model{j + 1}",)
            for j, p in enumerate(predictors)
        ]
    if len(subsets) != n:
        raise DimensionMismatch(f"{len(subsets)} subset labels for {n} predictors")

    k = _kl_po_null_vec(x)
    w = _weights(k)
    ranks = _ranks(k)
    beta_r = float(w @ x)
    K = _pairwise_k(x)
    h_w = _entropy(w)
    iu = np.triu_indices(n, 1)
    b_wj = float(np.sum(np.outer(w, w)[iu] * 2.0 * K[iu]))
    pair_vals = K[iu]
    fraction = float(np.mean(pair_vals < min(h_w, b_wj))) if pair_vals.size else 0.0
    models = tuple(
        SubsetModel(j + 1, tuple(subsets[j]), float(x[j]), float(k[j]), int(ranks[j]), float(w[j])) for j in range(n)
    )
    return EvaluationTable(
        label=z_label,
        models=models,
        sum_k=float(k.sum()),
        beta_r_lin=beta_r,
        k_r0=kl_po_null(beta_r),
        bound_null=float(w @ k),
        H_w=h_w,
        B_wJ=b_wj,
        fraction_below=fraction,
        n_pairs=int(pair_vals.size),
        point=None if point is None else tuple(float(v) for v in point),
    )


def average_parameter(table: EvaluationTable) -> float:
    """Information-weighted average linear predictor ``sum w_j x_j``.

    The corresponding tilt is the weighted geometric mean of the tilts.
    """
    return float(table.weights @ table.x)


def reference_divergences(
    table: EvaluationTable, reference: float = 0.0
) -> Tuple[float, float, np.ndarray]:
    """``(k_r0, bound, K(f_j : f_r))`` for the averaged model ``f_r``.

    ``bound`` is ``sum w_j K(f_j : f_ref)`` with the reference model given by
    its linear predictor; the default (the null) is the table's bound row.
    """
    x = table.x
    w = table.weights
    beta_r = average_parameter(table)
    bound = float(w @ _kl_po_null_vec(x - float(reference)))
    to_r = _kl_po_null_vec(x - beta_r)
    return kl_po_null(beta_r), bound, to_r


def mixture_survival(table: EvaluationTable, baseline: UnivariateModel, x) -> Union[float, np.ndarray]:
    """Information-weighted mixture ``S_m(x) = sum w_j G_{alpha_j}(S0(x))``, ``alpha_j = exp(x_j)``."""
    xa = np.asarray(x, dtype=float)
    s0 = np.asarray(baseline.sf(xa), dtype=float)
    with np.errstate(divide="ignore"):
        lo = special.logit(s0)
    comps = special.expit(lo[..., None] + table.x)
    out = comps @ table.weights
    return float(out) if out.ndim == 0 else out


def pairwise_matrix(table: EvaluationTable) -> PairwiseDivergences:
    """All ``K_jk = kl_po_pair(x_j, x_k)``; symmetric with a zero diagonal."""
    K = _pairwise_k(table.x)
    K = np.triu(K, 1)
    K = K + K.T
    return PairwiseDivergences(K, tuple(",".join(m.subset) for m in table.models))


def _logistic_logpdf(t):
    return -t - 2.0 * np.logaddexp(0.0, -t)


def _js_log_odds(x: np.ndarray, w: np.ndarray, spec: QuadratureSpec) -> float:
    keep = w > 0
    x, w = x[keep], w[keep]
    log_w = np.log(w)
    points = sorted(set((-x).tolist()))

    def log_mix(t):
        return special.logsumexp(log_w + _logistic_logpdf(t[..., None] + x), axis=-1)

    total = 0.0
    for xj, wj in zip(x, w):

        def integrand(t, xj=xj):
            t = np.asarray(t, dtype=float)
            return _kl_density(_logistic_logpdf(t + xj), log_mix(t))

        val, _ = integrate_adaptive(integrand, -np.inf, np.inf, spec, points=points)
        total += wj * val
    return total


def _js_direct(x: np.ndarray, w: np.ndarray, baseline: UnivariateModel, spec: QuadratureSpec) -> float:
    keep = w > 0
    x, w = x[keep], w[keep]
    models = [po_transform(math.exp(v), baseline) for v in x]
    log_w = np.log(w)
    lo, hi = baseline.support
    spec = spec.replace(scale=baseline.typical_scale)
    points = set(baseline.breakpoints)
    for m in models:
        points.add(float(m.ppf(0.5)))

    def log_mix(t):
        lp = np.stack([np.asarray(m.logpdf(t), dtype=float) for m in models], axis=-1)
        return special.logsumexp(log_w + lp, axis=-1)

    total = 0.0
    for m, wj in zip(models, w):

        def integrand(t, m=m):
            return _kl_density(m.logpdf(t), log_mix(t))

        val, _ = integrate_adaptive(integrand, lo, hi, spec, points=sorted(points))
        total += wj * val
    return total


def js_and_bounds(
    table: EvaluationTable,
    baseline: Optional[UnivariateModel] = None,
    *,
    tol: float = 1e-8,
    spec: Optional[QuadratureSpec] = None,
) -> Tuple[float, float, float, float]:
    """Jensen-Shannon divergence of the weighted models and its two upper bounds.

    Returns ``(js, H_w, B_wJ, fraction_below)``. ``js = sum w_j K(f_j : f_m)``
    is integrated in log-odds coordinates, or in the original coordinates
    when a ``baseline`` is given (same value, slower, and limited to modest
    tilts). Raises :class:`BoundViolation` if ``js`` exceeds
    ``min(H_w, B_wJ)`` by more than ``tol``.
    """
    spec = spec or DEFAULT_QUADRATURE
    x, w = table.x, table.weights
    if np.count_nonzero(w) <= 1:
        js = 0.0
    elif baseline is None:
        js = _js_log_odds(x, w, spec)
    else:
        js = _js_direct(x, w, baseline, spec)
    js = max(float(js), 0.0)
    bound = min(table.H_w, table.B_wJ)
    if js > bound + tol:
        raise BoundViolation(f"Jensen-Shannon divergence {js:.6g} exceeds min(H_w, B_wJ) = {bound:.6g}")
    return js, table.H_w, table.B_wJ, table.fraction_below


# ---------------------------------------------------------------------------
# estimator
# ---------------------------------------------------------------------------


class SubsetInformationAnalysis(TransformerMixin, BaseEstimator):
    """Fit a PO model on every covariate subset and score subsets at prediction points.

    ``fit(X, y)`` takes ``y`` as ``(time, event)`` columns. ``transform(Z)``
    maps each prediction point (row of ``Z``) to the vector of linear
    predictors ``x_j``; :meth:`evaluate` builds the full table for one point.
    """

    def __init__(self, feature_names: Optional[Sequence[str]] = None, tol: float = 1e-8, max_iter: int = 200):
        self.feature_names = feature_names
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y):
        X = check_array(X, dtype=float, ensure_all_finite="allow-nan")
        y = check_array(y, dtype=float)
        if y.shape != (X.shape[0], 2):
            raise DimensionMismatch("y must have two columns (time, event) with one row per sample")
        names = tuple(self.feature_names) if self.feature_names is not None else None
        data = SurvivalDataset(y[:, 0], y[:, 1], X, names or ())
        cfg = FitConfig(tol=self.tol, max_iter=self.max_iter)
        self.subsets_ = enumerate_subsets(data.p)
        self.fits_ = [fit_po_mle(data, s, cfg) for s in self.subsets_]
        self.names_ = data.names
        self.n_features_in_ = data.p
        return self

    def transform(self, Z):
        check_is_fitted(self, "fits_")
        Z = check_array(Z, dtype=float)
        if Z.shape[1] != self.n_features_in_:
            raise DimensionMismatch(f"expected {self.n_features_in_} features, got {Z.shape[1]}")
        return np.array([[linear_predictor(f, z[list(f.subset)]) for f in self.fits_] for z in Z])

    def evaluate(self, z, label: str = "") -> EvaluationTable:
        check_is_fitted(self, "fits_")
        labels = [tuple(self.names_[i] for i in s) for s in self.subsets_]
        return evaluate_table(self.fits_, label, subsets=labels, point=z)
