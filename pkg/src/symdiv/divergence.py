"""Kullback-Leibler and Renyi divergences between linked models.

For a survival link ``S1 = G(S2)`` the change of variables ``u = S2(x)``
removes the baseline entirely:

    K_q(f1 : f2) = log(int_0^1 g(u)^q du) / (q - 1)
    K_q(f2 : f1) = log(int_0^1 g(u)^(1-q) du) / (q - 1)

and for a generalized location link ``F1 = G(G^-1(F2) + theta)`` the
substitution ``v = G^-1(F2(x))`` gives integrals of ``g(v)^q g(v -/+ theta)^(1-q)``.
Both are computed here by quadrature on the link alone, alongside closed
forms for the proportional-odds and proportional-hazards families and a
direct quadrature between two arbitrary models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .distributions import UnivariateModel
from .exceptions import InvalidParam, NonConvergent, NonFinite, SupportMismatch
from .links import (
    PiecewiseUniformLink,
    POLink,
    PowerLink,
    RealLink,
    UnitLink,
)
from .numerics import DEFAULT_QUADRATURE, QuadratureSpec, integrate_adaptive, scan_roots

__all__ = [
    "DivergenceResult",
    "SymmetryReport",
    "kl_po_null",
    "kl_po_pair",
    "renyi_po",
    "kl_ph",
    "renyi_unit_link",
    "renyi_gll",
    "check_survival_link_symmetry",
    "check_gll_symmetry",
    "kl_generic",
    "jeffreys",
    "intrinsic_information",
]

_DIRECTIONS = ("forward", "reverse")
# radius around removable singularities inside which limits/series are used
_LIMIT_RADIUS = 1e-4
_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class DivergenceResult:
    """A divergence value in nats.

    ``direction`` is ``forward`` for ``K(f1 : f2)`` (derived model first) and
    ``reverse`` for ``K(f2 : f1)``. Small negative quadrature results are
    clamped to zero; the amount removed is kept in ``clamped``.
    """

    value: float
    q: float = 1.0
    direction: str = "forward"
    method: str = "quadrature"
    err_estimate: float = 0.0
    clamped: float = 0.0

    def __float__(self):
        return float(self.value)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "q": self.q,
            "direction": self.direction,
            "method": self.method,
            "err_estimate": self.err_estimate,
            "clamped": self.clamped,
        }


@dataclass(frozen=True)
class SymmetryReport:
    """Outcome of testing ``K_q(f1:f2) == K_q(f2:f1)`` over a grid of orders.

    ``condition_lhs``/``condition_rhs`` are the forward and reverse values at
    the order with the largest defect.
    """

    condition_lhs: float
    condition_rhs: float
    defect: float
    q_grid: Tuple[float, ...]
    verdict: str
    tolerance: float
    per_q: Tuple[Tuple[float, float, float], ...] = ()
    extra: Dict[str, object] = field(default_factory=dict)

    @property
    def symmetric(self) -> bool:
        return self.verdict == "symmetric"

    def to_dict(self) -> dict:
        return {
            "condition_lhs": self.condition_lhs,
            "condition_rhs": self.condition_rhs,
            "defect": self.defect,
            "q_grid": list(self.q_grid),
            "verdict": self.verdict,
            "tolerance": self.tolerance,
            "per_q": [list(t) for t in self.per_q],
            "extra": {k: (list(v) if isinstance(v, (tuple, np.ndarray)) else v) for k, v in self.extra.items()},
        }


def _check_q(q) -> float:
    q = float(q)
    if not (q > 0 and math.isfinite(q)):
        raise InvalidParam(f"order q must be a positive finite number, got {q}")
    return q


def _check_direction(direction: str) -> str:
    if direction not in _DIRECTIONS:
        raise InvalidParam(f"direction must be 'forward' or 'reverse', got {direction!r}")
    return direction


def _finish(value, err, q, direction, method) -> DivergenceResult:
    value = float(value)
    clamped = 0.0
    if value < 0:
        clamped, value = -value, 0.0
    return DivergenceResult(value, q, direction, method, float(err), clamped)


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


def kl_po_null(x: float) -> float:
    """Symmetric KL between a proportional-odds model with tilt ``e^x`` and its baseline.

    ``K = x (e^x + 1)/(e^x - 1) - 2 = x coth(x/2) - 2``; even in ``x``.
    """
    x = abs(float(x))
    if not math.isfinite(x):
        raise InvalidParam("log tilt must be finite")
    if x < 1e-3:
        x2 = x * x
        return x2 / 6 - x2 * x2 / 360 + x2**3 / 15120
    return x / math.tanh(x / 2) - 2.0


def kl_po_pair(a: float, b: float) -> float:
    """KL between two proportional-odds models with log tilts ``a`` and ``b`` (same baseline)."""
    return kl_po_null(float(a) - float(b))


def _log_x_over_expm1(x: float) -> float:
    # log(x / (e^x - 1)), accurate for all real x
    if abs(x) < 1e-8:
        return -x / 2
    if x > 0:
        return math.log(x) - x - math.log1p(-math.exp(-x))
    return math.log(-x) - math.log1p(-math.exp(x))


def _log_sinhc(y: float) -> float:
    # log(sinh(y) / y)
    y = abs(y)
    if y < 1e-4:
        return y * y / 6
    if y < 20:
        return math.log(math.sinh(y) / y)
    return y + math.log1p(-math.exp(-2 * y)) - math.log(2 * y)


def _renyi_po_raw(log_alpha: float, q: float) -> float:
    L = log_alpha
    if abs(L) < _LIMIT_RADIUS:
        # leading term of the expansion in L
        return q * L * L / 6
    log_r = L / 2 + _log_x_over_expm1(L) + _log_sinhc((q - 0.5) * L)
    return log_r / (q - 1.0)


def renyi_po(alpha: float, q: float) -> float:
    """Renyi divergence of order ``q`` between a proportional-odds model with tilt ``alpha`` and its baseline.

    Closed form ``log[(alpha^q - alpha^(1-q)) / ((alpha-1)(2q-1))] / (q-1)``,
    evaluated as ``sqrt(alpha) * L/(e^L - 1) * sinh(eps L)/(eps L)`` with
    ``L = log alpha`` and ``eps = q - 1/2`` so that ``alpha = 1`` and
    ``q = 1/2`` need no special casing. The value is the same in both
    directions.
    """
    alpha = float(alpha)
    if not alpha > 0 or not math.isfinite(alpha):
        raise InvalidParam(f"alpha must be positive, got {alpha}")
    q = _check_q(q)
    L = math.log(alpha)
    if abs(q - 1.0) < _LIMIT_RADIUS:
        # quadratic through q = 1 - h, 1, 1 + h
        h = _LIMIT_RADIUS
        k0 = kl_po_null(L)
        km = _renyi_po_raw(L, 1.0 - h)
        kp = _renyi_po_raw(L, 1.0 + h)
        t = (q - 1.0) / h
        return k0 + t * (kp - km) / 2 + t * t * (kp - 2 * k0 + km) / 2
    return max(_renyi_po_raw(L, q), 0.0)


def kl_ph(x: float, direction: str = "forward") -> float:
    """KL for the proportional-hazards model ``S1 = S0^(e^x)``.

    ``forward`` is ``K(f1 : f0) = e^-x + x - 1``, ``reverse`` is
    ``K(f0 : f1) = e^x - x - 1``.
    """
    x = float(x)
    if not math.isfinite(x):
        raise InvalidParam("log hazard ratio must be finite")
    _check_direction(direction)
    if direction == "forward":
        return math.expm1(-x) + x
    return math.expm1(x) - x


def _closed_form_unit(link: UnitLink, q: float, direction: str) -> Optional[float]:
    if isinstance(link, POLink):
        return renyi_po(link.alpha, q)
    if isinstance(link, PowerLink):
        pi = link.pi
        if pi == 1.0:
            return 0.0
        # int_0^1 (pi u^(pi-1))^s du = pi^s / (s (pi - 1) + 1)
        s = q if direction == "forward" else 1.0 - q
        if abs(q - 1.0) < 1e-12:
            if direction == "forward":
                return math.log(pi) - (pi - 1.0) / pi
            return -math.log(pi) + (pi - 1.0)
        if s * (pi - 1.0) + 1.0 <= 0:
            return math.inf
        return (s * math.log(pi) - math.log(s * (pi - 1.0) + 1.0)) / (q - 1.0)
    if isinstance(link, PiecewiseUniformLink):
        p = link.p
        lo, hi = math.log((1 - p) / p), math.log(p / (1 - p))
        s = q if direction == "forward" else 1.0 - q
        if abs(q - 1.0) < 1e-12:
            return (1 - 2 * p) * lo
        # p * low^s + (1 - p) * high^s
        integral = p * math.exp(s * lo) + (1 - p) * math.exp(s * hi)
        return math.log(integral) / (q - 1.0)
    return None


# ---------------------------------------------------------------------------
# link quadratures
# ---------------------------------------------------------------------------


def _kl_density(l1, l2):
    """``f1 log(f1/f2)`` from log densities; zero wherever ``f1`` underflows.

    Subnormal ``f1`` counts as underflow: a model whose density is computed
    through its CDF reports -inf once that CDF has underflowed.
    """
    l1 = np.asarray(l1, dtype=float)
    l2 = np.asarray(l2, dtype=float)
    p1 = np.exp(l1)
    with np.errstate(invalid="ignore", over="ignore"):
        out = p1 * (l1 - l2)
    return np.where(p1 < _TINY, 0.0, out)


def _renyi_density(l1, l2, q):
    """``f1^q f2^(1-q)`` from log densities."""
    l1 = np.asarray(l1, dtype=float)
    l2 = np.asarray(l2, dtype=float)
    with np.errstate(invalid="ignore", over="ignore"):
        out = np.exp(q * l1 + (1.0 - q) * l2)
    drop = np.isnan(out)
    if q > 1:
        # f2 underflowing under a negligible f1 is not a support violation
        drop |= np.exp(l1) < _TINY
    return np.where(drop, 0.0, out)


def _log_integral_to_renyi(integral, err, q):
    value = math.log(integral) / (q - 1.0)
    return value, err / (abs(q - 1.0) * integral)


def renyi_unit_link(
    link: UnitLink,
    q: float,
    direction: str = "forward",
    *,
    method: str = "quadrature",
    spec: Optional[QuadratureSpec] = None,
) -> DivergenceResult:
    """Renyi divergence between ``S1 = G(S2)`` and ``S2``, for any baseline ``S2``.

    ``forward`` integrates ``g^q`` (``g log g`` at ``q = 1``), ``reverse``
    integrates ``g^(1-q)`` (``-log g`` at ``q = 1``) over ``[0, 1]``.
    ``method="closed_form"`` uses the analytic value where one is known
    (proportional odds, power and piecewise-uniform links).
    """
    q = _check_q(q)
    _check_direction(direction)
    if method == "closed_form":
        val = _closed_form_unit(link, q, direction)
        if val is None:
            raise InvalidParam(f"no closed form registered for {link!r}")
        return _finish(val, 0.0, q, direction, "closed_form")
    if method != "quadrature":
        raise InvalidParam(f"method must be 'quadrature' or 'closed_form', got {method!r}")

    spec = spec or DEFAULT_QUADRATURE
    points = link.jumps
    if q == 1.0:
        if direction == "forward":

            def integrand(u):
                lg = link.logpdf(u)
                return np.where(np.isneginf(lg), 0.0, np.exp(lg) * lg)

        else:

            def integrand(u):
                return -link.logpdf(u)

        value, err = integrate_adaptive(integrand, 0.0, 1.0, spec, points=points)
        return _finish(value, err, q, direction, "quadrature")

    power = q if direction == "forward" else 1.0 - q

    def integrand(u):
        lg = link.logpdf(u)
        with np.errstate(over="ignore", invalid="ignore"):
            return np.where(np.isneginf(lg) & (power > 0), 0.0, np.exp(power * lg))

    try:
        integral, err = integrate_adaptive(integrand, 0.0, 1.0, spec, points=points)
    except NonFinite as exc:
        raise NonConvergent(f"int g^{power:g} over [0, 1] diverges for {link!r}: {exc}") from exc
    value, err = _log_integral_to_renyi(integral, err, q)
    return _finish(value, err, q, direction, "quadrature")


def _gll_points(link: RealLink, theta: float) -> List[float]:
    kinks = np.asarray(link.kinks, dtype=float)
    pts = np.concatenate([kinks, kinks + theta, kinks - theta])
    return sorted(set(pts.tolist()))


def renyi_gll(
    link: RealLink,
    theta: float,
    q: float,
    direction: str = "forward",
    *,
    spec: Optional[QuadratureSpec] = None,
) -> DivergenceResult:
    """Renyi divergence between ``F1 = G(G^-1(F2) + theta)`` and ``F2``, for any baseline.

    ``forward`` is ``K_q(f1 : f2)``, which reduces to integrals of
    ``g(w)^q g(w - theta)^(1-q)``; ``reverse`` uses ``g(v)^q g(v + theta)^(1-q)``.
    At ``q = 1`` the full KL ``int g log(g / g_shifted)`` is returned.
    """
    q = _check_q(q)
    _check_direction(direction)
    theta = float(theta)
    if not math.isfinite(theta):
        raise InvalidParam("shift must be finite")
    if theta == 0.0:
        return DivergenceResult(0.0, q, direction, "closed_form", 0.0)
    spec = (spec or DEFAULT_QUADRATURE).replace(scale=link.scale)
    shift = -theta if direction == "forward" else theta
    points = _gll_points(link, theta)

    if q == 1.0:

        def integrand(v):
            return _kl_density(link.logpdf(v), link.logpdf(v + shift))

        value, err = integrate_adaptive(integrand, -np.inf, np.inf, spec, points=points)
        return _finish(value, err, q, direction, "quadrature")

    def integrand(v):
        return _renyi_density(link.logpdf(v), link.logpdf(v + shift), q)

    integral, err = integrate_adaptive(integrand, -np.inf, np.inf, spec, points=points)
    value, err = _log_integral_to_renyi(integral, err, q)
    return _finish(value, err, q, direction, "quadrature")


# ---------------------------------------------------------------------------
# symmetry checks
# ---------------------------------------------------------------------------


def _divergent(q, direction):
    return DivergenceResult(math.inf, q, direction, "divergent", math.inf)


def _both_directions(compute, q):
    out = []
    for direction in _DIRECTIONS:
        try:
            out.append(compute(q, direction))
        except NonConvergent:
            out.append(_divergent(q, direction))
    return (q, *out)


def _symmetry_report(pairs, q_grid, tol, extra=None) -> SymmetryReport:
    """Summarize forward/reverse pairs.

    An order where exactly one direction diverges is asymmetric; the reported
    ``defect`` is the worst finite one when any exists.
    """
    per_q = []
    worst = None
    verdict = "symmetric"
    divergent = []
    for q, fwd, rev in pairs:
        per_q.append((q, fwd.value, rev.value))
        if math.isinf(fwd.value) or math.isinf(rev.value):
            divergent.append(q)
            if math.isinf(fwd.value) != math.isinf(rev.value) and q != 0.5:
                verdict = "asymmetric"
            continue
        defect = fwd.value - rev.value
        # q = 1/2 is symmetric for every pair of models, so it cannot decide
        if q == 0.5:
            continue
        noise = fwd.err_estimate + rev.err_estimate
        if abs(defect) > tol + noise:
            verdict = "asymmetric"
        if worst is None or abs(defect) > abs(worst[0]):
            worst = (defect, fwd.value, rev.value)
    if worst is None:
        q, fwd, rev = pairs[0]
        with np.errstate(invalid="ignore"):
            worst = (fwd.value - rev.value, fwd.value, rev.value)
    extra = dict(extra or {})
    if divergent:
        extra["divergent_q"] = tuple(divergent)
    return SymmetryReport(
        condition_lhs=worst[1],
        condition_rhs=worst[2],
        defect=worst[0],
        q_grid=tuple(q_grid),
        verdict=verdict,
        tolerance=tol,
        per_q=tuple(per_q),
        extra=extra,
    )


def _grid(q_grid) -> Tuple[float, ...]:
    grid = tuple(_check_q(q) for q in q_grid)
    if not grid:
        raise InvalidParam("q_grid must not be empty")
    return grid


def check_survival_link_symmetry(
    link: UnitLink,
    q_grid: Sequence[float] = (0.5, 1.0, 2.0, 3.0),
    tol: float = 1e-6,
    *,
    spec: Optional[QuadratureSpec] = None,
) -> SymmetryReport:
    """Test whether ``S1 = G(S2)`` gives direction-free Renyi divergences.

    The verdict is ``symmetric`` when forward and reverse agree within
    ``tol`` (plus the quadrature error estimates) at every order in the grid.
    """
    grid = _grid(q_grid)
    pairs = [_both_directions(lambda q, d: renyi_unit_link(link, q, d, spec=spec), q) for q in grid]
    return _symmetry_report(pairs, grid, tol)


def _gumbel_condition(m):
    m = np.asarray(m, dtype=float)
    return np.expm1(m) - np.expm1(-m) - 2 * m


def check_gll_symmetry(
    link: RealLink,
    theta: float,
    q_grid: Sequence[float] = (0.5, 1.0, 2.0),
    tol: float = 1e-6,
    *,
    spec: Optional[QuadratureSpec] = None,
) -> SymmetryReport:
    """Test whether the generalized location model with shift ``theta`` has symmetric divergences.

    For the Gumbel link the report also carries the real roots of
    ``e^m - e^-m - 2m`` (the condition for the two KL directions to match);
    the only root is ``m = 0``.
    """
    grid = _grid(q_grid)
    pairs = [_both_directions(lambda q, d: renyi_gll(link, theta, q, d, spec=spec), q) for q in grid]
    extra = {}
    if link.kind == "gumbel":
        roots = scan_roots(_gumbel_condition, (-20.0, 20.0), tol=1e-12)
        extra["gumbel_roots"] = tuple(float(r) for r in roots)
    return _symmetry_report(pairs, grid, tol, extra)


# ---------------------------------------------------------------------------
# direct quadrature between two models
# ---------------------------------------------------------------------------


def kl_generic(
    m1: UnivariateModel,
    m2: UnivariateModel,
    q: float = 1.0,
    *,
    spec: Optional[QuadratureSpec] = None,
) -> DivergenceResult:
    """``K_q(m1 : m2)`` by direct quadrature of the defining integral (KL at ``q = 1``)."""
    q = _check_q(q)
    if tuple(m1.support) != tuple(m2.support):
        raise SupportMismatch(f"supports differ: {m1.support} vs {m2.support}")
    lo, hi = m1.support
    scale = max(m1.typical_scale, m2.typical_scale)
    spec = (spec or DEFAULT_QUADRATURE).replace(scale=scale)
    # centre infinite ranges near the mass of the models
    shift = 0.0
    if not np.isfinite(lo) and not np.isfinite(hi):
        shift = 0.5 * (m1.typical_location + m2.typical_location)
    points = set(m1.breakpoints) | set(m2.breakpoints) | {m1.typical_location, m2.typical_location}
    points = [p - shift for p in points if lo < p < hi]

    if q == 1.0:

        def integrand(y):
            x = y + shift
            return _kl_density(m1.logpdf(x), m2.logpdf(x))

        value, err = integrate_adaptive(integrand, lo - shift, hi - shift, spec, points=points)
        return _finish(value, err, q, "forward", "quadrature")

    def integrand(y):
        x = y + shift
        return _renyi_density(m1.logpdf(x), m2.logpdf(x), q)

    integral, err = integrate_adaptive(integrand, lo - shift, hi - shift, spec, points=points)
    value, err = _log_integral_to_renyi(integral, err, q)
    return _finish(value, err, q, "forward", "quadrature")


def jeffreys(m1: UnivariateModel, m2: UnivariateModel, *, spec: Optional[QuadratureSpec] = None) -> float:
    """Jeffreys divergence ``K(m1 : m2) + K(m2 : m1)``."""
    return kl_generic(m1, m2, spec=spec).value + kl_generic(m2, m1, spec=spec).value


def intrinsic_information(m1: UnivariateModel, m2: UnivariateModel, *, spec: Optional[QuadratureSpec] = None) -> float:
    """Intrinsic discrepancy ``min{K(m1 : m2), K(m2 : m1)}``."""
    return min(kl_generic(m1, m2, spec=spec).value, kl_generic(m2, m1, spec=spec).value)
