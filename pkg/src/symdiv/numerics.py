"""Quadrature and root-finding kernels.

Everything downstream (divergences, equilibrium transforms, copulas) reduces
to one-dimensional integrals over finite or infinite intervals, so the core of
this module is a globally adaptive Gauss-Kronrod (10/21 point) rule that maps
infinite tails onto a finite interval before subdividing.

Integrands are evaluated on whole arrays of nodes at once; a scalar-only
callable still works but is evaluated node by node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from .exceptions import (
    DivergentMean,
    InvalidParam,
    NonConvergent,
    NonFinite,
    NoSignChange,
)

__all__ = [
    "QuadratureSpec",
    "DEFAULT_QUADRATURE",
    "integrate_adaptive",
    "integrate_2d",
    "find_root",
    "scan_roots",
    "model_mean_via_survival",
]

_EPS = np.finfo(float).eps

# Kronrod abscissae on [0, 1] (symmetric rule), last entry is the centre.
_XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
# 10-point Gauss weights for the nodes _XGK[1], _XGK[3], ..., _XGK[9]
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

# full 21-node rule on [-1, 1]
_NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[:-1][::-1]])
_WK = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[:-1][::-1]])
_WG_FULL = np.zeros(21)
_gauss_pos = [1, 3, 5, 7, 9]
for _i, _w in zip(_gauss_pos, _WG):
    _WG_FULL[_i] = _w
    _WG_FULL[20 - _i] = _w


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and tail treatment for :func:`integrate_adaptive`.

    ``tail_mapping`` selects the substitution used on infinite intervals:
    ``"rational"`` (x = t / (1 - t)) or ``"exponential"`` (x = -log(1 - t)).
    ``scale`` stretches the substitution so that the bulk of the integrand
    sits near t = 1/2.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_subdivisions: int = 2000
    tail_mapping: str = "rational"
    scale: float = 1.0

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise InvalidParam(f"rel_tol must be positive, got {self.rel_tol}")
        if not self.abs_tol > 0:
            raise InvalidParam(f"abs_tol must be positive, got {self.abs_tol}")
        if int(self.max_subdivisions) < 1:
            raise InvalidParam("max_subdivisions must be >= 1")
        if self.tail_mapping not in ("rational", "exponential"):
            raise InvalidParam(f"unknown tail mapping {self.tail_mapping!r}")
        if not self.scale > 0:
            raise InvalidParam("scale must be positive")

    def replace(self, **changes) -> "QuadratureSpec":
        fields = dict(
            rel_tol=self.rel_tol,
            abs_tol=self.abs_tol,
            max_subdivisions=self.max_subdivisions,
            tail_mapping=self.tail_mapping,
            scale=self.scale,
        )
        fields.update(changes)
        return QuadratureSpec(**fields)


DEFAULT_QUADRATURE = QuadratureSpec()


def _evaluate(f: Callable, x: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(f(x), dtype=float)
    except (TypeError, ValueError):
        out = None
    if out is None or out.shape != x.shape:
        out = np.fromiter((f(float(xi)) for xi in x.ravel()), dtype=float, count=x.size)
        out = out.reshape(x.shape)
    return out


def _map_interval(f, a, b, mapping, scale):
    """Return (g, ta, tb, forward) with  int_a^b f = int_ta^tb g  and forward: x -> t."""
    lo_inf, hi_inf = np.isinf(a), np.isinf(b)
    if not lo_inf and not hi_inf:
        return f, a, b, lambda x: x

    def wrap(x_of_t, dx_of_t):
        def g(t):
            with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
                x = x_of_t(t)
                dx = dx_of_t(t)
                ok = np.isfinite(x) & np.isfinite(dx)
                out = np.zeros_like(t)
                if ok.any():
                    fx = _evaluate(f, x[ok])
                    val = fx * dx[ok]
                    # an integrand that has decayed to 0 stays 0 whatever the Jacobian
                    val = np.where(fx == 0.0, 0.0, val)
                    out[ok] = val
            return out

        return g

    s = scale
    if lo_inf and hi_inf:
        if mapping == "rational":
            g = wrap(lambda t: s * t / (1.0 - t * t), lambda t: s * (1.0 + t * t) / (1.0 - t * t) ** 2)
            fwd = lambda x: 2.0 * (x / s) / (1.0 + np.sqrt(1.0 + 4.0 * (x / s) ** 2))
        else:
            g = wrap(
                lambda t: -s * np.sign(t) * np.log1p(-np.abs(t)),
                lambda t: s / (1.0 - np.abs(t)),
            )
            fwd = lambda x: np.sign(x) * -np.expm1(-np.abs(x) / s)
        return g, -1.0, 1.0, fwd
    if hi_inf:
        if mapping == "rational":
            g = wrap(lambda t: a + s * t / (1.0 - t), lambda t: s / (1.0 - t) ** 2)
            fwd = lambda x: ((x - a) / s) / (1.0 + (x - a) / s)
        else:
            g = wrap(lambda t: a - s * np.log1p(-t), lambda t: s / (1.0 - t))
            fwd = lambda x: -np.expm1(-(x - a) / s)
        return g, 0.0, 1.0, fwd
    # (-inf, b]
    if mapping == "rational":
        g = wrap(lambda t: b - s * (1.0 - t) / t, lambda t: s / (t * t))
        fwd = lambda x: 1.0 / (1.0 + (b - x) / s)
    else:
        g = wrap(lambda t: b + s * np.log(t), lambda t: s / t)
        fwd = lambda x: np.exp((x - b) / s)
    return g, 0.0, 1.0, fwd


def _kronrod(g, lo, hi):
    centre = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = centre[:, None] + half[:, None] * _NODES[None, :]
    fx = _evaluate(g, x.ravel()).reshape(x.shape)
    if not np.all(np.isfinite(fx)):
        bad = np.argwhere(~np.isfinite(fx))[0]
        raise NonFinite(f"integrand is not finite at t={x[tuple(bad)]!r}")
    res_k = fx @ _WK
    res_g = fx @ _WG_FULL
    mean = 0.5 * res_k
    resabs = np.abs(fx) @ _WK
    resasc = np.abs(fx - mean[:, None]) @ _WK
    err = np.abs(res_k - res_g) * np.abs(half)
    resabs = resabs * np.abs(half)
    resasc = resasc * np.abs(half)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc != 0) & (err != 0), scaled, err)
    err = np.where(resabs > np.finfo(float).tiny / (50 * _EPS), np.maximum(50 * _EPS * resabs, err), err)
    return res_k * half, err


def integrate_adaptive(
    f: Callable,
    a: float,
    b: float,
    spec: Optional[QuadratureSpec] = None,
    *,
    points: Optional[Iterable[float]] = None,
) -> Tuple[float, float]:
    """Integrate ``f`` over ``[a, b]`` (either end may be infinite).

    Returns ``(value, err_estimate)``. ``points`` lists interior locations of
    kinks, jumps or peaks; the interval is split there before adaptation.

    Raises :class:`NonConvergent` when the subdivision budget is exhausted
    and :class:`NonFinite` when ``f`` returns inf/nan at a quadrature node.
    """
    spec = spec or DEFAULT_QUADRATURE
    a = float(a)
    b = float(b)
    if math.isnan(a) or math.isnan(b):
        raise InvalidParam("interval endpoints must not be NaN")
    if a > b:
        raise InvalidParam(f"interval endpoints must be ordered, got ({a}, {b})")
    if a == b:
        return 0.0, 0.0

    g, ta, tb, fwd = _map_interval(f, a, b, spec.tail_mapping, spec.scale)
    edges = [ta, tb]
    if points is not None:
        pts = np.asarray(list(points), dtype=float)
        pts = pts[np.isfinite(pts) & (pts > a) & (pts < b)]
        if pts.size:
            with np.errstate(over="ignore", invalid="ignore"):
                tp = np.asarray(fwd(pts), dtype=float)
            edges.extend(tp[np.isfinite(tp)].tolist())
    if np.isinf(a) and np.isinf(b) and spec.tail_mapping == "exponential":
        edges.append(0.0)
    edges = np.unique(np.asarray(edges, dtype=float))
    edges = edges[(edges >= ta) & (edges <= tb)]
    lo, hi = edges[:-1], edges[1:]
    keep = hi > lo
    lo, hi = lo[keep], hi[keep]

    vals, errs = _kronrod(g, lo, hi)
    while True:
        total = float(vals.sum())
        err = float(errs.sum())
        tol = max(spec.abs_tol, spec.rel_tol * abs(total))
        if err <= tol:
            return total, err
        budget = spec.max_subdivisions - lo.size
        if budget <= 0:
            raise NonConvergent(
                f"subdivision budget {spec.max_subdivisions} exhausted "
                f"(value {total:.6g}, error estimate {err:.3g} > {tol:.3g})"
            )
        order = np.argsort(errs)[::-1]
        cum = np.cumsum(errs[order])
        k = int(np.searchsorted(cum, err - 0.5 * tol)) + 1
        sel = order[: min(k, budget, order.size)]
        width = hi[sel] - lo[sel]
        splittable = width > 64 * _EPS * np.maximum(np.abs(lo[sel]), np.abs(hi[sel]))
        sel = sel[splittable]
        if sel.size == 0:
            raise NonConvergent(
                f"interval widths reached rounding level before tolerance "
                f"(value {total:.6g}, error estimate {err:.3g} > {tol:.3g})"
            )
        mid = 0.5 * (lo[sel] + hi[sel])
        new_lo = np.concatenate([lo[sel], mid])
        new_hi = np.concatenate([mid, hi[sel]])
        nv, ne = _kronrod(g, new_lo, new_hi)
        keep = np.ones(lo.size, dtype=bool)
        keep[sel] = False
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])


def integrate_2d(
    f: Callable,
    xlim: Tuple[float, float],
    ylim: Tuple[float, float],
    spec: Optional[QuadratureSpec] = None,
    *,
    points_x: Optional[Sequence[float]] = None,
    points_y: Optional[Sequence[float]] = None,
) -> Tuple[float, float]:
    """Iterated adaptive integral of ``f(x, y)`` over a rectangle.

    The inner integral (over y) runs at a tenth of the outer tolerances, so
    its error stays below the outer rule's resolution.
    """
    spec = spec or DEFAULT_QUADRATURE
    inner = spec.replace(rel_tol=spec.rel_tol / 10, abs_tol=spec.abs_tol / 10)
    inner_err = [0.0]

    def outer(xs):
        out = np.empty(xs.shape)
        for i, xv in enumerate(xs):
            val, e = integrate_adaptive(lambda y: f(np.full_like(y, xv), y), ylim[0], ylim[1], inner, points=points_y)
            out[i] = val
            inner_err[0] = max(inner_err[0], e)
        return out

    value, err = integrate_adaptive(outer, xlim[0], xlim[1], spec, points=points_x)
    width = xlim[1] - xlim[0]
    if np.isfinite(width):
        err += inner_err[0] * width
    return value, err


def scan_roots(h: Callable, bracket: Tuple[float, float], tol: float = 1e-12, n_grid: int = 2001) -> np.ndarray:
    """All roots of ``h`` that show up as sign changes (or exact zeros) on a grid."""
    a, b = map(float, bracket)
    if not a < b:
        raise InvalidParam(f"bracket must satisfy a < b, got ({a}, {b})")
    grid = np.linspace(a, b, int(n_grid))
    hv = _evaluate(h, grid)
    roots = list(grid[hv == 0.0])
    for i in np.nonzero(hv[:-1] * hv[1:] < 0)[0]:
        roots.append(find_root(h, (grid[i], grid[i + 1]), tol))
    roots = np.unique(np.asarray(roots, dtype=float))
    if roots.size > 1:
        roots = roots[np.concatenate([[True], np.diff(roots) > 10 * tol])]
    return roots


def find_root(
    h: Callable,
    bracket: Tuple[float, float],
    tol: float = 1e-12,
    *,
    scan: bool = False,
    n_grid: int = 2001,
    maxiter: int = 500,
):
    """Root of ``h`` inside ``bracket``.

    With ``scan=True`` returns the array of every bracketed root on an
    ``n_grid`` point grid instead (see :func:`scan_roots`).
    """
    if scan:
        return scan_roots(h, bracket, tol, n_grid)
    a, b = map(float, bracket)
    if not a <= b:
        raise InvalidParam(f"bracket must be ordered, got ({a}, {b})")
    ha, hb = float(h(a)), float(h(b))
    if ha == 0.0:
        return a
    if hb == 0.0:
        return b
    if not (np.isfinite(ha) and np.isfinite(hb)):
        raise NonFinite(f"h is not finite at the bracket ends: h({a})={ha}, h({b})={hb}")
    if ha * hb > 0:
        raise NoSignChange(f"h has the same sign at both ends of ({a}, {b})")
    try:
        root, info = optimize.brentq(
            lambda x: float(h(x)), a, b, xtol=tol, rtol=4 * _EPS, maxiter=maxiter, full_output=True
        )
    except RuntimeError as exc:
        raise NonConvergent(str(exc)) from exc
    if not info.converged:
        raise NonConvergent(f"root finder did not converge in {maxiter} iterations")
    return float(root)


def model_mean_via_survival(m, spec: Optional[QuadratureSpec] = None) -> float:
    """Mean of a nonnegative lifetime model as the integral of its survival function."""
    lo, hi = m.support
    if lo < 0:
        raise InvalidParam("mean via survival needs support on [0, inf)")
    spec = spec or DEFAULT_QUADRATURE
    scale = getattr(m, "typical_scale", 1.0)
    try:
        value, _ = integrate_adaptive(m.sf, lo, hi, spec.replace(scale=scale), points=getattr(m, "breakpoints", ()))
    except NonConvergent as exc:
        raise DivergentMean(f"survival integral did not converge: {exc}") from exc
    if not np.isfinite(value):
        raise DivergentMean("survival integral is not finite")
    return value + lo
