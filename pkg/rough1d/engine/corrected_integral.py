"""Newton–Côtes functionals corrected by Lévy areas.

Two discrete forms of the same functional live here: the epsilon-averaged form and
the dyadic germ sum. The germ sum is exactly additive over adjacent windows and is
what the solver builds on.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from rough1d.engine.functions import SmoothFunction
from rough1d.engine.levy_area import Curve, LevyArea
from rough1d.engine.newton_cotes import InterpolationMeasure, interpolation_sum, nc_measure
from rough1d.engine.paths import PathGrid
from rough1d.engine.types import Scheme
from rough1d.errors import (
    DegenerateLadderError,
    GridAlignmentError,
    MissingDerivativeError,
    OrderMismatchError,
    ValidationError,
)

Window = tuple[float, float] | None

EXACT_RESIDUAL: float = 1e-13


@dataclass(frozen=True)
class ApproximantResult:
    value: float
    epsilon: float
    scheme: Scheme
    order_m: int


@dataclass(frozen=True)
class ConvergenceReport:
    epsilons: tuple[float, ...]
    values: tuple[float, ...]
    residuals: tuple[float, ...]
    extrapolated_limit: float
    empirical_rate: float | None
    predicted_rate: float
    order_m: int
    exact: bool = False


def grid_step(epsilon, n_cells: int) -> int:
    """Number of cells p with epsilon = p / n_cells."""

    scaled = float(epsilon) * n_cells
    p = round(scaled)
    if p < 1 or abs(scaled - p) > 1e-9 * max(1.0, scaled):
        raise GridAlignmentError(f"epsilon={epsilon} is not a multiple of 1/{n_cells}")
    return int(p)


def _smooth(f, name: str = "integrand") -> SmoothFunction:
    if not isinstance(f, SmoothFunction):
        raise MissingDerivativeError(f"{name} must carry its derivatives, got {f!r}")
    return f


def _check_order(area: LevyArea, m: int) -> None:
    if area.order_k_max < 2 * m - 2:
        raise OrderMismatchError(
            f"order-{m} functional needs an area of order {2 * m - 2}, got {area.order_k_max}"
        )
    if area.n_cells < 1:
        raise ValidationError("area defined on an empty grid")


def _windows(curve: Curve, window: Window) -> tuple[int, int]:
    return curve.x.window_indices(window)


# -- germ kernels -------------------------------------------------------------


def first_order_germs(fu, fv, dfu, dx, area):
    """Cell germs of the order-1 corrected functional from precomputed values."""

    return 0.5 * (fu + fv) * dx + dfu * area


def weighted_germs(xu, xv, fu, fv, dfu, area):
    """Germs of the x-weighted integrand x f(y); the curve (x, x) carries no area."""

    return 0.5 * (xu * fu + xv * fv) * (xv - xu) + xu * dfu * area


def symmetric_germs(measure: InterpolationMeasure, f: Callable, ys: np.ndarray, xs, u, v):
    """(x_v - x_u) times the nu_m interpolation of f along the chord y_u -> y_v."""

    yu, yv = ys[u], ys[v]
    return (xs[v] - xs[u]) * interpolation_sum(measure, lambda th: f((1.0 - th) * yu + th * yv))


def corrected_germs(f: SmoothFunction, curve: Curve, area: LevyArea, m: int, u, v):
    xs, ys = curve.x.values, curve.y.values
    out = symmetric_germs(nc_measure(m), f, ys, xs, u, v)
    yu = ys[u]
    for k in range(2 * m - 1):
        coeff = f.deriv(k + 1)(yu) / math.factorial(k + 1)
        out = out + coeff * area.evaluate(u, v, k, yu)
    return out


def _averaged(germs: np.ndarray, p: int) -> float:
    return math.fsum(np.atleast_1d(germs).tolist()) / p


def _shifted_indices(lo: int, hi: int, p: int, n_cells: int) -> tuple[np.ndarray, np.ndarray]:
    u = np.arange(lo, hi)
    return u, np.minimum(u + p, n_cells)


# -- epsilon-averaged forms ---------------------------------------------------


def rv_symmetric_approx(f: Callable, curve: Curve, epsilon, window: Window = None) -> float:
    """Symmetric epsilon-approximant: average of midpoint-trapezoid increments of f(y) dx."""

    p = grid_step(epsilon, curve.n_cells)
    lo, hi = _windows(curve, window)
    if hi == lo:
        return 0.0
    u, v = _shifted_indices(lo, hi, p, curve.n_cells)
    germs = symmetric_germs(nc_measure(1), f, curve.y.values, curve.x.values, u, v)
    return _averaged(germs, p)


def nc_functional_approx(
    h: Callable,
    z: tuple[PathGrid, PathGrid],
    x: PathGrid,
    m: int,
    epsilon,
    window: Window = None,
) -> float:
    """Order-m Newton–Côtes approximant with h interpolated along the 2-vector z."""

    z1, z2 = z
    if not z1.n_cells == z2.n_cells == x.n_cells:
        raise ValidationError("z components and x must share one grid")
    p = grid_step(epsilon, x.n_cells)
    lo, hi = x.window_indices(window)
    if hi == lo:
        return 0.0
    u, v = _shifted_indices(lo, hi, p, x.n_cells)
    a1, b1 = z1.values[u], z1.values[v]
    a2, b2 = z2.values[u], z2.values[v]
    interp = interpolation_sum(
        nc_measure(m),
        lambda th: h((1.0 - th) * a1 + th * b1, (1.0 - th) * a2 + th * b2),
    )
    return _averaged((x.values[v] - x.values[u]) * interp, p)


def corrected_approx(
    f: SmoothFunction,
    curve: Curve,
    area: LevyArea,
    m: int,
    epsilon,
    window: Window = None,
) -> ApproximantResult:
    f = _smooth(f)
    _check_order(area, m)
    f.require(2 * m - 1)
    p = grid_step(epsilon, curve.n_cells)
    lo, hi = _windows(curve, window)
    value = 0.0
    if hi > lo:
        u, v = _shifted_indices(lo, hi, p, curve.n_cells)
        value = _averaged(corrected_germs(f, curve, area, m, u, v), p)
    return ApproximantResult(
        value=value, epsilon=float(epsilon), scheme=Scheme.CORRECTED_AVERAGED, order_m=m
    )


def weighted_corrected_approx(
    f: SmoothFunction, curve: Curve, area: LevyArea, epsilon, window: Window = None
) -> float:
    """Order-1 corrected approximant of the integrand x f(y)."""

    f = _smooth(f)
    _check_order(area, 1)
    p = grid_step(epsilon, curve.n_cells)
    lo, hi = _windows(curve, window)
    if hi == lo:
        return 0.0
    u, v = _shifted_indices(lo, hi, p, curve.n_cells)
    xs, ys = curve.x.values, curve.y.values
    germs = weighted_germs(
        xs[u], xs[v], f(ys[u]), f(ys[v]), f.deriv(1)(ys[u]), area.evaluate(u, v, 0)
    )
    return _averaged(germs, p)


def dyadic_refine(
    f: SmoothFunction,
    curve: Curve,
    area: LevyArea,
    m: int,
    epsilon,
    n: int,
    window: Window = None,
) -> float:
    """I_n(epsilon): the averaged form at step epsilon / 2^n, normalised by 2^n / epsilon.

    I_0(epsilon) runs through the same kernel as corrected_approx and matches it bitwise.
    """

    if n < 0:
        raise ValidationError(f"refinement level must be >= 0, got {n}")
    p = grid_step(epsilon, curve.n_cells)
    if p % (1 << n):
        raise GridAlignmentError(
            f"epsilon={epsilon} / 2^{n} is not a multiple of 1/{curve.n_cells}"
        )
    fine = p >> n
    return corrected_approx(f, curve, area, m, fine / curve.n_cells, window).value


# -- germ sums ----------------------------------------------------------------


def _cell_sum(
    f: SmoothFunction, curve: Curve, area: LevyArea, m: int, step: int, lo: int, hi: int
) -> float:
    if hi == lo:
        return 0.0
    u = np.arange(lo, hi, step)
    return math.fsum(np.atleast_1d(corrected_germs(f, curve, area, m, u, u + step)).tolist())


def germ_sum(
    f: SmoothFunction,
    curve: Curve,
    area: LevyArea,
    m: int,
    n: int,
    window: Window = None,
) -> float:
    """Compensated Riemann sum over the level-n dyadic cells inside the window."""

    f = _smooth(f)
    _check_order(area, m)
    f.require(2 * m - 1)
    cells = curve.n_cells
    if n < 0 or cells % (1 << n):
        raise GridAlignmentError(f"2^{n} does not divide n_cells={cells}")
    step = cells >> n
    lo, hi = _windows(curve, window)
    if lo % step or hi % step:
        raise GridAlignmentError(
            f"window {window} is not made of level-{n} dyadic cells on a {cells}-cell grid"
        )
    return _cell_sum(f, curve, area, m, step, lo, hi)


def default_ladder(n_cells: int) -> list[float]:
    """1/8, 1/16, ... down to 8/n_cells, keeping grid multiples only."""

    ladder = []
    q = 8
    while q * 8 <= n_cells:
        if n_cells % q == 0:
            ladder.append(1.0 / q)
        q *= 2
    return ladder


def _validate_ladder(ladder: Sequence[float], n_cells: int) -> list[float]:
    eps = [float(e) for e in ladder]
    if len(eps) < 4:
        raise DegenerateLadderError(f"ladder needs at least 4 values, got {len(eps)}")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise DegenerateLadderError(f"ladder must be strictly decreasing: {eps}")
    for e in eps:
        try:
            grid_step(e, n_cells)
        except GridAlignmentError as exc:
            raise DegenerateLadderError(str(exc)) from exc
    return eps


def converge(
    f: SmoothFunction,
    curve: Curve,
    area: LevyArea,
    m: int,
    ladder: Sequence[float],
    alpha: float,
    *,
    threads: int = 1,
) -> ConvergenceReport:
    """Evaluate the averaged form along a ladder and regress residuals on epsilon.

    The limit estimate is the cell-level germ sum over [0, 1].
    """

    f = _smooth(f)
    _check_order(area, m)
    eps = _validate_ladder(ladder, curve.n_cells)

    def one(e: float) -> float:
        return corrected_approx(f, curve, area, m, e).value

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(one, eps))
    else:
        values = [one(e) for e in eps]

    limit = _cell_sum(f, curve, area, m, 1, 0, curve.n_cells)
    residuals = [abs(v - limit) for v in values]
    exact = all(r <= EXACT_RESIDUAL * max(1.0, abs(limit)) for r in residuals)

    rate: float | None = None
    if not exact:
        pts = [(math.log(e), math.log(r)) for e, r in zip(eps, residuals) if r > 0.0]
        if len(pts) >= 2:
            xs_log, rs_log = zip(*pts)
            rate = float(np.polyfit(xs_log, rs_log, 1)[0])

    return ConvergenceReport(
        epsilons=tuple(eps),
        values=tuple(values),
        residuals=tuple(residuals),
        extrapolated_limit=limit,
        empirical_rate=rate,
        predicted_rate=min((2 * m + 1) * alpha - 1.0, alpha),
        order_m=m,
        exact=exact,
    )


# -- local germ ---------------------------------------------------------------


def local_germ(f: SmoothFunction, curve: Curve, area: LevyArea, s: float, t: float) -> float:
    """Order-1 germ on [s, t]: f(y_s) and f'(y_s) against window averages of dx and A."""

    f = _smooth(f)
    lo, hi = curve.x.window_indices((s, t))
    d = hi - lo
    if d == 0:
        return 0.0
    u = np.arange(lo, hi)
    v = np.minimum(u + d, curve.n_cells)
    xs = curve.x.values
    mean_dx = math.fsum((xs[v] - xs[u]).tolist()) / d
    mean_area = math.fsum(np.atleast_1d(area.evaluate(u, v, 0)).tolist()) / d
    ys_val = curve.y.values[lo]
    return float(f(ys_val)) * mean_dx + float(f.deriv(1)(ys_val)) * mean_area


def local_germ_residual(
    f: SmoothFunction, curve: Curve, area: LevyArea, s: float, t: float
) -> float:
    """|integral over [s, t] - local germ|, the integral taken as the cell-level germ sum."""

    f = _smooth(f)
    lo, hi = curve.x.window_indices((s, t))
    integral = _cell_sum(f, curve, area, 1, 1, lo, hi)
    return abs(integral - local_germ(f, curve, area, s, t))


@dataclass(frozen=True)
class GermResidual:
    width: float
    residual: float
    quotient: float


def germ_residual_profile(
    f: SmoothFunction,
    curve: Curve,
    area: LevyArea,
    s: float,
    widths: Sequence[float],
    exponent: float,
) -> list[GermResidual]:
    """Residual quotients |integral - germ| / width^exponent over shrinking windows at s."""

    out = []
    for w in widths:
        r = local_germ_residual(f, curve, area, s, s + w)
        out.append(GermResidual(width=float(w), residual=r, quotient=r / float(w) ** exponent))
    return out
