"""Picard solver for dy = b(y) dt + sigma(y) dx driven by a Hölder path.

The iterate (y, A) is stored as y on the grid plus the cumulative Q_t = int x dy,
so that A_st = (x_t + x_s)/2 (y_t - y_s) - (Q_t - Q_s) is exactly antisymmetric and
satisfies the Chasles identity against triangle areas for every grid triple.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from rough1d.engine.corrected_integral import first_order_germs, weighted_germs
from rough1d.engine.functions import SmoothFunction
from rough1d.engine.levy_area import Curve, LevyArea, pl_area
from rough1d.engine.paths import PathGrid, pair_sup
from rough1d.engine.types import (
    DEFAULT_MAX_ITER,
    DEFAULT_PAIR_BUDGET,
    DEFAULT_TOL,
    DEFAULT_WORKING_RADIUS,
    Provenance,
)
from rough1d.errors import (
    CoefficientRangeError,
    MissingDerivativeError,
    NonContractionError,
    ValidationError,
)

MIN_SEGMENT_CELLS = 4
STALL_RATIO = 0.9
STALL_RUN = 3
COEFFICIENT_SAMPLES = 2001
COEFFICIENT_CEILING = 1e8

Event = dict[str, Any]


@dataclass(frozen=True)
class RdeProblem:
    x: PathGrid
    sigma: SmoothFunction
    b: Callable
    y0: float
    beta: float
    alpha: float | None = None

    def __post_init__(self):
        if not isinstance(self.sigma, SmoothFunction):
            raise MissingDerivativeError("sigma must carry its first two derivatives")
        self.sigma.require(2)
        if not 1.0 / 3.0 < self.beta < 1.0:
            raise ValidationError(f"beta must lie in (1/3, 1), got {self.beta}")
        if self.alpha is not None and not self.beta < self.alpha:
            raise ValidationError(f"beta={self.beta} must be below alpha={self.alpha}")
        if not np.isfinite(self.y0):
            raise ValidationError(f"y0 must be finite, got {self.y0}")

    @property
    def n_cells(self) -> int:
        return self.x.n_cells

    def coefficient_warnings(self, radius: float = DEFAULT_WORKING_RADIUS) -> list[Event]:
        """Sample sigma, sigma', sigma'' and b on [y0 - radius, y0 + radius]."""

        u = np.linspace(self.y0 - radius, self.y0 + radius, COEFFICIENT_SAMPLES)
        checks = {
            "sigma": self.sigma(u),
            "sigma'": self.sigma.deriv(1)(u),
            "sigma''": self.sigma.deriv(2)(u),
            "b": self.b(u),
        }
        out: list[Event] = []
        for name, vals in checks.items():
            vals = np.asarray(vals, dtype=float) + np.zeros_like(u)
            bad = ~np.isfinite(vals) | (np.abs(vals) > COEFFICIENT_CEILING)
            if np.any(bad):
                out.append(
                    {
                        "event": "coefficient_warning",
                        "coefficient": name,
                        "at": float(u[np.argmax(bad)]),
                        "range": [float(u[0]), float(u[-1])],
                    }
                )
        return out


def picard_area(xs: np.ndarray, ys: np.ndarray, qs: np.ndarray, label: str = "picard") -> LevyArea:
    """Order-0 area from the grid values y and the cumulative Q = int x dy."""

    def moments(s, t, k):
        return 0.5 * (xs[t] + xs[s]) * (ys[t] - ys[s]) - (qs[t] - qs[s])

    return LevyArea(0, Provenance.PICARD, xs.size - 1, moments, label=label)


@dataclass(frozen=True)
class RdeSolution:
    y: PathGrid
    area: LevyArea
    n_norm_history: tuple[float, ...] = ()
    delta_used: float = 0.0
    segments: int = 0
    events: tuple[Event, ...] = field(default=(), repr=False)

    @classmethod
    def from_path(cls, y: PathGrid, x: PathGrid) -> RdeSolution:
        """Wrap an externally computed path with the piecewise-linear area of (x, y)."""

        return cls(y=y, area=pl_area(Curve(x, y), 0))


def n_norm(
    y: PathGrid,
    area: LevyArea,
    beta: float,
    window: tuple[float, float] | None = None,
    pair_budget: int = DEFAULT_PAIR_BUDGET,
) -> float:
    """|y|_beta + |A|_{2 beta} over grid pairs of the window."""

    lo, hi = y.window_indices(window)
    v = y.values
    y_part, _ = pair_sup(lambda s, t: v[t] - v[s], lo, hi, beta, y.n_cells, pair_budget)
    a_part, _ = pair_sup(
        lambda s, t: area.evaluate(s, t, 0), lo, hi, 2.0 * beta, y.n_cells, pair_budget
    )
    return y_part + a_part


def _cell_areas(xw: np.ndarray, yw: np.ndarray, qw: np.ndarray) -> np.ndarray:
    return 0.5 * (xw[:-1] + xw[1:]) * np.diff(yw) - np.diff(qw)


def _picard_step(
    problem: RdeProblem, xw: np.ndarray, y_start: float, yw: np.ndarray, qw: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """One application of the Picard map on a window; Q restarts at 0 on the window."""

    dt = 1.0 / problem.n_cells
    dx = np.diff(xw)
    a = _cell_areas(xw, yw, qw)
    sig = problem.sigma(yw)
    dsig = problem.sigma.deriv(1)(yw)
    bv = np.asarray(problem.b(yw), dtype=float) + np.zeros_like(yw)

    g = first_order_germs(sig[:-1], sig[1:], dsig[:-1], dx, a)
    g = g + 0.5 * (bv[:-1] + bv[1:]) * dt
    w = weighted_germs(xw[:-1], xw[1:], sig[:-1], sig[1:], dsig[:-1], a)
    w = w + 0.5 * (xw[:-1] * bv[:-1] + xw[1:] * bv[1:]) * dt

    y_new = y_start + np.concatenate(([0.0], np.cumsum(g)))
    q_new = np.concatenate(([0.0], np.cumsum(w)))
    return y_new, q_new


def picard_map(
    problem: RdeProblem,
    y: PathGrid,
    area: LevyArea,
    window: tuple[float, float] | None = None,
) -> tuple[PathGrid, LevyArea]:
    """Apply the Picard map on a window, starting from y at the window's left end.

    The image is extended as a constant path outside the window.
    """

    if area.n_cells != y.n_cells or y.n_cells != problem.n_cells:
        raise ValidationError("driver, iterate and area must share one grid")
    lo, hi = y.window_indices(window)
    xs = problem.x.values
    n = problem.n_cells
    idx = np.arange(lo, hi + 1)
    xw = xs[lo : hi + 1]
    yw = y.values[lo : hi + 1]
    # Q differences reproduce the supplied cell areas exactly.
    a_in = np.atleast_1d(area.evaluate(idx[:-1], idx[1:], 0))
    qw = np.concatenate(([0.0], np.cumsum(0.5 * (xw[:-1] + xw[1:]) * np.diff(yw) - a_in)))

    y_new, q_new = _picard_step(problem, xw, float(yw[0]), yw, qw)

    y_full = np.empty(n + 1)
    y_full[:lo] = y_new[0]
    y_full[lo : hi + 1] = y_new
    y_full[hi + 1 :] = y_new[-1]
    q_full = np.empty(n + 1)
    q_full[:lo] = 0.0
    q_full[lo : hi + 1] = q_new
    q_full[hi + 1 :] = q_new[-1]
    return (
        y.with_values(y_full, label="picard"),
        picard_area(xs, y_full, q_full),
    )


def _diff_norm(
    xw: np.ndarray, dy: np.ndarray, dq: np.ndarray, beta: float, n_cells: int, budget: int
) -> float:
    last = dy.size - 1
    y_part, _ = pair_sup(lambda s, t: dy[t] - dy[s], 0, last, beta, n_cells, budget)
    a_part, _ = pair_sup(
        lambda s, t: 0.5 * (xw[t] + xw[s]) * (dy[t] - dy[s]) - (dq[t] - dq[s]),
        0,
        last,
        2.0 * beta,
        n_cells,
        budget,
    )
    return y_part + a_part


def _stalled(history: list[float]) -> bool:
    if len(history) <= STALL_RUN:
        return False
    tail = history[-(STALL_RUN + 1) :]
    return all(b >= STALL_RATIO * a for a, b in zip(tail, tail[1:]))


def solve(
    problem: RdeProblem,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    *,
    init: str = "constant",
    working_radius: float = DEFAULT_WORKING_RADIUS,
    pair_budget: int = DEFAULT_PAIR_BUDGET,
) -> RdeSolution:
    """Picard iteration on consecutive segments with an adaptively halved step.

    Each segment starts from the constant iterate (y_lo, zero area), or from
    y_lo + sigma(y_lo)(x - x_lo) with ``init="driver"``. A segment is accepted once
    the norm of successive differences drops below tol * (segment cells / n_cells).
    Stalled contraction, exhausted iterations or iterates leaving the working range
    halve the step and restart the segment.
    """

    if tol <= 0.0:
        raise ValidationError(f"tol must be > 0, got {tol}")
    if max_iter < 1:
        raise ValidationError(f"max_iter must be >= 1, got {max_iter}")
    if init not in ("constant", "driver"):
        raise ValidationError(f"unknown init {init!r}; expected 'constant' or 'driver'")

    n = problem.n_cells
    xs = problem.x.values
    events: list[Event] = list(problem.coefficient_warnings(working_radius))
    history: list[float] = []

    ys = np.empty(n + 1)
    qs = np.empty(n + 1)
    ys[0] = problem.y0
    qs[0] = 0.0

    cells = n // 4 if n >= 4 * MIN_SEGMENT_CELLS else min(n, MIN_SEGMENT_CELLS)
    lo = 0
    segments = 0

    while lo < n:
        hi = min(lo + cells, n)
        xw = xs[lo : hi + 1]
        y_start = float(ys[lo])
        if init == "driver":
            c = float(problem.sigma(y_start))
            yw = y_start + c * (xw - xw[0])
            qw = 0.5 * c * (xw**2 - xw[0] ** 2)
        else:
            yw = np.full(xw.size, y_start)
            qw = np.zeros(xw.size)

        seg_tol = tol * (hi - lo) / n
        seg_history: list[float] = []
        reason = "max_iter"
        accepted = False
        for _ in range(max_iter):
            y_new, q_new = _picard_step(problem, xw, y_start, yw, qw)
            spread = np.max(np.abs(y_new - problem.y0))
            if not np.isfinite(spread) or spread > working_radius:
                reason = "range"
                break
            diff = _diff_norm(xw, y_new - yw, q_new - qw, problem.beta, n, pair_budget)
            seg_history.append(diff)
            yw, qw = y_new, q_new
            if diff < seg_tol:
                accepted = True
                break
            if _stalled(seg_history):
                reason = "stalled"
                break

        history.extend(seg_history)
        if accepted:
            ys[lo : hi + 1] = yw
            qs[lo : hi + 1] = qs[lo] + qw
            events.append(
                {
                    "event": "segment_accepted",
                    "start": lo / n,
                    "end": hi / n,
                    "iterations": len(seg_history),
                    "final_diff": seg_history[-1],
                }
            )
            segments += 1
            lo = hi
            continue

        diagnostics = {
            "start": lo / n,
            "cells": cells,
            "reason": reason,
            "diff_history": seg_history,
        }
        if cells // 2 < MIN_SEGMENT_CELLS:
            events.append({"event": "non_contraction", **diagnostics})
            if reason == "range":
                raise CoefficientRangeError(
                    f"iterates left [y0 - {working_radius}, y0 + {working_radius}] "
                    f"at t={lo / n} with the minimal step of {cells} cells"
                )
            raise NonContractionError(
                f"no contraction at t={lo / n} with the minimal step of {cells} cells "
                f"({reason})",
                diagnostics={**diagnostics, "events": events},
            )
        cells //= 2
        events.append({"event": "delta_halved", **diagnostics, "cells": cells})

    y_path = problem.x.with_values(ys, label="solution")
    return RdeSolution(
        y=y_path,
        area=picard_area(xs, ys, qs, label="solution"),
        n_norm_history=tuple(history),
        delta_used=cells / n,
        segments=segments,
        events=tuple(events),
    )


def residual_check(problem: RdeProblem, solution: RdeSolution) -> float:
    """sup_t |y_t - y0 - (cumulative sigma-germs + trapezoid of b) up to t|."""

    n = problem.n_cells
    if solution.y.n_cells != n:
        raise ValidationError(
            f"solution grid {solution.y.n_cells} does not match driver grid {n}"
        )
    xs = problem.x.values
    ys = solution.y.values
    idx = np.arange(n + 1)
    a = np.atleast_1d(solution.area.evaluate(idx[:-1], idx[1:], 0))
    sig = problem.sigma(ys)
    dsig = problem.sigma.deriv(1)(ys)
    bv = np.asarray(problem.b(ys), dtype=float) + np.zeros_like(ys)
    g = first_order_germs(sig[:-1], sig[1:], dsig[:-1], np.diff(xs), a)
    g = g + 0.5 * (bv[:-1] + bv[1:]) / n
    rhs = problem.y0 + np.concatenate(([0.0], np.cumsum(g)))
    return float(np.max(np.abs(ys - rhs)))
