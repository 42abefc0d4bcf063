"""Doss–Sussmann oracle: y_t = u(x_t - x_0, a_t).

u is the flow of du/dx = sigma(u) from u(0, v) = v, carried together with its
derivative in the initial value; a absorbs the drift through the ODE
a' = b(u(x_t, a)) / du_da(x_t, a), a_0 = y0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from rough1d.engine.functions import SmoothFunction
from rough1d.engine.paths import PathGrid
from rough1d.engine.rde_solver import RdeProblem
from rough1d.engine.types import DEFAULT_FLOW_STEP
from rough1d.errors import FlowBlowUpError, FlowDegeneracyError, ValidationError

FLOW_BOUND = 1e8
DEGENERACY_FLOOR = 1e-10


def _escaped(u) -> bool:
    if isinstance(u, float):
        return not abs(u) <= FLOW_BOUND
    return not bool(np.all(np.abs(u) <= FLOW_BOUND))


def flow_u(sigma: SmoothFunction, x_value, v, step: float = DEFAULT_FLOW_STEP):
    """Fourth-order Runge–Kutta flow of sigma from 0 to x_value, with du/dv alongside.

    Arrays are integrated together with a shared number of steps; negative x_value
    integrates backwards. x_value == 0 returns (v, 1) exactly. Scalars run on plain
    floats, which is what the drift integration calls in its inner loop.
    """

    if step <= 0.0:
        raise ValidationError(f"flow step must be > 0, got {step}")
    x, u = np.broadcast_arrays(np.asarray(x_value, dtype=float), np.asarray(v, dtype=float))
    scalar = x.ndim == 0
    if scalar:
        x, u, p = float(x), float(u), 1.0
    else:
        u = u.astype(float, copy=True)
        p = np.ones_like(u)

    span = abs(x) if scalar else (float(np.max(np.abs(x))) if x.size else 0.0)
    n = math.ceil(span / step)
    if n > 0:
        h = x / n
        s0 = sigma.deriv(0)
        s1 = sigma.deriv(1)
        for _ in range(n):
            k1u, k1p = s0(u), s1(u) * p
            u2, p2 = u + 0.5 * h * k1u, p + 0.5 * h * k1p
            k2u, k2p = s0(u2), s1(u2) * p2
            u3, p3 = u + 0.5 * h * k2u, p + 0.5 * h * k2p
            k3u, k3p = s0(u3), s1(u3) * p3
            u4, p4 = u + h * k3u, p + h * k3p
            k4u, k4p = s0(u4), s1(u4) * p4
            u = u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
            p = p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
            if _escaped(u):
                raise FlowBlowUpError(
                    f"sigma-flow exceeded |u| <= {FLOW_BOUND:g} before x={span:g}"
                )

    if scalar:
        return float(u), float(p)
    return u, p


def _widen(bounds: tuple[float, float], values: np.ndarray) -> tuple[float, float]:
    return min(bounds[0], float(values.min())), max(bounds[1], float(values.max()))


@dataclass
class FlowTable:
    """Flow evaluator that records the (x, v) range it has been queried on."""

    sigma: SmoothFunction
    step: float = DEFAULT_FLOW_STEP
    x_range: tuple[float, float] = field(default=(math.inf, -math.inf))
    v_range: tuple[float, float] = field(default=(math.inf, -math.inf))
    min_du_da: float = math.inf

    def __call__(self, x_value, v):
        u, p = flow_u(self.sigma, x_value, v, self.step)
        xs = np.asarray(x_value, dtype=float)
        vs = np.asarray(v, dtype=float)
        self.x_range = _widen(self.x_range, xs)
        self.v_range = _widen(self.v_range, vs)
        self.min_du_da = min(self.min_du_da, float(np.min(p)))
        return u, p

    def u(self, x_value, v):
        return self(x_value, v)[0]

    def du_da(self, x_value, v):
        return self(x_value, v)[1]


def solve_a(problem: RdeProblem, step: float = DEFAULT_FLOW_STEP) -> PathGrid:
    """Integrate the drift ODE for a on the driver's grid, RK4 with x linear per cell."""

    table = FlowTable(problem.sigma, step)
    n = problem.n_cells
    dt = 1.0 / n
    xr = problem.x.values - problem.x.values[0]

    def rhs(xv: float, a: float) -> float:
        u, p = table(xv, a)
        if p < DEGENERACY_FLOOR:
            raise FlowDegeneracyError(
                f"du/da = {p:.3g} below {DEGENERACY_FLOOR:g} at x={xv:.6g}, a={a:.6g}"
            )
        return float(problem.b(u)) / p

    a = np.empty(n + 1)
    a[0] = problem.y0
    for i in range(n):
        x0, x1 = float(xr[i]), float(xr[i + 1])
        xm = 0.5 * (x0 + x1)
        ai = float(a[i])
        k1 = rhs(x0, ai)
        k2 = rhs(xm, ai + 0.5 * dt * k1)
        k3 = rhs(xm, ai + 0.5 * dt * k2)
        k4 = rhs(x1, ai + dt * k3)
        a[i + 1] = ai + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return problem.x.with_values(a, label="doss-sussmann a")


def ds_solution(problem: RdeProblem, step: float = DEFAULT_FLOW_STEP) -> PathGrid:
    a = solve_a(problem, step)
    xr = problem.x.values - problem.x.values[0]
    y, _ = flow_u(problem.sigma, xr, a.values, step)
    return problem.x.with_values(y, label="doss-sussmann")
