from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cache

import numpy as np

from rough1d.engine.types import NC_MAX_ORDER
from rough1d.errors import ValidationError


@dataclass(frozen=True, eq=False)
class InterpolationMeasure:
    """The signed measure nu_m: atoms and exact rational weights.

    Float copies of atoms and weights are made once for the evaluation loops.
    """

    order_m: int
    atoms: tuple[Fraction, ...]
    weights: tuple[Fraction, ...]
    atoms_f: np.ndarray = field(init=False, repr=False)
    weights_f: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        atoms_f = np.array([float(a) for a in self.atoms])
        weights_f = np.array([float(w) for w in self.weights])
        atoms_f.setflags(write=False)
        weights_f.setflags(write=False)
        object.__setattr__(self, "atoms_f", atoms_f)
        object.__setattr__(self, "weights_f", weights_f)

    def moment(self, k: int) -> Fraction:
        return sum((w * a**k for a, w in zip(self.atoms, self.weights)), Fraction(0))


def _poly_mul_linear(coeffs: list[Fraction], a: Fraction, b: Fraction) -> list[Fraction]:
    # (c_0 + c_1 u + ...) * (a u + b)
    out = [Fraction(0)] * (len(coeffs) + 1)
    for i, c in enumerate(coeffs):
        out[i] += c * b
        out[i + 1] += c * a
    return out


def _lagrange_weight(j: int, n: int) -> Fraction:
    """Integral over [0, 1] of prod_{k != j} (n u - k) / (j - k), exactly."""

    coeffs = [Fraction(1)]
    for k in range(n + 1):
        if k == j:
            continue
        denom = Fraction(j - k)
        coeffs = _poly_mul_linear(coeffs, Fraction(n) / denom, Fraction(-k) / denom)
    return sum((c / (i + 1) for i, c in enumerate(coeffs)), Fraction(0))


@cache
def nc_measure(m: int) -> InterpolationMeasure:
    if m < 1:
        raise ValidationError(f"Newton–Côtes order must be >= 1, got {m}")
    if m > NC_MAX_ORDER:
        raise ValidationError(
            f"Newton–Côtes order capped at {NC_MAX_ORDER} (got {m}): "
            "higher closed rules lose digits to alternating weights"
        )

    if m == 1:
        half = Fraction(1, 2)
        return InterpolationMeasure(1, (Fraction(0), Fraction(1)), (half, half))

    n = 2 * m - 2
    atoms = tuple(Fraction(j, n) for j in range(n + 1))
    weights = tuple(_lagrange_weight(j, n) for j in range(n + 1))
    return InterpolationMeasure(m, atoms, weights)


def interpolation_sum(measure: InterpolationMeasure, g: Callable[[float], np.ndarray]):
    """sum_j w_j g(theta_j), accumulated in atom order."""

    acc = None
    for theta, w in zip(measure.atoms_f, measure.weights_f):
        term = w * g(float(theta))
        acc = term if acc is None else acc + term
    return acc


def nc_interpolate(measure: InterpolationMeasure, f: Callable, a, b):
    """sum_j w_j f((1 - theta_j) a + theta_j b); a and b may be arrays."""

    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = interpolation_sum(measure, lambda theta: f((1.0 - theta) * a + theta * b))
    return float(out) if np.ndim(out) == 0 else out
