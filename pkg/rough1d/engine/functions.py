from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from rough1d.errors import MissingDerivativeError, UnknownFormulaError

ScalarFn = Callable[..., np.ndarray]


def _constant(c: float) -> ScalarFn:
    def fn(u):
        return np.zeros_like(np.asarray(u, dtype=float)) + c

    return fn


@dataclass(frozen=True)
class SmoothFunction:
    """A scalar coefficient together with its derivatives.

    ``derivative(k)`` returns the k-th derivative as a vectorised callable.
    ``max_order`` bounds the available derivatives (None = unlimited).
    """

    name: str
    derivative: Callable[[int], ScalarFn]
    max_order: int | None = None
    primitive: ScalarFn | None = None

    def __call__(self, u):
        return self.derivative(0)(u)

    def require(self, order: int) -> None:
        if self.max_order is not None and order > self.max_order:
            raise MissingDerivativeError(
                f"{self.name}: derivative of order {order} requested, "
                f"only {self.max_order} supplied"
            )

    def deriv(self, order: int) -> ScalarFn:
        self.require(order)
        return self.derivative(order)

    @classmethod
    def from_derivatives(
        cls, name: str, funcs: Sequence[ScalarFn], primitive: ScalarFn | None = None
    ) -> SmoothFunction:
        table = tuple(funcs)

        def derivative(k: int) -> ScalarFn:
            return table[k]

        return cls(name=name, derivative=derivative, max_order=len(table) - 1, primitive=primitive)

    @classmethod
    def polynomial(cls, name: str, coeffs: Sequence[float]) -> SmoothFunction:
        """Polynomial with ascending coefficients; derivatives and primitive are exact."""

        poly = Polynomial(np.asarray(coeffs, dtype=float))

        def derivative(k: int) -> ScalarFn:
            return poly.deriv(k) if k > 0 else poly

        return cls(name=name, derivative=derivative, primitive=poly.integ())

    @classmethod
    def constant(cls, c: float) -> SmoothFunction:
        def derivative(k: int) -> ScalarFn:
            return _constant(c) if k == 0 else _constant(0.0)

        return cls(name=f"{c:g}", derivative=derivative, primitive=Polynomial([0.0, c]))


_SIN_CYCLE: tuple[ScalarFn, ...] = (
    np.sin,
    np.cos,
    lambda u: -np.sin(u),
    lambda u: -np.cos(u),
)


def _sin() -> SmoothFunction:
    return SmoothFunction(
        name="sin",
        derivative=lambda k: _SIN_CYCLE[k % 4],
        primitive=lambda u: -np.cos(u),
    )


def _cos() -> SmoothFunction:
    return SmoothFunction(
        name="cos",
        derivative=lambda k: _SIN_CYCLE[(k + 1) % 4],
        primitive=np.sin,
    )


def _exp() -> SmoothFunction:
    return SmoothFunction(name="exp", derivative=lambda k: np.exp, primitive=np.exp)


def _two_plus_sin() -> SmoothFunction:
    def derivative(k: int) -> ScalarFn:
        if k == 0:
            return lambda u: 2.0 + np.sin(u)
        return _SIN_CYCLE[k % 4]

    return SmoothFunction(
        name="2+sin", derivative=derivative, primitive=lambda u: 2.0 * u - np.cos(u)
    )


_CATALOGUE: dict[str, Callable[[], SmoothFunction]] = {
    "zero": lambda: SmoothFunction.constant(0.0),
    "one": lambda: SmoothFunction.constant(1.0),
    "identity": lambda: SmoothFunction.polynomial("identity", [0.0, 1.0]),
    "square": lambda: SmoothFunction.polynomial("square", [0.0, 0.0, 1.0]),
    "cube": lambda: SmoothFunction.polynomial("cube", [0.0, 0.0, 0.0, 1.0]),
    "sin": _sin,
    "cos": _cos,
    "exp": _exp,
    "2+sin": _two_plus_sin,
}

_ALIASES = {"id": "identity", "x": "identity", "x2": "square", "x3": "cube"}


def function_names() -> list[str]:
    return sorted(_CATALOGUE)


def resolve_function(spec: str) -> SmoothFunction:
    """Resolve a catalogue name, a numeric constant, or ``poly:c0,c1,...``."""

    raw = spec.strip()
    key = _ALIASES.get(raw.lower(), raw.lower())
    if key in _CATALOGUE:
        return _CATALOGUE[key]()

    if key.startswith("poly:"):
        try:
            coeffs = [float(c) for c in key[len("poly:") :].split(",") if c.strip()]
        except ValueError as e:
            raise UnknownFormulaError(f"bad polynomial coefficients in {spec!r}: {e}") from e
        if not coeffs:
            raise UnknownFormulaError(f"empty polynomial: {spec!r}")
        if not np.all(np.isfinite(coeffs)):
            raise UnknownFormulaError(f"non-finite polynomial coefficient in {spec!r}")
        return SmoothFunction.polynomial(raw, coeffs)

    try:
        value = float(key)
    except ValueError:
        pass
    else:
        if not np.isfinite(value):
            raise UnknownFormulaError(f"non-finite constant {spec!r}")
        return SmoothFunction.constant(value)

    raise UnknownFormulaError(
        f"unknown function {spec!r}; known: {', '.join(function_names())}, poly:..., or a number"
    )
