from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import LinAlgError, cholesky

from rough1d.engine.types import DEFAULT_PAIR_BUDGET, FBM_JITTER, FBM_MAX_CELLS
from rough1d.errors import CovarianceError, GridAlignmentError, UnknownFormulaError, ValidationError

PairFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class PathGrid:
    """A real path sampled at t_i = i / n_cells, i = 0..n_cells.

    Evaluation outside [0, 1] is the constant extension of the end values.
    """

    n_cells: int
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        if int(self.n_cells) < 1:
            raise ValidationError(f"n_cells must be >= 1, got {self.n_cells}")
        arr = np.array(self.values, dtype=float)
        if arr.shape != (self.n_cells + 1,):
            raise ValidationError(
                f"expected {self.n_cells + 1} samples for n_cells={self.n_cells}, got {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValidationError("path values must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "n_cells", int(self.n_cells))
        object.__setattr__(self, "values", arr)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_cells + 1) / self.n_cells

    def at(self, t):
        """Piecewise-linear evaluation; constant beyond both ends."""
        return np.interp(t, self.times, self.values)

    def at_index(self, i):
        return self.values[np.clip(i, 0, self.n_cells)]

    def index_of(self, t: float) -> int:
        scaled = float(t) * self.n_cells
        i = round(scaled)
        if abs(scaled - i) > 1e-9 * max(1.0, abs(scaled)) or not 0 <= i <= self.n_cells:
            raise GridAlignmentError(f"t={t} is not a grid point of a {self.n_cells}-cell grid")
        return int(i)

    def window_indices(self, window: tuple[float, float] | None) -> tuple[int, int]:
        if window is None:
            return 0, self.n_cells
        lo, hi = self.index_of(window[0]), self.index_of(window[1])
        if hi < lo:
            raise ValidationError(f"window end before start: {window}")
        return lo, hi

    def with_values(self, values, label: str | None = None) -> PathGrid:
        return PathGrid(self.n_cells, values, self.label if label is None else label)


@dataclass(frozen=True)
class HolderEstimate:
    exponent: float
    constant: float
    pairs_checked: int


def _sine(t, amplitude=1.0, frequency=1.0, phase=0.0):
    return amplitude * np.sin(2.0 * np.pi * (frequency * t + phase))


def _piecewise_linear(t, breakpoints=((0.0, 0.0), (1.0, 1.0))):
    pts = sorted((float(a), float(b)) for a, b in breakpoints)
    if len(pts) < 2:
        raise ValidationError("piecewise-linear needs at least two breakpoints")
    return np.interp(t, [p[0] for p in pts], [p[1] for p in pts])


FORMULAS: dict[str, Callable[..., np.ndarray]] = {
    "constant": lambda t, value=0.0: np.zeros_like(t) + value,
    "linear": lambda t, slope=1.0, intercept=0.0: intercept + slope * t,
    "sine": _sine,
    # Quarter-period phase: the cosine companion of `sine`.
    "sine-shifted": lambda t, amplitude=1.0, frequency=1.0: _sine(t, amplitude, frequency, 0.25),
    "polynomial": lambda t, coeffs=(0.0, 1.0): np.polynomial.polynomial.polyval(t, coeffs),
    "piecewise-linear": _piecewise_linear,
}


def sample_smooth(formula: str, n_cells: int, **params) -> PathGrid:
    fn = FORMULAS.get(formula)
    if fn is None:
        raise UnknownFormulaError(
            f"unknown path formula {formula!r}; known: {', '.join(sorted(FORMULAS))}"
        )
    if n_cells < 1:
        raise ValidationError(f"n_cells must be >= 1, got {n_cells}")
    t = np.arange(n_cells + 1) / n_cells
    try:
        values = fn(t, **params)
    except TypeError as e:
        raise ValidationError(f"bad parameters for {formula!r}: {e}") from e
    tag = ",".join(f"{k}={v}" for k, v in sorted(params.items()))
    return PathGrid(n_cells, values, label=f"{formula}({tag})" if tag else formula)


@lru_cache(maxsize=4)
def _fbm_factor(hurst: float, n_cells: int) -> np.ndarray:
    # t_0 = 0 has zero variance and is left out of the factorization.
    t = np.arange(1, n_cells + 1) / n_cells
    two_h = 2.0 * hurst
    powers = t**two_h
    cov = np.abs(t[:, None] - t[None, :])
    cov **= two_h
    np.subtract(powers[:, None] + powers[None, :], cov, out=cov)
    cov *= 0.5
    cov[np.diag_indices(n_cells)] += FBM_JITTER
    try:
        factor = cholesky(cov, lower=True, check_finite=False, overwrite_a=True)
    except LinAlgError as e:
        raise CovarianceError(
            f"fBm covariance (H={hurst}, n={n_cells}) not positive definite "
            f"after jitter {FBM_JITTER}: {e}"
        ) from e
    factor.setflags(write=False)
    return factor


def gen_fbm(hurst: float, n_cells: int, seed: int) -> PathGrid:
    """Exact fBm sample on the grid via a lower-triangular covariance factor.

    Randomness comes from numpy's PCG64 generator seeded with ``seed``.
    """

    if not 0.0 < hurst < 1.0:
        raise ValidationError(f"hurst must lie in (0, 1), got {hurst}")
    if not 1 <= n_cells <= FBM_MAX_CELLS:
        raise ValidationError(f"n_cells must lie in [1, {FBM_MAX_CELLS}], got {n_cells}")
    if not 0 <= seed < 2**64:
        raise ValidationError(f"seed must be a 64-bit unsigned integer, got {seed}")

    factor = _fbm_factor(float(hurst), int(n_cells))
    rng = np.random.Generator(np.random.PCG64(seed))
    z = rng.standard_normal(n_cells)
    values = np.concatenate(([0.0], factor @ z))
    return PathGrid(n_cells, values, label=f"fbm(H={hurst},seed={seed})")


def pair_sup(
    pair_fn: PairFn,
    lo: int,
    hi: int,
    exponent: float,
    n_cells: int,
    pair_budget: int = DEFAULT_PAIR_BUDGET,
    seed: int = 0,
) -> tuple[float, int]:
    """Max of |pair_fn(s, t)| / ((t - s) / n_cells)**exponent over lo <= s < t <= hi.

    All pairs when (hi - lo + 1)**2 <= pair_budget; otherwise every dyadic span plus
    ``pair_budget`` random pairs, which makes the result a lower bound.
    """

    count = hi - lo + 1
    if count < 2:
        return 0.0, 0

    full = count * count <= pair_budget
    if full:
        lags = list(range(1, count))
    else:
        lags = [1 << k for k in range((count - 1).bit_length()) if (1 << k) < count]
        lags.append(count - 1)

    best = 0.0
    checked = 0
    for lag in sorted(set(lags)):
        s = np.arange(lo, hi - lag + 1)
        vals = np.abs(pair_fn(s, s + lag))
        best = max(best, float(vals.max()) / (lag / n_cells) ** exponent)
        checked += s.size

    if not full and pair_budget > 0:
        rng = np.random.Generator(np.random.PCG64(seed))
        a = rng.integers(lo, hi + 1, size=pair_budget)
        b = rng.integers(lo, hi + 1, size=pair_budget)
        keep = a != b
        s, t = np.minimum(a, b)[keep], np.maximum(a, b)[keep]
        if s.size:
            quotients = np.abs(pair_fn(s, t)) / ((t - s) / n_cells) ** exponent
            best = max(best, float(quotients.max()))
            checked += s.size

    return best, checked


def holder_estimate(
    path: PathGrid,
    exponent: float,
    pair_budget: int = DEFAULT_PAIR_BUDGET,
    *,
    window: tuple[int, int] | None = None,
    seed: int = 0,
) -> HolderEstimate:
    """Estimate L in |z_t - z_s| <= L |t - s|^exponent, globally or on an index window."""

    if not 0.0 < exponent < 1.0:
        raise ValidationError(f"exponent must lie in (0, 1), got {exponent}")
    lo, hi = window if window is not None else (0, path.n_cells)
    v = path.values
    constant, checked = pair_sup(
        lambda s, t: v[t] - v[s], lo, hi, exponent, path.n_cells, pair_budget, seed
    )
    return HolderEstimate(exponent=float(exponent), constant=constant, pairs_checked=checked)
