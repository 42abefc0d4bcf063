from __future__ import annotations

from collections.abc import Callable, Mapping
from dataclasses import dataclass
from math import comb

import numpy as np

from rough1d.engine.newton_cotes import nc_interpolate, nc_measure
from rough1d.engine.paths import PathGrid
from rough1d.engine.types import NC_MAX_ORDER, Provenance
from rough1d.errors import (
    GridAlignmentError,
    OrderMismatchError,
    PrimitiveMismatchError,
    UndeclaredAreaError,
    ValidationError,
)

MomentFn = Callable[[np.ndarray, np.ndarray, int], np.ndarray]


@dataclass(frozen=True, eq=False)
class Curve:
    """gamma = (x, y) sampled on one grid."""

    x: PathGrid
    y: PathGrid

    def __post_init__(self):
        if self.x.n_cells != self.y.n_cells:
            raise ValidationError(
                f"curve components on different grids: {self.x.n_cells} vs {self.y.n_cells}"
            )

    @property
    def n_cells(self) -> int:
        return self.x.n_cells

    @classmethod
    def from_function(cls, x: PathGrid, h: Callable) -> Curve:
        y = np.asarray(h(x.values), dtype=float) + np.zeros_like(x.values)
        return cls(x, x.with_values(y, label=f"h({x.label})"))

    def points(self, idx) -> tuple[np.ndarray, np.ndarray]:
        return self.x.at_index(idx), self.y.at_index(idx)


def _scalar_or_array(out, *inputs):
    if all(np.ndim(v) == 0 for v in inputs):
        return float(out)
    return out


@dataclass(frozen=True, eq=False)
class LevyArea:
    """Evaluator of A_st[(Y - zeta)^k] for k <= order_k_max on grid indices.

    ``moments(s, t, k)`` returns the unshifted A_st[Y^k] for index arrays; shifts are
    expanded binomially. Indices beyond the grid clamp to its ends.
    """

    order_k_max: int
    provenance: Provenance
    n_cells: int
    moments: MomentFn
    label: str = ""
    support: frozenset[tuple[int, int]] | None = None

    def evaluate(self, s, t, k: int = 0, zeta=0.0):
        if not 0 <= k <= self.order_k_max:
            raise OrderMismatchError(
                f"area of order {self.order_k_max} evaluated at k={k} ({self.label})"
            )
        si = np.clip(np.asarray(s, dtype=np.int64), 0, self.n_cells)
        ti = np.clip(np.asarray(t, dtype=np.int64), 0, self.n_cells)
        z = np.asarray(zeta, dtype=float)
        if k == 0 or not np.any(z):
            out = self.moments(si, ti, k)
        else:
            out = 0.0
            for j in range(k + 1):
                out = out + comb(k, j) * (-z) ** (k - j) * self.moments(si, ti, j)
        return _scalar_or_array(out, s, t, zeta)

    def at_times(self, s: float, t: float, k: int = 0, zeta: float = 0.0) -> float:
        return self.evaluate(_time_index(s, self.n_cells), _time_index(t, self.n_cells), k, zeta)

    def truncated(self, order_k_max: int) -> LevyArea:
        if order_k_max > self.order_k_max:
            raise OrderMismatchError(
                f"cannot raise area order from {self.order_k_max} to {order_k_max}"
            )
        return LevyArea(
            order_k_max, self.provenance, self.n_cells, self.moments, self.label, self.support
        )


def _time_index(t: float, n_cells: int) -> int:
    scaled = float(t) * n_cells
    i = round(scaled)
    if abs(scaled - i) > 1e-9 * max(1.0, abs(scaled)):
        raise GridAlignmentError(f"t={t} is not a grid point of a {n_cells}-cell grid")
    return int(i)


@dataclass(frozen=True)
class AreaAuditReport:
    max_chasles_defect: float
    max_antisymmetry_defect: float
    holder_constant_2beta: float
    shifted_bound_constant: float
    triples_checked: int

    def passed(self, tol: float) -> bool:
        return self.max_chasles_defect < tol and self.max_antisymmetry_defect < tol


def segment_line_integral(px, py, qx, qy, k: int, shift=0.0):
    """Integral of (eta - shift)^(k+1) / (k+1) d xi along the straight segment p -> q."""

    a = np.asarray(py, dtype=float) - shift
    b = np.asarray(qy, dtype=float) - shift
    n = k + 1
    total = 0.0
    for i in range(n + 1):
        total = total + a**i * b ** (n - i)
    return (np.asarray(qx, dtype=float) - px) * total / ((k + 1) * (k + 2))


def triangle_area(a, b, c):
    """Oriented area 1/2 [(y_c - y_b)(x_a - x_b) - (y_a - y_b)(x_c - x_b)]."""

    (xa, ya), (xb, yb), (xc, yc) = a, b, c
    return 0.5 * ((yc - yb) * (xa - xb) - (ya - yb) * (xc - xb))


def triangle_moment(a, b, c, k: int):
    """Oriented integral of eta^k over the triangle abc; k = 0 gives triangle_area."""

    (xa, ya), (xb, yb), (xc, yc) = a, b, c
    return (
        segment_line_integral(xa, ya, xb, yb, k)
        + segment_line_integral(xb, yb, xc, yc, k)
        + segment_line_integral(xc, yc, xa, ya, k)
    )


def shoelace_area(points) -> float:
    """Counter-clockwise-positive area of the closed polygon through ``points``."""

    pts = np.asarray(points, dtype=float)
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def zero_area(n_cells: int, order_k_max: int = 0) -> LevyArea:
    def moments(s, t, k):
        return np.zeros(np.broadcast(s, t).shape)

    return LevyArea(order_k_max, Provenance.ZERO, n_cells, moments, label="zero")


def area_from_primitive(
    x: PathGrid,
    h: Callable,
    H_prim: Callable | None = None,
    *,
    seed: int = 0,
    checks: int = 10,
    rel_tol: float = 1e-6,
) -> LevyArea:
    """Order-0 area of (x, h(x)): A_rs = H(x_s) - H(x_r) - (h(x_r) + h(x_s))/2 (x_s - x_r)."""

    if H_prim is None:
        H_prim = getattr(h, "primitive", None)
        if H_prim is None:
            raise PrimitiveMismatchError("no primitive supplied for the integrand")

    lo, hi = float(x.values.min()), float(x.values.max())
    rng = np.random.Generator(np.random.PCG64(seed))
    probes = rng.uniform(lo - 0.5, hi + 0.5, size=checks)
    for p in probes:
        step = 1e-5 * max(1.0, abs(p))
        fd = (float(H_prim(p + step)) - float(H_prim(p - step))) / (2.0 * step)
        ref = float(h(p))
        if abs(fd - ref) > rel_tol * max(1.0, abs(ref)):
            raise PrimitiveMismatchError(
                f"primitive derivative {fd:.10g} does not match integrand {ref:.10g} at {p:.6g}"
            )

    xs = x.values
    Hx = np.asarray(H_prim(xs), dtype=float) + np.zeros_like(xs)
    hx = np.asarray(h(xs), dtype=float) + np.zeros_like(xs)

    def moments(s, t, k):
        return Hx[t] - Hx[s] - 0.5 * (hx[s] + hx[t]) * (xs[t] - xs[s])

    return LevyArea(
        0, Provenance.FROM_PRIMITIVE, x.n_cells, moments, label=f"primitive({x.label})"
    )


def pl_area(curve: Curve, order_k_max: int) -> LevyArea:
    """Area between the polyline gamma([s, t]) and its chord, weighted by eta^k.

    Each moment is the closed line integral of eta^(k+1)/(k+1) d xi along the
    polyline s -> t followed by the chord t -> s. Polyline parts come from
    cumulative sums, so every evaluation is O(1).
    """

    if order_k_max < 0 or order_k_max % 2 or order_k_max > 2 * NC_MAX_ORDER - 2:
        raise ValidationError(
            f"piecewise-linear area order must be even in [0, {2 * NC_MAX_ORDER - 2}], "
            f"got {order_k_max}"
        )

    xs, ys = curve.x.values, curve.y.values
    cumulative = []
    for k in range(order_k_max + 1):
        seg = segment_line_integral(xs[:-1], ys[:-1], xs[1:], ys[1:], k)
        cumulative.append(np.concatenate(([0.0], np.cumsum(seg))))

    def moments(s, t, k):
        chord = segment_line_integral(xs[t], ys[t], xs[s], ys[s], k)
        return cumulative[k][t] - cumulative[k][s] + chord

    return LevyArea(
        order_k_max,
        Provenance.PIECEWISE_LINEAR,
        curve.n_cells,
        moments,
        label=f"pl({curve.x.label},{curve.y.label})",
    )


def candidate_area(x: PathGrid, h: Callable, m: int, *, nodes: int = 64) -> LevyArea:
    """Candidate area of order m - 1 for y = h(x), built from nu_m-interpolated chords.

    It is exposed for experiments only; its Hölder bound is weaker than order 2m - 2
    areas require.
    """

    measure = nc_measure(m)
    xs = x.values
    ys = np.asarray(h(xs), dtype=float) + np.zeros_like(xs)
    gl_nodes, gl_weights = np.polynomial.legendre.leggauss(nodes)

    # G_q(v) = integral_0^v h^(q+1), by Gauss–Legendre on [0, v] for every grid value.
    scaled = 0.5 * xs[:, None] * (gl_nodes[None, :] + 1.0)
    h_nodes = np.asarray(h(scaled), dtype=float) + np.zeros_like(scaled)
    primitives = []
    for q in range(m):
        primitives.append(0.5 * xs * np.sum(gl_weights[None, :] * h_nodes ** (q + 1), axis=1))

    def moments(s, t, q):
        chord = nc_interpolate(measure, lambda u: u ** (q + 1), ys[s], ys[t])
        G = primitives[q]
        return (G[t] - G[s] - (xs[t] - xs[s]) * chord) / (q + 1)

    return LevyArea(m - 1, Provenance.CANDIDATE, x.n_cells, moments, label=f"candidate(m={m})")


def external_area(
    entries: Mapping[tuple[int, int, int], float], n_cells: int, label: str = "external"
) -> LevyArea:
    """Area declared on a finite (s, t, k) support; (t, s) follows by antisymmetry."""

    table: dict[tuple[int, int, int], float] = {}
    for (s, t, k), value in entries.items():
        table[(s, t, k)] = float(value)
        table.setdefault((t, s, k), -float(value))
    order = max((k for _, _, k in table), default=0)
    support = frozenset((s, t) for s, t, _ in table)

    def lookup(s: int, t: int, k: int) -> float:
        if s == t:
            return 0.0
        try:
            return table[(s, t, k)]
        except KeyError:
            raise UndeclaredAreaError(
                f"external area undeclared at s={s / n_cells}, t={t / n_cells}, k={k}"
            ) from None

    def moments(s, t, k):
        s_b, t_b = np.broadcast_arrays(s, t)
        out = np.empty(s_b.shape)
        for idx in np.ndindex(s_b.shape):
            out[idx] = lookup(int(s_b[idx]), int(t_b[idx]), k)
        return out

    return LevyArea(order, Provenance.EXTERNAL, n_cells, moments, label=label, support=support)


def sample_triples(
    n_cells: int, count: int, seed: int, points: np.ndarray | None = None
) -> np.ndarray:
    """Reproducible (count, 3) array of grid-index triples."""

    rng = np.random.Generator(np.random.PCG64(seed))
    if points is None:
        return rng.integers(0, n_cells + 1, size=(count, 3))
    return rng.choice(np.asarray(points), size=(count, 3))


def _declared_mask(area: LevyArea, triples: np.ndarray) -> np.ndarray:
    support = area.support or frozenset()

    def ok(a: int, b: int) -> bool:
        return a == b or (a, b) in support

    return np.array([ok(r, s) and ok(s, t) and ok(t, r) for r, s, t in triples.tolist()], bool)


def validate_area(
    area: LevyArea, curve: Curve, beta: float, triples: int, seed: int
) -> AreaAuditReport:
    """Audit the Chasles identity, antisymmetry and the Hölder bound on random triples."""

    if not 0.0 < beta < 1.0:
        raise ValidationError(f"beta must lie in (0, 1), got {beta}")
    n = curve.n_cells

    if area.provenance is Provenance.EXTERNAL:
        declared = sorted({i for pair in (area.support or ()) for i in pair})
        if not declared:
            return AreaAuditReport(0.0, 0.0, 0.0, 0.0, 0)
        tri = sample_triples(n, triples, seed, points=np.asarray(declared))
        tri = tri[_declared_mask(area, tri)]
    else:
        tri = sample_triples(n, triples, seed)
    if tri.size == 0:
        return AreaAuditReport(0.0, 0.0, 0.0, 0.0, 0)

    r, s, t = tri[:, 0], tri[:, 1], tri[:, 2]
    pr, ps, pt = curve.points(r), curve.points(s), curve.points(t)
    ys = curve.y.values

    chasles = 0.0
    antisym = 0.0
    holder0 = 0.0
    shifted = 0.0
    order_exponent = 2 * (area.order_k_max // 2 + 1) * beta
    pairs = [(r, s), (s, t), (t, r)]

    for k in range(area.order_k_max + 1):
        a_rs = area.evaluate(r, s, k)
        a_st = area.evaluate(s, t, k)
        a_tr = area.evaluate(t, r, k)
        defect = np.abs(a_rs + a_st + a_tr + triangle_moment(pr, ps, pt, k))
        chasles = max(chasles, float(defect.max()))

        for a_idx, b_idx in pairs:
            forward = area.evaluate(a_idx, b_idx, k)
            backward = area.evaluate(b_idx, a_idx, k)
            antisym = max(antisym, float(np.abs(forward + backward).max()))
        antisym = max(antisym, float(np.abs(area.evaluate(r, r, k)).max()))

        for a_idx, b_idx in pairs:
            keep = a_idx != b_idx
            if not np.any(keep):
                continue
            a_k, b_k = a_idx[keep], b_idx[keep]
            span = np.abs(b_k - a_k) / n
            for frac in np.linspace(0.0, 1.0, 5):
                zeta = ys[a_k] + frac * (ys[b_k] - ys[a_k])
                val = np.abs(area.evaluate(a_k, b_k, k, zeta))
                shifted = max(shifted, float((val / span**order_exponent).max()))
                if k == 0:
                    holder0 = max(holder0, float((val / span ** (2.0 * beta)).max()))

    return AreaAuditReport(
        max_chasles_defect=chasles,
        max_antisymmetry_defect=antisym,
        holder_constant_2beta=holder0,
        shifted_bound_constant=shifted,
        triples_checked=int(tri.shape[0]),
    )
