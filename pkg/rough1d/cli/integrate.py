from __future__ import annotations

from dataclasses import asdict
from typing import Any

from rough1d.cli.common import (
    build_area,
    build_curve,
    new_report,
    now,
    parse_fraction,
    parse_spec,
    write_output,
)
from rough1d.engine.corrected_integral import (
    converge,
    corrected_approx,
    default_ladder,
    germ_sum,
    nc_functional_approx,
    rv_symmetric_approx,
    weighted_corrected_approx,
)
from rough1d.engine.functions import resolve_function
from rough1d.engine.levy_area import Curve, LevyArea, validate_area
from rough1d.engine.types import Provenance, Scheme
from rough1d.errors import AuditFailure, GridAlignmentError, ValidationError
from rough1d.store import RunLogger

# External areas are audited for the Chasles identity and antisymmetry only;
# the Hölder exponent enters the reported constants, not the verdict.
AUDIT_BETA = 0.34
SMOOTH_ALPHA = 1.0
HURST_MARGIN = 0.02


def _audited(run, area: LevyArea, curve: Curve, log: RunLogger) -> LevyArea:
    if area.provenance is not Provenance.EXTERNAL:
        return area
    cfg = run.settings
    audit = validate_area(area, curve, AUDIT_BETA, cfg.audit_triples, cfg.audit_seed)
    log.append(when=now(), event={"event": "audit", "label": area.label, **asdict(audit)})
    if not audit.passed(cfg.audit_tol):
        raise AuditFailure(
            f"external area {area.label} fails the audit "
            f"(chasles defect {audit.max_chasles_defect:.3g})",
            report=audit,
        )
    return area


def _setup(run, log: RunLogger):
    params = run.parameters
    curve, h = build_curve(params, run.settings.n_cells)
    m = int(params["m"])
    area = build_area(params["area"], curve, h, 2 * m - 2, m)
    return curve, _audited(run, area, curve, log), resolve_function(str(params["f"])), m


def _finest_level(n_cells: int) -> int:
    if n_cells & (n_cells - 1):
        raise GridAlignmentError(
            f"n_cells={n_cells} is not a power of two; pass --level explicitly"
        )
    return n_cells.bit_length() - 1


def main(run, log: RunLogger) -> int:
    params = run.parameters
    curve, area, f, m = _setup(run, log)
    window = tuple(params["window"]) if params.get("window") else None
    eps = parse_fraction(params["eps"])
    scheme = str(params["scheme"])

    if scheme == "rv":
        value = rv_symmetric_approx(f, curve, eps, window)
        name = Scheme.RV_SYMMETRIC.value
    elif scheme == "nc":
        value = nc_functional_approx(
            lambda _z1, z2: f(z2), (curve.x, curve.y), curve.x, m, eps, window
        )
        name = Scheme.NC_FUNCTIONAL.value
    elif scheme == "corrected":
        value = corrected_approx(f, curve, area, m, eps, window).value
        name = Scheme.CORRECTED_AVERAGED.value
    elif scheme == "germ":
        level = params.get("level")
        level = _finest_level(curve.n_cells) if level is None else int(level)
        value = germ_sum(f, curve, area, m, level, window)
        name = Scheme.CORRECTED_GERM_SUM.value
    elif scheme == "weighted":
        if m != 1:
            raise ValidationError("the weighted scheme is defined for m = 1 only")
        value = weighted_corrected_approx(f, curve, area, eps, window)
        name = "weighted_corrected"
    else:
        raise ValidationError(f"unknown scheme {scheme!r}")

    values: dict[str, Any] = {
        "value": value,
        "scheme": name,
        "epsilon": float(eps),
        "m": m,
        "window": list(window) if window else [0.0, 1.0],
    }
    write_output(run, new_report(run, values=values))
    return 0


def _default_alpha(params: dict[str, Any]) -> float:
    """Hurst index minus a margin for fBm drivers, 1 for everything else."""

    if params.get("fbm"):
        return float(str(params["fbm"]).split(",")[0]) - HURST_MARGIN
    name, spec = parse_spec(str(params.get("path_x") or ""))
    if name == "fbm" and "hurst" in spec:
        return float(spec["hurst"]) - HURST_MARGIN
    return SMOOTH_ALPHA


def converge_main(run, log: RunLogger) -> int:
    params = run.parameters
    curve, area, f, m = _setup(run, log)

    if params.get("ladder"):
        ladder = [float(parse_fraction(e)) for e in str(params["ladder"]).split(",") if e.strip()]
    else:
        ladder = default_ladder(curve.n_cells)
    alpha = params.get("alpha")
    alpha = _default_alpha(params) if alpha is None else float(alpha)

    report = converge(f, curve, area, m, ladder, alpha, threads=run.settings.threads)
    log.append(
        when=now(),
        event={
            "event": "converge",
            "rate_empirical": report.empirical_rate,
            "rate_predicted": report.predicted_rate,
            "exact": report.exact,
        },
    )

    out = new_report(
        run,
        values={
            "rate_empirical": report.empirical_rate,
            "rate_predicted": report.predicted_rate,
            "extrapolated_limit": report.extrapolated_limit,
            "exact": report.exact,
            "alpha": alpha,
        },
        columns=("eps", "value", "residual"),
        rows=list(zip(report.epsilons, report.values, report.residuals)),
    )
    write_output(run, out)
    return 0
