from __future__ import annotations

from dataclasses import asdict

from rough1d.cli.common import build_area, build_curve, new_report, now, write_output
from rough1d.engine.levy_area import validate_area
from rough1d.errors import AuditFailure
from rough1d.store import RunLogger


def main(run, log: RunLogger) -> int:
    params = run.parameters
    cfg = run.settings
    curve, h = build_curve(params, cfg.n_cells)
    area = build_area(params["area"], curve, h, int(params["order"]), int(params["m"]))

    audit = validate_area(area, curve, float(params["beta"]), cfg.audit_triples, cfg.audit_seed)
    passed = audit.passed(cfg.audit_tol)
    values = {**asdict(audit), "passed": passed, "provenance": area.provenance.value}
    log.append(when=now(), event={"event": "audit", **values})

    write_output(run, new_report(run, values=values))
    if not passed:
        raise AuditFailure(
            f"area {area.label} fails the audit: chasles defect "
            f"{audit.max_chasles_defect:.3g}, antisymmetry defect "
            f"{audit.max_antisymmetry_defect:.3g} (tolerance {cfg.audit_tol:g})",
            report=audit,
        )
    return 0
