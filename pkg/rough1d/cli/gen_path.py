from __future__ import annotations

from rough1d.cli.common import now, parse_fbm_flag, report_meta, resolve_path
from rough1d.store import Report, RunLogger, emit_report
from rough1d.store.artifacts import render_path_csv, write_text_atomic


def main(run, log: RunLogger) -> int:
    params = run.parameters
    if params.get("fbm"):
        grid = parse_fbm_flag(params["fbm"])
    else:
        grid = resolve_path(str(params["path"]), run.settings.n_cells)

    log.append(
        when=now(),
        event={"event": "path", "label": grid.label, "n_cells": grid.n_cells},
    )

    meta = report_meta(run)
    if run.format == "json":
        report = Report(
            meta=meta,
            values={"label": grid.label, "n_cells": grid.n_cells},
            columns=("t", "value"),
            rows=[(float(t), float(v)) for t, v in zip(grid.times, grid.values)],
        )
        text = emit_report(report, "json", run.output_path)
    else:
        text = render_path_csv(grid, meta)
        if run.output_path is not None:
            write_text_atomic(run.output_path, text)
    if run.output_path is None:
        print(text, end="")
    return 0
