from __future__ import annotations

from rough1d.cli.common import new_report
from rough1d.engine.newton_cotes import InterpolationMeasure, nc_measure
from rough1d.store import RunLogger, emit_report


def _decimal(value) -> str:
    return format(float(value), ".17g")


def format_measure(measure: InterpolationMeasure, *, decimal: bool = False) -> str:
    show = _decimal if decimal else str
    return ", ".join(f"{show(a)}: {show(w)}" for a, w in zip(measure.atoms, measure.weights))


def main(run, log: RunLogger) -> int:
    measure = nc_measure(int(run.parameters["m"]))
    print(format_measure(measure))
    print(format_measure(measure, decimal=True))

    if run.output_path is not None:
        report = new_report(
            run,
            values={"m": measure.order_m},
            columns=("atom", "weight", "atom_decimal", "weight_decimal"),
            rows=[
                (str(a), str(w), _decimal(a), _decimal(w))
                for a, w in zip(measure.atoms, measure.weights)
            ],
        )
        emit_report(report, run.format, run.output_path)
    return 0
