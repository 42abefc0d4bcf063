from __future__ import annotations

import math

import numpy as np

from rough1d.cli.common import driver_path, new_report, now, write_output
from rough1d.engine.doss_sussmann import ds_solution
from rough1d.engine.functions import resolve_function
from rough1d.engine.paths import PathGrid
from rough1d.engine.rde_solver import RdeProblem, RdeSolution, residual_check, solve
from rough1d.errors import NonContractionError
from rough1d.store import RunLogger


def build_problem(run) -> RdeProblem:
    params = run.parameters
    return RdeProblem(
        x=driver_path(params, run.settings.n_cells),
        sigma=resolve_function(str(params["sigma"])),
        b=resolve_function(str(params["b"])),
        y0=float(params["y0"]),
        beta=float(params["beta"]),
    )


def _solve(run, problem: RdeProblem, log: RunLogger) -> RdeSolution:
    cfg = run.settings
    try:
        solution = solve(
            problem,
            cfg.tol,
            cfg.max_iter,
            init=str(run.parameters.get("init", "constant")),
            working_radius=cfg.working_radius,
            pair_budget=cfg.pair_budget,
        )
    except NonContractionError as e:
        log.log_events(when=now(), command=run.command, events=e.diagnostics.get("events", []))
        raise
    log.log_events(when=now(), command=run.command, events=solution.events)
    return solution


def _path_rows(y: PathGrid) -> list[tuple[float, float]]:
    return [(float(t), float(v)) for t, v in zip(y.times, y.values)]


def main(run, log: RunLogger) -> int:
    problem = build_problem(run)
    solution = _solve(run, problem, log)
    residual = residual_check(problem, solution)

    report = new_report(
        run,
        values={
            "delta_used": solution.delta_used,
            "segments": solution.segments,
            "n_norm_history": list(solution.n_norm_history),
            "residual": residual,
        },
        columns=("t", "y"),
        rows=_path_rows(solution.y),
    )
    write_output(run, report)
    return 0


def oracle_main(run, log: RunLogger) -> int:
    problem = build_problem(run)
    y = ds_solution(problem, run.settings.flow_step)
    residual = residual_check(problem, RdeSolution.from_path(y, problem.x))

    report = new_report(
        run,
        values={"flow_step": run.settings.flow_step, "residual": residual},
        columns=("t", "y"),
        rows=_path_rows(y),
    )
    write_output(run, report)
    return 0


def compare_main(run, log: RunLogger) -> int:
    problem = build_problem(run)
    solution = _solve(run, problem, log)
    oracle = ds_solution(problem, run.settings.flow_step)

    diff = solution.y.values - oracle.values
    sup_diff = float(np.max(np.abs(diff)))
    # Trapezoid rule on the uniform grid.
    l2_diff = math.sqrt(float(np.sum(0.5 * (diff[:-1] ** 2 + diff[1:] ** 2))) / problem.n_cells)

    values = {
        "sup_diff": sup_diff,
        "l2_diff": l2_diff,
        "residual_solver": residual_check(problem, solution),
        "residual_oracle": residual_check(problem, RdeSolution.from_path(oracle, problem.x)),
        "delta_used": solution.delta_used,
        "segments": solution.segments,
    }
    log.append(when=now(), event={"event": "compare", "command": run.command, **values})
    write_output(run, new_report(run, values=values))
    return 0
