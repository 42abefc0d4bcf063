import numpy as np
import pytest
from scipy.integrate import solve_ivp

from rough1d.engine.doss_sussmann import ds_solution
from rough1d.engine.functions import SmoothFunction, resolve_function
from rough1d.engine.levy_area import Curve, pl_area, validate_area, zero_area
from rough1d.engine.paths import PathGrid, gen_fbm, sample_smooth
from rough1d.engine.rde_solver import (
    STALL_RATIO,
    RdeProblem,
    RdeSolution,
    n_norm,
    picard_map,
    residual_check,
    solve,
)
from rough1d.engine.types import Provenance
from rough1d.errors import (
    CoefficientRangeError,
    MissingDerivativeError,
    NonContractionError,
    ValidationError,
)

SIGMA = resolve_function("2+sin")
DRIFT = resolve_function("cos")


def problem_on(x: PathGrid, sigma=SIGMA, b=DRIFT, y0=0.5, beta=0.34) -> RdeProblem:
    return RdeProblem(x=x, sigma=sigma, b=b, y0=y0, beta=beta)


def test_problem_validation():
    x = sample_smooth("sine", 16)
    with pytest.raises(ValidationError):
        problem_on(x, beta=0.3)
    with pytest.raises(ValidationError):
        RdeProblem(x=x, sigma=SIGMA, b=DRIFT, y0=0.0, beta=0.5, alpha=0.45)
    with pytest.raises(MissingDerivativeError):
        problem_on(x, sigma=np.sin)
    short = SmoothFunction.from_derivatives("short", [np.sin, np.cos])
    with pytest.raises(MissingDerivativeError):
        problem_on(x, sigma=short)


def test_coefficient_warnings():
    x = sample_smooth("sine", 16)
    assert problem_on(x).coefficient_warnings(100.0) == []
    warnings = problem_on(x, sigma=resolve_function("exp")).coefficient_warnings(100.0)
    assert {w["coefficient"] for w in warnings} == {"sigma", "sigma'", "sigma''"}


def test_n_norm_examples():
    y = sample_smooth("constant", 64, value=3.0)
    assert n_norm(y, zero_area(64), 0.5) == 0.0
    line = sample_smooth("linear", 64)
    assert n_norm(line, zero_area(64), 0.5) == pytest.approx(1.0)


def test_n_norm_is_homogeneous():
    x = gen_fbm(0.45, 128, seed=1)
    y = gen_fbm(0.45, 128, seed=2)
    scaled = y.with_values(-2.5 * y.values)
    base = n_norm(y, pl_area(Curve(x, y), 0), 0.4)
    assert n_norm(scaled, pl_area(Curve(x, scaled), 0), 0.4) == pytest.approx(2.5 * base, rel=1e-12)


def test_picard_map_pure_drift():
    x = gen_fbm(0.45, 256, seed=3)
    problem = problem_on(x, sigma=resolve_function("zero"), b=resolve_function("one"))
    y = sample_smooth("constant", 256, value=0.3)
    y_new, a_new = picard_map(problem, y, zero_area(256))
    assert np.allclose(y_new.values, 0.3 + y.times, atol=1e-12)
    assert a_new.provenance is Provenance.PICARD

    reference = pl_area(Curve(x, y_new), 0)
    s = np.arange(0, 200, 5)
    t = s + 37
    assert np.allclose(a_new.evaluate(s, t), reference.evaluate(s, t), atol=1e-12)


def test_picard_map_constant_coefficient():
    x = gen_fbm(0.45, 256, seed=4)
    problem = problem_on(x, sigma=resolve_function("1.5"), b=resolve_function("zero"))
    y = sample_smooth("constant", 256, value=-0.2)
    y_new, a_new = picard_map(problem, y, zero_area(256))
    assert np.allclose(y_new.values, -0.2 + 1.5 * (x.values - x.values[0]), atol=1e-12)
    s = np.arange(0, 250, 3)
    assert np.max(np.abs(a_new.evaluate(s, 256 - s))) < 1e-12


def test_picard_map_on_a_window_extends_constantly():
    x = sample_smooth("sine", 64)
    problem = problem_on(x)
    y = sample_smooth("constant", 64, value=0.5)
    y_new, _ = picard_map(problem, y, zero_area(64), (0.25, 0.5))
    assert np.all(y_new.values[:16] == y_new.values[16])
    assert np.all(y_new.values[32:] == y_new.values[32])
    assert y_new.values[16] == 0.5


def test_picard_iterate_satisfies_chasles():
    x = gen_fbm(0.45, 512, seed=5)
    problem = problem_on(x)
    y = sample_smooth("constant", 512, value=0.5)
    y1, a1 = picard_map(problem, y, zero_area(512))
    y2, a2 = picard_map(problem, y1, a1)
    report = validate_area(a2, Curve(x, y2), 0.34, 1000, 0)
    assert report.max_chasles_defect < 1e-8
    assert report.max_antisymmetry_defect < 1e-12


def test_picard_map_rejects_mismatched_grids():
    problem = problem_on(sample_smooth("sine", 64))
    with pytest.raises(ValidationError):
        picard_map(problem, sample_smooth("constant", 32), zero_area(32))


def test_unit_coefficient_solution_is_the_driver_increment():
    x = gen_fbm(0.45, 1024, seed=7)
    problem = problem_on(x, sigma=resolve_function("one"), b=resolve_function("zero"))
    solution = solve(problem, tol=1e-10)
    assert np.max(np.abs(solution.y.values - (0.5 + x.values - x.values[0]))) < 1e-12
    assert solution.area.provenance is Provenance.PICARD


def test_vanishing_diffusion_matches_the_ode():
    x = sample_smooth("sine", 1024)
    problem = problem_on(x, sigma=resolve_function("zero"))
    solution = solve(problem, tol=1e-9)
    ref = solve_ivp(
        lambda _t, y: np.cos(y), (0.0, 1.0), [0.5], t_eval=x.times, rtol=1e-12, atol=1e-12
    )
    assert np.max(np.abs(solution.y.values - ref.y[0])) < 1e-6


@pytest.mark.parametrize(
    "driver",
    [
        lambda: sample_smooth("sine", 1024),
        lambda: gen_fbm(0.45, 1024, seed=7),
        lambda: gen_fbm(0.75, 1024, seed=7),
    ],
    ids=["sine", "fbm-0.45", "fbm-0.75"],
)
def test_solver_agrees_with_the_flow_representation(driver):
    problem = problem_on(driver())
    solution = solve(problem, tol=1e-5)
    oracle = ds_solution(problem, 1e-2)
    assert np.max(np.abs(solution.y.values - oracle.values)) < 5e-2
    assert residual_check(problem, solution) < 1e-4
    assert any(e["event"] == "segment_accepted" for e in solution.events)
    assert 0.0 < solution.delta_used <= 0.25
    assert solution.segments >= 4


def test_solver_error_shrinks_under_refinement():
    errors = []
    for n in (256, 512, 1024):
        problem = problem_on(sample_smooth("sine", n))
        solution = solve(problem, tol=1e-9)
        errors.append(np.max(np.abs(solution.y.values - ds_solution(problem, 1e-2).values)))
    assert errors[1] < 0.35 * errors[0]
    assert errors[2] < 0.35 * errors[1]


def test_starting_iterate_does_not_change_the_solution():
    problem = problem_on(gen_fbm(0.75, 512, seed=2))
    a = solve(problem, tol=1e-6)
    b = solve(problem, tol=1e-6, init="driver")
    assert np.max(np.abs(a.y.values - b.y.values)) < 1e-5


def test_residual_flags_a_perturbed_path():
    problem = problem_on(sample_smooth("sine", 256))
    solution = solve(problem, tol=1e-8)
    assert residual_check(problem, solution) < 1e-7
    shifted = solution.y.with_values(solution.y.values + 0.1)
    assert residual_check(problem, RdeSolution.from_path(shifted, problem.x)) >= 0.1 - 1e-6


def test_residual_rejects_another_grid():
    problem = problem_on(sample_smooth("sine", 64))
    other = RdeSolution.from_path(sample_smooth("sine", 32), sample_smooth("sine", 32))
    with pytest.raises(ValidationError):
        residual_check(problem, other)


def test_solver_argument_checks():
    problem = problem_on(sample_smooth("sine", 64))
    with pytest.raises(ValidationError):
        solve(problem, tol=0.0)
    with pytest.raises(ValidationError):
        solve(problem, max_iter=0)
    with pytest.raises(ValidationError):
        solve(problem, init="random")


def test_exhausted_iterations_raise_non_contraction():
    problem = problem_on(sample_smooth("sine", 64))
    with pytest.raises(NonContractionError) as info:
        solve(problem, tol=1e-12, max_iter=1)
    diagnostics = info.value.diagnostics
    assert diagnostics["reason"] == "max_iter"
    assert diagnostics["cells"] == 4
    kinds = [e["event"] for e in diagnostics["events"]]
    assert kinds.count("delta_halved") == 2
    assert kinds[-1] == "non_contraction"


def test_leaving_the_working_range_raises():
    problem = problem_on(
        sample_smooth("sine", 64), sigma=resolve_function("one"), b=resolve_function("zero")
    )
    with pytest.raises(CoefficientRangeError):
        solve(problem, working_radius=1e-3)


def test_solution_is_a_fixed_point_of_the_picard_map():
    problem = problem_on(sample_smooth("sine", 256))
    solution = solve(problem, tol=1e-9)
    y_next, a_next = picard_map(problem, solution.y, solution.area)
    assert np.max(np.abs(y_next.values - solution.y.values)) < 1e-7
    s = np.arange(0, 200, 9)
    t = s + 50
    assert np.allclose(a_next.evaluate(s, t), solution.area.evaluate(s, t), atol=1e-7)


def test_accepted_segments_contract_geometrically():
    solution = solve(problem_on(gen_fbm(0.45, 1024, seed=7)), tol=1e-5)
    history = list(solution.n_norm_history)
    pos = 0
    accepted = 0
    for event in solution.events:
        if event["event"] == "delta_halved":
            pos += len(event["diff_history"])
        elif event["event"] == "segment_accepted":
            diffs = history[pos : pos + event["iterations"]]
            pos += event["iterations"]
            accepted += 1
            assert diffs[-1] == event["final_diff"]
            if len(diffs) >= 2:
                assert diffs[-1] < STALL_RATIO * diffs[-2]
                assert diffs[-1] < diffs[0]
    assert pos == len(history)
    assert accepted == solution.segments
