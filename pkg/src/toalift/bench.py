"""Monte-Carlo benchmark harness: trials, campaigns, basin sweeps, CSV output.

A campaign draws fresh scenarios and initial estimates from a seeded stream
and runs every requested objective from the same initial position (lifted
kinds get lam = 1 appended), so differences in outcome isolate the lifting
effect. A trial counts as a local-minimum failure when the final position
lands more than 0.5 model units from the ground truth. Per-trial seeds come
from spawned SeedSequence children, making the whole campaign a pure function
of the master seed regardless of execution order.

All floats in CSV output carry 17 significant digits so aggregates are exactly
recomputable from the per-trial file and reruns are byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ContractError
from .geometry import Scenario
from .objectives import ObjectiveKind, ParameterVector, evaluate
from .optimizer import OptimizationResult, SolverSettings, Termination, solve
from .scenario import GeneratorConfig, random_initial, random_scenario

FAILURE_THRESHOLD = 0.5  # position error above this marks convergence to a wrong basin
LIFTED_LAMBDA_START = 1.0

LABEL_GLOBAL = "GlobalMin"
LABEL_LOCAL = "LocalMin"
LABEL_DIVERGED = "Diverged"


@dataclass(frozen=True)
class TrialResult:
    scenario_id: int
    kind: ObjectiveKind
    error: float
    is_local_min_failure: bool
    iterations: int
    termination: Termination


@dataclass(frozen=True)
class BenchmarkRow:
    n_stations: int
    kind: ObjectiveKind
    mean_error: float
    std_error: float  # population (divide-by-count) form
    failure_count: int
    trial_count: int


def run_trial(
    scenario: Scenario,
    kind: ObjectiveKind,
    x0: ParameterVector,
    settings: SolverSettings = SolverSettings(),
    scenario_id: int = 0,
) -> TrialResult:
    """One solve, reduced to its benchmark verdict.

    A solver contract failure (a root-family start placed exactly on a
    station) is recorded as a zero-iteration trial scored at the initial
    estimate rather than aborting the campaign.
    """
    try:
        result = solve(kind, scenario, x0, settings)
        final = result.final_point.position
        iterations = result.iterations
        termination = result.termination
    except ContractError:
        final = x0.position
        iterations = 0
        termination = Termination.MaxIter
    error = float(np.linalg.norm(final - scenario.ground_truth))
    return TrialResult(
        scenario_id=scenario_id,
        kind=kind,
        error=error,
        is_local_min_failure=error > FAILURE_THRESHOLD,
        iterations=iterations,
        termination=termination,
    )


def run_campaign(
    config: GeneratorConfig,
    kinds: tuple[ObjectiveKind, ...],
    trials: int,
    settings: SolverSettings = SolverSettings(),
) -> tuple[list[BenchmarkRow], list[TrialResult]]:
    """Run `trials` fresh scenarios through every kind; aggregate per kind."""
    if trials < 1:
        raise ContractError("trials must be >= 1")
    children = np.random.SeedSequence(config.seed).spawn(trials)
    results: list[TrialResult] = []
    for i in range(trials):
        rng = np.random.default_rng(children[i])
        scenario = random_scenario(config, rng)
        start = random_initial(config, rng)
        for kind in kinds:
            x0 = (
                ParameterVector(start.position, LIFTED_LAMBDA_START)
                if kind.lifted
                else start
            )
            results.append(run_trial(scenario, kind, x0, settings, scenario_id=i))
    rows = [
        _aggregate(config.n_stations, kind, [t for t in results if t.kind is kind])
        for kind in kinds
    ]
    return rows, results


def _aggregate(n_stations: int, kind: ObjectiveKind, trials: list[TrialResult]) -> BenchmarkRow:
    errors = np.array([t.error for t in trials])
    return BenchmarkRow(
        n_stations=n_stations,
        kind=kind,
        mean_error=float(errors.mean()),
        std_error=float(errors.std()),
        failure_count=int(sum(t.is_local_min_failure for t in trials)),
        trial_count=len(trials),
    )


def basin_sweep(
    scenario: Scenario,
    kind: ObjectiveKind,
    rect: tuple[float, float, float, float],
    resolution: float,
    local_minima: tuple = (),
    lambda_start: float = LIFTED_LAMBDA_START,
    settings: SolverSettings = SolverSettings(),
) -> list[tuple[float, float, str]]:
    """Solve from every grid node; label each node by its convergence target.

    A node is labeled by the nearest of: the ground truth (GlobalMin) or any
    supplied local minimum position (LocalMin), provided the final point lies
    within 0.5 units of it; otherwise Diverged.
    """
    if scenario.dim != 2:
        raise ContractError("basin sweeps are defined for 2-D scenarios")
    xmin, xmax, ymin, ymax = rect
    if resolution <= 0.0 or xmax < xmin or ymax < ymin:
        raise ContractError("rectangle must be non-empty and resolution > 0")
    xs = np.arange(xmin, xmax + 0.5 * resolution, resolution)
    ys = np.arange(ymin, ymax + 0.5 * resolution, resolution)
    targets = [(LABEL_GLOBAL, scenario.ground_truth)] + [
        (LABEL_LOCAL, np.asarray(p, dtype=float)) for p in local_minima
    ]
    nodes: list[tuple[float, float, str]] = []
    for y in ys:
        for x in xs:
            x0 = (
                ParameterVector([x, y], lambda_start)
                if kind.lifted
                else ParameterVector([x, y])
            )
            try:
                final = solve(kind, scenario, x0, settings).final_point.position
            except ContractError:
                nodes.append((float(x), float(y), LABEL_DIVERGED))
                continue
            dists = [float(np.linalg.norm(final - pos)) for _, pos in targets]
            best = int(np.argmin(dists))
            label = targets[best][0] if dists[best] <= FAILURE_THRESHOLD else LABEL_DIVERGED
            nodes.append((float(x), float(y), label))
    return nodes


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def write_trials_csv(path, trials: list[TrialResult]) -> None:
    lines = ["scenario_id,kind,error,failure,iterations,termination"]
    for t in trials:
        lines.append(
            f"{t.scenario_id},{t.kind.value},{_fmt(t.error)},"
            f"{int(t.is_local_min_failure)},{t.iterations},{t.termination.value}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_rows_csv(path, rows: list[BenchmarkRow]) -> None:
    lines = [
        "# std is the population (divide-by-count) standard deviation",
        "n,kind,mean,std,failures,trials",
    ]
    for r in rows:
        lines.append(
            f"{r.n_stations},{r.kind.value},{_fmt(r.mean_error)},"
            f"{_fmt(r.std_error)},{r.failure_count},{r.trial_count}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_trace_csv(path, kind: ObjectiveKind, scenario: Scenario, result: OptimizationResult) -> None:
    """Iterate trace as CSV; the lambda column is empty for unlifted kinds."""
    if result.trace is None:
        raise ContractError("result carries no trace; solve with record_trace=True")
    header = "step,x,y,lambda,value" if scenario.dim == 2 else "step,x,y,z,lambda,value"
    lines = [header]
    for step, p in enumerate(result.trace):
        coords = ",".join(_fmt(c) for c in p.position)
        lam = _fmt(p.lam) if p.lam is not None else ""
        lines.append(f"{step},{coords},{lam},{_fmt(evaluate(kind, scenario, p))}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_basin_csv(path, nodes: list[tuple[float, float, str]]) -> None:
    lines = ["x,y,label"]
    for x, y, label in nodes:
        lines.append(f"{_fmt(x)},{_fmt(y)},{label}")
    Path(path).write_text("\n".join(lines) + "\n")
