"""Self-contained Levenberg-Marquardt solver for the lateration objectives.

The configuration mirrors a widely used reference implementation's defaults:
function tolerance 1e-6, step tolerance 1e-6, first-order optimality 1e-4,
400 iterations, 100 * n_vars function evaluations, initial damping 1e-2.
Steps solve (J'J + mu*diag(J'J)) delta = -J'r (Marquardt's diagonal scaling);
mu shrinks by 10 on accepted steps and grows by 10 on rejections. Problems
here have at most 4 variables, so the normal equations are solved densely.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, NonDifferentiableError
from .geometry import Scenario
from .objectives import ObjectiveKind, ParameterVector, make_residual_jacobian

_MU_CAP = 1e128  # keeps rejected-step damping growth finite


class Termination(enum.Enum):
    FTol = "FTol"
    XTol = "XTol"
    Optimality = "Optimality"
    MaxIter = "MaxIter"
    MaxFeval = "MaxFeval"


@dataclass(frozen=True)
class SolverSettings:
    max_iterations: int = 400
    max_function_evals: int | None = None  # None -> 100 * n_vars at solve time
    f_tol: float = 1e-6
    x_tol: float = 1e-6
    optimality_tol: float = 1e-4
    initial_damping: float = 1e-2

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ContractError("max_iterations must be >= 1")
        if self.max_function_evals is not None and self.max_function_evals < 1:
            raise ContractError("max_function_evals must be >= 1")
        for name in ("f_tol", "x_tol", "optimality_tol", "initial_damping"):
            if getattr(self, name) <= 0.0:
                raise ContractError(f"{name} must be > 0")


@dataclass
class OptimizationResult:
    final_point: ParameterVector
    final_value: float
    iterations: int
    termination: Termination
    trace: list[ParameterVector] | None = None


def solve(
    kind: ObjectiveKind,
    scenario: Scenario,
    x0: ParameterVector,
    settings: SolverSettings = SolverSettings(),
    record_trace: bool = False,
) -> OptimizationResult:
    """Minimize the chosen objective from x0.

    For lifted kinds x0 must carry a nonzero lam: the lam-gradient vanishes
    identically on the lam = 0 slice, so a zero start would leave the lift
    inert and silently optimize the plain objective instead.
    """
    if kind.lifted and (x0.lam is None or x0.lam == 0.0):
        raise ContractError(f"{kind.value} requires a nonzero lam in the initial estimate")
    if not kind.lifted and x0.lam is not None:
        raise ContractError(f"{kind.value} does not take a lam component")
    if x0.position.size != scenario.dim:
        raise ContractError("initial estimate dimension does not match scenario")

    rj = make_residual_jacobian(kind, scenario)
    x = x0.to_array()
    n_vars = x.size
    max_feval = settings.max_function_evals or 100 * n_vars

    r, jac = rj(x)
    f = float(r @ r)
    nfev = 1
    mu = settings.initial_damping
    trace = [ParameterVector.from_array(x, kind.lifted)] if record_trace else None
    termination = None
    iterations = 0

    while True:
        grad = 2.0 * (jac.T @ r)
        if np.max(np.abs(grad)) <= settings.optimality_tol:
            termination = Termination.Optimality
            break
        if iterations >= settings.max_iterations:
            termination = Termination.MaxIter
            break
        if nfev >= max_feval:
            termination = Termination.MaxFeval
            break
        iterations += 1

        a = jac.T @ jac
        step_ok = True
        try:
            delta = np.linalg.solve(a + mu * np.diag(np.diag(a)), -(jac.T @ r))
            if not np.all(np.isfinite(delta)):
                step_ok = False
        except np.linalg.LinAlgError:
            step_ok = False
        if not step_ok:
            mu = min(mu * 10.0, _MU_CAP)
            continue

        x_new = x + delta
        try:
            r_new, jac_new = rj(x_new)
        except NonDifferentiableError:
            # Trial point landed exactly on a station; treat as a rejected step.
            mu = min(mu * 10.0, _MU_CAP)
            continue
        f_new = float(r_new @ r_new)
        nfev += 1

        if not np.isfinite(f_new) or f_new >= f:
            mu = min(mu * 10.0, _MU_CAP)
            continue

        decrease = f - f_new
        step_norm = float(np.linalg.norm(delta))
        x_norm = float(np.linalg.norm(x))
        x, r, jac, f = x_new, r_new, jac_new, f_new
        mu /= 10.0
        if trace is not None:
            trace.append(ParameterVector.from_array(x, kind.lifted))

        if decrease <= settings.f_tol * (1.0 + f + decrease):
            termination = Termination.FTol
            break
        if step_norm <= settings.x_tol * (1.0 + x_norm):
            termination = Termination.XTol
            break

    return OptimizationResult(
        final_point=ParameterVector.from_array(x, kind.lifted),
        final_value=f,
        iterations=iterations,
        termination=termination,
        trace=trace,
    )
