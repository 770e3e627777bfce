"""Stationary-point classification and verification engines.

This is where the lifting story is checked against actual geometry: local
minima of the plain objectives are located by multi-start solves, classified
through Hessian spectra, moved into a canonical frame (local minimum at the
origin, global minimum on the positive x axis), and tested against the
inequalities that make the lifted objective's lam-curvature negative there.
The spread matrix of a constellation certifies that the lifted objective has
no spurious stationary points off the lam = 0 slice.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .geometry import Constellation, Scenario, as_position
from .objectives import ObjectiveKind, ParameterVector, evaluate, gradient, hessian
from .optimizer import SolverSettings, solve


class Classification(enum.Enum):
    Minimum = "Minimum"
    Saddle = "Saddle"
    Maximum = "Maximum"
    Degenerate = "Degenerate"
    NotStationary = "NotStationary"


@dataclass(frozen=True)
class StationaryReport:
    point: ParameterVector
    gradient_norm: float
    hessian_eigenvalues: np.ndarray  # ascending
    classification: Classification

    def to_json(self) -> str:
        return json.dumps(
            {
                "point": {
                    "position": self.point.position.tolist(),
                    "lam": self.point.lam,
                },
                "gradient_norm": self.gradient_norm,
                "hessian_eigenvalues": self.hessian_eigenvalues.tolist(),
                "classification": self.classification.value,
            }
        )


@dataclass(frozen=True)
class SpreadMatrix:
    """Sum of outer products of station offsets from their centroid."""

    m: np.ndarray
    eigenvalues: np.ndarray  # ascending

    def positive_definite(self, tol: float = 0.0) -> bool:
        return bool(self.eigenvalues[0] > tol)


@dataclass(frozen=True)
class SaddleInequalities:
    """Canonical-frame sums and the two strict inequalities implied by a local minimum.

    ``holds_linear`` is 2*sum(a_i) < N*x_g and ``holds_quadratic`` is
    4*sum(a_i^2) < N*x_g^2, with a_i the station x coordinates in the
    canonical frame. Both follow from stationarity plus the strict objective
    gap, and together they force negative lam-curvature of the lifted square
    objective at the local minimum.
    """

    sum_a: float
    sum_a_sq: float
    n: int
    x_g: float
    holds_linear: bool
    holds_quadratic: bool


def classify(
    kind: ObjectiveKind,
    scenario: Scenario,
    p: ParameterVector,
    grad_tol: float | None = None,
    curv_tol: float = 1e-8,
) -> StationaryReport:
    """Classify p by gradient norm and Hessian eigenvalue signs.

    grad_tol defaults to 1e-6 * (1 + objective value), keeping the
    stationarity test scale-aware across the benchmark cube. Eigenvalues
    within curv_tol of zero make the point Degenerate rather than forcing a
    Minimum/Saddle call.
    """
    g = gradient(kind, scenario, p)
    h = hessian(kind, scenario, p)
    gnorm = float(np.linalg.norm(g))
    eigs = np.linalg.eigvalsh(h)
    if grad_tol is None:
        grad_tol = 1e-6 * (1.0 + evaluate(kind, scenario, p))
    if gnorm > grad_tol:
        cls = Classification.NotStationary
    elif eigs[0] > curv_tol:
        cls = Classification.Minimum
    elif eigs[-1] < -curv_tol:
        cls = Classification.Maximum
    elif eigs[0] < -curv_tol and eigs[-1] > curv_tol:
        cls = Classification.Saddle
    else:
        cls = Classification.Degenerate
    return StationaryReport(p, gnorm, eigs, cls)


def _rotation_to_x_axis(u: np.ndarray) -> np.ndarray:
    """Proper rotation R with R @ u = e_x for a unit vector u."""
    if u.size == 2:
        c, s = u
        return np.array([[c, s], [-s, c]])
    # 3-D: complete u to a right-handed orthonormal basis.
    e = np.zeros(3)
    e[np.argmin(np.abs(u))] = 1.0
    v = e - (e @ u) * u
    v /= np.linalg.norm(v)
    w = np.cross(u, v)
    return np.vstack([u, v, w])


def canonical_frame(scenario: Scenario, local_min) -> tuple[Scenario, float]:
    """Rigid motion placing local_min at the origin and the truth at (x_g, 0[, 0]).

    Returns the transformed scenario and x_g > 0. Distances are invariant
    under the motion (recomputed exactly from the transformed geometry).
    """
    lmin = as_position(local_min)
    if lmin.size != scenario.dim:
        raise ContractError("local minimum dimension does not match scenario")
    gap = scenario.ground_truth - lmin
    x_g = float(np.linalg.norm(gap))
    if x_g == 0.0:
        raise ContractError("local minimum coincides with the ground truth; no frame exists")
    rot = _rotation_to_x_axis(gap / x_g)
    stations = (scenario.constellation.stations - lmin) @ rot.T
    truth = np.zeros(scenario.dim)
    truth[0] = x_g
    return Scenario.from_ground_truth(Constellation(stations), truth), x_g


def saddle_inequalities(canonical: Scenario, axis_tol: float = 1e-9) -> SaddleInequalities:
    """Evaluate both canonical-frame inequalities; expects canonical_frame output."""
    truth = canonical.ground_truth
    x_g = float(truth[0])
    if x_g <= 0.0 or np.any(np.abs(truth[1:]) > axis_tol * (1.0 + x_g)):
        raise ContractError("scenario is not in canonical form (truth must sit on the positive x axis)")
    a = canonical.constellation.stations[:, 0]
    n = canonical.n
    sum_a = float(a.sum())
    sum_a_sq = float((a * a).sum())
    return SaddleInequalities(
        sum_a=sum_a,
        sum_a_sq=sum_a_sq,
        n=n,
        x_g=x_g,
        holds_linear=2.0 * sum_a < n * x_g,
        holds_quadratic=4.0 * sum_a_sq < n * x_g * x_g,
    )


def spread_matrix(constellation: Constellation) -> SpreadMatrix:
    centered = constellation.stations - constellation.stations.mean(axis=0)
    m = centered.T @ centered
    return SpreadMatrix(m=m, eigenvalues=np.linalg.eigvalsh(m))


def lifted_gradient_identity_check(
    scenario: Scenario, p: ParameterVector, constraint_tol: float = 1e-8
) -> float:
    """Max-norm gap between the lifted position gradient and 2*M*(pos - truth).

    Valid only on the constraint surface where the lam-gradient vanishes with
    lam != 0, i.e. sum over stations of (|pos - a_i|^2 + lam^2 - d_i^2) = 0.
    A near-zero return certifies the algebra that rules out new stationary
    points off the lam = 0 slice.
    """
    if p.lam is None or p.lam == 0.0:
        raise ContractError("a nonzero lam component is required")
    diff = p.position - scenario.constellation.stations
    q = np.einsum("ij,ij->i", diff, diff) + p.lam**2 - scenario.distances**2
    if abs(q.sum()) > constraint_tol * (1.0 + np.abs(q).sum()):
        raise ContractError("point does not satisfy the vanishing lam-gradient constraint")
    grad_pos = gradient(ObjectiveKind.FL2, scenario, p)[:-1]
    m = spread_matrix(scenario.constellation).m
    predicted = 2.0 * m @ (p.position - scenario.ground_truth)
    return float(np.max(np.abs(grad_pos - predicted)))


def _newton_polish(kind: ObjectiveKind, scenario: Scenario, pos: np.ndarray, iters: int = 8) -> np.ndarray:
    """Drive the gradient of an unlifted objective to machine level near a minimum."""
    x = pos.copy()
    for _ in range(iters):
        try:
            g = gradient(kind, scenario, ParameterVector(x))
            h = hessian(kind, scenario, ParameterVector(x))
            step = np.linalg.solve(h, -g)
        except (np.linalg.LinAlgError, ContractError):
            break
        if not np.all(np.isfinite(step)) or np.linalg.norm(step) > 0.5:
            break  # polish must stay local; a wild step means the basin is not quadratic here
        x = x + step
        if np.linalg.norm(step) < 1e-12 * (1.0 + np.linalg.norm(x)):
            break
    return x


def find_local_minima(
    kind: ObjectiveKind,
    scenario: Scenario,
    rng: np.random.Generator,
    n_starts: int = 100,
    bounds: tuple[float, float] | None = None,
    settings: SolverSettings = SolverSettings(),
    error_threshold: float = 0.5,
    curv_tol: float = 1e-8,
) -> list[np.ndarray]:
    """Locate non-global local minima of an unlifted objective by multi-start.

    Solver finals farther than error_threshold from the truth are Newton
    polished and kept only if they verify as genuine minima (near-zero
    gradient, positive-definite Hessian). Duplicates within 1e-6 collapse.
    """
    if kind.lifted:
        raise ContractError("multi-start discovery operates on the unlifted objectives")
    if bounds is None:
        pts = np.vstack([scenario.constellation.stations, scenario.ground_truth])
        span = pts.max() - pts.min()
        bounds = (float(pts.min() - 0.1 * span), float(pts.max() + 0.1 * span))
    lo, hi = bounds
    found: list[np.ndarray] = []
    for _ in range(n_starts):
        x0 = ParameterVector(rng.uniform(lo, hi, size=scenario.dim))
        try:
            result = solve(kind, scenario, x0, settings)
        except ContractError:
            continue
        pos = result.final_point.position
        if np.linalg.norm(pos - scenario.ground_truth) <= error_threshold:
            continue
        try:
            pos = _newton_polish(kind, scenario, pos)
            rep = classify(kind, scenario, ParameterVector(pos), curv_tol=curv_tol)
        except ContractError:
            continue
        if rep.classification is not Classification.Minimum:
            continue
        if np.linalg.norm(pos - scenario.ground_truth) <= error_threshold:
            continue
        if any(np.linalg.norm(pos - prev) < 1e-6 for prev in found):
            continue
        found.append(pos)
    return found
