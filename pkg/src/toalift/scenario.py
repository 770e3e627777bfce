"""Benchmark scenario generation.

Two sources of problems: seeded uniform sampling inside a cube (the Monte
Carlo campaigns), and a deterministic construction that plants a known local
minimum of the square objective at the origin with the global minimum at
(x_g, 0). The planted construction mixes two station families: stations at
the origin itself, and stations on the line x = x_g / 2 with free y offsets,
whose mismatch terms vanish identically at the origin.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, GenerationError, PlantedConditionError
from .geometry import Constellation, Scenario, collinearity_singular_values
from .objectives import ObjectiveKind, ParameterVector, gradient, hessian

_MAX_REJECTIONS = 10_000
_MIN_STATION_GAP = 1e-6  # keeps root-family derivatives defined along solver paths
_LIFTED_LAMBDA_START = 1.0


@dataclass(frozen=True)
class GeneratorConfig:
    dim: int
    n_stations: int
    cube_side: float = 10.0
    min_normalized_sv: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ContractError("dim must be 2 or 3")
        if self.n_stations < self.dim + 1:
            raise ContractError("need at least dim + 1 stations for well-posed location")
        if self.cube_side <= 0.0:
            raise ContractError("cube_side must be > 0")
        if not 0.0 <= self.min_normalized_sv < 1.0:
            raise ContractError("min_normalized_sv must lie in [0, 1)")

    @classmethod
    def from_json(cls, text: str) -> "GeneratorConfig":
        try:
            obj = json.loads(text)
            return cls(**obj)
        except (json.JSONDecodeError, TypeError) as exc:
            raise ContractError(f"malformed generator config: {exc}") from exc


@dataclass(frozen=True)
class PlantedExampleConfig:
    """Construction data for a planted local minimum at the origin.

    s1 stations sit at the origin, s2 stations at (x_g / 2, b_i). The checks
    on construction are the existence conditions for a strict local minimum:
    the first-derivative balance 3*sum(a) > N*x_g, the family-count condition
    s2 / 2 > s1, the y-curvature condition 2*sum(b^2) > s1*x_g^2, and (beyond
    the family conditions, which only control the diagonal) positive
    definiteness of the full position Hessian at the origin.
    """

    x_g: float
    s1: int
    s2: int
    b_values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "b_values", tuple(float(b) for b in self.b_values))
        if self.x_g <= 0.0:
            raise ContractError("x_g must be > 0")
        if self.s1 < 1:
            raise ContractError("s1 must be >= 1; without an origin station the planted point is a second global minimum, not a local one")
        if self.s2 < 1:
            raise ContractError("s2 must be >= 1")
        if len(self.b_values) != self.s2:
            raise ContractError("b_values must have exactly s2 entries")

    @classmethod
    def from_json(cls, text: str) -> "PlantedExampleConfig":
        try:
            obj = json.loads(text)
            return cls(obj["x_g"], obj["s1"], obj["s2"], tuple(obj["b_values"]))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ContractError(f"malformed planted-example config: {exc}") from exc


def random_scenario(config: GeneratorConfig, rng: np.random.Generator | None = None) -> Scenario:
    """Draw stations and ground truth uniformly in the cube, gated on geometry.

    Constellations whose station covariance has any normalized singular value
    at or below the threshold are rejected and redrawn, as are ground-truth
    draws that land within 1e-6 of a station. PCG64 seeding makes the draw a
    pure function of the seed.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    side = config.cube_side
    rejections = 0
    while True:
        stations = rng.uniform(0.0, side, size=(config.n_stations, config.dim))
        constellation = Constellation(stations)
        if np.any(collinearity_singular_values(constellation) <= config.min_normalized_sv):
            rejections += 1
            if rejections >= _MAX_REJECTIONS:
                raise GenerationError(
                    f"{rejections} consecutive rejections; the geometry gate is unsatisfiable for this config"
                )
            continue
        truth = rng.uniform(0.0, side, size=config.dim)
        if np.min(np.linalg.norm(stations - truth, axis=1)) < _MIN_STATION_GAP:
            rejections += 1
            if rejections >= _MAX_REJECTIONS:
                raise GenerationError(
                    f"{rejections} consecutive rejections; could not place the target away from stations"
                )
            continue
        return Scenario.from_ground_truth(constellation, truth)


def random_initial(
    config: GeneratorConfig, rng: np.random.Generator, kind: ObjectiveKind | None = None
) -> ParameterVector:
    """Uniform-in-cube initial estimate; lifted kinds start at lam = 1."""
    pos = rng.uniform(0.0, config.cube_side, size=config.dim)
    if kind is not None and kind.lifted:
        return ParameterVector(pos, _LIFTED_LAMBDA_START)
    return ParameterVector(pos)


def planted_example(config: PlantedExampleConfig) -> Scenario:
    """Build the 2-D scenario with a guaranteed local minimum at the origin."""
    n = config.s1 + config.s2
    stations = np.zeros((n, 2))
    stations[config.s1 :, 0] = 0.5 * config.x_g
    stations[config.s1 :, 1] = config.b_values
    scenario = Scenario.from_ground_truth(Constellation(stations), [config.x_g, 0.0])

    sum_a = stations[:, 0].sum()
    if not 3.0 * sum_a > n * config.x_g:
        raise PlantedConditionError(
            f"first-derivative balance violated: 3*sum(a) = {3 * sum_a} must exceed N*x_g = {n * config.x_g}"
        )
    if not 0.5 * config.s2 > config.s1:
        raise PlantedConditionError(
            f"family-count condition violated: s2/2 = {0.5 * config.s2} must exceed s1 = {config.s1}"
        )
    sum_b_sq = sum(b * b for b in config.b_values)
    if not 2.0 * sum_b_sq > config.x_g**2 * config.s1:
        raise PlantedConditionError(
            f"y-curvature condition violated: 2*sum(b^2) = {2 * sum_b_sq} must exceed s1*x_g^2 = {config.s1 * config.x_g ** 2}"
        )
    # The family conditions control only the Hessian diagonal; large mixed
    # b-offsets can still break definiteness through the xy cross term.
    origin = ParameterVector(np.zeros(2))
    h = hessian(ObjectiveKind.F2, scenario, origin)
    if np.linalg.eigvalsh(h)[0] <= 0.0:
        raise PlantedConditionError(
            "cross-term condition violated: the position Hessian at the origin is not positive definite"
        )
    g = gradient(ObjectiveKind.F2, scenario, origin)
    if np.max(np.abs(g)) > 1e-9 * (1.0 + config.x_g**2):
        raise PlantedConditionError("construction failed to zero the gradient at the origin")
    return scenario


def worked_example() -> tuple[Scenario, ParameterVector]:
    """The standard 2-D illustration: four stations, truth (1, 0), start (-1, 2).

    The square objective converges from this start to the planted local
    minimum at the origin; its lifted variant (started at lam = 1) escapes to
    the truth.
    """
    scenario = planted_example(PlantedExampleConfig(x_g=1.0, s1=1, s2=3, b_values=(-2.0, 1.0, 3.0)))
    return scenario, ParameterVector([-1.0, 2.0])
