"""Spatial types for lateration problems: station constellations, targets, distances.

Positions are plain float arrays of length 2 or 3 (model units; benchmarks use a
10-unit cube). A Scenario bundles a station constellation with a ground-truth
target and the exact Euclidean distances to it -- the errorless measurement
model used throughout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError


def as_position(coords) -> np.ndarray:
    """Validate and return a finite 2-D or 3-D coordinate vector."""
    p = np.asarray(coords, dtype=float)
    if p.ndim != 1 or p.size not in (2, 3):
        raise ContractError(f"position must be a length-2 or length-3 vector, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ContractError("position entries must be finite")
    return p


@dataclass(frozen=True)
class Constellation:
    """Ordered list of base-station positions, shape (N, dim)."""

    stations: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.stations, dtype=float)
        if s.ndim != 2 or s.shape[1] not in (2, 3) or s.shape[0] < 1:
            raise ContractError(f"stations must have shape (N, 2) or (N, 3) with N >= 1, got {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ContractError("station coordinates must be finite")
        object.__setattr__(self, "stations", s)

    @property
    def n(self) -> int:
        return self.stations.shape[0]

    @property
    def dim(self) -> int:
        return self.stations.shape[1]

    def well_posed(self) -> bool:
        """At least dim + 1 stations, the minimum for unambiguous location."""
        return self.n >= self.dim + 1


@dataclass(frozen=True)
class Scenario:
    """A physical problem instance: stations, true target, exact distances.

    Distances are always derived from the ground truth (errorless model), never
    supplied independently; construct via ``from_ground_truth`` or JSON load.
    """

    constellation: Constellation
    ground_truth: np.ndarray
    distances: np.ndarray = field(compare=False)

    def __post_init__(self):
        g = as_position(self.ground_truth)
        if g.size != self.constellation.dim:
            raise ContractError("ground truth dimension must match station dimension")
        object.__setattr__(self, "ground_truth", g)
        object.__setattr__(self, "distances", np.asarray(self.distances, dtype=float))

    @classmethod
    def from_ground_truth(cls, constellation: Constellation, ground_truth) -> "Scenario":
        d = compute_distances(constellation, as_position(ground_truth))
        return cls(constellation, ground_truth, d)

    @property
    def dim(self) -> int:
        return self.constellation.dim

    @property
    def n(self) -> int:
        return self.constellation.n

    def to_json(self) -> str:
        # Distances are intentionally not serialized; they are recomputed on load
        # so a hand-edited file can never describe an inconsistent scenario.
        return json.dumps(
            {
                "stations": self.constellation.stations.tolist(),
                "ground_truth": self.ground_truth.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        try:
            obj = json.loads(text)
            stations = obj["stations"]
            ground_truth = obj["ground_truth"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ContractError(f"malformed scenario JSON: {exc}") from exc
        return cls.from_ground_truth(Constellation(np.asarray(stations, dtype=float)), ground_truth)


def compute_distances(constellation: Constellation, target) -> np.ndarray:
    """Euclidean distances from the target to every station."""
    t = as_position(target)
    if t.size != constellation.dim:
        raise ContractError(
            f"target dimension {t.size} does not match station dimension {constellation.dim}"
        )
    return np.linalg.norm(constellation.stations - t, axis=1)


def collinearity_singular_values(constellation: Constellation) -> np.ndarray:
    """Normalized singular values of the station covariance matrix, descending.

    The covariance is the biased (divide-by-N) covariance of station coordinates
    about their mean; values are divided by the largest, so the first entry is 1
    whenever the spread is nonzero. Constellations are accepted for benchmarking
    only if every entry exceeds the gate threshold (default 0.1), which screens
    near-collinear geometry.
    """
    if constellation.n < 2:
        raise ContractError("need at least 2 stations to measure collinearity")
    s = constellation.stations
    centered = s - s.mean(axis=0)
    cov = centered.T @ centered / constellation.n
    sv = np.linalg.svd(cov, compute_uv=False)
    top = sv[0]
    if top == 0.0:
        return np.zeros_like(sv)
    return sv / top
