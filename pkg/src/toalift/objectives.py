"""The four lateration objectives and their analytic derivatives.

Two families, each in a plain and a lifted variant:

* square family (F2, FL2): each term squares the *squared*-distance mismatch
  ``(|p - a_i|^2 + lam^2 - d_i^2)``;
* root family (F1, FL1): each term squares the distance mismatch
  ``(sqrt(|p - a_i|^2 + lam^2) - d_i)``.

The lifted variants add an extra search variable ``lam`` whose square is
inserted under the bracket; restricted to ``lam = 0`` they coincide exactly
with the plain objectives. All four carry a global 1/4 prefactor, realized as
residuals ``r_i = bracket_i / 2`` so that the objective is a plain sum of
squared residuals and standard least-squares machinery applies.

The root family has a kink where an iterate coincides with a station at
``lam = 0``: values are defined there, derivatives raise.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, NonDifferentiableError
from .geometry import Scenario, as_position


class ObjectiveKind(enum.Enum):
    F1 = "F1"
    F2 = "F2"
    FL1 = "FL1"
    FL2 = "FL2"

    @property
    def lifted(self) -> bool:
        return self in (ObjectiveKind.FL1, ObjectiveKind.FL2)

    @property
    def square_family(self) -> bool:
        """True for the squared-distance residual family (F2/FL2)."""
        return self in (ObjectiveKind.F2, ObjectiveKind.FL2)

    @property
    def base(self) -> "ObjectiveKind":
        """The unlifted objective this kind reduces to at lam = 0."""
        if self is ObjectiveKind.FL1:
            return ObjectiveKind.F1
        if self is ObjectiveKind.FL2:
            return ObjectiveKind.F2
        return self


@dataclass(frozen=True)
class ParameterVector:
    """Search state: a position plus, for lifted objectives only, lam."""

    position: np.ndarray
    lam: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "position", as_position(self.position))
        if self.lam is not None:
            lam = float(self.lam)
            if not np.isfinite(lam):
                raise ContractError("lam must be finite")
            object.__setattr__(self, "lam", lam)

    @property
    def n_vars(self) -> int:
        return self.position.size + (1 if self.lam is not None else 0)

    def to_array(self) -> np.ndarray:
        if self.lam is None:
            return self.position.copy()
        return np.append(self.position, self.lam)

    @classmethod
    def from_array(cls, x: np.ndarray, lifted: bool) -> "ParameterVector":
        x = np.asarray(x, dtype=float)
        if lifted:
            return cls(x[:-1], x[-1])
        return cls(x, None)


@dataclass(frozen=True)
class EvalReport:
    """Value, gradient and Hessian of one objective at one point."""

    value: float
    gradient: np.ndarray
    hessian: np.ndarray


def check_consistent(kind: ObjectiveKind, p: ParameterVector) -> None:
    if kind.lifted and p.lam is None:
        raise ContractError(f"{kind.value} requires a lam component in the parameter vector")
    if not kind.lifted and p.lam is not None:
        raise ContractError(f"{kind.value} does not take a lam component")


def _unpack(kind: ObjectiveKind, scenario: Scenario, p: ParameterVector):
    check_consistent(kind, p)
    if p.position.size != scenario.dim:
        raise ContractError("parameter dimension does not match scenario dimension")
    lam = p.lam if kind.lifted else 0.0
    return p.position, lam


def residuals(kind: ObjectiveKind, scenario: Scenario, p: ParameterVector) -> np.ndarray:
    """Residual vector r with sum(r**2) equal to the objective value."""
    pos, lam = _unpack(kind, scenario, p)
    diff = pos - scenario.constellation.stations
    s = np.einsum("ij,ij->i", diff, diff) + lam * lam
    if kind.square_family:
        return 0.5 * (s - scenario.distances**2)
    return 0.5 * (np.sqrt(s) - scenario.distances)


def evaluate(kind: ObjectiveKind, scenario: Scenario, p: ParameterVector) -> float:
    r = residuals(kind, scenario, p)
    return float(r @ r)


def _root_terms(kind, scenario, pos, lam):
    """Common pieces for root-family derivatives; raises at the kink."""
    diff = pos - scenario.constellation.stations
    s = np.einsum("ij,ij->i", diff, diff) + lam * lam
    if np.any(s == 0.0):
        raise NonDifferentiableError(
            f"{kind.value} derivatives are undefined exactly at a station position with lam = 0"
        )
    g = np.sqrt(s)
    return diff, g, g - scenario.distances


def gradient(kind: ObjectiveKind, scenario: Scenario, p: ParameterVector) -> np.ndarray:
    """Analytic gradient of ``evaluate`` with respect to the packed parameters."""
    pos, lam = _unpack(kind, scenario, p)
    if kind.square_family:
        diff = pos - scenario.constellation.stations
        q = np.einsum("ij,ij->i", diff, diff) + lam * lam - scenario.distances**2
        grad_pos = q @ diff
        if not kind.lifted:
            return grad_pos
        return np.append(grad_pos, lam * q.sum())
    diff, g, u = _root_terms(kind, scenario, pos, lam)
    w = u / g
    grad_pos = 0.5 * (w @ diff)
    if not kind.lifted:
        return grad_pos
    return np.append(grad_pos, 0.5 * lam * w.sum())


def hessian(kind: ObjectiveKind, scenario: Scenario, p: ParameterVector) -> np.ndarray:
    """Analytic Hessian of ``evaluate``; symmetric by construction."""
    pos, lam = _unpack(kind, scenario, p)
    dim = pos.size
    n = scenario.n
    if kind.square_family:
        diff = pos - scenario.constellation.stations
        q = np.einsum("ij,ij->i", diff, diff) + lam * lam - scenario.distances**2
        h_pos = 2.0 * diff.T @ diff + q.sum() * np.eye(dim)
        if not kind.lifted:
            return h_pos
        h = np.zeros((dim + 1, dim + 1))
        h[:dim, :dim] = h_pos
        h[:dim, dim] = h[dim, :dim] = 2.0 * lam * diff.sum(axis=0)
        h[dim, dim] = q.sum() + 2.0 * n * lam * lam
        return h
    diff, g, u = _root_terms(kind, scenario, pos, lam)
    # Per-term Hessian of (g_i - d_i)^2 / 4: outer(t, t) * d_i / g_i^3 / 2 + I * u_i / g_i / 2
    # with t the full derivative direction (diff row, then lam).
    w_outer = scenario.distances / g**3
    w_diag = u / g
    h_pos = 0.5 * (diff.T @ (diff * w_outer[:, None]) + w_diag.sum() * np.eye(dim))
    if not kind.lifted:
        return h_pos
    h = np.zeros((dim + 1, dim + 1))
    h[:dim, :dim] = h_pos
    h[:dim, dim] = h[dim, :dim] = 0.5 * lam * (w_outer @ diff)
    h[dim, dim] = 0.5 * (lam * lam * w_outer.sum() + w_diag.sum())
    return h


def report(kind: ObjectiveKind, scenario: Scenario, p: ParameterVector) -> EvalReport:
    return EvalReport(
        value=evaluate(kind, scenario, p),
        gradient=gradient(kind, scenario, p),
        hessian=hessian(kind, scenario, p),
    )


def lambda_quartic_at(scenario: Scenario, p: ParameterVector) -> tuple[float, float, float]:
    """Second, third and fourth lam-derivatives of the lifted square objective.

    These are exact polynomials in lam: with rho_i the squared-distance
    mismatch of the position part, they are (sum(rho) + 3*N*lam^2, 6*N*lam,
    6*N). The fourth derivative is the constant 6*N, which is why lifting
    leaves the global minimum a minimum even though its lam-curvature is zero.
    """
    if p.lam is None:
        raise ContractError("lam component required")
    diff = p.position - scenario.constellation.stations
    rho = np.einsum("ij,ij->i", diff, diff) - scenario.distances**2
    n = scenario.n
    lam = p.lam
    return (float(rho.sum() + 3.0 * n * lam * lam), 6.0 * n * lam, 6.0 * n)


def make_residual_jacobian(kind: ObjectiveKind, scenario: Scenario):
    """Return f(x_packed) -> (r, J) for the solver's inner loop.

    The packed layout is position coordinates first, lam last (lifted kinds
    only). J rows follow the residual convention above, so J.T @ r is half the
    objective gradient.
    """
    stations = scenario.constellation.stations
    d = scenario.distances
    d2 = d * d
    lifted = kind.lifted
    if kind.square_family:

        def rj(x):
            pos, lam = (x[:-1], x[-1]) if lifted else (x, 0.0)
            diff = pos - stations
            q = np.einsum("ij,ij->i", diff, diff) + lam * lam - d2
            r = 0.5 * q
            if lifted:
                jac = np.hstack([diff, np.full((len(d), 1), lam)])
            else:
                jac = diff
            return r, jac

    else:

        def rj(x):
            pos, lam = (x[:-1], x[-1]) if lifted else (x, 0.0)
            diff = pos - stations
            s = np.einsum("ij,ij->i", diff, diff) + lam * lam
            if np.any(s == 0.0):
                raise NonDifferentiableError(
                    f"{kind.value} derivatives are undefined exactly at a station position with lam = 0"
                )
            g = np.sqrt(s)
            r = 0.5 * (g - d)
            scale = 0.5 / g
            if lifted:
                jac = np.hstack([diff, np.full((len(d), 1), lam)]) * scale[:, None]
            else:
                jac = diff * scale[:, None]
            return r, jac

    return rj


def fd_gradient(kind: ObjectiveKind, scenario: Scenario, p: ParameterVector, step_scale: float = 1e-6) -> np.ndarray:
    """Central-difference gradient oracle, step 1e-6*(1+|p_k|) per coordinate."""
    x0 = p.to_array()
    out = np.empty_like(x0)
    for k in range(x0.size):
        h = step_scale * (1.0 + abs(x0[k]))
        xp, xm = x0.copy(), x0.copy()
        xp[k] += h
        xm[k] -= h
        fp = evaluate(kind, scenario, ParameterVector.from_array(xp, kind.lifted))
        fm = evaluate(kind, scenario, ParameterVector.from_array(xm, kind.lifted))
        out[k] = (fp - fm) / (2.0 * h)
    return out


def fd_hessian(kind: ObjectiveKind, scenario: Scenario, p: ParameterVector, step_scale: float = 1e-6) -> np.ndarray:
    """Central differences of the analytic gradient; the Hessian oracle."""
    x0 = p.to_array()
    n = x0.size
    out = np.empty((n, n))
    for k in range(n):
        h = step_scale * (1.0 + abs(x0[k]))
        xp, xm = x0.copy(), x0.copy()
        xp[k] += h
        xm[k] -= h
        gp = gradient(kind, scenario, ParameterVector.from_array(xp, kind.lifted))
        gm = gradient(kind, scenario, ParameterVector.from_array(xm, kind.lifted))
        out[k] = (gp - gm) / (2.0 * h)
    return 0.5 * (out + out.T)
