"""Exception types shared across the package."""


class ContractError(ValueError):
    """An argument violates a documented precondition (shape, sign, consistency)."""


class NonDifferentiableError(ContractError):
    """Derivative requested at a point where the objective has a square-root kink."""


class GenerationError(RuntimeError):
    """Random scenario generation kept failing the geometry gate."""


class PlantedConditionError(ContractError):
    """A planted-local-minimum construction violates one of its existence conditions."""
