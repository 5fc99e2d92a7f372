"""Shared exception types."""


class DimensionMismatchError(ValueError):
    """Operands live on hypercubes of different dimension."""


class TrivialIntersectionViolation(ValueError):
    """Two set families in a chain share a member without being identical."""

    def __init__(self, i: int, j: int, shared) -> None:
        self.i = i
        self.j = j
        self.shared = shared
        super().__init__(
            f"families at positions {i} and {j} share member {shared} "
            "but are not identical"
        )


class BudgetExceededError(RuntimeError):
    """An enumeration would exceed the configured work budget."""

    def __init__(self, required: int, budget: int, what: str = "") -> None:
        self.required = required
        self.budget = budget
        detail = f" ({what})" if what else ""
        super().__init__(
            f"enumeration budget exceeded: {required} elementary evaluations "
            f"required, cap is {budget}{detail}"
        )


class ConfigError(ValueError):
    """An experiment configuration is malformed or inconsistent."""
