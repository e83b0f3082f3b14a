"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented precondition (bad shape, parameter out of range)."""


class UnsupportedChannelError(ValidationError):
    """Single-mode channel outside the classes the standard-form reduction covers (det K <= 0)."""


class NumericalCheckError(RuntimeError):
    """An internal consistency check failed beyond its tolerance."""


class ScenarioError(ValidationError):
    """Scenario text failed to parse or validate.

    Carries a list of (line, column, message) tuples; both indices are 1-based.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        lines = [f"line {ln}, col {col}: {msg}" for ln, col, msg in self.problems]
        super().__init__("scenario errors:\n  " + "\n  ".join(lines))
