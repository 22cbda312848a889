"""Exception types shared across the package."""


class ContractViolationError(ValueError):
    """An argument failed a documented precondition (e.g. non-Hermitian observable)."""


class DomainError(ValueError):
    """A time or parameter lies outside its valid domain."""


class IntegrationError(RuntimeError):
    """Numerical invariant broken during time stepping.

    Carries the time ``t`` at which the violation was detected.
    """

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (at t={t:g})")
        self.t = t


class DegenerateOutcomeError(RuntimeError):
    """A measurement update produced a numerically degenerate normalization."""


class ConfigError(ValueError):
    """Configuration file problem; ``path`` names the offending key."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
