"""Exception types shared across the package."""


class InvalidConfigError(ValueError):
    """A configuration value violates a precondition."""


class DegenerateSignalError(ValueError):
    """A signal is unusable for the requested operation (e.g. all zero)."""


class InvalidSchemeError(ValueError):
    """A coefficient grouping scheme violates its structural constraints."""


class DivergenceError(RuntimeError):
    """Training error grew far past its initial level.

    Carries the per-iteration error history so the blow-up can be inspected.
    """

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []
