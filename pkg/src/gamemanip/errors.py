"""Exception types shared across the package."""


class GameInputError(ValueError):
    """Malformed input: bad labels, out-of-range indices, invalid parameters."""


class UnsupportedStructureError(Exception):
    """The game lacks the equilibrium structure an operation needs.

    ``equilibria`` carries whatever was found (for instance the list of pure
    Nash profiles when a unique one was required).
    """

    def __init__(self, message, equilibria=None):
        super().__init__(message)
        self.equilibria = list(equilibria or [])


class NumericalFailureError(ArithmeticError):
    """A simulation produced a non-finite state."""

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state
