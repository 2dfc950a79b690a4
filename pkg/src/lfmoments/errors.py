"""Exception types shared across the package."""


class CapabilityError(RuntimeError):
    """A computation needs more data (coefficients, support, depth) than is available.

    ``required`` carries the depth or size that would make the request feasible,
    when it is known.
    """

    def __init__(self, message: str, required: int | None = None):
        super().__init__(message)
        self.required = required


class QuadratureError(RuntimeError):
    """Contour quadrature failed its step-halving self-consistency check."""
