"""Exceptions raised by the solver."""


class NonPhysicalState(Exception):
    """Raised when a state loses positivity of density, pressure, or
    internal energy.  Signals solver blow-up; the current run should abort."""


class NoConvergence(Exception):
    """Raised when the pressure solve fails to reach its residual target.

    Usually means the time step is too large for the assembled system, or the
    system itself is broken.
    """

    def __init__(self, iterations: int, residual: float, message: str = ""):
        self.iterations = iterations
        self.residual = residual
        text = f"no convergence after {iterations} iterations (residual {residual:.3e})"
        if message:
            text = f"{text}: {message}"
        super().__init__(text)
