class SolverError(RuntimeError):
    pass


class PositivityError(SolverError):
    """A density value became non-positive."""

    def __init__(self, message, index=None, t=None):
        super().__init__(message)
        self.index = index
        self.t = t


class BlowUpError(SolverError):
    """Raised when the state leaves the admissible range (|M| too large or non-finite)."""

    def __init__(self, event, state=None):
        super().__init__(
            f"blow-up at t={event.time:.6g}, cell {event.cell_index}, "
            f"max|M|={event.max_abs_M:.4g}"
        )
        self.event = event
        self.state = state
