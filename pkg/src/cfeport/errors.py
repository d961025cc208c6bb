"""Exception types shared across the package."""


class InfeasibleError(RuntimeError):
    """A target cannot be met even when procuring every asset at its upper bound.

    Carries the best attainable constraint value so callers can report how far
    out of reach the request was.
    """

    def __init__(self, message, max_attainable=None, load=None):
        super().__init__(message)
        self.max_attainable = max_attainable
        self.load = load


class LineSearchError(RuntimeError):
    """No acceptable step length exists along the current search direction."""
