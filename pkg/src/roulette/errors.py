"""Exception hierarchy shared by every module of the package."""


class SelectionError(Exception):
    """Base class for all errors raised by :mod:`roulette`."""


class EmptyPopulation(SelectionError, ValueError):
    pass


class InvalidWeight(SelectionError, ValueError):
    pass


class AllZero(SelectionError):
    """Raised when a selection is requested but no weight is positive."""


class IndexOutOfRange(SelectionError, IndexError):
    pass


class StaleEngine(SelectionError):
    """The weight table changed after the engine captured its snapshot."""


class AttemptCapExceeded(SelectionError):
    def __init__(self, cap):
        super().__init__(f"no proposal accepted after {cap} attempts")
        self.cap = cap


class InvalidBound(SelectionError, ValueError):
    pass


class Exhausted(SelectionError):
    """Every positive-weight individual has already been drawn."""


class InsufficientDraws(SelectionError, ValueError):
    pass


class InvalidDof(SelectionError, ValueError):
    pass


class InvalidSpec(SelectionError, ValueError):
    pass


class InvalidParameters(SelectionError, ValueError):
    pass


class BenchError(SelectionError):
    """An engine failed inside the benchmark harness."""
