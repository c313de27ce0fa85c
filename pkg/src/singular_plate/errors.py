"""Exception hierarchy. CLI exit codes are attached to the classes."""


class SingularPlateError(Exception):
    exit_code = 1


class DomainError(SingularPlateError, ValueError):
    """Point outside the closed domain, or a domain used where it is unsupported."""


class GridTooCoarseError(SingularPlateError, ValueError):
    pass


class SingularityError(SingularPlateError, ValueError):
    """Kernel evaluated on the diagonal x = y."""


class AccuracyError(SingularPlateError, ArithmeticError):
    """A quadrature or difference scheme did not reach its stated accuracy."""


class ResolutionError(AccuracyError):
    pass


class HopfViolationError(SingularPlateError, ArithmeticError):
    """phi_1 / delta degenerates near the boundary."""


class SignIndefiniteError(SingularPlateError, ArithmeticError):
    pass


class KernelPositivityError(SingularPlateError, ArithmeticError):
    pass


class ConvergenceError(SingularPlateError, RuntimeError):
    exit_code = 2

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])


class BracketViolationError(SingularPlateError, RuntimeError):
    exit_code = 3


class ResourceError(SingularPlateError, MemoryError):
    exit_code = 4


class VerificationError(SingularPlateError, AssertionError):
    exit_code = 5
