"""Custom exceptions for the zero-free region engine."""


class ZeroFreeError(Exception):
    """Base exception for zerofree errors."""
    pass


class PolynomialFormatError(ZeroFreeError):
    """Raised when a polynomial file can't be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MembershipError(ZeroFreeError):
    """Raised when a polynomial is required to lie in P_n but does not."""
    pass


class DomainError(ZeroFreeError, ValueError):
    """Raised when an argument lies outside a function's domain."""
    pass


class RetryCapError(ZeroFreeError):
    """Raised when random_member gives up drawing factors."""

    def __init__(self, degree: int, bound: float, attempts: int):
        self.degree = degree
        self.bound = bound
        self.attempts = attempts
        super().__init__(
            f"No member of P_{degree} found after {attempts} draws with B={bound}; "
            f"membership is improbable at this degree and bound"
        )


class ZeroTableError(ZeroFreeError):
    """Raised when a zeros file is invalid."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyZeroTableError(ZeroTableError):
    """Raised when a zeros file holds no ordinates."""
    pass


class NonNumericZeroError(ZeroTableError):
    """Raised when a zeros file line is not a number."""
    pass


class NonMonotoneZeroError(ZeroTableError):
    """Raised when ordinates are not strictly increasing."""
    pass


class CoverageError(ZeroFreeError):
    """Raised when a zero-sum bound needs zeros the table doesn't cover."""
    pass


class QuadratureError(ZeroFreeError):
    """Raised when adaptive integration hits its subdivision limit."""

    def __init__(self, message: str, partial: float | None = None):
        self.partial = partial
        super().__init__(message)


class BracketError(ZeroFreeError):
    """Raised when a root bracket has no sign change."""
    pass


class ConstraintError(ZeroFreeError):
    """Raised when kappa/delta violate an admissibility inequality."""

    def __init__(self, message: str, inequality: str):
        self.inequality = inequality
        super().__init__(f"{message} [{inequality}]")


class ConvergenceError(ZeroFreeError):
    """Raised when the R0 iteration does not settle."""

    def __init__(self, message: str, trace: list | None = None):
        self.trace = trace or []
        super().__init__(message)


class FitError(ZeroFreeError):
    """Raised when a sweep fit is impossible."""
    pass


class PresetError(ZeroFreeError):
    """Raised when the presets file is invalid."""
    pass


class ConfigError(ZeroFreeError):
    """Raised when run flags are inconsistent."""
    pass


class GoldenMismatchError(ZeroFreeError):
    """Raised when reproduced values drift from golden values."""
    pass


class WindowError(ZeroFreeError):
    """Raised when an inner step breaks r < R0 < R."""

    def __init__(self, r: float, R0: float, R: float, step: int):
        self.r = r
        self.R0 = R0
        self.R = R
        self.step = step
        super().__init__(f"r < R0 < R fails at inner step {step}: r={r}, R0={R0}, R={R}")
