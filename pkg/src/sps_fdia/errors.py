"""Exception types raised across the package."""


class SpsError(Exception):
    """Base class for all package errors."""


class DimensionError(SpsError, ValueError):
    pass


class OverlappingAttacks(SpsError, ValueError):
    pass


class DegenerateEigenvalue(SpsError, ZeroDivisionError):
    pass


class UnstableAmplification(SpsError, ValueError):
    pass


class NonpositiveVdc(SpsError, ArithmeticError):
    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class NonfiniteState(SpsError, ArithmeticError):
    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class InvalidVoltage(SpsError, ValueError):
    pass


class NoConvergence(SpsError, RuntimeError):
    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class InsufficientSamples(SpsError, ValueError):
    pass


class MissingColumn(SpsError, KeyError):
    pass


class ParseError(SpsError, ValueError):
    pass


class ValidationError(SpsError, ValueError):
    """Aggregated scenario validation failure.

    ``errors`` is a list of ``(field_path, line, message)`` tuples; ``line`` is
    1-based or ``None`` when the field is absent from the document.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        lines = []
        for path, line, msg in self.errors:
            where = f"line {line}" if line is not None else "missing"
            lines.append(f"{path} ({where}): {msg}")
        super().__init__("; ".join(lines))
