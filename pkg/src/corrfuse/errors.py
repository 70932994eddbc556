"""Exception types raised across the package."""


class CorrfuseError(Exception):
    """Base class for all package errors."""


class NonOrthonormalInput(CorrfuseError, ValueError):
    pass


class DimensionMismatch(CorrfuseError, ValueError):
    pass


class EmptyInput(CorrfuseError, ValueError):
    pass


class QuadratureFailure(CorrfuseError, RuntimeError):
    pass


class DegenerateField(CorrfuseError, ValueError):
    """Accelerometer and magnetometer directions are (nearly) parallel."""


class EmptyStream(CorrfuseError, ValueError):
    pass


class NonMonotoneTime(CorrfuseError, ValueError):
    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"timestamps not strictly increasing at sample {index}")


class InsufficientData(CorrfuseError, ValueError):
    pass


class ZeroResidual(CorrfuseError, ValueError):
    """Residual spread is zero, so no bandwidth can be suggested."""


class SpecValidation(CorrfuseError, ValueError):
    pass


class LengthMismatch(CorrfuseError, ValueError):
    pass


class ConfigError(CorrfuseError, ValueError):
    pass


class DataFormatError(CorrfuseError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
