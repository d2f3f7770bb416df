"""
Error and warning types shared by every koopbound module.

Each concrete error also derives from the builtin it refines, so callers that
only know about ``ValueError`` / ``RuntimeError`` keep working.
"""
from typing import Optional


class KoopboundWarning(UserWarning):
    """Soft failures: box inflation, MC coverage, out-of-domain inputs"""


class KoopboundError(Exception):
    pass


class DiagnosticError(KoopboundError, RuntimeError):
    """An iterative routine hit its iteration cap"""


class InfiniteFactorError(KoopboundError, ValueError):
    """A determinant-type factor would be infinite (singular map)"""


class InjectivityError(KoopboundError, ValueError):
    pass


class ConstraintViolationError(KoopboundError, ValueError):
    """A factor exceeds its cap D"""


class UnsupportedActivationError(KoopboundError, ValueError):
    pass


class ParameterError(KoopboundError, ValueError):
    pass


class DimensionError(KoopboundError, ValueError):
    pass


class DegenerateDomainError(KoopboundError, ValueError):
    pass


class ModeViolationError(KoopboundError, ValueError):
    pass


class ConfigError(KoopboundError, ValueError):
    pass


class NumericError(KoopboundError, ArithmeticError):
    def __init__(self, message: str, layer_index: Optional[int] = None):
        if layer_index is not None:
            message = f"layer {layer_index}: {message}"
        super().__init__(message)
        self.layer_index = layer_index


class ApplicabilityError(ParameterError):
    """A theorem or regularizer does not apply to the given network"""

    def __init__(self, message: str, hint: Optional[str] = None):
        if hint:
            message = f"{message} (hint: {hint})"
        super().__init__(message)
        self.hint = hint


class DivergenceError(KoopboundError, RuntimeError):
    def __init__(self, message: str, log=None):
        super().__init__(message)
        # partial TrainLog, already flushed by the runner
        self.log = log
