"""
Exception hierarchy for reebflow

Every failure raised by the engine derives from ReebflowError so the CLI can
report it with the offending key, flag or location.
"""
from typing import Optional, Sequence


class ReebflowError(Exception):
    """Base class for all reebflow failures"""


class InvalidInputError(ReebflowError, ValueError):
    """Rejected input (non-unit point, nonpositive scale, non-tangent direction, ...)"""


class NotInReebConeError(InvalidInputError):
    """Reeb vector on or outside the Reeb cone"""

    def __init__(self, coeffs: Sequence[float]):
        self.coeffs = tuple(coeffs)
        super().__init__(
            f"Reeb vector {format_coeffs(self.coeffs)} is not in the Reeb cone "
            f"(min coefficient {min(self.coeffs):.6g} <= 0)"
        )


class BoundaryProximityError(ReebflowError):
    """Reeb vector too close to the cone boundary for a trustworthy evaluation"""

    def __init__(self, message: str, min_pairing: Optional[float] = None):
        self.min_pairing = min_pairing
        super().__init__(message)


class IntegrationError(ReebflowError):
    """Quadrature produced a non-finite value"""

    def __init__(self, message: str, node: Optional[Sequence[float]] = None):
        self.node = tuple(node) if node is not None else None
        super().__init__(message)


class RootBracketError(ReebflowError):
    """Shooting parameter could not be bracketed"""

    def __init__(self, message: str, scanned: Sequence[float]):
        self.scanned = (min(scanned), max(scanned)) if scanned else (0.0, 0.0)
        super().__init__(f"{message} (scanned b in [{self.scanned[0]:.6g}, {self.scanned[1]:.6g}])")


class StepFailureError(ReebflowError):
    """Flow step kept increasing the volume after all allowed halvings"""


class ConvergenceError(ReebflowError):
    """Iterative solver stopped without meeting its tolerance"""


class ConfigError(ReebflowError, ValueError):
    """Invalid configuration key or value"""

    def __init__(self, key: str, message: str, line: Optional[int] = None):
        self.key = key
        self.line = line
        location = f"line {line}: " if line is not None else ""
        super().__init__(f"{location}{key}: {message}")


def format_coeffs(coeffs: Sequence[float]) -> str:
    """Render coefficients the way they are written in config and CSV"""
    return ",".join(repr(float(c)) for c in coeffs)
