from typing import Optional


class AndersonCorrError(Exception):
    pass


class StripViolation(AndersonCorrError):
    """A point or a derivative circle leaves the analyticity strip |Im z| < r."""


class RealAxisInput(AndersonCorrError):
    """An off-axis integral was asked for at a real energy."""


class CoincidentPoints(AndersonCorrError):
    pass


class ConvexHullViolation(AndersonCorrError):
    pass


class ResourceLimit(AndersonCorrError):
    pass


class RadiusViolation(AndersonCorrError):
    """Certified mode was requested outside the convergence radius."""


class MissingPotential(AndersonCorrError):
    pass


class SolverFailure(AndersonCorrError):
    pass


class ToleranceNotMet(AndersonCorrError):
    pass


class DensityError(AndersonCorrError):
    pass


class ConfigError(AndersonCorrError):
    def __init__(self, field: str, message: str, line: Optional[int] = None):
        self.field = field
        self.message = message
        self.line = line
        where = f"{field} (line {line})" if line is not None else field
        super().__init__(f"{where}: {message}")
