"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line front end:
2 for validation failures, 3 for solver non-convergence, 4 for I/O.
"""

from __future__ import annotations


class DelayWaveError(Exception):
    exit_code = 2


class ValidationError(DelayWaveError, ValueError):
    """Bad parameters or configuration."""


class SolverError(DelayWaveError, RuntimeError):
    exit_code = 3


# birth
class NoPositiveFixedPoint(ValidationError):
    pass


class MultiplePositiveFixedPoints(ValidationError):
    pass


class CriticalPoint(ValidationError):
    pass


# charroots
class BracketFailure(SolverError):
    pass


class EpsilonOutOfRange(ValidationError):
    pass


class ContourThroughRoot(SolverError):
    pass


class HypothesisNotMet(ValidationError):
    pass


# dde
class MisalignedStep(ValidationError):
    pass


class NegativeHistory(ValidationError):
    pass


class TrivialHistory(ValidationError):
    pass


class BlowUp(SolverError):
    pass


class NoConvergenceToK(SolverError):
    def __init__(self, message: str, last_value: float | None = None):
        super().__init__(message)
        self.last_value = last_value


class WindowTooShort(SolverError):
    pass


class BoundsViolated(ValidationError):
    def __init__(self, message: str, index: int | None = None, value: float | None = None):
        super().__init__(message)
        self.index = index
        self.value = value


# waveprofile
class EpsilonZero(ValidationError):
    pass


class DomainTooShort(ValidationError):
    pass


class NoConvergence(SolverError):
    def __init__(self, message: str, profile=None):
        super().__init__(message)
        self.profile = profile


# pdesim
class CflViolation(ValidationError):
    pass


class FrontExitedDomain(SolverError):
    pass


class ConfigIOError(DelayWaveError, OSError):
    exit_code = 4
