"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes, so each class carries the code it
should produce when it escapes a subcommand.
"""

from __future__ import annotations


class LabError(Exception):
    exit_code = 1


class InvalidParameter(LabError, ValueError):
    exit_code = 2


class PreconditionViolated(InvalidParameter):
    pass


class LengthMismatch(InvalidParameter):
    pass


class NoSecondCoordinate(InvalidParameter):
    pass


class BudgetExceeded(LabError):
    exit_code = 3


class BitBudgetExceeded(BudgetExceeded, ArithmeticError):
    pass


class CertificationFailed(LabError):
    exit_code = 4


class DenominatorVanishes(CertificationFailed, ZeroDivisionError):
    pass


class NoSignChange(CertificationFailed):
    pass


class ConstructionFailed(LabError):
    exit_code = 5


class RootNotFound(ConstructionFailed):
    pass


class MarginViolation(ConstructionFailed):
    pass


class NoBranchPoint(ConstructionFailed):
    pass


class GapBoundTooWeak(ConstructionFailed):
    pass


class EtaTooSlow(ConstructionFailed):
    pass
