import sys

from typing import Any, Optional

from logzero import logger

from . import constants

EXIT_OK = 0
ERROR_VALIDATION = 2
ERROR_NO_CONVERGENCE = 3
ERROR_RESOURCE_LIMIT = 4
ERROR_INTERNAL_ERROR = 255


def report(
    message: str, fatal: bool = True, exitcode: int = 1, suggest_report: bool = False
) -> None:
    """Reports an error to terminal and exits (if specified).

    Args:
        message (str): Message to output to the terminal.
        fatal (bool, optional): Whether to exit after reporting the error. Defaults to True.
        exitcode (int, optional): If exiting, the error code that will be
        reported. Defaults to 1.
        suggest_report(bool): Print a message to the screen asking the user to
        report the bug to constants.VARTN_ISSUE_URL. Defaults to False.
    """

    logger.error(message)
    if suggest_report:
        logger.error("")
        logger.error("Please report this error at %s", constants.VARTN_ISSUE_URL)
    if fatal:
        sys.exit(exitcode)


class VartnError(Exception):
    """Base class for every error the library raises on purpose."""

    exitcode = ERROR_INTERNAL_ERROR


class ConfigError(VartnError):
    exitcode = ERROR_VALIDATION


class NonPositiveDefinite(VartnError):
    exitcode = ERROR_VALIDATION


class NonPSD(VartnError):
    exitcode = ERROR_VALIDATION


class DegreeTooHigh(VartnError):
    exitcode = ERROR_VALIDATION


class ShapeMismatch(VartnError):
    exitcode = ERROR_VALIDATION


class IntegrityError(VartnError):
    exitcode = ERROR_VALIDATION


class BoundViolation(VartnError):
    exitcode = ERROR_VALIDATION


class InvariantViolation(VartnError):
    """A named invariant of the validation suites failed."""

    exitcode = ERROR_VALIDATION

    def __init__(self, invariant: str, detail: str = ""):
        super().__init__(f"Invariant '{invariant}' failed. {detail}".strip())
        self.invariant = invariant
        self.detail = detail

    def __reduce__(self):
        return (self.__class__, (self.invariant, self.detail))


class ResourceLimit(VartnError):
    exitcode = ERROR_RESOURCE_LIMIT


class CutoffNotReached(VartnError):
    exitcode = ERROR_RESOURCE_LIMIT

    def __init__(self, d_max: int, residual: float):
        super().__init__(
            f"Basis change is not an isometry below D_max={d_max} (residual {residual:.3e})."
        )
        self.d_max = d_max
        self.residual = residual

    def __reduce__(self):
        return (self.__class__, (self.d_max, self.residual))


class NoConvergence(VartnError):
    """Optimization stopped on its budget; `result` holds the best state reached."""

    exitcode = ERROR_NO_CONVERGENCE

    def __init__(self, message: str, result: Optional[Any] = None):
        super().__init__(message)
        self.result = result

    def __reduce__(self):
        return (self.__class__, (str(self), self.result))
