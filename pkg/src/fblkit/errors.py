"""Exception hierarchy shared by every fblkit module.

The CLI maps these onto exit codes: validation/argument problems exit 2,
unsupported simulator combinations exit 3, numeric failures exit 4.
"""


class FblkitError(Exception):
    """Base class for all fblkit errors."""


class ValidationError(FblkitError, ValueError):
    """A probability object (Pmf, Channel, JointPmf, file) is malformed."""


class ArgumentError(FblkitError, ValueError):
    """An operation received an out-of-range or inconsistent argument."""


class UnsupportedModeError(FblkitError):
    """A simulator mode/decoder combination that is not available."""


class NumericError(FblkitError, ArithmeticError):
    """An iterative or enumerative routine failed to converge or blew its budget."""
