"""Exception hierarchy.

Each family maps to a distinct CLI exit code (see ``gkslkit.cli``).
"""


class GkslError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 10


class DimensionMismatch(GkslError, ValueError):
    exit_code = 11


class NotPSD(GkslError, ValueError):
    exit_code = 12


class NotCP(GkslError, ValueError):
    exit_code = 13


class NotUnital(GkslError, ValueError):
    exit_code = 14


class NotUnitary(GkslError, ValueError):
    exit_code = 15


class StepTooLarge(GkslError, ValueError):
    exit_code = 16


class NonCanonical(GkslError, ValueError):
    exit_code = 17


class InsufficientGrid(GkslError, ValueError):
    exit_code = 18


class ParseError(GkslError, ValueError):
    """Malformed input file; the message carries line or field context."""

    exit_code = 2
