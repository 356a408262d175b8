"""Exception hierarchy shared by the library and the command line.

Each class carries the process exit code the CLI maps it to, so callers
never need a lookup table.
"""


class ToolkitError(ValueError):
    exit_code = 1


class ParseError(ToolkitError):
    """Input could not be read or does not follow its file format."""

    exit_code = 2


class ValidationError(ToolkitError):
    """Input parsed but is inconsistent with a catalog or with another input."""

    exit_code = 3


class ParameterError(ToolkitError):
    """A numeric or option parameter is out of range."""

    exit_code = 4


class StructuralError(ToolkitError):
    """A matrix violates a structural precondition (e.g. not closed)."""

    exit_code = 3
