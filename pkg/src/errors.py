"""
Exception hierarchy for spexlab.

Library code raises these; the command-line front end maps them to exit codes.
"""

from typing import Any, Optional


class SpexlabError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 2


class UsageError(SpexlabError):
    """Bad flags or missing inputs."""


class GraphParseError(SpexlabError):
    """Malformed graph file content."""

    def __init__(self, message: str, line_no: Optional[int] = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class DomainError(SpexlabError, ValueError):
    """An operation's precondition does not hold for its inputs."""


class CapacityError(SpexlabError):
    """A brute-force or dense-arithmetic guard was exceeded."""

    exit_code = 3


class CheckFailure(SpexlabError):
    """A verified inequality or identity was violated."""

    exit_code = 1

    def __init__(self, name: str, message: str, witness: Any = None):
        self.name = name
        self.witness = witness
        super().__init__(f"{name}: {message}")
