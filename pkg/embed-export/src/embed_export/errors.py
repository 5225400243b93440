"""Exception hierarchy. Exit-code mapping lives in the CLI:
UsageError -> 1, ExportError -> 2, anything else -> 3.
"""


class ExportError(Exception):
    """Invalid input data, store contents, or encoder output."""


class UsageError(ExportError):
    """Bad command-line invocation."""
