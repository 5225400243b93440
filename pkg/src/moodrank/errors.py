"""Exception hierarchy shared across the package.

Exit-code mapping lives in the CLI: UsageError -> 1, DataError -> 2,
anything else -> 3.
"""


class MoodRankError(Exception):
    """Base class for all package errors."""


class UsageError(MoodRankError):
    """Bad command-line invocation."""


class DataError(MoodRankError):
    """Invalid or malformed input data (files, records, stores)."""


class FormatError(DataError):
    """A versioned file does not match the expected format or version."""


class MissingEmbeddingError(DataError):
    """One or more required embedding keys are absent from the store."""

    def __init__(self, keys):
        self.keys = sorted(keys) if not isinstance(keys, str) else [keys]
        shown = ", ".join(self.keys[:5])
        more = "" if len(self.keys) <= 5 else f" (+{len(self.keys) - 5} more)"
        super().__init__(f"embedding not found for key(s): {shown}{more}")
