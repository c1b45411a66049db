"""Shared error types and process exit codes."""

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_IO = 4


class ValidationError(ValueError):
    """An input file or in-memory structure violates a pipeline contract.

    Mapped to exit code EXIT_VALIDATION by the CLI; I/O failures keep their
    builtin OSError types and map to EXIT_IO.
    """
