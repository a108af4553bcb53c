"""Exception types shared across the pipeline.

The CLI maps these onto exit codes: ValidationError -> 1, FormatError and
OSError -> 2, NumericError -> 3.
"""


class ValidationError(ValueError):
    """Bad arguments, malformed inputs or violated preconditions."""


class FormatError(Exception):
    """Corrupt feature container. Carries the byte offset of the defect."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class NumericError(RuntimeError):
    """Non-finite value where a finite one is required (e.g. NaN loss)."""


class StageDependencyError(RuntimeError):
    """A pipeline stage was requested before its prerequisite stage ran."""

    def __init__(self, stage, missing):
        super().__init__(f"stage '{stage}' requires missing artifact from '{missing}'")
        self.stage = stage
        self.missing = missing
