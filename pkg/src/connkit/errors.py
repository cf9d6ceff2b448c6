"""Exception types shared across the toolkit."""

from __future__ import annotations


class ConnkitError(Exception):
    """Base class for all toolkit errors."""


class ParseError(ConnkitError):
    """A document could not be parsed at all (bad JSON, missing field).

    Carries an optional locus so CLI users can find the offending spot.
    """

    def __init__(self, message: str, *, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)


class SchemaError(ConnkitError):
    """A document parsed but contains values outside the schema."""

    def __init__(self, message: str, *, field: str | None = None):
        self.field = field
        suffix = f" (field {field!r})" if field is not None else ""
        super().__init__(message + suffix)


class InvalidGraph(ConnkitError):
    """An operation that requires a valid assembly graph got an invalid one."""

    def __init__(self, message: str, violations=()):
        self.violations = tuple(violations)
        super().__init__(message)


class DegenerateInput(ConnkitError):
    """Alignment input leaves the rotation fully unconstrained."""


class LengthMismatch(ConnkitError):
    """Parallel sequences that must share a length do not."""


class StepMismatch(ConnkitError):
    """A prediction refers to a step index absent from the dataset."""


class InsufficientCandidates(ConnkitError):
    """The random baseline ran out of unused candidate points."""


class UnparseableResponse(ConnkitError):
    """A model response could not be coerced into the expected shape.

    ``span`` holds the offending fragment, when one can be identified.
    """

    def __init__(self, message: str, span: str | None = None):
        self.span = span
        suffix = f": {span!r}" if span else ""
        super().__init__(message + suffix)


class PromptInputError(ConnkitError):
    """A prompt cannot be built from the given step."""


class MissingAsset(PromptInputError):
    """An image reference required by a prompt is absent."""


class UnsolvedPose(ConnkitError):
    """A trial was requested for an operation with no solved pose."""
