"""Exception hierarchy shared by all pipeline stages."""

from __future__ import annotations


class QeforgeError(Exception):
    """Base class for every toolkit error."""


class MalformedRecord(QeforgeError):
    """A dataset line does not parse under the record format."""


class InvariantViolation(QeforgeError):
    """A parsed record violates a type invariant (range, origin/score coupling)."""


class EngineFailure(QeforgeError):
    """An MT engine failed to produce a translation."""

    def __init__(self, engine: str, cause: str = ""):
        self.engine = engine
        super().__init__(f"engine {engine!r} failed" + (f": {cause}" if cause else ""))


class EmptyField(QeforgeError):
    """An input file row has an empty required field."""

    def __init__(self, row: int, field: str = ""):
        self.row = row
        super().__init__(f"empty field{f' {field!r}' if field else ''} at row {row}")


class EmptyText(QeforgeError):
    """Text tokenized to zero tokens where at least one is required."""


class InsufficientSites(QeforgeError):
    """Fewer lexicon-covered injection sites than requested errors."""

    def __init__(self, requested: int, available: int):
        self.requested = requested
        self.available = available
        super().__init__(f"requested {requested} injection sites, only {available} available")


class ScoreTooLow(QeforgeError):
    """Segment score too low to absorb an error-injection penalty."""


class PlanInfeasible(QeforgeError):
    """An augmentation plan requests more variants than eligible segments allow."""

    def __init__(self, shortfall: dict[int, int]):
        self.shortfall = shortfall
        detail = ", ".join(f"{n} errors: short by {k}" for n, k in sorted(shortfall.items()))
        super().__init__(f"augmentation plan infeasible ({detail})")


class TooShort(QeforgeError):
    """Token sequence too short for the requested perturbation."""


class PoolTooSmall(QeforgeError):
    """Not enough segments in the pool for the requested operation."""


class ClassExhausted(QeforgeError):
    """A score class in the pool cannot cover its sampling quota."""

    def __init__(self, score: int, need: int, have: int):
        self.score = score
        self.need = need
        self.have = have
        super().__init__(f"score class {score}: need {need}, have {have}")


class CapInfeasible(QeforgeError):
    """Removing zero-class records alone cannot satisfy the cap."""


class ZeroVariance(QeforgeError):
    """Correlation undefined: one input sequence is constant."""


class LengthMismatch(QeforgeError):
    """Paired sequences have different lengths."""


class SingularSystem(QeforgeError):
    """Unregularized normal equations are rank-deficient."""


class UnknownSegment(QeforgeError):
    """Annotation submitted for a segment id not in the served dataset."""


class ValidationError(QeforgeError):
    """An annotation field failed validation."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ConfigError(QeforgeError):
    """A pipeline parameter is outside its allowed range."""


class PipelineStageError(QeforgeError):
    """A pipeline stage failed; carries the stage name for diagnostics."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage} failed: {cause}")
