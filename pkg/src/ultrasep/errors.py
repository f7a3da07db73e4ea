class SequenceFormatError(ValueError):
    """A sequence document is malformed, has points off the disc, or duplicates."""


class DegenerateDenominatorError(ZeroDivisionError):
    """|B_a(a)| is too small to normalise a dual-boundedness witness."""


class TubeUnreachableError(RuntimeError):
    """No obstacle-avoiding polyline fits the length budget."""


class TubeOverlapError(RuntimeError):
    def __init__(self, pair, message=None):
        self.pair = pair
        super().__init__(message or f"tubes {pair[0]} and {pair[1]} intersect")


class NonFiniteError(FloatingPointError):
    """A scalar field left [0, 1] or produced a non-finite gradient."""


class CapacityError(RuntimeError):
    """The requested number of separated points could not be placed."""


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
