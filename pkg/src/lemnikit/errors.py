class LemniscateError(Exception):
    """Base class for numerical failures. CLI maps these to exit code 3."""


class NonConvergence(LemniscateError):
    pass


class DivisionNearZero(LemniscateError):
    pass


class SeedNotFound(LemniscateError):
    pass


class CriticalLevelTooClose(LemniscateError):
    pass


class TraceOverflow(LemniscateError):
    pass


class ArgumentJumpTooLarge(LemniscateError):
    pass


class FlowStalled(LemniscateError):
    pass


class LevelAtCriticalValue(LemniscateError):
    pass


class MonotonicityViolation(LemniscateError):
    """N_t decreased along a level sweep. Should never happen."""


class CriticalPointHit(LemniscateError):
    pass


class ContinuationDiverged(LemniscateError):
    pass


class SolverNotConverged(LemniscateError):
    pass


class InvalidCondenser(ValueError):
    pass
