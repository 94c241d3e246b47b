"""Exception hierarchy shared by all solver stages."""


class SingShockError(Exception):
    """Base class for every error raised by this package."""


class DegenerateData(SingShockError, ValueError):
    """Riemann data for which the shock speed is undefined (u1L == u1R)."""


class HypothesisViolated(SingShockError):
    """H1/H2 (or an eigenvalue sign condition derived from them) fails."""


class NonpositiveU2(SingShockError, ValueError):
    """Compactification requested where u2 + shift <= 0."""


class StepLimitExceeded(SingShockError):
    pass


class BlowUp(SingShockError):
    pass


class NoConvergence(SingShockError):
    pass


class SingularJacobian(SingShockError):
    pass


class TailNotConverged(SingShockError):
    pass


class MatchFailure(SingShockError):
    pass


class MissedTarget(SingShockError):
    pass


class SectionMiss(SingShockError):
    pass


class UnstableBlowup(SingShockError):
    pass


class InsufficientData(SingShockError, ValueError):
    pass
