"""Exception hierarchy shared by the compute modules and the CLI."""


class EquilibError(Exception):
    """Base class for all package errors."""


class ValidationError(EquilibError, ValueError):
    """Problem parameters violate an admissibility constraint."""


class InvalidDegrees(ValidationError):
    pass


class InadmissibleT(ValidationError):
    pass


class NonpositiveT(ValidationError):
    pass


class DegenerateCase(EquilibError, ValueError):
    """Formula is undefined for this (n, d) pair."""


class NoRootInBracket(EquilibError, RuntimeError):
    pass


class NotPostCritical(EquilibError, ValueError):
    pass


class UnsupportedEvaluation(EquilibError, ValueError):
    pass


class SelfIntersection(EquilibError, RuntimeError):
    pass


class QuadratureNonConvergent(EquilibError, RuntimeError):
    pass


class AtomHit(EquilibError, ZeroDivisionError):
    pass


class NonConvergence(EquilibError, RuntimeError):
    pass
