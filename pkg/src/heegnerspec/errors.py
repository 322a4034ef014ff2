"""Exception types shared across the package."""


class HeegnerSpecError(Exception):
    """Base class for all package errors."""


class PoleError(HeegnerSpecError, ZeroDivisionError):
    """Evaluation requested at (or numerically on top of) a pole."""


class DomainError(HeegnerSpecError, ValueError):
    """An argument lies outside the documented domain of an operation."""


class BranchGapError(HeegnerSpecError):
    """Phase anchors are too sparse to unwrap the argument unambiguously."""


class QuadratureError(HeegnerSpecError):
    """A line integral could not be evaluated reliably."""


class RealnessError(HeegnerSpecError):
    """A quantity that must be real came out with a sizeable imaginary part."""


class CacheError(HeegnerSpecError):
    """A cache file is missing, corrupt or of the wrong version."""
