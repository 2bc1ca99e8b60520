"""Exception types shared across the toolkit."""


class IwkError(Exception):
    """Base class for all toolkit errors."""


class PrecisionExhausted(IwkError):
    """A computation cannot distinguish p^N from 0 at the working precision."""


class BudgetExceeded(IwkError):
    """An enumeration or ring-size budget was exceeded."""


class NotASubmodule(IwkError):
    """The claimed submodule does not embed into the ambient module."""


class NotMinimalAtPrime(IwkError):
    """The Weierstrass model is not minimal at the requested prime."""


class BadReductionPrime(IwkError):
    """The prime divides the minimal discriminant where good reduction is required."""


class BoundExceeded(IwkError):
    """A configured prime bound was exceeded."""


class BadReductionAtP(IwkError):
    """The working prime p is a prime of bad reduction for the curve."""


class SearchExhausted(IwkError):
    """A bounded search ended without finding a witness."""


class PostconditionFailed(IwkError):
    """A mandatory self-verification failed; indicates an implementation bug."""
