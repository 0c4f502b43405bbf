"""Exception types shared across the package."""


class SpherelabError(Exception):
    """Base class for every error raised by spherelab."""


class BudgetExceeded(SpherelabError, ValueError):
    """A requested object is larger than the configured size budget."""


class RangeExceeded(SpherelabError, ValueError):
    """An argument lies outside the range a table or routine supports."""


class NotPrime(SpherelabError, ValueError):
    pass


class FactorizationFailed(SpherelabError, ValueError):
    pass


class FormatError(SpherelabError, ValueError):
    """A cache or report file is malformed."""


class EmptySphere(SpherelabError, ValueError):
    """r(lambda) = 0, so the spherical average cannot be normalized."""


class UnsupportedDimension(SpherelabError, ValueError):
    pass


class SupportOverlap(SpherelabError, ValueError):
    """Cutoff supports around distinct rationals a/q would overlap."""


class DegenerateFit(SpherelabError, ValueError):
    """Too few usable (lambda, residual) pairs for a log-log fit."""
