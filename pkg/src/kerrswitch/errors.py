"""Exception hierarchy shared by all modules."""


class KerrSwitchError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(KerrSwitchError, ValueError):
    pass


class NonPositivePump(ValidationError):
    pass


class NegativeRate(ValidationError):
    pass


class EtaZero(ValidationError):
    """A two-photon loss rate of exactly zero was given to a path that divides by it."""


class TruncationTooSmall(ValidationError):
    pass


class NoBistability(KerrSwitchError):
    """Only the trivial fixed point exists (or the saddle is no longer a saddle)."""


class NonFinite(KerrSwitchError, FloatingPointError):
    """A trajectory left the representable range; usually the step is too large."""


class EigensolveFailed(KerrSwitchError):
    pass


class TruncationLeak(KerrSwitchError):
    """The steady state has weight in the highest retained Fock level."""

    def __init__(self, message, truncation_diag=None, N=None):
        super().__init__(message)
        self.truncation_diag = truncation_diag
        self.N = N


class PotentialSingularity(KerrSwitchError, ZeroDivisionError):
    pass


class NegativeDeterminantRatio(KerrSwitchError):
    """The Hessian determinants leave the domain of the Eyring-Kramers formula."""


class MaxTermsExceeded(KerrSwitchError):
    pass


class LowerParameterPole(KerrSwitchError, ValueError):
    pass


class AllCensored(KerrSwitchError):
    """No trajectory escaped before the time cutoff."""


class PredicateNotBracketed(KerrSwitchError):
    pass
