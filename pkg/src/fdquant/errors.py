"""Exception hierarchy shared by all fdquant modules."""


class FDQuantError(Exception):
    """Base class for every error raised by fdquant."""


class ContextMismatch(FDQuantError):
    """Two series with different truncation orders were combined."""


class NotUnit(FDQuantError):
    """Inversion of a series whose constant term vanishes."""


class NotHermitian(FDQuantError):
    pass


class SignatureMismatch(FDQuantError):
    pass


class RuleSignatureMismatch(FDQuantError):
    """A star-product rule was applied to an incompatible phase space."""


class AlgebraMismatch(FDQuantError):
    pass


class DegreeCapExceeded(FDQuantError):
    """A computation left the degree-filtered subspace it was tracking."""


class NotPositiveFunctional(FDQuantError):
    def __init__(self, message, verdict=None):
        super().__init__(message)
        self.verdict = verdict


class NotAdjointable(FDQuantError):
    pass


class NotInModule(FDQuantError):
    """A column x with P x != x was used as a module element."""


class CPCheckFailed(FDQuantError):
    def __init__(self, message, verdict=None):
        super().__init__(message)
        self.verdict = verdict


class NotStronglyNondegenerate(FDQuantError):
    pass


class NotFull(FDQuantError):
    pass


class DegenerateModule(FDQuantError):
    pass


class UnsupportedFunctionalShape(FDQuantError):
    pass
