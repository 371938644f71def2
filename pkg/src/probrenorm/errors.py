"""Exception hierarchy shared by the numerical modules."""

from __future__ import annotations


class RenormError(Exception):
    """Base class for every error raised by the library."""


class InsufficientWindow(RenormError, ValueError):
    """A tabulated window is too short for the requested difference order."""


class OutOfTable(RenormError, ValueError):
    """Bernoulli number requested beyond the precomputed table."""


class PoleAtOne(RenormError, ValueError):
    """Zeta-type evaluation requested at its pole."""


class NoConvergence(RenormError, ArithmeticError):
    """An iterative evaluation hit its work cap without meeting tolerance."""


class OutsideConvergence(RenormError, ValueError):
    """Series evaluation requested outside its absolute-convergence region."""


class CoefficientOverflow(RenormError, ArithmeticError):
    """Coefficients outgrew the family's declared growth bound."""


class DimensionTooLarge(RenormError, ValueError):
    pass


class PoleAtSigma(RenormError, ValueError):
    """Continued Dirichlet value requested at sigma = 1."""


class SIsZero(RenormError, ValueError):
    pass


class UnknownFamily(RenormError, KeyError):
    pass
