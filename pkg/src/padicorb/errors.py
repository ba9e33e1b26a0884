"""Shared exception types.

Every branching predicate in the workbench must be certified at the working
precision; PrecisionExhausted is the refusal to guess.
"""


class PadicError(Exception):
    pass


class ZeroInput(PadicError):
    """An operation that needs a nonzero (or invertible) input got zero."""


class PrecisionExhausted(PadicError):
    """A predicate could not be decided at the working precision."""


class Inseparable(PadicError):
    """Polynomial discriminant vanishes (or cannot be certified nonzero)."""


class SingularInput(PadicError):
    """Matrix is singular (or singularity cannot be excluded)."""


class NotStronglyRegular(PadicError):
    """Pair (x, w) fails the cyclic-vector condition."""


class NotRegularSS(PadicError):
    """Point is not regular semi-simple."""


class NotIntegral(PadicError):
    """Point has entries outside the integer ring."""


class OnSingularDivisor(PadicError):
    """Cayley transform evaluated on its singular divisor."""


class NotInImage(PadicError):
    """Inverse Satake target is outside the image lattice."""


class OutsideFiltrationSpan(PadicError):
    """Hermitian module element is not in the determinant filtration span."""


class NotRepresentable(PadicError):
    """Hironaka product left the representable module (never silently dropped)."""


class WindowInsufficient(PadicError):
    """Enumeration window too small to certify the value; enlarge and retry."""


class CellBoundUncertified(PadicError):
    """Brute-force cell decomposition could not certify its support bound."""


class RepresentativeSearchFailed(PadicError):
    """Representative search was inconclusive (distinct from a NoMatch proof)."""


class UnknownCheck(PadicError):
    """Check name not in the verifier catalog."""
