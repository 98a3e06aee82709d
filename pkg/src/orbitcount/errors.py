"""Error hierarchy shared by every module.

All domain errors derive from :class:`OrbitCountError` so callers (and the
command line driver) can distinguish bad input from a genuine bug.
"""


class OrbitCountError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(OrbitCountError):
    """Malformed run configuration (bad key, bad value, missing file)."""


# --- linear algebra -------------------------------------------------------

class SingularInput(OrbitCountError):
    """Matrix determinant is numerically zero."""


class NotProximal(OrbitCountError):
    """Top eigenvalue modulus is not simple within the gap tolerance."""


class DegeneratePair(OrbitCountError):
    """Covector annihilates the point; Gromov product is -infinity."""


# --- words and representations --------------------------------------------

class UnknownLabel(OrbitCountError):
    """Word uses a letter outside the generator set."""


class ParseError(OrbitCountError):
    """Generator file (or word string) does not follow the format."""


class DimensionMismatch(OrbitCountError):
    """Matrix block has the wrong shape for the declared dimension."""


class SingularGenerator(OrbitCountError):
    """A loaded generator is not invertible."""


class UnknownBuiltin(OrbitCountError):
    """Requested builtin representation name is not registered."""


# --- counting and cone ----------------------------------------------------

class NotCertified(OrbitCountError):
    """Operation requires a certified Schottky representation."""


class InteriorUncertified(OrbitCountError):
    """Functional fails the sampled interior-of-dual-cone check."""


class InsufficientData(OrbitCountError):
    """Too few entries below the truncation threshold to fit."""


class EmptyMeasure(OrbitCountError):
    """Pair measure has no mass; deficit is undefined."""


# --- thermodynamic route ---------------------------------------------------

class NonPositivePotential(OrbitCountError):
    """Entropy root requires a strictly positive potential."""


class NonPositiveRoof(OrbitCountError):
    """Abramov rescaling requires a positive mean roof value."""


class TooFewPeriods(OrbitCountError):
    """Arithmeticity test needs at least two periods."""
