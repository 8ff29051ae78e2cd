"""Exception types shared across the package."""


class PeglabError(RuntimeError):
    """Base class for peglab failures."""


class NotSimpleCurve(ValueError):
    """A coefficient list does not describe a simple immersed closed curve."""


class NotSimpleAfterSmoothing(PeglabError):
    """Polygon smoothing produced a self-intersecting curve.

    Increase the smoothing parameter or the mode count.
    """


class CenterOnLoop(ValueError):
    """A winding-number query center lies (numerically) on the loop."""


class DiagonalHit(PeglabError):
    """A capping boundary path passes through the pair diagonal z == w."""


class NotElegant(PeglabError):
    """Direct region-area computation is undefined for this inscription."""


class EmptySpectrum(PeglabError):
    """No inscribed rectangles were found at any sampled angle."""


class NoAdmissiblePath(PeglabError):
    """Every selection through the spectrum violates monotonicity beyond tolerance."""


class IntervalEmpty(PeglabError):
    """The requested sub-level interval is empty (a >= b)."""
