"""Exception types raised by the toolkit.

Everything derives from XcposcError so callers (and the CLI) can catch
tool failures in one place without swallowing genuine bugs.
"""


class XcposcError(Exception):
    """Base class for all toolkit errors."""


# --- polynomial / rational function algebra ---

class ZeroPolynomial(XcposcError):
    """Operation requires a polynomial that is not identically zero."""


class Degenerate(XcposcError):
    """Operation requires degree >= 1."""


class PoleProximity(XcposcError):
    """Evaluation point sits on or too close to a pole."""


class ZeroFunction(XcposcError):
    """Cannot invert a rational function with zero numerator."""


class DegenerateLoop(XcposcError):
    """Feedback denominator collapsed to the zero polynomial."""


# --- network construction ---

class InvalidParameter(XcposcError):
    """Physical parameter out of its admissible range."""


class ImproperFunction(XcposcError):
    """Numerator degree exceeds denominator degree where properness is required."""


# --- criterion checks ---

class PoleOnContour(XcposcError):
    """A pole of the sampled function sits on (or within tolerance of) the shifted contour."""


class RootOnContour(XcposcError):
    """A root used by the encirclement oracle sits on the shifted contour."""


class CenterOnCurve(XcposcError):
    """Winding center coincides with a curve sample."""


class AmbiguousWinding(XcposcError):
    """Accumulated phase does not round cleanly to an integer turn count."""


class WindingMismatch(XcposcError):
    """Sampled winding and root-count oracle disagree; indicates a numerical defect."""


class TailUnbounded(XcposcError):
    """Curve tail behaviour cannot be certified against the disk."""


# --- equilibria ---

class DegenerateDcGain(XcposcError):
    """G has a pole at s = 0, so the fixed-point equation is ill-posed."""


# --- simulation ---

class AlgebraicLoop(XcposcError):
    """Proper-but-not-strictly-proper G would close an implicit nonlinear equation."""


class Divergence(XcposcError):
    """Integration state exceeded the divergence guard."""

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


# --- configuration / CLI ---

class ConfigError(XcposcError):
    """Malformed or inconsistent design configuration."""
