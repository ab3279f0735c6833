"""Exception hierarchy shared by all feynkac modules."""


class FeynkacError(Exception):
    """Base class for all library errors."""


# --- numerics ---------------------------------------------------------------

class UnsupportedOrder(FeynkacError):
    """BDF order outside 1..6."""


class NonPositiveTau(FeynkacError):
    """Time step must be > 0."""


class PivotBreakdown(FeynkacError):
    """Tridiagonal LU hit a pivot below the breakdown threshold."""


# --- mesh / FEM -------------------------------------------------------------

class MeshTooCoarse(FeynkacError):
    """Fewer than two elements."""


class MeshMismatch(FeynkacError):
    """Operand lives on a different mesh than the operator expects."""


class NotNested(FeynkacError):
    """Target mesh is not a dyadic refinement of the source mesh."""


class SingularMass(FeynkacError):
    """Mass solve failed (cannot happen for a valid mesh; defensive)."""


class CacheTimeMismatch(FeynkacError):
    """Quadrature cache is not positioned at the requested time level."""


class BreakpointMisaligned(FeynkacError):
    """A declared breakpoint of U or G0 does not coincide with a mesh node."""


# The scheme layer reports the same condition under this name.
MeshBreakpointMisaligned = BreakpointMisaligned


# --- scheme -----------------------------------------------------------------

class MissingDerivatives(FeynkacError):
    """Source term does not provide the time derivatives the order needs."""


class NonzeroSourceUnsupported(FeynkacError):
    """Scheme variant is defined for f = 0 only."""


class NonzeroInitialUnsupported(FeynkacError):
    """Scheme variant is defined for G0 = 0 only."""


# --- oracles ----------------------------------------------------------------

class NonConstantU(FeynkacError):
    """Analytic reference requires a constant potential."""


class NonzeroSource(FeynkacError):
    """Analytic reference requires f = 0."""


class ContourParamInvalid(FeynkacError):
    """Contour parameters violate the sector constraints."""


class OperatorSolveFailure(FeynkacError):
    """Resolvent solve failed at a contour node."""


class IndexOutOfRange(FeynkacError):
    """Correction index l outside 1..k-2."""


# --- configuration / harness ------------------------------------------------

class SchemaError(FeynkacError):
    """Config document violates the schema; carries the offending field path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class AlphaOutOfRange(SchemaError):
    """alpha must lie in (0, 1)."""

    def __init__(self, value):
        SchemaError.__init__(self, "alpha", f"must be in (0, 1), got {value}")


class NonPositiveError(FeynkacError):
    """Rate computation needs strictly positive errors."""


class TooFewPoints(FeynkacError):
    """Rate computation needs at least two errors."""
