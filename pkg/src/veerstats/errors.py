"""Exception types shared across the package.

Errors that indicate bad user input (unsupported surface, malformed word) are
kept distinct from errors that indicate an internal bug (a relabel that does
not close up, a gluing that does not match): the latter should never be caught
and retried, they should be reported.
"""


class VeerstatsError(Exception):
    """Base class for all package errors."""


class UnsupportedSurface(VeerstatsError):
    """The requested surface has no hyperbolic structure, or no generator
    library is implemented for it."""


class WordSyntaxError(VeerstatsError):
    """A mapping-class word string could not be parsed."""


class FlipError(VeerstatsError):
    """An edge flip was requested on an edge that cannot be flipped."""


class NegativeResult(VeerstatsError):
    """A flipped edge weight came out negative beyond tolerance; the weight
    vector no longer describes a carried lamination."""


class CompilationFailure(VeerstatsError):
    """A generator curve could not be shortened to its canonical short
    position.  Indicates a generator-library bug, not user error."""


class NotPseudoAnosov(VeerstatsError):
    """Raised by the invariant-lamination iteration for words that are not
    pseudo-Anosov.  ``kind`` is 'Periodic' or 'Reducible'."""

    def __init__(self, kind, message=""):
        self.kind = kind
        super().__init__("%s: %s" % (kind, message) if message else kind)


class NoConvergence(VeerstatsError):
    """Projective iteration hit its cap without converging."""


class StratumDetectionFailure(VeerstatsError):
    """The zero-corner pattern of the stable lamination is inconsistent."""


class DegenerateWeights(VeerstatsError):
    """All edge weights vanished during splitting."""


class PeriodNotFound(VeerstatsError):
    """The maximal splitting sequence hit its layer cap without a periodic
    match."""


class GluingInconsistency(VeerstatsError):
    """Internal error while closing up the mapping torus."""


class NotVeering(VeerstatsError):
    """No consistent red/blue edge coloring exists."""


class SolverDiverged(VeerstatsError):
    """Newton iteration failed after all restarts."""


class DegenerateShape(VeerstatsError):
    """A shape parameter collapsed onto 0 or 1."""


class SchemaMismatch(VeerstatsError):
    """Records with incompatible schema versions were mixed."""


class BoundViolation(VeerstatsError):
    """A proved inequality failed on a computed record; indicates a bug in
    the pipeline, not new mathematics."""
