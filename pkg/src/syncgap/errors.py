"""Exception hierarchy for the toolkit.

Every error carries an ``exit_code`` used by the command line driver:
2 for violated preconditions / structural problems, 3 for numerical
failures discovered at run time.
"""


class SyncgapError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 2


# --- graph construction -------------------------------------------------

class DuplicateEdgeError(SyncgapError):
    """The same ordered node pair appears twice in an edge list."""


class SelfLoopError(SyncgapError):
    """An edge connects a node to itself."""


class NonPositiveWeightError(SyncgapError):
    """An edge weight is zero, negative, or not finite."""


class IndexOutOfRangeError(SyncgapError):
    """An edge references a node index outside [0, n)."""


class ParseError(SyncgapError):
    """An input file could not be parsed; the message carries the line number."""


# --- connectivity / structure -------------------------------------------

class NotConnectedError(SyncgapError):
    """The graph is disconnected (or violates the single-root condition)."""


class NotTwoComponentsError(SyncgapError):
    """The digraph does not consist of exactly two strong components."""


class NoSpanningTreeError(SyncgapError):
    """No spanning diverging tree: more than one root component."""


class NotUndirectedError(SyncgapError):
    """An operation restricted to undirected graphs received a digraph."""


class NotIrreducibleError(SyncgapError):
    """The slave component is not strongly connected."""


# --- spectral preconditions ----------------------------------------------

class NotAnEigenvalueError(SyncgapError):
    """The requested value is not an eigenvalue of the matrix (within tol)."""


class NotSimpleError(SyncgapError):
    """The requested eigenvalue is not simple."""


class GapNotSimpleError(SyncgapError):
    """The spectral gap is not simple, so first-order slopes are undefined."""


class GapInMasterError(SyncgapError):
    """The spectral gap sits in the master component; perturbations against
    the cutset are outside the supported theory."""


class NotDiagonalizableError(SyncgapError):
    """The master Laplacian is numerically defective."""


class AmbiguousLocationError(SyncgapError):
    """The spectral gap matches both block spectra within tolerance."""


# --- numerical failures ---------------------------------------------------

class ConvergenceFailureError(SyncgapError):
    """The eigensolver did not converge or returned unusable residuals."""

    exit_code = 3


class EigenvalueCollisionError(SyncgapError):
    """The perturbed spectral gap cannot be matched unambiguously."""

    exit_code = 3


class SingularShiftError(SyncgapError):
    """The shifted master Laplacian is numerically singular."""

    exit_code = 3


class BlowUpError(SyncgapError):
    """A trajectory left the admissible region (norm above 1e6 or NaN)."""

    exit_code = 3

    def __init__(self, time: float, message: str = ""):
        self.time = time
        super().__init__(message or f"state norm exceeded 1e6 at t={time:g}")


class NoBracketError(SyncgapError):
    """The coupling-threshold search could not bracket the transition."""

    exit_code = 3
