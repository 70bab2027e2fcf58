"""Exception hierarchy shared by the library, the CLI and the HTTP routes"""
from scipy.linalg import LinAlgError
from scipy.spatial import QhullError


class ReachspanError(Exception):
    """Base class for every error raised by reachspan"""


class RobotDescriptionError(ReachspanError, ValueError):
    """Robot document could not be parsed (carries line/column or field path)"""


class ModelValidationError(ReachspanError, ValueError):
    """Robot model violates one of its invariants"""


class StateOutOfLimitsError(ReachspanError, ValueError):
    """Joint state lies outside the model's position or velocity box"""


class FrameIndexError(ReachspanError, IndexError):
    """Frame index does not name a joint of the model"""


class SingularMassMatrixError(ReachspanError):
    """Mass matrix could not be Cholesky-factorised"""


class DimensionMismatchError(ReachspanError, ValueError):
    """Array shapes do not agree"""


class UnboundedProblemError(ReachspanError):
    """A support LP was unbounded, so the projection problem is malformed"""


class DegeneratePolytopeError(ReachspanError, ValueError):
    """Operation needs a full-dimensional polytope"""


class MissingWitnessError(ReachspanError, ValueError):
    """Polytope carries no generator torques for its vertices"""


class SimulationError(ReachspanError, ValueError):
    """Simulation inputs are invalid"""


class BaselineError(ReachspanError, ValueError):
    """Cartesian limits give an empty interval at the requested horizon"""


class ScenarioError(ReachspanError, ValueError):
    """Scenario document could not be parsed or resolved"""


class HullComputationError(ReachspanError):
    """Qhull could not build a hull of the support points, even with joggled input"""


# raised by numpy/scipy underneath the library; front ends report them like ReachspanError
NUMERICAL_ERRORS = (QhullError, LinAlgError, FloatingPointError)
