"""Exception types shared across the toolkit."""


class GripperError(Exception):
    """Base class for all toolkit errors."""


class DegenerateInputError(GripperError, ValueError):
    """Geometric input collapsed below tolerance (coincident circles, zero-length edge)."""


class OutOfRangeError(GripperError, ValueError):
    """Angle outside the permitted scan window."""


class UnreachableRadiusError(GripperError, ValueError):
    """Requested radial distance lies outside the fingertip stroke."""


class ClosureFailureError(GripperError):
    """Four-bar loop cannot be assembled with the given link lengths and angles."""


class FoldPointError(ClosureFailureError):
    """Closure is at a fold (circle tangency); the assembly branch is ambiguous."""


class DeadPointError(GripperError):
    """Transmission angle at (or numerically indistinguishable from) 90 degrees."""


class SingularConfigurationError(GripperError):
    """Static force balance is singular (contact force line through the pivot)."""


class NoSolutionError(GripperError):
    """Root finding failed or preconditions exclude a solution."""


class InfeasibleContactError(GripperError):
    """Solved contact points fall outside the finite physical edges."""


class MalformedInputError(GripperError, ValueError):
    """Structurally invalid domain object (bad polygon, degenerate triangle, ...)."""


class UngraspableError(GripperError):
    """Object cannot be grasped by the configured gripper."""


class NoPlanError(GripperError):
    """No grasp plan exists for the object.

    ``cause`` is machine-readable: "too-large" when candidate grasps exist
    geometrically but exceed the finger stroke, "friction-only-states" when
    only friction-dependent contact configurations are available.
    """

    def __init__(self, message: str, cause: str = "friction-only-states"):
        super().__init__(message)
        self.cause = cause


class EmptyFeasibleSetError(GripperError):
    """Every cell of a design-search grid violated at least one constraint."""


class AlignmentError(GripperError):
    """Transmission stroke cannot be aligned with the target plate-angle range."""


class ConfigError(GripperError, ValueError):
    """Invalid configuration file content; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
