"""Exception types shared across the package."""


class RtflowError(Exception):
    """Base class for all package errors."""


class NonContiguousPath(RtflowError):
    """Consecutive edges of a path do not share a node."""


class EmptyTopology(RtflowError):
    """An operation needs at least one edge."""


class InvalidParams(RtflowError):
    """Generator or experiment parameters are out of range."""


class DuplicateDeadline(RtflowError):
    """A flow set contains two flows with the same deadline."""


class ZeroBound(RtflowError):
    """A relaxation bound must be strictly positive."""


class TooLarge(RtflowError):
    """Instance exceeds the brute-force enumeration cap."""


class PathNotPlaced(RtflowError):
    """Intent decomposition was asked for a flow without a placed path."""


class QueueExhausted(RtflowError):
    """No free queue on an egress port (internal consistency failure)."""


class UnplacedFlow(RtflowError):
    """A traffic profile references a flow the layout did not place."""


class OverCapacityProfile(RtflowError):
    """Strict mode: a profile sends faster than its reserved rate."""
