"""Exception types shared across the library."""


class NodectrlError(Exception):
    """Base class for all library errors."""


class ConfigurationError(NodectrlError):
    """Invalid parameters, shapes, or config values."""


class NumericError(NodectrlError):
    """Non-finite values produced during a computation."""


class CFLError(NodectrlError):
    """Finite-volume stability condition violated."""

    def __init__(self, message, admissible_dt=None):
        super().__init__(message)
        self.admissible_dt = admissible_dt


class ControllabilityError(NodectrlError):
    """Terminal state unreachable: singular or near-singular reachability map."""

    def __init__(self, message, cond_estimate=None):
        super().__init__(message)
        self.cond_estimate = cond_estimate


class IllConditionedError(NodectrlError):
    """Kernel system unsolvable within the jitter ceiling."""

    def __init__(self, message, cond_estimate=None):
        super().__init__(message)
        self.cond_estimate = cond_estimate
