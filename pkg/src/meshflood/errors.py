"""Exception types shared across the simulator."""


class MeshFloodError(Exception):
    """Base class for all simulator errors."""


class EmptyScenarioError(MeshFloodError):
    """Raised when a scenario would contain no nodes."""


class UnknownNodeError(MeshFloodError, KeyError):
    """Raised when a node id is not part of the topology."""


class SizeLimitError(MeshFloodError):
    """Raised when an exact solver is asked to run past its instance cap."""


class StaleAssignmentError(MeshFloodError):
    """Raised when a relay assignment is used against a newer topology epoch."""


class ProtocolViolationError(MeshFloodError):
    """A packet arrived from a non-neighbor; indicates an engine bug, not a drop."""


class AccountingError(MeshFloodError):
    """Traffic accounting produced an impossible value (negative or unbalanced)."""


class ComparisonError(MeshFloodError):
    """Two summaries from different scenarios were compared."""


class ConfigError(MeshFloodError):
    """Invalid scenario configuration or scenario file."""
