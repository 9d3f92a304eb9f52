"""Exception types shared across the toolkit."""


class FreqAttackError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(FreqAttackError):
    """Image or block dimensions incompatible with the requested operation."""


class ShapeMismatch(FreqAttackError):
    """Two image sets that must share a shape do not."""


class WindowError(FreqAttackError):
    """Image smaller than the metric's local window."""


class ConfigError(FreqAttackError):
    """Invalid attack or harness configuration."""


class ViewCountMismatch(FreqAttackError):
    """Victim expected a different number of input views."""


class Unsupported(FreqAttackError):
    """Requested capability (e.g. gradients) not provided by this victim."""


class RemoteError(FreqAttackError):
    """Wire-protocol failure talking to a remote victim."""


class RankCountError(FreqAttackError):
    """Wrong number of selected candidates handed to a CMA-ES update."""
