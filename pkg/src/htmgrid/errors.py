"""Exception types shared across the package."""


class ContractError(ValueError):
    """A call violated an operation's preconditions."""


class ConfigError(ValueError):
    """Invalid or inconsistent configuration."""


class SnapshotError(RuntimeError):
    """Snapshot data is corrupt, truncated, or from an unsupported version."""
