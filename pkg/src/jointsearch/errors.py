"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid search-space, profile, budget or run configuration."""


class UsageError(ValueError):
    """A function was called outside its documented preconditions."""


class NotMeasurableError(RuntimeError):
    """A latency estimate was requested for an architecture with untried subgraphs."""


class ProvenanceError(RuntimeError):
    """Files produced from different benchmarks or configs were mixed."""


class ParseError(ValueError):
    """A result or benchmark file could not be parsed."""
