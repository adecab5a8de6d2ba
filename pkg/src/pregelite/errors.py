"""Exception types shared across the package."""


class PregeliteError(Exception):
    """Base class for all package-specific errors."""


class GraphLoadError(PregeliteError):
    """Raised when an edge-list file cannot be parsed or a cache is invalid.

    Carries enough context (path, line number where applicable) to make the
    failure actionable from the command line.
    """


class ConfigError(PregeliteError):
    """Raised for invalid run configuration (bad worker count, unknown mode, ...)."""


class ValidationError(PregeliteError):
    """Raised when a result fails comparison against its reference implementation."""


class ExecutionError(PregeliteError):
    """Raised when a worker thread fails during a superstep.

    The original exception is attached as ``__cause__``.
    """


class PhaseError(PregeliteError):
    """Raised by the optional phase guard when a send targets a buffer that is
    not currently accepting messages (i.e. outside the compute phase)."""
