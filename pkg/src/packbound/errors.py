"""Exception types shared across the package."""


class PackboundError(Exception):
    """Base class for all packbound errors."""


class GraphFormatError(PackboundError):
    """Malformed edge-list document or invalid graph data."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class CapExceeded(PackboundError):
    """A configured size cap (vertices, basis size, PSD dimension) was hit."""


class SolverFailure(PackboundError):
    """The SDP solver did not reach an optimal status."""


class CertificateError(PackboundError):
    """A dual certificate failed independent verification."""
