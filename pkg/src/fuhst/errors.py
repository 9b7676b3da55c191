"""Exception types shared across the simulator."""


class ConfigurationError(ValueError):
    """Invalid or infeasible configuration, raised before any computation."""


class ProtocolError(RuntimeError):
    """A message or query violated a domain-responsibility contract."""


class NonFiniteError(FloatingPointError):
    """Model state became non-finite; carries the offending round and node."""

    def __init__(self, message, round=None, node=None):
        super().__init__(message)
        self.round = round
        self.node = node
