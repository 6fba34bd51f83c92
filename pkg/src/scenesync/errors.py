"""Exception hierarchy shared by every scenesync module."""


class SceneSyncError(Exception):
    """Base class for all library errors."""


class ValidationError(SceneSyncError, ValueError):
    """An argument or configuration value is outside its allowed domain."""


class AuthorizationError(SceneSyncError):
    """A node tried to mutate an object whose lock it does not hold."""


class OrderingError(SceneSyncError):
    """An action was started earlier than the action it replaces."""


class ProtocolError(SceneSyncError):
    """Malformed, unexpected or semantically invalid wire message."""


class EncodingError(SceneSyncError):
    """A message cannot be serialized (for instance it is oversized)."""


class TransportError(SceneSyncError):
    """The live datagram transport failed."""


class JoinError(SceneSyncError):
    """A client did not receive JOIN_ACK before its deadline."""
