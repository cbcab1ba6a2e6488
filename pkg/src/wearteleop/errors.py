"""Exception types raised across the teleoperation pipeline."""


class TeleopError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(TeleopError, ValueError):
    """Input failed a precondition check."""


class NonUnitQuaternion(ValidationError):
    pass


class WindowTooShort(ValidationError):
    pass


class ChannelCountMismatch(ValidationError):
    pass


class EmptyWindow(ValidationError):
    pass


class SingleClassDataset(ValidationError):
    pass


class NonFiniteFeature(ValidationError):
    pass


class TrainingDiverged(TeleopError):
    """Training loss increased between epochs; carries the loss history."""

    def __init__(self, message, history):
        super().__init__(message)
        self.history = history


class ModelNotLoaded(TeleopError):
    pass


class PayloadArityMismatch(ValidationError):
    pass


class DecodeError(TeleopError):
    """A wire frame could not be parsed."""


class BadMagic(DecodeError):
    pass


class BadCrc(DecodeError):
    pass


class UnknownKind(DecodeError):
    pass


class Truncated(DecodeError):
    pass


class NotCalibrated(TeleopError):
    pass


class ScenarioInvalid(ValidationError):
    pass


class ConnectFailed(TeleopError):
    pass


class PeerDisconnected(TeleopError):
    pass


class EmptyTrajectory(ValidationError):
    pass


class NoPairs(ValidationError):
    pass


class UnreachablePath(ValidationError):
    pass
