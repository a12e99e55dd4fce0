"""Exception hierarchy shared by all acuscore modules."""


class AcuscoreError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(AcuscoreError):
    """Invalid or unreadable configuration (CLI exit code 3)."""


class InvalidConfig(ConfigError):
    """Scoring bounds or thresholds violate their invariants."""


class InputError(AcuscoreError):
    """Malformed input data (CLI exit code 2)."""


class MissingJoint(InputError):
    def __init__(self, joint_id: str):
        super().__init__(f"joint not present in skeleton frame: {joint_id!r}")
        self.joint_id = joint_id


class RecursionLimitExceeded(InputError):
    """Reference-point spec nests deeper than the allowed depth."""


class ZeroNormalization(InputError):
    """Normalization distance for the error metric is zero."""


class InvalidFov(InputError):
    """Horizontal field of view outside (0, 180) degrees."""


class NonPositiveDepth(InputError):
    """Back-projection requires a camera-space depth > 0."""


class BehindCamera(InputError):
    """Projection requires the point to be in front of the camera."""


class ClassificationError(AcuscoreError):
    """A manipulation trace could not be classified.

    These are recoverable: reports embed them as structured entries
    instead of aborting the session.
    """


class NoContact(ClassificationError):
    """The needle tip never entered the target contact sphere."""


class InsufficientCycles(ClassificationError):
    """Fewer than two lift-thrust cycles were found."""


class NoTwistDetected(ClassificationError):
    """The thumb/index distance difference never changed sign."""


class InsufficientRotations(ClassificationError):
    """Fewer than two twist rotations were found."""


class TooShort(ClassificationError):
    """Session too short to classify (moxibustion needs >= 1 s)."""


class InvalidSpec(InputError):
    """Synthetic trace spec fails validation."""


class UnsupportedFormat(InputError):
    """Unknown report emission format."""
