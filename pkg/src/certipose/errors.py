"""Exception types shared across the certipose package."""


class CertiPoseError(Exception):
    """Base class for all certipose-specific errors."""


class DomainCrossesPole(CertiPoseError):
    """A reciprocal enclosure was requested on a domain touching zero.

    In the projection pipeline this signals that a polygon may lie at or
    behind the camera plane for some pose in the uncertain set.
    """


class BehindCamera(CertiPoseError):
    """A concrete projection produced a vertex with non-positive depth."""


class InvisibleCandidate(CertiPoseError):
    """A pose candidate box provably produces no visible target pixels."""


class DepthUncertain(CertiPoseError):
    """A candidate box mixes in-front and behind-camera depths.

    The box must be split further before a sound enclosure can be built.
    """


class SingularReference(CertiPoseError):
    """Reference-point matrix is singular and the point is not in its span."""


class EmptyWitness(CertiPoseError):
    """No on-pixel of the observed image falls inside a vertex region."""


class StoreCorrupt(CertiPoseError):
    """Candidate store failed an integrity or version check on load."""


class StoreMismatch(CertiPoseError):
    """Candidate store was built for a different camera/target/pose space."""
