"""certipose: certified camera pose estimation from binary images.

Offline, pose-space boxes are pushed through a set-based projection model to
enclose every image they can produce; online, an observed image filters the
boxes and witness pixels tighten the survivors into a certified pose set.
"""

from .errors import (
    BehindCamera,
    CertiPoseError,
    DomainCrossesPole,
    EmptyWitness,
    InvisibleCandidate,
    SingularReference,
    StoreCorrupt,
    StoreMismatch,
)
from .sets import (
    FactorAssignment,
    Interval,
    MatPolyZonotope,
    PolyZonotope,
    interval_hull,
    make_box,
    mat_mul,
    mink_sum,
    sample,
    split_linear_error,
    support_upper,
)
from .enclosure import LinearApproxEnclosure, enclose_elementwise, fit_linear
from .geometry import (
    CameraParams,
    ConvexPolygon3,
    HPolytope2,
    Pose,
    Target,
    apply_noise,
    denoise,
    project,
    rasterize,
    render,
)
from .image import BinaryImage
from .forward import (
    HullConfig,
    PoseCandidateArtifacts,
    UncertainPose,
    VertexEnclosure,
    enclose_rotation,
    forward_enclose,
    hull_enclose,
)
from .preimage import ConstrainedPoseSet, preimage_constraints, stack_constraints
from .witness import (
    WitnessSet,
    collect_witnesses,
    is_standalone,
    tighten_boundary,
    triangle_filter,
    witness_polytope,
)
from .estimator import CertifiedPoseEstimate, EstimateConfig, estimate
from .partition import PartitionConfig, PoseSpace, partition, precompute_store
from .store import CandidateStore
from .targets import builtin_target, builtin_target_names

__version__ = "0.1.0"
