"""Sound image enclosure from an uncertain pose box.

Given an axis-aligned box in 6-D pose space, every projection step of the
concrete camera model is replaced by its set-valued counterpart: trig and
reciprocal nonlinearities by linear enclosures, matrix products by polynomial
zonotope products.  The result per candidate box is an outer image (every
pixel any contained pose could switch on), one hull polytope per polygon and
one decomposed enclosure per vertex, ready for the online preimage step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .enclosure import enclose_elementwise
from .errors import DepthUncertain, DomainCrossesPole, InvisibleCandidate
from .geometry import (
    CameraParams,
    HPolytope2,
    Target,
    intrinsic_matrix,
    polytope_pixel_bitmap,
)
from .image import BinaryImage
from .sets import (
    Interval,
    MatPolyZonotope,
    PolyZonotope,
    index,
    interval_hull,
    make_box,
    mat_combine,
    mat_mul,
    mink_sum,
    split_linear_error,
    support_argmax,
    support_upper,
    tile_columns,
)

__all__ = [
    "POSE_IDS",
    "UncertainPose",
    "VertexEnclosure",
    "PoseCandidateArtifacts",
    "HullConfig",
    "enclose_rotation",
    "forward_enclose",
    "hull_enclose",
]

POSE_IDS = (1, 2, 3, 4, 5, 6)
MIN_DEPTH = 1e-9


@dataclass(frozen=True)
class UncertainPose:
    """Axis-aligned pose box as a polynomial zonotope over the six pose factors."""

    box: PolyZonotope

    def __post_init__(self):
        b = self.box
        if b.dim != 6 or b.n_dep != 6 or b.n_indep != 0:
            raise ValueError("uncertain pose must be a 6-d box with 6 dependent generators")
        if not np.array_equal(b.ids, np.array(POSE_IDS)):
            raise ValueError(f"pose factors must use ids {POSE_IDS}")
        if not np.array_equal(b.expmat, np.eye(6, dtype=np.int64)):
            raise ValueError("pose box exponent matrix must be the identity")
        off_diag = b.dep - np.diag(np.diag(b.dep))
        if np.any(off_diag != 0):
            raise ValueError("pose box generators must be diagonal")
        if np.any(np.diag(b.dep) < 0):
            raise ValueError("pose box radii must be non-negative")

    @staticmethod
    def from_interval(iv: Interval) -> "UncertainPose":
        if iv.dim != 6:
            raise ValueError("pose interval must be 6-d")
        return UncertainPose(make_box(iv, POSE_IDS))

    @staticmethod
    def from_center_radius(center, radius) -> "UncertainPose":
        """Bit-exact constructor (no interval round trip through lo/hi)."""
        center = np.asarray(center, dtype=float).reshape(6)
        radius = np.asarray(radius, dtype=float).reshape(6)
        return UncertainPose(PolyZonotope(
            center, np.diag(radius), np.zeros((6, 0)),
            np.eye(6, dtype=np.int64), np.array(POSE_IDS, dtype=np.int64)))

    @property
    def center(self) -> np.ndarray:
        return self.box.offset

    @property
    def radius(self) -> np.ndarray:
        return np.diag(self.box.dep)

    def interval(self) -> Interval:
        return Interval(self.center - self.radius, self.center + self.radius)

    def contains_pose(self, pose_vec, tol: float = 1e-9) -> bool:
        return self.interval().contains(np.asarray(pose_vec, dtype=float), tol)


@dataclass(frozen=True)
class VertexEnclosure:
    """One projected vertex set with its linear/error decomposition.

    ``lin_gen`` columns follow the pose dimensions; ``err_gens`` collects the
    higher-order dependent columns and all independent generators.  ``bitmap``
    marks every pixel whose area meets the interval hull of the set and
    ``fully_in_image`` records whether that hull stayed inside the frame
    (only then can the observed image be required to light the region).
    """

    set: PolyZonotope
    lin_offset: np.ndarray
    lin_gen: np.ndarray
    err_gens: np.ndarray
    bitmap: BinaryImage
    fully_in_image: bool

    @staticmethod
    def from_set(pz: PolyZonotope, cam: CameraParams) -> "VertexEnclosure":
        if pz.dim != 2:
            raise ValueError("vertex enclosure must be 2-d")
        lin, err = split_linear_error(pz, POSE_IDS)
        lin_gen = np.zeros((2, 6))
        for col in range(lin.n_dep):
            row = int(np.argmax(lin.expmat[:, col]))
            dim = int(lin.ids[row]) - 1
            lin_gen[:, dim] += lin.dep[:, col]
        err_gens = np.hstack([err.dep, err.indep])
        hull = interval_hull(pz)
        qx0 = int(np.ceil(hull.lo[0] - 0.5))
        qx1 = int(np.floor(hull.hi[0] + 0.5))
        qy0 = int(np.ceil(hull.lo[1] - 0.5))
        qy1 = int(np.floor(hull.hi[1] + 0.5))
        inside = qx0 >= 1 and qy0 >= 1 and qx1 <= cam.width and qy1 <= cam.height
        bitmap = BinaryImage.from_rect(cam.width, cam.height, qx0, qx1, qy0, qy1)
        return VertexEnclosure(pz, lin.offset, lin_gen, err_gens, bitmap, inside)

    def lin_radius(self) -> float:
        return float(np.linalg.norm(np.abs(self.lin_gen).sum(axis=1)))

    def err_radius(self) -> float:
        return float(np.linalg.norm(np.abs(self.err_gens).sum(axis=1)))


@dataclass(frozen=True)
class PoseCandidateArtifacts:
    pose: UncertainPose
    outer_image: BinaryImage
    polygon_images: tuple
    hulls: tuple
    vertex_enclosures: tuple
    error_ratio: float
    pixel_tests: int


@dataclass(frozen=True)
class HullConfig:
    """Support-direction heuristics for the per-polygon hull polytope.

    edges/corners give the 2v baseline directions; ``refine`` adds one round
    re-aimed at support-realizing points (3v total, beyond which returns
    diminish).
    """

    edges: bool = True
    corners: bool = True
    refine: bool = True


def enclose_rotation(u: UncertainPose) -> MatPolyZonotope:
    """Matrix set containing R(theta) for every angle triple in the box."""
    angles = index(u.box, slice(3, 6))
    sins = enclose_elementwise("sin", angles)
    coss = enclose_elementwise("cos", angles)

    def scalar(p: PolyZonotope, row: int) -> PolyZonotope:
        return index(p, [row]).prune_zero_indep()

    rx = mat_combine((3, 3), np.diag([1.0, 0, 0]), [
        (np.diag([0.0, 1, 1]), scalar(coss, 0)),
        (np.array([[0, 0, 0], [0, 0, -1], [0, 1, 0.0]]), scalar(sins, 0)),
    ])
    ry = mat_combine((3, 3), np.diag([0.0, 1, 0]), [
        (np.diag([1.0, 0, 1]), scalar(coss, 1)),
        (np.array([[0, 0, 1], [0, 0, 0], [-1, 0, 0.0]]), scalar(sins, 1)),
    ])
    rz = mat_combine((3, 3), np.diag([0.0, 0, 1]), [
        (np.diag([1.0, 1, 0]), scalar(coss, 2)),
        (np.array([[0, -1, 0], [1, 0, 0], [0, 0, 0.0]]), scalar(sins, 2)),
    ])
    return mat_mul(rx, mat_mul(ry, rz))


def _enclose_vertex_sets(target: Target, u: UncertainPose, cam: CameraParams):
    """Per-polygon lists of projected vertex sets (2-d polynomial zonotopes).

    Raises InvisibleCandidate when a vertex is certainly behind the camera
    for every pose in the box, DepthUncertain when depths straddle zero.
    """
    k_mat = MatPolyZonotope.constant(intrinsic_matrix(cam))
    rot = enclose_rotation(u)
    translation = index(u.box, slice(0, 3))
    out = []
    for poly in target.polygons:
        nv = poly.n_vertices
        moved = mink_sum(mat_mul(rot, MatPolyZonotope.constant(poly.vertices)),
                         tile_columns(translation, nv))
        ccf = mat_mul(k_mat, moved)
        vertex_sets = []
        for k in range(nv):
            col = ccf.col(k)
            depth = index(col, [2]).prune_zero_indep()
            hull = interval_hull(depth)
            if hull.hi[0] <= MIN_DEPTH:
                raise InvisibleCandidate(
                    f"vertex depth at most {hull.hi[0]:.3g}; box is behind the camera")
            if hull.lo[0] <= MIN_DEPTH:
                raise DepthUncertain(
                    f"vertex depth spans [{hull.lo[0]:.3g}, {hull.hi[0]:.3g}]")
            try:
                recip = enclose_elementwise("recip", depth)
            except DomainCrossesPole as exc:  # pragma: no cover - guarded above
                raise DepthUncertain(str(exc)) from exc
            v12 = index(col, [0, 1]).prune_zero_indep()
            pcf = mat_mul(v12.as_matrix().compact(),
                          recip.as_matrix().compact()).as_vector().prune_zero_indep()
            vertex_sets.append(pcf)
        out.append(vertex_sets)
    return out


def hull_enclose(vertex_sets, cfg: HullConfig = HullConfig()) -> HPolytope2:
    """Support-function polytope containing the hull of all vertex sets.

    Directions follow the offsets of consecutive vertex sets (edge normals),
    the centroid-to-vertex rays, and optionally one refinement round aimed
    orthogonal to the segment between support-realizing points.  Four
    axis-aligned rows are appended so the polytope is always bounded.
    """
    vertex_sets = list(vertex_sets)
    if len(vertex_sets) < 3:
        raise ValueError("a polygon needs at least three vertex sets")
    offsets = np.array([v.offset for v in vertex_sets])  # (v, 2)
    centroid = offsets.mean(axis=0)
    nv = len(vertex_sets)

    def away_from_centroid(d, anchor):
        if d @ (anchor - centroid) < 0:
            return -d
        return d

    directions = []
    if cfg.edges or cfg.refine:
        edge_dirs = []
        for k in range(nv):
            e = offsets[(k + 1) % nv] - offsets[k]
            ln = np.linalg.norm(e)
            if ln < 1e-12:
                edge_dirs.append(None)
                continue
            n = np.array([e[1], -e[0]]) / ln
            mid = 0.5 * (offsets[k] + offsets[(k + 1) % nv])
            edge_dirs.append(away_from_centroid(n, mid))
        if cfg.edges:
            directions += [d for d in edge_dirs if d is not None]
    if cfg.corners:
        for k in range(nv):
            d = offsets[k] - centroid
            ln = np.linalg.norm(d)
            if ln > 1e-12:
                directions.append(d / ln)
    if cfg.refine:
        for k in range(nv):
            if edge_dirs[k] is None:
                continue
            p1 = support_argmax(vertex_sets[k], edge_dirs[k])
            p2 = support_argmax(vertex_sets[(k + 1) % nv], edge_dirs[k])
            seg = p2 - p1
            ln = np.linalg.norm(seg)
            if ln < 1e-12:
                continue
            n = np.array([seg[1], -seg[0]]) / ln
            directions.append(away_from_centroid(n, 0.5 * (p1 + p2)))
    directions += [np.array([1.0, 0.0]), np.array([-1.0, 0.0]),
                   np.array([0.0, 1.0]), np.array([0.0, -1.0])]
    rows = np.array(directions)
    b = np.array([max(support_upper(v, row) for v in vertex_sets) for row in rows])
    return HPolytope2(rows, b)


def forward_enclose(target: Target, u: UncertainPose, cam: CameraParams,
                    hull_cfg: HullConfig = HullConfig()) -> PoseCandidateArtifacts:
    """Outer image plus per-polygon/vertex artifacts for one candidate box."""
    vertex_sets = _enclose_vertex_sets(target, u, cam)
    hulls = []
    polygon_images = []
    enclosures = []
    pixel_tests = 0
    for sets in vertex_sets:
        hull = hull_enclose(sets, hull_cfg)
        bmp, n_tests = polytope_pixel_bitmap(hull, cam)
        hulls.append(hull)
        polygon_images.append(bmp)
        pixel_tests += n_tests
        enclosures.append(tuple(VertexEnclosure.from_set(pz, cam) for pz in sets))
    outer = polygon_images[0]
    for bmp in polygon_images[1:]:
        outer = outer | bmp
    if outer.count() == 0:
        raise InvisibleCandidate("outer image is empty; no pose in the box sees the target")
    ratios = []
    for encl in enclosures:
        for ve in encl:
            lin = ve.lin_radius()
            err = ve.err_radius()
            ratios.append(0.0 if err == 0.0 else (np.inf if lin == 0.0 else err / lin))
    return PoseCandidateArtifacts(
        pose=u,
        outer_image=outer,
        polygon_images=tuple(polygon_images),
        hulls=tuple(hulls),
        vertex_enclosures=tuple(enclosures),
        error_ratio=float(np.mean(ratios)),
        pixel_tests=pixel_tests,
    )
