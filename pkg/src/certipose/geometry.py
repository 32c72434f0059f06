"""Concrete 3-D target geometry, pinhole camera and exact rasterization.

Coordinate frames: target (TCF, meters) -> camera (CCF) -> pixel (PCF).
A point v is projected as K (R v + T) followed by the perspective divide.
Pixel (qx, qy) covers [qx-1/2, qx+1/2] x [qy-1/2, qy+1/2]; a pixel of a
concrete rendering is on iff a polygon overlaps that square with positive
area, while set-based pixel tests err on the side of turning pixels on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import BehindCamera, SingularReference
from .image import BinaryImage

__all__ = [
    "Pose",
    "CameraParams",
    "ConvexPolygon3",
    "Target",
    "HPolytope2",
    "intrinsic_matrix",
    "rotation_matrix",
    "project",
    "rasterize",
    "polygon_pixel_intersect",
    "polytope_box_overlap_outer",
    "polytope_pixel_bitmap",
    "edge_pixels",
    "apply_noise",
    "denoise",
    "convex_hull_points",
    "refpoint_reconstruct",
]

PLANE_TOL = 1e-9
MIN_DEPTH = 1e-9
OUTER_SLACK = 1e-9


# ---------------------------------------------------------------------------
# Plain value types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Pose:
    """Camera pose: position (m) and roll/pitch/yaw (rad)."""

    x: float
    y: float
    z: float
    theta_x: float
    theta_y: float
    theta_z: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.to_array())):
            raise ValueError("pose entries must be finite")

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.theta_x, self.theta_y, self.theta_z])

    @staticmethod
    def from_array(a) -> "Pose":
        a = np.asarray(a, dtype=float).reshape(6)
        return Pose(*a.tolist())


@dataclass(frozen=True)
class CameraParams:
    focal: float
    width: int
    height: int

    def __post_init__(self):
        if self.focal <= 0:
            raise ValueError("focal length must be positive")
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be >= 1")


@dataclass(frozen=True)
class ConvexPolygon3:
    """Planar convex polygon in TCF with counter-clockwise vertices.

    vertices: (3, v); the plane satisfies normal^T v = plane_offset.
    """

    vertices: np.ndarray
    normal: np.ndarray = field(default=None)
    plane_offset: float = field(default=None)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] != 3 or v.shape[1] < 3:
            raise ValueError("vertices must be a 3 x v array with v >= 3")
        normal, offset = self.normal, self.plane_offset
        if normal is None:
            normal, offset = _newell_plane(v)
        normal = np.asarray(normal, dtype=float).reshape(3)
        offset = float(offset)
        scale = max(1.0, float(np.abs(v).max()))
        if np.any(np.abs(normal @ v - offset) > PLANE_TOL * scale):
            raise ValueError("vertices are not coplanar with the stated plane")
        _check_ccw_convex(v, normal)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "plane_offset", offset)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[1]


def _newell_plane(v: np.ndarray):
    centered = v - v.mean(axis=1, keepdims=True)
    nrm = np.zeros(3)
    for i in range(v.shape[1]):
        nrm += np.cross(centered[:, i], centered[:, (i + 1) % v.shape[1]])
    ln = np.linalg.norm(nrm)
    if ln < 1e-12:
        raise ValueError("degenerate polygon: vertices are collinear")
    nrm /= ln
    return nrm, float(nrm @ v[:, 0])


def _check_ccw_convex(v: np.ndarray, normal: np.ndarray):
    m = v.shape[1]
    scale = max(1.0, float(np.abs(v).max())) ** 2
    for i in range(m):
        e1 = v[:, (i + 1) % m] - v[:, i]
        e2 = v[:, (i + 2) % m] - v[:, (i + 1) % m]
        if np.cross(e1, e2) @ normal < -PLANE_TOL * scale:
            raise ValueError("vertices must be convex in counter-clockwise order")


@dataclass(frozen=True)
class Target:
    polygons: tuple

    def __post_init__(self):
        polys = tuple(self.polygons)
        if not polys:
            raise ValueError("target needs at least one polygon")
        object.__setattr__(self, "polygons", polys)

    def __len__(self) -> int:
        return len(self.polygons)

    def to_json_dict(self) -> dict:
        return {"polygons": [{"vertices": p.vertices.T.tolist()} for p in self.polygons]}

    @staticmethod
    def from_json_dict(d: dict) -> "Target":
        polys = [ConvexPolygon3(np.asarray(p["vertices"], dtype=float).T)
                 for p in d["polygons"]]
        return Target(tuple(polys))

    def save_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)

    @staticmethod
    def load_json(path) -> "Target":
        with open(path) as fh:
            return Target.from_json_dict(json.load(fh))

    def fingerprint(self) -> str:
        import hashlib

        payload = json.dumps(self.to_json_dict(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()


@dataclass(frozen=True)
class HPolytope2:
    """2-D polytope {x : A x <= b}; rows of A must be nonzero."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float).reshape(-1, 2)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if A.shape[0] != b.size:
            raise ValueError("A rows must match b length")
        if A.shape[0] and np.any(np.all(np.abs(A) < 1e-15, axis=1)):
            raise ValueError("rows of A must be nonzero")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    def contains(self, pts, tol: float = 1e-9) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        return np.all(self.A @ pts.T <= self.b[:, None] + tol, axis=0)


# ---------------------------------------------------------------------------
# Camera model
# ---------------------------------------------------------------------------


def intrinsic_matrix(cam: CameraParams) -> np.ndarray:
    return np.array([
        [cam.focal, 0.0, cam.width / 2.0],
        [0.0, cam.focal, cam.height / 2.0],
        [0.0, 0.0, 1.0],
    ])


def rotation_matrix(theta_x: float, theta_y: float, theta_z: float) -> np.ndarray:
    cx, sx = np.cos(theta_x), np.sin(theta_x)
    cy, sy = np.cos(theta_y), np.sin(theta_y)
    cz, sz = np.cos(theta_z), np.sin(theta_z)
    rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]])
    ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    rz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]])
    return rx @ ry @ rz


def project(cam: CameraParams, pose: Pose, poly: ConvexPolygon3):
    """Project polygon vertices; returns (V_ccf 3 x v, V_pcf 2 x v)."""
    r = rotation_matrix(pose.theta_x, pose.theta_y, pose.theta_z)
    t = np.array([pose.x, pose.y, pose.z])
    v_ccf = intrinsic_matrix(cam) @ (r @ poly.vertices + t[:, None])
    depth = v_ccf[2, :]
    if np.any(depth <= MIN_DEPTH):
        raise BehindCamera(f"vertex depth {depth.min():.3g} <= {MIN_DEPTH}")
    v_pcf = v_ccf[:2, :] / depth
    return v_ccf, v_pcf


def render(cam: CameraParams, pose: Pose, target: Target) -> BinaryImage:
    """Concrete binary image of a target from one pose."""
    polys2d = [project(cam, pose, p)[1] for p in target.polygons]
    return rasterize(polys2d, cam)


# ---------------------------------------------------------------------------
# Exact rasterization (separating-axis tests on the pixel grid)
# ---------------------------------------------------------------------------


def _sat_axes(poly: np.ndarray) -> np.ndarray:
    """Outward-agnostic edge normals of a 2-D polygon, zero edges dropped."""
    edges = np.roll(poly, -1, axis=1) - poly
    normals = np.stack([-edges[1], edges[0]], axis=0)
    lens = np.linalg.norm(normals, axis=0)
    keep = lens > 1e-12
    return normals[:, keep] / lens[keep]


def _pixel_overlap_grid(poly: np.ndarray, w: int, h: int, strict: bool) -> np.ndarray:
    """Boolean (h, w) grid of pixels whose square meets the polygon.

    strict=True demands positive-area overlap (concrete rendering);
    strict=False counts touching as overlap (conservative masks).
    """
    out = np.zeros((h, w), dtype=bool)
    if poly.size == 0:
        return out
    lo = poly.min(axis=1)
    hi = poly.max(axis=1)
    # pixel q overlaps [lo, hi] iff q in [lo - 1/2, hi + 1/2]
    if strict:
        x0 = int(np.floor(lo[0] - 0.5)) + 1
        x1 = int(np.ceil(hi[0] + 0.5)) - 1
        y0 = int(np.floor(lo[1] - 0.5)) + 1
        y1 = int(np.ceil(hi[1] + 0.5)) - 1
    else:
        x0, x1 = int(np.ceil(lo[0] - 0.5)), int(np.floor(hi[0] + 0.5))
        y0, y1 = int(np.ceil(lo[1] - 0.5)), int(np.floor(hi[1] + 0.5))
    x0, x1 = max(x0, 1), min(x1, w)
    y0, y1 = max(y0, 1), min(y1, h)
    if x0 > x1 or y0 > y1:
        return out
    qx = np.arange(x0, x1 + 1, dtype=float)
    qy = np.arange(y0, y1 + 1, dtype=float)
    gx, gy = np.meshgrid(qx, qy)
    overlap = np.ones(gx.shape, dtype=bool)
    # bbox separation along the square's own axes
    for grid, (flo, fhi) in ((gx, (lo[0], hi[0])), (gy, (lo[1], hi[1]))):
        if strict:
            overlap &= (grid - 0.5 < fhi) & (flo < grid + 0.5)
        else:
            overlap &= (grid - 0.5 <= fhi) & (flo <= grid + 0.5)
    axes = _sat_axes(poly)
    for k in range(axes.shape[1]):
        a = axes[:, k]
        proj = a @ poly
        pmin, pmax = proj.min(), proj.max()
        centers = a[0] * gx + a[1] * gy
        r = 0.5 * (abs(a[0]) + abs(a[1]))
        if strict:
            overlap &= (centers - r < pmax) & (pmin < centers + r)
        else:
            overlap &= (centers - r <= pmax) & (pmin <= centers + r)
    out[y0 - 1:y1, x0 - 1:x1] = overlap
    return out


def polygon_pixel_intersect(poly2d, pixel, strict: bool = True) -> bool:
    """Exact separating-axis test between a convex polygon and one pixel square."""
    poly = np.asarray(poly2d, dtype=float).reshape(2, -1)
    qx, qy = pixel
    grid = _pixel_overlap_grid(poly - np.array([[qx - 1], [qy - 1]]), 1, 1, strict)
    return bool(grid[0, 0])


def rasterize(polys2d, cam: CameraParams) -> BinaryImage:
    """OR-combined exact rasterization of 2-D convex polygons."""
    acc = np.zeros((cam.height, cam.width), dtype=bool)
    for poly in polys2d:
        acc |= _pixel_overlap_grid(np.asarray(poly, dtype=float).reshape(2, -1),
                                   cam.width, cam.height, strict=True)
    return BinaryImage.from_bool(acc)


def edge_pixels(polys2d, cam: CameraParams) -> BinaryImage:
    """Pixels whose (closed) square meets any polygon boundary segment."""
    acc = np.zeros((cam.height, cam.width), dtype=bool)
    for poly in polys2d:
        poly = np.asarray(poly, dtype=float).reshape(2, -1)
        m = poly.shape[1]
        for i in range(m):
            seg = poly[:, [i, (i + 1) % m]]
            acc |= _pixel_overlap_grid(seg, cam.width, cam.height, strict=False)
    return BinaryImage.from_bool(acc)


# ---------------------------------------------------------------------------
# Conservative polytope-vs-pixel tests for outer images
# ---------------------------------------------------------------------------


def polytope_box_overlap_outer(poly: HPolytope2, center, half: float = 0.5) -> bool:
    """False only when one halfspace provably excludes the whole box.

    Over-approximates intersection: never returns False when the polytope
    truly meets the box, so outer images built from it stay sound.
    """
    c = np.asarray(center, dtype=float).reshape(2)
    lo = poly.A @ c - half * np.abs(poly.A).sum(axis=1)
    return bool(np.all(lo <= poly.b + OUTER_SLACK))


def polytope_pixel_bitmap(poly: HPolytope2, cam: CameraParams):
    """Bitmap of pixels passing the conservative overlap test.

    Returns (bitmap, n_tests); the polytope must be bounded (callers add
    axis-aligned rows).  n_tests counts pixel tests for complexity budgets.
    """
    # bounding box of the polytope from its axis-aligned rows, if present
    lo = np.full(2, -np.inf)
    hi = np.full(2, np.inf)
    for i in range(poly.A.shape[0]):
        a, b = poly.A[i], poly.b[i]
        for dim in range(2):
            unit = np.zeros(2)
            unit[dim] = 1.0
            if np.allclose(a, unit, atol=1e-12):
                hi[dim] = min(hi[dim], b)
            if np.allclose(a, -unit, atol=1e-12):
                lo[dim] = max(lo[dim], -b)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("polytope must carry axis-aligned bounding rows")
    x0 = max(int(np.ceil(lo[0] - 0.5 - OUTER_SLACK)), 1)
    x1 = min(int(np.floor(hi[0] + 0.5 + OUTER_SLACK)), cam.width)
    y0 = max(int(np.ceil(lo[1] - 0.5 - OUTER_SLACK)), 1)
    y1 = min(int(np.floor(hi[1] + 0.5 + OUTER_SLACK)), cam.height)
    arr = np.zeros((cam.height, cam.width), dtype=bool)
    if x0 > x1 or y0 > y1:
        return BinaryImage.from_bool(arr), 0
    qx = np.arange(x0, x1 + 1, dtype=float)
    qy = np.arange(y0, y1 + 1, dtype=float)
    gx, gy = np.meshgrid(qx, qy)
    ok = np.ones(gx.shape, dtype=bool)
    for i in range(poly.A.shape[0]):
        a, b = poly.A[i], poly.b[i]
        r = 0.5 * (abs(a[0]) + abs(a[1]))
        ok &= a[0] * gx + a[1] * gy - r <= b + OUTER_SLACK
    arr[y0 - 1:y1, x0 - 1:x1] = ok
    return BinaryImage.from_bool(arr), int(gx.size)


# ---------------------------------------------------------------------------
# Noise model and basic denoising
# ---------------------------------------------------------------------------


def apply_noise(img: BinaryImage, mu: int, rng: np.random.Generator,
                protected: BinaryImage) -> BinaryImage:
    """Flip at most mu pixels, never switching off a protected pixel.

    ``protected`` must be a subset of the on-pixels of ``img``.
    """
    if not protected.subset_of(img):
        raise ValueError("protected pixels must be on in the input image")
    if mu == 0:
        return img
    arr = img.to_bool().copy()
    prot = protected.to_bool()
    candidates = np.flatnonzero(~prot.reshape(-1))
    k = min(int(mu), candidates.size)
    flip = rng.choice(candidates, size=k, replace=False)
    flat = arr.reshape(-1)
    flat[flip] = ~flat[flip]
    return BinaryImage.from_bool(arr)


def denoise(img: BinaryImage) -> BinaryImage:
    """Drop on-pixels with no on 8-neighbor, repeated to a fixpoint."""
    arr = img.to_bool()
    while True:
        padded = np.pad(arr, 1)
        neigh = np.zeros(arr.shape, dtype=np.int32)
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if dx == 0 and dy == 0:
                    continue
                neigh += padded[1 + dy:1 + dy + arr.shape[0], 1 + dx:1 + dx + arr.shape[1]]
        isolated = arr & (neigh == 0)
        if not isolated.any():
            return BinaryImage.from_bool(arr)
        arr = arr & ~isolated


# ---------------------------------------------------------------------------
# 2-D hulls and reference-point reconstruction
# ---------------------------------------------------------------------------


def convex_hull_points(points) -> HPolytope2:
    """H-representation of the convex hull of a 2 x m point cloud.

    Degenerate (collinear or single-point) inputs become a thin bounded
    polytope inflated by 1e-9.
    """
    pts = np.asarray(points, dtype=float).reshape(2, -1)
    if pts.shape[1] < 1:
        raise ValueError("need at least one point")
    try:
        hull = ConvexHull(pts.T)
        A = hull.equations[:, :2]
        b = -hull.equations[:, 2]
        return HPolytope2(A, b)
    except (QhullError, ValueError):
        pass
    center = pts.mean(axis=1)
    centered = pts - center[:, None]
    u_dirs = np.linalg.svd(centered, full_matrices=True)[0].T
    rows, offs = [], []
    for k in range(2):
        d = u_dirs[k]
        proj = d @ pts
        rows += [d, -d]
        offs += [proj.max() + 1e-9, -(proj.min() - 1e-9)]
    return HPolytope2(np.array(rows), np.array(offs))


def refpoint_reconstruct(ref_points, p):
    """Solve R lambda = p for the reference-point coordinates of p."""
    r = np.asarray(ref_points, dtype=float).reshape(3, 3)
    p = np.asarray(p, dtype=float).reshape(3)
    lam, residual, rank, _ = np.linalg.lstsq(r, p, rcond=None)
    if np.linalg.norm(r @ lam - p) > 1e-9 * max(1.0, np.linalg.norm(p)):
        raise SingularReference("point is not in the span of the reference points")
    return lam
