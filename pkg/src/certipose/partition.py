"""Hierarchical partitioning of the pose space into candidate boxes.

Starting from the full pose space, each box is pushed through the forward
enclosure; if the ratio of error-generator radius to linear-generator radius
exceeds the threshold, the box is bisected along its most sensitive
dimensions and the children are re-examined.  Boxes proven invisible are
dropped; boxes whose depth sign cannot be resolved are split too, and kept
unresolved (never filterable) if the depth limit is reached first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DepthUncertain, InvisibleCandidate
from .forward import (
    HullConfig,
    UncertainPose,
    _enclose_vertex_sets,
    forward_enclose,
)
from .geometry import CameraParams, Target
from .sets import Interval, split_linear_error
from .store import CandidateRecord, CandidateStore

__all__ = ["PoseSpace", "PartitionConfig", "partition", "sensitivity_scores",
           "precompute_store", "find_candidate"]

POSE_IDS_ARR = np.arange(1, 7)


@dataclass(frozen=True)
class PoseSpace:
    """Axis-aligned pose bounds: meters for x/y/z, radians for the angles."""

    bounds: Interval

    def __post_init__(self):
        if self.bounds.dim != 6:
            raise ValueError("pose space must be 6-d")
        if np.any(self.bounds.lo >= self.bounds.hi):
            raise ValueError("pose space must have lo < hi in every dimension")

    def root_box(self) -> UncertainPose:
        return UncertainPose.from_center_radius(self.bounds.center(), self.bounds.radius())

    def volume(self) -> float:
        return float(np.prod(self.bounds.hi - self.bounds.lo))


@dataclass(frozen=True)
class PartitionConfig:
    epsilon_rate: float = 0.35
    max_depth: int = 8
    split_dims: int = 2
    hull: HullConfig = HullConfig()

    def __post_init__(self):
        if self.epsilon_rate <= 0:
            raise ValueError("epsilon_rate must be positive")
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.split_dims not in (1, 2, 3, 6):
            raise ValueError("split_dims must be one of 1, 2, 3, 6")


def _mean_vertex_radii(target: Target, u: UncertainPose, cam: CameraParams):
    """Mean linear-column magnitudes and mean error radius over all vertices."""
    vertex_sets = _enclose_vertex_sets(target, u, cam)
    lin_cols = np.zeros(6)
    err = 0.0
    count = 0
    for sets in vertex_sets:
        for pz in sets:
            lin, rest = split_linear_error(pz, POSE_IDS_ARR)
            cols = np.zeros((2, 6))
            for col in range(lin.n_dep):
                row = int(np.argmax(lin.expmat[:, col]))
                cols[:, int(lin.ids[row]) - 1] += lin.dep[:, col]
            lin_cols += np.linalg.norm(cols, axis=0)
            err_gens = np.hstack([rest.dep, rest.indep])
            err += float(np.linalg.norm(np.abs(err_gens).sum(axis=1))) if err_gens.size else 0.0
            count += 1
    return lin_cols / count, err / count


def sensitivity_scores(target: Target, cam: CameraParams, u: UncertainPose) -> np.ndarray:
    """Per-dimension split priority for one candidate box.

    Combines each dimension's linear-generator magnitude with the error
    radius it is responsible for (measured by re-enclosing the box with
    that dimension collapsed to its center).
    """
    lin_cols, err_full = _mean_vertex_radii(target, u, cam)
    scores = lin_cols.copy()
    for j in range(6):
        if u.radius[j] == 0.0:
            continue
        collapsed_radius = u.radius.copy()
        collapsed_radius[j] = 0.0
        u_j = UncertainPose.from_center_radius(u.center, collapsed_radius)
        try:
            _, err_j = _mean_vertex_radii(target, u_j, cam)
        except (InvisibleCandidate, DepthUncertain):
            err_j = 0.0
        scores[j] += max(0.0, err_full - err_j)
    scores[u.radius == 0.0] = 0.0
    return scores


def _split(u: UncertainPose, dims) -> list[UncertainPose]:
    """Bisect the box along ``dims``; children tile the parent exactly."""
    children = [(u.center.copy(), u.radius.copy())]
    for dim in dims:
        nxt = []
        for center, radius in children:
            half = radius[dim] / 2.0
            for sign in (-1.0, 1.0):
                c = center.copy()
                r = radius.copy()
                c[dim] = center[dim] + sign * half
                r[dim] = half
                nxt.append((c, r))
        children = nxt
    return [UncertainPose.from_center_radius(c, r) for c, r in children]


def _widest_dims(u: UncertainPose, space: PoseSpace, n: int):
    rel = u.radius / space.bounds.radius()
    return list(np.argsort(rel)[::-1][:n])


def partition(target: Target, cam: CameraParams, space: PoseSpace,
              cfg: PartitionConfig = PartitionConfig()) -> list[CandidateRecord]:
    """Recursive bisection of the pose space into precomputed candidates."""
    queue = [(space.root_box(), 0)]
    records: list[CandidateRecord] = []
    while queue:
        box, depth = queue.pop()
        try:
            art = forward_enclose(target, box, cam, cfg.hull)
        except InvisibleCandidate:
            continue
        except DepthUncertain:
            if depth >= cfg.max_depth:
                # sound fallback: keep the box, it can never be filtered
                records.append(CandidateRecord(box, None, depth_capped=True))
                continue
            dims = _widest_dims(box, space, cfg.split_dims)
            queue.extend((child, depth + 1) for child in _split(box, dims))
            continue
        if art.error_ratio <= cfg.epsilon_rate or depth >= cfg.max_depth:
            records.append(CandidateRecord(
                box, art, depth_capped=art.error_ratio > cfg.epsilon_rate))
            continue
        scores = sensitivity_scores(target, cam, box)
        if not np.any(scores > 0):
            records.append(CandidateRecord(box, art))
            continue
        dims = list(np.argsort(scores)[::-1][:cfg.split_dims])
        dims = [d for d in dims if box.radius[d] > 0] or _widest_dims(box, space, 1)
        queue.extend((child, depth + 1) for child in _split(box, dims))
    records.sort(key=lambda rec: tuple(rec.pose.center) + tuple(rec.pose.radius))
    return records


def precompute_store(target: Target, cam: CameraParams, space: PoseSpace,
                     cfg: PartitionConfig = PartitionConfig()) -> CandidateStore:
    records = partition(target, cam, space, cfg)
    return CandidateStore(cam, target, space.bounds, cfg.epsilon_rate, cfg.max_depth,
                          cfg.split_dims, cfg.hull, tuple(records))


def find_candidate(store: CandidateStore, pose_vec, tol: float = 1e-12) -> int | None:
    """Index of the first candidate box containing the pose (ties: smallest index)."""
    for i, rec in enumerate(store.records):
        if rec.pose.contains_pose(pose_vec, tol):
            return i
    return None
