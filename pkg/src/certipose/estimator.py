"""Online certified pose estimation from one observed binary image.

Phase 1 filters candidate boxes whose outer image cannot explain the
observation (bit-parallel packed-word checks); phase 2 tightens each
survivor by witness-pixel constraints on its latent hypercube.  The union
of the constrained survivors is the certified estimate: it contains every
pose in the pose space that could have produced the image within the noise
budget.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np

from .errors import EmptyWitness, StoreMismatch
from .forward import PoseCandidateArtifacts
from .image import BinaryImage
from .preimage import ConstrainedPoseSet, preimage_constraints, stack_constraints
from .store import CandidateStore
from .witness import (
    collect_witnesses,
    is_standalone,
    tighten_boundary,
    triangle_filter,
    witness_polytope,
)

__all__ = ["EstimateConfig", "EstimatePiece", "CertifiedPoseEstimate",
           "filter_candidate", "refine_candidate", "estimate"]


@dataclass(frozen=True)
class EstimateConfig:
    noise_budget: int = 0
    volume_samples: int = 20_000
    seed: int = 0
    expected_target_fingerprint: str | None = None
    expected_camera: tuple | None = None  # (focal, width, height)


def filter_candidate(obs: BinaryImage, art: PoseCandidateArtifacts | None,
                     noise_budget: int = 0) -> bool:
    """Quick containment check of the observation in a candidate's enclosure.

    With noise, up to ``noise_budget`` observed on-pixels may fall outside
    the outer image.  Vertex regions that lie fully inside the frame must
    catch at least one observed on-pixel (edges are reliably detected).
    """
    if art is None:  # unresolved candidate: cannot be excluded
        return True
    if obs.count_outside(art.outer_image) > noise_budget:
        return False
    for enclosures in art.vertex_enclosures:
        for ve in enclosures:
            if ve.fully_in_image and not ve.bitmap.intersects(obs):
                return False
    return True


def refine_candidate(obs: BinaryImage, art: PoseCandidateArtifacts,
                     noise_budget: int = 0) -> ConstrainedPoseSet:
    """Witness-driven constraints for one surviving candidate.

    Every vertex whose region lies inside the frame contributes a block of
    constraints; an empty witness set anywhere proves the candidate cannot
    hold the true pose and yields the infeasible sentinel.
    """
    blocks = []
    n_polys = len(art.vertex_enclosures)
    for i, enclosures in enumerate(art.vertex_enclosures):
        other_polys = [art.polygon_images[j] for j in range(n_polys) if j != i]
        regions = [ve.bitmap for ve in enclosures]
        center = np.mean([ve.lin_offset for ve in enclosures], axis=0)
        for k, ve in enumerate(enclosures):
            if not ve.fully_in_image:
                continue  # the vertex may be off-frame: no information
            try:
                ws = collect_witnesses(obs, ve.bitmap)
            except EmptyWitness:
                return ConstrainedPoseSet.infeasible(art.pose)
            others = regions[:k] + regions[k + 1:]
            if is_standalone(ve.bitmap, others, other_polys):
                outward = ve.lin_offset - center
                norm = float(np.linalg.norm(outward))
                if norm > 1e-12:
                    outward = outward / norm
                    ws = tighten_boundary(ws, outward, noise_budget)
                    if noise_budget == 0:
                        tangent = np.array([-outward[1], outward[0]])
                        ws = triangle_filter(ws, tangent, obs)
            blocks.append(preimage_constraints(ve, witness_polytope(ws)))
    c, d = stack_constraints(blocks)
    return ConstrainedPoseSet(art.pose, c, d)


@dataclass(frozen=True)
class EstimatePiece:
    candidate_index: int
    pose_set: ConstrainedPoseSet
    volume: float
    volume_stderr: float


@dataclass(frozen=True)
class CertifiedPoseEstimate:
    pieces: tuple
    candidates_total: int
    candidates_after_filter: int
    time_filter_s: float
    time_refine_s: float
    norm_vol_filter: float
    norm_vol_ours: float
    seed: int

    def contains(self, pose_vec, tol: float = 1e-9) -> bool:
        return any(p.pose_set.contains(pose_vec, tol) for p in self.pieces)

    def to_json_dict(self, include_times: bool = True) -> dict:
        summary = {
            "candidates": self.candidates_total,
            "candidatesAfterFilter": self.candidates_after_filter,
            "normVolFilter": self.norm_vol_filter,
            "normVolOurs": self.norm_vol_ours,
            "seed": self.seed,
            "timeFilter_s": self.time_filter_s if include_times else 0.0,
            "timeRefine_s": self.time_refine_s if include_times else 0.0,
        }
        pieces = []
        for p in self.pieces:
            d = p.pose_set.to_json_dict()
            d["candidateIndex"] = p.candidate_index
            d["volumeEstimate"] = p.volume
            d["volumeStderr"] = p.volume_stderr
            pieces.append(d)
        return {"summary": summary, "pieces": pieces}

    def to_json(self, include_times: bool = True) -> str:
        return json.dumps(self.to_json_dict(include_times), sort_keys=True, indent=2)


def estimate(obs: BinaryImage, store: CandidateStore,
             cfg: EstimateConfig = EstimateConfig()) -> CertifiedPoseEstimate:
    """Certified pose estimate for one observed image."""
    if (obs.width, obs.height) != (store.camera.width, store.camera.height):
        raise StoreMismatch(
            f"image is {obs.width}x{obs.height}, store camera "
            f"{store.camera.width}x{store.camera.height}")
    if (cfg.expected_target_fingerprint is not None
            and cfg.expected_target_fingerprint != store.target_fingerprint):
        raise StoreMismatch("target fingerprint differs from configuration")
    if cfg.expected_camera is not None:
        got = (store.camera.focal, store.camera.width, store.camera.height)
        if tuple(cfg.expected_camera) != got:
            raise StoreMismatch(f"camera {got} differs from configured {cfg.expected_camera}")

    t0 = time.perf_counter()
    survivors = [i for i, rec in enumerate(store.records)
                 if filter_candidate(obs, rec.artifacts, cfg.noise_budget)]
    t_filter = time.perf_counter() - t0

    t0 = time.perf_counter()
    pieces = []
    space_vol = store.pose_space_volume()
    vol_filter = 0.0
    vol_ours = 0.0
    for idx in survivors:
        rec = store.records[idx]
        if rec.artifacts is None:
            piece_set = ConstrainedPoseSet.unconstrained(rec.pose)
        else:
            piece_set = refine_candidate(obs, rec.artifacts, cfg.noise_budget)
        rng = np.random.default_rng([cfg.seed, idx])
        vol, stderr = piece_set.volume_estimate(cfg.volume_samples, rng)
        pieces.append(EstimatePiece(idx, piece_set, vol, stderr))
        vol_filter += float(np.prod(2.0 * rec.pose.radius))
        vol_ours += vol
    t_refine = time.perf_counter() - t0

    return CertifiedPoseEstimate(
        pieces=tuple(pieces),
        candidates_total=len(store.records),
        candidates_after_filter=len(survivors),
        time_filter_s=t_filter,
        time_refine_s=t_refine,
        norm_vol_filter=vol_filter / space_vol,
        norm_vol_ours=vol_ours / space_vol,
        seed=cfg.seed,
    )
