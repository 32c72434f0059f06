"""Report figures rendered next to the delimited experiment output."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .estimator import CertifiedPoseEstimate
from .image import BinaryImage
from .store import CandidateStore

__all__ = ["save_volume_figure", "save_scene_figure"]


def save_volume_figure(rows, path) -> None:
    """Per-sample normalized volume, filter-only union vs refined estimate."""
    idx = [r.sample for r in rows]
    fig, ax = plt.subplots(figsize=(7, 3.2))
    ax.plot(idx, [100 * r.norm_vol_filter for r in rows], "o-", label="filter only",
            color="tab:gray", markersize=3)
    ax.plot(idx, [100 * r.norm_vol_ours for r in rows], "s-", label="refined",
            color="tab:blue", markersize=3)
    ax.set_xlabel("sample")
    ax.set_ylabel("normalized volume [%]")
    ax.set_yscale("log")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_scene_figure(obs: BinaryImage, est: CertifiedPoseEstimate | None,
                      store: CandidateStore | None, path) -> None:
    """Observed image with the best surviving candidate's vertex regions."""
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    ax.imshow(obs.to_bool(), cmap="gray_r", origin="upper",
              extent=(0.5, obs.width + 0.5, obs.height + 0.5, 0.5))
    if est is not None and store is not None and est.pieces:
        feasible = [p for p in est.pieces if not p.pose_set.infeasible_flag]
        if feasible:
            best = min(feasible, key=lambda p: p.volume)
            art = store.records[best.candidate_index].artifacts
            if art is not None:
                for enclosures in art.vertex_enclosures:
                    for ve in enclosures:
                        rad = np.abs(ve.lin_gen).sum(axis=1) + np.abs(ve.err_gens).sum(axis=1)
                        lo = ve.lin_offset - rad
                        wh = 2 * rad
                        ax.add_patch(plt.Rectangle(lo, wh[0], wh[1], fill=False,
                                                   edgecolor="tab:blue", linewidth=0.8))
    ax.set_xlabel("qx")
    ax.set_ylabel("qy")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
