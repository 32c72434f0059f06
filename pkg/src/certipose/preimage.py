"""Constraining a pose box through its latent hypercube.

A pose candidate o + G alpha, alpha in [-1,1]^6, shares its factors with
every projected vertex set computed from it.  Requiring a vertex to land in
an output polytope {y : A y <= b} therefore yields linear constraints
C alpha <= d on the hypercube:

    C = A G_lin,      d = b - A o_lin + |A G_err| 1,

where (o_lin, G_lin) is the vertex set's linear part and G_err collects its
error generators.  Any pose whose true projection lies in the polytope
survives the constraint, so intersecting constraints from all vertices can
only trim poses that are provably inconsistent with the observation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forward import UncertainPose, VertexEnclosure
from .geometry import HPolytope2

__all__ = [
    "ConstrainedPoseSet",
    "preimage_constraints",
    "stack_constraints",
]

CONTAIN_TOL = 1e-9
_EMPTINESS_SWEEPS = 50


def preimage_constraints(vertex: VertexEnclosure, polytope: HPolytope2):
    """Latent-space constraints keeping every pose whose vertex lies in U."""
    a, b = polytope.A, polytope.b
    c = a @ vertex.lin_gen
    err = np.abs(a @ vertex.err_gens).sum(axis=1) if vertex.err_gens.size else 0.0
    d = b - a @ vertex.lin_offset + err
    return c, d


def stack_constraints(blocks):
    """Row-stack constraint blocks; intersection on the shared hypercube."""
    blocks = list(blocks)
    if not blocks:
        return np.zeros((0, 6)), np.zeros(0)
    cs, ds = zip(*blocks)
    for c in cs:
        if c.shape[1] != 6:
            raise ValueError("constraint blocks must have width 6")
    return np.vstack(cs), np.concatenate(ds)


@dataclass(frozen=True)
class ConstrainedPoseSet:
    """Pose box restricted by linear constraints on its latent hypercube.

    Represents {o + G alpha : alpha in [-1,1]^6, C alpha <= d}; the sentinel
    (C, d) = (0, -1) marks a candidate proven not to contain the true pose.
    """

    base: UncertainPose
    C: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.C, dtype=float).reshape(-1, 6)
        d = np.asarray(self.d, dtype=float).reshape(-1)
        if c.shape[0] != d.size:
            raise ValueError("constraint rows must match offsets")
        object.__setattr__(self, "C", c)
        object.__setattr__(self, "d", d)

    @staticmethod
    def unconstrained(base: UncertainPose) -> "ConstrainedPoseSet":
        return ConstrainedPoseSet(base, np.zeros((0, 6)), np.zeros(0))

    @staticmethod
    def infeasible(base: UncertainPose) -> "ConstrainedPoseSet":
        return ConstrainedPoseSet(base, np.zeros((1, 6)), np.array([-1.0]))

    @property
    def infeasible_flag(self) -> bool:
        zero_rows = ~np.any(self.C, axis=1)
        return bool(np.any(zero_rows & (self.d < 0)))

    # -- queries -------------------------------------------------------------

    def latent_of(self, pose_vec, tol: float = CONTAIN_TOL):
        """Latent coordinates of a pose, or None if outside the base box."""
        p = np.asarray(pose_vec, dtype=float).reshape(6)
        o = self.base.center
        g = self.base.radius
        alpha = np.zeros(6)
        for i in range(6):
            if g[i] > 0:
                alpha[i] = (p[i] - o[i]) / g[i]
            elif abs(p[i] - o[i]) > tol:
                return None
        if np.any(np.abs(alpha) > 1 + tol):
            return None
        return np.clip(alpha, -1.0, 1.0)

    def contains(self, pose_vec, tol: float = CONTAIN_TOL) -> bool:
        alpha = self.latent_of(pose_vec, tol)
        if alpha is None:
            return False
        if self.C.shape[0] == 0:
            return True
        return bool(np.all(self.C @ alpha <= self.d + tol))

    def is_certainly_empty(self) -> bool:
        """Sound emptiness check via interval constraint propagation.

        Returns True only with proof; False means possibly non-empty.
        """
        zero_rows = ~np.any(self.C, axis=1)
        if np.any(self.d[zero_rows] < 0):
            return True
        c = self.C[~zero_rows]
        d = self.d[~zero_rows]
        if c.shape[0] == 0:
            return False
        lo = -np.ones(6)
        hi = np.ones(6)
        for _ in range(_EMPTINESS_SWEEPS):
            changed = False
            for r in range(c.shape[0]):
                row, rhs = c[r], d[r]
                # interval evaluation of each term
                term_lo = np.minimum(row * lo, row * hi)
                total_lo = term_lo.sum()
                if total_lo > rhs:
                    return True
                for i in np.nonzero(row)[0]:
                    rest = total_lo - term_lo[i]
                    # row[i] * alpha_i <= rhs - rest
                    bound = (rhs - rest) / row[i]
                    if row[i] > 0 and bound < hi[i] - 1e-15:
                        hi[i] = bound
                        changed = True
                    elif row[i] < 0 and bound > lo[i] + 1e-15:
                        lo[i] = bound
                        changed = True
                    if lo[i] > hi[i]:
                        return True
                    term_lo[i] = min(row[i] * lo[i], row[i] * hi[i])
                    total_lo = term_lo.sum()
            if not changed:
                break
        return False

    def volume_estimate(self, n_samples: int, rng: np.random.Generator):
        """Monte Carlo volume and its standard error."""
        if n_samples < 1:
            raise ValueError("need at least one sample")
        box_vol = float(np.prod(2.0 * self.base.radius))
        if self.infeasible_flag or box_vol == 0.0:
            return 0.0, 0.0
        if self.C.shape[0] == 0:
            return box_vol, 0.0
        alpha = rng.uniform(-1.0, 1.0, size=(n_samples, 6))
        feasible = np.all(alpha @ self.C.T <= self.d, axis=1)
        p = feasible.mean()
        stderr = box_vol * float(np.sqrt(p * (1 - p) / n_samples))
        return box_vol * float(p), stderr

    # -- serialization --------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "o": self.base.center.tolist(),
            "Gdiag": self.base.radius.tolist(),
            "C": self.C.tolist(),
            "d": self.d.tolist(),
            "feasible": not self.infeasible_flag,
        }
