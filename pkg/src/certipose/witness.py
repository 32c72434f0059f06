"""Witness pixel selection and tightening.

Witness pixels are on-pixels of the observed image that are guaranteed,
under the noise model, to contain a projected target vertex.  The baseline
collects every on-pixel inside a vertex's precomputed region; when the
region overlaps no other vertex region or polygon hull, the set can be
tightened: keep the noise-budget-many outermost pixels plus the discrete
boundary of the rest, and for noise-free images drop pixels whose spanned
triangle cannot explain all remaining witnesses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyWitness
from .geometry import HPolytope2, convex_hull_points, polygon_pixel_intersect
from .image import BinaryImage

__all__ = [
    "WitnessSet",
    "collect_witnesses",
    "is_standalone",
    "tighten_boundary",
    "triangle_filter",
    "witness_polytope",
]


@dataclass(frozen=True)
class WitnessSet:
    pixels: tuple  # ((qx, qy), ...) sorted lexicographically
    vertex_region: BinaryImage
    tightened: str = "none"  # none | boundary | boundary+triangle

    def __post_init__(self):
        object.__setattr__(self, "pixels", tuple(sorted(tuple(p) for p in self.pixels)))
        if not self.pixels:
            raise EmptyWitness("witness set must be non-empty")

    def __len__(self) -> int:
        return len(self.pixels)


def collect_witnesses(obs: BinaryImage, vertex_region: BinaryImage) -> WitnessSet:
    """On-pixels of the observation inside the vertex region."""
    joint = obs & vertex_region
    if joint.count() == 0:
        raise EmptyWitness("no observed on-pixel inside the vertex region")
    return WitnessSet(tuple(joint.on_pixels()), vertex_region)


def is_standalone(vertex_region: BinaryImage, other_vertex_regions,
                  other_polygon_bitmaps) -> bool:
    """True iff the region meets no sibling vertex region and no other polygon."""
    for other in other_vertex_regions:
        if vertex_region.intersects(other):
            return False
    for other in other_polygon_bitmaps:
        if vertex_region.intersects(other):
            return False
    return True


def _neighbors8(px):
    qx, qy = px
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            if dx or dy:
                yield (qx + dx, qy + dy)


def tighten_boundary(w: WitnessSet, outward_dir, mu: int) -> WitnessSet:
    """Keep the mu outermost pixels plus the boundary of the remainder.

    ``outward_dir`` points from the polygon toward the vertex; the true
    vertex sits on that side of the lit region, but noise can add up to mu
    pixels beyond it, so those outermost pixels always stay.
    """
    d = np.asarray(outward_dir, dtype=float).reshape(2)
    pixels = list(w.pixels)
    if mu >= len(pixels):
        return WitnessSet(w.pixels, w.vertex_region, "boundary")
    proj = np.array([d @ np.array(p, dtype=float) for p in pixels])
    # mu outermost by projection; lexicographic pixel order breaks ties
    order = sorted(range(len(pixels)), key=lambda i: (-proj[i], pixels[i]))
    outer = {pixels[i] for i in order[:mu]}
    remaining = {pixels[i] for i in order[mu:]}
    boundary = {p for p in remaining
                if any(nb not in remaining for nb in _neighbors8(p))}
    return WitnessSet(tuple(outer | boundary), w.vertex_region, "boundary")


def _triangle_hull(pixels) -> np.ndarray:
    from scipy.spatial import ConvexHull

    corners = []
    for qx, qy in pixels:
        corners += [(qx - 0.5, qy - 0.5), (qx + 0.5, qy - 0.5),
                    (qx + 0.5, qy + 0.5), (qx - 0.5, qy + 0.5)]
    pts = np.array(corners)
    hull = ConvexHull(pts)  # pixel squares are full-dimensional, never degenerate
    return pts[hull.vertices].T  # counter-clockwise extreme points


def triangle_filter(w: WitnessSet, edge_tangent, obs: BinaryImage) -> WitnessSet:
    """Noise-free geometric tightening along the detected edge.

    Only valid with a zero noise budget on standalone vertices.  A surviving
    pixel's triangle (itself plus the two extreme witnesses along the edge
    tangent, expanded to full pixel squares) must touch every other witness
    pixel; a witness with exactly one lit 8-neighbor in the image pins the
    vertex by itself.
    """
    pixels = list(w.pixels)
    if len(pixels) == 1:
        return WitnessSet(w.pixels, w.vertex_region, "boundary+triangle")

    def lit(p):
        return (1 <= p[0] <= obs.width and 1 <= p[1] <= obs.height
                and obs.get(p[0], p[1]))

    single = [p for p in pixels if sum(1 for nb in _neighbors8(p) if lit(nb)) == 1]
    if len(single) == 1:
        return WitnessSet((single[0],), w.vertex_region, "boundary+triangle")

    t = np.asarray(edge_tangent, dtype=float).reshape(2)
    proj = np.array([t @ np.array(p, dtype=float) for p in pixels])
    left = min(range(len(pixels)), key=lambda i: (proj[i], pixels[i]))
    right = max(range(len(pixels)), key=lambda i: (proj[i], pixels[i]))
    survivors = []
    for i, q in enumerate(pixels):
        tri = _triangle_hull({q, pixels[left], pixels[right]})
        ok = all(polygon_pixel_intersect(tri, other, strict=False)
                 for j, other in enumerate(pixels) if j != i)
        if ok:
            survivors.append(q)
    if not survivors:  # numeric corner case: fall back to the unfiltered set
        survivors = pixels
    return WitnessSet(tuple(survivors), w.vertex_region, "boundary+triangle")


def witness_polytope(w: WitnessSet) -> HPolytope2:
    """Hull of the witness pixel squares (centers +- 1/2 per axis)."""
    corners = []
    for qx, qy in w.pixels:
        corners += [(qx - 0.5, qy - 0.5), (qx + 0.5, qy - 0.5),
                    (qx + 0.5, qy + 0.5), (qx - 0.5, qy + 0.5)]
    return convex_hull_points(np.array(corners).T)
