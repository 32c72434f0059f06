"""Built-in planar targets.

All four targets live in the z = 0 plane of the target frame with vertices
counter-clockwise when viewed from +z.  Dimensions are meters and chosen so
the targets fill a useful share of the image across the default pose spaces
(roughly 30 to 40 m across, like large ground markings).
"""

from __future__ import annotations

import numpy as np

from .geometry import ConvexPolygon3, Target

__all__ = ["builtin_target", "builtin_target_names"]


def _rect(x0: float, x1: float, y0: float, y1: float) -> ConvexPolygon3:
    v = np.array([
        [x0, y0, 0.0],
        [x1, y0, 0.0],
        [x1, y1, 0.0],
        [x0, y1, 0.0],
    ]).T
    return ConvexPolygon3(v)


def _diamond(cx: float, cy: float, r: float) -> ConvexPolygon3:
    v = np.array([
        [cx + r, cy, 0.0],
        [cx, cy + r, 0.0],
        [cx - r, cy, 0.0],
        [cx, cy - r, 0.0],
    ]).T
    return ConvexPolygon3(v)


def _stripes() -> Target:
    # three parallel runway-style stripes, 6 m wide, 30 m long, 12 m apart
    return Target(tuple(_rect(cx - 3.0, cx + 3.0, -15.0, 15.0) for cx in (-12.0, 0.0, 12.0)))


def _letter() -> Target:
    # an L-shaped marking: vertical bar plus a foot
    return Target((
        _rect(-15.0, -7.0, -15.0, 15.0),
        _rect(-7.0, 13.0, -15.0, -7.0),
    ))


def _sign() -> Target:
    # bordered sign: a 34 m square ring (border width 5 m) around a diamond
    o, i = 17.0, 12.0
    return Target((
        _rect(-o, o, -o, -i),     # bottom border
        _rect(-o, o, i, o),       # top border
        _rect(-o, -i, -i, i),     # left border
        _rect(i, o, -i, i),       # right border
        _diamond(0.0, 0.0, 9.0),  # center marking
    ))


def _digits() -> Target:
    # two glyphs: a three-bar "E"-like digit and a square ring, side by side
    left = (
        _rect(-17.0, -3.0, 9.0, 13.0),    # top bar
        _rect(-17.0, -3.0, -2.0, 2.0),    # middle bar
        _rect(-17.0, -3.0, -13.0, -9.0),  # bottom bar
        _rect(-7.0, -3.0, -9.0, 9.0),     # right stem
    )
    ring = (
        _rect(3.0, 17.0, 9.0, 13.0),      # ring top
        _rect(3.0, 17.0, -13.0, -9.0),    # ring bottom
        _rect(3.0, 7.0, -9.0, 9.0),       # ring left
        _rect(13.0, 17.0, -9.0, 9.0),     # ring right
    )
    return Target(left + ring)


_BUILTINS = {
    "stripes": _stripes,
    "letter": _letter,
    "sign": _sign,
    "digits": _digits,
}


def builtin_target_names() -> list[str]:
    return sorted(_BUILTINS)


def builtin_target(name: str) -> Target:
    try:
        return _BUILTINS[name]()
    except KeyError:
        raise KeyError(f"unknown target {name!r}; available: {builtin_target_names()}") from None
