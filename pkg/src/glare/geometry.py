"""Exact planar primitives shared by every metric.

Orientation tests and intersection predicates work directly on the
double-precision cross product with no epsilon: exactly-zero doubles count as
collinear. The vectorized helpers evaluate the same arithmetic expressions as
the scalar functions so that every code path agrees bit-for-bit on the same
inputs.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Optional

import numpy as np

from .model import InputError, ParameterError

TWO_PI = 2.0 * math.pi


class Point(NamedTuple):
    x: float
    y: float


class Segment(NamedTuple):
    a: Point
    b: Point


def ccw(a, b, c) -> int:
    """Orientation of the triple (a, b, c).

    Returns +1 for a counter-clockwise turn, -1 for clockwise, 0 for
    collinear; the sign of the cross product (b - a) x (c - a).
    """
    cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    if cross > 0.0:
        return 1
    if cross < 0.0:
        return -1
    return 0


def properly_intersect(s1, s2) -> bool:
    """True iff the two segments intersect under the sign-product test.

    The test is ccw(a1,b1,a2) * ccw(a1,b1,b2) <= 0 and symmetrically for the
    other segment. Segments touching at an endpoint therefore count as
    intersecting (one factor is 0); callers that need adjacency filtering do
    it on vertex ids, not here.
    """
    (a1, b1), (a2, b2) = s1, s2
    if ccw(a1, b1, a2) * ccw(a1, b1, b2) > 0:
        return False
    if ccw(a2, b2, a1) * ccw(a2, b2, b1) > 0:
        return False
    return True


def proper_intersection_mask(ax, ay, bx, by, cx, cy, dx, dy):
    """Vectorized `properly_intersect` for segments (a, b) vs (c, d).

    All inputs broadcast together; returns a boolean array. Each straddle
    test compares the two cross products against zero separately instead of
    multiplying them, so extreme magnitudes cannot underflow the sign.
    """
    abx = bx - ax
    aby = by - ay
    c1 = abx * (cy - ay) - aby * (cx - ax)
    c2 = abx * (dy - ay) - aby * (dx - ax)
    cdx = dx - cx
    cdy = dy - cy
    c3 = cdx * (ay - cy) - cdy * (ax - cx)
    c4 = cdx * (by - cy) - cdy * (bx - cx)
    straddle_cd = ((c1 <= 0.0) & (c2 >= 0.0)) | ((c1 >= 0.0) & (c2 <= 0.0))
    straddle_ab = ((c3 <= 0.0) & (c4 >= 0.0)) | ((c3 >= 0.0) & (c4 <= 0.0))
    return straddle_cd & straddle_ab


def incident_angles(vx, vy, ux, uy):
    """Angle of the vector u - v from the positive x-axis, in [0, 2*pi)."""
    ang = np.arctan2(np.asarray(uy) - vy, np.asarray(ux) - vx)
    return np.where(ang < 0.0, ang + TWO_PI, ang)


def incident_angle(v, u) -> float:
    if v[0] == u[0] and v[1] == u[1]:
        raise InputError("zero-length edge: incident angle undefined")
    return float(incident_angles(v[0], v[1], u[0], u[1]))


def axis_angles(ax, ay, bx, by):
    """Undirected line angle of segment (a, b) with the x-axis, in [0, pi)."""
    ang = np.arctan2(np.asarray(by) - ay, np.asarray(bx) - ax)
    return np.mod(ang, np.pi)


def axis_angle(s) -> float:
    (ax, ay), (bx, by) = s
    if ax == bx and ay == by:
        raise InputError("zero-length segment: axis angle undefined")
    return float(axis_angles(ax, ay, bx, by))


def crossing_angles(theta1, theta2):
    """Acute angle between two line directions given as axis angles."""
    d = np.abs(np.asarray(theta1) - theta2)
    return np.minimum(d, np.pi - d)


def crossing_angle(theta1: float, theta2: float) -> float:
    if not (0.0 <= theta1 < math.pi and 0.0 <= theta2 < math.pi):
        raise ParameterError("axis angles must lie in [0, pi)")
    return float(crossing_angles(theta1, theta2))


def clip_to_strip(s, x_left: float, x_right: float) -> Optional[tuple[float, float]]:
    """Ordinates where the segment's line crosses both strip boundaries.

    Returns (l, r), the y values at x_left and x_right, when the segment's
    x-extent covers [x_left, x_right]; endpoints exactly on a boundary count
    as covering it. Returns None when the segment does not span the strip.
    """
    if not x_left < x_right:
        raise ParameterError("strip boundaries must satisfy x_left < x_right")
    (ax, ay), (bx, by) = s
    if min(ax, bx) > x_left or max(ax, bx) < x_right:
        return None
    # spanning a positive-width strip implies bx != ax
    slope = (by - ay) / (bx - ax)
    return (ay + (x_left - ax) * slope, ay + (x_right - ax) * slope)
