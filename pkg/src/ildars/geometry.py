"""3D/2D geometric primitives shared by the whole pipeline.

Everything here is a pure function on plain numpy arrays: points and
directions are float arrays of shape (3,), 2D points of shape (2,).
Construction helpers validate shape/finiteness once so downstream code can
assume clean inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .constants import (
    CONDITION_LIMIT,
    EPS_COLLINEAR,
    EPS_DEGENERATE,
    EPS_PARALLEL,
    EPS_UNIT,
)
from .errors import (
    DegenerateConfiguration,
    DegenerateInput,
    ParallelLines,
)


def as_vec3(p) -> np.ndarray:
    """Validate and return ``p`` as a finite float array of shape (3,)."""
    v = np.asarray(p, dtype=float)
    if v.shape != (3,):
        raise DegenerateInput(f"expected a 3-vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise DegenerateInput(f"non-finite components in {v}")
    return v


def as_unit3(p) -> np.ndarray:
    """Validate ``p`` as a unit 3-vector (norm 1 within 1e-12)."""
    v = as_vec3(p)
    if abs(np.linalg.norm(v) - 1.0) > EPS_UNIT:
        raise DegenerateInput(f"vector {v} is not unit length")
    return v


def normalize(p) -> np.ndarray:
    """Return ``p / ||p||``; raises DegenerateInput for near-zero input."""
    v = as_vec3(p)
    n = np.linalg.norm(v)
    if n <= EPS_DEGENERATE:
        raise DegenerateInput("cannot normalize a (near-)zero vector")
    return v / n


def cross3(a, b) -> np.ndarray:
    """Cross product of two 3-vectors (faster than np.cross for scalars)."""
    return np.array(
        (
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        )
    )


def invert_point(p) -> np.ndarray:
    """Unit sphere inversion ``p -> p / ||p||^2``.

    Maps circles through the origin to straight lines and is an involution
    away from the origin.
    """
    v = as_vec3(p)
    nsq = float(np.dot(v, v))
    if nsq <= EPS_DEGENERATE * EPS_DEGENERATE:
        raise DegenerateInput("cannot invert a point at the origin")
    return v / nsq


def reflect_across_plane(p, unit_normal, distance: float) -> np.ndarray:
    """Mirror ``p`` across the plane ``{x : x . unit_normal = distance}``.

    Returns ``p - 2((p . n) - d) n``; an isometric involution.
    """
    v = as_vec3(p)
    n = as_unit3(unit_normal)
    return v - 2.0 * (float(np.dot(v, n)) - distance) * n


@dataclass
class Line3:
    """An infinite 3D line given by a point on it and a unit direction."""

    anchor: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        self.anchor = as_vec3(self.anchor)
        self.direction = as_unit3(self.direction)

    def point_at(self, t: float) -> np.ndarray:
        return self.anchor + t * self.direction


def closest_point_two_lines(g: Line3, h: Line3) -> np.ndarray:
    """Midpoint of the shortest segment connecting two non-parallel lines.

    For intersecting lines this is the intersection point; in general it is
    the least-squares point minimizing the summed squared distance to both
    lines.
    """
    d1, d2 = g.direction, h.direction
    b = float(np.dot(d1, d2))
    denom = 1.0 - b * b
    if abs(b) >= 1.0 - EPS_PARALLEL:
        raise ParallelLines("lines are (near-)parallel")
    r = g.anchor - h.anchor
    d = float(np.dot(d1, r))
    e = float(np.dot(d2, r))
    lam = (b * e - d) / denom
    mu = (e - b * d) / denom
    return 0.5 * (g.point_at(lam) + h.point_at(mu))


def closest_point_n_lines(lines: Sequence[Line3]) -> np.ndarray:
    """Least-squares point closest to all given lines.

    Solves the normal equations ``sum_i (I - d_i d_i^T) (x - a_i) = 0`` for
    the unique minimizer of the summed squared line distances.
    """
    if len(lines) < 2:
        raise DegenerateConfiguration("need at least two lines")
    A = np.zeros((3, 3))
    rhs = np.zeros(3)
    for line in lines:
        proj = np.eye(3) - np.outer(line.direction, line.direction)
        A += proj
        rhs += proj @ line.anchor
    if np.linalg.cond(A) > CONDITION_LIMIT:
        raise DegenerateConfiguration("line system is singular or ill-conditioned")
    return np.linalg.solve(A, rhs)


def rotate_about_axis(v, axis, angle: float) -> np.ndarray:
    """Rodrigues rotation of ``v`` by ``angle`` (radians) about ``axis``."""
    vec = as_vec3(v)
    ax = as_unit3(axis)
    c, s = np.cos(angle), np.sin(angle)
    return vec * c + np.cross(ax, vec) * s + ax * float(np.dot(ax, vec)) * (1.0 - c)


@dataclass
class Segment2:
    """A non-degenerate closed 2D line segment."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        if self.a.shape != (2,) or self.b.shape != (2,):
            raise DegenerateInput("segment endpoints must be 2-vectors")
        if not (np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.b))):
            raise DegenerateInput("non-finite segment endpoint")
        if np.array_equal(self.a, self.b):
            raise DegenerateInput("degenerate segment (a == b)")


def _orient(p, q, r) -> int:
    """Orientation sign of the triangle (p, q, r); 0 means collinear.

    The collinearity test is relative (the sine of the angle at p must
    exceed EPS_COLLINEAR): segments projected from nearly coplanar
    geometry produce huge, almost-cancelling cross products whose exact
    sign is numerical noise.
    """
    ax, ay = q[0] - p[0], q[1] - p[1]
    bx, by = r[0] - p[0], r[1] - p[1]
    cross = ax * by - ay * bx
    scale = np.hypot(ax, ay) * np.hypot(bx, by)
    if abs(cross) <= EPS_COLLINEAR * scale:
        return 0
    return 1 if cross > 0 else -1


def _in_box(p, q, r) -> bool:
    """True if ``r`` lies inside the axis-aligned box spanned by p, q."""
    return (
        min(p[0], q[0]) <= r[0] <= max(p[0], q[0])
        and min(p[1], q[1]) <= r[1] <= max(p[1], q[1])
    )


def _segments_intersect(p1, q1, p2, q2) -> bool:
    o1 = _orient(p1, q1, p2)
    o2 = _orient(p1, q1, q2)
    o3 = _orient(p2, q2, p1)
    o4 = _orient(p2, q2, q1)
    if o1 != o2 and o3 != o4:
        return True
    # Collinear endpoints: a shared point exists iff one lies in the other
    # segment's bounding box.
    if o1 == 0 and _in_box(p1, q1, p2):
        return True
    if o2 == 0 and _in_box(p1, q1, q2):
        return True
    if o3 == 0 and _in_box(p2, q2, p1):
        return True
    if o4 == 0 and _in_box(p2, q2, q1):
        return True
    return False


def segments_intersect_2d(s1: Segment2, s2: Segment2) -> bool:
    """True iff the closed segments share at least one point.

    Uses orientation predicates; collinear overlap and shared endpoints
    count as intersecting.
    """
    return _segments_intersect(s1.a, s1.b, s2.a, s2.b)


def closest_point_on_segment(p, a, b) -> np.ndarray:
    """Point of the closed segment [a, b] nearest to ``p``."""
    ab = b - a
    denom = float(np.dot(ab, ab))
    if denom <= EPS_DEGENERATE * EPS_DEGENERATE:
        return np.array(a, dtype=float)
    t = float(np.dot(p - a, ab)) / denom
    return a + min(1.0, max(0.0, t)) * ab


def closest_points_between_segments(a1, b1, a2, b2):
    """Closest points (one per segment) between closed segments.

    Standard clamped quadratic minimization; degenerate segments degrade to
    point cases. Returns ``(p1, p2)``.
    """
    d1 = b1 - a1
    d2 = b2 - a2
    r = a1 - a2
    a = float(np.dot(d1, d1))
    e = float(np.dot(d2, d2))
    f = float(np.dot(d2, r))
    tiny = EPS_DEGENERATE * EPS_DEGENERATE
    if a <= tiny and e <= tiny:
        return np.array(a1, dtype=float), np.array(a2, dtype=float)
    if a <= tiny:
        t = min(1.0, max(0.0, f / e))
        return np.array(a1, dtype=float), a2 + t * d2
    c = float(np.dot(d1, r))
    if e <= tiny:
        s = min(1.0, max(0.0, -c / a))
        return a1 + s * d1, np.array(a2, dtype=float)
    b = float(np.dot(d1, d2))
    denom = a * e - b * b
    s = min(1.0, max(0.0, (b * f - c * e) / denom)) if denom > tiny else 0.0
    t = (b * s + f) / e
    if t < 0.0:
        t = 0.0
        s = min(1.0, max(0.0, -c / a))
    elif t > 1.0:
        t = 1.0
        s = min(1.0, max(0.0, (b - c) / a))
    return a1 + s * d1, a2 + t * d2


def segment_segment_distance(a1, b1, a2, b2) -> float:
    """Minimum distance between two closed 3D segments."""
    p1, p2 = closest_points_between_segments(a1, b1, a2, b2)
    return float(np.linalg.norm(p1 - p2))


def point_segment_distance(p, a, b) -> float:
    """Minimum distance from a point to a closed 3D segment."""
    return float(np.linalg.norm(p - closest_point_on_segment(p, a, b)))


def orthonormal_basis_for(direction) -> tuple[np.ndarray, np.ndarray]:
    """Two unit vectors spanning the plane orthogonal to ``direction``."""
    d = as_unit3(direction)
    helper = np.zeros(3)
    helper[int(np.argmin(np.abs(d)))] = 1.0
    e1 = normalize(np.cross(d, helper))
    e2 = np.cross(d, e1)
    return e1, e2
