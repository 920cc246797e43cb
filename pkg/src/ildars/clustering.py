"""Grouping measurements by reflecting wall.

Each measurement constrains its wall's normal point (the point of the wall
plane closest to the receiver) to a one-parameter curve: sweeping the
hypothetical sender distance p traces a circular arc whose supporting
circle passes through the origin. Two clustering strategies exploit this:

* unit-sphere inversion turns each arc into a finite straight segment
  (circles through the origin invert to lines), and greedy single-pass
  clustering groups nearby segments;
* gnomonic projection maps the radially normalized arcs (great-circle
  arcs) to straight 2D segments per hemisphere and takes connected
  components of their intersection graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import geometry
from .constants import EPS_COLLINEAR, EPS_HEMISPHERE, HEMISPHERE_CLIP_MARGIN
from .errors import DegenerateInput, DegenerateMeasurement, OutsideHemisphere
from .simulation import Measurement


@dataclass
class CircularSegment:
    """Locus of candidate wall-normal points for one measurement.

    ``point_at(p)`` is the wall-normal point if the sender sat at distance
    p along v: the wall is then the perpendicular bisector plane between
    the sender ``p v`` and the mirrored sender ``(p + delta) w``. The curve
    starts at ``(delta/2) w`` (p = 0) and approaches
    ``delta (w - v) / ||w - v||^2`` as p grows.
    """

    v: np.ndarray
    w: np.ndarray
    delta: float
    measurement_ref: int
    endpoint_near: np.ndarray = field(init=False)
    endpoint_far: np.ndarray = field(init=False)

    def __post_init__(self):
        diff = self.w - self.v
        self.endpoint_near = (self.delta / 2.0) * self.w
        self.endpoint_far = self.delta * diff / float(np.dot(diff, diff))

    def point_at(self, p: float) -> np.ndarray:
        chord = (p + self.delta) * self.w - p * self.v
        return (p * self.delta + self.delta**2 / 2.0) * chord / float(np.dot(chord, chord))


@dataclass
class InvertedSegment:
    """Image of a circular segment under unit-sphere inversion."""

    a: np.ndarray
    b: np.ndarray
    measurement_ref: int


@dataclass
class LineCluster:
    """Working cluster of inverted segments built by the greedy pass."""

    members: list[InvertedSegment]
    center: Optional[np.ndarray] = None


@dataclass
class MeasurementCluster:
    """Final cluster: indices into the measurement list, one wall each."""

    measurement_indices: tuple[int, ...]
    wall_normal: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.measurement_indices:
            raise DegenerateInput("a measurement cluster cannot be empty")
        self.measurement_indices = tuple(sorted(set(self.measurement_indices)))

    def __len__(self) -> int:
        return len(self.measurement_indices)


def circular_segment(m: Measurement, measurement_ref: int = 0) -> CircularSegment:
    """Construct the candidate-curve segment for one measurement."""
    if float(np.linalg.norm(m.w - m.v)) <= 1e-9:
        raise DegenerateMeasurement(
            "reflected direction coincides with direct direction"
        )
    if m.delta <= 0:
        raise DegenerateMeasurement("delta must be positive")
    return CircularSegment(v=m.v, w=m.w, delta=m.delta, measurement_ref=measurement_ref)


def invert_segment(cs: CircularSegment) -> InvertedSegment:
    """Invert both endpoints: ``a = 2 w / delta``, ``b = (w - v) / delta``.

    These are the algebraic simplifications of :func:`geometry.invert_point`
    applied to the circular segment endpoints.
    """
    return InvertedSegment(
        a=2.0 * cs.w / cs.delta,
        b=(cs.w - cs.v) / cs.delta,
        measurement_ref=cs.measurement_ref,
    )


def _cluster_distance(cluster: LineCluster, seg: InvertedSegment) -> float:
    if len(cluster.members) == 1:
        only = cluster.members[0]
        return geometry.segment_segment_distance(only.a, only.b, seg.a, seg.b)
    return geometry.point_segment_distance(cluster.center, seg.a, seg.b)


def _cluster_add(cluster: LineCluster, seg: InvertedSegment) -> None:
    cluster.members.append(seg)
    k = len(cluster.members)
    if k == 2:
        first = cluster.members[0]
        p1, p2 = geometry.closest_points_between_segments(first.a, first.b, seg.a, seg.b)
        cluster.center = 0.5 * (p1 + p2)
    elif k > 2:
        contact = geometry.closest_point_on_segment(cluster.center, seg.a, seg.b)
        cluster.center = (cluster.center * (k - 1) + contact) / k


def cluster_by_inversion(
    ms: Sequence[Measurement],
    threshold: float,
    stats: Optional[dict] = None,
) -> list[MeasurementCluster]:
    """Greedy single-pass clustering of inverted segments.

    Segments are visited in input order; each joins the first existing
    cluster whose distance is within ``threshold``, otherwise it seeds a
    new cluster. A cluster of one segment is compared segment-to-segment;
    larger clusters are represented by a running center point (initialized
    at the midpoint of the first two segments' closest points, then updated
    as the running mean of each joining segment's closest point).

    Measurements whose segment cannot be built (v == w) become singleton
    clusters. If ``stats`` is given, the number of distance evaluations is
    stored under ``"distance_evaluations"`` (worst case O(n^2)).
    """
    if threshold < 0:
        raise DegenerateInput("threshold must be >= 0")
    evaluations = 0
    clusters: list[LineCluster] = []
    degenerate: list[int] = []
    for idx, m in enumerate(ms):
        try:
            seg = invert_segment(circular_segment(m, idx))
        except DegenerateMeasurement:
            degenerate.append(idx)
            continue
        for cluster in clusters:
            evaluations += 1
            if _cluster_distance(cluster, seg) <= threshold:
                _cluster_add(cluster, seg)
                break
        else:
            clusters.append(LineCluster(members=[seg]))
    if stats is not None:
        stats["distance_evaluations"] = evaluations
    result = [
        MeasurementCluster(tuple(s.measurement_ref for s in c.members)) for c in clusters
    ]
    result.extend(MeasurementCluster((idx,)) for idx in degenerate)
    return result


def project_to_sphere_latlon(p) -> tuple[float, float]:
    """Latitude/longitude (radians) of ``p`` radially mapped to the sphere.

    Longitude uses the two-argument arctangent so every quadrant resolves;
    the poles get longitude 0 by convention.
    """
    unit = geometry.normalize(p)
    lat = math.asin(max(-1.0, min(1.0, float(unit[2]))))
    lon = math.atan2(float(unit[1]), float(unit[0]))
    return lat, lon


def gnomonic_project(point_latlon, center_latlon) -> tuple[float, float]:
    """Gnomonic (central) projection of a point onto a hemisphere's plane.

    ``cos(c)`` is the cosine of the angular distance to the hemisphere
    center; points outside the open hemisphere cannot be projected.
    """
    lat_p, lon_p = point_latlon
    lat_h, lon_h = center_latlon
    cos_c = math.sin(lat_h) * math.sin(lat_p) + math.cos(lat_h) * math.cos(lat_p) * math.cos(lon_p - lon_h)
    if cos_c <= EPS_HEMISPHERE:
        raise OutsideHemisphere("point is not inside the open hemisphere")
    x = math.cos(lat_p) * math.sin(lon_p - lon_h) / cos_c
    y = (
        math.cos(lat_h) * math.sin(lat_p)
        - math.sin(lat_h) * math.cos(lat_p) * math.cos(lon_p - lon_h)
    ) / cos_c
    return x, y


def icosahedron_vertices() -> np.ndarray:
    """The 12 unit icosahedron vertices: the evenly spaced hemisphere centers."""
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    verts = []
    for a, b in ((1.0, phi), (-1.0, phi), (1.0, -phi), (-1.0, -phi)):
        verts.append((0.0, a, b))
        verts.append((a, b, 0.0))
        verts.append((b, 0.0, a))
    arr = np.array(verts)
    return arr / np.linalg.norm(arr, axis=1, keepdims=True)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniformly random rotation matrix from a random unit quaternion."""
    q = rng.normal(size=4)
    w, x, y, z = q / np.linalg.norm(q)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def _clip_arc_to_hemisphere(a, b, center, cos_min: float):
    """Sub-arc of the minor great-circle arc a->b with cos(c) > cos_min.

    Returns the clipped unit endpoints or None if the arc misses the
    hemisphere cap entirely. The arc is parametrized as
    ``P(t) = a cos(t) + e2 sin(t)`` so the dot product with the center is a
    shifted cosine; the super-level set is solved in closed form.
    """
    cos_ab = float(np.dot(a, b))
    ortho = b - cos_ab * a
    sin_ab = float(np.linalg.norm(ortho))
    if sin_ab <= 1e-12:
        # Degenerate (point-like) arc.
        return (a, a) if float(np.dot(a, center)) > cos_min else None
    e2 = ortho / sin_ab
    span = math.atan2(sin_ab, cos_ab)
    fa = float(np.dot(a, center))
    fb = float(np.dot(e2, center))
    amp = math.hypot(fa, fb)
    if amp <= cos_min:
        return None
    phase = math.atan2(fb, fa)
    half_width = math.acos(max(-1.0, min(1.0, cos_min / amp)))
    for k in (-1, 0, 1):
        lo = max(0.0, phase - half_width + 2.0 * math.pi * k)
        hi = min(span, phase + half_width + 2.0 * math.pi * k)
        if lo < hi:
            pa = a * math.cos(lo) + e2 * math.sin(lo)
            pb = a * math.cos(hi) + e2 * math.sin(hi)
            return pa, pb
    return None


def _intersect_matrix(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Pairwise closed-segment intersection for segments P[i]->Q[i].

    Vectorized version of the orientation-predicate test in
    :mod:`ildars.geometry`; entry (i, j) is True iff segments i and j share
    a point. Degenerate (point) segments are handled by the collinear
    bounding-box branch.
    """
    d = Q - P
    d_len = np.hypot(d[:, 0], d[:, 1])
    rx_p = P[None, :, 0] - P[:, None, 0]
    ry_p = P[None, :, 1] - P[:, None, 1]
    rx_q = Q[None, :, 0] - P[:, None, 0]
    ry_q = Q[None, :, 1] - P[:, None, 1]
    c1 = d[:, None, 0] * ry_p - d[:, None, 1] * rx_p
    c2 = d[:, None, 0] * ry_q - d[:, None, 1] * rx_q
    # Relative collinearity tolerance, as in geometry._orient.
    tol1 = EPS_COLLINEAR * d_len[:, None] * np.hypot(rx_p, ry_p)
    tol2 = EPS_COLLINEAR * d_len[:, None] * np.hypot(rx_q, ry_q)
    o1 = np.where(np.abs(c1) <= tol1, 0.0, np.sign(c1))
    o2 = np.where(np.abs(c2) <= tol2, 0.0, np.sign(c2))
    general = (o1 != o2) & (o1.T != o2.T)

    lo = np.minimum(P, Q)
    hi = np.maximum(P, Q)
    in_box_p = (
        (lo[:, None, 0] <= P[None, :, 0])
        & (P[None, :, 0] <= hi[:, None, 0])
        & (lo[:, None, 1] <= P[None, :, 1])
        & (P[None, :, 1] <= hi[:, None, 1])
    )
    in_box_q = (
        (lo[:, None, 0] <= Q[None, :, 0])
        & (Q[None, :, 0] <= hi[:, None, 0])
        & (lo[:, None, 1] <= Q[None, :, 1])
        & (Q[None, :, 1] <= hi[:, None, 1])
    )
    touch = ((o1 == 0) & in_box_p) | ((o2 == 0) & in_box_q)
    return general | touch | touch.T


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def cluster_by_gnomonic(
    ms: Sequence[Measurement],
    seed,
    max_sender_distance: float = 4.0,
) -> list[MeasurementCluster]:
    """Cluster measurements via per-hemisphere gnomonic projection.

    The radially normalized circular segments are great-circle arcs.
    Twelve hemisphere centers (icosahedron vertices under a seeded random
    rotation) tile the sphere; each arc is clipped to every hemisphere it
    touches and projected to a 2D segment there. Connected components of
    the resulting intersection graph (a node per measurement, an edge when
    any hemisphere's projections intersect) are the clusters.

    ``max_sender_distance`` caps the hypothetical sender distance of the
    candidate arcs. The untruncated curve runs out to wall hypotheses from
    infinitely distant senders, and those tails cross arcs of other walls
    often enough to bridge clusters even on exact measurements; capping the
    range at anything comfortably above the real sender distances removes
    the tails without touching any genuine same-wall intersection. The
    default suits rooms up to ~4 m across (pass ``math.inf`` for the
    uncapped curve).
    """
    rng = np.random.default_rng(seed)
    centers = icosahedron_vertices() @ random_rotation(rng).T

    arcs: list[tuple[int, np.ndarray, np.ndarray]] = []
    for idx, m in enumerate(ms):
        try:
            cs = circular_segment(m, idx)
        except DegenerateMeasurement:
            continue  # stays an isolated node
        far = (
            cs.endpoint_far
            if math.isinf(max_sender_distance)
            else cs.point_at(max_sender_distance)
        )
        arcs.append((idx, geometry.normalize(cs.endpoint_near), geometry.normalize(far)))

    uf = _UnionFind(len(ms))
    for center in centers:
        center_latlon = project_to_sphere_latlon(center)
        refs: list[int] = []
        pts_a: list[tuple[float, float]] = []
        pts_b: list[tuple[float, float]] = []
        for idx, arc_a, arc_b in arcs:
            clip = _clip_arc_to_hemisphere(arc_a, arc_b, center, HEMISPHERE_CLIP_MARGIN)
            if clip is None:
                continue
            refs.append(idx)
            pts_a.append(gnomonic_project(project_to_sphere_latlon(clip[0]), center_latlon))
            pts_b.append(gnomonic_project(project_to_sphere_latlon(clip[1]), center_latlon))
        if len(refs) < 2:
            continue
        hits = _intersect_matrix(np.array(pts_a), np.array(pts_b))
        ii, jj = np.nonzero(np.triu(hits, k=1))
        for i, j in zip(ii.tolist(), jj.tolist()):
            if refs[i] != refs[j]:
                uf.union(refs[i], refs[j])

    groups: dict[int, list[int]] = {}
    for idx in range(len(ms)):
        groups.setdefault(uf.find(idx), []).append(idx)
    return [MeasurementCluster(tuple(groups[root])) for root in sorted(groups)]


def clusters_to_lines(clusters: Iterable[MeasurementCluster]) -> list[str]:
    """Serialize clusters as ``cluster_id: i,j,k`` audit lines."""
    return [
        f"{cid}: {','.join(str(i) for i in c.measurement_indices)}"
        for cid, c in enumerate(clusters)
    ]
