"""Room/measurement simulation with configurable error models.

Generates ground-truth rooms and sender positions, derives the ideal
direct/reflected signal measurements via mirror images, and corrupts them
with three error sources: von Mises angular noise on all directions,
Gaussian noise on the path-length differences, and random reassignment of
a fraction of reflections to the wrong direct signal.

Path-length differences are stored in meters (signal speed normalized to
1), so a 10 cm delta noise standard deviation is simply 0.1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from . import geometry
from .constants import EPS_DEGENERATE, PLACEMENT_CLEARANCE
from .errors import DegenerateInput


@dataclass
class Wall:
    """A planar simple polygon, described by its plane and vertex loop.

    ``unit_normal`` points from the receiver (origin) toward the wall, so
    every vertex satisfies ``vertex . unit_normal == distance >= 0``. The
    product ``distance * unit_normal`` is the wall's normal vector, i.e.
    the closest point of the wall plane to the receiver.
    """

    unit_normal: np.ndarray
    distance: float
    polygon: np.ndarray
    wall_id: int

    def __post_init__(self):
        self.unit_normal = geometry.as_unit3(self.unit_normal)
        self.polygon = np.asarray(self.polygon, dtype=float)
        if self.distance < 0:
            raise DegenerateInput("wall distance must be >= 0")
        if self.polygon.ndim != 2 or self.polygon.shape[1] != 3 or len(self.polygon) < 3:
            raise DegenerateInput("wall polygon needs >= 3 vertices of dim 3")
        offsets = self.polygon @ self.unit_normal - self.distance
        if np.max(np.abs(offsets)) > 1e-9:
            raise DegenerateInput("wall polygon vertices are not on the wall plane")
        if not self._is_simple():
            raise DegenerateInput("wall polygon is self-intersecting")

    @property
    def normal_vector(self) -> np.ndarray:
        return self.distance * self.unit_normal

    def _plane_coords(self, points: np.ndarray) -> np.ndarray:
        e1, e2 = geometry.orthonormal_basis_for(self.unit_normal)
        return np.column_stack([points @ e1, points @ e2])

    def _is_simple(self) -> bool:
        pts = self._plane_coords(self.polygon)
        n = len(pts)
        for i in range(n):
            a1, b1 = pts[i], pts[(i + 1) % n]
            for j in range(i + 1, n):
                if j == i or (j + 1) % n == i or (i + 1) % n == j:
                    continue  # adjacent edges share a vertex by construction
                a2, b2 = pts[j], pts[(j + 1) % n]
                if geometry._segments_intersect(a1, b1, a2, b2):
                    return False
        return True

    def contains_plane_point(self, point) -> bool:
        """True if ``point`` (assumed on the wall plane) is inside the polygon."""
        p = self._plane_coords(np.asarray(point, dtype=float)[None, :])[0]
        pts = self._plane_coords(self.polygon)
        inside = False
        n = len(pts)
        for i in range(n):
            x1, y1 = pts[i]
            x2, y2 = pts[(i + 1) % n]
            if (y1 > p[1]) != (y2 > p[1]):
                x_cross = x1 + (p[1] - y1) / (y2 - y1) * (x2 - x1)
                if p[0] < x_cross:
                    inside = not inside
        return inside


@dataclass
class Room:
    """A closed room: a set of walls around the receiver at the origin."""

    walls: list[Wall]
    receiver: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        if len(self.walls) < 4:
            raise DegenerateInput("a closed 3D room needs at least 4 walls")
        self.receiver = geometry.as_vec3(self.receiver)
        if np.any(self.receiver != 0.0):
            raise DegenerateInput("the receiver is assumed to sit at the origin")


@dataclass
class Measurement:
    """One direct/reflected signal pair.

    ``v`` is the unit direction of the direct signal, ``w`` the unit
    direction of the reflected signal and ``delta`` the positive
    path-length difference between the two in meters. ``true_wall_id`` is
    simulation ground truth (None once a reflection has been reassigned to
    the wrong sender) and is hidden from the algorithms.
    """

    v: np.ndarray
    w: np.ndarray
    delta: float
    sender_id: int
    true_wall_id: Optional[int] = None

    def __post_init__(self):
        self.v = geometry.as_unit3(self.v)
        self.w = geometry.as_unit3(self.w)
        if self.delta <= 0:
            raise DegenerateInput("delta must be positive")


@dataclass
class ErrorConfig:
    """Error model parameters; ``kappa=math.inf`` disables angular noise."""

    kappa: float = 131.312
    delta_sigma: float = 0.1
    misassign_rate: float = 0.05
    rng_seed: int = 0

    def __post_init__(self):
        if not self.kappa > 0:
            raise DegenerateInput("kappa must be positive")
        if self.delta_sigma < 0:
            raise DegenerateInput("delta_sigma must be >= 0")
        if not 0.0 <= self.misassign_rate <= 1.0:
            raise DegenerateInput("misassign_rate must be in [0, 1]")

    @classmethod
    def zero_error(cls, rng_seed: int = 0) -> "ErrorConfig":
        return cls(kappa=math.inf, delta_sigma=0.0, misassign_rate=0.0, rng_seed=rng_seed)


@dataclass
class GroundTruth:
    """Sender positions plus the room they were placed in."""

    sender_positions: dict[int, np.ndarray]
    room: Room


def make_cube_room(side: float) -> Room:
    """Axis-aligned cube of the given side length centered on the receiver."""
    if side <= 0:
        raise DegenerateInput("cube side must be positive")
    h = side / 2.0
    walls = []
    for axis in (0, 1, 2):
        for sign in (1.0, -1.0):
            normal = np.zeros(3)
            normal[axis] = sign
            u, v_ax = (axis + 1) % 3, (axis + 2) % 3
            corners = []
            for cu, cv in ((-h, -h), (h, -h), (h, h), (-h, h)):
                vert = np.zeros(3)
                vert[axis] = sign * h
                vert[u] = cu
                vert[v_ax] = cv
                corners.append(vert)
            walls.append(
                Wall(
                    unit_normal=normal,
                    distance=h,
                    polygon=np.array(corners),
                    wall_id=len(walls),
                )
            )
    return Room(walls=walls)


def place_senders(room: Room, count: int, seed) -> GroundTruth:
    """Sample sender positions uniformly in the room interior.

    Positions keep a 1 cm clearance from every wall plane and from the
    receiver so that no degenerate zero-length path can occur.
    Deterministic for a given seed.
    """
    if count < 1:
        raise DegenerateInput("need at least one sender")
    rng = np.random.default_rng(seed)
    verts = np.concatenate([w.polygon for w in room.walls])
    lo, hi = verts.min(axis=0), verts.max(axis=0)
    positions: dict[int, np.ndarray] = {}
    sender_id = 0
    while sender_id < count:
        p = rng.uniform(lo, hi)
        margins = [w.distance - float(np.dot(p, w.unit_normal)) for w in room.walls]
        if min(margins) < PLACEMENT_CLEARANCE:
            continue
        if float(np.linalg.norm(p)) < PLACEMENT_CLEARANCE:
            continue
        positions[sender_id] = p
        sender_id += 1
    return GroundTruth(sender_positions=positions, room=room)


def generate_measurements(truth: GroundTruth) -> list[Measurement]:
    """Exact (error-free) measurements: one reflection per wall per sender.

    For sender s and wall W the mirrored sender is s reflected across W's
    plane; the reflected signal arrives from the mirrored sender direction
    and the path-length difference is the extra distance traveled. A
    reflection is emitted only if the unfolded path actually pierces the
    wall polygon (always true in convex rooms, checked regardless).
    """
    out: list[Measurement] = []
    for sender_id in sorted(truth.sender_positions):
        s = truth.sender_positions[sender_id]
        norm_s = float(np.linalg.norm(s))
        v = s / norm_s
        for wall in truth.room.walls:
            mirrored = geometry.reflect_across_plane(s, wall.unit_normal, wall.distance)
            norm_m = float(np.linalg.norm(mirrored))
            w = mirrored / norm_m
            delta = norm_m - norm_s
            if delta <= EPS_DEGENERATE:
                continue  # sender on (or numerically at) the wall plane
            # Unfolded reflected path: straight segment mirrored -> origin.
            # It crosses the wall plane at mirrored * t.
            denom = float(np.dot(mirrored, wall.unit_normal))
            if abs(denom) <= EPS_DEGENERATE:
                continue
            t = wall.distance / denom
            if not 0.0 <= t <= 1.0:
                continue
            if not wall.contains_plane_point(t * mirrored):
                continue
            out.append(
                Measurement(
                    v=v.copy(),
                    w=w,
                    delta=delta,
                    sender_id=sender_id,
                    true_wall_id=wall.wall_id,
                )
            )
    return out


def perturb_direction(d, kappa: float, rng: np.random.Generator) -> np.ndarray:
    """Tilt a unit direction by a von Mises distributed angle.

    The deflection angle is drawn from vonmises(0, kappa) and applied about
    an axis chosen uniformly in the plane orthogonal to ``d``, giving an
    isotropic angular error. ``kappa=inf`` returns ``d`` unchanged.
    """
    if not kappa > 0:
        raise DegenerateInput("kappa must be positive")
    direction = geometry.as_unit3(d)
    if math.isinf(kappa):
        return direction
    theta = float(rng.vonmises(0.0, kappa))
    e1, e2 = geometry.orthonormal_basis_for(direction)
    phi = float(rng.uniform(0.0, 2.0 * math.pi))
    axis = math.cos(phi) * e1 + math.sin(phi) * e2
    rotated = geometry.rotate_about_axis(direction, axis, theta)
    return rotated / float(np.linalg.norm(rotated))


def apply_errors(ms: Sequence[Measurement], cfg: ErrorConfig) -> list[Measurement]:
    """Corrupt measurements with the configured error model.

    Every direction is passed through :func:`perturb_direction` (the direct
    signal of a sender is perturbed once and shared by all its
    measurements, since the receiver observes it once), deltas get additive
    Gaussian noise folded to positive values, and a fraction of reflections
    is reassigned to a uniformly chosen different sender's direct signal.
    Deterministic for a given ``cfg.rng_seed``.
    """
    rng = np.random.default_rng(cfg.rng_seed)
    perturbed_v: dict[int, np.ndarray] = {}
    noisy: list[Measurement] = []
    for m in ms:
        if m.sender_id not in perturbed_v:
            perturbed_v[m.sender_id] = perturb_direction(m.v, cfg.kappa, rng)
        w = perturb_direction(m.w, cfg.kappa, rng)
        delta = abs(m.delta + float(rng.normal(0.0, cfg.delta_sigma)))
        noisy.append(
            Measurement(
                v=perturbed_v[m.sender_id].copy(),
                w=w,
                delta=delta,
                sender_id=m.sender_id,
                true_wall_id=m.true_wall_id,
            )
        )

    n_swap = int(round(cfg.misassign_rate * len(noisy)))
    sender_ids = sorted(perturbed_v)
    if n_swap > 0 and len(sender_ids) > 1:
        chosen = rng.choice(len(noisy), size=n_swap, replace=False)
        for idx in sorted(int(i) for i in chosen):
            victim = noisy[idx]
            others = [sid for sid in sender_ids if sid != victim.sender_id]
            target = int(others[int(rng.integers(len(others)))])
            noisy[idx] = replace(
                victim,
                v=perturbed_v[target].copy(),
                sender_id=target,
                true_wall_id=None,
            )
    return noisy


def measurements_to_lines(ms: Iterable[Measurement], include_truth: bool = True) -> list[str]:
    """Serialize measurements to the line format used for audit dumps.

    Fields: ``sender_id v.x v.y v.z w.x w.y w.z delta [true_wall_id]``;
    a reassigned reflection's unknown wall is written as ``-1``.
    """
    lines = []
    for m in ms:
        parts = [str(m.sender_id)]
        parts += [repr(float(x)) for x in m.v]
        parts += [repr(float(x)) for x in m.w]
        parts.append(repr(float(m.delta)))
        if include_truth:
            parts.append(str(-1 if m.true_wall_id is None else m.true_wall_id))
        lines.append(" ".join(parts))
    return lines


def measurements_from_lines(lines: Iterable[str]) -> list[Measurement]:
    """Parse measurements from the audit line format."""
    out = []
    for line in lines:
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (8, 9):
            raise DegenerateInput(f"malformed measurement line: {line!r}")
        true_wall: Optional[int] = None
        if len(parts) == 9:
            wall = int(parts[8])
            true_wall = None if wall < 0 else wall
        out.append(
            Measurement(
                v=np.array([float(parts[1]), float(parts[2]), float(parts[3])]),
                w=np.array([float(parts[4]), float(parts[5]), float(parts[6])]),
                delta=float(parts[7]),
                sender_id=int(parts[0]),
                true_wall_id=true_wall,
            )
        )
    return out
