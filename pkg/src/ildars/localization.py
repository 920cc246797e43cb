"""Sender position computation from measurements and calibrated walls.

Four single-wall methods compute a sender distance p along the direct
direction (position ``p v``), one multi-wall method intersects the direct
ray with all unfolded reflection rays, and three wall-selection strategies
decide which calibrated wall (and hence which of a sender's reflections)
feeds the single-wall methods.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import geometry
from .calibration import WallEstimate, wall_direction_from_pair
from .clustering import MeasurementCluster
from .errors import (
    DegenerateConfiguration,
    DegenerateGeometry,
    DegenerateInput,
    NonPositiveDistance,
    NoWalls,
    ParallelLines,
)
from .simulation import Measurement

log = logging.getLogger(__name__)

_EPS_DENOM = 1e-9


class LocalizationMethod(enum.Enum):
    MAP_TO_NORMAL = "map_to_normal"
    REFLECTION_GEOMETRY = "reflection_geometry"
    WALL_DIRECTION = "wall_direction"
    CLOSEST_LINES = "closest_lines"
    CLOSEST_LINES_EXTENDED = "closest_lines_extended"


class WallSelection(enum.Enum):
    LARGEST_CLUSTER = "largest"
    NARROWEST_CLUSTER = "narrowest"
    UNWEIGHTED_AVERAGE = "average"


class _AllWalls:
    """Sentinel: average the sender position over every calibrated wall."""

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return "ALL_WALLS"


ALL_WALLS = _AllWalls()


@dataclass
class SenderPosition:
    """A located sender: position and distance along the direct direction."""

    sender_id: int
    position: np.ndarray
    p: float


def locate_map_to_normal(m: Measurement, n) -> SenderPosition:
    """Sender distance from the wall normal vector n.

    ``p = ((2n - delta w) . n) / ((v + w) . n)``: the mirrored receiver
    ``2n`` sees the reflection continue straight, which pins down where on
    the direct ray the sender sits.
    """
    n = geometry.as_vec3(n)
    norm_n = float(np.linalg.norm(n))
    if norm_n <= _EPS_DENOM:
        raise DegenerateGeometry("wall normal vector is (near-)zero")
    denom = float(np.dot(m.v + m.w, n))
    if abs(denom) <= _EPS_DENOM * norm_n:
        raise DegenerateGeometry("(v + w) is orthogonal to the wall normal")
    p = float(np.dot(2.0 * n - m.delta * m.w, n)) / denom
    if p <= 0:
        raise NonPositiveDistance(f"non-positive sender distance p={p:g}")
    return SenderPosition(m.sender_id, p * m.v, p)


def locate_reflection_geometry(m: Measurement, n) -> SenderPosition:
    """Sender distance from the reflection triangle around the wall normal.

    ``p = 2 (n . n) (w . b) / ((v . n)(w . b) + (v . b)(w . n))`` with
    ``b = (u x v) x u`` the component of v parallel to the wall plane.
    """
    n = geometry.as_vec3(n)
    norm_n = float(np.linalg.norm(n))
    if norm_n <= _EPS_DENOM:
        raise DegenerateGeometry("wall normal vector is (near-)zero")
    u = n / norm_n
    b = geometry.cross3(geometry.cross3(u, m.v), u)
    if float(np.linalg.norm(b)) <= _EPS_DENOM:
        raise DegenerateGeometry("direct direction is parallel to the wall normal")
    denom = float(np.dot(m.v, n)) * float(np.dot(m.w, b)) + float(
        np.dot(m.v, b)
    ) * float(np.dot(m.w, n))
    if abs(denom) <= _EPS_DENOM * norm_n:
        raise DegenerateGeometry("reflection-geometry denominator vanished")
    p = 2.0 * float(np.dot(n, n)) * float(np.dot(m.w, b)) / denom
    if p <= 0:
        raise NonPositiveDistance(f"non-positive sender distance p={p:g}")
    return SenderPosition(m.sender_id, p * m.v, p)


def locate_wall_direction(m: Measurement, u) -> SenderPosition:
    """Sender distance from the wall direction alone (distance unused).

    ``p = delta (w . b) / ((v - w) . b)`` with ``b = (u x v) x u``.
    """
    u = geometry.as_unit3(u)
    b = geometry.cross3(geometry.cross3(u, m.v), u)
    if float(np.linalg.norm(b)) <= _EPS_DENOM:
        raise DegenerateGeometry("direct direction is parallel to the wall direction")
    denom = float(np.dot(m.v - m.w, b))
    if abs(denom) <= _EPS_DENOM:
        raise DegenerateGeometry("wall-direction denominator vanished")
    p = m.delta * float(np.dot(m.w, b)) / denom
    if p <= 0:
        raise NonPositiveDistance(f"non-positive sender distance p={p:g}")
    return SenderPosition(m.sender_id, p * m.v, p)


def mirror_direction(w, n) -> np.ndarray:
    """Reflect direction ``w`` on the wall with normal vector ``n``."""
    n_hat = geometry.normalize(n)
    w = geometry.as_vec3(w)
    return w - 2.0 * float(np.dot(w, n_hat)) * n_hat


def locate_closest_lines(m: Measurement, n) -> SenderPosition:
    """Sender as the closest point between the direct and unfolded rays.

    The direct ray is ``x = lambda v``; mirroring the receiver to ``2n``
    and the reflected direction on the wall gives the second line
    ``x = 2n + mu w_m``. With exact inputs both lines pass through the
    sender.
    """
    n = geometry.as_vec3(n)
    if float(np.linalg.norm(n)) <= _EPS_DENOM:
        raise DegenerateGeometry("wall normal vector is (near-)zero")
    w_m = mirror_direction(m.w, n)
    g = geometry.Line3(np.zeros(3), m.v)
    h = geometry.Line3(2.0 * n, w_m / float(np.linalg.norm(w_m)))
    position = geometry.closest_point_two_lines(g, h)
    return SenderPosition(m.sender_id, position, float(np.dot(position, m.v)))


def locate_closest_lines_extended(
    sender_id: int,
    v,
    reflections: Sequence[tuple[np.ndarray, np.ndarray]],
) -> SenderPosition:
    """Sender as the least-squares point closest to all available lines.

    ``reflections`` pairs each reflected direction with its wall's normal
    vector; every pair contributes one unfolded line in addition to the
    direct ray.
    """
    if not reflections:
        raise DegenerateConfiguration("need at least one reflection with a wall")
    v = geometry.as_unit3(v)
    lines = [geometry.Line3(np.zeros(3), v)]
    for w, n in reflections:
        w_m = mirror_direction(w, n)
        lines.append(geometry.Line3(2.0 * geometry.as_vec3(n), geometry.normalize(w_m)))
    position = geometry.closest_point_n_lines(lines)
    return SenderPosition(sender_id, position, float(np.dot(position, v)))


def _cluster_mean_angle(
    measurements: Sequence[Measurement],
    cluster: MeasurementCluster,
    u: np.ndarray,
) -> float:
    total = 0.0
    for i in cluster.measurement_indices:
        dot = float(np.dot(measurements[i].w, u))
        total += math.acos(min(1.0, max(-1.0, dot)))
    return total / len(cluster.measurement_indices)


def select_wall(
    clusters: Sequence[MeasurementCluster],
    estimates: Sequence[WallEstimate],
    measurements: Sequence[Measurement],
    strategy: WallSelection,
    candidates: Optional[Sequence[int]] = None,
):
    """Pick the calibrated wall used by single-wall localization.

    ``LARGEST_CLUSTER`` takes the wall whose cluster has the most members,
    ``NARROWEST_CLUSTER`` the one minimizing the mean angle between its
    reflections and its wall normal direction; ties break toward the lower
    cluster id. ``UNWEIGHTED_AVERAGE`` returns the :data:`ALL_WALLS`
    sentinel: the caller averages positions over every wall.

    ``candidates`` restricts the choice to the given cluster ids (the
    clusters a particular sender has reflections in); by default every
    estimate competes.
    """
    if not estimates:
        raise NoWalls("no wall estimates available")
    if strategy is WallSelection.UNWEIGHTED_AVERAGE:
        return ALL_WALLS
    pool = estimates
    if candidates is not None:
        wanted = set(candidates)
        pool = [e for e in estimates if e.source_cluster in wanted]
        if not pool:
            raise NoWalls("no calibrated wall among the candidate clusters")
    if strategy is WallSelection.LARGEST_CLUSTER:
        return min(
            pool,
            key=lambda e: (-len(clusters[e.source_cluster]), e.source_cluster),
        )
    return min(
        pool,
        key=lambda e: (
            _cluster_mean_angle(measurements, clusters[e.source_cluster], e.u),
            e.source_cluster,
        ),
    )


def _locate_single_wall(
    method: LocalizationMethod, m: Measurement, estimate: WallEstimate
) -> SenderPosition:
    if method is LocalizationMethod.MAP_TO_NORMAL:
        return locate_map_to_normal(m, estimate.n)
    if method is LocalizationMethod.REFLECTION_GEOMETRY:
        return locate_reflection_geometry(m, estimate.n)
    if method is LocalizationMethod.WALL_DIRECTION:
        return locate_wall_direction(m, estimate.u)
    if method is LocalizationMethod.CLOSEST_LINES:
        return locate_closest_lines(m, estimate.n)
    raise ValueError(f"not a single-wall method: {method}")


def locate_all(
    measurements: Sequence[Measurement],
    clusters: Sequence[MeasurementCluster],
    estimates: Sequence[WallEstimate],
    method: LocalizationMethod,
    selection: WallSelection,
) -> list[SenderPosition]:
    """Locate every sender appearing in the measurement list.

    Measurements are grouped by direct signal (sender id), and every
    measurement is always evaluated against its own cluster's wall: the
    selection strategy decides which of a sender's reflections count.
    Largest/narrowest pick one cluster among those the sender has
    reflections in; the unweighted average keeps all of them. The
    multi-wall method uses all of a sender's reflections at once and
    ignores the selection strategy. A sender's position is the mean of its
    per-measurement positions; measurements that fail (degenerate
    geometry, non-positive distance) are skipped and senders with no
    surviving measurement are omitted (reported as failed by the caller).
    """
    estimate_by_cluster = {e.source_cluster: e for e in estimates}
    cluster_of: dict[int, int] = {}
    for cid, cluster in enumerate(clusters):
        for idx in cluster.measurement_indices:
            cluster_of[idx] = cid

    by_sender: dict[int, list[int]] = {}
    for idx, m in enumerate(measurements):
        by_sender.setdefault(m.sender_id, []).append(idx)

    results: list[SenderPosition] = []
    if method is LocalizationMethod.CLOSEST_LINES_EXTENDED:
        for sender_id in sorted(by_sender):
            indices = by_sender[sender_id]
            reflections = []
            for idx in indices:
                est = estimate_by_cluster.get(cluster_of.get(idx, -1))
                if est is not None:
                    reflections.append((measurements[idx].w, est.n))
            if not reflections:
                log.debug("sender %d: no reflection has a calibrated wall", sender_id)
                continue
            try:
                results.append(
                    locate_closest_lines_extended(
                        sender_id, measurements[indices[0]].v, reflections
                    )
                )
            except (DegenerateConfiguration, DegenerateInput):
                log.debug("sender %d: extended line solve degenerate", sender_id)
        return results

    if not estimates:
        return []
    narrowness: dict[int, float] = {}
    if selection is WallSelection.NARROWEST_CLUSTER:
        for e in estimates:
            narrowness[e.source_cluster] = _cluster_mean_angle(
                measurements, clusters[e.source_cluster], e.u
            )
    for sender_id in sorted(by_sender):
        indices = by_sender[sender_id]
        if selection is WallSelection.UNWEIGHTED_AVERAGE:
            usable = [
                (idx, estimate_by_cluster[cluster_of[idx]])
                for idx in indices
                if cluster_of.get(idx, -1) in estimate_by_cluster
            ]
        else:
            candidates = {
                cluster_of[idx]
                for idx in indices
                if cluster_of.get(idx, -1) in estimate_by_cluster
            }
            if not candidates:
                log.debug("sender %d: no reflection has a calibrated wall", sender_id)
                continue
            if selection is WallSelection.LARGEST_CLUSTER:
                chosen_cid = min(candidates, key=lambda c: (-len(clusters[c]), c))
            else:
                chosen_cid = min(candidates, key=lambda c: (narrowness[c], c))
            chosen = estimate_by_cluster[chosen_cid]
            usable = [
                (idx, chosen) for idx in indices if cluster_of.get(idx, -1) == chosen_cid
            ]
        positions = []
        for idx, est in usable:
            try:
                positions.append(_locate_single_wall(method, measurements[idx], est))
            except (DegenerateGeometry, NonPositiveDistance, ParallelLines):
                continue
        if not positions:
            continue
        mean_pos = np.mean([sp.position for sp in positions], axis=0)
        results.append(
            SenderPosition(
                sender_id, mean_pos, float(np.mean([sp.p for sp in positions]))
            )
        )
    return results


def ildars3d_two_measurements(
    m1: Measurement, m2: Measurement
) -> tuple[SenderPosition, SenderPosition]:
    """Exact two-measurement solution: both senders off one shared wall.

    Composes the pairwise wall direction with the wall-direction
    localization for each measurement. This is exact for two clean
    same-wall measurements in general position, but applying it to every
    measurement pair of a raw input set does not scale: pairs off
    different walls produce conflicting and spurious wall hypotheses, which
    is why the clustered pipeline exists.
    """
    u = wall_direction_from_pair(m1, m2)
    return locate_wall_direction(m1, u), locate_wall_direction(m2, u)


def positions_to_lines(
    positions: Iterable[SenderPosition],
    method: Optional[LocalizationMethod] = None,
    selection: Optional[WallSelection] = None,
) -> list[str]:
    """Serialize positions as ``sender_id x y z method selection`` lines."""
    method_tag = method.value if method is not None else "-"
    selection_tag = selection.value if selection is not None else "-"
    return [
        f"{sp.sender_id} {float(sp.position[0])!r} {float(sp.position[1])!r} "
        f"{float(sp.position[2])!r} {method_tag} {selection_tag}"
        for sp in positions
    ]
