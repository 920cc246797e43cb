"""Wall direction and distance estimation from measurement clusters.

Two measurements off the same wall determine the wall's direction through
a nested cross product; clusters average this over pairs of measurements.
Given the direction, each measurement independently determines the wall
distance, and the per-measurement values are averaged.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from . import geometry
from .errors import (
    AllMeasurementsDegenerate,
    AllPairsDegenerate,
    CoplanarPair,
    InsufficientMeasurements,
)
from .clustering import MeasurementCluster
from .simulation import Measurement

log = logging.getLogger(__name__)

_EPS_PAIR = 1e-9


class PairSelection(enum.Enum):
    """Which measurement pairs feed the wall-direction average."""

    ALL_PAIRS = "all"
    DISJOINT_PAIRS = "disjoint"
    OVERLAPPING_PAIRS = "overlapping"


@dataclass
class WallEstimate:
    """A calibrated wall: unit direction, scalar distance and their product."""

    u: np.ndarray
    distance: float
    source_cluster: int

    def __post_init__(self):
        self.u = geometry.as_unit3(self.u)

    @property
    def n(self) -> np.ndarray:
        return self.distance * self.u


def _sign_mismatch(x: np.ndarray, w1: np.ndarray, w2: np.ndarray) -> float:
    """Penalty used to orient the wall direction toward the reflections."""
    return abs(float(np.dot(x, w1)) - 1.0) + abs(float(np.dot(x, w2)) - 1.0)


def wall_direction_from_pair(m1: Measurement, m2: Measurement) -> np.ndarray:
    """Wall direction from two same-wall measurements.

    The nested cross product ``(v1 x w1) x (v2 x w2)`` lies along the wall
    direction whenever the four directions are not coplanar; the overall
    sign is fixed by choosing the candidate whose dot products with the
    reflected directions are closest to 1.
    """
    crossed = geometry.cross3(geometry.cross3(m1.v, m1.w), geometry.cross3(m2.v, m2.w))
    norm = float(np.linalg.norm(crossed))
    if norm <= _EPS_PAIR:
        raise CoplanarPair("nested cross product is degenerate")
    u = crossed / norm
    if _sign_mismatch(-u, m1.w, m2.w) < _sign_mismatch(u, m1.w, m2.w):
        return -u
    return u


def _pair_indices(count: int, selection: PairSelection) -> list[tuple[int, int]]:
    if selection is PairSelection.ALL_PAIRS:
        return list(combinations(range(count), 2))
    if selection is PairSelection.DISJOINT_PAIRS:
        return [(i, i + 1) for i in range(0, count - 1, 2)]
    return [(i, i + 1) for i in range(count - 1)]


def wall_direction_from_cluster(
    measurements: Sequence[Measurement],
    cluster: MeasurementCluster,
    selection: PairSelection,
) -> np.ndarray:
    """Average the pairwise wall direction over the selected pairs.

    Pairs yielding a coplanar configuration are skipped; the surviving unit
    vectors are averaged componentwise and renormalized.
    """
    indices = cluster.measurement_indices
    if len(indices) < 2:
        raise InsufficientMeasurements("need >= 2 measurements for a direction")
    total = np.zeros(3)
    successes = 0
    for i, j in _pair_indices(len(indices), selection):
        try:
            total += wall_direction_from_pair(
                measurements[indices[i]], measurements[indices[j]]
            )
            successes += 1
        except CoplanarPair:
            continue
    if successes == 0:
        raise AllPairsDegenerate("every measurement pair was coplanar")
    return geometry.normalize(total)


def wall_distance(
    measurements: Sequence[Measurement],
    cluster: MeasurementCluster,
    u: np.ndarray,
) -> float:
    """Average per-measurement wall distance given the wall direction ``u``.

    Each measurement yields a sender distance
    ``p = delta (w . b) / ((v - w) . b)`` with ``b = (u x v) x u`` (the
    component of v orthogonal to u); the wall distance is the midpoint of
    the sender ``p v`` and the mirrored sender ``(p + delta) w`` projected
    onto u. Measurements with vanishing denominators or non-positive p are
    skipped.
    """
    u = geometry.as_unit3(u)
    values = []
    for idx in cluster.measurement_indices:
        m = measurements[idx]
        b = geometry.cross3(geometry.cross3(u, m.v), u)
        denom = float(np.dot(m.v - m.w, b))
        if abs(denom) <= _EPS_PAIR:
            continue
        p = m.delta * float(np.dot(m.w, b)) / denom
        if p <= 0:
            continue
        sender = p * m.v
        mirrored = (p + m.delta) * m.w
        values.append(float(np.dot(0.5 * (sender + mirrored), u)))
    if not values:
        raise AllMeasurementsDegenerate("no measurement produced a usable distance")
    return float(np.mean(values))


def calibrate(
    measurements: Sequence[Measurement],
    clusters: Sequence[MeasurementCluster],
    selection: PairSelection,
) -> list[WallEstimate]:
    """Estimate one wall per cluster; drop clusters that cannot be solved.

    Fills ``cluster.wall_normal`` on each surviving cluster and returns the
    estimates. Failures (too few measurements, degenerate geometry,
    non-positive distance) are logged and the cluster is skipped.
    """
    estimates: list[WallEstimate] = []
    for cid, cluster in enumerate(clusters):
        try:
            u = wall_direction_from_cluster(measurements, cluster, selection)
            distance = wall_distance(measurements, cluster, u)
        except (InsufficientMeasurements, AllPairsDegenerate, AllMeasurementsDegenerate) as exc:
            log.debug("cluster %d dropped during calibration: %s", cid, exc)
            continue
        if distance <= 0:
            log.debug("cluster %d dropped: non-positive distance %g", cid, distance)
            continue
        estimate = WallEstimate(u=u, distance=distance, source_cluster=cid)
        cluster.wall_normal = estimate.n
        estimates.append(estimate)
    return estimates


def estimates_to_lines(estimates: Iterable[WallEstimate]) -> list[str]:
    """Serialize wall estimates as ``cluster_id u.x u.y u.z distance`` lines."""
    return [
        f"{e.source_cluster} {float(e.u[0])!r} {float(e.u[1])!r} {float(e.u[2])!r} "
        f"{float(e.distance)!r}"
        for e in estimates
    ]
