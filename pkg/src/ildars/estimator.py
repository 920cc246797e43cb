"""Scikit-learn style wrapper around the calibration/localization pipeline.

``fit`` runs the self-calibration stage (cluster the measurements, estimate
one wall per cluster); ``predict`` runs the localization stage. Fitting
once and predicting on later measurements mirrors the intended deployment:
the room geometry is learned offline, after which individual measurements
can be localized against the calibrated walls.
"""

from __future__ import annotations

import logging
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from . import geometry
from .calibration import PairSelection, WallEstimate, calibrate
from .clustering import (
    MeasurementCluster,
    circular_segment,
    cluster_by_gnomonic,
    cluster_by_inversion,
    invert_segment,
)
from .errors import DegenerateMeasurement
from .localization import (
    LocalizationMethod,
    SenderPosition,
    WallSelection,
    locate_all,
)
from .simulation import Measurement

log = logging.getLogger(__name__)

_CLUSTERING_VALUES = ("inversion", "gnomonic")


class IldarsLocalizer(BaseEstimator):
    """Localize signal senders from direct/reflected measurement pairs.

    Parameters
    ----------
    clustering : {"inversion", "gnomonic"}
        How measurements are grouped by reflecting wall.
    pair_selection : {"all", "disjoint", "overlapping"}
        Which measurement pairs feed the wall-direction average.
    wall_selection : {"largest", "narrowest", "average"}
        Which calibrated wall the single-wall methods use.
    method : {"map_to_normal", "reflection_geometry", "wall_direction",
              "closest_lines", "closest_lines_extended"}
        Localization method; the multi-wall method ignores
        ``wall_selection``.
    inversion_threshold : float
        Distance threshold of the greedy inversion clustering.
    max_sender_distance : float
        Range cap of the gnomonic candidate arcs; keep it comfortably
        above the farthest plausible sender.
    random_state : int or None
        Seed for the gnomonic hemisphere rotation.

    Attributes
    ----------
    clusters_ : list of MeasurementCluster
    wall_estimates_ : list of WallEstimate
    labels_ : ndarray of shape (n_measurements,)
        Cluster index of each fitted measurement.
    """

    def __init__(
        self,
        clustering: str = "inversion",
        pair_selection: str = "all",
        wall_selection: str = "largest",
        method: str = "closest_lines",
        inversion_threshold: float = 0.3,
        max_sender_distance: float = 4.0,
        random_state: Optional[int] = None,
    ):
        self.clustering = clustering
        self.pair_selection = pair_selection
        self.wall_selection = wall_selection
        self.method = method
        self.inversion_threshold = inversion_threshold
        self.max_sender_distance = max_sender_distance
        self.random_state = random_state

    def _validated(self):
        if self.clustering not in _CLUSTERING_VALUES:
            raise ValueError(f"clustering must be one of {_CLUSTERING_VALUES}")
        try:
            pair_selection = PairSelection(self.pair_selection)
            wall_selection = WallSelection(self.wall_selection)
            method = LocalizationMethod(self.method)
        except ValueError as exc:
            raise ValueError(str(exc)) from None
        if self.inversion_threshold < 0:
            raise ValueError("inversion_threshold must be >= 0")
        if not self.max_sender_distance > 0:
            raise ValueError("max_sender_distance must be positive")
        return pair_selection, wall_selection, method

    def fit(self, X: Sequence[Measurement], y=None) -> "IldarsLocalizer":
        """Cluster the measurements and calibrate one wall per cluster."""
        pair_selection, _, _ = self._validated()
        X = list(X)
        if not X:
            raise ValueError("cannot fit on an empty measurement set")
        if self.clustering == "inversion":
            clusters = cluster_by_inversion(X, self.inversion_threshold)
        else:
            clusters = cluster_by_gnomonic(
                X, self.random_state, max_sender_distance=self.max_sender_distance
            )
        estimates = calibrate(X, clusters, pair_selection)
        labels = np.empty(len(X), dtype=int)
        for cid, cluster in enumerate(clusters):
            for idx in cluster.measurement_indices:
                labels[idx] = cid
        self.measurements_ = X
        self.clusters_ = clusters
        self.wall_estimates_ = estimates
        self.labels_ = labels
        return self

    def predict(self, X: Optional[Sequence[Measurement]] = None) -> list[SenderPosition]:
        """Locate the senders of ``X`` (default: the fitted measurements).

        New measurements are matched to calibrated walls by inverting their
        candidate segment and picking the wall whose inverted normal point
        is closest; this is the same distance the inversion clustering
        uses, applied against the already calibrated walls.
        """
        if not hasattr(self, "wall_estimates_"):
            raise ValueError("this estimator is not fitted yet; call fit first")
        _, wall_selection, method = self._validated()
        if X is None:
            return locate_all(
                self.measurements_,
                self.clusters_,
                self.wall_estimates_,
                method,
                wall_selection,
            )
        X = list(X)
        members: dict[int, list[int]] = {}
        for idx, m in enumerate(X):
            wall = self._nearest_wall(m)
            if wall is None:
                log.debug("measurement %d matches no calibrated wall", idx)
                continue
            members.setdefault(wall, []).append(idx)
        clusters = []
        estimates = []
        for eid in sorted(members):
            source = self.wall_estimates_[eid]
            clusters.append(MeasurementCluster(tuple(members[eid])))
            estimates.append(
                WallEstimate(
                    u=source.u, distance=source.distance, source_cluster=len(clusters) - 1
                )
            )
        return locate_all(X, clusters, estimates, method, wall_selection)

    def fit_predict(self, X: Sequence[Measurement], y=None) -> list[SenderPosition]:
        return self.fit(X).predict()

    def _nearest_wall(self, m: Measurement) -> Optional[int]:
        try:
            seg = invert_segment(circular_segment(m))
        except DegenerateMeasurement:
            return None
        best, best_dist = None, np.inf
        for eid, estimate in enumerate(self.wall_estimates_):
            anchor = geometry.invert_point(estimate.n)
            dist = geometry.point_segment_distance(anchor, seg.a, seg.b)
            if dist < best_dist:
                best, best_dist = eid, dist
        return best
