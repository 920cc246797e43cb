"""Benchmark harness: run every algorithm combination, rank the results.

A combination is one choice per pipeline stage, abbreviated by letters:

* clustering: I (inversion), G (gnomonic projection)
* direction averaging: A (all pairs), D (disjoint pairs), O (overlapping pairs)
* wall selection: L (largest cluster), N (narrowest cluster), U (unweighted average)
* localization: C (closest lines), E (closest lines extended),
  M (map to normal vector), R (reflection geometry), W (wall direction)

The multi-wall method E always uses every wall, so it is only paired with
selection U; that makes 2 x 3 x (4 x 3 + 1) = 78 valid combinations. Every
combination is evaluated on the same measurement sets, and per-sender
localization errors (offsets, in meters) are pooled over many seeded
experiments into per-combination statistics.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .calibration import PairSelection, calibrate
from .clustering import (
    MeasurementCluster,
    cluster_by_gnomonic,
    cluster_by_inversion,
)
from .errors import UnknownComboToken
from .localization import LocalizationMethod, WallSelection, locate_all
from .simulation import (
    ErrorConfig,
    apply_errors,
    generate_measurements,
    make_cube_room,
    measurements_to_lines,
    place_senders,
)

CLUSTERING_ORDER = "IG"
AVERAGING_ORDER = "ADO"
SELECTION_ORDER = "LNU"
LOCALIZATION_ORDER = "CEMRW"

AVERAGING_BY_TOKEN = {
    "A": PairSelection.ALL_PAIRS,
    "D": PairSelection.DISJOINT_PAIRS,
    "O": PairSelection.OVERLAPPING_PAIRS,
}
SELECTION_BY_TOKEN = {
    "L": WallSelection.LARGEST_CLUSTER,
    "N": WallSelection.NARROWEST_CLUSTER,
    "U": WallSelection.UNWEIGHTED_AVERAGE,
}
LOCALIZATION_BY_TOKEN = {
    "C": LocalizationMethod.CLOSEST_LINES,
    "E": LocalizationMethod.CLOSEST_LINES_EXTENDED,
    "M": LocalizationMethod.MAP_TO_NORMAL,
    "R": LocalizationMethod.REFLECTION_GEOMETRY,
    "W": LocalizationMethod.WALL_DIRECTION,
}
ALL_TOKENS = CLUSTERING_ORDER + AVERAGING_ORDER + SELECTION_ORDER + LOCALIZATION_ORDER


@dataclass(frozen=True)
class ComboId:
    """One algorithm combination, stored as its four letter tokens."""

    clustering: str
    averaging: str
    selection: str
    localization: str

    def __post_init__(self):
        if (
            self.clustering not in CLUSTERING_ORDER
            or self.averaging not in AVERAGING_ORDER
            or self.selection not in SELECTION_ORDER
            or self.localization not in LOCALIZATION_ORDER
        ):
            raise UnknownComboToken(f"invalid combination {self}")
        if self.localization == "E" and self.selection != "U":
            raise UnknownComboToken(
                "the multi-wall method implies the unweighted-average selection"
            )

    @property
    def token(self) -> str:
        return self.clustering + self.averaging + self.selection + self.localization

    def __str__(self) -> str:
        return self.token


def parse_combo_filter(filter_string: Optional[str]) -> dict[str, set[str]]:
    """Parse a comma-separated token filter into per-dimension sets.

    Tokens of the same dimension are alternatives (OR); different
    dimensions must all match (AND). Example: ``"I,A,N,C"`` keeps exactly
    one combination, ``"E"`` keeps the six multi-wall ones.
    """
    by_dimension: dict[str, set[str]] = {}
    if filter_string is None:
        return by_dimension
    for raw in filter_string.split(","):
        token = raw.strip().upper()
        if not token:
            continue
        for dimension, letters in (
            ("clustering", CLUSTERING_ORDER),
            ("averaging", AVERAGING_ORDER),
            ("selection", SELECTION_ORDER),
            ("localization", LOCALIZATION_ORDER),
        ):
            if token in letters:
                by_dimension.setdefault(dimension, set()).add(token)
                break
        else:
            raise UnknownComboToken(f"unknown combination token {token!r}")
    return by_dimension


def enumerate_combos(combo_filter: Optional[str] = None) -> list[ComboId]:
    """All valid combinations in canonical order, optionally filtered."""
    wanted = parse_combo_filter(combo_filter)
    combos = []
    for cl in CLUSTERING_ORDER:
        for av in AVERAGING_ORDER:
            for se in SELECTION_ORDER:
                for lo in LOCALIZATION_ORDER:
                    if lo == "E" and se != "U":
                        continue
                    combo = ComboId(cl, av, se, lo)
                    if wanted:
                        values = {
                            "clustering": cl,
                            "averaging": av,
                            "selection": se,
                            "localization": lo,
                        }
                        if any(values[dim] not in toks for dim, toks in wanted.items()):
                            continue
                    combos.append(combo)
    return combos


@dataclass(frozen=True)
class OffsetRecord:
    """Localization error of one sender under one combination."""

    experiment_id: int
    combo: ComboId
    sender_id: int
    offset: float
    failed: bool


@dataclass(frozen=True)
class ComboStats:
    """Aggregate offset statistics for one combination."""

    combo: ComboId
    mean: float
    median: float
    std: float
    q1: float
    q3: float
    n_samples: int
    n_failed: int

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1

    @property
    def whisker_low(self) -> float:
        return self.q1 - 1.5 * self.iqr

    @property
    def whisker_high(self) -> float:
        return self.q3 + 1.5 * self.iqr


@dataclass
class RunConfig:
    """Benchmark configuration; the defaults match the reference scenario.

    20 senders in a 2 m cube, von Mises angular noise with kappa 131.312,
    10 cm delta noise, 5% reflection misassignment, 500 experiments. Per
    experiment, child seeds for sender placement, error application and
    the gnomonic rotation are derived from ``master_seed`` and the
    experiment id via ``numpy.random.SeedSequence(master_seed,
    spawn_key=(experiment_id, k))`` for k = 0, 1, 2, so experiments are
    independently reproducible.
    """

    n_experiments: int = 500
    n_senders: int = 20
    room_side: float = 2.0
    kappa: float = 131.312
    delta_sigma: float = 0.1
    misassign_rate: float = 0.05
    inversion_threshold: float = 0.3
    master_seed: int = 1
    combo_filter: Optional[str] = None

    @classmethod
    def zero_error(cls, **overrides) -> "RunConfig":
        """Configuration with all three error sources disabled."""
        overrides.setdefault("kappa", math.inf)
        overrides.setdefault("delta_sigma", 0.0)
        overrides.setdefault("misassign_rate", 0.0)
        return cls(**overrides)


def _child_seed(cfg: RunConfig, experiment_id: int, stream: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(cfg.master_seed, spawn_key=(experiment_id, stream))


def measurement_set_hash(ms) -> str:
    """Content hash of a measurement set (used for same-inputs audits)."""
    payload = "\n".join(measurements_to_lines(ms, include_truth=True))
    return hashlib.sha256(payload.encode()).hexdigest()


def experiment_measurements(cfg: RunConfig, experiment_id: int):
    """Ground truth and corrupted measurement set of one experiment."""
    room = make_cube_room(cfg.room_side)
    truth = place_senders(room, cfg.n_senders, _child_seed(cfg, experiment_id, 0))
    error_cfg = ErrorConfig(
        kappa=cfg.kappa,
        delta_sigma=cfg.delta_sigma,
        misassign_rate=cfg.misassign_rate,
        rng_seed=int(_child_seed(cfg, experiment_id, 1).generate_state(1, np.uint64)[0]),
    )
    return truth, apply_errors(generate_measurements(truth), error_cfg)


def run_experiment(
    cfg: RunConfig,
    experiment_id: int,
    audit: Optional[dict] = None,
) -> list[OffsetRecord]:
    """Run every (filtered) combination on one simulated measurement set.

    The measurement set is generated once; clustering runs once per
    clustering algorithm and calibration once per (clustering, averaging)
    pair, shared by all downstream combinations. Emits one record per
    (combination, sender); senders the combination could not localize are
    flagged as failed. If ``audit`` is given, it maps each combination
    token to the content hash of the measurement set it consumed.
    """
    truth, ms = experiment_measurements(cfg, experiment_id)
    ms_hash = measurement_set_hash(ms)

    combos = enumerate_combos(cfg.combo_filter)
    base_clusters = {}
    if any(c.clustering == "I" for c in combos):
        base_clusters["I"] = cluster_by_inversion(ms, cfg.inversion_threshold)
    if any(c.clustering == "G" for c in combos):
        base_clusters["G"] = cluster_by_gnomonic(
            ms,
            _child_seed(cfg, experiment_id, 2),
            # Senders can sit at most a room diagonal away; twice the side
            # comfortably bounds the candidate range in any room.
            max_sender_distance=2.0 * cfg.room_side,
        )

    calibrations = {}
    for cl_token, clusters in base_clusters.items():
        for av_token, pair_selection in AVERAGING_BY_TOKEN.items():
            if not any(
                c.clustering == cl_token and c.averaging == av_token for c in combos
            ):
                continue
            own = [MeasurementCluster(c.measurement_indices) for c in clusters]
            estimates = calibrate(ms, own, pair_selection)
            calibrations[(cl_token, av_token)] = (own, estimates)

    records: list[OffsetRecord] = []
    for combo in combos:
        clusters, estimates = calibrations[(combo.clustering, combo.averaging)]
        positions = locate_all(
            ms,
            clusters,
            estimates,
            LOCALIZATION_BY_TOKEN[combo.localization],
            SELECTION_BY_TOKEN[combo.selection],
        )
        located = {sp.sender_id: sp.position for sp in positions}
        for sender_id in sorted(truth.sender_positions):
            if sender_id in located:
                offset = float(
                    np.linalg.norm(located[sender_id] - truth.sender_positions[sender_id])
                )
                records.append(OffsetRecord(experiment_id, combo, sender_id, offset, False))
            else:
                records.append(
                    OffsetRecord(experiment_id, combo, sender_id, math.nan, True)
                )
        if audit is not None:
            audit[combo.token] = ms_hash
    return records


def run(cfg: RunConfig, audit: Optional[dict] = None) -> list[OffsetRecord]:
    """Run all configured experiments and pool their records."""
    records: list[OffsetRecord] = []
    for experiment_id in range(cfg.n_experiments):
        records.extend(run_experiment(cfg, experiment_id, audit=audit))
    return records


def aggregate(records: Iterable[OffsetRecord]) -> list[ComboStats]:
    """Per-combination statistics over all non-failed offsets.

    Median uses the midpoint convention for even counts, quartiles linear
    interpolation, std the population convention (a single sample has
    std 0). Failed senders are excluded from the statistics but counted.
    """
    offsets: dict[ComboId, list[float]] = {}
    failures: dict[ComboId, int] = {}
    for record in records:
        offsets.setdefault(record.combo, [])
        failures.setdefault(record.combo, 0)
        if record.failed:
            failures[record.combo] += 1
        else:
            offsets[record.combo].append(record.offset)

    stats = []
    for combo, values in offsets.items():
        if values:
            arr = np.asarray(values)
            q1, q3 = np.percentile(arr, [25.0, 75.0])
            stats.append(
                ComboStats(
                    combo=combo,
                    mean=float(arr.mean()),
                    median=float(np.median(arr)),
                    std=float(arr.std()),
                    q1=float(q1),
                    q3=float(q3),
                    n_samples=len(values),
                    n_failed=failures[combo],
                )
            )
        else:
            stats.append(
                ComboStats(
                    combo=combo,
                    mean=math.nan,
                    median=math.nan,
                    std=math.nan,
                    q1=math.nan,
                    q3=math.nan,
                    n_samples=0,
                    n_failed=failures[combo],
                )
            )
    return stats


def rank_combos(stats: Sequence[ComboStats], sort_key: str) -> list[ComboStats]:
    """Stats sorted ascending by ``sort_key`` (mean/median/std).

    Combinations without samples sort last; ties keep the input (canonical)
    order.
    """
    if sort_key not in ("mean", "median", "std"):
        raise ValueError(f"unknown sort key {sort_key!r}")

    def key(s: ComboStats) -> float:
        value = getattr(s, sort_key)
        return math.inf if math.isnan(value) else value

    return sorted(stats, key=key)


def _format(value: float) -> str:
    return "nan" if math.isnan(value) else format(value, ".9g")


def _write_ranking_csv(path: Path, ranked: Sequence[ComboStats]) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "rank",
                "combo",
                "clustering",
                "averaging",
                "selection",
                "localization",
                "mean",
                "median",
                "std",
                "q1",
                "q3",
                "n",
                "failed",
            ]
        )
        for rank, s in enumerate(ranked, start=1):
            writer.writerow(
                [
                    rank,
                    s.combo.token,
                    s.combo.clustering,
                    s.combo.averaging,
                    s.combo.selection,
                    s.combo.localization,
                    _format(s.mean),
                    _format(s.median),
                    _format(s.std),
                    _format(s.q1),
                    _format(s.q3),
                    s.n_samples,
                    s.n_failed,
                ]
            )


def rank_and_report(
    stats: Sequence[ComboStats],
    output_dir,
    records: Optional[Sequence[OffsetRecord]] = None,
    config: Optional[RunConfig] = None,
) -> dict[str, Path]:
    """Write ranking CSVs, the JSON summary and the optional offsets dump.

    Produces ``ranking_mean.csv``, ``ranking_median.csv`` and
    ``ranking_std.csv`` (ascending by their key), plus ``summary.json``
    with all three rankings and, per sort key, the token-membership matrix
    over rank positions (which algorithm letters appear at each rank).
    When ``records`` is given, the raw per-sender offsets go to
    ``offsets.csv``. Returns the written paths.
    """
    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc

    written: dict[str, Path] = {}
    summary: dict = {"n_combinations": len(stats), "rankings": {}, "token_table": {}}
    if config is not None:
        summary["config"] = {
            "n_experiments": config.n_experiments,
            "n_senders": config.n_senders,
            "room_side": config.room_side,
            "kappa": config.kappa if not math.isinf(config.kappa) else "inf",
            "delta_sigma": config.delta_sigma,
            "misassign_rate": config.misassign_rate,
            "inversion_threshold": config.inversion_threshold,
            "master_seed": config.master_seed,
            "combo_filter": config.combo_filter,
        }

    for sort_key in ("mean", "median", "std"):
        ranked = rank_combos(stats, sort_key)
        path = out / f"ranking_{sort_key}.csv"
        _write_ranking_csv(path, ranked)
        written[f"ranking_{sort_key}"] = path
        summary["rankings"][sort_key] = [
            {
                "rank": rank,
                "combo": s.combo.token,
                "mean": None if math.isnan(s.mean) else s.mean,
                "median": None if math.isnan(s.median) else s.median,
                "std": None if math.isnan(s.std) else s.std,
                "q1": None if math.isnan(s.q1) else s.q1,
                "q3": None if math.isnan(s.q3) else s.q3,
                "n": s.n_samples,
                "failed": s.n_failed,
            }
            for rank, s in enumerate(ranked, start=1)
        ]
        summary["token_table"][sort_key] = {
            token: [1 if token in s.combo.token else 0 for s in ranked]
            for token in ALL_TOKENS
        }

    if records is not None:
        path = out / "offsets.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["experiment_id", "combo", "sender_id", "offset", "failed"])
            for r in records:
                writer.writerow(
                    [
                        r.experiment_id,
                        r.combo.token,
                        r.sender_id,
                        _format(r.offset),
                        int(r.failed),
                    ]
                )
        written["offsets"] = path

    summary_path = out / "summary.json"
    with summary_path.open("w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    written["summary"] = summary_path
    return written
