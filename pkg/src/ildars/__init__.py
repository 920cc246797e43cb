"""Indoor localization of directed and reflected signals (ILDARS).

A receiver hears, for every sender, one direct signal and one wall
reflection per wall, each measurement being the triple (direct direction,
reflected direction, path-length difference). The package simulates such
measurements in a room with configurable errors, self-calibrates the walls
(clustering + direction/distance estimation), localizes the senders, and
benchmarks all 78 combinations of the pipeline's algorithm choices.
"""

from .calibration import (
    PairSelection,
    WallEstimate,
    calibrate,
    wall_direction_from_cluster,
    wall_direction_from_pair,
    wall_distance,
)
from .clustering import (
    CircularSegment,
    InvertedSegment,
    MeasurementCluster,
    circular_segment,
    cluster_by_gnomonic,
    cluster_by_inversion,
    gnomonic_project,
    invert_segment,
    project_to_sphere_latlon,
)
from .errors import IldarsError
from .estimator import IldarsLocalizer
from .harness import (
    ComboId,
    ComboStats,
    OffsetRecord,
    RunConfig,
    aggregate,
    enumerate_combos,
    rank_and_report,
    rank_combos,
    run,
    run_experiment,
)
from .localization import (
    ALL_WALLS,
    LocalizationMethod,
    SenderPosition,
    WallSelection,
    ildars3d_two_measurements,
    locate_all,
    locate_closest_lines,
    locate_closest_lines_extended,
    locate_map_to_normal,
    locate_reflection_geometry,
    locate_wall_direction,
    select_wall,
)
from .simulation import (
    ErrorConfig,
    GroundTruth,
    Measurement,
    Room,
    Wall,
    apply_errors,
    generate_measurements,
    make_cube_room,
    measurements_from_lines,
    measurements_to_lines,
    perturb_direction,
    place_senders,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_WALLS",
    "CircularSegment",
    "ComboId",
    "ComboStats",
    "ErrorConfig",
    "GroundTruth",
    "IldarsError",
    "IldarsLocalizer",
    "InvertedSegment",
    "LocalizationMethod",
    "Measurement",
    "MeasurementCluster",
    "OffsetRecord",
    "PairSelection",
    "Room",
    "RunConfig",
    "SenderPosition",
    "Wall",
    "WallEstimate",
    "WallSelection",
    "aggregate",
    "apply_errors",
    "calibrate",
    "circular_segment",
    "cluster_by_gnomonic",
    "cluster_by_inversion",
    "enumerate_combos",
    "generate_measurements",
    "gnomonic_project",
    "ildars3d_two_measurements",
    "invert_segment",
    "locate_all",
    "locate_closest_lines",
    "locate_closest_lines_extended",
    "locate_map_to_normal",
    "locate_reflection_geometry",
    "locate_wall_direction",
    "make_cube_room",
    "measurements_from_lines",
    "measurements_to_lines",
    "perturb_direction",
    "place_senders",
    "project_to_sphere_latlon",
    "rank_and_report",
    "rank_combos",
    "run",
    "run_experiment",
    "select_wall",
    "wall_direction_from_cluster",
    "wall_direction_from_pair",
    "wall_distance",
]
