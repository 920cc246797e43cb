import math

import numpy as np
import pytest

from ildars.errors import DegenerateInput
from ildars.simulation import (
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


class TestMakeCubeRoom:
    def test_reference_cube(self):
        room = make_cube_room(2.0)
        assert len(room.walls) == 6
        assert all(w.distance == 1.0 for w in room.walls)
        normals = sorted(tuple(int(x) for x in w.unit_normal) for w in room.walls)
        assert normals == sorted(
            [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
        )

    def test_vertices_on_cube_surface(self):
        room = make_cube_room(2.0)
        for wall in room.walls:
            assert np.allclose(np.max(np.abs(wall.polygon), axis=1), 1.0)

    def test_side_scaling(self):
        assert all(w.distance == 2.0 for w in make_cube_room(4.0).walls)

    def test_invalid_side(self):
        with pytest.raises(DegenerateInput):
            make_cube_room(0.0)


class TestWallValidation:
    def test_off_plane_vertex_rejected(self):
        poly = np.array([[1, -1, -1], [1, 1, -1], [1.1, 1, 1], [1, -1, 1]], float)
        with pytest.raises(DegenerateInput):
            Wall(unit_normal=np.array([1.0, 0, 0]), distance=1.0, polygon=poly, wall_id=0)

    def test_self_intersecting_polygon_rejected(self):
        # Bowtie in the x=1 plane.
        poly = np.array([[1, -1, -1], [1, 1, 1], [1, 1, -1], [1, -1, 1]], float)
        with pytest.raises(DegenerateInput):
            Wall(unit_normal=np.array([1.0, 0, 0]), distance=1.0, polygon=poly, wall_id=0)

    def test_room_needs_four_walls(self):
        room = make_cube_room(2.0)
        with pytest.raises(DegenerateInput):
            Room(walls=room.walls[:3])


class TestPlaceSenders:
    def test_count_and_interior(self):
        room = make_cube_room(2.0)
        truth = place_senders(room, 20, seed=11)
        assert len(truth.sender_positions) == 20
        for p in truth.sender_positions.values():
            assert np.max(np.abs(p)) <= 1.0 - 0.01
            assert np.linalg.norm(p) >= 0.01

    def test_deterministic(self):
        room = make_cube_room(2.0)
        a = place_senders(room, 20, seed=5).sender_positions
        b = place_senders(room, 20, seed=5).sender_positions
        for k in a:
            assert np.array_equal(a[k], b[k])

    def test_count_validated(self):
        with pytest.raises(DegenerateInput):
            place_senders(make_cube_room(2.0), 0, seed=1)


class TestGenerateMeasurements:
    def test_reference_count(self, cube_truth):
        ms = generate_measurements(cube_truth)
        assert len(ms) == 20 * 6

    def test_collinear_mirror_case(self):
        room = make_cube_room(2.0)
        truth = GroundTruth({0: np.array([0.5, 0.0, 0.0])}, room)
        ms = generate_measurements(truth)
        wall_x = next(
            m for m in ms if np.allclose(room.walls[m.true_wall_id].unit_normal, [1, 0, 0])
        )
        np.testing.assert_allclose(wall_x.v, [1, 0, 0])
        np.testing.assert_allclose(wall_x.w, [1, 0, 0])
        assert wall_x.delta == pytest.approx(1.0, abs=1e-12)

    def test_delta_matches_mirror_excess(self, cube_truth):
        for m in generate_measurements(cube_truth):
            s = cube_truth.sender_positions[m.sender_id]
            wall = cube_truth.room.walls[m.true_wall_id]
            mirrored = s - 2 * (np.dot(s, wall.unit_normal) - wall.distance) * wall.unit_normal
            assert np.linalg.norm(mirrored) == pytest.approx(
                np.linalg.norm(s) + m.delta, abs=1e-12
            )

    def test_reflection_law(self, cube_truth, exact_measurements):
        # The wall plane is the perpendicular bisector of the sender and the
        # unfolded reflection point at distance ||s|| + delta along w.
        for m in exact_measurements:
            s = cube_truth.sender_positions[m.sender_id]
            wall = cube_truth.room.walls[m.true_wall_id]
            mirrored = (np.linalg.norm(s) + m.delta) * m.w
            midpoint = 0.5 * (s + mirrored)
            assert abs(np.dot(midpoint, wall.unit_normal) - wall.distance) < 1e-9
            chord = mirrored - s
            chord /= np.linalg.norm(chord)
            assert np.linalg.norm(np.cross(chord, wall.unit_normal)) < 1e-9

    def test_deltas_positive(self, exact_measurements):
        assert all(m.delta > 0 for m in exact_measurements)


class TestPerturbDirection:
    def test_infinite_concentration_is_identity(self, rng):
        d = np.array([0.0, 0.0, 1.0])
        out = perturb_direction(d, math.inf, rng)
        np.testing.assert_array_equal(out, d)

    def test_huge_concentration_tiny_error(self, rng):
        d = np.array([0.0, 1.0, 0.0])
        for _ in range(1000):
            out = perturb_direction(d, 1e9, rng)
            assert np.arccos(np.clip(np.dot(out, d), -1, 1)) < 0.01

    def test_reference_concentration_rms_deflection(self, rng):
        # For large concentration the deflection is nearly normal with
        # standard deviation kappa^-0.5, so the RMS angle matches it.
        kappa = 131.312
        d = np.array([1.0, 0.0, 0.0])
        n = 100_000
        sq = 0.0
        for _ in range(n):
            out = perturb_direction(d, kappa, rng)
            sq += np.arccos(np.clip(np.dot(out, d), -1, 1)) ** 2
        rms = math.sqrt(sq / n)
        assert rms == pytest.approx(kappa**-0.5, rel=0.05)

    def test_output_unit_norm(self, rng):
        d = np.array([3.0, 4.0, 0.0]) / 5.0
        for _ in range(100):
            out = perturb_direction(d, 5.0, rng)
            assert abs(np.linalg.norm(out) - 1.0) < 1e-12

    def test_kappa_validated(self, rng):
        with pytest.raises(DegenerateInput):
            perturb_direction(np.array([1.0, 0, 0]), 0.0, rng)


class TestApplyErrors:
    def test_zero_error_config_is_identity(self, exact_measurements):
        out = apply_errors(exact_measurements, ErrorConfig.zero_error(rng_seed=1))
        assert len(out) == len(exact_measurements)
        for a, b in zip(exact_measurements, out):
            assert np.linalg.norm(a.v - b.v) < 1e-9
            assert np.linalg.norm(a.w - b.w) < 1e-9
            assert abs(a.delta - b.delta) < 1e-9
            assert a.sender_id == b.sender_id
            assert a.true_wall_id == b.true_wall_id

    def test_misassignment_count(self, exact_measurements):
        cfg = ErrorConfig(kappa=math.inf, delta_sigma=0.0, misassign_rate=0.05, rng_seed=3)
        out = apply_errors(exact_measurements, cfg)
        moved = [
            (a, b)
            for a, b in zip(exact_measurements, out)
            if b.true_wall_id is None
        ]
        assert len(moved) == round(0.05 * len(exact_measurements)) == 6
        for original, swapped in moved:
            assert swapped.sender_id != original.sender_id
            # The reflection data traveled with the measurement.
            assert swapped.delta == original.delta

    def test_shared_direct_direction_per_sender(self, exact_measurements):
        cfg = ErrorConfig(kappa=131.312, delta_sigma=0.0, misassign_rate=0.0, rng_seed=9)
        out = apply_errors(exact_measurements, cfg)
        by_sender = {}
        for m in out:
            by_sender.setdefault(m.sender_id, []).append(m.v)
        for vs in by_sender.values():
            for v in vs[1:]:
                assert np.array_equal(v, vs[0])

    def test_deltas_stay_positive_under_noise(self, exact_measurements):
        cfg = ErrorConfig(kappa=math.inf, delta_sigma=0.1, misassign_rate=0.0, rng_seed=4)
        out = apply_errors(exact_measurements, cfg)
        assert all(m.delta > 0 for m in out)

    def test_deterministic(self, exact_measurements):
        cfg = ErrorConfig(rng_seed=77)
        a = apply_errors(exact_measurements, cfg)
        b = apply_errors(exact_measurements, cfg)
        for x, y in zip(a, b):
            assert np.array_equal(x.v, y.v)
            assert np.array_equal(x.w, y.w)
            assert x.delta == y.delta
            assert x.sender_id == y.sender_id

    def test_rate_validated(self):
        with pytest.raises(DegenerateInput):
            ErrorConfig(misassign_rate=1.5)


class TestSerialization:
    def test_roundtrip_with_truth(self, exact_measurements):
        lines = measurements_to_lines(exact_measurements)
        back = measurements_from_lines(lines)
        assert len(back) == len(exact_measurements)
        for a, b in zip(exact_measurements, back):
            assert np.array_equal(a.v, b.v)
            assert np.array_equal(a.w, b.w)
            assert a.delta == b.delta
            assert a.sender_id == b.sender_id
            assert a.true_wall_id == b.true_wall_id

    def test_roundtrip_without_truth(self, exact_measurements):
        lines = measurements_to_lines(exact_measurements[:5], include_truth=False)
        assert all(len(line.split()) == 8 for line in lines)
        back = measurements_from_lines(lines)
        assert all(m.true_wall_id is None for m in back)

    def test_misassigned_written_as_minus_one(self):
        m = Measurement(
            v=np.array([1.0, 0, 0]),
            w=np.array([0.0, 1, 0]),
            delta=0.5,
            sender_id=3,
            true_wall_id=None,
        )
        (line,) = measurements_to_lines([m])
        assert line.split()[-1] == "-1"
        (back,) = measurements_from_lines([line])
        assert back.true_wall_id is None

    def test_malformed_line_rejected(self):
        with pytest.raises(DegenerateInput):
            measurements_from_lines(["1 2 3"])
