import numpy as np
import pytest

from ildars import generate_measurements, make_cube_room, place_senders


@pytest.fixture
def cube_truth():
    """Ground truth for the reference 2 m cube with 20 senders."""
    room = make_cube_room(2.0)
    return place_senders(room, 20, seed=20240501)


@pytest.fixture
def exact_measurements(cube_truth):
    """Error-free measurements for the reference scenario (120 of them)."""
    return generate_measurements(cube_truth)


@pytest.fixture
def rng():
    return np.random.default_rng(987654321)
