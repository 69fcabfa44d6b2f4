"""Shared fixtures: small deterministic instances and spaces."""

import numpy as np
import pytest

from nukc.metric import MetricSpace
from nukc.model import NukcInstance


@pytest.fixture
def line_space():
    """Five points on a line at 0, 1, 2, 10, 11."""
    coords = np.array([[0.0], [1.0], [2.0], [10.0], [11.0]])
    return MetricSpace.from_coords(coords)


@pytest.fixture
def line_instance(line_space):
    return NukcInstance(line_space, [(1, 2.0), (1, 1.0)])


@pytest.fixture
def square_space():
    coords = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    return MetricSpace.from_coords(coords)
