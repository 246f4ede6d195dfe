import math

import numpy as np
import pytest

from hyperslice.slice_geometry import FlatOrientation, axis_orientation, standard_cube
from hyperslice.zonotope import Zonotope


@pytest.fixture
def cube3():
    return standard_cube(3)


@pytest.fixture
def diagonal_plane():
    # the plane x + y + z = 0; its normal space is spanned by (1, 1, 1) / sqrt(3)
    return FlatOrientation(
        spans=np.array([[1.0, -1.0, 0.0], [1.0, 1.0, -2.0]]) / np.array([[math.sqrt(2.0)], [math.sqrt(6.0)]])
    )


@pytest.fixture
def axis_plane():
    return axis_orientation(3, 2)


@pytest.fixture
def hexagon():
    return Zonotope.from_generators([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])


@pytest.fixture
def square():
    return Zonotope(base=[-1.0, -1.0], generators=[[2.0, 0.0], [0.0, 2.0]])
