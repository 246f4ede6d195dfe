from ._version import __version__
from .exceptions import HypersliceError
from .zonotope import Zonotope, volume, project, halfspaces, contains, sample_uniform
from .slice_geometry import Body, FlatOrientation, standard_cube, parallelotope_body, make_flat, vertex_count
from .expectation import probability_table, expected_vertices_exact
from .monte_carlo import SimulationConfig, estimate_expected_vertices
