import numpy as np
import pytest

from hyperslice import expectation as ex
from hyperslice.exceptions import InvalidInputError
from hyperslice.linear_geometry import make_rng
from hyperslice.monte_carlo import sample_orientation
from hyperslice.slice_geometry import FlatOrientation, axis_orientation, standard_cube


class TestClass:
    # UNIT TESTS ------------------------- #

    def test_face_probability(self, cube3, diagonal_plane, axis_plane):
        for subset in [(0,), (1,), (2,)]:
            assert ex.face_probability(cube3, diagonal_plane, subset) == pytest.approx(1 / 3)

        assert ex.face_probability(cube3, axis_plane, (2,)) == 1.0
        assert ex.face_probability(cube3, axis_plane, (0,)) == 0.0
        assert ex.face_probability(cube3, axis_plane, (1,)) == 0.0

        square = standard_cube(2)
        assert ex.face_probability(square, axis_orientation(2, 1), (1,)) == 1.0

        with pytest.raises(InvalidInputError):
            ex.face_probability(cube3, diagonal_plane, (0, 1))

        with pytest.raises(InvalidInputError):
            ex.face_probability(cube3, diagonal_plane, (3,))

    def test_projected_body_volume(self, cube3, diagonal_plane):
        assert ex.projected_body_volume(cube3, diagonal_plane) == pytest.approx(2 * np.sqrt(3))
        assert ex.projected_body_volume(cube3, axis_orientation(3, 3)) == 1.0

    def test_expected_vertices_exact(self, cube3, diagonal_plane):
        assert ex.expected_vertices_exact(cube3, diagonal_plane) == pytest.approx(4.0, abs=1e-9)

        rng = make_rng(1)
        orientation = sample_orientation(rng, 3, 2)
        assert ex.expected_vertices_exact(cube3, orientation) == pytest.approx(4.0, abs=1e-9)

        orientation = sample_orientation(rng, 7, 3)
        assert ex.expected_vertices_exact(standard_cube(7), orientation) == pytest.approx(8.0, abs=1e-6)

        # k = n: the slice is the whole cube
        for n in range(1, 6):
            assert ex.expected_vertices_exact(standard_cube(n), sample_orientation(rng, n, n)) == 2.0**n

        with pytest.raises(InvalidInputError):
            ex.expected_vertices_exact(standard_cube(4), orientation)

    def test_probability_table(self, cube3, diagonal_plane, axis_plane):
        table = ex.probability_table(cube3, diagonal_plane)
        assert len(table.entries.index) == 3
        assert table.entries['probability'].tolist() == pytest.approx([1 / 3] * 3)
        assert table.entries['multiplicity'].tolist() == [4, 4, 4]
        assert table.total_expectation == pytest.approx(4.0)
        assert table.entries['free_indices'].tolist() == [(0,), (1,), (2,)]
        assert table.entries['fixed_indices'].tolist() == [(1, 2), (0, 2), (0, 1)]

        table = ex.probability_table(cube3, axis_plane)
        assert dict(zip(table.entries['free_indices'], table.entries['probability'])) == {
            (0,): 0.0,
            (1,): 0.0,
            (2,): 1.0,
        }
        assert table.total_expectation == 4.0

        table = ex.probability_table(cube3, axis_orientation(3, 3))
        assert table.entries['free_indices'].tolist() == [()]
        assert table.total_expectation == 8.0

    def test_table_to_dict(self, cube3, diagonal_plane):
        data = ex.probability_table(cube3, diagonal_plane).to_dict()
        assert data['n'] == 3 and data['k'] == 2
        assert data['entries'][0]['free_indices'] == [0]
        assert data['entries'][0]['fixed_indices'] == [1, 2]
        assert isinstance(data['entries'][0]['multiplicity'], int)

    def test_telescoping_check(self, cube3, diagonal_plane):
        lhs, rhs = ex.telescoping_check(cube3, diagonal_plane)
        assert lhs == pytest.approx(rhs, rel=1e-12)
        assert rhs == pytest.approx(2 * np.sqrt(3))

    def test_dimension_cap(self):
        orientation = FlatOrientation(spans=np.eye(21)[:1])
        with pytest.raises(InvalidInputError, match='exceeds'):
            ex.expected_vertices_exact(standard_cube(21), orientation)
