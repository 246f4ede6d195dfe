import math

import numpy as np
import pytest

from hyperslice import linear_geometry as lg
from hyperslice.exceptions import DegenerateOrientationError, InvalidInputError


class TestClass:
    # UNIT TESTS ------------------------- #

    def test_gram_volume(self):
        assert lg.gram_volume([[1, 0, 0], [0, 1, 0]]) == pytest.approx(1.0)
        assert lg.gram_volume([[2, 0], [0, 2]]) == pytest.approx(4.0)
        # |a| |b| sin(theta) = 1 * sqrt(3) * sqrt(2/3)
        assert lg.gram_volume([[1, 0, 0], [1, 1, 1]]) == pytest.approx(math.sqrt(2.0))
        assert lg.gram_volume([[1, 2], [2, 4]]) == pytest.approx(0.0, abs=1e-12)

        # ragged input
        with pytest.raises(InvalidInputError):
            lg.gram_volume([[1, 0, 0], [0, 1]])

        # more vectors than dimensions
        with pytest.raises(InvalidInputError):
            lg.gram_volume([[1, 0], [0, 1], [1, 1]])

    def test_gram_volumes_batched(self):
        stack = np.array([[[1.0, 0.0, 0.0]], [[3.0, 4.0, 0.0]]])
        assert lg.gram_volumes(stack) == pytest.approx([1.0, 5.0])
        # an empty subset spans a point of 0-volume 1
        assert lg.gram_volumes(np.zeros((3, 0, 2))).tolist() == [1.0, 1.0, 1.0]

    def test_rank(self):
        assert lg.rank([[1, 0], [0, 1]]) == 2
        assert lg.rank([[1, 0], [2, 0]]) == 1
        assert lg.rank([]) == 0
        assert lg.rank([[0, 0, 0]]) == 0
        assert lg.rank([[1, 0, 0], [0, 1, 0], [1, 1, 1e-12]]) == 2

        with pytest.raises(InvalidInputError):
            lg.rank([[1, 0], [0, 1]], tol=0.0)

    def test_span_basis(self):
        basis = lg.span_basis([[2, 0, 0], [4, 0, 0], [0, 0, 3]])
        assert basis.shape == (2, 3)
        assert np.allclose(basis @ basis.T, np.eye(2))
        # the span is the x-z plane
        assert np.allclose(basis[:, 1], 0.0)

    def test_orthonormal_complement(self):
        basis = lg.orthonormal_complement([[1, 0, 0], [0, 1, 0]])
        assert basis.shape == (1, 3)
        assert abs(basis[0] @ np.array([0.0, 0.0, 1.0])) == pytest.approx(1.0)

        basis = lg.orthonormal_complement([[1 / math.sqrt(2), 1 / math.sqrt(2)]])
        assert abs(basis[0] @ np.array([1.0, -1.0]) / math.sqrt(2)) == pytest.approx(1.0)

        rng = np.random.default_rng(4)
        orientation = rng.standard_normal((2, 4))
        orientation /= np.linalg.norm(orientation, axis=1, keepdims=True)
        basis = lg.orthonormal_complement(orientation)
        assert basis.shape == (2, 4)
        assert np.allclose(basis @ basis.T, np.eye(2), atol=1e-12)
        assert np.allclose(basis @ orientation.T, 0.0, atol=1e-12)

        # k = n leaves nothing
        assert lg.orthonormal_complement(np.eye(3)).shape == (0, 3)

        with pytest.raises(DegenerateOrientationError):
            lg.orthonormal_complement([[1, 0, 0], [2, 0, 0]])

    def test_project_onto_basis(self):
        basis = lg.orthonormal_complement([[1, 0, 0]])
        assert lg.project_onto_basis(basis[0], basis) == pytest.approx([1.0, 0.0])
        assert lg.project_onto_basis([5, 0, 0], basis) == pytest.approx([0.0, 0.0])

        u = np.array([[1.0, 1.0, 1.0]]) / math.sqrt(3)
        assert lg.project_onto_basis([2, 0, 0], u) == pytest.approx([2 / math.sqrt(3)])

        with pytest.raises(InvalidInputError):
            lg.project_onto_basis([1, 0], u)

    def test_reconstruct(self):
        basis = lg.orthonormal_complement([[0, 0, 1]])
        x = np.array([0.3, -0.7, 0.0])
        assert np.allclose(lg.reconstruct(lg.project_onto_basis(x, basis), basis), x)

    def test_null_normal(self):
        assert lg.null_normal([[1, 0, 0], [0, 1, 0]]) == pytest.approx([0.0, 0.0, 1.0])
        assert lg.null_normal([[3, 4]]) == pytest.approx([-4.0, 3.0])
        assert np.allclose(lg.null_normal([[1, 0, 0], [2, 0, 0]]), 0.0)

        # wrong count of vectors
        with pytest.raises(InvalidInputError):
            lg.null_normal([[1, 0, 0]])

    def test_sample_unit_sphere(self):
        rng = lg.make_rng(11)
        for _ in range(50):
            assert np.linalg.norm(lg.sample_unit_sphere(rng, 5)) == pytest.approx(1.0, abs=1e-12)
        assert lg.sample_unit_sphere(rng, 1)[0] in (-1.0, 1.0)

        draws = np.array([lg.sample_unit_sphere(rng, 3) for _ in range(100000)])
        assert np.all(np.abs(draws.mean(axis=0)) < 0.02)

        with pytest.raises(InvalidInputError):
            lg.sample_unit_sphere(rng, 0)

    def test_make_rng(self):
        # same seed and key give the same stream, different keys do not
        assert lg.make_rng(5, 2).random() == lg.make_rng(5, 2).random()
        assert lg.make_rng(5, 2).random() != lg.make_rng(5, 3).random()
        # child c of SeedSequence(seed).spawn
        child = np.random.SeedSequence(5).spawn(2)[1]
        assert lg.make_rng(5, 1).random() == np.random.Generator(np.random.PCG64(child)).random()

    def test_as_vector_list(self):
        assert lg.as_vector_list([], dim=3).shape == (0, 3)

        with pytest.raises(InvalidInputError):
            lg.as_vector_list([[1, float('nan')]])

        with pytest.raises(InvalidInputError):
            lg.as_vector_list([[1, 2]], dim=3)
