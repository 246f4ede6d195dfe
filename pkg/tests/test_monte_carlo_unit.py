import math

import numpy as np
import pytest

from hyperslice import monte_carlo as mc
from hyperslice.exceptions import InvalidInputError, SamplingFailureError
from hyperslice.expectation import probability_table
from hyperslice.linear_geometry import make_rng, rank
from hyperslice.slice_geometry import axis_orientation, standard_cube
from hyperslice.zonotope import RejectionStats


class TestClass:
    # UNIT TESTS ------------------------- #

    def test_simulation_config(self):
        config = mc.SimulationConfig(n=4, k=2, samples=10)
        assert config.body.is_cube
        assert config.to_dict()['orientation_mode'] == 'isotropic'
        assert config.to_dict()['orientation'] is None

        with pytest.raises(InvalidInputError):
            mc.SimulationConfig(n=3, k=4, samples=10)

        with pytest.raises(InvalidInputError):
            mc.SimulationConfig(n=21, k=1, samples=10)

        with pytest.raises(InvalidInputError):
            mc.SimulationConfig(n=3, k=1, samples=0)

        with pytest.raises(InvalidInputError):
            mc.SimulationConfig(n=3, k=1, samples=10, seed=-1)

        with pytest.raises(InvalidInputError):
            mc.SimulationConfig(n=3, k=1, samples=10, orientation_mode='fixed')

        with pytest.raises(InvalidInputError):
            mc.SimulationConfig(n=3, k=1, samples=10, orientation_mode='spiral')

        with pytest.raises(InvalidInputError):
            mc.SimulationConfig(n=3, k=1, samples=10, orientation_mode='fixed', orientation=axis_orientation(3, 2))

        with pytest.raises(InvalidInputError):
            mc.SimulationConfig(n=3, k=1, samples=10, body=standard_cube(2))

    def test_sample_orientation(self):
        rng = make_rng(0)
        orientation = mc.sample_orientation(rng, 5, 1)
        assert orientation.spans.shape == (1, 5)
        assert np.linalg.norm(orientation.spans[0]) == pytest.approx(1.0, abs=1e-12)

        for _ in range(100):
            assert rank(mc.sample_orientation(rng, 4, 3).spans, 1e-9) == 3

        # E|cos(theta)| between independent uniform directions in R^3 is 1/2
        cosines = [abs(np.dot(*mc.sample_orientation(rng, 3, 2).spans)) for _ in range(10000)]
        assert np.mean(cosines) == pytest.approx(0.5, abs=0.02)

        with pytest.raises(InvalidInputError):
            mc.sample_orientation(rng, 3, 0)

    def test_sample_translation(self, cube3, diagonal_plane):
        rng = make_rng(2)
        stats = RejectionStats()
        taus = np.array([mc.sample_translation(rng, cube3, diagonal_plane, stats) for _ in range(10000)])
        assert taus.shape == (10000, 1)
        # P_N(C) is the segment [-sqrt(3), sqrt(3)]
        assert np.abs(taus).max() <= math.sqrt(3.0) + 1e-12
        assert np.abs(taus).max() > math.sqrt(3.0) - 0.01
        assert stats.acceptance_rate == 1.0

        # a k = n slice has nothing to translate
        assert mc.sample_translation(rng, cube3, axis_orientation(3, 3)).shape == (0,)

    def test_estimate_whole_cube(self):
        config = mc.SimulationConfig(n=3, k=3, samples=1, orientation_mode='axis')
        report = mc.estimate_expected_vertices(config)
        assert report.mean == 8.0
        assert report.histogram == {8: 1}
        assert report.std_error == 0.0

    def test_estimate_axis_squares(self):
        config = mc.SimulationConfig(n=3, k=2, samples=1000, seed=1, orientation_mode='axis')
        report = mc.estimate_expected_vertices(config)
        assert report.histogram == {4: 1000}
        assert report.degenerate_count == 0
        assert report.flagged_count == 0
        assert report.samples_used == 1000

    def test_estimate_report(self):
        config = mc.SimulationConfig(n=4, k=2, samples=2000, seed=3)
        report = mc.estimate_expected_vertices(config)
        assert report.seed == 3
        assert report.config == config.to_dict()
        assert sum(report.histogram.values()) == 2000
        assert report.rejection_acceptance_rate > 0.1
        assert report.proposals >= 2000

        frame = report.histogram_frame()
        assert list(frame.columns) == ['count', 'frequency']
        assert frame['count'].is_monotonic_increasing
        assert frame['frequency'].sum() == 2000

        data = report.to_dict()
        assert all(isinstance(key, str) for key in data['histogram'])

    def test_same_seed_same_report(self):
        config = mc.SimulationConfig(n=4, k=2, samples=600, seed=12, chunk_size=100)
        first = mc.estimate_expected_vertices(config).to_dict()
        assert first == mc.estimate_expected_vertices(config).to_dict()

        other = mc.SimulationConfig(n=4, k=2, samples=600, seed=13, chunk_size=100)
        assert mc.estimate_expected_vertices(other).to_dict() != first

    def test_resampled_translations(self):
        config = mc.SimulationConfig(n=3, k=1, samples=500, seed=4, translation_resample_per_orientation=10)
        report = mc.estimate_expected_vertices(config)
        assert sum(report.histogram.values()) == 500
        # a line meets the 3-cube in at most two points
        assert set(report.histogram) <= {1, 2}

    def test_sampling_failure_names_sample(self):
        # one proposal per sample: the projected cube does not fill its bounding box, so some sample fails
        config = mc.SimulationConfig(n=3, k=1, samples=50, seed=0, max_proposals=1)
        with pytest.raises(SamplingFailureError) as err:
            mc.estimate_expected_vertices(config)
        assert 0 <= err.value.sample_index < 50
        assert str(err.value).startswith('sample %d: ' % err.value.sample_index)

    def test_face_hit_frequencies(self, axis_plane):
        config = mc.SimulationConfig(n=3, k=2, samples=500, seed=8, orientation_mode='fixed', orientation=axis_plane)
        frequencies = mc.face_hit_frequencies(config)
        assert frequencies == {(0,): 0.0, (1,): 0.0, (2,): 1.0}

        with pytest.raises(InvalidInputError):
            mc.face_hit_frequencies(mc.SimulationConfig(n=3, k=2, samples=10))

    def test_compare_with_exact(self, cube3, diagonal_plane):
        table = probability_table(cube3, diagonal_plane)
        frame = mc.compare_with_exact(table, {(0,): 1 / 3, (1,): 0.3, (2,): 0.4}, 1000)
        assert list(frame.columns) == ['free_indices', 'probability', 'frequency', 'std_error', 'z_score']
        se = math.sqrt((1 / 3) * (2 / 3) / 1000)
        assert frame['std_error'].tolist() == pytest.approx([se] * 3)
        assert frame['z_score'].tolist() == pytest.approx([0.0, (0.3 - 1 / 3) / se, (0.4 - 1 / 3) / se], abs=1e-9)
