import numpy as np
import pytest

from hyperslice import zonotope as z
from hyperslice.linear_geometry import make_rng


class TestClass:
    # INTEGRATION TESTS
    def test_volume_formula_against_rejection_oracle(self):
        rng = make_rng(2024)
        z_scores = []
        for _ in range(50):
            d = int(rng.integers(1, 4))
            m = int(rng.integers(d, 7))
            zono = z.Zonotope(base=rng.standard_normal(d), generators=rng.standard_normal((m, d)))
            exact = z.volume(zono, d)
            estimate = z.estimate_volume_mc(zono, rng, 1000000)
            if estimate.std_error == 0.0:
                # intervals fill their bounding box
                assert estimate.volume == pytest.approx(exact)
                continue
            z_scores.append(abs(estimate.volume - exact) / estimate.std_error)

        z_scores = np.array(z_scores)
        # 3 standard errors, with the odd miss that 50 independent draws allow
        assert np.sum(z_scores > 3.0) <= 2
        assert np.all(z_scores < 5.0)

    def test_axis_aligned_boxes_are_exact(self):
        rng = make_rng(5)
        for d in (1, 2, 3):
            sides = 2.0 ** rng.integers(-2, 3, size=d)
            box = z.Zonotope(base=np.zeros(d), generators=np.diag(sides))
            estimate = z.estimate_volume_mc(box, rng, 1000000)
            assert z.volume(box, d) == np.prod(sides)
            assert estimate.volume == np.prod(sides)
