import logging
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence, Tuple

import numpy as np
import pandas as pd

from hyperslice.constants import MAX_DIMENSION
from hyperslice.exceptions import InvalidInputError, InvariantViolationError
from hyperslice.linear_geometry import gram_volumes
from hyperslice.slice_geometry import Body, Face, FlatOrientation, face_zonotope
from hyperslice.zonotope import project, volume

logger = logging.getLogger(__name__)

_SUBSET_BATCH = 4096


@dataclass(frozen=True, eq=False)
class FaceProbabilityTable:
    """Per-subset face-intersection probabilities for one orientation.

    ``entries`` has one row per (n - k)-subset of free coordinates, in combinations
    order, with columns free_indices, fixed_indices, face_volume, probability and
    multiplicity (2^k faces share each subset).
    """

    n: int
    k: int
    orientation: np.ndarray
    entries: pd.DataFrame
    projected_volume: float
    total_expectation: float

    def to_dict(self) -> dict:
        return {
            'n': self.n,
            'k': self.k,
            'orientation': self.orientation.tolist(),
            'projected_volume': self.projected_volume,
            'total_expectation': self.total_expectation,
            'entries': [
                {
                    'free_indices': list(row.free_indices),
                    'fixed_indices': list(row.fixed_indices),
                    'face_volume': float(row.face_volume),
                    'probability': float(row.probability),
                    'multiplicity': int(row.multiplicity),
                }
                for row in self.entries.itertuples(index=False)
            ],
        }


def _check_inputs(body: Body, orientation: FlatOrientation):
    n, k = orientation.n, orientation.k
    if n != body.n:
        raise InvalidInputError('orientation in R^%d used with a body in R^%d' % (n, body.n))
    if not 1 <= k <= n:
        raise InvalidInputError('slice dimension k must satisfy 1 <= k <= n, got n=%d, k=%d' % (n, k))
    if n > MAX_DIMENSION:
        raise InvalidInputError('n=%d exceeds the supported maximum of %d' % (n, MAX_DIMENSION))


def _complement(n: int, subset: Sequence[int]) -> Tuple[int, ...]:
    return tuple(i for i in range(n) if i not in subset)


# helper function so tuples (possibly empty) stay single cells of a DataFrame column
def _object_column(values: Sequence[Tuple[int, ...]]) -> np.ndarray:
    column = np.empty(len(values), dtype=object)
    for i, value in enumerate(values):
        column[i] = value
    return column


def projected_body_volume(body: Body, orientation: FlatOrientation) -> float:
    """V_{n-k}(P_N(body)) by Shephard's formula on the n projected edge generators."""
    d = body.n - orientation.k
    v = volume(project(body.zonotope, orientation.normal_basis), d)
    if d > 0 and not v > 0:
        raise InvariantViolationError('projection of a full-dimensional body onto N has zero volume')
    return v


def face_probability(body: Body, orientation: FlatOrientation, subset: Sequence[int]) -> float:
    """Probability that a uniformly translated flat meets a face with the given free coordinates.

    This is V_{n-k}(P_N(F)) / V_{n-k}(P_N(C)); it is the same for all 2^k faces
    sharing the subset.

    Args:
        body (Body): the cube or parallelotope being sliced
        orientation (FlatOrientation): the fixed orientation of the flat
        subset (Sequence[int]): the n - k free coordinate indices of the face

    Returns:
        float: the probability, in [0, 1]
    """
    _check_inputs(body, orientation)
    n, k = orientation.n, orientation.k
    subset = tuple(sorted(int(i) for i in subset))
    if len(subset) != n - k or len(set(subset)) != len(subset) or any(i < 0 or i >= n for i in subset):
        raise InvalidInputError('a face of a %d-flat in R^%d has %d distinct free indices' % (k, n, n - k))

    fixed = _complement(n, subset)
    face = Face(n=n, fixed_indices=fixed, signs=(-1,) * k)
    face_volume = volume(face_zonotope(body, face, orientation.normal_basis), n - k)
    return face_volume / projected_body_volume(body, orientation)


# (n - k)-volumes of every projected face, one per free subset in combinations order
def _face_volumes(body: Body, orientation: FlatOrientation, free: np.ndarray) -> np.ndarray:
    projected = body.edge_generators @ orientation.normal_basis.T
    parts = [gram_volumes(projected[free[i : i + _SUBSET_BATCH]]) for i in range(0, free.shape[0], _SUBSET_BATCH)]
    return np.concatenate(parts) if parts else np.zeros(0)


def probability_table(body: Body, orientation: FlatOrientation) -> FaceProbabilityTable:
    """Face-intersection probability for every (n - k)-subset of free coordinates.

    Returns:
        FaceProbabilityTable: with total_expectation = sum of multiplicity * probability
    """
    _check_inputs(body, orientation)
    n, k = orientation.n, orientation.k
    free_subsets = list(combinations(range(n), n - k))
    free = np.array(free_subsets, dtype=np.intp).reshape(len(free_subsets), n - k)

    face_volumes = _face_volumes(body, orientation, free)
    total_volume = projected_body_volume(body, orientation)
    probabilities = face_volumes / total_volume
    multiplicity = 2**k

    entries = pd.DataFrame(
        {
            'free_indices': _object_column(free_subsets),
            'fixed_indices': _object_column([_complement(n, s) for s in free_subsets]),
            'face_volume': face_volumes,
            'probability': probabilities,
            'multiplicity': multiplicity,
        }
    )
    total = math.fsum(multiplicity * probabilities)
    logger.debug('n=%d k=%d: %d subsets, expectation %.17g', n, k, len(free_subsets), total)
    return FaceProbabilityTable(
        n=n,
        k=k,
        orientation=orientation.spans,
        entries=entries,
        projected_volume=total_volume,
        total_expectation=total,
    )


def expected_vertices_exact(body: Body, orientation: FlatOrientation) -> float:
    """Expected vertex count of a slice with this orientation and uniform translation.

    Sums 2^k times the face probability over all (n - k)-subsets. The identity with
    2^k is what this computes, not what it assumes.
    """
    return probability_table(body, orientation).total_expectation


def telescoping_check(body: Body, orientation: FlatOrientation) -> Tuple[float, float]:
    """Both sides of the telescoping step of the expectation.

    lhs sums the projected face volumes over all (n - k)-subsets; rhs is the volume
    of the projected body from Shephard's formula applied to its n projected
    generators. They agree to rounding.
    """
    _check_inputs(body, orientation)
    n, k = orientation.n, orientation.k
    free_subsets = list(combinations(range(n), n - k))
    free = np.array(free_subsets, dtype=np.intp).reshape(len(free_subsets), n - k)
    lhs = math.fsum(_face_volumes(body, orientation, free))
    rhs = projected_body_volume(body, orientation)
    return lhs, rhs
