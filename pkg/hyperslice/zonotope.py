import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import chain, combinations
from typing import List, Optional, Tuple

import numpy as np

from hyperslice.constants import MAX_PROPOSALS, MEMBERSHIP_TOL, NORMAL_MERGE_TOL, PROPOSAL_BATCH, RANK_TOL
from hyperslice.exceptions import DegenerateZonotopeError, InvalidInputError, SamplingFailureError
from hyperslice.linear_geometry import (
    ArrayLike,
    NormalBasis,
    Vector,
    as_vector,
    as_vector_list,
    gram_volumes,
    null_normals,
    rank,
    span_basis,
)

logger = logging.getLogger(__name__)

# subsets whose parallelotope volumes are evaluated in one batched determinant call
_VOLUME_BATCH = 4096
_ORACLE_BATCH = 65536


@dataclass(frozen=True, eq=False)
class Zonotope:
    """The set base + Z(generators) = {base + sum_i lambda_i g_i : lambda in [0, 1]^m}.

    Generators are stored as the rows of a (m, d) array. The zonotope is immutable;
    its half-space description is computed on first use and cached.
    """

    base: Vector
    generators: np.ndarray

    def __post_init__(self):
        base = as_vector(self.base)
        object.__setattr__(self, 'base', base)
        object.__setattr__(self, 'generators', as_vector_list(self.generators, dim=base.shape[0]))

    @classmethod
    def from_generators(cls, generators: ArrayLike, base: Optional[ArrayLike] = None, dim: Optional[int] = None):
        gens = as_vector_list(generators, dim=dim)
        if base is None:
            base = np.zeros(gens.shape[1])
        return cls(base=base, generators=gens)

    @property
    def dim(self) -> int:
        return self.base.shape[0]

    @property
    def count(self) -> int:
        return self.generators.shape[0]

    @property
    def center(self) -> Vector:
        return self.base + 0.5 * self.generators.sum(axis=0)

    @cached_property
    def halfspace_set(self) -> 'HalfspaceSet':
        return _build_halfspaces(self)

    @cached_property
    def affine_hull(self) -> Tuple[NormalBasis, 'Zonotope']:
        # orthonormal basis of span(generators) and the zonotope in those coordinates
        basis = span_basis(self.generators)
        return basis, project(self, basis)


@dataclass(frozen=True, eq=False)
class HalfspaceSet:
    """Slabs lower <= <normal, x - center> <= upper, one per facet direction."""

    normals: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    center: Vector

    def __len__(self) -> int:
        return self.normals.shape[0]

    def contains_many(self, points: np.ndarray, tol: float) -> np.ndarray:
        values = (points - self.center) @ self.normals.T
        return np.all((values >= self.lower - tol) & (values <= self.upper + tol), axis=1)


@dataclass
class RejectionStats:
    proposals: int = 0
    accepted: int = 0

    def record(self, proposals: int, accepted: int):
        self.proposals += proposals
        self.accepted += accepted

    def merge(self, other: 'RejectionStats'):
        self.record(other.proposals, other.accepted)

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.proposals if self.proposals else 0.0


@dataclass(frozen=True)
class VolumeEstimate:
    volume: float
    std_error: float
    acceptance: float
    samples: int = field(default=0)


def volume(z: Zonotope, d: int) -> float:
    """d-dimensional volume of a zonotope by Shephard's formula.

    Sums the d-volumes of the parallelotopes Z(S) over all d-subsets S of the
    generators. When the zonotope's affine hull has dimension d this is its d-volume.

    Args:
        z (Zonotope): the zonotope
        d (int): target dimension, 0 <= d <= z.dim; d = 0 gives 1

    Returns:
        float: the d-volume
    """
    if d < 0 or d > z.dim:
        raise InvalidInputError('cannot take a %d-volume of a zonotope in R^%d' % (d, z.dim))
    if d == 0:
        return 1.0
    m = z.count
    if m < d:
        return 0.0

    n_subsets = math.comb(m, d)
    subsets = np.fromiter(chain.from_iterable(combinations(range(m), d)), dtype=np.intp, count=n_subsets * d)
    subsets = subsets.reshape(n_subsets, d)

    parts = []
    for start in range(0, n_subsets, _VOLUME_BATCH):
        parts.append(gram_volumes(z.generators[subsets[start : start + _VOLUME_BATCH]]))
    return math.fsum(np.concatenate(parts))


def project(z: Zonotope, basis: NormalBasis) -> Zonotope:
    """Image of z under the orthogonal projection onto span(basis), in basis coordinates."""
    basis = np.asarray(basis, dtype=float)
    if basis.ndim != 2 or basis.shape[1] != z.dim:
        raise InvalidInputError('basis vectors must live in R^%d' % z.dim)
    return Zonotope(base=basis @ z.base, generators=(z.generators @ basis.T).reshape(z.count, basis.shape[0]))


def halfspaces(z: Zonotope) -> HalfspaceSet:
    """H-representation of a full-dimensional zonotope.

    Every (d - 1)-subset of generators with a nonzero generalized cross product u
    contributes the slab |<u/|u|, x - center>| <= 1/2 sum_i |<u/|u|, g_i>|; parallel
    normals are merged.

    Raises:
        DegenerateZonotopeError: if the generators do not span R^d
    """
    return z.halfspace_set


def _build_halfspaces(z: Zonotope) -> HalfspaceSet:
    d = z.dim
    center = z.center
    if d == 0:
        empty = np.zeros(0)
        return HalfspaceSet(normals=np.zeros((0, 0)), lower=empty, upper=empty, center=center)

    r = rank(z.generators) if z.count else 0
    if r < d:
        raise DegenerateZonotopeError('generators of a zonotope in R^%d span only %d dimensions' % (d, r))

    if d == 1:
        normals = np.ones((1, 1))
    else:
        combos = np.array(list(combinations(range(z.count), d - 1)), dtype=np.intp)
        raw = null_normals(z.generators[combos])
        lengths = np.linalg.norm(raw, axis=1)
        keep = lengths > RANK_TOL * lengths.max()
        normals = _merge_parallel(raw[keep] / lengths[keep, np.newaxis])

    upper = 0.5 * np.abs(normals @ z.generators.T).sum(axis=1)
    logger.debug('zonotope in R^%d with %d generators has %d slab directions', d, z.count, len(normals))
    return HalfspaceSet(normals=normals, lower=-upper, upper=upper, center=center)


# helper function to keep one representative per facet direction, first nonzero coordinate positive
def _merge_parallel(units: np.ndarray) -> np.ndarray:
    lead = units[np.arange(units.shape[0]), np.argmax(np.abs(units) > NORMAL_MERGE_TOL, axis=1)]
    units = np.where(lead[:, np.newaxis] < 0, -units, units)

    # normals within tol (up to sign) have keys within tol; the sorted sweep looks back no further
    keys = np.abs(units @ _merge_direction(units.shape[1]))
    order = np.argsort(keys, kind='stable')
    kept: List[int] = []
    representative: List[int] = []
    for i in order:
        j = len(kept) - 1
        while j >= 0 and keys[i] - keys[kept[j]] <= NORMAL_MERGE_TOL:
            v = units[kept[j]]
            if np.linalg.norm(v - np.copysign(1.0, v @ units[i]) * units[i]) <= NORMAL_MERGE_TOL:
                representative[j] = min(representative[j], i)
                break
            j -= 1
        else:
            kept.append(i)
            representative.append(i)
    return units[np.sort(representative)]


def _merge_direction(d: int) -> np.ndarray:
    direction = np.sqrt(np.arange(2.0, d + 2.0)) * np.where(np.arange(d) % 2, -1.0, 1.0)
    return direction / np.linalg.norm(direction)


def contains(z: Zonotope, x: ArrayLike, tol: float = MEMBERSHIP_TOL) -> bool:
    """Whether x lies in z, with every slab inflated by tol.

    Agrees with the definitional test "x = base + sum lambda_i g_i for some lambda in
    [0, 1]^m". Needs a full-dimensional zonotope (see contains_relative otherwise).
    """
    point = as_vector(x, dim=z.dim)
    if z.dim == 0:
        return True
    return bool(z.halfspace_set.contains_many(point[np.newaxis], tol)[0])


def contains_many(z: Zonotope, points: ArrayLike, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
    pts = as_vector_list(points, dim=z.dim)
    if z.dim == 0:
        return np.ones(pts.shape[0], dtype=bool)
    return z.halfspace_set.contains_many(pts, tol)


def contains_relative(z: Zonotope, x: ArrayLike, tol: float = MEMBERSHIP_TOL) -> bool:
    """Membership for zonotopes of any rank.

    x must lie within tol of the affine hull of z, and its hull coordinates must
    satisfy the slabs of z expressed inside that hull.
    """
    point = as_vector(x, dim=z.dim)
    return bool(contains_relative_many(z, point[np.newaxis], tol)[0])


def contains_relative_many(z: Zonotope, points: ArrayLike, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
    pts = as_vector_list(points, dim=z.dim)
    if z.dim == 0:
        return np.ones(pts.shape[0], dtype=bool)
    basis, reduced = z.affine_hull
    if basis.shape[0] == z.dim:
        return z.halfspace_set.contains_many(pts, tol)

    offsets = pts - z.center
    residual = offsets - (offsets @ basis.T) @ basis
    near_hull = np.linalg.norm(residual, axis=1) <= tol
    if basis.shape[0] == 0:
        return near_hull
    return near_hull & reduced.halfspace_set.contains_many(pts @ basis.T, tol)


def bounding_box(z: Zonotope) -> Tuple[Vector, Vector]:
    """Tight axis-aligned box: center_j -/+ 1/2 sum_i |g_ij| along every axis j."""
    half = 0.5 * np.abs(z.generators).sum(axis=0)
    center = z.center
    return center - half, center + half


def sample_uniform(
    z: Zonotope,
    rng: np.random.Generator,
    stats: Optional[RejectionStats] = None,
    max_proposals: int = MAX_PROPOSALS,
    batch: int = PROPOSAL_BATCH,
) -> Vector:
    """Uniform point of a full-dimensional zonotope by rejection from its bounding box.

    Proposals are drawn in batches; the first accepted proposal of a batch is
    returned and counts as consumed together with everything drawn before it.

    Raises:
        SamplingFailureError: if none of ``max_proposals`` proposals is accepted
    """
    if z.dim == 0:
        if stats is not None:
            stats.record(1, 1)
        return np.zeros(0)

    slabs = z.halfspace_set
    lower, upper = bounding_box(z)
    proposed = 0
    while proposed < max_proposals:
        size = min(batch, max_proposals - proposed)
        points = rng.uniform(lower, upper, size=(size, z.dim))
        inside = slabs.contains_many(points, 0.0)
        if inside.any():
            j = int(np.argmax(inside))
            if stats is not None:
                stats.record(proposed + j + 1, 1)
            return points[j]
        proposed += size

    if stats is not None:
        stats.record(proposed, 0)
    raise SamplingFailureError(
        'no proposal accepted after %d draws (acceptance rate below %.1e)' % (max_proposals, 1.0 / max_proposals)
    )


def estimate_volume_mc(z: Zonotope, rng: np.random.Generator, samples: int) -> VolumeEstimate:
    """Box volume times the acceptance fraction of uniform box proposals."""
    if samples < 1:
        raise InvalidInputError('the volume oracle needs at least one sample')
    if z.dim == 0:
        return VolumeEstimate(volume=1.0, std_error=0.0, acceptance=1.0, samples=samples)

    slabs = z.halfspace_set
    lower, upper = bounding_box(z)
    box_volume = float(np.prod(upper - lower))
    hits = 0
    for start in range(0, samples, _ORACLE_BATCH):
        size = min(_ORACLE_BATCH, samples - start)
        hits += int(slabs.contains_many(rng.uniform(lower, upper, size=(size, z.dim)), 0.0).sum())

    p = hits / samples
    return VolumeEstimate(
        volume=box_volume * p,
        std_error=box_volume * math.sqrt(p * (1.0 - p) / samples),
        acceptance=p,
        samples=samples,
    )


def volume_oracle_mc(z: Zonotope, rng: np.random.Generator, samples: int) -> float:
    return estimate_volume_mc(z, rng, samples).volume
