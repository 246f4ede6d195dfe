import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import combinations, product
from typing import List, Optional, Tuple

import numpy as np

from hyperslice.constants import (
    MEMBERSHIP_TOL,
    NEAR_BOUNDARY_FACTOR,
    ORTHO_TOL,
    RANK_TOL,
    SINGULAR_TOL,
    VERTEX_DEDUP_TOL,
)
from hyperslice.exceptions import DegenerateOrientationError, InvalidInputError
from hyperslice.linear_geometry import (
    ArrayLike,
    NormalBasis,
    Vector,
    as_vector,
    as_vector_list,
    orthonormal_complement,
    rank,
)
from hyperslice.zonotope import Zonotope, contains_relative, contains_relative_many, project

logger = logging.getLogger(__name__)

_MAX_BODY_DRAWS = 1000

# entries of one (subsets, n, 2^k) block of face systems solved at once
_FACE_BATCH_ENTRIES = 1 << 20


@dataclass(frozen=True, eq=False)
class Body:
    """The parallelotope base + Z(edge_generators), generators as rows.

    The standard cube C = [-1, 1]^n has generators 2e_1, ..., 2e_n and base (-1, ..., -1).
    """

    edge_generators: np.ndarray
    base: Vector

    def __post_init__(self):
        gens = as_vector_list(self.edge_generators)
        n = gens.shape[1]
        if gens.shape[0] != n or n < 1:
            raise InvalidInputError('a body in R^%d needs exactly %d edge generators, got %d' % (n, n, gens.shape[0]))
        r = rank(gens)
        if r < n:
            raise InvalidInputError('body edge generators are singular: rank %d < %d' % (r, n))
        object.__setattr__(self, 'edge_generators', gens)
        object.__setattr__(self, 'base', as_vector(self.base, dim=n))

    @property
    def n(self) -> int:
        return self.base.shape[0]

    @property
    def center(self) -> Vector:
        return self.base + 0.5 * self.edge_generators.sum(axis=0)

    @cached_property
    def zonotope(self) -> Zonotope:
        return Zonotope(base=self.base, generators=self.edge_generators)

    @cached_property
    def half_edges(self) -> np.ndarray:
        # columns g_i / 2: x = center + half_edges @ y maps [-1, 1]^n onto the body
        return 0.5 * self.edge_generators.T

    @cached_property
    def to_cube(self) -> np.ndarray:
        return np.linalg.inv(self.half_edges)

    @property
    def is_cube(self) -> bool:
        return bool(np.array_equal(self.edge_generators, 2.0 * np.eye(self.n)) and np.all(self.base == -1.0))


def standard_cube(n: int) -> Body:
    if n < 1:
        raise InvalidInputError('cube dimension must be positive')
    return Body(edge_generators=2.0 * np.eye(n), base=-np.ones(n))


def parallelotope_body(matrix: ArrayLike, offset: Optional[ArrayLike] = None) -> Body:
    """The body offset + A [-1, 1]^n for an invertible n x n matrix A."""
    a = as_vector_list(matrix)
    n = a.shape[0]
    if a.shape[1] != n:
        raise InvalidInputError('parallelotope matrix must be square, got shape %s' % (a.shape,))
    shift = np.zeros(n) if offset is None else as_vector(offset, dim=n)
    return Body(edge_generators=2.0 * a.T, base=shift - a @ np.ones(n))


def random_parallelotope(rng: np.random.Generator, n: int, max_condition: float = 100.0) -> Body:
    """Random invertible parallelotope with Gaussian matrix and offset, condition number below the cap."""
    for _ in range(_MAX_BODY_DRAWS):
        a = rng.standard_normal((n, n))
        offset = rng.standard_normal(n)
        if np.linalg.cond(a) < max_condition:
            return parallelotope_body(a, offset)
    raise InvalidInputError('could not draw a %d-dimensional body with condition number below %g' % (n, max_condition))


@dataclass(frozen=True, eq=False)
class FlatOrientation:
    """k unit vectors (rows of ``spans``) spanning the direction of a k-flat in R^n."""

    spans: np.ndarray

    def __post_init__(self):
        spans = as_vector_list(self.spans)
        if spans.shape[0] < 1:
            raise InvalidInputError('an orientation needs at least one vector')
        norms = np.linalg.norm(spans, axis=1)
        if np.any(np.abs(norms - 1.0) > ORTHO_TOL):
            raise InvalidInputError('orientation vectors must have unit norm, got norms %s' % norms)
        r = rank(spans)
        if r < spans.shape[0]:
            raise DegenerateOrientationError(
                'orientation of %d vectors in R^%d has rank %d' % (spans.shape[0], spans.shape[1], r)
            )
        object.__setattr__(self, 'spans', spans)

    @classmethod
    def from_vectors(cls, vectors: ArrayLike) -> 'FlatOrientation':
        """Build an orientation, normalizing only vectors whose norm is off by more than 1e-12."""
        vs = np.array(as_vector_list(vectors))
        norms = np.linalg.norm(vs, axis=1)
        if np.any(norms == 0):
            raise DegenerateOrientationError('orientation contains a zero vector')
        off = np.abs(norms - 1.0) > ORTHO_TOL
        vs[off] = vs[off] / norms[off, np.newaxis]
        return cls(spans=vs)

    @property
    def k(self) -> int:
        return self.spans.shape[0]

    @property
    def n(self) -> int:
        return self.spans.shape[1]

    @cached_property
    def normal_basis(self) -> NormalBasis:
        return orthonormal_complement(self.spans, RANK_TOL)


def axis_orientation(n: int, k: int) -> FlatOrientation:
    _check_dimensions(n, k)
    return FlatOrientation(spans=np.eye(n)[:k])


@dataclass(frozen=True, eq=False)
class Flat:
    """tau + span(orientation), with tau given in normal-basis coordinates."""

    orientation: FlatOrientation
    normal_basis: NormalBasis
    tau: Vector


def make_flat(orientation: FlatOrientation, tau: ArrayLike) -> Flat:
    basis = orientation.normal_basis
    return Flat(orientation=orientation, normal_basis=basis, tau=as_vector(tau, dim=basis.shape[0]))


def ambient_anchor(flat: Flat) -> Vector:
    # tau reconstructed in R^n, perpendicular to the orientation
    return flat.tau @ flat.normal_basis


@dataclass(frozen=True)
class Face:
    """A codimension-k face of [-1, 1]^n: coordinates ``fixed_indices`` pinned at ``signs``."""

    n: int
    fixed_indices: Tuple[int, ...]
    signs: Tuple[int, ...]

    def __post_init__(self):
        fixed = tuple(int(i) for i in self.fixed_indices)
        signs = tuple(int(s) for s in self.signs)
        if len(fixed) != len(signs) or len(set(fixed)) != len(fixed):
            raise InvalidInputError('a face needs one sign per distinct fixed index')
        if any(i < 0 or i >= self.n for i in fixed) or any(s not in (-1, 1) for s in signs):
            raise InvalidInputError('face indices must lie in [0, %d) and signs in {-1, +1}' % self.n)
        object.__setattr__(self, 'fixed_indices', fixed)
        object.__setattr__(self, 'signs', signs)

    @property
    def k(self) -> int:
        return len(self.fixed_indices)

    @property
    def free_indices(self) -> Tuple[int, ...]:
        return tuple(i for i in range(self.n) if i not in self.fixed_indices)

    @property
    def sign_index(self) -> int:
        # position of the sign pattern in product((-1, 1), repeat=k)
        index = 0
        for s in self.signs:
            index = 2 * index + (1 if s > 0 else 0)
        return index


@dataclass(frozen=True, eq=False)
class SliceAnalysis:
    """Vertices of a slice together with per-face diagnostics.

    ``hits`` is indexed like (fixed subset in combinations order, sign pattern in
    product order) and records which faces the flat meets before deduplication.
    """

    vertices: np.ndarray
    hits: np.ndarray
    singular_faces: int
    near_boundary_hits: int

    @property
    def vertex_count(self) -> int:
        return self.vertices.shape[0]

    @property
    def duplicate_hits(self) -> int:
        return int(self.hits.sum()) - self.vertex_count

    @property
    def flagged(self) -> bool:
        return self.near_boundary_hits > 0 or self.duplicate_hits > 0


def _check_dimensions(n: int, k: int):
    if n < 1 or not 1 <= k <= n:
        raise InvalidInputError('slice dimension k must satisfy 1 <= k <= n, got n=%d, k=%d' % (n, k))


@lru_cache(maxsize=None)
def fixed_subsets(n: int, k: int) -> np.ndarray:
    subsets = np.array(list(combinations(range(n), k)), dtype=np.intp).reshape(-1, k)
    subsets.setflags(write=False)
    return subsets


@lru_cache(maxsize=None)
def sign_patterns(k: int) -> np.ndarray:
    patterns = np.array(list(product((-1.0, 1.0), repeat=k))).reshape(-1, k)
    patterns.setflags(write=False)
    return patterns


def enumerate_faces(n: int, k: int) -> List[Face]:
    """All C(n, k) * 2^k faces of [-1, 1]^n of dimension n - k, each once.

    Faces come grouped by fixed index subset (combinations order), signs varying
    fastest in product order.
    """
    _check_dimensions(n, k)
    return [
        Face(n=n, fixed_indices=fixed, signs=signs)
        for fixed in combinations(range(n), k)
        for signs in product((-1, 1), repeat=k)
    ]


def face_zonotope(body: Body, face: Face, basis: NormalBasis) -> Zonotope:
    """P_N(F) in normal coordinates, anchored at the face's true position.

    The face's base has its fixed cube coordinates at their signs and its free ones
    at -1; the generators are the body's edges along the free directions.
    """
    _check_face(body, face)
    y = np.full(body.n, -1.0)
    y[list(face.fixed_indices)] = face.signs
    base = body.center + body.half_edges @ y
    gens = body.edge_generators[list(face.free_indices)].reshape(-1, body.n)
    return project(Zonotope(base=base, generators=gens), basis)


def _check_face(body: Body, face: Face):
    if face.n != body.n:
        raise InvalidInputError('face of a %d-cube used with a body in R^%d' % (face.n, body.n))


def _check_flat(body: Body, flat: Flat):
    if flat.orientation.n != body.n:
        raise InvalidInputError('flat in R^%d used with a body in R^%d' % (flat.orientation.n, body.n))


def face_intersects(body: Body, flat: Flat, face: Face, tol: float = MEMBERSHIP_TOL) -> bool:
    """Whether the flat meets the face, i.e. whether tau lies in P_N(F)."""
    _check_flat(body, flat)
    return contains_relative(face_zonotope(body, face, flat.normal_basis), flat.tau, tol)


def face_intersection_mask(
    body: Body, orientation: FlatOrientation, taus: ArrayLike, tol: float = MEMBERSHIP_TOL
) -> np.ndarray:
    """face_intersects for many translations and every face at once.

    Faces sharing a fixed subset are translates of one projected zonotope, so the
    translations are shifted instead of rebuilding the face.

    Returns:
        numpy.ndarray: boolean array of shape (len(taus), C(n, k), 2^k)
    """
    n, k = orientation.n, orientation.k
    basis = orientation.normal_basis
    points = as_vector_list(taus, dim=basis.shape[0])
    patterns = sign_patterns(k)
    subsets = fixed_subsets(n, k)
    mask = np.empty((points.shape[0], subsets.shape[0], patterns.shape[0]), dtype=bool)

    for c, fixed in enumerate(subsets):
        first = Face(n=n, fixed_indices=tuple(fixed), signs=tuple(int(s) for s in patterns[0]))
        zono = face_zonotope(body, first, basis)
        # moving the fixed coordinates from the first pattern to pattern s shifts the face by this much
        shifts = ((patterns - patterns[0]) @ body.half_edges[:, fixed].T) @ basis.T
        shifted = points[:, np.newaxis, :] - shifts[np.newaxis, :, :]
        queries = shifted.reshape(points.shape[0] * patterns.shape[0], basis.shape[0])
        mask[:, c, :] = contains_relative_many(zono, queries, tol).reshape(points.shape[0], patterns.shape[0])
    return mask


# batched face solver over the given fixed subsets: points (C, S, n), hits (C, S), singular (C,), near (C, S)
def _solve_subsets(body: Body, flat: Flat, subsets: np.ndarray, tol: float):
    n, k = body.n, flat.orientation.k
    spans = flat.orientation.spans
    anchor = ambient_anchor(flat)
    patterns = sign_patterns(k)

    # the flat in cube coordinates: y(t) = y0 + w @ t
    w = body.to_cube @ spans.T
    y0 = body.to_cube @ (anchor - body.center)

    systems = w[subsets]
    det = np.linalg.det(systems)
    scale = np.prod(np.linalg.norm(systems, axis=2), axis=1)
    singular = np.abs(det) <= SINGULAR_TOL * scale
    safe = np.where(singular[:, np.newaxis, np.newaxis], np.eye(k), systems)

    rhs = patterns.T[np.newaxis, :, :] - y0[subsets][:, :, np.newaxis]
    t = np.linalg.solve(safe, rhs)
    y = y0[np.newaxis, :, np.newaxis] + w[np.newaxis, :, :] @ t

    free = np.ones((subsets.shape[0], n), dtype=bool)
    np.put_along_axis(free, subsets, False, axis=1)
    excess = np.where(free[:, :, np.newaxis], np.abs(y) - 1.0, -np.inf).max(axis=1, initial=-np.inf)

    hits = (excess <= tol) & ~singular[:, np.newaxis]
    near = hits & (excess >= -NEAR_BOUNDARY_FACTOR * tol)
    points = anchor + np.einsum('cks,kn->csn', t, spans)
    return points, hits, singular, near


def solve_face_vertex(body: Body, flat: Flat, face: Face, tol: float = MEMBERSHIP_TOL) -> Optional[Vector]:
    """The vertex the flat cuts out of a face, if any.

    Solves the k x k system pinning the face's fixed coordinates and accepts the
    solution when every free coordinate stays within the face (up to tol).
    A singular system (flat parallel to the face's normal directions) yields None.
    """
    _check_flat(body, flat)
    _check_face(body, face)
    if face.k != flat.orientation.k:
        k = flat.orientation.k
        raise InvalidInputError('a %d-flat meets faces of codimension %d, not %d' % (k, k, face.k))

    subset = np.array([face.fixed_indices], dtype=np.intp)
    points, hits, singular, near = _solve_subsets(body, flat, subset, tol)
    if singular[0]:
        logger.debug('singular face system for fixed coordinates %s', face.fixed_indices)
        return None
    s = face.sign_index
    if near[0, s]:
        logger.debug('near-boundary vertex on face %s %s', face.fixed_indices, face.signs)
    return points[0, s] if hits[0, s] else None


def analyze_slice(body: Body, flat: Flat, tol: float = MEMBERSHIP_TOL) -> SliceAnalysis:
    """Solve every face system, a batch of fixed subsets at a time, and collect the slice's vertices and diagnostics."""
    _check_flat(body, flat)
    n, k = body.n, flat.orientation.k
    _check_dimensions(n, k)

    subsets = fixed_subsets(n, k)
    batch = max(1, _FACE_BATCH_ENTRIES // (sign_patterns(k).shape[0] * n))
    hit_parts, found = [], []
    singular_faces = near_boundary_hits = 0
    for start in range(0, subsets.shape[0], batch):
        points, hits, singular, near = _solve_subsets(body, flat, subsets[start : start + batch], tol)
        hit_parts.append(hits)
        found.append(points[hits])
        singular_faces += int(singular.sum()) * hits.shape[1]
        near_boundary_hits += int(near.sum())

    analysis = SliceAnalysis(
        vertices=_dedupe(np.concatenate(found).reshape(-1, n), VERTEX_DEDUP_TOL, n),
        hits=np.concatenate(hit_parts),
        singular_faces=singular_faces,
        near_boundary_hits=near_boundary_hits,
    )
    if analysis.flagged:
        logger.debug(
            'degenerate slice: %d near-boundary hits, %d merged duplicates',
            analysis.near_boundary_hits,
            analysis.duplicate_hits,
        )
    return analysis


# helper function to merge vertices closer than tol, keeping the first of each cluster
def _dedupe(points: np.ndarray, tol: float, n: int) -> np.ndarray:
    kept: List[np.ndarray] = []
    for p in points:
        if kept and np.min(np.linalg.norm(np.array(kept) - p, axis=1)) <= tol:
            continue
        kept.append(p)
    return np.array(kept).reshape(len(kept), n)


def slice_vertices(body: Body, flat: Flat) -> List[Vector]:
    return list(analyze_slice(body, flat).vertices)


def vertex_count(body: Body, flat: Flat) -> int:
    """Number of vertices of the slice; 0 when the flat misses the body."""
    return analyze_slice(body, flat).vertex_count
