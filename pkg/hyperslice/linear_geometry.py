import logging
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from hyperslice.constants import RANK_TOL
from hyperslice.exceptions import DegenerateOrientationError, InvalidInputError

logger = logging.getLogger(__name__)

# a Vector is a 1-d float array, a VectorList a 2-d array with one vector per row
Vector = np.ndarray
VectorList = np.ndarray
# rows are an orthonormal basis of the normal space N
NormalBasis = np.ndarray

ArrayLike = Union[np.ndarray, Sequence[float], Sequence[Sequence[float]]]


def as_vector(x: ArrayLike, dim: Optional[int] = None) -> Vector:
    try:
        v = np.asarray(x, dtype=float)
    except ValueError as err:
        raise InvalidInputError('vector is not a list of real numbers: %s' % err) from err
    if v.ndim != 1:
        raise InvalidInputError('expected a vector, got an array of shape %s' % (v.shape,))
    if dim is not None and v.shape[0] != dim:
        raise InvalidInputError('dimension mismatch: expected %d coordinates, got %d' % (dim, v.shape[0]))
    if not np.all(np.isfinite(v)):
        raise InvalidInputError('vector has non-finite coordinates')
    return v


def as_vector_list(vs: ArrayLike, dim: Optional[int] = None) -> VectorList:
    """Coerce vectors to a (count, dim) float array, checking that dimensions agree.

    An empty input needs ``dim`` to know its ambient dimension.
    """
    try:
        arr = np.asarray(vs, dtype=float)
    except ValueError as err:
        # ragged input
        raise InvalidInputError('dimension mismatch among vectors') from err
    if arr.size == 0 and arr.ndim <= 1:
        return np.zeros((0, dim if dim is not None else 0))
    if arr.ndim != 2:
        raise InvalidInputError('expected a list of vectors, got an array of shape %s' % (arr.shape,))
    if dim is not None and arr.shape[1] != dim:
        raise InvalidInputError('dimension mismatch: expected vectors in R^%d, got R^%d' % (dim, arr.shape[1]))
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError('vector list has non-finite coordinates')
    return arr


def gram_volume(vs: ArrayLike) -> float:
    """Volume of the parallelotope spanned by a set of vectors.

    Computes sqrt(det(G^T G)) with the vectors as the columns of G, i.e. the
    |vs|-dimensional volume of Z(vs). Square sets use |det G| directly.

    Args:
        vs: m vectors in R^d with d >= m >= 1

    Returns:
        float: the m-volume, 0 for linearly dependent sets
    """
    arr = as_vector_list(vs)
    m, d = arr.shape
    if m == 0:
        raise InvalidInputError('gram_volume needs at least one vector')
    if m > d:
        raise InvalidInputError('%d vectors cannot span a parallelotope in R^%d' % (m, d))
    return float(gram_volumes(arr[np.newaxis])[0])


def gram_volumes(stack: np.ndarray) -> np.ndarray:
    # batched gram_volume over a (batch, m, d) stack
    m, d = stack.shape[1], stack.shape[2]
    if m == 0:
        return np.ones(stack.shape[0])
    if m == d:
        return np.abs(np.linalg.det(stack))
    gram = stack @ np.swapaxes(stack, 1, 2)
    return np.sqrt(np.clip(np.linalg.det(gram), 0.0, None))


# modified Gram-Schmidt with column pivoting and one re-orthogonalization pass
def _pivoted_orthogonalization(vs: VectorList, tol: float) -> Tuple[VectorList, List[float]]:
    residual = np.array(vs, dtype=float)
    m, d = residual.shape
    remaining = list(range(m))
    basis: List[np.ndarray] = []
    pivots: List[float] = []
    threshold = None

    while remaining and len(basis) < d:
        norms = np.linalg.norm(residual[remaining], axis=1)
        j = int(np.argmax(norms))
        pivot = float(norms[j])
        if threshold is None:
            threshold = tol * (pivot if pivot > 0 else 1.0)
        if pivot <= threshold:
            break

        q = residual[remaining.pop(j)] / pivot
        for b in basis:
            q = q - (q @ b) * b
        q = q / np.linalg.norm(q)
        basis.append(q)
        pivots.append(pivot)

        if remaining:
            rows = residual[remaining]
            residual[remaining] = rows - np.outer(rows @ q, q)

    return np.array(basis).reshape(len(basis), d), pivots


def rank(vs: ArrayLike, tol: float = RANK_TOL) -> int:
    """Numerical rank via pivoted orthogonal elimination.

    A pivot counts iff its magnitude exceeds tol times the largest pivot (or tol
    itself when every vector vanishes).
    """
    if tol <= 0:
        raise InvalidInputError('rank tolerance must be positive')
    arr = as_vector_list(vs)
    if arr.shape[0] == 0:
        return 0
    _, pivots = _pivoted_orthogonalization(arr, tol)
    return len(pivots)


def span_basis(vs: ArrayLike, tol: float = RANK_TOL) -> VectorList:
    """Orthonormal basis (as rows) of the span of ``vs``."""
    arr = as_vector_list(vs)
    basis, _ = _pivoted_orthogonalization(arr, tol)
    return basis


def orthonormal_complement(orientation: ArrayLike, tol: float = RANK_TOL) -> NormalBasis:
    """Orthonormal basis of the subspace N normal to an orientation.

    Args:
        orientation: k linearly independent vectors in R^n
        tol: rank tolerance

    Returns:
        numpy.ndarray: (n - k, n) array whose rows are orthonormal and orthogonal to every orientation vector

    Raises:
        DegenerateOrientationError: if the orientation has rank below k
    """
    arr = as_vector_list(orientation)
    k, n = arr.shape
    basis, pivots = _pivoted_orthogonalization(arr, tol) if k else (np.zeros((0, n)), [])
    if len(pivots) < k:
        raise DegenerateOrientationError(
            'orientation of %d vectors in R^%d has numerical rank %d' % (k, n, len(pivots))
        )

    # grow the basis greedily from the standard basis vector with the largest residual
    spanned = list(basis)
    complement = []
    candidates = np.eye(n)
    for _ in range(n - k):
        q_mat = np.array(spanned).reshape(len(spanned), n)
        residual = candidates - (candidates @ q_mat.T) @ q_mat
        residual = residual - (residual @ q_mat.T) @ q_mat
        norms = np.linalg.norm(residual, axis=1)
        j = int(np.argmax(norms))
        q = residual[j] / norms[j]
        spanned.append(q)
        complement.append(q)

    return np.array(complement).reshape(n - k, n)


def project_onto_basis(x: ArrayLike, basis: NormalBasis) -> Vector:
    """Coordinates of x in an orthonormal basis: (<x, b_1>, ..., <x, b_r>)."""
    basis = np.asarray(basis, dtype=float)
    v = as_vector(x, dim=basis.shape[1] if basis.ndim == 2 else None)
    if basis.ndim != 2:
        raise InvalidInputError('basis must be a list of vectors')
    return basis @ v


def reconstruct(coords: ArrayLike, basis: NormalBasis) -> Vector:
    # inverse of project_onto_basis restricted to the span of the basis
    basis = np.asarray(basis, dtype=float)
    c = as_vector(coords, dim=basis.shape[0])
    return c @ basis


def null_normal(vs: ArrayLike) -> Vector:
    """Generalized cross product of d - 1 vectors in R^d.

    Expands the determinant of the matrix with rows v_1, ..., v_{d-1} and a symbolic
    last row along that row. The result is orthogonal to every input and its norm
    is gram_volume(vs); it is the zero vector iff the inputs are dependent.
    """
    arr = np.asarray(vs, dtype=float)
    if arr.ndim == 1 and arr.size == 0:
        raise InvalidInputError('null_normal needs the ambient dimension; pass an array of shape (0, 1)')
    arr = as_vector_list(arr)
    count, d = arr.shape
    if d < 1 or count != d - 1:
        raise InvalidInputError('null_normal needs exactly %d vectors in R^%d, got %d' % (d - 1, d, count))
    return null_normals(arr[np.newaxis])[0]


def null_normals(stack: np.ndarray) -> np.ndarray:
    # batched null_normal over a (batch, d - 1, d) stack
    batch, _, d = stack.shape
    if d == 1:
        return np.ones((batch, 1))
    out = np.empty((batch, d))
    for i in range(d):
        minor = np.delete(stack, i, axis=2)
        out[:, i] = (-1.0) ** (d + i + 1) * np.linalg.det(minor)
    return out


def make_rng(seed: int, *spawn_key: int) -> np.random.Generator:
    """Seeded PCG64 generator.

    Sub-streams are addressed by ``spawn_key``: ``make_rng(seed, c)`` is the
    stream numpy's ``SeedSequence(seed).spawn`` hands to child c.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=spawn_key)))


def sample_unit_sphere(rng: np.random.Generator, n: int) -> Vector:
    """Uniform draw from S^{n-1} by normalizing a standard Gaussian vector."""
    if n < 1:
        raise InvalidInputError('sphere dimension must be positive')
    while True:
        g = rng.standard_normal(n)
        norm = np.linalg.norm(g)
        if norm > 0:
            return g / norm
        logger.debug('redrawing all-zero gaussian sample')
