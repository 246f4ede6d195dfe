"""Plain-text orientation and body files.

An orientation file holds one vector per line as whitespace-separated decimals.
A body file holds n on its first line, then the n edge generator rows, then the
base row. Blank lines and lines starting with '#' are ignored. Floats are written
in shortest round-trip form, so reading a written file gives identical values.
"""

import logging
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from hyperslice.constants import MAX_SEED
from hyperslice.exceptions import InvalidInputError
from hyperslice.linear_geometry import make_rng
from hyperslice.monte_carlo import sample_orientation
from hyperslice.slice_geometry import Body, FlatOrientation, axis_orientation, random_parallelotope, standard_cube

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _read_rows(path: PathLike) -> List[List[float]]:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise InvalidInputError('cannot read %s: %s' % (path, err)) from err
    rows = []
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith('#'):
            continue
        try:
            rows.append([float(token) for token in line.split()])
        except ValueError as err:
            raise InvalidInputError('%s line %d: %s' % (path, number, err)) from err
    return rows


def _format_row(values: np.ndarray) -> str:
    return ' '.join(repr(float(v)) for v in values)


def read_orientation(path: PathLike, n: Optional[int] = None, k: Optional[int] = None) -> FlatOrientation:
    rows = _read_rows(path)
    if not rows:
        raise InvalidInputError('orientation file %s is empty' % path)
    if len({len(r) for r in rows}) != 1:
        raise InvalidInputError('orientation file %s mixes vector dimensions' % path)
    if n is not None and len(rows[0]) != n:
        raise InvalidInputError('orientation file %s has vectors in R^%d, expected R^%d' % (path, len(rows[0]), n))
    if k is not None and len(rows) != k:
        raise InvalidInputError('orientation file %s has %d vectors, expected %d' % (path, len(rows), k))
    return FlatOrientation.from_vectors(rows)


def write_orientation(path: PathLike, orientation: FlatOrientation):
    Path(path).write_text(''.join(_format_row(v) + '\n' for v in orientation.spans))


def read_body(path: PathLike, n: Optional[int] = None) -> Body:
    rows = _read_rows(path)
    if not rows or len(rows[0]) != 1 or not rows[0][0].is_integer() or rows[0][0] < 1:
        raise InvalidInputError('body file %s must start with the dimension n on its own line' % path)
    dim = int(rows[0][0])
    if n is not None and dim != n:
        raise InvalidInputError('body file %s describes a body in R^%d, expected R^%d' % (path, dim, n))
    if len(rows) != dim + 2 or any(len(r) != dim for r in rows[1:]):
        raise InvalidInputError('body file %s needs %d generator rows and a base row of %d numbers' % (path, dim, dim))
    return Body(edge_generators=rows[1 : dim + 1], base=rows[dim + 1])


def write_body(path: PathLike, body: Body):
    lines = [str(body.n)] + [_format_row(g) for g in body.edge_generators] + [_format_row(body.base)]
    Path(path).write_text('\n'.join(lines) + '\n')


def _parse_seed(source: str) -> int:
    try:
        seed = int(source.split(':', 1)[1])
    except ValueError as err:
        raise InvalidInputError('expected random:<seed>, got %r' % source) from err
    if not 0 <= seed <= MAX_SEED:
        raise InvalidInputError('seed must be an unsigned 64-bit integer, got %d' % seed)
    return seed


def resolve_orientation(source: str, n: int, k: int) -> FlatOrientation:
    """Orientation from a file path, 'random:<seed>' or 'axis'."""
    if source == 'axis':
        return axis_orientation(n, k)
    if source.startswith('random:'):
        return sample_orientation(make_rng(_parse_seed(source)), n, k)
    return read_orientation(source, n, k)


def resolve_body(source: Optional[str], n: int) -> Body:
    """Body from a file path, 'random:<seed>' or 'cube' (the default)."""
    if source is None or source == 'cube':
        return standard_cube(n)
    if source.startswith('random:'):
        return random_parallelotope(make_rng(_parse_seed(source)), n)
    return read_body(source, n)
