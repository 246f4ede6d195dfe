import logging
import math
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from hyperslice.constants import (
    CHUNK_SIZE,
    MAX_DIMENSION,
    MAX_ORIENTATION_REDRAWS,
    MAX_PROPOSALS,
    MAX_SEED,
    MEMBERSHIP_TOL,
    RANK_TOL,
)
from hyperslice.exceptions import InvalidInputError, InvariantViolationError, SamplingFailureError
from hyperslice.expectation import FaceProbabilityTable
from hyperslice.linear_geometry import Vector, make_rng, rank, sample_unit_sphere
from hyperslice.slice_geometry import (
    Body,
    FlatOrientation,
    analyze_slice,
    axis_orientation,
    face_intersection_mask,
    fixed_subsets,
    make_flat,
    standard_cube,
)
from hyperslice.zonotope import RejectionStats, Zonotope, project, sample_uniform

logger = logging.getLogger(__name__)

ORIENTATION_MODES = ('isotropic', 'fixed', 'axis')


@dataclass(frozen=True, eq=False)
class SimulationConfig:
    """Everything a simulation run depends on.

    Results are a function of this config alone: the worker count is not part of it.
    Each chunk of ``chunk_size`` consecutive samples draws from its own stream,
    ``make_rng(seed, chunk_index)``.
    """

    n: int
    k: int
    samples: int
    seed: int = 0
    orientation_mode: str = 'isotropic'
    orientation: Optional[FlatOrientation] = None
    body: Optional[Body] = None
    translation_resample_per_orientation: int = 1
    chunk_size: int = CHUNK_SIZE
    tol: float = MEMBERSHIP_TOL
    max_proposals: int = MAX_PROPOSALS

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise InvalidInputError('slice dimension k must satisfy 1 <= k <= n, got n=%d, k=%d' % (self.n, self.k))
        if self.n > MAX_DIMENSION:
            raise InvalidInputError('n=%d exceeds the supported maximum of %d' % (self.n, MAX_DIMENSION))
        if self.samples < 1:
            raise InvalidInputError('samples must be at least 1')
        if not 0 <= self.seed <= MAX_SEED:
            raise InvalidInputError('seed must be an unsigned 64-bit integer')
        if self.orientation_mode not in ORIENTATION_MODES:
            raise InvalidInputError('orientation mode must be one of %s' % ', '.join(ORIENTATION_MODES))
        if self.orientation_mode == 'fixed':
            if self.orientation is None:
                raise InvalidInputError('fixed orientation mode needs an orientation')
            if (self.orientation.n, self.orientation.k) != (self.n, self.k):
                raise InvalidInputError('orientation shape does not match n=%d, k=%d' % (self.n, self.k))
        if self.body is None:
            object.__setattr__(self, 'body', standard_cube(self.n))
        elif self.body.n != self.n:
            raise InvalidInputError('body in R^%d used with n=%d' % (self.body.n, self.n))
        if self.translation_resample_per_orientation < 1 or self.chunk_size < 1:
            raise InvalidInputError('resample count and chunk size must be positive')

    def to_dict(self) -> dict:
        return {
            'n': self.n,
            'k': self.k,
            'samples': self.samples,
            'seed': self.seed,
            'orientation_mode': self.orientation_mode,
            'orientation': None if self.orientation is None else self.orientation.spans.tolist(),
            'body': {'edge_generators': self.body.edge_generators.tolist(), 'base': self.body.base.tolist()},
            'translation_resample_per_orientation': self.translation_resample_per_orientation,
            'chunk_size': self.chunk_size,
            'tol': self.tol,
            'max_proposals': self.max_proposals,
        }


@dataclass(frozen=True, eq=False)
class EstimateReport:
    """Monte Carlo estimate of the expected vertex count.

    ``histogram`` maps vertex count to the number of samples with that count.
    ``degenerate_count`` counts slices with 1..k vertices, ``flagged_count`` those
    with near-boundary hits or merged duplicate vertices; both are included in the mean.
    """

    mean: float
    std_error: float
    histogram: Dict[int, int]
    samples_used: int
    degenerate_count: int
    flagged_count: int
    orientation_redraws: int
    rejection_acceptance_rate: float
    proposals: int
    seed: int
    config: dict = field(default_factory=dict)

    def histogram_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {'count': list(self.histogram.keys()), 'frequency': list(self.histogram.values())}
        ).sort_values('count', ignore_index=True)

    def to_dict(self) -> dict:
        return {
            'mean': self.mean,
            'std_error': self.std_error,
            'histogram': {str(c): f for c, f in sorted(self.histogram.items())},
            'samples_used': self.samples_used,
            'degenerate_count': self.degenerate_count,
            'flagged_count': self.flagged_count,
            'orientation_redraws': self.orientation_redraws,
            'rejection_acceptance_rate': self.rejection_acceptance_rate,
            'proposals': self.proposals,
            'seed': self.seed,
            'config': self.config,
        }


@dataclass
class _ChunkResult:
    counts: np.ndarray
    degenerate: int
    flagged: int
    redraws: int
    stats: RejectionStats
    face_hits: Optional[np.ndarray]


def _draw_orientation(rng: np.random.Generator, n: int, k: int) -> Tuple[FlatOrientation, int]:
    for redraws in range(MAX_ORIENTATION_REDRAWS):
        spans = np.array([sample_unit_sphere(rng, n) for _ in range(k)])
        if rank(spans, RANK_TOL) == k:
            return FlatOrientation(spans=spans), redraws
        logger.debug('redrawing rank-deficient orientation')
    raise InvariantViolationError(
        '%d consecutive rank-deficient orientations; the random generator is broken' % MAX_ORIENTATION_REDRAWS
    )


def sample_orientation(rng: np.random.Generator, n: int, k: int) -> FlatOrientation:
    """k independent uniform directions on S^{n-1}, redrawn together until linearly independent."""
    if not 1 <= k <= n:
        raise InvalidInputError('slice dimension k must satisfy 1 <= k <= n, got n=%d, k=%d' % (n, k))
    return _draw_orientation(rng, n, k)[0]


def sample_translation(
    rng: np.random.Generator,
    body: Body,
    orientation: FlatOrientation,
    stats: Optional[RejectionStats] = None,
    max_proposals: int = MAX_PROPOSALS,
) -> Vector:
    """Uniform tau in P_N(body), in normal-basis coordinates."""
    shadow = project(body.zonotope, orientation.normal_basis)
    return sample_uniform(shadow, rng, stats, max_proposals)


def _chunk_orientation(config: SimulationConfig, rng: np.random.Generator) -> Tuple[FlatOrientation, int]:
    if config.orientation_mode == 'fixed':
        return config.orientation, 0
    if config.orientation_mode == 'axis':
        return axis_orientation(config.n, config.k), 0
    return _draw_orientation(rng, config.n, config.k)


# worker: simulate samples [start, stop) of chunk ``index``; top level so process pools can pickle it
def _run_chunk(task: Tuple[SimulationConfig, int, int, int, bool]) -> _ChunkResult:
    config, index, start, stop, track_faces = task
    rng = make_rng(config.seed, index)
    body = config.body
    stats = RejectionStats()
    counts = np.empty(stop - start, dtype=np.int64)
    taus: List[np.ndarray] = []
    degenerate = flagged = redraws = 0
    orientation: Optional[FlatOrientation] = None
    shadow: Optional[Zonotope] = None

    for i in range(start, stop):
        resample = config.orientation_mode == 'isotropic' and i % config.translation_resample_per_orientation == 0
        if orientation is None or resample:
            orientation, extra = _chunk_orientation(config, rng)
            redraws += extra
            shadow = project(body.zonotope, orientation.normal_basis)

        try:
            tau = sample_uniform(shadow, rng, stats, config.max_proposals)
        except SamplingFailureError as err:
            raise SamplingFailureError(str(err), sample_index=i) from err

        analysis = analyze_slice(body, make_flat(orientation, tau), config.tol)
        count = analysis.vertex_count
        counts[i - start] = count
        if 0 < count < config.k + 1:
            degenerate += 1
        if analysis.flagged:
            flagged += 1
        if track_faces:
            taus.append(tau)

    face_hits = None
    if track_faces:
        points = np.array(taus).reshape(len(taus), config.n - config.k)
        mask = face_intersection_mask(body, orientation, points, config.tol)
        face_hits = mask.sum(axis=0)
    return _ChunkResult(counts, degenerate, flagged, redraws, stats, face_hits)


def _simulate(config: SimulationConfig, workers: int, track_faces: bool) -> List[_ChunkResult]:
    if workers < 1:
        raise InvalidInputError('worker count must be positive')
    tasks = [
        (config, index, start, min(start + config.chunk_size, config.samples), track_faces)
        for index, start in enumerate(range(0, config.samples, config.chunk_size))
    ]
    logger.info(
        'simulating %d samples (n=%d, k=%d, %s) in %d chunks on %d workers',
        config.samples,
        config.n,
        config.k,
        config.orientation_mode,
        len(tasks),
        workers,
    )
    if workers == 1 or len(tasks) == 1:
        return [_run_chunk(task) for task in tasks]
    with Pool(processes=min(workers, len(tasks))) as pool:
        # map keeps chunk order, so the reduction below does not depend on scheduling
        return pool.map(_run_chunk, tasks)


def estimate_expected_vertices(config: SimulationConfig, workers: int = 1) -> EstimateReport:
    """Estimate the expected vertex count of random slices.

    Each sample draws an orientation according to the config's mode, a uniform
    translation in P_N(body), and counts the slice's vertices.

    Args:
        config (SimulationConfig): the run's parameters
        workers (int): worker processes; does not affect the result

    Returns:
        EstimateReport: mean, standard error, histogram and diagnostics
    """
    chunks = _simulate(config, workers, track_faces=False)
    counts = np.concatenate([c.counts for c in chunks])
    stats = RejectionStats()
    for c in chunks:
        stats.merge(c.stats)

    values, frequencies = np.unique(counts, return_counts=True)
    std_error = float(np.std(counts, ddof=1) / math.sqrt(counts.size)) if counts.size > 1 else 0.0
    report = EstimateReport(
        mean=float(np.mean(counts)),
        std_error=std_error,
        histogram={int(v): int(f) for v, f in zip(values, frequencies)},
        samples_used=int(counts.size),
        degenerate_count=sum(c.degenerate for c in chunks),
        flagged_count=sum(c.flagged for c in chunks),
        orientation_redraws=sum(c.redraws for c in chunks),
        rejection_acceptance_rate=stats.acceptance_rate,
        proposals=stats.proposals,
        seed=config.seed,
        config=config.to_dict(),
    )
    logger.info('mean vertex count %.6f +/- %.6f over %d samples', report.mean, report.std_error, report.samples_used)
    if report.degenerate_count or report.flagged_count:
        logger.warning(
            '%d degenerate and %d flagged slices (included in the mean)', report.degenerate_count, report.flagged_count
        )
    return report


def face_hit_frequencies(config: SimulationConfig, workers: int = 1) -> Dict[Tuple[int, ...], float]:
    """Empirical probability that a slice meets a face, per subset of free coordinates.

    Uses the projected-face membership test, averaged over the 2^k faces of each
    subset, so the values compare directly with the exact probability table.
    """
    if config.orientation_mode == 'isotropic':
        raise InvalidInputError('face-hit frequencies need a fixed (or axis) orientation')
    chunks = _simulate(config, workers, track_faces=True)
    hits = np.sum([c.face_hits for c in chunks], axis=0)
    n, k = config.n, config.k
    scale = config.samples * 2**k
    frequencies = {}
    for fixed, row in zip(fixed_subsets(n, k), hits):
        free = tuple(i for i in range(n) if i not in fixed)
        frequencies[free] = float(row.sum()) / scale
    return dict(sorted(frequencies.items()))


def compare_with_exact(
    table: FaceProbabilityTable, frequencies: Dict[Tuple[int, ...], float], samples: int
) -> pd.DataFrame:
    """Exact probabilities next to face-hit frequencies, with binomial z-scores.

    The standard error of a single face's hit frequency, sqrt(p (1 - p) / samples),
    bounds that of the average over the subset's faces.
    """
    frame = table.entries[['free_indices', 'probability']].copy()
    frame['frequency'] = [frequencies[tuple(s)] for s in frame['free_indices']]
    p = frame['probability'].clip(0.0, 1.0)
    frame['std_error'] = np.sqrt(p * (1.0 - p) / samples)
    diff = frame['frequency'] - frame['probability']
    with np.errstate(divide='ignore', invalid='ignore'):
        z = np.where(frame['std_error'] > 0, diff / frame['std_error'], np.where(np.abs(diff) > 1e-12, np.inf, 0.0))
    frame['z_score'] = z
    return frame
