"""Command line entry point.

Commands:
    exact    exact expected vertex count and face probability table for one orientation
    mc       Monte Carlo estimate of the expected vertex count
    faces    exact face probabilities next to simulated face-hit frequencies
    verify   sweep of the 2^k identity over dimensions, slice dimensions and random orientations

stdout carries the JSON payload, stderr the logs. Exit codes: 0 success,
1 verification failure, 2 invalid input, 3 degenerate geometry, 4 sampling failure.
"""

import argparse
import json
import logging
import math
import os
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from hyperslice._version import __version__
from hyperslice.bodies_io import resolve_body, resolve_orientation, write_body, write_orientation
from hyperslice.constants import MAX_SEED, RNG_ALGORITHM
from hyperslice.exceptions import HypersliceError, InvalidInputError, VerificationFailure
from hyperslice.expectation import probability_table, telescoping_check
from hyperslice.linear_geometry import make_rng
from hyperslice.monte_carlo import (
    ORIENTATION_MODES,
    SimulationConfig,
    compare_with_exact,
    estimate_expected_vertices,
    face_hit_frequencies,
    sample_orientation,
)
from hyperslice.slice_geometry import Body, random_parallelotope, standard_cube

logger = logging.getLogger(__name__)

SEED_ENV = 'HYPERSLICE_SEED'
SCHEMA_DIR = Path(__file__).parent / 'schemas'


@dataclass
class RunManifest:
    command: str
    config: Dict[str, Any]
    version: str
    rng_algorithm: str
    seed: Optional[int]
    duration_seconds: float


def _body_dict(body: Body) -> dict:
    return {'edge_generators': body.edge_generators.tolist(), 'base': body.base.tolist()}


def _source_seed(source: Optional[str]) -> Optional[int]:
    if source and source.startswith('random:'):
        try:
            return int(source.split(':', 1)[1])
        except ValueError:
            return None
    return None


def resolve_seed(flag: Optional[int]) -> int:
    """--seed if given, else $HYPERSLICE_SEED, else 0."""
    if flag is not None:
        seed = flag
    else:
        raw = os.environ.get(SEED_ENV)
        try:
            seed = int(raw) if raw else 0
        except ValueError as err:
            raise InvalidInputError('%s must be an integer, got %r' % (SEED_ENV, raw)) from err
    if not 0 <= seed <= MAX_SEED:
        raise InvalidInputError('seed must be an unsigned 64-bit integer, got %d' % seed)
    return seed


def parse_range(text: str) -> List[int]:
    """'3' or '1..8' (inclusive)."""
    try:
        if '..' in text:
            low, high = (int(part) for part in text.split('..', 1))
        else:
            low = high = int(text)
    except ValueError as err:
        raise InvalidInputError('expected N or LOW..HIGH, got %r' % text) from err
    if low < 1 or high < low:
        raise InvalidInputError('invalid dimension range %r' % text)
    return list(range(low, high + 1))


def parse_k_policy(text: str, n: int) -> List[int]:
    if text == 'all':
        return list(range(1, n + 1))
    try:
        ks = sorted({int(part) for part in text.split(',')})
    except ValueError as err:
        raise InvalidInputError("expected 'all' or a comma-separated list of k, got %r" % text) from err
    if any(k < 1 for k in ks):
        raise InvalidInputError('slice dimensions must be positive')
    return [k for k in ks if k <= n]


def _finite(value: float) -> Optional[float]:
    # JSON has no infinity
    return value if math.isfinite(value) else None


def _emit(command: str, payload: dict, config: dict, seed: Optional[int], started: float):
    manifest = RunManifest(
        command=command,
        config=config,
        version=__version__,
        rng_algorithm=RNG_ALGORITHM,
        seed=seed,
        duration_seconds=time.perf_counter() - started,
    )
    payload['manifest'] = asdict(manifest)
    sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + '\n')
    sys.stdout.flush()


def cmd_exact(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    orientation = resolve_orientation(args.orientation, args.n, args.k)
    body = resolve_body(args.body, args.n)
    table = probability_table(body, orientation)
    lhs, rhs = telescoping_check(body, orientation)

    expected = 2**args.k
    payload = {
        'command': 'exact',
        'n': args.n,
        'k': args.k,
        'expectation': table.total_expectation,
        'expected': expected,
        'deviation': abs(table.total_expectation - expected),
        'telescoping': {'lhs': lhs, 'rhs': rhs, 'relative_difference': abs(lhs - rhs) / rhs},
        'projected_volume': table.projected_volume,
        'table': table.to_dict()['entries'],
        'orientation': orientation.spans.tolist(),
        'body': _body_dict(body),
    }
    logger.info('expected vertex count %.15g (2^k = %d)', table.total_expectation, expected)
    config = {'n': args.n, 'k': args.k, 'orientation': args.orientation, 'body': args.body or 'cube'}
    _emit('exact', payload, config, _source_seed(args.orientation), started)
    return 0


def _simulation_config(args: argparse.Namespace, mode: str) -> SimulationConfig:
    seed = resolve_seed(args.seed)
    orientation = None
    if mode == 'fixed':
        if not args.orientation:
            raise InvalidInputError('--mode fixed needs --orientation')
        orientation = resolve_orientation(args.orientation, args.n, args.k)
    return SimulationConfig(
        n=args.n,
        k=args.k,
        samples=args.samples,
        seed=seed,
        orientation_mode=mode,
        orientation=orientation,
        body=resolve_body(args.body, args.n),
        translation_resample_per_orientation=getattr(args, 'resample', 1),
    )


def cmd_mc(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    config = _simulation_config(args, args.mode)
    logger.info('running on %d worker(s)', args.threads)
    report = estimate_expected_vertices(config, workers=args.threads)

    if args.hist:
        report.histogram_frame().to_csv(args.hist, index=False)
        logger.info('histogram written to %s', args.hist)

    payload = {'command': 'mc', 'expected': 2**args.k, **report.to_dict()}
    _emit('mc', payload, config.to_dict(), config.seed, started)
    return 0


def cmd_faces(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    config = _simulation_config(args, 'axis' if args.orientation == 'axis' else 'fixed')
    orientation = config.orientation
    if orientation is None:
        orientation = resolve_orientation('axis', args.n, args.k)
    table = probability_table(config.body, orientation)
    frequencies = face_hit_frequencies(config, workers=args.threads)
    comparison = compare_with_exact(table, frequencies, config.samples)

    payload = {
        'command': 'faces',
        'n': args.n,
        'k': args.k,
        'samples': config.samples,
        'max_abs_z_score': _finite(float(comparison['z_score'].abs().max())),
        'rows': [
            {
                'free_indices': list(row.free_indices),
                'probability': float(row.probability),
                'frequency': float(row.frequency),
                'std_error': float(row.std_error),
                'z_score': _finite(float(row.z_score)),
            }
            for row in comparison.itertuples(index=False)
        ],
    }
    _emit('faces', payload, config.to_dict(), config.seed, started)
    return 0


def _verify_body(source: str, rng, n: int, fixed_body: Optional[Body]) -> Body:
    if source == 'cube':
        return standard_cube(n)
    if source == 'random':
        return random_parallelotope(rng, n)
    return fixed_body


def cmd_verify(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    seed = resolve_seed(args.seed)
    dimensions = parse_range(args.n)
    fixed_body = None
    if args.body not in ('cube', 'random'):
        if len(dimensions) != 1:
            raise InvalidInputError('a body file fixes n; pass a single dimension with --n')
        fixed_body = resolve_body(args.body, dimensions[0])
    if args.trials < 1:
        raise InvalidInputError('--trials must be at least 1')
    plan = [(n, k) for n in dimensions for k in parse_k_policy(args.k, n)]
    if not plan:
        raise InvalidInputError('no slice dimension in %r fits n in %r' % (args.k, args.n))

    rows = []
    violations = []
    for n, k in plan:
        for trial in range(args.trials):
            rng = make_rng(seed, n, k, trial)
            orientation = sample_orientation(rng, n, k)
            body = _verify_body(args.body, rng, n, fixed_body)
            expectation = probability_table(body, orientation).total_expectation
            lhs, rhs = telescoping_check(body, orientation)
            deviation = abs(expectation - 2**k)
            telescoping = abs(lhs - rhs) / rhs
            rows.append({'n': n, 'k': k, 'trial': trial, 'deviation': deviation, 'telescoping': telescoping})
            if deviation > args.tol or telescoping > args.tol:
                violations.append(
                    {
                        'n': n,
                        'k': k,
                        'trial': trial,
                        'expectation': expectation,
                        'deviation': deviation,
                        'telescoping': telescoping,
                        'orientation': orientation.spans.tolist(),
                        'body': _body_dict(body),
                    }
                )
                if args.dump_violations:
                    _dump_violation(Path(args.dump_violations), n, k, trial, orientation, body)

    frame = pd.DataFrame(rows)
    summary = frame.groupby(['n', 'k']).agg(
        trials=('trial', 'count'), max_deviation=('deviation', 'max'), max_telescoping=('telescoping', 'max')
    )
    summary['passed'] = (summary['max_deviation'] <= args.tol) & (summary['max_telescoping'] <= args.tol)
    print(summary.to_string(), file=sys.stderr)

    payload = {
        'command': 'verify',
        'tolerance': args.tol,
        'passed': not violations,
        'max_deviation': float(frame['deviation'].max()),
        'max_telescoping': float(frame['telescoping'].max()),
        'summary': [
            {
                'n': int(n),
                'k': int(k),
                'trials': int(row.trials),
                'max_deviation': float(row.max_deviation),
                'max_telescoping': float(row.max_telescoping),
                'passed': bool(row.passed),
            }
            for (n, k), row in summary.iterrows()
        ],
        'violations': violations,
    }
    config = {'n': args.n, 'k': args.k, 'trials': args.trials, 'tol': args.tol, 'body': args.body}
    _emit('verify', payload, config, seed, started)
    if violations:
        raise VerificationFailure('%d of %d trials exceed tolerance %g' % (len(violations), len(rows), args.tol))
    return 0


def _dump_violation(directory: Path, n: int, k: int, trial: int, orientation, body: Body):
    directory.mkdir(parents=True, exist_ok=True)
    stem = 'violation_n%d_k%d_t%d' % (n, k, trial)
    write_orientation(directory / (stem + '.orientation'), orientation)
    write_body(directory / (stem + '.body'), body)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError('must be a positive integer')
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='hyperslice',
        description='Vertex statistics of random slices of hypercubes and parallelotopes.',
        allow_abbrev=False,
    )
    parser.add_argument('--version', action='version', version='%(prog)s ' + __version__)
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true', help='debug logging on stderr')
    verbosity.add_argument('-q', '--quiet', action='store_true', help='warnings and errors only')
    commands = parser.add_subparsers(dest='command', required=True)

    body_help = "body: 'cube' (default), 'random:<seed>' or a body file (n, n generator rows, base row)"
    orientation_help = "orientation: a file (one vector per line), 'random:<seed>' or 'axis'"

    exact = commands.add_parser('exact', help='exact expected vertex count', allow_abbrev=False)
    exact.add_argument('--n', type=_positive_int, required=True, help='ambient dimension (at most 20)')
    exact.add_argument('--k', type=_positive_int, required=True, help='slice dimension')
    exact.add_argument('--orientation', required=True, help=orientation_help)
    exact.add_argument('--body', default=None, help=body_help)
    exact.set_defaults(handler=cmd_exact)

    mc = commands.add_parser('mc', help='Monte Carlo estimate', allow_abbrev=False)
    mc.add_argument('--n', type=_positive_int, required=True, help='ambient dimension (at most 20)')
    mc.add_argument('--k', type=_positive_int, required=True, help='slice dimension')
    mc.add_argument('--samples', type=_positive_int, default=10000)
    mc.add_argument('--seed', type=int, default=None, help='64-bit seed (default: $%s or 0)' % SEED_ENV)
    mc.add_argument('--mode', choices=ORIENTATION_MODES, default='isotropic')
    mc.add_argument('--orientation', default=None, help=orientation_help + ' (for --mode fixed)')
    mc.add_argument('--body', default=None, help=body_help)
    mc.add_argument('--resample', type=_positive_int, default=1, help='translations per isotropic orientation')
    mc.add_argument('--threads', type=_positive_int, default=1, help='worker processes; results do not change')
    mc.add_argument('--hist', default=None, help='write the histogram as count,frequency CSV')
    mc.set_defaults(handler=cmd_mc)

    faces = commands.add_parser('faces', help='face probabilities vs. simulated hit frequencies', allow_abbrev=False)
    faces.add_argument('--n', type=_positive_int, required=True, help='ambient dimension (at most 20)')
    faces.add_argument('--k', type=_positive_int, required=True, help='slice dimension')
    faces.add_argument('--orientation', required=True, help=orientation_help)
    faces.add_argument('--samples', type=_positive_int, default=10000)
    faces.add_argument('--seed', type=int, default=None, help='64-bit seed (default: $%s or 0)' % SEED_ENV)
    faces.add_argument('--body', default=None, help=body_help)
    faces.add_argument('--threads', type=_positive_int, default=1, help='worker processes; results do not change')
    faces.set_defaults(handler=cmd_faces)

    verify = commands.add_parser('verify', help='sweep the 2^k identity', allow_abbrev=False)
    verify.add_argument('--n', default='1..8', help='dimension or inclusive range LOW..HIGH (default 1..8)')
    verify.add_argument('--k', default='all', help="'all' or a comma-separated list of slice dimensions")
    verify.add_argument('--trials', type=int, default=20, help='random orientations per (n, k)')
    verify.add_argument('--seed', type=int, default=None, help='64-bit seed (default: $%s or 0)' % SEED_ENV)
    verify.add_argument('--tol', type=float, default=1e-6, help='allowed deviation from 2^k')
    verify.add_argument('--body', default='cube', help="'cube', 'random' (fresh body per trial) or a body file")
    verify.add_argument('--dump-violations', default=None, help='directory for replayable orientation/body files')
    verify.set_defaults(handler=cmd_verify)
    return parser


def configure_logging(verbose: bool = False, quiet: bool = False):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    # no-op when the host (e.g. a test runner) already installed handlers
    logging.basicConfig(stream=sys.stderr, format='%(asctime)s %(name)s %(levelname)s %(message)s')
    logging.getLogger('hyperslice').setLevel(level)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    try:
        return args.handler(args)
    except HypersliceError as err:
        logger.error('%s', err)
        return err.exit_code


if __name__ == '__main__':
    sys.exit(main())
