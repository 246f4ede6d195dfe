"""Errors raised by hyperslice.

Each error carries the process exit code the command line maps it to:
0 success, 1 verification failure, 2 invalid input, 3 degenerate geometry,
4 sampling failure.
"""

from typing import Optional


class HypersliceError(Exception):
    exit_code = 1


class InvalidInputError(HypersliceError, ValueError):
    exit_code = 2


class DegenerateOrientationError(HypersliceError):
    exit_code = 3


class DegenerateZonotopeError(HypersliceError):
    exit_code = 3


class InvariantViolationError(HypersliceError):
    """A geometric quantity that cannot vanish for valid inputs did."""

    exit_code = 3


class SamplingFailureError(HypersliceError):
    exit_code = 4

    def __init__(self, message: str, sample_index: Optional[int] = None):
        if sample_index is not None:
            message = 'sample %d: %s' % (sample_index, message)
        super().__init__(message)
        self.sample_index = sample_index


class VerificationFailure(HypersliceError):
    exit_code = 1
