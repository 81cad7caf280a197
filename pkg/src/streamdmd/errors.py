"""Exception types shared across the package.

Every error raised on purpose by this package derives from ``DmdError``, so
callers can catch one type at an API boundary.  The subtypes split along the
lines a command line tool needs: bad parameters versus bad data versus a
regressor matrix that is numerically unusable.
"""

import numpy as np


class DmdError(Exception):
    """Base class for all errors raised by streamdmd."""


class ParameterError(DmdError, ValueError):
    """An argument is outside its documented range or missing.

    Examples: a forgetting factor outside (0, 1], a non-positive
    regularization weight, a window length below the state dimension.
    """


class ShapeError(DmdError, ValueError):
    """Array arguments have inconsistent or wrong dimensions."""


class DataError(DmdError, ValueError):
    """Input values are unusable: NaN or infinity in a snapshot."""


class ParseError(DmdError, ValueError):
    """A text stream does not follow the snapshot CSV format.

    Carries the one-based line number when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InsufficientDataError(DmdError, ValueError):
    """Too few snapshots for the requested operation.

    A least-squares fit of an n-dimensional operator needs at least n
    snapshot pairs; with fewer the model is underdetermined and will tend
    to overfit.
    """


class RankError(DmdError, np.linalg.LinAlgError):
    """The snapshot Gram matrix is singular or too ill conditioned.

    Raised instead of silently producing garbage when the estimated
    condition number exceeds ``kernel.CONDITION_LIMIT`` or a factorization
    fails.
    """
