"""Eigenvalues of dense real symmetric matrices.

Backed by LAPACK's symmetric driver through :func:`scipy.linalg.eigvalsh`
(Householder tridiagonalization followed by an implicit QL/QR or
divide-and-conquer reduction). Eigenvectors are never formed.
"""

import numpy as np
import scipy.linalg

from .exceptions import ContractError, NumericalError

DEFAULT_TOL = 1e-10


def trace(A):
    return float(np.trace(np.asarray(A, dtype=float)))


def eigenvalues_symmetric(A, tol=DEFAULT_TOL):
    """Return all eigenvalues of symmetric ``A`` in ascending order.

    ``tol`` is the accepted relative residual ``|Av - lv| / |A|``; the
    backward-stable LAPACK reduction already achieves a residual of the order
    of machine epsilon, so the value only guards against meaningless requests
    below working precision.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ContractError(f"expected a square matrix, got shape {A.shape}")
    if tol < np.finfo(float).eps:
        raise ContractError(f"tol must be >= machine epsilon, got {tol}")
    if not np.array_equal(A, A.T):
        raise ContractError("matrix is not symmetric")
    try:
        values = scipy.linalg.eigvalsh(A, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(
            f"eigenvalue iteration failed for matrix of order {A.shape[0]}: {exc}",
            order=A.shape[0],
        ) from exc
    return np.sort(values)
