"""
Cyclic Jacobi eigenvalue solver for small dense Hermitian matrices.

Each rotation first removes the phase of the pivot element a[p, q] with a
diagonal unitary, then applies the real symmetric Jacobi rotation that zeroes
it. Sweeps run over all (p, q) pairs until the off-diagonal Frobenius norm
drops below ``tol``.
"""

from math import sqrt

import numpy as np

from .error_handling import InvalidParameter, NumericalInconsistency
from .logger import get_logger

logger = get_logger(__name__)

DEFAULT_TOLERANCE = 1e-12
DEFAULT_MAX_SWEEPS = 100


def off_diagonal_norm(a: np.ndarray) -> float:
    """Frobenius norm of the strictly off-diagonal part."""
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def _rotation(app: float, aqq: float, apq: complex) -> np.ndarray:
    """2x2 unitary J with (J^H A J)[p, q] == 0 for the given pivot block."""
    r = abs(apq)
    phase = apq / r
    theta = (aqq - app) / (2.0 * r)
    t = 1.0 / (abs(theta) + sqrt(theta * theta + 1.0))
    if theta < 0.0:
        t = -t
    c = 1.0 / sqrt(t * t + 1.0)
    s = t * c
    return np.array(
        [[c, s], [-s * np.conj(phase), c * np.conj(phase)]], dtype=complex
    )


def jacobi_eigvalsh(
    matrix: np.ndarray,
    tol: float = DEFAULT_TOLERANCE,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> np.ndarray:
    """
    Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.

    Args:
        matrix: square Hermitian matrix (only Hermitian input is meaningful)
        tol: off-diagonal Frobenius norm at which iteration stops, relative
            to max(1, ||matrix||_F)
        max_sweeps: maximum number of full sweeps over all pivot pairs

    Returns:
        Real eigenvalues in ascending order

    Raises:
        InvalidParameter: matrix is not square
        NumericalInconsistency: no convergence within max_sweeps
    """
    a = np.array(matrix, dtype=complex, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidParameter(
            f"Expected a square matrix, got shape {a.shape}", component="eigen"
        )

    n = a.shape[0]
    scale = max(1.0, float(np.linalg.norm(a)))
    threshold = tol * scale
    skip_below = 0.1 * threshold / max(n, 1)

    for sweep in range(max_sweeps):
        if off_diagonal_norm(a) < threshold:
            logger.debug(f"Jacobi converged after {sweep} sweeps (n={n})")
            return np.sort(np.real(np.diag(a)))

        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip_below:
                    continue
                j = _rotation(a[p, p].real, a[q, q].real, apq)
                idx = [p, q]
                a[:, idx] = a[:, idx] @ j
                a[idx, :] = j.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real

    if off_diagonal_norm(a) < threshold:
        return np.sort(np.real(np.diag(a)))

    raise NumericalInconsistency(
        f"Jacobi iteration did not converge in {max_sweeps} sweeps",
        component="eigen",
        context={"dimension": n, "off_norm": off_diagonal_norm(a)},
    )
