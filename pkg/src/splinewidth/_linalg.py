from __future__ import annotations

import numpy as np
from scipy.linalg import eigvalsh
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

# below this size a dense solve is cheaper than Lanczos
_DENSE_LIMIT = 64


class ConvergenceError(RuntimeError):
    pass


def _start_vector(size: int) -> np.ndarray:
    # deterministic and generic: not orthogonal to constants or low modes
    v = np.sin(0.7 * np.arange(size) + 0.3) + 0.5
    return v / np.linalg.norm(v)


def largest_eigenvalue(op, size: int, tol: float = 1e-10, maxiter: int | None = None) -> float:
    """Largest eigenvalue of a symmetric positive semi-definite operator.

    ``op`` is a dense array or a ``matvec`` callable.
    """
    if size == 0:
        return 0.0
    if size <= _DENSE_LIMIT:
        A = op if isinstance(op, np.ndarray) else np.column_stack([op(e) for e in np.eye(size)])
        return float(eigvalsh((A + A.T) / 2, subset_by_index=[size - 1, size - 1])[0])
    matvec = (lambda v: op @ v) if isinstance(op, np.ndarray) else op
    lin = LinearOperator((size, size), matvec=matvec, dtype=float)
    try:
        vals = eigsh(lin, k=1, which="LA", tol=tol, v0=_start_vector(size),
                     maxiter=maxiter or 20 * size, return_eigenvectors=False)
    except ArpackNoConvergence as exc:
        raise ConvergenceError(f"Lanczos did not converge to tol={tol:g}") from exc
    return float(vals[0])
