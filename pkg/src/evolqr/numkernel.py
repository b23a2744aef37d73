"""Dense real-matrix kernel shared by the control and optimization layers.

Everything operates on 2-D float64 :class:`numpy.ndarray` values.  Inputs are
validated for shape and finiteness on entry; all functions are pure and
thread-safe.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg


class SingularMatrixError(np.linalg.LinAlgError):
    """A linear solve hit a pivot below the relative singularity threshold."""


class ConvergenceError(RuntimeError):
    """An iterative routine exhausted its iteration budget.

    carries ``residual``, the last convergence measure observed.
    """

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


_PIVOT_RTOL = 1e-13


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a validated 2-D float64 array (finite entries only)."""
    out = np.asarray(a, dtype=float)
    if out.ndim == 1:
        out = out.reshape(-1, 1)
    if out.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {out.shape}")
    if not np.isfinite(out).all():
        raise ValueError(f"{name} contains non-finite entries")
    return out


def solve_linear(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``a @ x = b`` by LU factorization with partial pivoting.

    Raises :class:`SingularMatrixError` when the smallest pivot magnitude
    falls below ``1e-13`` times the largest one.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"a must be square, got {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise ValueError(f"b has {b.shape[0]} rows, expected {a.shape[0]}")
    with warnings.catch_warnings():
        # the zero-pivot case is reported through SingularMatrixError below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    pivots = np.abs(np.diag(lu))
    largest = pivots.max(initial=0.0)
    if largest == 0.0 or pivots.min() < _PIVOT_RTOL * largest:
        raise SingularMatrixError(
            f"matrix is singular to working precision (pivot ratio "
            f"{pivots.min() / largest if largest else 0.0:.3e})"
        )
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)


def mat_exp(a: np.ndarray) -> np.ndarray:
    """Matrix exponential via scaling-and-squaring (scipy's Pade scheme)."""
    a = as_matrix(a, "a")
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"a must be square, got {a.shape}")
    return scipy.linalg.expm(a)


def spectral_radius(a: np.ndarray) -> float:
    """Largest eigenvalue modulus of a square matrix."""
    a = as_matrix(a, "a")
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"a must be square, got {a.shape}")
    try:
        return float(np.abs(np.linalg.eigvals(a)).max())
    except np.linalg.LinAlgError as exc:  # pragma: no cover - QR failure is exotic
        raise ConvergenceError(f"eigenvalue iteration failed: {exc}") from exc


def dare_gain(
    f: np.ndarray,
    g: np.ndarray,
    q: np.ndarray,
    r: np.ndarray,
    tol: float = 1e-9,
    max_iter: int = 10000,
) -> tuple[np.ndarray, np.ndarray]:
    """Discrete-time Riccati fixed point by value iteration from ``P0 = Q``.

    Iterates ``P <- F'PF - F'PG (R + G'PG)^-1 G'PF + Q`` until the max-norm
    update falls below ``tol`` and returns ``(K, P)`` with
    ``K = (R + G'PG)^-1 G'PF`` (positive-gain convention, i.e. ``u = -Kx``
    stabilizes).

    Raises :class:`ConvergenceError` after ``max_iter`` sweeps.
    """
    f = as_matrix(f, "f")
    g = as_matrix(g, "g")
    q = as_matrix(q, "q")
    r = as_matrix(r, "r")
    n = f.shape[0]
    if f.shape[1] != n:
        raise ValueError("f must be square")
    if g.shape[0] != n or q.shape != (n, n) or r.shape != (g.shape[1],) * 2:
        raise ValueError("inconsistent dimensions for dare_gain")

    p = q.copy()
    residual = float("inf")
    for _ in range(max_iter):
        k = solve_linear(r + g.T @ p @ g, g.T @ p @ f)
        p_next = f.T @ p @ f - f.T @ p @ g @ k + q
        p_next = 0.5 * (p_next + p_next.T)
        residual = float(np.abs(p_next - p).max())
        p = p_next
        if residual < tol:
            return solve_linear(r + g.T @ p @ g, g.T @ p @ f), p
    raise ConvergenceError(
        f"Riccati iteration did not converge in {max_iter} sweeps", residual
    )
