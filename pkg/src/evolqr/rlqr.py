"""Robust regulator for linear systems with structured parametric uncertainty.

The plant is ``x+ = (F + dF) x + (G + dG) u`` with ``[dF dG] = H D [E_f E_g]``
for an unknown contraction ``D`` (``||D|| <= 1``).  The regulator solves a
penalized min-max quadratic problem whose one-step optimality conditions form
a saddle-point block system; iterating the backward step to a fixed point
yields a constant state feedback ``u = K x``.

Two assemblies of the one-step system are used:

* finite penalty ``mu`` -- six block rows, with the uncertainty channel
  regularized through ``Sigma = diag(mu^-1 I - lam^-1 H H', lam^-1 I)`` and
  ``lam = 1.01 * mu * ||H'H||``;
* ``mu`` at or above :data:`MU_LIMIT` -- the exact limit form (seven block
  rows), which enforces ``E_f + E_g K = 0`` and degenerates to the classical
  LQR recursion when the uncertainty rows vanish.

Both solve ``Xi Y = B`` for the block unknowns and read the closed-loop
matrix ``L``, the gain ``K`` and the cost matrix ``P`` off dedicated blocks
of ``Y``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numkernel import SingularMatrixError, as_matrix, dare_gain, solve_linear
from .vehicle import StateSpaceModel

MU_LIMIT = 1e10


class SingularBlockError(SingularMatrixError):
    """The assembled one-step block system is singular."""


class NotPositiveError(ArithmeticError):
    """The recursion produced a cost matrix that is not positive semidefinite."""


class DivergedError(RuntimeError):
    """A simulated state left the admissible range.

    carries ``step``, the first step index at which it happened.
    """

    def __init__(self, step: int):
        super().__init__(f"state magnitude exceeded 1e12 at step {step}")
        self.step = step


@dataclass(frozen=True)
class UncertaintySpec:
    """Structured uncertainty ``[dF dG] = H D [e_f e_g]`` plus the penalty ``mu``."""

    h: np.ndarray
    e_f: np.ndarray
    e_g: np.ndarray
    mu: float

    def __post_init__(self):
        object.__setattr__(self, "h", as_matrix(self.h, "h"))
        object.__setattr__(self, "e_f", as_matrix(self.e_f, "e_f"))
        object.__setattr__(self, "e_g", as_matrix(self.e_g, "e_g"))
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if self.e_f.shape[0] != self.e_g.shape[0]:
            raise ValueError("e_f and e_g must have the same row count")

    @property
    def n_channels(self) -> int:
        return self.e_f.shape[0]

    def check_model(self, model: StateSpaceModel) -> None:
        n, m = model.n_states, model.n_inputs
        if self.h.shape[0] != n:
            raise ValueError(f"h has {self.h.shape[0]} rows, model has {n} states")
        if self.e_f.shape[1] != n:
            raise ValueError(f"e_f has {self.e_f.shape[1]} cols, model has {n} states")
        if self.e_g.shape[1] != m:
            raise ValueError(f"e_g has {self.e_g.shape[1]} cols, model has {m} inputs")


def zero_uncertainty(n_states: int, n_inputs: int, mu: float = 1e12) -> UncertaintySpec:
    """Uncertainty-free spec; with the default ``mu`` the regulator is plain LQR."""
    return UncertaintySpec(
        h=np.ones((n_states, 1)),
        e_f=np.zeros((1, n_states)),
        e_g=np.zeros((1, n_inputs)),
        mu=mu,
    )


@dataclass(frozen=True)
class GainResult:
    """Outcome of the backward recursion.

    ``k`` is the feedback gain in the ``u = K x`` convention, ``l`` the
    closed-loop matrix predicted by the recursion, ``p`` the cost matrix.
    """

    k: np.ndarray
    l: np.ndarray
    p: np.ndarray
    iterations: int
    converged: bool


@dataclass(frozen=True)
class Trajectory:
    """Closed-loop simulation record: states (N+1 x n), inputs (N x m), per-state sum of squares."""

    states: np.ndarray
    inputs: np.ndarray
    sse: np.ndarray


class _StepWorkspace:
    """Preassembled one-step block system; only the ``P^-1`` block varies.

    ``step`` solves the literal block assembly; ``fast_step`` solves the same
    system by block elimination (small Schur complements), which the steady
    iteration uses.  Both produce identical results up to rounding.
    """

    def __init__(self, model: StateSpaceModel, unc: UncertaintySpec, q: np.ndarray, r: np.ndarray):
        unc.check_model(model)
        f = np.ascontiguousarray(model.f)
        g = np.ascontiguousarray(model.g)
        n, m = model.n_states, model.n_inputs
        q = np.ascontiguousarray(as_matrix(q, "q"))
        r = np.ascontiguousarray(as_matrix(r, "r"))
        if q.shape != (n, n) or r.shape != (m, m):
            raise ValueError("q/r dimensions inconsistent with the model")
        self.n, self.m = n, m
        self.f, self.g, self.q, self.r = f, g, q, r
        self.e_f_full = unc.e_f

        if unc.mu >= MU_LIMIT:
            # Exact limit form: drop inactive uncertainty rows so the system
            # stays nonsingular (a zero row of [e_f e_g] constrains nothing).
            active = np.abs(np.hstack([unc.e_f, unc.e_g])).max(axis=1) > 0.0
            e_f = np.ascontiguousarray(unc.e_f[active])
            e_g = np.ascontiguousarray(unc.e_g[active])
            l_dim = e_f.shape[0]
            sizes = [n, m, n, n, l_dim, n, m]
            off = np.concatenate([[0], np.cumsum(sizes)])
            xi = np.zeros((off[-1], off[-1]))
            rhs = np.zeros((off[-1], n))
            eye_n, eye_m = np.eye(n), np.eye(m)
            self._set(xi, off, 0, 5, eye_n)
            self._set(xi, off, 1, 6, eye_m)
            self._set(xi, off, 2, 2, solve_linear(q, eye_n))
            self._set(xi, off, 3, 5, eye_n)
            self._set(xi, off, 3, 6, -g)
            if l_dim:
                self._set(xi, off, 4, 6, -e_g)
            self._set(xi, off, 5, 0, eye_n)
            self._set(xi, off, 5, 3, eye_n)
            self._set(xi, off, 6, 1, eye_m)
            self._set(xi, off, 6, 3, -g.T)
            if l_dim:
                self._set(xi, off, 6, 4, -e_g.T)
            rhs[off[2] : off[3]] = -eye_n
            rhs[off[3] : off[4]] = f
            if l_dim:
                rhs[off[4] : off[5]] = e_f
            self._set(xi, off, 1, 1, solve_linear(r, eye_m))
            self._dual_slices = (slice(off[3], off[4]), slice(off[4], off[5]))
            self._l_slice = slice(off[5], off[6])
            self._k_slice = slice(off[6], off[7])
            self._q_slice = slice(off[2], off[3])
            self._e_f_active = e_f
            self._e_g_active = e_g
            self._l_act = l_dim
        else:
            lam = 1.01 * unc.mu * float(np.linalg.norm(unc.h.T @ unc.h, 2))
            l_dim = unc.n_channels
            sigma = np.zeros((n + l_dim, n + l_dim))
            sigma[:n, :n] = np.eye(n) / unc.mu - (unc.h @ unc.h.T) / lam
            sigma[n:, n:] = np.eye(l_dim) / lam
            cal_i = np.vstack([np.eye(n), np.zeros((l_dim, n))])
            cal_g = np.vstack([g, unc.e_g])
            cal_f = np.vstack([f, unc.e_f])
            sizes = [n, m, n, n + l_dim, n, m]
            off = np.concatenate([[0], np.cumsum(sizes)])
            xi = np.zeros((off[-1], off[-1]))
            rhs = np.zeros((off[-1], n))
            eye_n, eye_m = np.eye(n), np.eye(m)
            self._set(xi, off, 0, 4, eye_n)
            self._set(xi, off, 1, 1, solve_linear(r, eye_m))
            self._set(xi, off, 1, 5, eye_m)
            self._set(xi, off, 2, 2, solve_linear(q, eye_n))
            self._set(xi, off, 3, 3, sigma)
            self._set(xi, off, 3, 4, cal_i)
            self._set(xi, off, 3, 5, -cal_g)
            self._set(xi, off, 4, 0, eye_n)
            self._set(xi, off, 4, 3, cal_i.T)
            self._set(xi, off, 5, 1, eye_m)
            self._set(xi, off, 5, 3, -cal_g.T)
            rhs[off[2] : off[3]] = -eye_n
            rhs[off[3] : off[4]] = cal_f
            self._dual_slices = (slice(off[3], off[4]), None)
            self._l_slice = slice(off[4], off[5])
            self._k_slice = slice(off[5], off[6])
            self._q_slice = slice(off[2], off[3])
            self._e_f_active = None
            self._cal_f = cal_f
            self._cal_g = cal_g
            self._r_inv = solve_linear(r, eye_m)
            # constant part of the dual-space Schur complement
            self._v_base = sigma + cal_g @ self._r_inv @ cal_g.T

        self.xi = xi
        self.rhs = rhs
        self._p_slice = slice(0, n)
        self.limit_form = unc.mu >= MU_LIMIT
        self._eye_n = np.eye(n)

    @staticmethod
    def _set(xi, off, i, j, block):
        xi[off[i] : off[i] + block.shape[0], off[j] : off[j] + block.shape[1]] = block

    def step(self, p_next: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """One backward step: returns ``(K, L, P)`` for the given ``P_next``."""
        n = self.n
        try:
            self.xi[self._p_slice, self._p_slice] = np.linalg.inv(p_next)
        except np.linalg.LinAlgError as exc:
            raise SingularBlockError(f"cost matrix not invertible: {exc}") from exc
        try:
            y = np.linalg.solve(self.xi, self.rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularBlockError(f"one-step block system singular: {exc}") from exc
        if not np.isfinite(y).all():
            raise SingularBlockError("one-step block system is singular to working precision")
        k = y[self._k_slice]
        l_cl = y[self._l_slice]
        dual_f, dual_e = self._dual_slices
        with np.errstate(over="ignore", invalid="ignore"):
            if self.limit_form:
                p_new = -y[self._q_slice] + self.f.T @ y[dual_f]
                if self._e_f_active.size:
                    p_new = p_new + self._e_f_active.T @ y[dual_e]
            else:
                p_new = -y[self._q_slice] + self._cal_f.T @ y[dual_f]
        return k, l_cl, self._checked(p_new)

    def _checked(self, p_new: np.ndarray) -> np.ndarray:
        """Symmetrize and verify positive semidefiniteness (within tolerance)."""
        with np.errstate(over="ignore", invalid="ignore"):
            p_new = 0.5 * (p_new + p_new.T)
        if not np.isfinite(p_new).all():
            raise NotPositiveError("cost recursion diverged to non-finite values")
        tol = 1e-8 * max(1.0, float(np.abs(p_new).max()))
        try:
            np.linalg.cholesky(p_new + tol * self._eye_n)
        except np.linalg.LinAlgError:
            raise NotPositiveError(
                f"cost matrix lost positive semidefiniteness (min eig below -{tol:.1e})"
            ) from None
        return p_new

    def fast_step(self, p_next: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Block-eliminated solve of the same one-step system as :meth:`step`.

        Finite penalty: eliminating the primal blocks leaves the dual-space
        system ``(Sigma + I_aug P^-1 I_aug' + G_aug R^-1 G_aug') W = F_aug``,
        from which ``K = -R^-1 G_aug' W``, ``L = P^-1 W[:n]`` and
        ``P+ = Q + F_aug' W``.  Limit form: the hard constraint
        ``e_f + e_g K = 0`` joins the stationarity condition in a small KKT
        system; with no active uncertainty rows it is the plain LQR update.
        """
        n, m = self.n, self.m
        f, g, q, r = self.f, self.g, self.q, self.r
        with np.errstate(over="ignore", invalid="ignore"):
            if self.limit_form:
                e_f, e_g = self._e_f_active, self._e_g_active
                l_act = self._l_act
                gpg = r + g.T @ p_next @ g
                gpf = g.T @ p_next @ f
                kkt = np.zeros((m + l_act, m + l_act))
                kkt[:m, :m] = gpg
                if l_act:
                    kkt[:m, m:] = e_g.T
                    kkt[m:, :m] = e_g
                rhs = np.vstack([-gpf, -e_f]) if l_act else -gpf
                try:
                    sol = np.linalg.solve(kkt, rhs)
                except np.linalg.LinAlgError as exc:
                    raise SingularBlockError(f"one-step system singular: {exc}") from exc
                k = sol[:m]
                dual = sol[m:]
                l_cl = f + g @ k
                p_new = q + f.T @ p_next @ l_cl
                if l_act:
                    p_new = p_new + e_f.T @ dual
            else:
                try:
                    p_inv = np.linalg.inv(p_next)
                except np.linalg.LinAlgError as exc:
                    raise SingularBlockError(f"cost matrix not invertible: {exc}") from exc
                v = self._v_base.copy()
                v[:n, :n] += p_inv
                try:
                    w = np.linalg.solve(v, self._cal_f)
                except np.linalg.LinAlgError as exc:
                    raise SingularBlockError(f"one-step system singular: {exc}") from exc
                k = -self._r_inv @ (self._cal_g.T @ w)
                l_cl = p_inv @ w[:n]
                p_new = self.q + self._cal_f.T @ w
        if not np.isfinite(k).all():
            raise SingularBlockError("one-step system is singular to working precision")
        return k, l_cl, self._checked(p_new)


def _iterate_finite(v_base, cal_f, cal_g, r_inv, q, tol, max_iter):
    """Fixed-point loop of the finite-penalty one-step update (jitted when possible).

    Status codes: 0 converged, 1 iteration cap reached, 2 non-finite drift.
    """
    n = q.shape[0]
    p = q.copy()
    k = np.zeros((cal_g.shape[1], n))
    l_cl = np.zeros((n, n))
    cal_f_t = np.ascontiguousarray(cal_f.T)
    cal_g_t = np.ascontiguousarray(cal_g.T)
    for it in range(1, max_iter + 1):
        p_inv = np.ascontiguousarray(np.linalg.inv(p))
        v = v_base.copy()
        v[:n, :n] += p_inv
        w = np.ascontiguousarray(np.linalg.solve(v, cal_f))
        k = -(r_inv @ (cal_g_t @ w))
        l_cl = p_inv @ w[:n]
        p_new = q + cal_f_t @ w
        p_new = 0.5 * (p_new + p_new.T)
        if not np.isfinite(p_new).all():
            return k, l_cl, p_new, it, 2
        delta = np.abs(p_new - p).max()
        p = p_new
        if delta < tol * (1.0 + np.abs(p).max()):
            return k, l_cl, p, it, 0
    return k, l_cl, p, max_iter, 1


def _iterate_limit(f, g, q, r, e_f, e_g, tol, max_iter):
    """Fixed-point loop of the exact-limit one-step update (jitted when possible)."""
    n = q.shape[0]
    m = g.shape[1]
    l_act = e_f.shape[0]
    p = q.copy()
    k = np.zeros((m, n))
    l_cl = np.zeros((n, n))
    g_t = np.ascontiguousarray(g.T)
    f_t = np.ascontiguousarray(f.T)
    e_f_t = np.ascontiguousarray(e_f.T)
    kkt = np.zeros((m + l_act, m + l_act))
    rhs = np.zeros((m + l_act, n))
    if l_act > 0:
        kkt[:m, m:] = np.ascontiguousarray(e_g.T)
        kkt[m:, :m] = e_g
        rhs[m:] = -e_f
    for it in range(1, max_iter + 1):
        pg = p @ g
        kkt[:m, :m] = r + g_t @ pg
        rhs[:m] = -(g_t @ (p @ f))
        sol = np.ascontiguousarray(np.linalg.solve(kkt, rhs))
        k = sol[:m]
        l_cl = f + g @ k
        p_new = q + f_t @ (p @ l_cl)
        if l_act > 0:
            p_new = p_new + e_f_t @ sol[m:]
        p_new = 0.5 * (p_new + p_new.T)
        if not np.isfinite(p_new).all():
            return k, l_cl, p_new, it, 2
        delta = np.abs(p_new - p).max()
        p = p_new
        if delta < tol * (1.0 + np.abs(p).max()):
            return k, l_cl, p, it, 0
    return k, l_cl, p, max_iter, 1


try:  # compiled loops; the plain-python bodies above are the fallback
    from numba import njit as _njit

    _iterate_finite_c = _njit(cache=True)(_iterate_finite)
    _iterate_limit_c = _njit(cache=True)(_iterate_limit)
except Exception:  # pragma: no cover - numba is an optional accelerator
    _iterate_finite_c = _iterate_finite
    _iterate_limit_c = _iterate_limit


def rlqr_step(
    model: StateSpaceModel,
    unc: UncertaintySpec,
    q: np.ndarray,
    r: np.ndarray,
    p_next: np.ndarray,
) -> GainResult:
    """Single backward step of the robust recursion from the cost-to-go ``p_next``."""
    ws = _StepWorkspace(model, unc, q, r)
    k, l_cl, p = ws.step(as_matrix(p_next, "p_next"))
    return GainResult(k=k, l=l_cl, p=p, iterations=1, converged=True)


def rlqr_gain_steady(
    model: StateSpaceModel,
    unc: UncertaintySpec,
    q: np.ndarray,
    r: np.ndarray,
    tol: float = 1e-9,
    max_iter: int = 5000,
) -> GainResult:
    """Iterate the backward step from ``P = Q`` to its fixed point.

    Convergence is declared when ``max|P+ - P| < tol * (1 + max|P|)``.
    Non-convergence is reported through ``converged=False``, not raised.
    """
    q = as_matrix(q, "q")
    ws = _StepWorkspace(model, unc, q, r)
    try:
        if ws.limit_form:
            k, l_cl, p, iters, code = _iterate_limit_c(
                ws.f, ws.g, ws.q, ws.r, ws._e_f_active, ws._e_g_active, tol, max_iter
            )
        else:
            k, l_cl, p, iters, code = _iterate_finite_c(
                ws._v_base, ws._cal_f, ws._cal_g, ws._r_inv, ws.q, tol, max_iter
            )
    except np.linalg.LinAlgError as exc:
        raise SingularBlockError(f"one-step block system singular: {exc}") from exc
    if code == 2 or not np.isfinite(k).all():
        raise NotPositiveError("cost recursion diverged to non-finite values")
    p = ws._checked(p)
    return GainResult(k=k, l=l_cl, p=p, iterations=iters, converged=code == 0)


def lqr_gain(
    model: StateSpaceModel,
    q: np.ndarray,
    r: np.ndarray,
    tol: float = 1e-9,
    max_iter: int = 10000,
) -> GainResult:
    """Classical LQR baseline in the ``u = K x`` convention (wraps the Riccati iteration)."""
    k_pos, p = dare_gain(model.f, model.g, q, r, tol=tol, max_iter=max_iter)
    k = -k_pos
    return GainResult(k=k, l=model.f + model.g @ k, p=p, iterations=0, converged=True)


def check_rank_condition(unc: UncertaintySpec) -> bool:
    """True when ``rank([e_f e_g]) == rank(e_g)`` (numerical rank, 1e-10 relative)."""

    def numerical_rank(mat: np.ndarray) -> int:
        if mat.size == 0:
            return 0
        s = np.linalg.svd(mat, compute_uv=False)
        if s.size == 0 or s[0] == 0.0:
            return 0
        return int((s > 1e-10 * s[0]).sum())

    return numerical_rank(np.hstack([unc.e_f, unc.e_g])) == numerical_rank(unc.e_g)


def simulate_closed_loop(
    plant: StateSpaceModel, k: np.ndarray, x0: np.ndarray, n_steps: int
) -> Trajectory:
    """Simulate ``x+ = (F + G K) x`` for ``n_steps`` steps.

    Raises :class:`DivergedError` as soon as any state magnitude exceeds 1e12.
    """
    k = as_matrix(k, "k")
    x = np.asarray(x0, dtype=float).reshape(-1)
    n = plant.n_states
    if x.shape[0] != n or k.shape != (plant.n_inputs, n):
        raise ValueError("dimension mismatch between plant, gain and initial state")
    m_cl = plant.f + plant.g @ k
    states = np.empty((n_steps + 1, n))
    inputs = np.empty((n_steps, plant.n_inputs))
    states[0] = x
    for i in range(n_steps):
        inputs[i] = k @ x
        x = m_cl @ x
        if np.abs(x).max() > 1e12:
            raise DivergedError(i + 1)
        states[i + 1] = x
    return Trajectory(states=states, inputs=inputs, sse=(states**2).sum(axis=0))


def regulation_cost(m_cl: np.ndarray, x0: np.ndarray, n_steps: int) -> np.ndarray:
    """Per-state sum of squares ``sum_{i=0..n_steps} x_i**2`` under ``x+ = M x``.

    Computed by matrix doubling on the partial state-covariance sum, which is
    algebraically identical to stepping the simulation but needs only
    ``O(log n_steps)`` small matrix products.  Divergence shows up as huge or
    non-finite totals; callers map those to their penalty convention.
    """
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    s_base = np.outer(x0, x0)
    a_base = np.array(m_cl, dtype=float)
    s_acc = np.zeros_like(s_base)
    a_acc = np.eye(len(x0))
    remaining = n_steps + 1
    with np.errstate(over="ignore", invalid="ignore"):
        while remaining:
            if remaining & 1:
                s_acc = s_acc + a_acc @ s_base @ a_acc.T
                a_acc = a_acc @ a_base
            remaining >>= 1
            if remaining:
                s_base = s_base + a_base @ s_base @ a_base.T
                a_base = a_base @ a_base
    return np.diag(s_acc).copy()
