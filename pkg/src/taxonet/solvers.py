"""L1 solvers: gram-driven lasso coordinate descent and the graphical lasso.

The lasso kernel works entirely from sufficient statistics (a gram/
covariance block V and a target vector b), which lets the same routine
serve data regressions, the graphical-lasso inner problem, and
neighborhood selection driven by a correlation matrix alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SolverError

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


GLASSO_TOL = 1e-4
GLASSO_MAX_ITER = 200
LASSO_TOL = 1e-6
LASSO_MAX_SWEEPS = 1000
# inner solves must be tighter than the outer covariance tolerance
GLASSO_INNER_TOL = 1e-9


@njit(cache=True)
def _cd_gram(v, b, beta, lam, tol, max_sweeps):  # pragma: no cover - jit
    """Coordinate descent for min 0.5 b'Vb - b.beta + sum_k lam[k]|beta_k|.

    ``lam`` holds one penalty per coordinate (an infinite entry pins that
    coordinate at zero).  ``beta`` is updated in place; returns the sweep
    count.
    """
    p = b.shape[0]
    grad = b - v @ beta
    for sweep in range(max_sweeps):
        max_delta = 0.0
        for k in range(p):
            vkk = v[k, k]
            if vkk <= 0.0:
                continue
            old = beta[k]
            lk = lam[k]
            rho = grad[k] + vkk * old
            if rho > lk:
                new = (rho - lk) / vkk
            elif rho < -lk:
                new = (rho + lk) / vkk
            else:
                new = 0.0
            delta = new - old
            if delta != 0.0:
                beta[k] = new
                for m in range(p):
                    grad[m] -= v[m, k] * delta
                ad = abs(delta)
                if ad > max_delta:
                    max_delta = ad
        if max_delta < tol:
            return sweep + 1
    return max_sweeps


def lasso_from_gram(
    v: np.ndarray,
    b: np.ndarray,
    lam,
    beta0: np.ndarray | None = None,
    tol: float = LASSO_TOL,
    max_sweeps: int = LASSO_MAX_SWEEPS,
) -> np.ndarray:
    """Solve min_beta 0.5 beta'V beta - b'beta + sum_k lam_k |beta_k|.

    ``lam`` is a scalar or a per-coordinate vector.
    """
    beta = np.zeros_like(b, dtype=float) if beta0 is None else beta0.astype(float).copy()
    lam_vec = np.broadcast_to(np.asarray(lam, dtype=np.float64), beta.shape)
    _cd_gram(
        np.ascontiguousarray(v, dtype=np.float64),
        np.ascontiguousarray(b, dtype=np.float64),
        beta,
        np.ascontiguousarray(lam_vec),
        float(tol),
        int(max_sweeps),
    )
    return beta


@dataclass
class PrecisionEstimate:
    """Sparse precision matrix with solver diagnostics.

    ``objective`` is the penalized log-likelihood
    log det(omega) - tr(S omega) - lam * sum_offdiag |omega_ij| at the
    final iterate; ``objective_path`` tracks it per outer sweep.
    """

    omega: np.ndarray
    lam: float
    objective: float
    converged: bool = True
    n_iter: int = 0
    objective_path: list[float] = field(default_factory=list)


def _penalized_loglik(s, omega, lam_mat):
    sign, logdet = np.linalg.slogdet(omega)
    if sign <= 0:
        return -np.inf
    a = np.abs(omega)
    np.fill_diagonal(a, 0.0)
    # infinite penalty on an exact zero contributes nothing
    terms = np.where(a > 0.0, lam_mat, 0.0) * a
    return logdet - float(np.sum(s * omega)) - float(terms.sum())


def _assemble_precision(w, s, betas, lam):
    p = w.shape[0]
    omega = np.zeros((p, p))
    for j in range(p):
        rest = np.arange(p) != j
        w12 = w[rest, j]
        denom = w[j, j] - float(w12 @ betas[j])
        if denom <= 0:
            raise SolverError("working covariance lost positive definiteness")
        omega[j, j] = 1.0 / denom
        omega[rest, j] = -betas[j] * omega[j, j]
    omega = 0.5 * (omega + omega.T)
    return omega


def graphical_lasso(
    s: np.ndarray,
    lam,
    tol: float = GLASSO_TOL,
    max_iter: int = GLASSO_MAX_ITER,
    warm_start: np.ndarray | None = None,
) -> PrecisionEstimate:
    """L1-penalized precision estimation by blockwise coordinate descent.

    Maximizes log det(omega) - tr(S omega) - sum_{i!=j} lam_ij |omega_ij|
    with an unpenalized diagonal.  ``lam`` is a scalar or a symmetric
    matrix of pairwise penalties (infinite entries force structural
    zeros).  Convergence is declared when the largest elementwise change
    of the working covariance in a sweep drops below ``tol``; a
    non-converged fit is returned flagged, not raised.
    """
    s = np.asarray(s, dtype=float)
    p = s.shape[0]
    if s.shape != (p, p) or np.abs(s - s.T).max(initial=0) > 1e-8:
        raise SolverError("input matrix must be square and symmetric")
    lam_mat = np.asarray(lam, dtype=float)
    scalar_lam = lam_mat.ndim == 0
    if scalar_lam:
        lam_mat = np.full((p, p), float(lam))
    else:
        finite = np.isfinite(lam_mat)
        with np.errstate(invalid="ignore"):
            diff = np.abs(lam_mat - lam_mat.T)
        asym = np.where(finite & finite.T, diff, 0.0).max(initial=0.0)
        if lam_mat.shape != (p, p) or (finite != finite.T).any() or asym > 1e-8:
            raise SolverError("penalty matrix must be p x p and symmetric")
    if (lam_mat < 0).any():
        raise SolverError("penalty must be nonnegative")
    w = s.copy() if warm_start is None else warm_start.copy()
    np.fill_diagonal(w, np.diag(s))
    betas = [np.zeros(p - 1) for _ in range(p)]
    idx = np.arange(p)
    converged = False
    n_iter = 0
    objective_path: list[float] = []
    for it in range(max_iter):
        n_iter = it + 1
        max_change = 0.0
        for j in range(p):
            rest = idx != j
            v = np.ascontiguousarray(w[np.ix_(rest, rest)])
            b = s[rest, j]
            beta = betas[j]
            _cd_gram(
                v, b, beta,
                np.ascontiguousarray(lam_mat[rest, j]),
                GLASSO_INNER_TOL, LASSO_MAX_SWEEPS,
            )
            w12 = v @ beta
            change = np.abs(w12 - w[rest, j]).max(initial=0.0)
            if change > max_change:
                max_change = change
            w[rest, j] = w12
            w[j, rest] = w12
        omega = _assemble_precision(w, s, betas, lam)
        objective_path.append(_penalized_loglik(s, omega, lam_mat))
        if max_change < tol:
            converged = True
            break
    omega = _assemble_precision(w, s, betas, lam)
    return PrecisionEstimate(
        omega=omega,
        lam=float(lam) if scalar_lam else float(np.nanmin(lam_mat)),
        objective=_penalized_loglik(s, omega, lam_mat),
        converged=converged,
        n_iter=n_iter,
        objective_path=objective_path,
    )


def warm_up_kernels() -> None:
    """Trigger jit compilation on a tiny problem (first-call latency)."""
    v = np.eye(2)
    b = np.array([0.5, -0.5])
    lasso_from_gram(v, b, 0.1)
