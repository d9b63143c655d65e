"""Sparse-network pipelines over a count table.

Each fit wires the shared pieces together: a compositional transform, an
association matrix, a penalty path, and a selection strategy (stability
subsampling or EBIC).  All return a :class:`MethodResult` carrying the
selected binary network and the selection diagnostics.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .correlation import latent_correlation, safe_correlation
from .data import CountTable, clr_transform, mclr_transform, to_composition
from .errors import EstimatorError
from .neighborhood import combine_supports, mb_adjacency_path, neighborhood_supports, standardize_columns
from .network import MethodResult, network_from_mask
from .selection import LambdaPath, StarsParams, lambda_path, ebic_score, stars_select
from .solvers import graphical_lasso
from .correlation import kendall_matrix, nearest_psd_correlation, tau_bridge


@dataclass
class SpieceasiParams:
    lambda_min_ratio: float = 1e-2
    nlambda: int = 15
    rep_num: int | None = None   # 20 for mb, 50 for glasso when unset
    pseudo: float = 0.5
    rule: str = "or"
    seed: int = 0

    def resolved_rep_num(self, mode: str) -> int:
        if self.rep_num is not None:
            return self.rep_num
        return 50 if mode == "glasso" else 20


@dataclass
class SpringParams:
    rmethod: str = "original"
    quantitative: bool = True
    lambdaseq: str = "data-specific"
    nlambda: int = 15
    rep_num: int = 20
    lambda_min_ratio: float = 1e-2
    rule: str = "or"
    seed: int = 0


@dataclass
class GcodaParams:
    counts: bool = False
    pseudo: float = 0.5
    lambda_min_ratio: float = 1e-4
    nlambda: int = 15
    ebic_gamma: float = 0.5


def _clr_matrix(table: CountTable, pseudo: float) -> np.ndarray:
    return clr_transform(to_composition(table, pseudo=pseudo)).values


def _glasso_adjacency_path(s: np.ndarray, lams) -> np.ndarray:
    p = s.shape[0]
    out = np.zeros((len(lams), p, p), dtype=bool)
    for k, lam in enumerate(lams):
        est = graphical_lasso(s, lam)
        mask = (est.omega != 0) & ~np.eye(p, dtype=bool)
        out[k] = mask
    return out


def spieceasi_fit(
    table: CountTable, mode: str = "mb", params: SpieceasiParams | None = None
) -> MethodResult:
    """Sparse inverse-covariance network on CLR data with stability-based
    penalty selection.

    ``mode="mb"`` uses neighborhood selection (OR rule); ``mode="glasso"``
    uses the graphical lasso with any nonzero off-diagonal counting as an
    edge.
    """
    if mode not in ("mb", "glasso"):
        raise EstimatorError(f"unknown mode {mode!r}")
    params = params or SpieceasiParams()
    rep_num = params.resolved_rep_num(mode)
    x = _clr_matrix(table, params.pseudo)
    s = safe_correlation(x)
    path = lambda_path(s, nlambda=params.nlambda, lambda_min_ratio=params.lambda_min_ratio)

    if mode == "mb":
        def fitter(rows: np.ndarray, lams: np.ndarray) -> np.ndarray:
            z = standardize_columns(rows)
            gram = (z.T @ z) / z.shape[0]
            return mb_adjacency_path(gram, lams, rule=params.rule)
    else:
        def fitter(rows: np.ndarray, lams: np.ndarray) -> np.ndarray:
            return _glasso_adjacency_path(safe_correlation(rows), lams)

    stars = stars_select(
        x,
        fitter,
        path,
        StarsParams(rep_num=rep_num, seed=params.seed),
        taxa=table.taxa,
        provenance={"method": f"spieceasi_{mode}"},
    )
    record = asdict(params)
    record["rep_num"] = rep_num
    record["method"] = mode
    return MethodResult(
        method=f"spieceasi_{mode}",
        params=record,
        taxa=list(table.taxa),
        network=stars.network,
        selection={
            "lambda": stars.lam,
            "lambda_index": stars.lambda_index,
            "instability": stars.monotone_instability.tolist(),
            "threshold_met": stars.threshold_met,
        },
    )


def _latent_corr_values(counts: np.ndarray) -> np.ndarray:
    """Latent correlation of a raw count matrix (mclr + tau bridge + PSD
    projection); tolerant of columns that lost all variation."""
    table = CountTable(
        values=counts,
        taxa=[f"V{i}" for i in range(counts.shape[1])],
        samples=[f"s{i}" for i in range(counts.shape[0])],
    )
    transformed = mclr_transform(table)
    tau = kendall_matrix(transformed.values)
    return nearest_psd_correlation(tau_bridge(tau))


def spring_fit(table: CountTable, params: SpringParams | None = None) -> MethodResult:
    """Rank-based partial-correlation network for zero-inflated counts.

    The latent correlation matrix (modified CLR + Kendall bridge) is the
    sufficient statistic; neighborhood selection runs directly on it, with
    the penalty chosen by stability over subsamples of the raw counts.
    """
    params = params or SpringParams()
    corr = latent_correlation(table)
    path = lambda_path(
        corr.values, nlambda=params.nlambda, lambda_min_ratio=params.lambda_min_ratio
    )

    def fitter(rows: np.ndarray, lams: np.ndarray) -> np.ndarray:
        r = _latent_corr_values(rows)
        return mb_adjacency_path(r, lams, rule=params.rule)

    stars = stars_select(
        table.values,
        fitter,
        path,
        StarsParams(rep_num=params.rep_num, seed=params.seed),
        taxa=table.taxa,
        provenance={"method": "spring"},
    )
    return MethodResult(
        method="spring",
        params=asdict(params),
        taxa=list(table.taxa),
        weighted=corr.values,
        network=stars.network,
        selection={
            "lambda": stars.lam,
            "lambda_index": stars.lambda_index,
            "instability": stars.monotone_instability.tolist(),
            "threshold_met": stars.threshold_met,
        },
    )


GCODA_MM_MAX_ITER = 10
GCODA_MM_TOL = 1e-4


def _profiled_neg2loglik(s, omega):
    """Per-sample -2 log-likelihood of a basis precision under centered
    log-ratio observations.

    The direction lost to closure is profiled out exactly:
    -log det(omega) + log(1'omega 1) - log p + tr(S H) with
    H = omega - (omega 1)(1'omega)/(1'omega 1).
    """
    p = s.shape[0]
    ones = np.ones(p)
    sign, logdet = np.linalg.slogdet(omega)
    if sign <= 0:
        return np.inf
    o1 = omega @ ones
    d = float(ones @ o1)
    if d <= 0:
        return np.inf
    h = omega - np.outer(o1, o1) / d
    return -(logdet - np.log(d) + np.log(p) - float(np.sum(s * h)))


def _gcoda_surrogate(s, omega):
    """Covariance input for the next inner solve: the concave part of the
    profiled objective is linearized at the current iterate."""
    p = s.shape[0]
    ones = np.ones(p)
    o1 = omega @ ones
    d = float(ones @ o1)
    so1 = s @ o1
    quad = float(o1 @ so1)
    j = np.outer(ones, ones)
    grad = j / d - (np.outer(so1, ones) + np.outer(ones, so1)) / d + quad * j / d**2
    return 0.5 * (s + grad + (s + grad).T)


def _gcoda_solve(s, lam, omega0=None):
    """Majorize-minimize: each round solves a graphical lasso on the
    linearized surrogate.  ``lam`` may be a penalty matrix (used for
    support-constrained refits).  Returns (omega, converged)."""
    omega = np.diag(1.0 / np.diag(s)) if omega0 is None else omega0

    lam_arr = np.asarray(lam, dtype=float)

    def objective(om):
        a = np.abs(om)
        np.fill_diagonal(a, 0.0)
        pen = float((np.where(a > 0.0, lam_arr, 0.0) * a).sum())
        return _profiled_neg2loglik(s, om) + pen

    prev = objective(omega)
    converged = False
    for _ in range(GCODA_MM_MAX_ITER):
        est = graphical_lasso(_gcoda_surrogate(s, omega), lam)
        omega = est.omega
        cur = objective(omega)
        if abs(prev - cur) <= GCODA_MM_TOL * max(1.0, abs(prev)):
            converged = True
            prev = cur
            break
        prev = cur
    return omega, converged


def gcoda_fit(table: CountTable, params: GcodaParams | None = None) -> MethodResult:
    """Sparse basis-precision network for compositional data with EBIC
    penalty selection.

    The closure-degenerate likelihood is profiled exactly and optimized by
    repeated graphical-lasso solves on a linearized surrogate.  Each
    candidate support is scored at its own constrained maximum likelihood
    (penalty-free refit on the support), so the EBIC compares models, not
    shrunken fits.  ``counts=True`` treats the input as raw counts needing
    the pseudo-count before closure; ``counts=False`` expects
    already-positive relative abundances.
    """
    params = params or GcodaParams()
    pseudo = params.pseudo if params.counts else 0.0
    x = clr_transform(to_composition(table, pseudo=pseudo)).values
    s = np.cov(x, rowvar=False)
    p = table.n_taxa
    n = table.n_samples
    path = lambda_path(s, nlambda=params.nlambda, lambda_min_ratio=params.lambda_min_ratio)
    eye = np.eye(p, dtype=bool)
    rows = []
    masks = []
    all_converged = True
    omega = None
    for lam in path.values:
        omega, ok = _gcoda_solve(s, float(lam), omega0=omega)
        all_converged = all_converged and ok
        mask = (omega != 0) & ~eye
        mask = mask | mask.T
        n_edges = int(mask.sum()) // 2
        refit_lam = np.where(mask, 0.0, np.inf)
        np.fill_diagonal(refit_lam, 0.0)
        omega_r, ok_r = _gcoda_solve(s, refit_lam)
        all_converged = all_converged and ok_r
        loglik = -(n / 2.0) * _profiled_neg2loglik(s, omega_r)
        rows.append((float(lam), ebic_score(loglik, n_edges, n, p, params.ebic_gamma), n_edges))
        masks.append(mask)
    scores = np.array(rows)
    order = sorted(
        range(len(masks)),
        key=lambda k: (round(scores[k, 1], 10), scores[k, 2], -scores[k, 0]),
    )
    sel = order[0]
    net = network_from_mask(
        masks[sel],
        table.taxa,
        provenance={"method": "gcoda", "lambda": float(scores[sel, 0]), "selection": "ebic"},
    )
    return MethodResult(
        method="gcoda",
        params=asdict(params),
        taxa=list(table.taxa),
        network=net,
        selection={
            "lambda": float(scores[sel, 0]),
            "lambda_index": sel,
            "ebic": scores.tolist(),
            "all_converged": all_converged,
        },
    )
