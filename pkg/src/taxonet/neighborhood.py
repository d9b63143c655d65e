"""Neighborhood selection: per-node lasso regressions combined into a graph.

Two drivers share the same coordinate-descent core: one standardizes a data
matrix and regresses each column on the rest, the other needs only a
correlation matrix (sufficient statistics) and never touches sample-level
data, the form used when the association matrix itself is the estimate.
"""

from __future__ import annotations

import numpy as np

from .errors import EstimatorError
from .network import BinaryNetwork, network_from_mask
from .solvers import LASSO_MAX_SWEEPS, LASSO_TOL, lasso_from_gram


def standardize_columns(x: np.ndarray) -> np.ndarray:
    """Mean 0, variance 1 per column (population variance). Constant
    columns are left at zero so they simply never enter a model."""
    centered = x - x.mean(axis=0)
    sd = centered.std(axis=0)
    sd = np.where(sd > 1e-12, sd, 1.0)
    return centered / sd


def neighborhood_supports(
    gram: np.ndarray, lam: float, tol: float = LASSO_TOL
) -> np.ndarray:
    """Boolean support matrix: entry (j, i) set when variable i has a
    nonzero coefficient in the regression for node j."""
    p = gram.shape[0]
    support = np.zeros((p, p), dtype=bool)
    idx = np.arange(p)
    for j in range(p):
        rest = idx != j
        v = np.ascontiguousarray(gram[np.ix_(rest, rest)])
        b = gram[rest, j]
        beta = lasso_from_gram(v, b, lam, tol=tol, max_sweeps=LASSO_MAX_SWEEPS)
        support[j, rest] = beta != 0.0
    return support


def combine_supports(support: np.ndarray, rule: str) -> np.ndarray:
    if rule == "or":
        return support | support.T
    if rule == "and":
        return support & support.T
    raise EstimatorError(f"unknown combination rule {rule!r}")


def mb_neighborhood(
    x: np.ndarray, lam: float, rule: str = "or", taxa=None
) -> BinaryNetwork:
    """Meinshausen-Buhlmann selection on a data matrix.

    Columns are standardized internally; each node is lasso-regressed on
    the rest at penalty ``lam`` and the supports are combined by the OR
    (default) or AND rule.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise EstimatorError("need a 2-d matrix with at least 2 rows")
    z = standardize_columns(x)
    gram = (z.T @ z) / z.shape[0]
    support = neighborhood_supports(gram, lam)
    adj = combine_supports(support, rule)
    labels = taxa if taxa is not None else [f"V{i}" for i in range(x.shape[1])]
    return network_from_mask(
        adj, labels, provenance={"method": "mb", "lambda": float(lam), "rule": rule}
    )


def mb_from_correlation(
    corr: np.ndarray, lam: float, rule: str = "or", taxa=None
) -> BinaryNetwork:
    """Neighborhood selection driven entirely by a correlation matrix."""
    corr = np.asarray(corr, dtype=float)
    support = neighborhood_supports(corr, lam)
    adj = combine_supports(support, rule)
    labels = taxa if taxa is not None else [f"V{i}" for i in range(corr.shape[0])]
    return network_from_mask(
        adj,
        labels,
        provenance={"method": "mb_corr", "lambda": float(lam), "rule": rule},
    )


def mb_adjacency_path(gram: np.ndarray, lambdas, rule: str = "or") -> np.ndarray:
    """Stack of adjacency matrices along a penalty path (descending lam),
    with warm starts carried between consecutive penalties."""
    p = gram.shape[0]
    idx = np.arange(p)
    out = np.zeros((len(lambdas), p, p), dtype=bool)
    betas = [np.zeros(p - 1) for _ in range(p)]
    for k, lam in enumerate(lambdas):
        support = np.zeros((p, p), dtype=bool)
        for j in range(p):
            rest = idx != j
            v = np.ascontiguousarray(gram[np.ix_(rest, rest)])
            b = gram[rest, j]
            betas[j] = lasso_from_gram(v, b, lam, beta0=betas[j])
            support[j, rest] = betas[j] != 0.0
        adj = combine_supports(support, rule)
        np.fill_diagonal(adj, False)
        out[k] = adj
    return out
