"""Correlation-family association estimators.

Four classical estimators over a transformed (or raw) table, plus a
rank-based latent correlation for zero-inflated counts that maps Kendall
concordance through the Gaussian-copula bridge and projects the result to
the positive semidefinite cone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .data import CountTable, TransformedTable, mclr_transform
from .errors import EstimatorError

SYMMETRY_TOL = 1e-12
BICOR_TUNING = 9.0
PSD_EIG_FLOOR = 1e-8

CORRELATION_METHODS = ("pearson", "spearman", "bicor", "kendall")


@dataclass(frozen=True)
class CorrelationMatrix:
    """Symmetric p x p association matrix with unit diagonal."""

    values: np.ndarray
    method: str
    taxa: list[str]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.shape[0] != v.shape[1] or v.shape[0] != len(self.taxa):
            raise EstimatorError("correlation matrix shape does not match taxa")
        if np.abs(v - v.T).max(initial=0.0) > SYMMETRY_TOL:
            raise EstimatorError("correlation matrix must be symmetric")
        if not np.all(np.diag(v) == 1.0):
            raise EstimatorError("correlation diagonal must be exactly 1")
        if np.abs(v).max(initial=0.0) > 1.0 + SYMMETRY_TOL:
            raise EstimatorError("correlation entries must lie in [-1, 1]")


def _finalize(values: np.ndarray, method: str, taxa) -> CorrelationMatrix:
    v = 0.5 * (values + values.T)
    np.clip(v, -1.0, 1.0, out=v)
    np.fill_diagonal(v, 1.0)
    return CorrelationMatrix(values=v, method=method, taxa=list(taxa))


def _check_columns(x: np.ndarray, taxa) -> None:
    if x.shape[0] < 4:
        raise EstimatorError("correlation needs at least 4 samples")
    sd = x.std(axis=0)
    if (sd == 0).any():
        bad = taxa[int(np.argmax(sd == 0))]
        raise EstimatorError(f"taxon {bad!r} is constant")


def _bicor_prepare(col: np.ndarray) -> np.ndarray:
    """Median/MAD biweight pseudo-observations for one column.

    A zero-MAD column falls back to plain mean centering (the Pearson
    contribution for every pair it appears in).
    """
    med = np.median(col)
    mad = np.median(np.abs(col - med))
    if mad == 0:
        return col - col.mean()
    u = (col - med) / (BICOR_TUNING * mad)
    w = (1.0 - u**2) ** 2 * (np.abs(u) < 1.0)
    return (col - med) * w


def correlation_matrix(table, method: str = "pearson") -> CorrelationMatrix:
    """Pairwise association matrix of a table's columns.

    ``table`` is a :class:`CountTable` or :class:`TransformedTable`.
    Methods: ``pearson`` (product-moment), ``spearman`` (average ranks),
    ``bicor`` (biweight midcorrelation, tuning constant 9), ``kendall``
    (tau-b).
    """
    if method not in CORRELATION_METHODS:
        raise EstimatorError(f"unknown correlation method {method!r}")
    x = np.asarray(table.values, dtype=float)
    taxa = list(table.taxa)
    _check_columns(x, taxa)
    if method == "pearson":
        return _finalize(np.corrcoef(x, rowvar=False), method, taxa)
    if method == "spearman":
        ranks = np.apply_along_axis(stats.rankdata, 0, x)
        return _finalize(np.corrcoef(ranks, rowvar=False), method, taxa)
    if method == "bicor":
        cols = np.column_stack([_bicor_prepare(x[:, j]) for j in range(x.shape[1])])
        norms = np.sqrt((cols**2).sum(axis=0))
        out = (cols.T @ cols) / np.outer(norms, norms)
        return _finalize(out, method, taxa)
    return _finalize(kendall_matrix(x), method, taxa)


def kendall_matrix(x: np.ndarray) -> np.ndarray:
    """Tau-b over all column pairs (ties handled by the b-correction)."""
    p = x.shape[1]
    out = np.eye(p)
    for i in range(p):
        for j in range(i + 1, p):
            tau = stats.kendalltau(x[:, i], x[:, j], variant="b").statistic
            if math.isnan(tau):
                tau = 0.0
            out[i, j] = out[j, i] = tau
    return out


def tau_bridge(tau):
    """Gaussian-copula bridge from Kendall concordance to correlation:
    r = sin(pi * tau / 2)."""
    return np.sin(np.pi * np.asarray(tau) / 2.0)


def nearest_psd_correlation(values: np.ndarray, floor: float = PSD_EIG_FLOOR):
    """Project to the PSD cone by eigenvalue clipping, then rescale the
    diagonal back to 1."""
    v = 0.5 * (values + values.T)
    try:
        eigval, eigvec = np.linalg.eigh(v)
    except np.linalg.LinAlgError as exc:
        raise EstimatorError(f"eigendecomposition failed: {exc}") from exc
    clipped = np.clip(eigval, floor, None)
    rebuilt = (eigvec * clipped) @ eigvec.T
    d = np.sqrt(np.diag(rebuilt))
    out = rebuilt / np.outer(d, d)
    np.clip(out, -1.0, 1.0, out=out)
    np.fill_diagonal(out, 1.0)
    return 0.5 * (out + out.T)


def latent_correlation(table: CountTable) -> CorrelationMatrix:
    """Rank-based latent correlation for zero-inflated counts.

    Kendall tau-b on the modified-CLR transform (zeros kept as ties at 0),
    mapped through ``sin(pi*tau/2)`` and projected to the nearest positive
    semidefinite correlation matrix.
    """
    if table.n_samples < 4:
        raise EstimatorError("latent correlation needs at least 4 samples")
    transformed = mclr_transform(table)
    tau = kendall_matrix(transformed.values)
    bridged = tau_bridge(tau)
    values = nearest_psd_correlation(bridged)
    return CorrelationMatrix(values=values, method="latent", taxa=list(table.taxa))


def safe_correlation(x: np.ndarray) -> np.ndarray:
    """Pearson matrix that tolerates constant columns (used on subsamples,
    where a column can lose all variation by chance): such columns get zero
    association with everything."""
    sd = x.std(axis=0)
    ok = sd > 1e-12
    out = np.zeros((x.shape[1], x.shape[1]))
    if ok.sum() >= 2:
        sub = np.corrcoef(x[:, ok], rowvar=False)
        out[np.ix_(ok, ok)] = sub
    out = 0.5 * (out + out.T)
    np.clip(out, -1.0, 1.0, out=out)
    np.fill_diagonal(out, 1.0)
    return out
