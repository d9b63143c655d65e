"""Two-stage network pruning with Gaussian mutual information.

Stage one keeps the strongest pairwise dependencies by a quantile cut on
mutual information.  Stage two re-tests each surviving edge conditionally on
every shared neighbor; an edge survives only if even its weakest conditional
dependence clears a second quantile cut, so indirect links routed through a
third taxon are removed.  Edges whose endpoints share no neighbor have
nothing to condition on and pass through unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import CountTable, clr_transform, mclr_transform, to_composition
from .errors import EstimatorError
from .network import BinaryNetwork, network_from_mask

_R_CLIP = 1.0 - 1e-12


@dataclass
class CmimnParams:
    quantitative: bool = True
    q1: float = 0.7
    q2: float = 0.95
    pseudo: float = 0.5

    def __post_init__(self) -> None:
        if not (0.0 < self.q1 <= self.q2 < 1.0):
            raise EstimatorError(
                f"quantiles must satisfy 0 < q1 <= q2 < 1, got q1={self.q1}, q2={self.q2}"
            )


@dataclass
class CmimnResult:
    network: BinaryNetwork
    stage1: BinaryNetwork
    mi: np.ndarray
    mi_threshold: float
    cmi_threshold: float | None


def _mi_from_r(r: float) -> float:
    r = float(np.clip(r, -_R_CLIP, _R_CLIP))
    return -0.5 * float(np.log1p(-r * r))


def _partial_mi(r_xy: float, r_xz: float, r_yz: float) -> float:
    """Conditional MI from the three pairwise correlations (clipped, never
    raises; the quantile stages use this on estimated matrices)."""
    r_xz = float(np.clip(r_xz, -_R_CLIP, _R_CLIP))
    r_yz = float(np.clip(r_yz, -_R_CLIP, _R_CLIP))
    denom = np.sqrt((1.0 - r_xz * r_xz) * (1.0 - r_yz * r_yz))
    partial = (r_xy - r_xz * r_yz) / denom
    return _mi_from_r(partial)


def _check_vector(v, name: str, min_len: int) -> np.ndarray:
    arr = np.asarray(v, dtype=float).ravel()
    if arr.size < min_len:
        raise EstimatorError(f"{name} needs at least {min_len} observations")
    if arr.std() == 0:
        raise EstimatorError(f"{name} is constant")
    return arr


def gaussian_mi(x, y) -> float:
    """Mutual information of two samples under a bivariate normal model:
    -0.5 * ln(1 - r^2) with r their correlation, clipped to |r| <= 1-1e-12."""
    xa = _check_vector(x, "x", 4)
    ya = _check_vector(y, "y", 4)
    if xa.size != ya.size:
        raise EstimatorError("x and y must have equal length")
    r = float(np.corrcoef(xa, ya)[0, 1])
    return _mi_from_r(r)


def conditional_mi(x, y, z) -> float:
    """CMI(X;Y|Z) under a trivariate normal model, via the partial
    correlation of x and y given z."""
    xa = _check_vector(x, "x", 5)
    ya = _check_vector(y, "y", 5)
    za = _check_vector(z, "z", 5)
    if not (xa.size == ya.size == za.size):
        raise EstimatorError("x, y, z must have equal length")
    r = np.corrcoef(np.column_stack([xa, ya, za]), rowvar=False)
    r_xz, r_yz = r[0, 2], r[1, 2]
    if 1.0 - r_xz * r_xz <= 1e-12 or 1.0 - r_yz * r_yz <= 1e-12:
        raise EstimatorError("correlation matrix of (x, y, z) is singular")
    return _partial_mi(r[0, 1], r_xz, r_yz)


def _transformed_values(table: CountTable, params: CmimnParams) -> np.ndarray:
    if params.quantitative:
        return clr_transform(to_composition(table, pseudo=params.pseudo)).values
    return mclr_transform(table).values


def cmimn_fit(table: CountTable, params: CmimnParams | None = None) -> CmimnResult:
    params = params or CmimnParams()
    p = table.n_taxa
    if p < 3:
        raise EstimatorError(f"need at least 3 taxa to condition on a third, got {p}")
    data = _transformed_values(table, params)
    r = np.corrcoef(data, rowvar=False)
    if np.isnan(r).any():
        bad = int(np.isnan(r).any(axis=0).argmax())
        raise EstimatorError(
            f"taxon {table.taxa[bad]!r} is constant after the transform"
        )

    iu = np.triu_indices(p, k=1)
    mi = np.zeros((p, p))
    for i, j in zip(*iu):
        mi[i, j] = mi[j, i] = _mi_from_r(r[i, j])

    mi_threshold = float(np.quantile(mi[iu], params.q1))
    stage1_adj = (mi >= mi_threshold) & ~np.eye(p, dtype=bool)
    stage1 = network_from_mask(
        stage1_adj, list(table.taxa), provenance={"stage": 1, "mi_threshold": mi_threshold}
    )

    adj = stage1.adj.astype(bool)
    edges = [(i, j) for i, j in zip(*iu) if adj[i, j]]
    min_cmi: dict[tuple[int, int], float] = {}
    pool: list[float] = []
    for i, j in edges:
        shared = np.flatnonzero(adj[i] & adj[j])
        shared = shared[(shared != i) & (shared != j)]
        if shared.size == 0:
            continue
        vals = [_partial_mi(r[i, j], r[i, k], r[j, k]) for k in shared]
        pool.extend(vals)
        min_cmi[(i, j)] = min(vals)

    if pool:
        cmi_threshold = float(np.quantile(pool, params.q2))
        keep = np.zeros((p, p), dtype=bool)
        for i, j in edges:
            if (i, j) not in min_cmi or min_cmi[(i, j)] >= cmi_threshold:
                keep[i, j] = keep[j, i] = True
    else:
        cmi_threshold = None
        keep = adj.copy()

    network = network_from_mask(
        keep,
        list(table.taxa),
        provenance={"stage": 2, "mi_threshold": mi_threshold, "cmi_threshold": cmi_threshold},
    )
    return CmimnResult(
        network=network,
        stage1=stage1,
        mi=mi,
        mi_threshold=mi_threshold,
        cmi_threshold=cmi_threshold,
    )
