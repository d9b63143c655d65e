"""Penalty paths and model selection: stability (subsampling) and EBIC."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import PathError, SelectionError
from .network import BinaryNetwork, network_from_mask
from .solvers import graphical_lasso

DEFAULT_NLAMBDA = 15
DEFAULT_BETA_THRESHOLD = 0.1
DEFAULT_REP_NUM = 20


@dataclass(frozen=True)
class LambdaPath:
    """Log-equispaced, strictly decreasing penalty sequence."""

    values: np.ndarray
    nlambda: int
    lambda_min_ratio: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if len(v) != self.nlambda or (np.diff(v) >= 0).any():
            raise PathError("path must be strictly decreasing with nlambda values")


def lambda_path(
    s: np.ndarray,
    nlambda: int = DEFAULT_NLAMBDA,
    lambda_min_ratio: float = 1e-2,
) -> LambdaPath:
    """Geometric path from lambda_max = max offdiagonal |S| down to
    lambda_max * lambda_min_ratio."""
    s = np.asarray(s, dtype=float)
    off = np.abs(s - np.diag(np.diag(s)))
    lam_max = float(off.max(initial=0.0))
    if lam_max == 0.0:
        raise PathError("all off-diagonal entries are zero; no path exists")
    if nlambda < 1:
        raise PathError("nlambda must be >= 1")
    if not 0 < lambda_min_ratio < 1:
        raise PathError("lambda_min_ratio must lie in (0, 1)")
    if nlambda == 1:
        values = np.array([lam_max])
    else:
        values = np.geomspace(lam_max, lam_max * lambda_min_ratio, nlambda)
    return LambdaPath(values=values, nlambda=nlambda, lambda_min_ratio=lambda_min_ratio)


def default_subsample_ratio(n: int) -> float:
    """10*sqrt(n)/n for large n, 0.8 otherwise."""
    return 10.0 * math.sqrt(n) / n if n > 144 else 0.8


@dataclass
class StarsParams:
    rep_num: int = DEFAULT_REP_NUM
    subsample_ratio: float | None = None
    beta_threshold: float = DEFAULT_BETA_THRESHOLD
    seed: int = 0

    def resolved_ratio(self, n: int) -> float:
        return self.subsample_ratio if self.subsample_ratio is not None else default_subsample_ratio(n)


@dataclass
class StarsResult:
    network: BinaryNetwork
    lam: float
    lambda_index: int
    instability: np.ndarray
    monotone_instability: np.ndarray
    threshold_met: bool


# a fitter maps (row-subsampled data, descending penalties) to a stack of
# boolean adjacency matrices, one per penalty
PathFitter = Callable[[np.ndarray, np.ndarray], np.ndarray]


def stars_select(
    x: np.ndarray,
    fitter: PathFitter,
    path: LambdaPath,
    params: StarsParams,
    taxa=None,
    provenance=None,
) -> StarsResult:
    """Stability-based penalty selection over row subsamples.

    Edge instability at each penalty is the mean over node pairs of
    2*f*(1-f), f being the selection frequency across subsamples; the curve
    is made monotone from the sparse end and the densest penalty with
    instability at or below the threshold is kept.  When nothing passes,
    the most stable penalty is returned flagged.
    """
    x = np.asarray(x, dtype=float)
    n, p = x.shape
    lams = path.values
    if len(lams) == 0:
        raise SelectionError("empty penalty path")
    ratio = params.resolved_ratio(n)
    size = max(2, int(math.floor(ratio * n)))
    children = np.random.SeedSequence(params.seed).spawn(params.rep_num)
    freq = np.zeros((len(lams), p, p))
    for child in children:
        rng = np.random.default_rng(child)
        rows = rng.choice(n, size=size, replace=False)
        freq += fitter(x[np.sort(rows)], lams)
    freq /= params.rep_num
    pairs = p * (p - 1) / 2.0
    xi = 2.0 * freq * (1.0 - freq)
    instability = np.array(
        [np.triu(xi[k], k=1).sum() / pairs for k in range(len(lams))]
    )
    monotone = np.maximum.accumulate(instability)
    admissible = np.flatnonzero(monotone <= params.beta_threshold)
    if admissible.size:
        sel = int(admissible[-1])
        met = True
    else:
        sel = int(np.argmin(monotone))
        met = False
    full = fitter(x, lams[sel : sel + 1])[0]
    prov = dict(provenance or {})
    prov.update({"lambda": float(lams[sel]), "selection": "stars"})
    labels = taxa if taxa is not None else [f"V{i}" for i in range(p)]
    net = network_from_mask(full, labels, provenance=prov)
    return StarsResult(
        network=net,
        lam=float(lams[sel]),
        lambda_index=sel,
        instability=instability,
        monotone_instability=monotone,
        threshold_met=met,
    )


@dataclass
class EbicResult:
    network: BinaryNetwork
    lam: float
    lambda_index: int
    scores: np.ndarray          # columns: lambda, ebic, edge count
    gamma: float
    all_converged: bool = True


def ebic_score(loglik: float, n_edges: int, n: int, p: int, gamma: float) -> float:
    """-2*loglik + E*ln(n) + 4*E*gamma*ln(p)."""
    return -2.0 * loglik + n_edges * math.log(n) + 4.0 * n_edges * gamma * math.log(p)


def ebic_select(
    s: np.ndarray,
    n: int,
    path: LambdaPath,
    gamma: float = 0.5,
    taxa=None,
    provenance=None,
) -> EbicResult:
    """Fit the penalty path with the graphical lasso and keep the EBIC
    minimizer (ties go to the sparser model, then to the larger penalty)."""
    s = np.asarray(s, dtype=float)
    p = s.shape[0]
    lams = path.values
    if len(lams) == 0:
        raise SelectionError("empty penalty path")
    rows = []
    fits = []
    any_converged = False
    for lam in lams:
        est = graphical_lasso(s, lam)
        if est.converged:
            any_converged = True
        omega = est.omega
        mask = (omega != 0) & ~np.eye(p, dtype=bool)
        n_edges = int(mask.sum()) // 2
        _, logdet = np.linalg.slogdet(omega)
        loglik = (n / 2.0) * (logdet - float(np.sum(s * omega)))
        rows.append((float(lam), ebic_score(loglik, n_edges, n, p, gamma), n_edges))
        fits.append((mask, est))
    if not any_converged:
        raise SelectionError("no penalty produced a converged fit")
    scores = np.array(rows)
    # minimize ebic; break ties toward fewer edges, then larger lambda
    order = sorted(
        range(len(lams)),
        key=lambda k: (round(scores[k, 1], 10), scores[k, 2], -scores[k, 0]),
    )
    sel = order[0]
    mask, est = fits[sel]
    prov = dict(provenance or {})
    prov.update({"lambda": float(lams[sel]), "selection": "ebic", "gamma": gamma})
    labels = taxa if taxa is not None else [f"V{i}" for i in range(p)]
    net = network_from_mask(mask, labels, provenance=prov)
    return EbicResult(
        network=net,
        lam=float(lams[sel]),
        lambda_index=sel,
        scores=scores,
        gamma=gamma,
        all_converged=all(e.converged for _, e in fits),
    )
