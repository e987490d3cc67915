"""Selective, weighted consensus over an aligned ensemble.

Pipeline: align the base partitions to one reference, score each
partition's diversity as one minus its mean kappa against the others, keep
the most diverse ones, weight every cluster of the kept partitions by its
mean F-score against the other kept partitions, build the weighted
co-association ``S = B W B^T`` and cut an average-linkage dendrogram at
``final_k`` clusters.
"""
from __future__ import annotations

import logging
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .alignment import ReferenceStrategy, align_ensemble
from .exceptions import EmptyInputError, NotAlignedError, SelectionError
from .partition import Ensemble, Partition

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DskfConfig:
    final_k: int
    selection: str = "top"  # "top" keeps m_prime partitions, "threshold" keeps D > sigma
    m_prime: int | None = None  # None: half the ensemble
    sigma: float = 0.0
    beta: float = 1.0
    weighting: str = "f_score"  # or "uniform"
    reference: ReferenceStrategy = ReferenceStrategy.RANDOM

    def __post_init__(self):
        object.__setattr__(self, "reference", ReferenceStrategy(self.reference))
        if self.final_k < 1:
            raise ValueError("final_k must be at least 1")
        if self.selection not in ("top", "threshold"):
            raise ValueError(f"unknown selection mode {self.selection!r}")
        if self.weighting not in ("f_score", "uniform"):
            raise ValueError(f"unknown weighting {self.weighting!r}")
        if self.m_prime is not None and self.m_prime < 1:
            raise ValueError("m_prime must be at least 1")
        if not self.beta > 0:
            raise ValueError("beta must be positive")

    def resolved_m_prime(self, m: int) -> int:
        mp = max(m // 2, 1) if self.m_prime is None else self.m_prime
        if mp > m:
            raise ValueError(f"m_prime={mp} exceeds ensemble size {m}")
        return mp


@dataclass(frozen=True, eq=False)
class DiversityScores:
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class ClusterWeights:
    raw: np.ndarray
    normalized: np.ndarray
    cluster_index: tuple[tuple[int, int], ...]  # (partition position, label)

    @property
    def h(self) -> int:
        return len(self.cluster_index)


@dataclass(frozen=True, eq=False)
class CoassociationMatrix:
    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass
class DiagnosticsReport:
    reference_index: int
    diversity: np.ndarray
    selected: list[int]
    weights: ClusterWeights
    timings: dict[str, float] = field(default_factory=dict)


def _onehot(labels: np.ndarray) -> np.ndarray:
    """``(m, n, L)`` indicator of label values; labels are small non-negative ints."""
    L = int(labels.max()) + 1
    return labels[..., None] == np.arange(L)


def pairwise_kappa(ens: Ensemble) -> np.ndarray:
    """``m x m`` Cohen's kappa between every pair of partitions, using raw labels.

    Chance agreement equal to 1 (both partitions constant on the same label)
    yields kappa 1, matching :func:`dskf.metrics.classification_scores`.
    """
    Y = ens.label_matrix()
    m, n = Y.shape
    oh = _onehot(Y).astype(float)
    counts = oh.sum(axis=1)  # (m, L)
    flat = oh.reshape(m, -1)
    observed = flat @ flat.T / n
    expected = counts @ counts.T / (n * n)
    with np.errstate(divide="ignore", invalid="ignore"):
        kap = (observed - expected) / (1.0 - expected)
    degenerate = expected >= 1.0
    kap[degenerate] = np.where(observed[degenerate] >= 1.0, 1.0, 0.0)
    return kap


def diversity_scores(aligned: Ensemble) -> DiversityScores:
    if not aligned.aligned:
        raise NotAlignedError("diversity needs an aligned ensemble")
    m = aligned.m
    if m < 2:
        raise ValueError("diversity needs at least two partitions")
    kap = pairwise_kappa(aligned)
    off = kap.sum(axis=1) - np.diag(kap)
    return DiversityScores(1.0 - off / (m - 1))


def selected_indices(d: DiversityScores, cfg: DskfConfig) -> list[int]:
    values = np.asarray(d.values)
    m = values.size
    if cfg.selection == "threshold":
        keep = np.flatnonzero(values > cfg.sigma).tolist()
        if not keep:
            raise SelectionError(
                f"no partition has diversity above sigma={cfg.sigma}; "
                f"max diversity is {values.max():.4f}, lower sigma or use top-m' selection")
        return keep
    mp = cfg.resolved_m_prime(m)
    # stable sort on -D keeps the lower index first among ties
    order = np.argsort(-values, kind="stable")
    return sorted(order[:mp].tolist())


def select_partitions(aligned: Ensemble, d: DiversityScores, cfg: DskfConfig) -> Ensemble:
    return aligned.subset(selected_indices(d, cfg))


def cluster_weights(selected: Ensemble, cfg: DskfConfig) -> ClusterWeights:
    """Per-cluster stability: mean F-beta against the same label in every other partition.

    A label missing from the other partition scores 0 there. Weights are the
    qualities normalised to sum to one; ``uniform`` weighting gives every
    cluster ``1/h``.
    """
    Y = selected.label_matrix()
    m, _ = Y.shape
    oh = _onehot(Y)
    sizes = oh.sum(axis=1)  # (m, L)
    present = sizes > 0
    index = tuple((p, int(s)) for p in range(m) for s in np.flatnonzero(present[p]))
    h = len(index)

    if cfg.weighting == "uniform":
        raw = np.ones(h)
    else:
        if m < 2:
            raise ValueError("F-score weighting needs at least two selected partitions")
        b2 = cfg.beta ** 2
        ohf = oh.astype(float)
        hits = np.einsum("pis,jis->pjs", ohf, ohf)  # |c_s^(p) ∩ c_s^(j)|
        denom = b2 * sizes[None, :, :] + sizes[:, None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            f = np.where(hits > 0, (1 + b2) * hits / denom, 0.0)
        f[np.arange(m), np.arange(m), :] = 0.0
        quality = f.sum(axis=1) / (m - 1)  # (m, L)
        raw = np.array([quality[p, s] for p, s in index])

    total = raw.sum()
    if total <= 0:
        warnings.warn("every cluster scored zero quality; falling back to uniform weights",
                      RuntimeWarning)
        normalized = np.full(h, 1.0 / h)
    else:
        normalized = raw / total
    return ClusterWeights(raw, normalized, index)


def association_matrix(selected: Ensemble, index) -> np.ndarray:
    """Binary ``n x h`` sample-to-cluster membership, columns in ``index`` order."""
    Y = selected.label_matrix()
    return np.stack([Y[p] == s for p, s in index], axis=1).astype(float)


def weighted_coassociation(selected: Ensemble, w: ClusterWeights) -> CoassociationMatrix:
    Y = selected.label_matrix()
    expected = {(p, int(s)) for p in range(Y.shape[0]) for s in np.unique(Y[p])}
    if set(w.cluster_index) != expected or len(w.cluster_index) != len(expected):
        raise ValueError("cluster weights do not cover exactly the clusters of the ensemble")
    B = association_matrix(selected, w.cluster_index)
    S = (B * w.normalized) @ B.T
    S = (S + S.T) / 2  # exact symmetry
    return CoassociationMatrix(S)


def coassociation_frequency(ens: Ensemble) -> CoassociationMatrix:
    """Fraction of partitions placing each pair of samples together."""
    Y = ens.label_matrix()
    S = np.zeros((ens.n, ens.n))
    for row in Y:
        S += row[:, None] == row[None, :]
    return CoassociationMatrix(S / ens.m)


def hac_al(s: CoassociationMatrix | np.ndarray, k: int) -> Partition:
    """Average-linkage agglomeration on ``max_offdiag(S) - S``, stopped at ``k`` clusters.

    Clusters occupy slots named after their smallest sample; a merge keeps
    the lower slot. Among equal linkage distances the pair with the smallest
    ``(i, j)`` slots merges first; distances within a relative ``1e-10`` of
    the scale of ``S`` count as equal, so rescaling ``S`` cannot flip a tie
    through rounding. Output labels are ``0..k-1`` ordered by each cluster's
    smallest sample.
    """
    S = np.asarray(s.values if isinstance(s, CoassociationMatrix) else s, dtype=float)
    n = S.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    off = ~np.eye(n, dtype=bool)
    s_max = S[off].max() if n > 1 else 0.0
    D = s_max - S
    tol = 1e-10 * max(float(np.abs(S).max()), np.finfo(float).tiny)
    np.fill_diagonal(D, np.inf)
    size = np.ones(n)
    owner = np.arange(n)
    active = np.ones(n, dtype=bool)
    for _ in range(n - k):
        flat = int(np.argmax(D <= D.min() + tol))
        i, j = divmod(flat, n)  # i < j: symmetric matrix, first hit in row-major order
        merged = (size[i] * D[i] + size[j] * D[j]) / (size[i] + size[j])
        D[i, :] = merged
        D[:, i] = merged
        D[j, :] = np.inf
        D[:, j] = np.inf
        D[i, i] = np.inf
        size[i] += size[j]
        active[j] = False
        owner[owner == j] = i
    slots = np.flatnonzero(active)
    return Partition(np.searchsorted(slots, owner))


def dskf(ens: Ensemble, cfg: DskfConfig, seed: int | None = 0) -> tuple[Partition, DiagnosticsReport]:
    """Run the full selective, weighted consensus on a raw ensemble."""
    if ens.m == 0:
        raise EmptyInputError("empty ensemble")
    if cfg.final_k > ens.n:
        raise ValueError(f"final_k={cfg.final_k} exceeds the sample count {ens.n}")
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    aligned = align_ensemble(ens, cfg.reference, seed)
    t1 = time.perf_counter()
    timings["alignment"] = t1 - t0

    if aligned.m >= 2:
        d = diversity_scores(aligned)
    else:
        d = DiversityScores(np.zeros(1))
    keep = selected_indices(d, cfg)
    selected = aligned.subset(keep)
    t2 = time.perf_counter()
    timings["selection"] = t2 - t1

    if selected.m < 2 and cfg.weighting == "f_score":
        logger.warning("only one partition selected; using uniform cluster weights")
        w = cluster_weights(selected, DskfConfig(cfg.final_k, weighting="uniform"))
    else:
        w = cluster_weights(selected, cfg)
    t3 = time.perf_counter()
    timings["weighting"] = t3 - t2

    S = weighted_coassociation(selected, w)
    t4 = time.perf_counter()
    timings["coassociation"] = t4 - t3

    result = hac_al(S, cfg.final_k)
    timings["consensus"] = time.perf_counter() - t4

    report = DiagnosticsReport(aligned.reference_index, np.asarray(d.values), keep, w, timings)
    return result, report


def eac_al(ens: Ensemble, k: int) -> Partition:
    """Evidence accumulation: unweighted co-association over all partitions, then HAC-AL."""
    return hac_al(coassociation_frequency(ens), k)
