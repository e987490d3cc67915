"""Partition and cluster quality measures.

Partition-level: entropy, NMI, SMEP, and the classification scores
(accuracy, Cohen's kappa, per-label recall/precision/F-beta) that become
meaningful once two partitions share a label space.

Cluster-level, each scoring one cluster ``c`` against a reference
partition: BNMI, MAX, APMM, ENMI, SME and the F-beta of ``c``.

Logarithms are natural unless a base is given; NMI does not depend on it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import SizeMismatchError
from .partition import Cluster, Partition, contingency, overlap_sizes


@dataclass(frozen=True)
class MetricConfig:
    beta: float = 1.0
    log_base: float = math.e

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if not (self.log_base > 0 and self.log_base != 1):
            raise ValueError("log_base must be positive and not 1")


DEFAULT_CONFIG = MetricConfig()


@dataclass(frozen=True)
class LabelScore:
    label: int
    recall: float
    precision: float
    f_score: float


@dataclass(frozen=True)
class ClassificationScores:
    accuracy: float
    kappa: float
    per_label: tuple[LabelScore, ...]
    macro_f: float


def _plogp_sum(counts: np.ndarray, n: int) -> float:
    c = counts[counts > 0].astype(float)
    return float(-(c / n * np.log(c / n)).sum())


def entropy(p: Partition, base: float | None = None) -> float:
    h = _plogp_sum(p.sizes, p.n)
    if base is not None:
        h /= math.log(base)
    return max(h, 0.0)


def mutual_information(p: Partition, q: Partition) -> float:
    table = contingency(p, q)
    n = table.n
    nz = table.counts > 0
    nst = table.counts[nz].astype(float)
    outer = np.outer(table.row_sums, table.col_sums)[nz].astype(float)
    return max(float((nst / n * np.log(n * nst / outer)).sum()), 0.0)


def nmi(p: Partition, q: Partition) -> float:
    """Mutual information over the geometric mean of the two entropies.

    Defined as 0 when either partition is a single cluster (zero
    denominator).
    """
    if p.n != q.n:
        raise SizeMismatchError(f"partitions have different sizes ({p.n} vs {q.n})")
    denom = math.sqrt(entropy(p) * entropy(q))
    if denom == 0.0:
        return 0.0
    return min(mutual_information(p, q) / denom, 1.0)


def _binary(mask: np.ndarray) -> Partition:
    return Partition(np.where(mask, 1, 2))


def positive_labels(c: Cluster, ref: Partition) -> tuple[np.ndarray, np.ndarray]:
    """Reference clusters with strictly more than half their samples in ``c``.

    Returns their labels and their overlaps with ``c``.
    """
    labels, inside, full = overlap_sizes(c, ref)
    pos = 2 * inside > full
    return labels[pos], inside[pos]


def bnmi(c: Cluster, ref: Partition) -> float:
    pos, _ = positive_labels(c, ref)
    approx = np.isin(ref.labels, pos)
    return nmi(_binary(c.mask(ref.n)), _binary(approx))


def max_criterion(c: Cluster, ref: Partition) -> float:
    """Like BNMI but the approximation of ``c`` is only the single most overlapping positive cluster."""
    pos, inside = positive_labels(c, ref)
    if pos.size == 0:
        return 0.0
    best = pos[int(np.argmax(inside))]
    return nmi(_binary(c.mask(ref.n)), _binary(ref.labels == best))


def apmm(c: Cluster, ref: Partition) -> float:
    n = ref.n
    if c.size >= n:
        raise ValueError("APMM is undefined when the cluster covers the whole dataset")
    _, inside, _ = overlap_sizes(c, ref)
    a = inside.astype(float)
    num = 2 * c.size * math.log(c.size / n)
    return num / (c.size * math.log(c.size / n) + float((a * np.log(a / n)).sum()))


def enmi(c: Cluster, ref: Partition) -> float:
    """NMI between {c, rest} and the reference restricted to ``c`` plus singletons for every other sample."""
    mask = c.mask(ref.n)
    outside = np.flatnonzero(~mask)
    labels = ref.labels.copy()
    labels[outside] = ref.label_values[-1] + 1 + np.arange(outside.size)
    return nmi(_binary(mask), Partition(labels))


def sme(c: Cluster, ref: Partition) -> float:
    _, inside, full = overlap_sizes(c, ref)
    a = inside.astype(float)
    sim_cluster = a.max() / c.size
    sim_partition = float((a / c.size * a / full).sum())
    return float(sim_cluster * sim_partition)


def smep(p: Partition, q: Partition) -> float:
    """Symmetric partition similarity built from SME.

    Average of the unweighted mean SME of p's clusters against q and of q's
    clusters against p.
    """
    if p.n != q.n:
        raise SizeMismatchError(f"partitions have different sizes ({p.n} vs {q.n})")
    forward = np.mean([sme(c, q) for c in p.clusters().values()])
    backward = np.mean([sme(c, p) for c in q.clusters().values()])
    return float((forward + backward) / 2)


def f_beta(precision: float, recall: float, beta: float = 1.0) -> float:
    b2 = beta * beta
    denom = b2 * precision + recall
    if denom == 0:
        return 0.0
    return (1 + b2) * precision * recall / denom


def _safe_div(a, b):
    return np.divide(a, b, out=np.zeros_like(a, dtype=float), where=b > 0)


def classification_scores(
    actual: Partition, predicted: Partition, cfg: MetricConfig = DEFAULT_CONFIG
) -> ClassificationScores:
    """Accuracy, Cohen's kappa and per-label scores over the union label set.

    Both partitions must already share a label space. Kappa uses the
    multi-class chance agreement ``sum_t (actual_t / n)(predicted_t / n)``,
    which is the binary formula when only two labels occur. When chance
    agreement is 1 (both constant and equal) kappa is 1.
    """
    if actual.n != predicted.n:
        raise SizeMismatchError(f"partitions have different sizes ({actual.n} vs {predicted.n})")
    n = actual.n
    union, codes = np.unique(np.concatenate([actual.labels, predicted.labels]), return_inverse=True)
    L = union.size
    a_codes, p_codes = codes[:n], codes[n:]
    conf = np.bincount(a_codes * L + p_codes, minlength=L * L).reshape(L, L)
    diag = np.diag(conf).astype(float)
    row = conf.sum(axis=1).astype(float)  # actual
    col = conf.sum(axis=0).astype(float)  # predicted

    accuracy = float(diag.sum() / n)
    expected = float((row * col).sum() / (n * n))
    if expected >= 1.0:
        kappa = 1.0 if accuracy == 1.0 else 0.0
    else:
        kappa = (accuracy - expected) / (1.0 - expected)

    recall = _safe_div(diag, row)
    precision = _safe_div(diag, col)
    per_label = tuple(
        LabelScore(int(lab), float(r), float(pr), f_beta(float(pr), float(r), cfg.beta))
        for lab, r, pr in zip(union, recall, precision)
    )
    macro_f = float(np.mean([s.f_score for s in per_label]))
    return ClassificationScores(accuracy, float(kappa), per_label, macro_f)


def kappa(actual: Partition, predicted: Partition) -> float:
    return classification_scores(actual, predicted).kappa


def cluster_f(
    c: Cluster,
    label: int | None,
    ref: Partition,
    cfg: MetricConfig = DEFAULT_CONFIG,
    mode: str = "aligned",
) -> float:
    """F-beta of cluster ``c`` treated as a prediction of a reference cluster.

    ``aligned``: the reference cluster carrying ``label`` is the positive
    class; an absent label scores 0. ``best_match``: the best F-beta over all
    reference clusters (``label`` is ignored).
    """
    if mode == "aligned":
        mask = c.mask(ref.n)
        hits = int(np.count_nonzero(ref.labels[mask] == label))
        if hits == 0:
            return 0.0
        support = int(np.count_nonzero(ref.labels == label))
        return f_beta(hits / c.size, hits / support, cfg.beta)
    if mode == "best_match":
        _, inside, full = overlap_sizes(c, ref)
        return float(max(f_beta(a / c.size, a / f, cfg.beta) for a, f in zip(inside, full)))
    raise ValueError(f"unknown mode {mode!r}")
