"""Seeded k-means ensembles.

Each base partition comes from one Lloyd run whose cluster count is drawn
uniformly from ``k_range``. Runs get independent random streams derived
from the master seed and the run index (see :func:`mix_seed`), so results
do not depend on execution order.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import SizeMismatchError
from .partition import Ensemble, Partition


class Distance(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    COSINE = "cosine"


def mix_seed(seed: int, index: int) -> int:
    """Derive a child seed from ``(seed, index)``.

    Uses numpy's ``SeedSequence`` hashing of the pair and takes the first
    32-bit word of the generated state.
    """
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1)[0])


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    ground_truth: Partition | None = None
    name: str = ""

    def __post_init__(self):
        x = np.asarray(self.features, dtype=float)
        if x.ndim != 2:
            raise ValueError("features must be a 2-D array")
        if x.shape[0] < 2 or x.shape[1] < 1:
            raise ValueError("a dataset needs at least 2 samples and 1 feature")
        if self.ground_truth is not None and self.ground_truth.n != x.shape[0]:
            raise SizeMismatchError("ground truth length differs from the sample count")
        x.setflags(write=False)
        object.__setattr__(self, "features", x)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int | None:
        return None if self.ground_truth is None else self.ground_truth.k


@dataclass(frozen=True)
class GenerationConfig:
    m: int = 50
    k_range: tuple[int, int] = (2, 2)
    distance: Distance = Distance.EUCLIDEAN
    max_iters: int = 100
    seed: int = 0
    kmeans_plus_plus: bool = False

    def __post_init__(self):
        object.__setattr__(self, "distance", Distance(self.distance))
        object.__setattr__(self, "k_range", tuple(int(v) for v in self.k_range))
        k_min, k_max = self.k_range
        if not 2 <= k_min <= k_max:
            raise ValueError(f"invalid k_range {self.k_range}")
        if self.m < 2:
            raise ValueError("an ensemble needs m >= 2")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")

    def validate_for(self, n: int) -> None:
        if self.k_range[1] > n:
            raise ValueError(f"k_max={self.k_range[1]} exceeds the sample count {n}")


def benchmark_k_range(n: int, n_classes: int) -> tuple[int, int]:
    """``[k*, floor(sqrt(n))]``, the range used for the UCI benchmarks."""
    return n_classes, max(n_classes, int(np.floor(np.sqrt(n))))


@dataclass
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    n_iter: int
    converged: bool
    objective: list[float] = field(default_factory=list)

    @property
    def partition(self) -> Partition:
        return Partition(self.labels)


def _unit_rows(x: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    return np.divide(x, norms, out=np.zeros_like(x), where=norms > 0)


def _plus_plus(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    idx = [int(rng.integers(n))]
    d2 = ((x - x[idx[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            remaining = np.setdiff1d(np.arange(n), idx)
            idx.append(int(rng.choice(remaining)))
        else:
            idx.append(int(rng.choice(n, p=d2 / total)))
        d2 = np.minimum(d2, ((x - x[idx[-1]]) ** 2).sum(axis=1))
    return np.asarray(idx)


def lloyd(
    x: np.ndarray,
    k: int,
    rng: np.random.Generator,
    distance: Distance | str = Distance.EUCLIDEAN,
    max_iters: int = 100,
    plus_plus: bool = False,
) -> KMeansResult:
    """Lloyd iterations from ``k`` distinct random samples as initial centers.

    Clusters that lose all their samples are dropped rather than reseeded.
    In cosine mode rows are unit-normalised and centers are renormalised
    means (spherical k-means); the objective is then ``sum(1 - cos)``.
    """
    distance = Distance(distance)
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    cosine = distance is Distance.COSINE
    if cosine:
        x = _unit_rows(x)

    init = _plus_plus(x, k, rng) if plus_plus else rng.choice(n, size=k, replace=False)
    centers = x[np.sort(init)].copy()
    labels = np.full(n, -1)
    objective: list[float] = []
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        if cosine:
            sim = x @ centers.T
            new = np.argmax(sim, axis=1)
            objective.append(float((1.0 - sim[np.arange(n), new]).sum()))
        else:
            d2 = (x * x).sum(1)[:, None] - 2 * x @ centers.T + (centers * centers).sum(1)[None, :]
            new = np.argmin(d2, axis=1)
            objective.append(float(((x - centers[new]) ** 2).sum()))
        if np.array_equal(new, labels):
            converged = True
            objective.pop()
            break
        used, labels = np.unique(new, return_inverse=True)
        # dropping empty clusters keeps the surviving centers in their original order
        sums = np.zeros((used.size, x.shape[1]))
        np.add.at(sums, labels, x)
        centers = sums / np.bincount(labels)[:, None]
        if cosine:
            centers = _unit_rows(centers)
    return KMeansResult(labels, centers, it, converged, objective)


def kmeans(
    data: Dataset,
    k: int,
    distance: Distance | str = Distance.EUCLIDEAN,
    seed: int = 0,
    max_iters: int = 100,
    plus_plus: bool = False,
) -> Partition:
    rng = np.random.default_rng(seed)
    return lloyd(data.features, k, rng, distance, max_iters, plus_plus).partition


def generate_ensemble(data: Dataset, cfg: GenerationConfig) -> Ensemble:
    cfg.validate_for(data.n)
    if np.ptp(data.features, axis=0).max() == 0:
        warnings.warn(f"all samples in {data.name or 'dataset'} are identical; "
                      "base partitions will have a single cluster", RuntimeWarning)
    k_min, k_max = cfg.k_range
    parts = []
    for i in range(cfg.m):
        rng = np.random.default_rng(mix_seed(cfg.seed, i))
        k = int(rng.integers(k_min, k_max + 1))
        res = lloyd(data.features, k, rng, cfg.distance, cfg.max_iters, cfg.kmeans_plus_plus)
        parts.append(res.partition)
    return Ensemble(tuple(parts))
