"""Label alignment between partitions as a minimum-cost assignment.

A source cluster ``s`` and a reference cluster ``t`` cost
``|s ∪ t| - |s ∩ t|`` to pair up. Each source label goes to at most one
reference label and vice versa; whichever side is smaller is fully matched.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .exceptions import EmptyInputError, SizeMismatchError
from .metrics import entropy
from .partition import Cluster, Ensemble, Partition, contingency


class ReferenceStrategy(str, enum.Enum):
    RANDOM = "random"
    MAX_ENTROPY = "max_entropy"


@dataclass(frozen=True, eq=False)
class CostMatrix:
    costs: np.ndarray  # (len(source_labels), len(target_labels)), non-negative ints
    source_labels: tuple[int, ...]
    target_labels: tuple[int, ...]

    def __post_init__(self):
        costs = np.asarray(self.costs)
        if costs.ndim != 2 or costs.shape != (len(self.source_labels), len(self.target_labels)):
            raise ValueError("cost matrix shape does not match its label lists")
        if costs.size == 0:
            raise EmptyInputError("empty cost matrix")
        object.__setattr__(self, "costs", costs)

    @classmethod
    def from_array(cls, costs) -> "CostMatrix":
        """Cost matrix with labels 1..rows and 1..cols."""
        costs = np.asarray(costs)
        return cls(costs, tuple(range(1, costs.shape[0] + 1)), tuple(range(1, costs.shape[1] + 1)))


@dataclass(frozen=True)
class LabelMapping:
    pairs: dict[int, int]
    unmatched_sources: tuple[int, ...]
    total_cost: int

    def __contains__(self, source: int) -> bool:
        return source in self.pairs


def alignment_cost(c_s: Cluster, c_t: Cluster) -> int:
    """Size of the symmetric difference of two clusters."""
    inter = np.intersect1d(c_s.members, c_t.members, assume_unique=True).size
    return c_s.size + c_t.size - 2 * inter


def cost_matrix(p: Partition, ref: Partition) -> CostMatrix:
    table = contingency(p, ref).counts
    costs = p.sizes[:, None] + ref.sizes[None, :] - 2 * table
    return CostMatrix(
        costs,
        tuple(int(v) for v in p.label_values),
        tuple(int(v) for v in ref.label_values),
    )


def _hungarian(a: list[list[int]]) -> list[int]:
    """Minimum-cost perfect matching on a square matrix.

    Shortest augmenting path form of the Hungarian method with row/column
    potentials. Works on exact Python ints. Returns the column assigned to
    each row.
    """
    n = len(a)
    inf = float("inf")
    u = [0] * (n + 1)
    v = [0] * (n + 1)
    p = [0] * (n + 1)  # p[j]: row matched to column j (1-based, 0 = none)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            row = a[i0 - 1]
            ui0 = u[i0]
            delta = inf
            j1 = 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = row[j - 1] - ui0 - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    assignment = [0] * n
    for j in range(1, n + 1):
        assignment[p[j] - 1] = j - 1
    return assignment


def solve_assignment(cost: CostMatrix) -> LabelMapping:
    """Optimal label mapping for a (possibly rectangular) cost matrix.

    The matrix is padded to square with zeros; dummy pairs are discarded.
    Among equal-cost optima the one whose target sequence (read in ascending
    source order, unmatched counting as past the last target) is
    lexicographically smallest wins. This is enforced exactly by scaling the
    integer costs and adding a positional tie term below the scale.
    """
    costs = cost.costs
    rows, cols = costs.shape
    size = max(rows, cols)
    base = size + 1
    scale = base ** size
    padded = [[0] * size for _ in range(size)]
    for s in range(rows):
        for t in range(cols):
            padded[s][t] = int(costs[s, t])
    if not all(x >= 0 for row in padded for x in row):
        raise ValueError("alignment costs must be non-negative")
    weights = [base ** (size - 1 - s) for s in range(size)]
    perturbed = [[padded[s][t] * scale + t * weights[s] for t in range(size)] for s in range(size)]

    assignment = _hungarian(perturbed)

    pairs: dict[int, int] = {}
    unmatched = []
    total = 0
    for s in range(rows):
        t = assignment[s]
        if t < cols:
            pairs[cost.source_labels[s]] = cost.target_labels[t]
            total += padded[s][t]
        else:
            unmatched.append(cost.source_labels[s])
    return LabelMapping(pairs, tuple(unmatched), total)


def align_partition(p: Partition, ref: Partition) -> tuple[Partition, LabelMapping]:
    """Relabel ``p`` into the label space of ``ref``.

    Source labels left unmatched (when ``p`` has more clusters than ``ref``)
    get fresh labels ``max(ref) + 1, max(ref) + 2, ...`` in ascending source
    label order.
    """
    if p.n != ref.n:
        raise SizeMismatchError(f"partitions have different sizes ({p.n} vs {ref.n})")
    mapping = solve_assignment(cost_matrix(p, ref))
    full = dict(mapping.pairs)
    fresh = int(ref.label_values[-1]) + 1
    for offset, src in enumerate(mapping.unmatched_sources):
        full[src] = fresh + offset
    return p.relabel(full), mapping


def choose_reference(ens: Ensemble, strategy: ReferenceStrategy | str, seed: int | None) -> int:
    strategy = ReferenceStrategy(strategy)
    if strategy is ReferenceStrategy.MAX_ENTROPY:
        scores = [entropy(p) for p in ens.partitions]
        return int(np.argmax(scores))
    rng = np.random.default_rng(seed)
    return int(rng.integers(ens.m))


def align_ensemble(
    ens: Ensemble,
    strategy: ReferenceStrategy | str = ReferenceStrategy.RANDOM,
    seed: int | None = 0,
    reference_index: int | None = None,
) -> Ensemble:
    """Align every partition to one reference partition of the ensemble.

    ``reference_index`` overrides the strategy when given.
    """
    if ens.m == 0:
        raise EmptyInputError("cannot align an empty ensemble")
    if ens.aligned:
        raise ValueError("ensemble is already aligned")
    ref_idx = choose_reference(ens, strategy, seed) if reference_index is None else reference_index
    ref = ens[ref_idx]
    out = [ref if i == ref_idx else align_partition(p, ref)[0] for i, p in enumerate(ens.partitions)]
    return Ensemble(tuple(out), aligned=True, reference_index=ref_idx)

