"""Partition, cluster and contingency-table value types.

Labels are kept exactly as given. Dense codes (indices into the sorted
distinct labels) are derived on demand for table building, so partitions
that carry non-contiguous labels after alignment keep their meaning.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .exceptions import EmptyInputError, SizeMismatchError


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Cluster:
    """A non-empty set of sample indices."""

    members: np.ndarray

    def __post_init__(self):
        m = np.unique(np.asarray(self.members, dtype=np.int64))
        if m.size == 0:
            raise EmptyInputError("a cluster must contain at least one sample")
        if m[0] < 0:
            raise ValueError("sample indices must be non-negative")
        object.__setattr__(self, "members", _frozen(m))

    @classmethod
    def of(cls, indices: Iterable[int]) -> "Cluster":
        return cls(np.fromiter(indices, dtype=np.int64))

    @property
    def size(self) -> int:
        return int(self.members.size)

    def mask(self, n: int) -> np.ndarray:
        if self.members[-1] >= n:
            raise SizeMismatchError(f"cluster index {self.members[-1]} out of range for n={n}")
        out = np.zeros(n, dtype=bool)
        out[self.members] = True
        return out

    def __len__(self) -> int:
        return self.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Cluster):
            return NotImplemented
        return np.array_equal(self.members, other.members)

    def __hash__(self) -> int:
        return hash(self.members.tobytes())

    def __repr__(self) -> str:
        return f"Cluster(size={self.size})"


@dataclass(frozen=True, eq=False)
class Partition:
    """Assignment of ``n`` samples to non-negative integer cluster labels.

    ``degenerate`` marks a one-cluster partition produced by binarizing a
    cluster that covers every sample.
    """

    labels: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        labels = np.array(self.labels, dtype=np.int64).ravel()
        if labels.size == 0:
            raise EmptyInputError("a partition needs at least one sample")
        if labels.min() < 0:
            raise ValueError("cluster labels must be non-negative integers")
        object.__setattr__(self, "labels", _frozen(labels))

    @property
    def n(self) -> int:
        return int(self.labels.size)

    @cached_property
    def _unique(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        values, codes, counts = np.unique(self.labels, return_inverse=True, return_counts=True)
        return _frozen(values), _frozen(codes.ravel()), _frozen(counts)

    @property
    def label_values(self) -> np.ndarray:
        """Distinct labels, ascending."""
        return self._unique[0]

    @property
    def codes(self) -> np.ndarray:
        """Dense code per sample: index of its label in ``label_values``."""
        return self._unique[1]

    @property
    def sizes(self) -> np.ndarray:
        """Cluster sizes, ordered like ``label_values``."""
        return self._unique[2]

    @property
    def k(self) -> int:
        return int(self.label_values.size)

    def cluster(self, label: int) -> Cluster:
        idx = np.flatnonzero(self.labels == label)
        if idx.size == 0:
            raise KeyError(label)
        return Cluster(idx)

    def clusters(self) -> dict[int, Cluster]:
        order = np.argsort(self.codes, kind="stable")
        bounds = np.cumsum(self.sizes)[:-1]
        return {
            int(lab): Cluster(block)
            for lab, block in zip(self.label_values, np.split(order, bounds))
        }

    def same_labels(self, other: "Partition") -> bool:
        """Exact label equality, used for aligned comparisons."""
        return np.array_equal(self.labels, other.labels)

    def same_grouping(self, other: "Partition") -> bool:
        """True when both induce the same grouping regardless of label names."""
        if self.n != other.n or self.k != other.k:
            return False
        table = contingency(self, other).counts
        return bool(np.count_nonzero(table) == self.k)

    def relabel(self, mapping: dict[int, int]) -> "Partition":
        lookup = np.array([mapping[int(v)] for v in self.label_values], dtype=np.int64)
        return Partition(lookup[self.codes])

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return self.same_labels(other)

    def __hash__(self) -> int:
        return hash(self.labels.tobytes())

    def __repr__(self) -> str:
        return f"Partition(n={self.n}, k={self.k})"


def partition_from_labels(labels: Sequence[int]) -> Partition:
    return Partition(np.asarray(labels))


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    counts: np.ndarray
    row_labels: np.ndarray
    col_labels: np.ndarray

    @property
    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    def cell(self, row_label: int, col_label: int) -> int:
        r = np.searchsorted(self.row_labels, row_label)
        c = np.searchsorted(self.col_labels, col_label)
        if (r >= self.row_labels.size or self.row_labels[r] != row_label
                or c >= self.col_labels.size or self.col_labels[c] != col_label):
            return 0
        return int(self.counts[r, c])


def contingency(p: Partition, q: Partition) -> ContingencyTable:
    """Overlap counts ``|c_s ∩ c_t|`` between the clusters of ``p`` and ``q``."""
    if p.n != q.n:
        raise SizeMismatchError(f"partitions have different sizes ({p.n} vs {q.n})")
    flat = p.codes * q.k + q.codes
    counts = np.bincount(flat, minlength=p.k * q.k).reshape(p.k, q.k)
    return ContingencyTable(_frozen(counts), p.label_values, q.label_values)


def binarized(c: Cluster, n: int) -> Partition:
    """Two-cluster partition {c, complement} labelled 1 and 2.

    When ``c`` covers all ``n`` samples the result is a single cluster and
    carries ``degenerate=True``.
    """
    labels = np.where(c.mask(n), 1, 2)
    return Partition(labels, degenerate=c.size == n)


def overlap_sizes(c: Cluster, ref: Partition) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per reference cluster meeting ``c``: its label, ``|c ∩ c_t|`` and ``|c_t|``."""
    inside = np.bincount(ref.codes[c.mask(ref.n)], minlength=ref.k)
    hit = inside > 0
    return ref.label_values[hit], inside[hit], ref.sizes[hit]


def corresponding_partition(c: Cluster, ref: Partition) -> list[Cluster]:
    """Non-empty intersections of ``c`` with each reference cluster, by ascending reference label."""
    members = c.members
    if members[-1] >= ref.n:
        raise SizeMismatchError("cluster index out of range for reference partition")
    sub = ref.labels[members]
    return [Cluster(members[sub == lab]) for lab in np.unique(sub)]


def extended_partition(c: Cluster, ref: Partition) -> list[Cluster]:
    """Whole reference clusters that meet ``c``; index-aligned with :func:`corresponding_partition`."""
    if c.members[-1] >= ref.n:
        raise SizeMismatchError("cluster index out of range for reference partition")
    return [Cluster(np.flatnonzero(ref.labels == lab)) for lab in np.unique(ref.labels[c.members])]


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Ordered partitions over a common sample set."""

    partitions: tuple[Partition, ...]
    aligned: bool = False
    reference_index: int | None = None

    def __post_init__(self):
        parts = tuple(self.partitions)
        if parts:
            n = parts[0].n
            for i, p in enumerate(parts):
                if p.n != n:
                    raise SizeMismatchError(f"partition {i} has {p.n} samples, expected {n}")
        if self.reference_index is not None and not 0 <= self.reference_index < len(parts):
            raise IndexError("reference index out of range")
        object.__setattr__(self, "partitions", parts)

    @classmethod
    def from_labels(cls, rows: Iterable[Sequence[int]]) -> "Ensemble":
        return cls(tuple(Partition(np.asarray(r)) for r in rows))

    @property
    def m(self) -> int:
        return len(self.partitions)

    @property
    def n(self) -> int:
        return self.partitions[0].n if self.partitions else 0

    def label_matrix(self) -> np.ndarray:
        """``m x n`` array of labels."""
        return np.vstack([p.labels for p in self.partitions])

    def subset(self, indices: Sequence[int]) -> "Ensemble":
        """Keep the given partitions in the given order.

        The label space stays aligned even when the reference partition is
        dropped; ``reference_index`` is then ``None``.
        """
        keep = list(indices)
        ref = self.reference_index
        new_ref = keep.index(ref) if ref is not None and ref in keep else None
        return Ensemble(tuple(self.partitions[i] for i in keep), self.aligned, new_ref)

    def __len__(self) -> int:
        return self.m

    def __iter__(self):
        return iter(self.partitions)

    def __getitem__(self, i: int) -> Partition:
        return self.partitions[i]

