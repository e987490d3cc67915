import numpy as np
import pytest
from hypothesis import given, strategies as st

from dskf.exceptions import EmptyInputError, SizeMismatchError
from dskf.partition import (
    Cluster,
    Ensemble,
    Partition,
    binarized,
    contingency,
    corresponding_partition,
    extended_partition,
    overlap_sizes,
)

labels_st = st.lists(st.integers(0, 5), min_size=1, max_size=40)


def test_partition_basic_properties():
    p = Partition([3, 1, 3, 7])
    assert p.n == 4
    assert p.k == 3
    assert p.label_values.tolist() == [1, 3, 7]
    assert p.sizes.tolist() == [1, 2, 1]
    assert p.cluster(3).members.tolist() == [0, 2]
    with pytest.raises(KeyError):
        p.cluster(2)


def test_partition_rejects_bad_input():
    with pytest.raises(EmptyInputError):
        Partition([])
    with pytest.raises(ValueError):
        Partition([0, -1])


def test_partition_labels_are_read_only():
    p = Partition([1, 2])
    with pytest.raises(ValueError):
        p.labels[0] = 5


def test_cluster_normalizes_members():
    c = Cluster.of([4, 1, 1, 3])
    assert c.members.tolist() == [1, 3, 4]
    assert c.size == 3
    assert c == Cluster.of([3, 4, 1])
    assert c.mask(6).tolist() == [False, True, False, True, True, False]


def test_relabel_and_grouping():
    p = Partition([1, 1, 2, 3])
    q = p.relabel({1: 9, 2: 4, 3: 0})
    assert q.labels.tolist() == [9, 9, 4, 0]
    assert p.same_grouping(q)
    assert not p.same_labels(q)
    assert not p.same_grouping(Partition([1, 2, 2, 3]))


def test_contingency_cells():
    t = contingency(Partition([1, 1, 2, 2]), Partition([5, 6, 6, 6]))
    assert t.counts.tolist() == [[1, 1], [0, 2]]
    assert t.cell(2, 6) == 2
    assert t.cell(3, 6) == 0
    with pytest.raises(SizeMismatchError):
        contingency(Partition([1]), Partition([1, 2]))


@given(labels_st, st.data())
def test_contingency_marginals(a, data):
    b = data.draw(st.lists(st.integers(0, 5), min_size=len(a), max_size=len(a)))
    p, q = Partition(a), Partition(b)
    t = contingency(p, q)
    assert t.n == p.n
    assert t.row_sums.tolist() == p.sizes.tolist()
    assert t.col_sums.tolist() == q.sizes.tolist()
    assert (t.counts >= 0).all()


@given(labels_st, st.data())
def test_corresponding_and_extended_partitions(ref_labels, data):
    ref = Partition(ref_labels)
    members = data.draw(st.sets(st.integers(0, ref.n - 1), min_size=1))
    c = Cluster.of(members)
    alphas = corresponding_partition(c, ref)
    betas = extended_partition(c, ref)
    assert len(alphas) == len(betas)
    union = np.concatenate([a.members for a in alphas])
    assert sorted(union.tolist()) == c.members.tolist()
    assert len(union) == c.size
    for a, b in zip(alphas, betas):
        assert set(a.members) <= set(b.members)
    labels, inside, full = overlap_sizes(c, ref)
    assert inside.tolist() == [a.size for a in alphas]
    assert full.tolist() == [b.size for b in betas]


def test_binarized_marks_whole_set_degenerate():
    assert binarized(Cluster.of([0, 2]), 4).labels.tolist() == [1, 2, 1, 2]
    assert not binarized(Cluster.of([0, 2]), 4).degenerate
    whole = binarized(Cluster.of(range(4)), 4)
    assert whole.degenerate and whole.k == 1


def test_ensemble_validation_and_subset():
    ens = Ensemble.from_labels([[1, 2, 2], [1, 1, 2], [3, 3, 3]])
    assert ens.m == 3 and ens.n == 3
    assert ens.label_matrix().shape == (3, 3)
    with pytest.raises(SizeMismatchError):
        Ensemble.from_labels([[1, 2], [1, 2, 3]])
    aligned = Ensemble(ens.partitions, aligned=True, reference_index=1)
    sub = aligned.subset([2, 1])
    assert sub.aligned and sub.reference_index == 1
    assert aligned.subset([0, 2]).reference_index is None
