import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from dskf.alignment import (
    CostMatrix,
    align_ensemble,
    align_partition,
    alignment_cost,
    choose_reference,
    cost_matrix,
    solve_assignment,
)
from dskf.consensus import pairwise_kappa
from dskf.exceptions import EmptyInputError
from dskf.partition import Cluster, Ensemble, Partition, contingency

from oracles import best_relabel_cost, min_assignment_cost, optimum_is_unique


def test_alignment_cost_is_symmetric_difference():
    assert alignment_cost(Cluster.of([0, 1, 2]), Cluster.of([2, 3])) == 3
    assert alignment_cost(Cluster.of([0, 1]), Cluster.of([0, 1])) == 0


def test_cost_matrix_entries():
    cm = cost_matrix(Partition([1, 1, 2, 2]), Partition([1, 2, 2, 2]))
    assert cm.costs.tolist() == [[1, 3], [3, 1]]
    assert cm.source_labels == (1, 2) and cm.target_labels == (1, 2)


def test_rectangular_assignment_known_optimum():
    m = solve_assignment(CostMatrix.from_array([[5, 1, 9], [2, 8, 3]]))
    assert m.total_cost == 3
    assert m.pairs == {1: 2, 2: 1}
    assert m.unmatched_sources == ()


def test_more_sources_than_targets_leaves_unmatched():
    m = solve_assignment(CostMatrix.from_array([[4, 1], [0, 7], [3, 3]]))
    assert m.total_cost == 1
    assert m.pairs == {1: 2, 2: 1}
    assert m.unmatched_sources == (3,)


def test_ties_resolve_to_lexicographically_smallest_targets():
    m = solve_assignment(CostMatrix.from_array([[1, 1], [1, 1]]))
    assert m.pairs == {1: 1, 2: 2}


def test_negative_cost_rejected():
    with pytest.raises(ValueError):
        solve_assignment(CostMatrix.from_array([[1, -1], [0, 0]]))


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.data())
def test_solver_matches_brute_force(rows, cols, data):
    costs = np.array(data.draw(st.lists(st.integers(0, 30), min_size=rows * cols,
                                        max_size=rows * cols))).reshape(rows, cols)
    m = solve_assignment(CostMatrix.from_array(costs))
    assert m.total_cost == min_assignment_cost(costs)
    assert len(m.pairs) == min(rows, cols)
    assert len(set(m.pairs.values())) == len(m.pairs)
    assert len(m.unmatched_sources) == max(rows - cols, 0)
    assert sum(int(costs[s - 1, t - 1]) for s, t in m.pairs.items()) == m.total_cost


def test_fresh_labels_for_unmatched_sources():
    p = Partition([1, 1, 2, 2, 3, 3])
    ref = Partition([4, 4, 4, 4, 7, 7])
    aligned, mapping = align_partition(p, ref)
    assert aligned.labels.tolist() == [4, 4, 8, 8, 7, 7]
    assert mapping.unmatched_sources == (2,)


partition_pair = st.integers(2, 25).flatmap(
    lambda n: st.tuples(st.lists(st.integers(0, 4), min_size=n, max_size=n),
                        st.lists(st.integers(0, 4), min_size=n, max_size=n)))


@settings(max_examples=100, deadline=None)
@given(partition_pair)
def test_alignment_preserves_grouping_and_is_optimal(pair):
    p, ref = Partition(pair[0]), Partition(pair[1])
    aligned, mapping = align_partition(p, ref)
    assert aligned.same_grouping(p)
    before = contingency(p, ref).counts
    after = contingency(aligned, ref).counts
    assert sorted(map(tuple, before)) == sorted(map(tuple, after))
    if p.k <= 5 and ref.k <= 5:
        assert mapping.total_cost == best_relabel_cost(p.labels, ref.labels)


@given(st.lists(st.integers(0, 6), min_size=1, max_size=30))
def test_self_alignment_is_identity(labels):
    p = Partition(labels)
    aligned, mapping = align_partition(p, p)
    assert mapping.total_cost == 0
    assert aligned == p


def test_choose_reference():
    ens = Ensemble.from_labels([[1, 1, 1, 1], [1, 2, 3, 4], [1, 1, 2, 2]])
    assert choose_reference(ens, "max_entropy", None) == 1
    assert choose_reference(ens, "random", 5) == choose_reference(ens, "random", 5)
    assert 0 <= choose_reference(ens, "random", 5) < 3


def test_align_ensemble_errors():
    with pytest.raises(EmptyInputError):
        align_ensemble(Ensemble(()))
    aligned = align_ensemble(Ensemble.from_labels([[1, 2], [2, 1]]))
    with pytest.raises(ValueError):
        align_ensemble(aligned)


def _random_structured_ensemble(rng, m, n):
    """Noisy copies of one 3-group labelling; every row uses at most 3 labels."""
    base = np.arange(n) % 3
    rows = []
    for _ in range(m):
        row = base.copy()
        flip = rng.random(n) < 0.15
        row[flip] = rng.integers(0, 3, size=flip.sum())
        rows.append(row)
    return rows


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_post_alignment_kappa_invariant_to_input_relabeling(seed):
    # Label-order tie-breaking is only invisible when every optimum is unique
    # and no partition has unmatched clusters, so the inputs are restricted to that case.
    rng = np.random.default_rng(seed)
    rows = _random_structured_ensemble(rng, 5, 40)
    ens = Ensemble.from_labels(rows)
    assume(all(p.k <= ens[0].k and optimum_is_unique(cost_matrix(p, ens[0]).costs) for p in ens))
    permuted = [rng.permutation(10)[row] for row in rows]
    ens2 = Ensemble.from_labels(permuted)
    a1 = align_ensemble(ens, reference_index=0)
    a2 = align_ensemble(ens2, reference_index=0)
    for p, q in zip(a1, a2):
        assert p.same_grouping(q)
    np.testing.assert_allclose(pairwise_kappa(a1), pairwise_kappa(a2), atol=1e-12)


def test_tied_optimum_follows_label_order():
    # sources {0,1} and {2,3} cost the same against the single reference cluster
    ref = Partition([1, 1, 1, 1])
    aligned, mapping = align_partition(Partition([1, 1, 2, 2]), ref)
    assert mapping.pairs == {1: 1} and mapping.unmatched_sources == (2,)
    swapped, mapping = align_partition(Partition([2, 2, 1, 1]), ref)
    assert mapping.pairs == {1: 1}
    assert aligned.labels.tolist() == [1, 1, 2, 2]
    assert swapped.labels.tolist() == [2, 2, 1, 1]
