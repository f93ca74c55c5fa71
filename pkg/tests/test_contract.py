"""Edge contraction: legality, cost effects, memoized order exploration."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parsicompact import (
    CharacterMatrix,
    ContractionState,
    IllegalContractionError,
    compact_search,
    contract_and_update,
    enumerate_cubic,
    enumerate_mixed,
    min_cost_edge,
    most_compact_pipeline,
    mp_cost,
    parse_newick,
    random_matrix,
    evolved_matrix,
    score_unrooted,
    zero_min_cost_edges,
)
from conftest import random_instance


def make_state(seed):
    matrix, tree = random_instance(seed, max_n=6, max_m=4)
    return matrix, tree, ContractionState.from_tree(tree, matrix)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_zero_edges_match_direct_min_cost(seed):
    matrix, tree, state = make_state(seed)
    result = score_unrooted(tree, matrix)
    want = set()
    for u, v in tree.iter_edges():
        if tree.label[u] is not None and tree.label[v] is not None:
            continue
        if min_cost_edge(result.node_sets[u], result.node_sets[v]) == 0:
            want.add((min(u, v), max(u, v)))
    assert {tuple(sorted(e)) for e in zero_min_cost_edges(state)} == want


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_zero_contraction_preserves_cost(seed):
    matrix, tree, state = make_state(seed)
    for edge in zero_min_cost_edges(state):
        after = contract_and_update(state, edge)
        assert after.mp_cost == state.mp_cost
        assert after.tree.num_nodes == tree.num_nodes - 1
        assert mp_cost(after.tree, matrix) == state.mp_cost


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_positive_edge_contraction_strictly_raises_cost(seed):
    matrix, tree, state = make_state(seed)
    zero = {tuple(sorted(e)) for e in zero_min_cost_edges(state)}
    for u, v in list(tree.iter_edges()):
        if tuple(sorted((u, v))) in zero:
            continue
        if tree.label[u] is not None and tree.label[v] is not None:
            continue
        worse = tree.copy()
        worse.contract_edge(u, v)
        assert mp_cost(worse, matrix) > state.mp_cost
        with pytest.raises(IllegalContractionError):
            contract_and_update(state, (u, v))


def test_label_label_edges_are_never_contractible():
    rows = [("a", "A"), ("b", "A"), ("c", "A")]
    matrix = CharacterMatrix.from_rows(rows)
    tree = parse_newick("((a)b)c;")
    state = ContractionState.from_tree(tree, matrix)
    assert zero_min_cost_edges(state) == []
    edge = next(iter(tree.iter_edges()))
    with pytest.raises(IllegalContractionError):
        contract_and_update(state, edge)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_oracle_check_mode_agrees(seed):
    matrix, tree, state = make_state(seed)
    for edge in zero_min_cost_edges(state):
        contract_and_update(state, edge, oracle_check=True)


def test_merged_node_sets_are_the_intersection():
    matrix = evolved_matrix(5, 6, 4, seed=21)
    cubic = enumerate_cubic(matrix)
    tree = next(iter(cubic.incumbents.values()))
    state = ContractionState.from_tree(tree, matrix)
    for u, v in zero_min_cost_edges(state):
        meet = state.vv[u] & state.vv[v]
        after = contract_and_update(state, (u, v))
        # locate the merged node structurally: it is the one absent before
        new_nodes = set(after.tree.iter_nodes()) - (
            set(tree.iter_nodes()) - {u, v}
        )
        assert len(new_nodes) == 1
        w = new_nodes.pop()
        assert after.vv[w] == meet


def run_both(matrix, **kw):
    mixed = enumerate_mixed(matrix)
    pipe = most_compact_pipeline(matrix, **kw)
    return mixed, pipe


@pytest.mark.parametrize("seed", range(6))
def test_pipeline_matches_exhaustive_most_compact(seed):
    rng = random.Random(seed)
    n = rng.randint(4, 6)
    maker = evolved_matrix if seed % 2 else random_matrix
    matrix = maker(n, rng.randint(3, 6), rng.randint(2, 4),
                   seed=rng.randrange(1 << 30))
    mixed, pipe = run_both(matrix)
    assert pipe.mp_cost == mixed.incumbent_cost
    assert set(pipe.trees) == set(mixed.most_compact)
    assert pipe.best_node_count == mixed.min_nodes


def test_memo_and_no_memo_agree_exactly():
    for seed in range(4):
        matrix = evolved_matrix(5, 5, 4, seed=seed)
        fast = most_compact_pipeline(matrix)
        slow = most_compact_pipeline(matrix, no_memo=True)
        assert set(fast.trees) == set(slow.trees)
        assert fast.raw_count == slow.raw_count
        assert fast.best_node_count == slow.best_node_count
        assert fast.contractions <= slow.contractions


def test_identical_data_contracts_to_all_fully_labelled_trees():
    matrix = CharacterMatrix.from_rows([(f"S{i}", "A") for i in range(1, 5)])
    result = most_compact_pipeline(matrix)
    assert result.mp_cost == 0
    assert result.best_node_count == 4
    assert result.dedup_count == 16  # every mixed tree without unlabelled nodes
    for text in result.trees.values():
        tree = parse_newick(text)
        assert tree.n_unlabelled == 0 and tree.num_nodes == 4


def test_compact_search_single_tree():
    matrix = evolved_matrix(5, 8, 4, seed=31)
    cubic = enumerate_cubic(matrix)
    first = min(cubic.incumbents, key=lambda k: k.data)
    tree = cubic.incumbents[first]
    result = compact_search(tree, matrix)
    assert result.mp_cost == cubic.incumbent_cost
    assert result.sources == 1
    assert result.best_node_count <= tree.num_nodes
    for text in result.trees.values():
        assert mp_cost(parse_newick(text), matrix) == result.mp_cost


def test_result_bookkeeping():
    matrix = evolved_matrix(6, 6, 4, seed=40)
    result = most_compact_pipeline(matrix)
    assert result.dedup_count == len(result.trees)
    assert result.raw_count >= result.dedup_count
    assert result.sources == len(result.cubic_record.incumbents)
    assert result.mean_contractions == result.contractions / result.sources
    assert result.explored_states >= result.dedup_count