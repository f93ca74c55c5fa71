"""Counting recurrences and exhaustive search behavior."""

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parsicompact import (
    CharacterMatrix,
    closed_form_estimate,
    count_cubic,
    count_mixed,
    count_total_mixed,
    enumerate_cubic,
    enumerate_mixed,
    evolved_matrix,
    mp_cost,
    order_species,
    parse_newick,
    random_matrix,
    score_unrooted,
)

TOTALS = [1, 1, 4, 32, 396, 6692, 143816]


def test_count_base_cases():
    assert count_mixed(1, 0) == 1
    assert count_mixed(1, 1) == 0
    assert count_mixed(2, 0) == 1
    assert count_mixed(2, 1) == 0
    assert count_mixed(3, -1) == 0
    assert count_mixed(5, 4) == 0


def test_count_totals_small():
    for n, want in enumerate(TOTALS, start=1):
        assert count_total_mixed(n) == want


def test_count_rows_sum_to_totals():
    for n in range(2, 12):
        assert sum(count_mixed(n, m) for m in range(n - 1)) == count_total_mixed(n)


def test_cubic_double_factorial():
    want = 1
    for n in range(3, 12):
        assert count_cubic(n) == want
        want *= 2 * (n + 1) - 5


def test_closed_form_tracks_exact_counts():
    ratios = [closed_form_estimate(n) / count_total_mixed(n) for n in range(4, 13)]
    assert all(0.5 < r < 1.0 for r in ratios)
    assert ratios == sorted(ratios)
    with pytest.raises(ValueError):
        closed_form_estimate(1)


def flat_matrix(n):
    """All-identical data: every topology costs zero, nothing can prune."""
    return CharacterMatrix.from_rows([(f"S{i}", "A") for i in range(1, n + 1)])


@pytest.mark.parametrize("n", range(2, 7))
def test_unpruned_mixed_enumeration_matches_counts(n):
    record = enumerate_mixed(flat_matrix(n), no_prune=True, dedup=True)
    assert record.generated == count_total_mixed(n)
    assert record.duplicates == 0
    assert len(record.incumbents) == count_total_mixed(n)


@pytest.mark.parametrize("n", range(4, 8))
def test_unpruned_cubic_enumeration_matches_counts(n):
    record = enumerate_cubic(flat_matrix(n), no_prune=True)
    assert record.generated == count_cubic(n)
    assert len(record.incumbents) == count_cubic(n)


def test_tiny_instances():
    one = enumerate_mixed(flat_matrix(1))
    assert one.incumbent_cost == 0 and len(one.incumbents) == 1
    m2 = random_matrix(2, 3, 2, seed=0)
    two = enumerate_mixed(m2)
    assert len(two.incumbents) == 1
    only = next(iter(two.incumbents.values()))
    assert two.incumbent_cost == mp_cost(only, m2)


@settings(max_examples=12, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_pruning_preserves_the_optimum_set(seed):
    rng = random.Random(seed)
    n = rng.randint(3, 5)
    matrix = random_matrix(n, rng.randint(1, 4), rng.randint(2, 4),
                           seed=rng.randrange(1 << 30))
    pruned = enumerate_mixed(matrix)
    full = enumerate_mixed(matrix, no_prune=True)
    assert pruned.incumbent_cost == full.incumbent_cost
    assert set(pruned.incumbents) == set(full.incumbents)
    assert pruned.visited <= full.visited


def test_incumbents_all_have_optimal_cost_and_valid_shape():
    matrix = evolved_matrix(6, 6, 4, seed=9)
    record = enumerate_mixed(matrix)
    assert record.incumbents
    for key, tree in record.incumbents.items():
        tree.validate()
        assert tree.canonical_key() == key
        assert sorted(tree.species_names()) == sorted(matrix.names)
        assert mp_cost(tree, matrix) == record.incumbent_cost
    best = min(t.num_nodes for t in record.incumbents.values())
    assert {t.num_nodes for t in record.most_compact.values()} == {best}
    assert set(record.most_compact) <= set(record.incumbents)


def test_cubic_incumbents_are_cubic():
    matrix = random_matrix(6, 5, 4, seed=3)
    record = enumerate_cubic(matrix)
    for tree in record.incumbents.values():
        assert all(tree.degree(u) in (1, 3) for u in tree.iter_nodes())
        leaves = [u for u in tree.iter_nodes() if tree.degree(u) == 1]
        assert sorted(tree.label[u] for u in leaves) == sorted(matrix.names)
        assert all(tree.label[u] is None for u in tree.iter_nodes()
                   if tree.degree(u) == 3)


def test_mixed_optimum_never_worse_than_cubic():
    for seed in range(5):
        matrix = random_matrix(5, 4, 3, seed=seed)
        cubic = enumerate_cubic(matrix)
        mixed = enumerate_mixed(matrix)
        assert mixed.incumbent_cost == cubic.incumbent_cost
        assert set(cubic.incumbents) <= set(mixed.incumbents)


def test_threads_match_serial():
    matrix = evolved_matrix(6, 5, 4, seed=12)
    for runner in (enumerate_mixed, enumerate_cubic):
        serial = runner(matrix, threads=1)
        parallel = runner(matrix, threads=2)
        assert serial.incumbent_cost == parallel.incumbent_cost
        assert set(serial.incumbents) == set(parallel.incumbents)
        assert set(serial.most_compact) == set(parallel.most_compact)
    # Without pruning every complete tree is reached in both modes, so the
    # generation count is partition-independent.
    serial = enumerate_mixed(flat_matrix(5), no_prune=True)
    parallel = enumerate_mixed(flat_matrix(5), no_prune=True, threads=3)
    assert serial.generated == parallel.generated == count_total_mixed(5)


def test_order_modes_agree_on_results():
    matrix = evolved_matrix(6, 5, 4, seed=2)
    a = enumerate_mixed(matrix, order="input")
    b = enumerate_mixed(matrix, order="diverse")
    assert a.incumbent_cost == b.incumbent_cost
    assert set(a.incumbents) == set(b.incumbents)


def test_order_species_diverse():
    rows = [("a", "AAAA"), ("b", "AAAT"), ("c", "TTTT"), ("d", "ATTT")]
    matrix = CharacterMatrix.from_rows(rows)
    order = order_species(matrix, "diverse")
    assert set(order) == {"a", "b", "c", "d"}
    assert {order[0], order[1]} == {"a", "c"}  # the max-hamming pair
    assert order_species(matrix, "input") == list(matrix.names)
    with pytest.raises(Exception):
        order_species(matrix, "bogus")


def test_progress_callback_fires():
    # The callback gets the live record, so capture the counter value.
    hits = []
    enumerate_mixed(flat_matrix(4), no_prune=True,
                    on_progress=lambda r: hits.append(r.visited),
                    progress_interval=10)
    assert hits and all(v % 10 == 0 for v in hits)


def test_counters_are_consistent():
    matrix = random_matrix(5, 4, 3, seed=8)
    record = enumerate_mixed(matrix)
    assert record.visited >= record.generated
    assert record.pruned <= record.visited
    assert record.duplicates == 0
    assert record.min_nodes == min(t.num_nodes for t in record.most_compact.values())
