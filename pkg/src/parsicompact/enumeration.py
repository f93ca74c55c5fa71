"""Counting and exhaustive generation of candidate tree topologies.

Two searches share the branch-and-bound skeleton:

* cubic search -- every leaf-labelled tree with internal degrees exactly 3,
  built by inserting each next species into every edge of every partial
  topology (2k-3 choices at k leaves);
* mixed search -- every mixed-labelled tree, built by the four growth
  moves (subdivide an edge with an unlabelled junction plus a new leaf;
  subdivide with the new species itself; hang the new species off any
  node; write the new species onto an unlabelled node).

Adding a species can never lower the MP-cost, so a partial tree's cost is
an admissible bound and strictly-worse partial trees are pruned.  Equal
cost always expands: the searches must surface every co-optimal tree.

T(n, m) counts mixed trees with n labelled and m unlabelled nodes; the
growth moves produce each mixed tree exactly once, which the tests
cross-check by comparing raw generation counts against the recurrence.
"""

from __future__ import annotations

import math
import multiprocessing
from dataclasses import dataclass, field

from .charmatrix import CharacterMatrix
from .errors import EmptyInputError
from .parsimony import Scorer
from .tree import CanonicalKey, MixedTree


class TreeCountTable:
    """Memoized big-integer table of mixed-tree counts T(n, m)."""

    def __init__(self):
        self._memo = {(1, 0): 1}

    def count(self, n: int, m: int) -> int:
        if n < 1:
            raise ValueError(f"need n >= 1, got {n}")
        if n == 1:
            return 1 if m == 0 else 0
        if m < 0 or m > n - 2:
            return 0
        key = (n, m)
        got = self._memo.get(key)
        if got is None:
            a = m + n - 3 if m > 0 else 0
            b = 2 * n + 2 * m - 3
            c = m + 1 if n > m + 2 else 0
            got = (
                a * self.count(n - 1, m - 1)
                + b * self.count(n - 1, m)
                + c * self.count(n - 1, m + 1)
            )
            self._memo[key] = got
        return got


_TABLE = TreeCountTable()


def count_mixed(n: int, m: int) -> int:
    """Exact number of mixed trees with n labelled, m unlabelled nodes."""
    return _TABLE.count(n, m)


def count_total_mixed(n: int) -> int:
    """Exact number of mixed trees on n species (all unlabelled counts)."""
    if n == 1:
        return 1
    return sum(_TABLE.count(n, m) for m in range(0, n - 1))


def count_cubic(n: int) -> int:
    """(2n-5)!! leaf-labelled cubic topologies on n >= 3 species."""
    if n <= 3:
        return 1
    out = 1
    for k in range(3, 2 * n - 4, 2):
        out *= k
    return out


def closed_form_estimate(n: int) -> float:
    """Analytic approximation of count_total_mixed for n >= 2."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    try:
        return n ** (n - 2) / (
            math.sqrt(2) * math.exp(n / 2) * (2 - math.exp(0.5)) ** (n - 1.5)
        )
    except OverflowError:
        return math.inf


@dataclass
class SearchRecord:
    """Outcome of one enumeration run.

    incumbents holds every minimum-cost tree found (canonical key ->
    private tree copy); for the mixed search, most_compact narrows that
    to the minimum node count.  visited counts scored expansions
    (partial and complete), generated counts complete trees reached,
    pruned counts subtrees cut by the cost bound, duplicates counts
    canonical-key repeats skipped when dedup is on (always 0 in
    practice: the growth moves are duplicate-free).
    """

    incumbent_cost: int | None = None
    incumbents: dict[CanonicalKey, MixedTree] = field(default_factory=dict)
    visited: int = 0
    pruned: int = 0
    generated: int = 0
    duplicates: int = 0
    most_compact: dict[CanonicalKey, MixedTree] = field(default_factory=dict)

    def _offer(self, cost: int, tree: MixedTree):
        if self.incumbent_cost is None or cost < self.incumbent_cost:
            self.incumbent_cost = cost
            self.incumbents = {tree.canonical_key(): tree.copy()}
        elif cost == self.incumbent_cost:
            self.incumbents.setdefault(tree.canonical_key(), tree.copy())

    def _merge(self, other: "SearchRecord"):
        self.visited += other.visited
        self.pruned += other.pruned
        self.generated += other.generated
        self.duplicates += other.duplicates
        if other.incumbent_cost is None:
            return
        if self.incumbent_cost is None or other.incumbent_cost < self.incumbent_cost:
            self.incumbent_cost = other.incumbent_cost
            self.incumbents = dict(other.incumbents)
        elif other.incumbent_cost == self.incumbent_cost:
            for key, t in other.incumbents.items():
                self.incumbents.setdefault(key, t)

    def _finish_mixed(self):
        if not self.incumbents:
            return
        fewest = min(t.num_nodes for t in self.incumbents.values())
        self.most_compact = {
            k: t for k, t in self.incumbents.items() if t.num_nodes == fewest
        }

    @property
    def min_nodes(self) -> int | None:
        if not self.most_compact and not self.incumbents:
            return None
        pool = self.most_compact or self.incumbents
        return min(t.num_nodes for t in pool.values())


def lower_bound(partial_cost: int) -> int:
    """Admissible bound: a partial tree's cost survives every completion."""
    return partial_cost


def order_species(matrix: CharacterMatrix, mode: str = "input") -> list[str]:
    """Species insertion order: matrix order, or greedy max-min distance.

    The diverse order seeds the search with far-apart species so the
    incumbent cost rises early and the bound bites sooner.
    """
    names = list(matrix.names)
    if mode == "input":
        return names
    if mode != "diverse":
        raise ValueError(f"unknown order {mode!r} (expected 'input' or 'diverse')")
    rows = [seq for _, seq in matrix.rows()]
    n = len(names)
    if n <= 2:
        return names

    def dist(i, j):
        return sum(1 for a, b in zip(rows[i], rows[j]) if a != b)

    best = max(
        ((i, j) for i in range(n) for j in range(i + 1, n)),
        key=lambda p: (dist(*p), -p[0], -p[1]),
    )
    chosen = [best[0], best[1]]
    rest = [i for i in range(n) if i not in chosen]
    while rest:
        nxt = max(rest, key=lambda i: (min(dist(i, j) for j in chosen), -i))
        chosen.append(nxt)
        rest.remove(nxt)
    return [names[i] for i in chosen]


class _Search:
    """Shared DFS machinery for the cubic and mixed enumerations."""

    def __init__(self, matrix, order, kind, no_prune, dedup, on_progress, interval):
        self.matrix = matrix
        self.order = order
        self.kind = kind
        self.no_prune = no_prune
        self.dedup = dedup and kind == "mixed"
        self.on_progress = on_progress
        self.interval = interval
        self.scorer = Scorer(matrix)
        self.record = SearchRecord()
        self.seen: set[CanonicalKey] = set()

    # -- move generation ---------------------------------------------------

    def moves(self, tree: MixedTree):
        if self.kind == "cubic":
            return [("r1", e) for e in tree.iter_edges()]
        out = []
        for e in tree.iter_edges():
            out.append(("r1", e))
            out.append(("r2", e))
        for u in tree.iter_nodes():
            out.append(("r3", u))
            if tree.label[u] is None:
                out.append(("r4", u))
        return out

    @staticmethod
    def apply(tree, move, name):
        kind, site = move
        if kind == "r1":
            return tree.grow_rule_1(site, name)
        if kind == "r2":
            return tree.grow_rule_2(site, name)
        if kind == "r3":
            return tree.grow_rule_3(site, name)
        return tree.grow_rule_4(site, name)

    def start_tree(self) -> tuple[MixedTree, int]:
        order = self.order
        if self.kind == "mixed":
            return MixedTree.single(order[0]), 1
        if len(order) == 1:
            return MixedTree.single(order[0]), 1
        t = MixedTree.single(order[0])
        t.grow_rule_3(t.species_node(order[0]), order[1])
        if len(order) == 2:
            return t, 2
        center = t.add_node()
        t.remove_edge(t.species_node(order[0]), t.species_node(order[1]))
        t.add_edge(t.species_node(order[0]), center)
        t.add_edge(t.species_node(order[1]), center)
        leaf = t.add_node(order[2])
        t.add_edge(center, leaf)
        return t, 3

    # -- DFS -----------------------------------------------------------------

    def run(self, tree: MixedTree, k: int):
        rec = self.record
        cost = self.scorer.cost(tree)
        rec.visited += 1
        if k == len(self.order):
            rec.generated += 1
            rec._offer(cost, tree)
            return
        if (
            not self.no_prune
            and rec.incumbent_cost is not None
            and cost > rec.incumbent_cost
        ):
            rec.pruned += 1
            return
        self._expand(tree, k)

    def _expand(self, tree: MixedTree, k: int):
        rec = self.record
        name = self.order[k]
        scorer_cost = self.scorer.cost
        complete = k + 1 == len(self.order)
        for move in self.moves(tree):
            token = self.apply(tree, move, name)
            rec.visited += 1
            if self.dedup:
                key = tree.canonical_key()
                if key in self.seen:
                    rec.duplicates += 1
                    tree.undo_growth(token)
                    continue
                self.seen.add(key)
            cost = scorer_cost(tree)
            if complete:
                rec.generated += 1
                rec._offer(cost, tree)
            elif (
                self.no_prune
                or rec.incumbent_cost is None
                or cost <= rec.incumbent_cost
            ):
                self._expand(tree, k + 1)
            else:
                rec.pruned += 1
            tree.undo_growth(token)
            if self.on_progress and rec.visited % self.interval < 1:
                self.on_progress(rec)

    def frontier(self, minimum: int):
        """Breadth-first partial trees for parallel partitioning."""
        t, k = self.start_tree()
        level = [(t, k)]
        while len(level) < minimum and level and level[0][1] < len(self.order):
            nxt = []
            for tree, depth in level:
                name = self.order[depth]
                for move in self.moves(tree):
                    token = self.apply(tree, move, name)
                    nxt.append((tree.copy(), depth + 1))
                    tree.undo_growth(token)
            level = nxt
        return level


def _worker(args):
    matrix, order, kind, no_prune, dedup, jobs = args
    search = _Search(matrix, order, kind, no_prune, dedup, None, 1 << 30)
    for tree, k in jobs:
        search.run(tree, k)
    return search.record


def _enumerate(matrix, kind, order, no_prune, dedup, threads, on_progress, interval):
    if matrix.n < 1:
        raise EmptyInputError("enumeration needs at least one species")
    names = order_species(matrix, order)
    if threads <= 1:
        search = _Search(matrix, names, kind, no_prune, dedup, on_progress, interval)
        t, k = search.start_tree()
        search.run(t, k)
        record = search.record
    else:
        seed = _Search(matrix, names, kind, no_prune, dedup, None, interval)
        jobs = seed.frontier(4 * threads)
        record = SearchRecord()
        chunks = [jobs[i::threads] for i in range(threads)]
        chunks = [c for c in chunks if c]
        args = [(matrix, names, kind, no_prune, dedup, c) for c in chunks]
        with multiprocessing.Pool(len(chunks)) as pool:
            for part in pool.map(_worker, args):
                record._merge(part)
    if kind == "mixed":
        record._finish_mixed()
    else:
        record.most_compact = dict(record.incumbents)
    return record


def enumerate_cubic(
    matrix: CharacterMatrix,
    *,
    order: str = "input",
    no_prune: bool = False,
    threads: int = 1,
    on_progress=None,
    progress_interval: int = 100_000,
) -> SearchRecord:
    """Branch-and-bound over all cubic leaf-labelled topologies.

    Returns a SearchRecord whose incumbents are exactly the cubic
    MP-trees.  With no_prune the full (2n-5)!! space is generated.
    """
    return _enumerate(
        matrix, "cubic", order, no_prune, False, threads, on_progress, progress_interval
    )


def enumerate_mixed(
    matrix: CharacterMatrix,
    *,
    order: str = "input",
    no_prune: bool = False,
    dedup: bool = False,
    threads: int = 1,
    on_progress=None,
    progress_interval: int = 100_000,
) -> SearchRecord:
    """Branch-and-bound over every mixed-labelled tree.

    incumbents = all minimum-cost mixed trees; most_compact = the subset
    with the fewest nodes.  dedup tracks canonical keys of every partial
    tree and skips repeats; the growth moves provably generate each tree
    once, so this is a verification mode, not a requirement for
    correctness (tests assert duplicates == 0).
    """
    return _enumerate(
        matrix, "mixed", order, no_prune, dedup, threads, on_progress, progress_interval
    )
