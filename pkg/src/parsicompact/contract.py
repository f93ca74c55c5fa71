"""Edge contraction: cubic MP-trees down to the most compact mixed MP-trees.

An edge is contractible exactly when every character's root sets at its
two endpoints intersect (min-cost 0) and it does not join two labelled
nodes.  Contracting such an edge preserves the MP-cost and removes one
node; the merged node's root set is the per-character intersection of
the endpoints' root sets.

Contractibility is not preserved under reordering (an edge can stop or
start being zero-min-cost after another contraction), so the search
branches over every currently contractible edge at every step.  States
are memoized by canonical key: each distinct intermediate tree is
expanded once and the number of contraction orders reaching each result
is recovered afterwards by path counting over the resulting DAG.

After a contraction the remaining nodes' root sets are refreshed with a
two-pass rescore rooted at the merged node (linear in tree size, the
same bound the update traversal is supposed to meet).  A per-node local
update rule using only the old root sets is not sound: a state can stay
optimal at a node through a different parent state than the one that
justified it before, so only the merged node's set (the intersection)
is carried over directly.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .charmatrix import CharacterMatrix
from .enumeration import SearchRecord, enumerate_cubic
from .errors import IllegalContractionError, ParsicompactError
from .parsimony import Scorer
from .tree import CanonicalKey, MixedTree


@dataclass
class ContractionState:
    """A tree mid-contraction, with current root sets and candidate edges."""

    tree: MixedTree
    vv: list[int]
    zero_edges: list[tuple[int, int]]
    applied: int
    mp_cost: int
    scorer: Scorer

    @classmethod
    def from_tree(cls, tree: MixedTree, matrix: CharacterMatrix) -> "ContractionState":
        scorer = Scorer(matrix)
        res = scorer.score(tree)
        vv = [0] * len(tree.adj)
        for u, ns in res.node_sets.items():
            vv[u] = ns.vv
        state = cls(tree, vv, [], 0, res.mp_cost, scorer)
        state.zero_edges = zero_min_cost_edges(state)
        return state


def zero_min_cost_edges(state: ContractionState) -> list[tuple[int, int]]:
    """Edges whose endpoint root sets intersect in every character.

    Label-label edges are excluded: contracting one would discard a
    species, so they are never candidates.
    """
    sc = state.scorer
    tree = state.tree
    vv = state.vv
    label = tree.label
    fold = sc._fold
    m = sc.m
    out = []
    for u, v in tree.iter_edges():
        if label[u] is not None and label[v] is not None:
            continue
        if fold(vv[u] & vv[v]).bit_count() == m:
            out.append((u, v))
    return out


def contract_and_update(
    state: ContractionState, edge: tuple[int, int], oracle_check: bool = False
) -> ContractionState:
    """Contract a zero-min-cost edge and refresh every root set.

    The merged node's root set equals the intersection of the endpoints'
    root sets; the rest are recomputed by a rescore rooted at the merged
    node.  With ``oracle_check`` the refreshed sets are compared against
    an independent rescore from a different root (they must agree
    set-for-set, and the cost must be unchanged).
    """
    u, v = edge
    sc = state.scorer
    tree = state.tree
    if tree.label[u] is not None and tree.label[v] is not None:
        raise IllegalContractionError(f"edge ({u}, {v}) joins two labelled nodes")
    md = sc.m - sc._fold(state.vv[u] & state.vv[v]).bit_count()
    if md:
        raise IllegalContractionError(f"edge ({u}, {v}) has min-cost {md}, not 0")
    meet = state.vv[u] & state.vv[v]
    t2 = tree.copy()
    w = t2.contract_edge(u, v)
    res = sc.score(t2, root=w)
    vv2 = [0] * len(t2.adj)
    for x, ns in res.node_sets.items():
        vv2[x] = ns.vv
    if vv2[w] != meet:
        raise ParsicompactError(
            "merged-node root set differs from the endpoint intersection"
        )
    if res.mp_cost != state.mp_cost:
        raise ParsicompactError(
            f"zero-min-cost contraction changed cost {state.mp_cost} -> {res.mp_cost}"
        )
    if oracle_check:
        _shadow_check(t2, w, vv2, state.mp_cost, sc)
    new = ContractionState(t2, vv2, [], state.applied + 1, state.mp_cost, sc)
    new.zero_edges = zero_min_cost_edges(new)
    return new


def _shadow_check(tree, w, vv, want_cost, scorer):
    root = next((x for x in tree.iter_nodes() if x != w), w)
    res = scorer.score(tree, root=root)
    if res.mp_cost != want_cost:
        raise ParsicompactError(
            f"shadow rescore cost {res.mp_cost} != maintained cost {want_cost}"
        )
    for x, ns in res.node_sets.items():
        if ns.vv != vv[x]:
            raise ParsicompactError(
                f"maintained root set at node {x} differs from full rescore"
            )


@dataclass
class CompactResultSet:
    """Most compact trees found, plus bookkeeping of the exploration.

    trees maps canonical key -> canonical Newick text of each
    minimum-node-count tree.  raw_count is the number of contraction
    orders (summed over all start trees) that arrive at those trees;
    len(trees) is the dedup count.
    """

    best_node_count: int | None
    trees: dict[CanonicalKey, str]
    explored_states: int
    mp_cost: int | None = None
    raw_count: int = 0
    contractions: int = 0
    sources: int = 0
    cubic_record: SearchRecord | None = None

    @property
    def dedup_count(self) -> int:
        return len(self.trees)

    @property
    def mean_contractions(self) -> float:
        return self.contractions / self.sources if self.sources else 0.0


class CompactSearcher:
    """DFS over contraction orders with a canonical-key memo shared
    across start trees (distinct cubic MP-trees can contract into the
    same intermediate state)."""

    def __init__(self, matrix: CharacterMatrix, memo: bool = True, oracle_check: bool = False):
        self.matrix = matrix
        self.memo = memo
        self.oracle_check = oracle_check
        self.index: dict[CanonicalKey, int] = {}
        self.keys: list[CanonicalKey] = []
        self.children: list[list[int]] = []
        self.node_count: list[int] = []
        self.terminal: list[bool] = []
        self.newick: list[str | None] = []
        self.source_ids: list[int] = []
        self.contractions = 0
        self._raw_hits: Counter = Counter()

    def _intern(self, key: CanonicalKey, state: ContractionState):
        sid = self.index.get(key)
        if sid is not None:
            return sid, False
        sid = len(self.keys)
        self.index[key] = sid
        self.keys.append(key)
        self.children.append([])
        self.node_count.append(state.tree.num_nodes)
        term = not state.zero_edges
        self.terminal.append(term)
        self.newick.append(state.tree.write_newick() if term else None)
        return sid, True

    def add_source(self, tree: MixedTree) -> int:
        state = ContractionState.from_tree(tree, self.matrix)
        sid, fresh = self._intern(state.tree.canonical_key(), state)
        self.source_ids.append(sid)
        if fresh or not self.memo:
            self._expand(state, sid)
        return state.mp_cost

    def _expand(self, state: ContractionState, sid: int):
        if not state.zero_edges:
            if not self.memo:
                self._raw_hits[sid] += 1
            return
        for edge in state.zero_edges:
            child = contract_and_update(state, edge, self.oracle_check)
            self.contractions += 1
            cid, fresh = self._intern(child.tree.canonical_key(), child)
            if self.memo:
                self.children[sid].append(cid)
                if fresh:
                    self._expand(child, cid)
            else:
                self._expand(child, cid)

    def finalize(self) -> CompactResultSet:
        total = len(self.keys)
        if self.memo:
            arrivals = [0] * total
            for s in self.source_ids:
                arrivals[s] += 1
            for sid in sorted(range(total), key=lambda i: -self.node_count[i]):
                a = arrivals[sid]
                if a:
                    for c in self.children[sid]:
                        arrivals[c] += a
        else:
            arrivals = [self._raw_hits.get(i, 0) for i in range(total)]
        terminals = [i for i in range(total) if self.terminal[i]]
        best = min((self.node_count[i] for i in terminals), default=None)
        trees = {}
        raw = 0
        for i in terminals:
            if self.node_count[i] == best:
                trees[self.keys[i]] = self.newick[i]
                raw += arrivals[i]
        return CompactResultSet(
            best_node_count=best,
            trees=trees,
            explored_states=total,
            raw_count=raw,
            contractions=self.contractions,
            sources=len(self.source_ids),
        )


def compact_search(
    tree: MixedTree,
    matrix: CharacterMatrix,
    *,
    no_memo: bool = False,
    oracle_check: bool = False,
) -> CompactResultSet:
    """All minimum-node-count trees reachable from one tree by
    cost-preserving contractions, over every contraction order."""
    searcher = CompactSearcher(matrix, memo=not no_memo, oracle_check=oracle_check)
    cost = searcher.add_source(tree)
    out = searcher.finalize()
    out.mp_cost = cost
    return out


def most_compact_pipeline(
    matrix: CharacterMatrix,
    *,
    order: str = "input",
    threads: int = 1,
    no_memo: bool = False,
    oracle_check: bool = False,
    on_progress=None,
    progress_interval: int = 100_000,
) -> CompactResultSet:
    """Full search: enumerate cubic MP-trees, contract each in all orders,
    keep the globally most compact results."""
    cubic = enumerate_cubic(
        matrix,
        order=order,
        threads=threads,
        on_progress=on_progress,
        progress_interval=progress_interval,
    )
    searcher = CompactSearcher(matrix, memo=not no_memo, oracle_check=oracle_check)
    for key in sorted(cubic.incumbents, key=lambda k: k.data):
        searcher.add_source(cubic.incumbents[key])
    out = searcher.finalize()
    out.mp_cost = cubic.incumbent_cost
    out.cubic_record = cubic
    return out
