"""Small-parsimony scoring for mixed trees.

Fitch handles rooted full binary leaf-labelled trees; the general scorer
handles multifurcating trees with species labels on arbitrary nodes
(fixed-state internal nodes) and computes, per node, the upper set VU
(states reaching the subtree minimum), the lower set VL (states exactly
one mutation worse), and after a top-down pass the root set VV (states
appearing in at least one globally optimal fit).

All per-character state sets for one node are packed into a single
Python int, one power-of-two-wide flag group per character, so every
set operation and the scoring recurrences run word-parallel across the
whole character matrix.  The key identity: with num(s) = number of
children whose VU contains s, an unlabelled node costs
sum(children costs) + (#children - max num), a node fixed to state x
costs sum(children costs) + #children whose VU misses x, and forcing any
state s costs exactly (max num - num(s)) above the node minimum.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .charmatrix import CharacterMatrix
from .errors import (
    ArityMismatchError,
    EmptyTreeError,
    MissingSpeciesError,
    NotBinaryError,
    OracleTooLargeError,
    TreeStructureError,
    UnlabelledLeafError,
)
from .tree import MixedTree, RootedView


def pack_sets(matrix: CharacterMatrix, per_char: list[set[int]]) -> int:
    """Pack one state-index set per character into the flag-group int."""
    if len(per_char) != matrix.m:
        raise ArityMismatchError(f"{len(per_char)} sets for {matrix.m} characters")
    g = matrix.group_width
    packed = 0
    for c, states in enumerate(per_char):
        for s in states:
            if not 0 <= s < matrix.alphabets[c].size:
                raise ValueError(f"state {s} outside alphabet {c}")
            packed |= 1 << (c * g + s)
    return packed


def unpack_sets(matrix: CharacterMatrix, packed: int) -> tuple[frozenset[int], ...]:
    g = matrix.group_width
    fill = (1 << g) - 1
    out = []
    for c in range(matrix.m):
        grp = (packed >> (c * g)) & fill
        out.append(frozenset(s for s in range(matrix.alphabets[c].size) if (grp >> s) & 1))
    return tuple(out)


@dataclass(frozen=True)
class StateSet:
    """Set of state indices for one character at one node."""

    character_index: int
    members: frozenset[int]


class NodeSets:
    """VU/VL/VV flag sets for one node, packed across all characters."""

    __slots__ = ("matrix", "vu", "vl", "vv")

    def __init__(self, matrix: CharacterMatrix, vu: int, vl: int, vv: int | None = None):
        self.matrix = matrix
        self.vu = vu
        self.vl = vl
        self.vv = vv

    @classmethod
    def from_sets(cls, matrix, vu, vl=None, vv=None):
        return cls(
            matrix,
            pack_sets(matrix, vu),
            pack_sets(matrix, vl) if vl is not None else 0,
            pack_sets(matrix, vv) if vv is not None else None,
        )

    def _tuple(self, packed) -> tuple[StateSet, ...] | None:
        if packed is None:
            return None
        return tuple(
            StateSet(c, members)
            for c, members in enumerate(unpack_sets(self.matrix, packed))
        )

    @property
    def VU(self):
        return self._tuple(self.vu)

    @property
    def VL(self):
        return self._tuple(self.vl)

    @property
    def VV(self):
        return self._tuple(self.vv)

    def vv_symbols(self, c: int) -> set[str]:
        """Root-set states of character c, as symbols."""
        if self.vv is None:
            raise TreeStructureError("VV not computed (run the top-down pass)")
        alpha = self.matrix.alphabets[c]
        return {alpha.symbols[s] for s in unpack_sets(self.matrix, self.vv)[c]}

    def __repr__(self):
        return f"NodeSets(vu={self.VU}, vl={self.VL}, vv={self.VV})"


@dataclass
class FitAssignment:
    """One complete optimal assignment: node id -> per-character states."""

    states: dict[int, tuple[int, ...]]
    total_cost: int


class ScoreResult:
    """MP-cost plus per-node sets; produced by the scoring entry points."""

    def __init__(self, mp_cost, root, node_sets, _arrays=None):
        self.mp_cost = mp_cost
        self.root = root
        self.node_sets = node_sets
        self._arrays = _arrays

    def extract_fit(self) -> FitAssignment:
        """One deterministic optimal fit (lowest state index on ties)."""
        if self._arrays is None:
            raise TreeStructureError("fit extraction needs a full scoring pass")
        matrix, tree, pre, parent, vu, vl = self._arrays
        g = matrix.group_width
        fill = (1 << g) - 1
        m = matrix.m
        chosen: dict[int, tuple[int, ...]] = {}
        for u in pre:
            p = parent[u]
            out = []
            for c in range(m):
                uc = (vu[u] >> (c * g)) & fill
                lc = (vl[u] >> (c * g)) & fill
                if p < 0:
                    pick = _low_state(uc)
                else:
                    s = chosen[p][c]
                    if (uc >> s) & 1:
                        pick = s
                    elif (lc >> s) & 1:
                        pick = min(s, _low_state(uc))
                    else:
                        pick = _low_state(uc)
                out.append(pick)
            chosen[u] = tuple(out)
        return FitAssignment(chosen, self.mp_cost)

    def __repr__(self):
        return f"ScoreResult(mp_cost={self.mp_cost}, root={self.root})"


def _low_state(bits: int) -> int:
    return (bits & -bits).bit_length() - 1


class Scorer:
    """Word-parallel scoring engine bound to one character matrix.

    Reusable across many trees; enumeration keeps a single instance and
    calls :meth:`cost` in its inner loop.
    """

    __slots__ = ("matrix", "g", "low", "alpha", "fill", "shifts", "m", "vmask")

    def __init__(self, matrix: CharacterMatrix):
        self.matrix = matrix
        g = matrix.group_width
        self.g = g
        self.low = matrix.group_low
        self.alpha = matrix.alpha_all
        self.fill = (1 << g) - 1
        self.shifts = [1 << k for k in range((g - 1).bit_length())]
        self.m = matrix.m
        self.vmask = matrix.value_mask

    def _fold(self, x: int) -> int:
        for s in self.shifts:
            x |= x >> s
        return x & self.low

    # -- traversal ---------------------------------------------------------

    def _preorder(self, tree: MixedTree, root: int):
        adj = tree.adj
        parent = [-2] * len(adj)
        parent[root] = -1
        pre = [root]
        stack = [root]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if parent[v] == -2:
                    parent[v] = u
                    pre.append(v)
                    stack.append(v)
        return pre, parent

    @staticmethod
    def pick_root(tree: MixedTree) -> int:
        """Lowest-id unlabelled node, else lowest-id node."""
        root = None
        for u in tree.iter_nodes():
            if tree.label[u] is None:
                return u
            if root is None:
                root = u
        if root is None:
            raise EmptyTreeError("cannot score an empty tree")
        return root

    # -- bottom-up pass ------------------------------------------------------

    def _bottom_up(self, tree, root, need_vl):
        """Return (cost, vu, vl, pre, parent); vl is zeros if not requested."""
        pre, parent = self._preorder(tree, root)
        size = len(tree.adj)
        vu = [0] * size
        vl = [0] * size
        adj = tree.adj
        label = tree.label
        vmask = self.vmask
        fold = self._fold
        alpha = self.alpha
        fill = self.fill
        m = self.m
        cost = 0
        for u in reversed(pre):
            name = label[u]
            par = parent[u]
            kids = [v for v in adj[u] if v != par]
            if name is not None:
                x = vmask.get(name)
                if x is None:
                    raise MissingSpeciesError(f"species {name!r} not in the matrix")
                vu[u] = x
                for c in kids:
                    cost += m - fold(vu[c] & x).bit_count()
            elif not kids:
                raise UnlabelledLeafError(f"unlabelled leaf {u} cannot be scored")
            elif len(kids) == 2:
                a = vu[kids[0]]
                b = vu[kids[1]]
                inter = a & b
                ne = fold(inter)
                cost += m - ne.bit_count()
                both = ne * fill
                union = a | b
                vu[u] = (inter & both) | (union & ~both)
                if need_vl:
                    vl[u] = ((a ^ b) & both) | (alpha & ~union & ~both)
            elif len(kids) == 1:
                c0 = vu[kids[0]]
                vu[u] = c0
                if need_vl:
                    vl[u] = alpha & ~c0
            else:
                u_vu, u_vl, dcost = self._count_many([vu[c] for c in kids], need_vl)
                vu[u] = u_vu
                vl[u] = u_vl
                cost += dcost
        return cost, vu, vl, pre, parent

    def _count_many(self, masks, need_vl):
        """VU/VL/cost for a node with 3+ children, via bit-sliced counters."""
        slices: list[int] = []
        for x in masks:
            carry = x
            j = 0
            while carry:
                if j == len(slices):
                    slices.append(0)
                t = slices[j] & carry
                slices[j] ^= carry
                carry = t
                j += 1
        d = len(masks)
        ge = [0] * (d + 1)
        ge[0] = self.alpha
        for t in range(1, d + 1):
            ge[t] = self._ge(slices, t)
        fold = self._fold
        fill = self.fill
        got = 0
        vu = 0
        vl = 0
        total_k = 0
        for t in range(d, 0, -1):
            new = fold(ge[t]) & ~got
            if new:
                got |= new
                e = new * fill
                vu |= ge[t] & e
                if need_vl:
                    vl |= ge[t - 1] & ~ge[t] & e
                total_k += t * new.bit_count()
        return vu, vl, d * self.m - total_k

    def _ge(self, slices, t):
        """Positions whose bit-sliced counter value is >= t (borrow ripple)."""
        alpha = self.alpha
        b = 0
        for j in range(max(len(slices), t.bit_length())):
            c = slices[j] if j < len(slices) else 0
            if (t >> j) & 1:
                b = (~c & alpha) | b
            else:
                b &= ~c
        return alpha & ~b

    # -- top-down pass ---------------------------------------------------------

    def _top_down(self, vu, vl, pre, parent):
        vv = [0] * len(vu)
        fill = self.fill
        fold = self._fold
        for u in pre:
            p = parent[u]
            if p < 0:
                vv[u] = vu[u]
                continue
            vvp = vv[p]
            ns = fold(vvp & ~vu[u]) * fill
            vv[u] = ((vu[u] | (vvp & vl[u])) & ns) | (vvp & ~ns)
        return vv

    # -- entry points --------------------------------------------------------------

    def cost(self, tree: MixedTree, root: int | None = None) -> int:
        """MP-cost only; the branch-and-bound inner loop."""
        if root is None:
            root = self.pick_root(tree)
        return self._bottom_up(tree, root, False)[0]

    def score(self, tree: MixedTree, root: int | None = None) -> ScoreResult:
        """Full pass: cost plus VU/VL/VV for every node."""
        if root is None:
            root = self.pick_root(tree)
        cost, vu, vl, pre, parent = self._bottom_up(tree, root, True)
        vv = self._top_down(vu, vl, pre, parent)
        sets = {u: NodeSets(self.matrix, vu[u], vl[u], vv[u]) for u in pre}
        return ScoreResult(cost, root, sets, (self.matrix, tree, pre, parent, vu, vl))


# -- module-level operations ----------------------------------------------------


def fitch_score(view: RootedView, matrix: CharacterMatrix) -> ScoreResult:
    """Intersection-else-union scoring of a rooted full binary tree.

    Internal nodes must be unlabelled with exactly two children.  The
    returned node sets carry the classic Fitch set as VU (no VL/VV).
    """
    tree = view.tree
    sc = Scorer(matrix)
    fold = sc._fold
    fill = sc.fill
    m = sc.m
    vu: dict[int, int] = {}
    cost = 0
    for u in view.postorder:
        kids = view.children[u]
        name = tree.label[u]
        if not kids:
            if name is None:
                raise UnlabelledLeafError(f"unlabelled leaf {u}")
            x = matrix.value_mask.get(name)
            if x is None:
                raise MissingSpeciesError(f"species {name!r} not in the matrix")
            vu[u] = x
            continue
        if len(kids) != 2:
            raise NotBinaryError(f"node {u} has {len(kids)} children, need exactly 2")
        if name is not None:
            raise TreeStructureError(
                "this scorer handles leaf labels only; use the general scorer "
                "for trees with labelled internal nodes"
            )
        a, b = vu[kids[0]], vu[kids[1]]
        inter = a & b
        ne = fold(inter)
        cost += m - ne.bit_count()
        both = ne * fill
        vu[u] = (inter & both) | ((a | b) & ~both)
    sets = {u: NodeSets(matrix, vu[u], 0, None) for u in view.postorder}
    return ScoreResult(cost, view.root, sets)


def hartigan_bottom_up(view: RootedView, matrix: CharacterMatrix):
    """Bottom-up pass on an arbitrary rooted view.

    Returns (mp_cost, {node: NodeSets}) with VU/VL filled and VV unset.
    """
    if view.tree.num_nodes == 0:
        raise EmptyTreeError("cannot score an empty tree")
    sc = Scorer(matrix)
    cost, vu, vl, pre, _parent = sc._bottom_up(view.tree, view.root, True)
    return cost, {u: NodeSets(matrix, vu[u], vl[u]) for u in pre}


def hartigan_top_down(view: RootedView, bottom) -> dict[int, NodeSets]:
    """Top-down pass filling VV from a bottom-up result.

    ``bottom`` is the (cost, sets) pair or the sets dict itself.  Returns a
    new {node: NodeSets} with VV populated.
    """
    sets = bottom[1] if isinstance(bottom, tuple) else bottom
    matrix = next(iter(sets.values())).matrix
    sc = Scorer(matrix)
    size = len(view.tree.adj)
    vu = [0] * size
    vl = [0] * size
    for u, ns in sets.items():
        vu[u] = ns.vu
        vl[u] = ns.vl
    pre = list(view.preorder())
    parent = [-1] * size
    for u in pre:
        p = view.parent[u]
        parent[u] = -1 if p is None else p
    vv = sc._top_down(vu, vl, pre, parent)
    return {u: NodeSets(matrix, vu[u], vl[u], vv[u]) for u in sets}


def score_unrooted(tree: MixedTree, matrix: CharacterMatrix, root: int | None = None) -> ScoreResult:
    """Score an unrooted mixed tree; the result is root-independent.

    Roots at the lowest-id unlabelled node when one exists (else a
    labelled node) and runs both passes.
    """
    if tree.num_nodes == 0:
        raise EmptyTreeError("cannot score an empty tree")
    return Scorer(matrix).score(tree, root)


def score_mixed_constrained(tree: MixedTree, matrix: CharacterMatrix) -> ScoreResult:
    """Score with internal species labels held fixed (live phylogeny).

    Same engine as :func:`score_unrooted`; a labelled node contributes,
    per character, one mutation for each child subtree that cannot reach
    the node's state for free.
    """
    return score_unrooted(tree, matrix)


def mp_cost(tree: MixedTree, matrix: CharacterMatrix) -> int:
    """Cost-only convenience wrapper."""
    if tree.num_nodes == 0:
        raise EmptyTreeError("cannot score an empty tree")
    return Scorer(matrix).cost(tree)


def min_cost_edge(u_sets: NodeSets, v_sets: NodeSets) -> int:
    """Minimum mutations on an edge: one per character with disjoint VV."""
    mu, mv = u_sets.matrix, v_sets.matrix
    if mu.m != mv.m or mu.group_width != mv.group_width:
        raise ArityMismatchError(
            f"set tuples disagree: {mu.m}/{mu.group_width} vs {mv.m}/{mv.group_width}"
        )
    if u_sets.vv is None or v_sets.vv is None:
        raise TreeStructureError("min_cost_edge needs VV sets (run the top-down pass)")
    sc = Scorer(mu)
    return mu.m - sc._fold(u_sets.vv & v_sets.vv).bit_count()


class OracleResult:
    """Exhaustive per-character optimum over all unlabelled-node assignments."""

    def __init__(self, mp_cost, unlabelled, fixed, per_char_optima, matrix):
        self.mp_cost = mp_cost
        self.unlabelled = unlabelled
        self._fixed = fixed
        self._optima = per_char_optima
        self.matrix = matrix

    def fit_count(self) -> int:
        total = 1
        for opts in self._optima:
            total *= len(opts)
        return total

    def iter_fits(self, limit: int | None = None):
        """Yield optimal FitAssignments (cartesian product across characters)."""
        produced = 0
        for combo in product(*self._optima):
            states: dict[int, list[int]] = {u: [] for u in self._fixed}
            for u in self.unlabelled:
                states[u] = []
            for c, assign in enumerate(combo):
                for u, s in self._fixed.items():
                    states[u].append(s[c])
                for i, u in enumerate(self.unlabelled):
                    states[u].append(assign[i])
            yield FitAssignment({u: tuple(v) for u, v in states.items()}, self.mp_cost)
            produced += 1
            if limit is not None and produced >= limit:
                return

    def fits(self, limit: int | None = 10000) -> list[FitAssignment]:
        return list(self.iter_fits(limit))

    def vv_union(self) -> dict[int, tuple[frozenset[int], ...]]:
        """Per node, per character: union of states over all optimal fits."""
        out: dict[int, list[set[int]]] = {}
        for u, s in self._fixed.items():
            out[u] = [{s[c]} for c in range(self.matrix.m)]
        for u in self.unlabelled:
            out[u] = [set() for _ in range(self.matrix.m)]
        for c, opts in enumerate(self._optima):
            for assign in opts:
                for i, u in enumerate(self.unlabelled):
                    out[u][c].add(assign[i])
        return {u: tuple(frozenset(s) for s in sets) for u, sets in out.items()}


def brute_force_best_fit(
    tree: MixedTree, matrix: CharacterMatrix, cap: int = 2_000_000
) -> OracleResult:
    """Reference scorer: try every state assignment, character by character.

    Characters are independent, so the search is per character over the
    unlabelled nodes only; ``cap`` bounds the total number of candidate
    assignments across characters.
    """
    if tree.num_nodes == 0:
        raise EmptyTreeError("cannot score an empty tree")
    unlabelled = [u for u in tree.iter_nodes() if tree.label[u] is None]
    fixed = {}
    for u in tree.iter_nodes():
        name = tree.label[u]
        if name is not None:
            if name not in matrix.values:
                raise MissingSpeciesError(f"species {name!r} not in the matrix")
            fixed[u] = matrix.values[name]
    work = sum(a.size ** len(unlabelled) for a in matrix.alphabets)
    if work > cap:
        raise OracleTooLargeError(
            f"{work} candidate assignments exceed the oracle cap {cap}"
        )
    edges = list(tree.iter_edges())
    index = {u: i for i, u in enumerate(unlabelled)}
    total = 0
    optima = []
    for c, alpha in enumerate(matrix.alphabets):
        best = None
        opts: list[tuple[int, ...]] = []
        fixed_c = {u: v[c] for u, v in fixed.items()}
        for assign in product(range(alpha.size), repeat=len(unlabelled)):
            cost = 0
            for a, b in edges:
                sa = fixed_c[a] if a in fixed_c else assign[index[a]]
                sb = fixed_c[b] if b in fixed_c else assign[index[b]]
                if sa != sb:
                    cost += 1
            if best is None or cost < best:
                best = cost
                opts = [assign]
            elif cost == best:
                opts.append(assign)
        total += best
        optima.append(opts)
    return OracleResult(total, unlabelled, fixed, optima, matrix)
