"""Mixed-labelled multifurcating unrooted trees.

Nodes live in an index-addressed arena with a free list, so the
enumeration code can apply a growth rule, recurse, and undo it in O(1)
without copying the tree.  A node optionally carries a species label;
every leaf must be labelled, internal nodes may be.  "Internal" always
means degree >= 2.

Canonical form and Newick output share one serialization: root the tree
at its center (lexicographically smaller code of the <= 2 centers) and
sort child subtree codes recursively, so equal keys <=> label-preserving
isomorphism regardless of node numbering or display rooting.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    AlreadyLabelledError,
    DuplicateLabelError,
    LabelCollisionError,
    NewickParseError,
    NotInternalError,
    SplitUnderflowError,
    TreeStructureError,
)


@dataclass(frozen=True)
class CanonicalKey:
    """Value object identifying a tree up to labelled isomorphism."""

    data: bytes

    def as_text(self) -> str:
        return self.data.decode()

    def __repr__(self):
        return f"CanonicalKey({self.data.decode()!r})"


class MixedTree:
    """Unrooted tree with optional species labels on any node."""

    __slots__ = ("adj", "label", "alive", "_free", "_where", "n_labelled", "n_unlabelled")

    def __init__(self):
        self.adj: list[list[int]] = []
        self.label: list[str | None] = []
        self.alive: list[bool] = []
        self._free: list[int] = []
        self._where: dict[str, int] = {}
        self.n_labelled = 0
        self.n_unlabelled = 0

    @classmethod
    def single(cls, name: str) -> "MixedTree":
        t = cls()
        t.add_node(name)
        return t

    # -- arena primitives --------------------------------------------------

    def add_node(self, name: str | None = None) -> int:
        if name is not None and name in self._where:
            raise DuplicateLabelError(f"species {name!r} already labels a node")
        if self._free:
            u = self._free.pop()
            self.alive[u] = True
            self.adj[u].clear()
            self.label[u] = name
        else:
            u = len(self.adj)
            self.adj.append([])
            self.label.append(name)
            self.alive.append(True)
        if name is None:
            self.n_unlabelled += 1
        else:
            self._where[name] = u
            self.n_labelled += 1
        return u

    def _free_node(self, u: int):
        if self.adj[u]:
            raise TreeStructureError(f"cannot free node {u} with live edges")
        name = self.label[u]
        if name is None:
            self.n_unlabelled -= 1
        else:
            del self._where[name]
            self.n_labelled -= 1
            self.label[u] = None
        self.alive[u] = False
        self._free.append(u)

    def add_edge(self, u: int, v: int):
        self.adj[u].append(v)
        self.adj[v].append(u)

    def remove_edge(self, u: int, v: int):
        self.adj[u].remove(v)
        self.adj[v].remove(u)

    def _require_edge(self, u: int, v: int):
        if not (self.alive[u] and self.alive[v] and v in self.adj[u]):
            raise TreeStructureError(f"no edge ({u}, {v})")

    def _set_label(self, u: int, name: str):
        if name in self._where:
            raise DuplicateLabelError(f"species {name!r} already labels a node")
        if self.label[u] is not None:
            raise AlreadyLabelledError(f"node {u} already labelled {self.label[u]!r}")
        self.label[u] = name
        self._where[name] = u
        self.n_labelled += 1
        self.n_unlabelled -= 1

    def _clear_label(self, u: int):
        name = self.label[u]
        self.label[u] = None
        del self._where[name]
        self.n_labelled -= 1
        self.n_unlabelled += 1

    # -- views ---------------------------------------------------------------

    def degree(self, u: int) -> int:
        return len(self.adj[u])

    def neighbors(self, u: int) -> list[int]:
        return self.adj[u]

    def iter_nodes(self):
        for u in range(len(self.adj)):
            if self.alive[u]:
                yield u

    def iter_edges(self):
        for u in self.iter_nodes():
            for v in self.adj[u]:
                if u < v:
                    yield (u, v)

    def leaves(self):
        return [u for u in self.iter_nodes() if len(self.adj[u]) == 1]

    def species_node(self, name: str) -> int:
        try:
            return self._where[name]
        except KeyError:
            raise TreeStructureError(f"species {name!r} not in tree") from None

    def species_names(self):
        return set(self._where)

    @property
    def num_nodes(self) -> int:
        return self.n_labelled + self.n_unlabelled

    @property
    def num_edges(self) -> int:
        return sum(len(self.adj[u]) for u in self.iter_nodes()) // 2

    def __len__(self):
        return self.num_nodes

    def __repr__(self):
        return (
            f"MixedTree(nodes={self.num_nodes}, labelled={self.n_labelled}, "
            f"unlabelled={self.n_unlabelled})"
        )

    def copy(self) -> "MixedTree":
        t = MixedTree.__new__(MixedTree)
        t.adj = [list(nbrs) for nbrs in self.adj]
        t.label = list(self.label)
        t.alive = list(self.alive)
        t._free = list(self._free)
        t._where = dict(self._where)
        t.n_labelled = self.n_labelled
        t.n_unlabelled = self.n_unlabelled
        return t

    def validate(self):
        """Assert structural invariants; raises TreeStructureError on breakage."""
        nodes = list(self.iter_nodes())
        if not nodes:
            raise TreeStructureError("empty tree")
        if self.num_edges != len(nodes) - 1:
            raise TreeStructureError(
                f"{self.num_edges} edges for {len(nodes)} nodes (need nodes-1)"
            )
        seen = {nodes[0]}
        stack = [nodes[0]]
        while stack:
            u = stack.pop()
            for v in self.adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        if len(seen) != len(nodes):
            raise TreeStructureError("tree is disconnected")
        for u in nodes:
            if len(self.adj[u]) <= 1 and self.label[u] is None and len(nodes) > 1:
                raise TreeStructureError(f"unlabelled leaf {u}")
        labels = [self.label[u] for u in nodes if self.label[u] is not None]
        if len(labels) != len(set(labels)):
            raise TreeStructureError("duplicate species labels")
        if len(labels) != self.n_labelled:
            raise TreeStructureError("label counter out of sync")

    # -- growth rules (with O(1) undo) ----------------------------------------

    def grow_rule_1(self, edge: tuple[int, int], name: str):
        """Subdivide ``edge`` with a new unlabelled node; hang leaf ``name`` on it.

        Returns an undo token for :meth:`undo_growth`.
        """
        u, v = edge
        self._require_edge(u, v)
        if name in self._where:
            raise DuplicateLabelError(f"species {name!r} already labels a node")
        w = self.add_node()
        leaf = self.add_node(name)
        self.remove_edge(u, v)
        self.add_edge(u, w)
        self.add_edge(w, v)
        self.add_edge(w, leaf)
        return ("r1", u, v, w, leaf)

    def grow_rule_2(self, edge: tuple[int, int], name: str):
        """Subdivide ``edge`` with a new degree-2 node labelled ``name``."""
        u, v = edge
        self._require_edge(u, v)
        w = self.add_node(name)
        self.remove_edge(u, v)
        self.add_edge(u, w)
        self.add_edge(w, v)
        return ("r2", u, v, w)

    def grow_rule_3(self, node: int, name: str):
        """Attach a new leaf labelled ``name`` to ``node`` (any degree)."""
        if not self.alive[node]:
            raise TreeStructureError(f"no node {node}")
        leaf = self.add_node(name)
        self.add_edge(node, leaf)
        return ("r3", node, leaf)

    def grow_rule_4(self, node: int, name: str):
        """Put label ``name`` on an existing unlabelled node."""
        if not self.alive[node]:
            raise TreeStructureError(f"no node {node}")
        self._set_label(node, name)
        return ("r4", node, name)

    def undo_growth(self, token):
        kind = token[0]
        if kind == "r1":
            _, u, v, w, leaf = token
            self.remove_edge(w, leaf)
            self.remove_edge(u, w)
            self.remove_edge(w, v)
            self.add_edge(u, v)
            self._free_node(leaf)
            self._free_node(w)
        elif kind == "r2":
            _, u, v, w = token
            self.remove_edge(u, w)
            self.remove_edge(w, v)
            self.add_edge(u, v)
            self._free_node(w)
        elif kind == "r3":
            _, node, leaf = token
            self.remove_edge(node, leaf)
            self._free_node(leaf)
        elif kind == "r4":
            _, node, _name = token
            self._clear_label(node)
        else:
            raise ValueError(f"unknown growth token {token!r}")

    # -- structural edits ------------------------------------------------------

    def split_node(self, node: int, moved_neighbors: tuple[int, int]) -> int:
        """Pull two neighbors of a high-degree node onto a new unlabelled node.

        Reduces degree(node) by 1; the new node has degree 3.  Returns the
        new node's id.
        """
        a, b = moved_neighbors
        if self.degree(node) < 4:
            raise SplitUnderflowError(
                f"node {node} has degree {self.degree(node)}, need >= 4 to split"
            )
        if a == b or a not in self.adj[node] or b not in self.adj[node]:
            raise TreeStructureError("moved_neighbors must be two distinct neighbors")
        w = self.add_node()
        self.remove_edge(node, a)
        self.remove_edge(node, b)
        self.add_edge(w, a)
        self.add_edge(w, b)
        self.add_edge(node, w)
        return w

    def contract_edge(self, u: int, v: int) -> int:
        """Merge edge (u, v) into a single node; returns the merged node's id.

        The merged node inherits the species label if exactly one endpoint
        had one.  Contracting an edge between two labelled nodes would have
        to discard a species, so it is refused.
        """
        self._require_edge(u, v)
        if self.label[u] is not None and self.label[v] is not None:
            raise LabelCollisionError(
                f"both endpoints labelled ({self.label[u]!r}, {self.label[v]!r})"
            )
        name = self.label[u] if self.label[u] is not None else self.label[v]
        if self.label[u] is not None:
            self._clear_label(u)
        if self.label[v] is not None:
            self._clear_label(v)
        self.remove_edge(u, v)
        w = self.add_node()
        for x in (u, v):
            for y in list(self.adj[x]):
                self.remove_edge(x, y)
                self.add_edge(w, y)
            self._free_node(x)
        if name is not None:
            self._set_label(w, name)
        return w

    def move_internal_label_to_leaf(self, node: int) -> int:
        """Demote an internal label to a fresh leaf hung off a spliced node.

        One incident edge (node, x) becomes node - k - x with k unlabelled,
        and the label moves to a new leaf under k.  Adds 2 nodes.  Returns
        the new leaf id.
        """
        if self.degree(node) < 2:
            raise NotInternalError(f"node {node} is a leaf")
        if self.label[node] is None:
            raise TreeStructureError(f"node {node} carries no label")
        name = self.label[node]
        self._clear_label(node)
        x = min(self.adj[node])
        k = self.add_node()
        self.remove_edge(node, x)
        self.add_edge(node, k)
        self.add_edge(k, x)
        leaf = self.add_node(name)
        self.add_edge(k, leaf)
        return leaf

    def suppress_degree2_unlabelled(self):
        """Remove unlabelled degree-2 (and dangling unlabelled) nodes in place."""
        again = True
        while again:
            again = False
            for u in list(self.iter_nodes()):
                if self.label[u] is not None or not self.alive[u]:
                    continue
                d = len(self.adj[u])
                if d == 2:
                    a, b = self.adj[u]
                    self.remove_edge(u, a)
                    self.remove_edge(u, b)
                    self.add_edge(a, b)
                    self._free_node(u)
                    again = True
                elif d <= 1 and self.num_nodes > 1:
                    for y in list(self.adj[u]):
                        self.remove_edge(u, y)
                    self._free_node(u)
                    again = True
        return self

    # -- canonical form and Newick I/O -----------------------------------------

    def _centers(self) -> list[int]:
        nodes = list(self.iter_nodes())
        if len(nodes) <= 2:
            return nodes
        deg = {u: len(self.adj[u]) for u in nodes}
        layer = [u for u in nodes if deg[u] == 1]
        remaining = len(nodes)
        while remaining > 2:
            remaining -= len(layer)
            nxt = []
            for u in layer:
                deg[u] = 0
                for v in self.adj[u]:
                    if deg[v] > 1:
                        deg[v] -= 1
                        if deg[v] == 1:
                            nxt.append(v)
            layer = nxt
        return layer

    def _node_atom(self, u: int) -> str:
        name = self.label[u]
        return "" if name is None else _quote_name(name)

    def _rooted_code(self, root: int) -> str:
        def code(v: int, parent: int | None) -> str:
            kids = [code(c, v) for c in self.adj[v] if c != parent]
            if not kids:
                return self._node_atom(v)
            kids.sort()
            return "(" + ",".join(kids) + ")" + self._node_atom(v)

        return code(root, None)

    def canonical_key(self) -> CanonicalKey:
        """Serialization equal for two trees iff they are label-isomorphic."""
        best = min(self._rooted_code(c) for c in self._centers())
        return CanonicalKey((best + ";").encode())

    def write_newick(self, root: int | None = None) -> str:
        """Newick text (internal labels as node names, no branch lengths).

        Without an explicit display root this emits the canonical
        serialization, so output is identical for isomorphic trees.
        """
        if root is None:
            return self.canonical_key().as_text()
        if not self.alive[root]:
            raise TreeStructureError(f"no node {root}")
        return self._rooted_code(root) + ";"


def _quote_name(name: str) -> str:
    if name and not any(ch in "(),:;'[] \t\n" for ch in name):
        return name
    return "'" + name.replace("'", "''") + "'"


def parse_newick(text: str) -> MixedTree:
    """Parse Newick into a MixedTree, keeping the structure exactly as written.

    Internal node names become species labels.  Branch lengths are not
    part of this tree model and are rejected.  A rooted display (top-level
    unlabelled degree-2 node) is kept; call suppress_degree2_unlabelled()
    to unroot.
    """
    tree = MixedTree()
    i = 0
    n = len(text)

    def error(msg, pos):
        raise NewickParseError(msg, pos)

    def skip_ws():
        nonlocal i
        while i < n and text[i] in " \t\r\n":
            i += 1

    def parse_name() -> str | None:
        nonlocal i
        skip_ws()
        if i < n and text[i] == "'":
            start = i
            i += 1
            out = []
            while i < n:
                if text[i] == "'":
                    if i + 1 < n and text[i + 1] == "'":
                        out.append("'")
                        i += 2
                    else:
                        i += 1
                        return "".join(out)
                else:
                    out.append(text[i])
                    i += 1
            error("unterminated quoted name", start)
        start = i
        while i < n and text[i] not in "(),:;[] \t\r\n'":
            i += 1
        return text[start:i] if i > start else None

    def parse_subtree() -> int:
        nonlocal i
        skip_ws()
        if i >= n:
            error("unexpected end of input", i)
        if text[i] == "(":
            open_pos = i
            i += 1
            children = [parse_subtree()]
            skip_ws()
            while i < n and text[i] == ",":
                i += 1
                children.append(parse_subtree())
                skip_ws()
            if i >= n or text[i] != ")":
                error("expected ',' or ')'", i)
            i += 1
            name = parse_name()
            skip_ws()
            if i < n and text[i] == ":":
                error("branch lengths are not supported", i)
            try:
                node = tree.add_node(name)
            except DuplicateLabelError:
                error(f"species {name!r} appears twice", open_pos)
            for c in children:
                tree.add_edge(node, c)
            if name is None and len(children) == 0:
                error("unlabelled leaf", open_pos)
            return node
        name_pos = i
        name = parse_name()
        if name is None:
            error(f"expected a node, found {text[i]!r}", i)
        skip_ws()
        if i < n and text[i] == ":":
            error("branch lengths are not supported", i)
        try:
            return tree.add_node(name)
        except DuplicateLabelError:
            error(f"species {name!r} appears twice", name_pos)

    skip_ws()
    root = parse_subtree()
    skip_ws()
    if i >= n or text[i] != ";":
        error("expected ';'", i)
    i += 1
    skip_ws()
    if i != n:
        error("trailing characters after ';'", i)
    if tree.label[root] is None and tree.degree(root) == 0:
        error("tree has no labelled nodes", 0)
    for u in tree.iter_nodes():
        if tree.degree(u) <= 1 and tree.label[u] is None and tree.num_nodes > 1:
            error("tree contains an unlabelled leaf", 0)
    return tree


def write_newick(tree: MixedTree, root: int | None = None) -> str:
    return tree.write_newick(root)


class RootedView:
    """Orientation of a MixedTree away from a chosen root.

    Precomputes parent pointers, child lists, and a postorder node
    sequence; scoring walks these instead of re-deriving direction.
    """

    __slots__ = ("tree", "root", "parent", "children", "postorder")

    def __init__(self, tree: MixedTree, root: int):
        if not tree.alive[root]:
            raise TreeStructureError(f"no node {root}")
        self.tree = tree
        self.root = root
        parent: dict[int, int | None] = {root: None}
        children: dict[int, list[int]] = {}
        post: list[int] = []
        stack = [(root, False)]
        while stack:
            u, done = stack.pop()
            if done:
                post.append(u)
                continue
            stack.append((u, True))
            kids = [v for v in tree.adj[u] if v != parent[u]]
            children[u] = kids
            for v in kids:
                parent[v] = u
                stack.append((v, False))
        self.parent = parent
        self.children = children
        self.postorder = post

    def preorder(self):
        return reversed(self.postorder)
