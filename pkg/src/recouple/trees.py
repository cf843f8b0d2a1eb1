"""Binary coupling trees and their admissible labellings.

A tree is stored as a nested tuple of leaf numbers, e.g. ``((1, 2), 3)``.
Leaves are numbered 1..N in planar (left-to-right) order.  Vertices are
addressed by their post-order index; the root is the last vertex.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Protocol, Sequence

from .exact import DomainError
from .su2 import SU2


class IrrepSystem(Protocol):
    def label(self, x): ...

    def series(self, a, b) -> list[tuple[object, int]]: ...

    def dim(self, a) -> int: ...


# ---------------------------------------------------------------------------
# trees


def _renumber(shape, offset: int):
    if isinstance(shape, int):
        return shape + offset
    return (_renumber(shape[0], offset), _renumber(shape[1], offset))


def _relabel(shape, counter: list[int]):
    if isinstance(shape, int):
        counter[0] += 1
        return counter[0]
    return (_relabel(shape[0], counter), _relabel(shape[1], counter))


class CouplingTree:
    """Immutable rooted full binary tree with planar leaf order."""

    __slots__ = ("shape", "__dict__")

    def __init__(self, shape):
        if not isinstance(shape, (int, tuple)):
            raise DomainError("tree shape must be nested pairs of ints")
        leaves: list[int] = []

        def walk(s):
            if isinstance(s, int):
                leaves.append(s)
            elif isinstance(s, tuple) and len(s) == 2:
                walk(s[0])
                walk(s[1])
            else:
                raise DomainError(f"malformed tree node {s!r}")

        walk(shape)
        if leaves != list(range(1, len(leaves) + 1)):
            raise DomainError("leaf numbers must be 1..N in planar order")
        self.shape = shape

    @classmethod
    def from_shape(cls, shape) -> "CouplingTree":
        """Build from any nested pairs, renumbering leaves 1..N left to right."""
        return cls(_relabel(shape, [0]))

    # -- structure ---------------------------------------------------------
    @cached_property
    def _layout(self):
        children: list[tuple[int, int] | None] = []
        leaf_vertices: list[int] = []
        subshapes: list = []

        def walk(s) -> int:
            if isinstance(s, int):
                children.append(None)
                subshapes.append(s)
                leaf_vertices.append(len(children) - 1)
                return len(children) - 1
            left = walk(s[0])
            right = walk(s[1])
            children.append((left, right))
            subshapes.append(s)
            return len(children) - 1

        walk(self.shape)
        parent = [None] * len(children)
        for v, ch in enumerate(children):
            if ch:
                parent[ch[0]] = v
                parent[ch[1]] = v
        return tuple(children), tuple(leaf_vertices), tuple(parent), tuple(subshapes)

    @property
    def children(self) -> tuple:
        """Per post-order vertex: ``(left, right)`` or ``None`` for leaves."""
        return self._layout[0]

    @property
    def leaves(self) -> tuple[int, ...]:
        """Vertex indices of the leaves in planar order."""
        return self._layout[1]

    @property
    def parent(self) -> tuple:
        return self._layout[2]

    @cached_property
    def nodes(self) -> tuple[int, ...]:
        """Vertex indices of internal vertices in post-order (root last)."""
        return tuple(v for v, c in enumerate(self.children) if c is not None)

    @property
    def root(self) -> int:
        return len(self.children) - 1

    @property
    def n_leaves(self) -> int:
        return len(self.leaves)

    @property
    def n_vertices(self) -> int:
        return len(self.children)

    def leaf_span(self, v: int) -> tuple[int, ...]:
        """Planar positions (0-based) of the leaves below vertex v."""
        return self._spans[v]

    @cached_property
    def _spans(self):
        pos = {v: i for i, v in enumerate(self.leaves)}
        spans: list[tuple[int, ...]] = []
        for v, c in enumerate(self.children):
            spans.append((pos[v],) if c is None else spans[c[0]] + spans[c[1]])
        return tuple(spans)

    def subtree(self, v: int) -> "CouplingTree":
        return CouplingTree.from_shape(self._layout[3][v])

    # -- identity ----------------------------------------------------------
    def __eq__(self, other) -> bool:
        return isinstance(other, CouplingTree) and self.shape == other.shape

    def __hash__(self) -> int:
        return hash(("CouplingTree", self.shape))

    def __str__(self) -> str:
        return print_tree(self)

    def __repr__(self) -> str:
        return f"CouplingTree({print_tree(self)!r})"

    def __reduce__(self):
        return (CouplingTree, (self.shape,))


_TOKEN = re.compile(r"\s*(?:(\()|(\))|(\d+))")


def parse_tree(text: str) -> CouplingTree:
    """Parse ``tree := leafnum | "(" tree " " tree ")"``."""
    toks: list[tuple[str, int]] = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise DomainError(f"unexpected character in tree text at position {pos}: {text!r}")
        tok = m.group(1) or m.group(2) or m.group(3)
        toks.append((tok, m.start() + m.group(0).index(tok)))
        pos = m.end()
    idx = [0]

    def take():
        if idx[0] >= len(toks):
            raise DomainError(f"unbalanced tree text, input ends at position {len(text)}: {text!r}")
        t = toks[idx[0]]
        idx[0] += 1
        return t

    def tree():
        t, at = take()
        if t == "(":
            left = tree()
            right = tree()
            t2, at2 = take()
            if t2 != ")":
                raise DomainError(f"expected ')' at position {at2} in {text!r}")
            return (left, right)
        if t == ")":
            raise DomainError(f"unexpected ')' at position {at} in {text!r}")
        return int(t)

    shape = tree()
    if idx[0] != len(toks):
        raise DomainError(f"trailing tokens at position {toks[idx[0]][1]} in {text!r}")
    leaves = []

    def collect(s):
        if isinstance(s, int):
            leaves.append(s)
        else:
            collect(s[0])
            collect(s[1])

    collect(shape)
    if sorted(leaves) != list(range(1, len(leaves) + 1)):
        raise DomainError("leaf numbers must be exactly 1..N without duplicates")
    return CouplingTree(shape)


def print_tree(t: CouplingTree) -> str:
    def fmt(s):
        return str(s) if isinstance(s, int) else f"({fmt(s[0])} {fmt(s[1])})"

    return fmt(t.shape)


def standard_tree(n: int) -> CouplingTree:
    """The caterpillar (((1 2) 3) ... n)."""
    if n < 1:
        raise DomainError("a tree needs at least one leaf")
    shape = 1
    for k in range(2, n + 1):
        shape = (shape, k)
    return CouplingTree(shape)


def join(t1: CouplingTree, t2: CouplingTree) -> CouplingTree:
    """T1 . T2: a new root whose left subtree is T1 and right subtree T2."""
    return CouplingTree((t1.shape, _renumber(t2.shape, t1.n_leaves)))


def compose(t1: CouplingTree, t2: CouplingTree) -> CouplingTree:
    """T1 * T2: every leaf of T1 replaced by a copy of T2."""
    n2 = t2.n_leaves

    def sub(s):
        if isinstance(s, int):
            return _renumber(t2.shape, (s - 1) * n2)
        return (sub(s[0]), sub(s[1]))

    return CouplingTree(sub(t1.shape))


def leaf_duplicate(t: CouplingTree) -> CouplingTree:
    """T^v: every leaf replaced by a cherry."""
    return compose(t, CouplingTree((1, 2)))


def leaf_duplicate_map(t: CouplingTree) -> dict[int, int]:
    """Bijection from vertices of T onto internal vertices of T^v.

    Leaf y of T goes to the cherry vertex that replaces it.
    """
    d = leaf_duplicate(t)
    out: dict[int, int] = {}
    # post-order of T^v visits each cherry as (leaf, leaf, cherry)
    k = 0
    for v, c in enumerate(t.children):
        k += 3 if c is None else 1
        out[v] = k - 1
    assert all(d.children[w] is not None for w in out.values())
    return out


def interleave(n: int) -> tuple[int, ...]:
    """sigma(i) = 2i - 1 for i <= n and sigma(n + i) = 2i (1-based)."""
    return tuple(2 * i - 1 for i in range(1, n + 1)) + tuple(2 * i for i in range(1, n + 1))


def all_trees(n: int) -> list[CouplingTree]:
    """All full binary trees with n leaves, deterministic order."""
    def shapes(k):
        if k == 1:
            return [0]
        out = []
        for a in range(1, k):
            for left in shapes(a):
                for right in shapes(k - a):
                    out.append((left, right))
        return out

    return [CouplingTree.from_shape(s) for s in shapes(n)]


# ---------------------------------------------------------------------------
# labellings


@dataclass(frozen=True, eq=False)
class Labelling:
    """Irrep labels per vertex (post-order) plus multiplicity counters.

    ``counters[v]`` selects the copy of ``labels[v]`` inside the tensor
    product of its children; it is 1 on leaves and in multiplicity-free
    systems.
    """

    labels: tuple
    counters: tuple = ()

    def __post_init__(self):
        if not self.counters:
            object.__setattr__(self, "counters", (1,) * len(self.labels))
        if len(self.counters) != len(self.labels):
            raise DomainError("labels and counters differ in length")
        object.__setattr__(self, "_hash", hash((self.labels, self.counters)))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Labelling) or self._hash != other._hash:
            return False
        return self.labels == other.labels and self.counters == other.counters

    def __len__(self) -> int:
        return len(self.labels)

    def __getitem__(self, v):
        return self.labels[v]

    @property
    def root(self):
        return self.labels[-1]

    def leaf_labels(self, tree: CouplingTree) -> tuple:
        return tuple(self.labels[v] for v in tree.leaves)

    def node_label(self, v: int):
        return (self.labels[v], self.counters[v])

    def __str__(self) -> str:
        def f(v):
            s = str(self.labels[v])
            return s if self.counters[v] == 1 else f"{s}#{self.counters[v]}"

        return "[" + ", ".join(f(v) for v in range(len(self.labels))) + "]"


def labelling_from_nodes(tree: CouplingTree, leaves: Sequence, nodes: Sequence,
                         counters: Sequence | None = None,
                         system: IrrepSystem = SU2) -> Labelling:
    """Assemble a labelling from leaf labels and internal labels (post-order)."""
    if len(leaves) != tree.n_leaves or len(nodes) != len(tree.nodes):
        raise DomainError("wrong number of labels for this tree")
    if counters is not None and len(counters) != len(nodes):
        raise DomainError("one counter per internal vertex expected")
    labels: list = [None] * tree.n_vertices
    cnt = [1] * tree.n_vertices
    for v, x in zip(tree.leaves, leaves):
        labels[v] = system.label(x)
    for i, (v, x) in enumerate(zip(tree.nodes, nodes)):
        labels[v] = system.label(x)
        if counters is not None:
            cnt[v] = int(counters[i])
    lab = Labelling(tuple(labels), tuple(cnt))
    if not is_admissible(tree, lab, system):
        raise DomainError(f"labelling {lab} is not admissible on {tree}")
    return lab


def is_admissible(tree: CouplingTree, lab: Labelling, system: IrrepSystem = SU2) -> bool:
    if len(lab) != tree.n_vertices:
        return False
    for v, c in enumerate(tree.children):
        if c is None:
            if lab.counters[v] != 1:
                return False
            continue
        mult = dict(system.series(lab.labels[c[0]], lab.labels[c[1]])).get(lab.labels[v], 0)
        if not 1 <= lab.counters[v] <= mult:
            return False
    return True


def enumerate_labellings(tree: CouplingTree, leaves: Sequence, root=None,
                         system: IrrepSystem = SU2, max_label=None) -> list[Labelling]:
    """All admissible labellings with the given leaf labels.

    Order: lexicographic over the post-order vertex sequence, labels in the
    order produced by ``system.series`` (ascending), counters ascending.
    ``root`` restricts the root label; ``max_label`` bounds every internal
    label (a predicate or a value compared with ``<=``).
    """
    if len(leaves) != tree.n_leaves:
        raise DomainError(f"tree has {tree.n_leaves} leaves, got {len(leaves)} labels")
    leaf_lab = [system.label(x) for x in leaves]
    root = None if root is None else system.label(root)
    if callable(max_label):
        ok = max_label
    elif max_label is None:
        def ok(_):
            return True
    else:
        bound = system.label(max_label)

        def ok(x):
            return x <= bound

    labels: list = [None] * tree.n_vertices
    counters = [1] * tree.n_vertices
    for v, x in zip(tree.leaves, leaf_lab):
        labels[v] = x
    nodes = tree.nodes
    children = tree.children
    rootv = tree.root
    out: list[Labelling] = []

    def rec(i: int):
        if i == len(nodes):
            out.append(Labelling(tuple(labels), tuple(counters)))
            return
        v = nodes[i]
        a, b = children[v]
        for lab, mult in system.series(labels[a], labels[b]):
            if v == rootv and root is not None and lab != root:
                continue
            if v != rootv and not ok(lab):
                continue
            labels[v] = lab
            for k in range(1, mult + 1):
                counters[v] = k
                rec(i + 1)
        labels[v] = None
        counters[v] = 1

    if not nodes:
        if root is None or leaf_lab[0] == root:
            out.append(Labelling(tuple(labels), tuple(counters)))
        return out
    rec(0)
    return out


def multiplicity(leaves: Sequence, root, system: IrrepSystem = SU2) -> int:
    """Multiplicity of ``root`` in the tensor product of ``leaves``."""
    return len(enumerate_labellings(standard_tree(len(leaves)), leaves, root, system))
