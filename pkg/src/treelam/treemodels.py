"""Exactly computable length-function models of free group actions on trees.

All arithmetic is over exact rationals.  The common interface is
:class:`TreeModel`: translation length of a conjugacy class, displacement
of the marked basepoint, and a volume-style upper bound for the
backtracking constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Sequence, Tuple

from .automorphisms import Automorphism, AutomorphismError
from .words import Basis, CyclicWord, Word, WordError, cyclic_word, inverse_letters


class ModelError(ValueError):
    pass


class TreeModel:
    """Length-function interface shared by every model."""

    basis: Basis
    exact: bool = True
    model_id: str = "tree"

    def translation_length(self, w) -> Fraction:
        """Translation length of the conjugacy class of w."""
        raise NotImplementedError

    def displacement(self, w: Word) -> Fraction:
        """Distance d(P, wP) from the marked basepoint."""
        raise NotImplementedError

    def bbt_bound(self) -> Fraction:
        """Volume bound: sum of generator displacements."""
        return sum((self.displacement(Word(self.basis, (i + 1,)))
                    for i in range(self.basis.rank)), Fraction(0))

    def _cyclic(self, w) -> CyclicWord:
        if isinstance(w, CyclicWord):
            return w
        if isinstance(w, Word):
            if not w:
                raise ModelError("identity has no translation length here")
            return cyclic_word(w)
        raise ModelError(f"expected a word, got {type(w).__name__}")


def _parse_length(value) -> Fraction:
    if isinstance(value, Fraction):
        q = value
    elif isinstance(value, str):
        q = Fraction(value)
    elif isinstance(value, int):
        q = Fraction(value)
    elif isinstance(value, float):
        q = Fraction(value).limit_denominator(10**12)
    else:
        raise ModelError(f"bad edge length {value!r}")
    if q < 0:
        raise ModelError("edge lengths must be nonnegative")
    return q


# -- marked metric graphs ---------------------------------------------------


@dataclass(frozen=True)
class Edge:
    id: str
    src: str
    dst: str
    length: Fraction


@dataclass(frozen=True)
class MarkedMetricGraph(TreeModel):
    """Metric graph with a marking: one edge loop at the base per letter.

    Zero-length edges are allowed (at least one length must be positive);
    the corresponding subgraph is exactly the part of the tree collapsed
    by the induced distance-decreasing quotient.
    """

    basis: Basis
    vertices: Tuple[str, ...]
    edges: Tuple[Edge, ...]
    marking: Mapping[int, Tuple[int, ...]]  # letter -> signed edge path
    base: str
    exact: bool = True
    model_id: str = "marked-graph"

    def __post_init__(self):
        ids = [e.id for e in self.edges]
        if len(set(ids)) != len(ids):
            raise ModelError("duplicate edge ids")
        vset = set(self.vertices)
        for e in self.edges:
            if e.src not in vset or e.dst not in vset:
                raise ModelError(f"edge {e.id} has unknown endpoint")
        if self.base not in vset:
            raise ModelError("unknown base vertex")
        if all(e.length == 0 for e in self.edges):
            raise ModelError("degenerate tree: all edge lengths are zero")
        if len(self.edges) - len(self.vertices) + 1 != self.basis.rank:
            raise ModelError("graph rank does not match basis rank")
        for i in range(1, self.basis.rank + 1):
            path = self.marking.get(i)
            if path is None:
                raise ModelError(f"missing marking for letter {i}")
            self._check_loop(path)
        if not self._marking_generates():
            raise ModelError("marking loops do not generate the fundamental group")

    def _edge(self, t: int) -> Edge:
        return self.edges[abs(t) - 1]

    def _endpoints(self, t: int) -> Tuple[str, str]:
        e = self._edge(t)
        return (e.src, e.dst) if t > 0 else (e.dst, e.src)

    def _check_loop(self, path: Sequence[int]):
        at = self.base
        for t in path:
            s, d = self._endpoints(t)
            if s != at:
                raise ModelError("marking path is not a connected loop at base")
            at = d
        if at != self.base:
            raise ModelError("marking path does not return to base")

    # -- marking validation via folding ------------------------------------

    @cached_property
    def _petal_words(self) -> Tuple[Tuple[int, ...], ...]:
        """Marking loops rewritten over the petals of a spanning tree."""
        # spanning tree via BFS over undirected edges
        parent: Dict[str, Tuple[str, int]] = {self.base: (self.base, 0)}
        frontier = [self.base]
        adjacency: Dict[str, list] = {v: [] for v in self.vertices}
        for j, e in enumerate(self.edges, start=1):
            adjacency[e.src].append((e.dst, j))
            adjacency[e.dst].append((e.src, -j))
        tree_edges = set()
        while frontier:
            v = frontier.pop()
            for u, t in adjacency[v]:
                if u not in parent:
                    parent[u] = (v, t)
                    tree_edges.add(abs(t))
                    frontier.append(u)
        if len(parent) != len(self.vertices):
            raise ModelError("graph is not connected")
        petal = {}
        k = 0
        for j in range(1, len(self.edges) + 1):
            if j not in tree_edges:
                k += 1
                petal[j] = k
        words = []
        for i in range(1, self.basis.rank + 1):
            word = []
            for t in self.marking[i]:
                j = abs(t)
                if j in petal:
                    word.append(petal[j] if t > 0 else -petal[j])
            words.append(tuple(word))
        return tuple(words)

    def _marking_generates(self) -> bool:
        """Stallings folding: the loops generate iff the folded core graph
        is the rose on all petals.  Quadratic edge-list folding; the
        marking data is tiny."""
        words = self._petal_words
        npetals = len(self.edges) - len(self.vertices) + 1
        nodes = 1  # node 0 is the base
        arrows = []  # (u, petal_letter, v), stored for positive letters only
        for w in words:
            at = 0
            for i, x in enumerate(w):
                nxt = 0 if i == len(w) - 1 else nodes
                if nxt != 0:
                    nodes += 1
                if x > 0:
                    arrows.append((at, x, nxt))
                else:
                    arrows.append((nxt, -x, at))
                at = nxt

        parent = list(range(nodes))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        def union(a, b):
            a, b = find(a), find(b)
            if a != b:
                parent[max(a, b)] = min(a, b)

        changed = True
        while changed:
            changed = False
            fwd: Dict[Tuple[int, int], int] = {}
            bwd: Dict[Tuple[int, int], int] = {}
            for u, x, v in arrows:
                u, v = find(u), find(v)
                if (u, x) in fwd and fwd[(u, x)] != v:
                    union(fwd[(u, x)], v)
                    changed = True
                fwd[(u, x)] = find(v)
                if (v, x) in bwd and bwd[(v, x)] != u:
                    union(bwd[(v, x)], u)
                    changed = True
                bwd[(v, x)] = find(u)
        folded = {(find(u), x, find(v)) for u, x, v in arrows}
        # trim hair: iteratively drop degree-1 vertices other than the base
        while True:
            degree: Dict[int, int] = {}
            for u, x, v in folded:
                degree[u] = degree.get(u, 0) + 1
                degree[v] = degree.get(v, 0) + 1
            hair = {u for u, d in degree.items() if d == 1 and u != find(0)}
            if not hair:
                break
            folded = {a for a in folded if a[0] not in hair and a[2] not in hair}
        base = find(0)
        verts = {base}
        for u, x, v in folded:
            verts.update((u, v))
        if verts != {base}:
            return False
        loops = {x for _, x, _ in folded}
        return loops == set(range(1, npetals + 1))

    # -- length computations -------------------------------------------------

    def _word_path(self, letters: Sequence[int]) -> list:
        """Tightened edge path of the marking image of a word."""
        path: list = []
        for x in letters:
            seg = self.marking[x] if x > 0 else tuple(
                -t for t in reversed(self.marking[-x])
            )
            for t in seg:
                if path and path[-1] == -t:
                    path.pop()
                else:
                    path.append(t)
        return path

    def _positive_length(self, path: Iterable[int]) -> Fraction:
        return sum((self._edge(t).length for t in path), Fraction(0))

    def displacement(self, w: Word) -> Fraction:
        if w.basis != self.basis:
            raise ModelError("word over wrong basis")
        return self._positive_length(self._word_path(w.letters))

    def translation_length(self, w) -> Fraction:
        cw = self._cyclic(w)
        path = self._word_path(cw.letters)
        while len(path) >= 2 and path[0] == -path[-1]:
            path = path[1:-1]
        return self._positive_length(path)

    def zero_edges(self) -> FrozenSet[str]:
        """The zero-length subgraph (the collapsed, dense-orbit-free part)."""
        return frozenset(e.id for e in self.edges if e.length == 0)

    def contract(self, edge_ids: Iterable[str]) -> "MarkedMetricGraph":
        """Set the selected edge lengths to zero (distance-decreasing)."""
        ids = set(edge_ids)
        known = {e.id for e in self.edges}
        unknown = ids - known
        if unknown:
            raise ModelError(f"unknown edges: {sorted(unknown)}")
        new_edges = tuple(
            replace(e, length=Fraction(0)) if e.id in ids else e
            for e in self.edges
        )
        if all(e.length == 0 for e in new_edges):
            raise ModelError("degenerate tree: contraction kills every length")
        return replace(self, edges=new_edges)


def rose(b: Basis, lengths: Optional[Mapping[str, object]] = None,
         name: str = "rose") -> MarkedMetricGraph:
    """One-vertex graph with a petal per basis letter.

    >>> from .words import basis, parse_word
    >>> t = rose(basis('abc'))
    >>> t.translation_length(parse_word(t.basis, 'a b c'))
    Fraction(3, 1)
    """
    lengths = lengths or {}
    edges = tuple(
        Edge(s, "v", "v", _parse_length(lengths.get(s, 1)))
        for s in b.symbols
    )
    marking = {i + 1: (i + 1,) for i in range(b.rank)}
    return MarkedMetricGraph(
        basis=b, vertices=("v",), edges=edges, marking=marking, base="v",
        model_id=name,
    )


def contract(t: MarkedMetricGraph, edge_ids: Iterable[str]) -> MarkedMetricGraph:
    return t.contract(edge_ids)


# -- one-edge splittings ----------------------------------------------------


@dataclass(frozen=True)
class SplittingTree(TreeModel):
    """Dual tree of a one-edge splitting over a single shared letter.

    The basis splits into two letter sets whose intersection is one shared
    letter; vertices carry the two letter-subgroups, the edge carries the
    shared letter.  Lengths: the shared letter is invisible, and a word
    moves by edge crossings counted through its side alternations.
    """

    basis: Basis
    side1: FrozenSet[int]
    side2: FrozenSet[int]
    shared: int
    edge_length: Fraction
    basepoint_side: int
    exact: bool = True
    model_id: str = "splitting"

    def __post_init__(self):
        rank_letters = set(range(1, self.basis.rank + 1))
        if self.side1 | self.side2 != rank_letters:
            raise ModelError("sides must cover the basis")
        if self.side1 & self.side2 != {self.shared}:
            raise ModelError("sides must share exactly the shared letter")
        if not (self.side1 - {self.shared}) or not (self.side2 - {self.shared}):
            raise ModelError("both sides need a letter beyond the shared one")
        if self.edge_length <= 0:
            raise ModelError("edge length must be positive")
        if self.basepoint_side not in (1, 2):
            raise ModelError("basepoint side must be 1 or 2")

    def _side(self, x: int) -> int:
        """1, 2, or 0 for the shared letter."""
        i = abs(x)
        if i == self.shared:
            return 0
        return 1 if i in self.side1 else 2

    def _side_sequence(self, letters: Sequence[int]) -> list:
        return [s for s in map(self._side, letters) if s != 0]

    def translation_length(self, w) -> Fraction:
        cw = self._cyclic(w)
        sides = self._side_sequence(cw.letters)
        if not sides or all(s == sides[0] for s in sides):
            return Fraction(0)
        crossings = sum(
            1 for i in range(len(sides)) if sides[i] != sides[(i + 1) % len(sides)]
        )
        return self.edge_length * crossings

    def displacement(self, w: Word) -> Fraction:
        if w.basis != self.basis:
            raise ModelError("word over wrong basis")
        sides = self._side_sequence(w.letters)
        far = 3 - self.basepoint_side
        blocks = sum(
            1 for i, s in enumerate(sides) if s == far and (i == 0 or sides[i - 1] != far)
        )
        return self.edge_length * 2 * blocks


def splitting(
    b: Basis, side1: str, side2: str, shared: str,
    edge_length=1, basepoint_side: int = 1,
) -> SplittingTree:
    enc = lambda s: abs(b.encode(s))
    return SplittingTree(
        basis=b,
        side1=frozenset(enc(ch) for ch in side1),
        side2=frozenset(enc(ch) for ch in side2),
        shared=enc(shared),
        edge_length=_parse_length(edge_length),
        basepoint_side=basepoint_side,
    )


# -- pullbacks --------------------------------------------------------------


@dataclass(frozen=True)
class PullbackTree(TreeModel):
    """The same tree with the action twisted: lengths of images.

    translation_length(w) here equals inner.translation_length(map(w)).
    """

    inner: TreeModel
    twist: Automorphism
    model_id: str = "pullback"

    def __post_init__(self):
        if self.twist.source != self.inner.basis or self.twist.target != self.inner.basis:
            raise ModelError("twist must be an endomorphism of the model basis")
        if not self.twist.invertible:
            raise ModelError("twist needs supplied inverse images")

    @property
    def basis(self) -> Basis:
        return self.inner.basis

    @property
    def exact(self) -> bool:
        return self.inner.exact

    def translation_length(self, w):
        cw = self._cyclic(w)
        return self.inner.translation_length(self.twist.apply_cyclic(cw))

    def displacement(self, w: Word):
        return self.inner.displacement(self.twist.apply(w))

    def bbt_bound(self):
        return sum(
            (self.inner.displacement(self.twist.images[i])
             for i in range(self.basis.rank)),
            Fraction(0),
        )


def pullback(t: TreeModel, a: Automorphism) -> TreeModel:
    return PullbackTree(inner=t, twist=a)
