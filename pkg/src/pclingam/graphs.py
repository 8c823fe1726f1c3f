"""Graph types and the equivalence-pattern algorithms.

Nodes are integer indices ``0..n-1``.  A :class:`MixedGraph` stores directed
edges as ordered pairs ``(tail, head)`` and undirected edges as sorted pairs
``(i, j)`` with ``i < j``.  All graph values are immutable; the algorithms work
on a private mutable adjacency structure and return fresh values.
"""

from __future__ import annotations

import enum
import heapq
import itertools
import math
import numbers
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .errors import ClassTooLargeError, InconsistentOrientationError, InvalidArgumentError

__all__ = [
    "DEFAULT_MAX_CLASS_SIZE",
    "Dag",
    "MixedGraph",
    "NgDag",
    "NgPattern",
    "EdgeMark",
    "d_separated",
    "cpdag_from_dag",
    "meek_closure",
    "consistent_extension",
    "enumerate_dags",
    "ngdag_pattern",
    "is_chain_graph",
    "distribution_equivalent",
    "pattern_to_json",
    "pattern_from_json",
    "format_pattern",
]

DEFAULT_MAX_CLASS_SIZE = 10_000


def _check_node_count(n) -> int:
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise InvalidArgumentError(f"node_count must be a positive integer, got {n!r}")
    return n


def _check_node(n: int, v) -> int:
    if isinstance(v, bool) or not isinstance(v, numbers.Integral) or not 0 <= v < n:
        raise InvalidArgumentError(f"node index {v!r} out of range for {n} nodes")
    return int(v)


def _normalize_pairs(n: int, pairs: Iterable, what: str) -> list[tuple[int, int]]:
    out = []
    for pair in pairs:
        try:
            a, b = pair
        except (TypeError, ValueError):
            raise InvalidArgumentError(f"{what} edge {pair!r} is not a pair") from None
        a, b = _check_node(n, a), _check_node(n, b)
        if a == b:
            raise InvalidArgumentError(f"self-loop on node {a}")
        out.append((a, b))
    return out


def _topological_order(n: int, edges: Iterable[tuple[int, int]]) -> list[int] | None:
    """Kahn's algorithm, smallest ready index first; None if there is a cycle."""
    children: list[list[int]] = [[] for _ in range(n)]
    indeg = [0] * n
    for a, b in edges:
        children[a].append(b)
        indeg[b] += 1
    ready = [v for v in range(n) if indeg[v] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(ready, c)
    return order if len(order) == n else None


class EdgeMark(enum.Enum):
    """Mark of the canonical pair ``(i, j)``, ``i < j``, in a pattern."""

    ABSENT = "*"
    UNDIRECTED = "—"
    FORWARD = "→"
    BACKWARD = "←"

    @property
    def index(self) -> int:
        return _MARK_INDEX[self]


_MARK_INDEX = {mark: k for k, mark in enumerate(EdgeMark)}


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph over nodes ``0..node_count-1``."""

    node_count: int
    edges: frozenset = frozenset()

    def __post_init__(self):
        n = _check_node_count(self.node_count)
        pairs = _normalize_pairs(n, self.edges, "directed")
        if len(set(pairs)) != len(pairs):
            raise InvalidArgumentError("duplicate edges")
        if _topological_order(n, pairs) is None:
            raise InvalidArgumentError("edges contain a directed cycle")
        object.__setattr__(self, "edges", frozenset(pairs))

    @classmethod
    def from_matrix(cls, adjacency) -> "Dag":
        """Build from a square 0/1 matrix where ``adjacency[i][j]`` means ``i -> j``."""
        n = len(adjacency)
        return cls(n, frozenset((i, j) for i in range(n) for j in range(n) if adjacency[i][j]))

    @cached_property
    def _parents(self) -> tuple[frozenset, ...]:
        pa = [set() for _ in range(self.node_count)]
        for a, b in self.edges:
            pa[b].add(a)
        return tuple(frozenset(p) for p in pa)

    @cached_property
    def _children(self) -> tuple[frozenset, ...]:
        ch = [set() for _ in range(self.node_count)]
        for a, b in self.edges:
            ch[a].add(b)
        return tuple(frozenset(c) for c in ch)

    def parents(self, v: int) -> frozenset:
        return self._parents[_check_node(self.node_count, v)]

    def children(self, v: int) -> frozenset:
        return self._children[_check_node(self.node_count, v)]

    def adjacent(self, u: int, v: int) -> bool:
        return (u, v) in self.edges or (v, u) in self.edges

    def topological_order(self) -> list[int]:
        return _topological_order(self.node_count, self.edges)

    def skeleton(self) -> frozenset:
        return frozenset((min(a, b), max(a, b)) for a, b in self.edges)

    def unshielded_colliders(self) -> frozenset:
        """Triples ``(a, b, c)`` with ``a -> b <- c``, ``a < c`` and a, c nonadjacent."""
        out = set()
        for b in range(self.node_count):
            for a, c in itertools.combinations(sorted(self._parents[b]), 2):
                if not self.adjacent(a, c):
                    out.add((a, b, c))
        return frozenset(out)

    def to_mixed(self) -> "MixedGraph":
        return MixedGraph(self.node_count, self.edges, frozenset())


@dataclass(frozen=True)
class MixedGraph:
    """Graph with directed and undirected edges; at most one edge per node pair."""

    node_count: int
    directed: frozenset = frozenset()
    undirected: frozenset = frozenset()

    def __post_init__(self):
        n = _check_node_count(self.node_count)
        directed = _normalize_pairs(n, self.directed, "directed")
        undirected = [(min(a, b), max(a, b)) for a, b in _normalize_pairs(n, self.undirected, "undirected")]
        seen: set[tuple[int, int]] = set()
        for a, b in itertools.chain(directed, undirected):
            key = (min(a, b), max(a, b))
            if key in seen:
                raise InvalidArgumentError(f"node pair {key} carries more than one edge")
            seen.add(key)
        object.__setattr__(self, "directed", frozenset(directed))
        object.__setattr__(self, "undirected", frozenset(undirected))

    @cached_property
    def _adj(self) -> tuple[tuple[frozenset, frozenset, frozenset], ...]:
        pa = [set() for _ in range(self.node_count)]
        ch = [set() for _ in range(self.node_count)]
        nb = [set() for _ in range(self.node_count)]
        for a, b in self.directed:
            ch[a].add(b)
            pa[b].add(a)
        for a, b in self.undirected:
            nb[a].add(b)
            nb[b].add(a)
        return tuple((frozenset(pa[v]), frozenset(ch[v]), frozenset(nb[v])) for v in range(self.node_count))

    def parents(self, v: int) -> frozenset:
        return self._adj[_check_node(self.node_count, v)][0]

    def children(self, v: int) -> frozenset:
        return self._adj[_check_node(self.node_count, v)][1]

    def neighbors(self, v: int) -> frozenset:
        """Nodes joined to ``v`` by an undirected edge."""
        return self._adj[_check_node(self.node_count, v)][2]

    def adjacents(self, v: int) -> frozenset:
        pa, ch, nb = self._adj[_check_node(self.node_count, v)]
        return pa | ch | nb

    def adjacent(self, u: int, v: int) -> bool:
        return v in self.adjacents(u)

    def skeleton(self) -> frozenset:
        return frozenset((min(a, b), max(a, b)) for a, b in self.directed) | self.undirected

    def mark(self, i: int, j: int) -> EdgeMark:
        """Mark of the pair read in the order ``(i, j)``."""
        if (i, j) in self.directed:
            return EdgeMark.FORWARD
        if (j, i) in self.directed:
            return EdgeMark.BACKWARD
        if (min(i, j), max(i, j)) in self.undirected:
            return EdgeMark.UNDIRECTED
        return EdgeMark.ABSENT

    def chain_components(self) -> list[tuple[int, ...]]:
        """Connected components of the undirected part, sorted."""
        seen = [False] * self.node_count
        comps = []
        for s in range(self.node_count):
            if seen[s]:
                continue
            comp, stack = [], [s]
            seen[s] = True
            while stack:
                v = stack.pop()
                comp.append(v)
                for w in self._adj[v][2]:
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
            comps.append(tuple(sorted(comp)))
        return comps

    def to_dag(self) -> Dag:
        if self.undirected:
            raise InvalidArgumentError("graph still has undirected edges")
        return Dag(self.node_count, self.directed)


def _check_ng(ng: Sequence, n: int) -> tuple[bool, ...]:
    ng = tuple(bool(x) for x in ng)
    if len(ng) != n:
        raise InvalidArgumentError(f"ng vector has length {len(ng)}, expected {n}")
    return ng


@dataclass(frozen=True)
class NgDag:
    """A DAG paired with per-node non-Gaussianity flags."""

    dag: Dag
    ng: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "ng", _check_ng(self.ng, self.dag.node_count))

    @property
    def node_count(self) -> int:
        return self.dag.node_count


@dataclass(frozen=True)
class NgPattern:
    """Distribution-equivalence pattern: a chain graph plus ng flags.

    Equality compares both the edge marks and the ng vector.
    """

    graph: MixedGraph
    ng: tuple = ()

    def __post_init__(self):
        n = self.graph.node_count
        ng = _check_ng(self.ng, n)
        if not is_chain_graph(self.graph):
            raise InvalidArgumentError("ngDAG pattern must be a chain graph")
        for a, b in self.graph.undirected:
            if ng[a] or ng[b]:
                raise InvalidArgumentError(f"undirected edge {a}—{b} touches a non-Gaussian node")
        object.__setattr__(self, "ng", ng)

    @property
    def node_count(self) -> int:
        return self.graph.node_count


# ---------------------------------------------------------------------------
# d-separation


def d_separated(dag: Dag, x: int, y: int, cond: Iterable[int] = ()) -> bool:
    """True iff every path between ``x`` and ``y`` is blocked by ``cond``.

    Reachability ("Bayes ball") over (node, direction) states: a collider
    passes the ball only if it is an ancestor of the conditioning set.
    """
    n = dag.node_count
    _check_node(n, x)
    _check_node(n, y)
    z = {_check_node(n, v) for v in cond}
    if x == y:
        raise InvalidArgumentError("x and y must differ")
    if x in z or y in z:
        raise InvalidArgumentError("x and y must not be in the conditioning set")

    ancestors_of_z = set()
    stack = list(z)
    while stack:
        v = stack.pop()
        if v in ancestors_of_z:
            continue
        ancestors_of_z.add(v)
        stack.extend(dag.parents(v))

    # direction True: ball arrived from a child (moving up)
    visited = set()
    queue = deque([(x, True)])
    while queue:
        v, up = queue.popleft()
        if (v, up) in visited:
            continue
        visited.add((v, up))
        if v == y:
            return False
        if up:
            if v not in z:
                queue.extend((p, True) for p in dag.parents(v))
                queue.extend((c, False) for c in dag.children(v))
        else:
            if v not in z:
                queue.extend((c, False) for c in dag.children(v))
            if v in ancestors_of_z:
                queue.extend((p, True) for p in dag.parents(v))
    return True


# ---------------------------------------------------------------------------
# mutable working graph for orientation algorithms


class _Pdag:
    __slots__ = ("n", "pa", "ch", "und")

    def __init__(self, graph: MixedGraph):
        self.n = graph.node_count
        self.pa = [set(graph.parents(v)) for v in range(self.n)]
        self.ch = [set(graph.children(v)) for v in range(self.n)]
        self.und = [set(graph.neighbors(v)) for v in range(self.n)]

    def adjacent(self, u: int, v: int) -> bool:
        return v in self.pa[u] or v in self.ch[u] or v in self.und[u]

    def orient(self, u: int, v: int) -> None:
        self.und[u].discard(v)
        self.und[v].discard(u)
        self.ch[u].add(v)
        self.pa[v].add(u)

    def has_directed_cycle(self) -> bool:
        edges = [(a, b) for a in range(self.n) for b in self.ch[a]]
        return _topological_order(self.n, edges) is None

    def to_graph(self) -> MixedGraph:
        directed = frozenset((a, b) for a in range(self.n) for b in self.ch[a])
        undirected = frozenset((a, b) for a in range(self.n) for b in self.und[a] if a < b)
        return MixedGraph(self.n, directed, undirected)


def _meek_orients(g: _Pdag, a: int, b: int) -> bool:
    """Whether one of Meek's rules R1-R4 compels the undirected edge a—b to a -> b."""
    # R1: c -> a — b, c and b nonadjacent
    for c in g.pa[a]:
        if not g.adjacent(c, b):
            return True
    # R2: a -> c -> b
    if g.ch[a] & g.pa[b]:
        return True
    # R3: a — c -> b and a — d -> b, c and d nonadjacent
    mids = sorted(g.und[a] & g.pa[b])
    for c, d in itertools.combinations(mids, 2):
        if not g.adjacent(c, d):
            return True
    # R4: k -> l -> b, with k and l both adjacent to a, k and b nonadjacent
    for l in g.pa[b]:
        if l == a or not g.adjacent(a, l):
            continue
        for k in g.pa[l]:
            if k != a and k != b and g.adjacent(a, k) and not g.adjacent(k, b):
                return True
    return False


def meek_closure(graph: MixedGraph) -> MixedGraph:
    """Apply Meek's rules R1-R4 until no undirected edge can be oriented.

    Only undirected edges are ever changed.  Raises
    :class:`InconsistentOrientationError` if the directed part is cyclic, or if
    the closed graph has no acyclic extension that avoids new unshielded
    colliders.
    """
    g = _Pdag(graph)
    if g.has_directed_cycle():
        raise InconsistentOrientationError("directed edges contain a cycle")
    changed = True
    while changed:
        changed = False
        for a in range(g.n):
            for b in sorted(g.und[a]):
                if b in g.und[a] and _meek_orients(g, a, b):
                    g.orient(a, b)
                    changed = True
    closed = g.to_graph()
    if g.has_directed_cycle() or consistent_extension(closed) is None:
        raise InconsistentOrientationError("orientations admit no consistent DAG extension")
    return closed


def consistent_extension(graph: MixedGraph) -> Dag | None:
    """A DAG extending ``graph`` with no new unshielded collider, or None (Dor-Tarsi)."""
    n = graph.node_count
    pa = [set(graph.parents(v)) for v in range(n)]
    ch = [set(graph.children(v)) for v in range(n)]
    nb = [set(graph.neighbors(v)) for v in range(n)]
    alive = set(range(n))
    edges = set(graph.directed)

    def adjacent(u, v):
        return v in pa[u] or v in ch[u] or v in nb[u]

    while alive:
        for x in sorted(alive):
            if ch[x] & alive:
                continue
            nbrs = nb[x] & alive
            adj_x = (pa[x] | nb[x]) & alive
            if all(adjacent(y, z) for y in nbrs for z in adj_x if z != y):
                break
        else:
            return None
        for y in nbrs:
            edges.add((y, x))
        alive.remove(x)
    return Dag(n, frozenset(edges))


def cpdag_from_dag(dag: Dag) -> MixedGraph:
    """The completed d-separation-equivalence pattern of ``dag``."""
    directed = set()
    for a, b, c in dag.unshielded_colliders():
        directed.add((a, b))
        directed.add((c, b))
    undirected = dag.skeleton() - {(min(a, b), max(a, b)) for a, b in directed}
    return meek_closure(MixedGraph(dag.node_count, frozenset(directed), undirected))


def is_chain_graph(graph: MixedGraph) -> bool:
    """True iff ``graph`` has no semi-directed cycle."""
    comps = graph.chain_components()
    comp_of = {}
    for k, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = k
    comp_edges = set()
    for a, b in graph.directed:
        if comp_of[a] == comp_of[b]:
            return False
        comp_edges.add((comp_of[a], comp_of[b]))
    return _topological_order(len(comps), comp_edges) is not None


def _orient_component(graph: MixedGraph, comp: Sequence[int], limit: int) -> list[dict]:
    """All acyclic, collider-free orientations of one chain component.

    Each result maps a sorted undirected edge ``(i, j)`` to 0 (``i -> j``) or
    1 (``j -> i``).  Stops after ``limit + 1`` results.
    """
    comp_set = set(comp)
    edges = sorted(e for e in graph.undirected if e[0] in comp_set)
    new_pa = {v: set() for v in comp}
    new_ch = {v: set() for v in comp}
    choice: dict = {}
    results: list[dict] = []

    def reaches(src, dst):
        stack, seen = [src], set()
        while stack:
            v = stack.pop()
            if v == dst:
                return True
            if v in seen:
                continue
            seen.add(v)
            stack.extend(new_ch[v])
        return False

    def admissible(u, v):
        if reaches(v, u):
            return False
        for w in itertools.chain(new_pa[v], graph.parents(v)):
            if w != u and not graph.adjacent(w, u):
                return False
        return True

    def recurse(k):
        if len(results) > limit:
            return
        if k == len(edges):
            results.append(dict(choice))
            return
        i, j = edges[k]
        for bit, (u, v) in ((0, (i, j)), (1, (j, i))):
            if admissible(u, v):
                new_ch[u].add(v)
                new_pa[v].add(u)
                choice[(i, j)] = bit
                recurse(k + 1)
                del choice[(i, j)]
                new_ch[u].discard(v)
                new_pa[v].discard(u)

    recurse(0)
    return results


def enumerate_dags(graph: MixedGraph, max_class_size: int = DEFAULT_MAX_CLASS_SIZE) -> list[Dag]:
    """Every DAG represented by the pattern ``graph``.

    The pattern is Meek-closed first; the result is the set of acyclic
    orientations of its undirected edges that create no new unshielded
    collider.  For a CPDAG that is exactly the d-separation-equivalence class.
    DAGs are returned in lexicographic order of their orientation choices over
    the sorted undirected edges (``i -> j`` before ``j -> i``).
    """
    if not is_chain_graph(graph):
        raise InvalidArgumentError("enumerate_dags requires a chain graph")
    closed = meek_closure(graph)
    if not closed.undirected:
        return [closed.to_dag()]

    per_comp = []
    for comp in closed.chain_components():
        if len(comp) < 2:
            continue
        options = _orient_component(closed, comp, max_class_size)
        if len(options) > max_class_size:
            raise ClassTooLargeError(max_class_size)
        if not options:
            raise InconsistentOrientationError("chain component admits no consistent orientation")
        per_comp.append(options)
    size = math.prod(len(o) for o in per_comp)
    if size > max_class_size:
        raise ClassTooLargeError(max_class_size, size)

    order = sorted(closed.undirected)
    keyed = []
    for combo in itertools.product(*per_comp):
        choice = {}
        for part in combo:
            choice.update(part)
        key = tuple(choice[e] for e in order)
        edges = set(closed.directed)
        edges.update((i, j) if choice[(i, j)] == 0 else (j, i) for i, j in order)
        keyed.append((key, Dag(closed.node_count, frozenset(edges))))
    keyed.sort(key=lambda kv: kv[0])
    return [dag for _, dag in keyed]


# ---------------------------------------------------------------------------
# ngDAG patterns


def ngdag_pattern(ngdag: NgDag) -> NgPattern:
    """Distribution-equivalence pattern of an ngDAG.

    Start from the CPDAG, orient every undirected edge touching a
    non-Gaussian node as in the DAG, then close under Meek's rules.
    """
    dag, ng = ngdag.dag, ngdag.ng
    cp = cpdag_from_dag(dag)
    directed = set(cp.directed)
    undirected = set(cp.undirected)
    for i, j in cp.undirected:
        if ng[i] or ng[j]:
            undirected.discard((i, j))
            directed.add((i, j) if (i, j) in dag.edges else (j, i))
    graph = meek_closure(MixedGraph(dag.node_count, frozenset(directed), frozenset(undirected)))
    return NgPattern(graph, ng)


def distribution_equivalent(d1: NgDag, d2: NgDag) -> bool:
    """True iff both ngDAGs have the same ngDAG pattern (edges and ng flags)."""
    if d1.node_count != d2.node_count:
        raise InvalidArgumentError(f"node counts differ: {d1.node_count} vs {d2.node_count}")
    if d1 == d2:
        return True
    return ngdag_pattern(d1) == ngdag_pattern(d2)


# ---------------------------------------------------------------------------
# serialization and display


def _default_names(n: int) -> list[str]:
    return [f"x{i + 1}" for i in range(n)]


def pattern_to_json(pattern: NgPattern | MixedGraph, names: Sequence[str] | None = None) -> dict:
    """``{nodes, directed, undirected, ng}``; ``ng`` is omitted for a bare MixedGraph."""
    graph = pattern.graph if isinstance(pattern, NgPattern) else pattern
    names = list(names) if names is not None else _default_names(graph.node_count)
    if len(names) != graph.node_count:
        raise InvalidArgumentError("names length does not match node count")
    out = {
        "nodes": names,
        "directed": [list(e) for e in sorted(graph.directed)],
        "undirected": [list(e) for e in sorted(graph.undirected)],
    }
    if isinstance(pattern, NgPattern):
        out["ng"] = list(pattern.ng)
    return out


def pattern_from_json(obj: dict) -> tuple[NgPattern | MixedGraph, list[str]]:
    """Inverse of :func:`pattern_to_json`; returns the pattern and node names."""
    try:
        names = [str(s) for s in obj["nodes"]]
        directed = [tuple(e) for e in obj.get("directed", [])]
        undirected = [tuple(e) for e in obj.get("undirected", [])]
    except (KeyError, TypeError) as exc:
        raise InvalidArgumentError(f"malformed pattern JSON: {exc}") from None
    for i, j in undirected:
        if not i < j:
            raise InvalidArgumentError(f"undirected pair [{i}, {j}] must satisfy i < j")
    graph = MixedGraph(len(names), frozenset(directed), frozenset(undirected))
    if "ng" in obj:
        return NgPattern(graph, tuple(obj["ng"])), names
    return graph, names


def format_pattern(pattern: NgPattern | MixedGraph, names: Sequence[str] | None = None) -> str:
    """One-line rendering such as ``x — y, y → z; non-Gaussian: {z}``."""
    graph = pattern.graph if isinstance(pattern, NgPattern) else pattern
    names = list(names) if names is not None else _default_names(graph.node_count)
    parts = []
    for i in range(graph.node_count):
        for j in range(i + 1, graph.node_count):
            mark = graph.mark(i, j)
            if mark is EdgeMark.UNDIRECTED:
                parts.append(f"{names[i]} — {names[j]}")
            elif mark is EdgeMark.FORWARD:
                parts.append(f"{names[i]} → {names[j]}")
            elif mark is EdgeMark.BACKWARD:
                parts.append(f"{names[j]} → {names[i]}")
    text = ", ".join(parts) if parts else "(no edges)"
    if isinstance(pattern, NgPattern):
        marked = ", ".join(names[v] for v in range(graph.node_count) if pattern.ng[v])
        text += f"; non-Gaussian: {{{marked}}}"
    return text
