"""Shared helpers and brute-force oracles.

The oracles here deliberately avoid the library's Meek-rule and enumeration
code: they enumerate all 2^k orientations of a skeleton and filter.
"""

import itertools

import networkx as nx
import numpy as np
import pytest

from pclingam.graphs import Dag


def random_dag(rng, n, p=0.5):
    order = rng.permutation(n)
    edges = set()
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < p:
                edges.add((int(order[a]), int(order[b])))
    return Dag(n, frozenset(edges))


def all_dags(n):
    pairs = list(itertools.combinations(range(n), 2))
    for marks in itertools.product((0, 1, 2), repeat=len(pairs)):
        edges = set()
        for (i, j), m in zip(pairs, marks):
            if m == 1:
                edges.add((i, j))
            elif m == 2:
                edges.add((j, i))
        g = nx.DiGraph(list(edges))
        g.add_nodes_from(range(n))
        if nx.is_directed_acyclic_graph(g):
            yield Dag(n, frozenset(edges))


def colliders(n, edges):
    """Unshielded colliders (a, b, c), a < c, computed from scratch."""
    edges = set(edges)
    adj = {(a, b) for a, b in edges} | {(b, a) for a, b in edges}
    out = set()
    for b in range(n):
        pa = sorted(a for a, t in edges if t == b)
        for a, c in itertools.combinations(pa, 2):
            if (a, c) not in adj:
                out.add((a, b, c))
    return out


def orientations(n, skeleton, fixed=()):
    """All acyclic orientations of ``skeleton`` that contain the ``fixed`` arcs."""
    fixed = set(fixed)
    free = [e for e in sorted(skeleton) if e not in fixed and e[::-1] not in fixed]
    for bits in itertools.product((0, 1), repeat=len(free)):
        edges = set(fixed)
        edges.update(e if b == 0 else e[::-1] for e, b in zip(free, bits))
        g = nx.DiGraph(list(edges))
        g.add_nodes_from(range(n))
        if nx.is_directed_acyclic_graph(g):
            yield frozenset(edges)


def brute_mec(dag):
    """All DAGs with the same skeleton and unshielded colliders as ``dag``."""
    target = colliders(dag.node_count, dag.edges)
    return {e for e in orientations(dag.node_count, dag.skeleton()) if colliders(dag.node_count, e) == target}


def brute_ng_class(dag, ng):
    """MEC members that orient every edge at a non-Gaussian node as ``dag`` does."""
    keep = {e for e in dag.edges if ng[e[0]] or ng[e[1]]}
    return {e for e in brute_mec(dag) if keep <= e}


def compelled(node_count, members):
    """Pattern from a set of edge sets: directed iff every member agrees."""
    members = list(members)
    directed, undirected = set(), set()
    for i, j in {(min(a, b), max(a, b)) for a, b in members[0]}:
        if all((i, j) in m for m in members):
            directed.add((i, j))
        elif all((j, i) in m for m in members):
            directed.add((j, i))
        else:
            undirected.add((i, j))
    return frozenset(directed), frozenset(undirected)


def nx_d_separated(dag, x, y, cond):
    g = nx.DiGraph(list(dag.edges))
    g.add_nodes_from(range(dag.node_count))
    return nx.is_d_separator(g, {x}, {y}, set(cond))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
