import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import all_dags, brute_mec, brute_ng_class, colliders, compelled, nx_d_separated, orientations, random_dag
from pclingam.errors import ClassTooLargeError, InconsistentOrientationError, InvalidArgumentError
from pclingam.graphs import (
    Dag,
    EdgeMark,
    MixedGraph,
    NgDag,
    NgPattern,
    consistent_extension,
    cpdag_from_dag,
    d_separated,
    distribution_equivalent,
    enumerate_dags,
    format_pattern,
    is_chain_graph,
    meek_closure,
    ngdag_pattern,
    pattern_from_json,
    pattern_to_json,
)

X, Y, Z = 0, 1, 2
CHAIN = Dag(3, frozenset({(X, Y), (Y, Z)}))
COLLIDER = Dag(3, frozenset({(X, Y), (Z, Y)}))


def und(n, *pairs):
    return MixedGraph(n, frozenset(), frozenset(pairs))


# --- structure validation


def test_dag_rejects_cycles_self_loops_and_bad_indices():
    with pytest.raises(InvalidArgumentError):
        Dag(3, frozenset({(0, 1), (1, 2), (2, 0)}))
    with pytest.raises(InvalidArgumentError):
        Dag(2, frozenset({(1, 1)}))
    with pytest.raises(InvalidArgumentError):
        Dag(2, frozenset({(0, 2)}))


def test_mixed_graph_rejects_two_edges_on_one_pair():
    with pytest.raises(InvalidArgumentError):
        MixedGraph(2, frozenset({(0, 1)}), frozenset({(0, 1)}))
    with pytest.raises(InvalidArgumentError):
        MixedGraph(2, frozenset({(0, 1), (1, 0)}), frozenset())


def test_ng_pattern_rejects_undirected_edge_at_ng_node():
    with pytest.raises(InvalidArgumentError):
        NgPattern(und(2, (0, 1)), (True, False))


def test_edge_marks():
    g = MixedGraph(3, frozenset({(2, 0)}), frozenset({(0, 1)}))
    assert g.mark(0, 1) is EdgeMark.UNDIRECTED
    assert g.mark(0, 2) is EdgeMark.BACKWARD
    assert g.mark(1, 2) is EdgeMark.ABSENT
    assert CHAIN.to_mixed().mark(0, 1) is EdgeMark.FORWARD


# --- d-separation


def test_d_separation_examples():
    assert d_separated(CHAIN, X, Z, {Y})
    assert not d_separated(CHAIN, X, Z, set())
    assert not d_separated(COLLIDER, X, Z, {Y})
    assert d_separated(COLLIDER, X, Z, set())


def test_d_separation_descendant_of_collider_opens_path():
    g = Dag(4, frozenset({(0, 1), (2, 1), (1, 3)}))
    assert d_separated(g, 0, 2)
    assert not d_separated(g, 0, 2, {3})


def test_d_separation_argument_errors():
    with pytest.raises(InvalidArgumentError):
        d_separated(CHAIN, 0, 3)
    with pytest.raises(InvalidArgumentError):
        d_separated(CHAIN, 0, 0)
    with pytest.raises(InvalidArgumentError):
        d_separated(CHAIN, 0, 2, {0})


def test_d_separation_matches_networkx(rng):
    for _ in range(60):
        n = int(rng.integers(2, 7))
        g = random_dag(rng, n, rng.uniform(0.2, 0.8))
        for x, y in itertools.combinations(range(n), 2):
            rest = [v for v in range(n) if v not in (x, y)]
            for k in range(len(rest) + 1):
                for cond in itertools.combinations(rest, k):
                    assert d_separated(g, x, y, cond) == nx_d_separated(g, x, y, cond)


# --- CPDAG


def test_cpdag_examples():
    assert cpdag_from_dag(CHAIN) == und(3, (0, 1), (1, 2))
    assert cpdag_from_dag(COLLIDER) == COLLIDER.to_mixed()
    assert cpdag_from_dag(Dag(2, frozenset({(0, 1)}))) == und(2, (0, 1))


def test_cpdag_matches_brute_force_class(rng):
    for _ in range(150):
        n = int(rng.integers(1, 6))
        g = random_dag(rng, n, rng.uniform(0.2, 0.9))
        cp = cpdag_from_dag(g)
        directed, undirected = compelled(n, brute_mec(g)) if g.edges else (frozenset(), frozenset())
        assert (cp.directed, cp.undirected) == (directed, undirected)


# --- Meek closure


def test_meek_r1_example_against_d_separation_oracle():
    # a -> b, b - c, a and c nonadjacent.  Of the two orientations of b - c,
    # only one keeps a and c marginally dependent (no new v-structure at b).
    a, b, c = 0, 1, 2
    g = MixedGraph(3, frozenset({(a, b)}), frozenset({(b, c)}))
    valid = [e for e in ((b, c), (c, b)) if not d_separated(Dag(3, frozenset({(a, b), e})), a, c)]
    assert valid == [(b, c)]
    assert meek_closure(g) == MixedGraph(3, frozenset({(a, b), (b, c)}), frozenset())


def test_meek_tree_unchanged_and_idempotent():
    tree = und(5, (0, 1), (1, 2), (1, 3), (3, 4))
    assert meek_closure(tree) == tree
    closed = meek_closure(MixedGraph(3, frozenset({(0, 1)}), frozenset({(1, 2)})))
    assert meek_closure(closed) == closed


@pytest.mark.parametrize(
    "directed, undirected, expected",
    [
        # R2: a -> c -> b and a - b  =>  a -> b
        ({(0, 2), (2, 1)}, {(0, 1)}, (0, 1)),
        # R3: a - c -> b, a - d -> b, a - b, c and d nonadjacent  =>  a -> b
        ({(2, 1), (3, 1)}, {(0, 1), (0, 2), (0, 3)}, (0, 1)),
        # R4: a - b, a - c, a - d, d -> c -> b, d and b nonadjacent  =>  a -> b
        ({(3, 2), (2, 1)}, {(0, 1), (0, 2), (0, 3)}, (0, 1)),
    ],
)
def test_meek_rules_r2_to_r4(directed, undirected, expected):
    n = 4 if max(max(e) for e in directed | undirected) == 3 else 3
    closed = meek_closure(MixedGraph(n, frozenset(directed), frozenset(undirected)))
    assert expected in closed.directed


def test_meek_errors():
    with pytest.raises(InconsistentOrientationError):
        meek_closure(MixedGraph(3, frozenset({(0, 1), (1, 2), (2, 0)}), frozenset()))
    # every acyclic orientation of a chordless 4-cycle has an unshielded collider
    with pytest.raises(InconsistentOrientationError):
        meek_closure(und(4, (0, 1), (1, 2), (2, 3), (0, 3)))


def test_meek_closure_matches_brute_force_with_background_knowledge(rng):
    """Closing CPDAG + extra true orientations gives exactly the edges compelled
    among the class members that agree with those orientations."""
    checked = 0
    while checked < 150:
        n = int(rng.integers(3, 6))
        g = random_dag(rng, n, rng.uniform(0.3, 0.9))
        cp = cpdag_from_dag(g)
        if not cp.undirected:
            continue
        extra = {e for e in cp.undirected if rng.random() < 0.4}
        directed = set(cp.directed) | {e if e in g.edges else e[::-1] for e in extra}
        pdag = MixedGraph(n, frozenset(directed), cp.undirected - extra)
        members = [m for m in brute_mec(g) if directed <= m]
        closed = meek_closure(pdag)
        assert (closed.directed, closed.undirected) == compelled(n, members)
        # monotone: nothing directed is removed or reversed
        assert set(pdag.directed) <= set(closed.directed)
        assert meek_closure(closed) == closed
        checked += 1


def test_consistent_extension_adds_no_collider(rng):
    for _ in range(100):
        g = random_dag(rng, int(rng.integers(1, 7)), 0.5)
        ext = consistent_extension(cpdag_from_dag(g))
        assert ext.skeleton() == g.skeleton()
        assert ext.unshielded_colliders() == g.unshielded_colliders()


# --- enumeration


def test_enumerate_chain_pattern_gives_three_dags_in_fixed_order():
    dags = enumerate_dags(und(3, (0, 1), (1, 2)))
    assert [sorted(d.edges) for d in dags] == [
        [(0, 1), (1, 2)],
        [(1, 0), (1, 2)],
        [(1, 0), (2, 1)],
    ]


def test_enumerate_fully_directed_pattern():
    assert enumerate_dags(COLLIDER.to_mixed()) == [COLLIDER]


def test_enumerate_undirected_triangle():
    tri = und(3, (0, 1), (1, 2), (0, 2))
    expected = set(orientations(3, tri.undirected))
    assert len(expected) == 6
    assert {d.edges for d in enumerate_dags(tri)} == expected


def test_enumerate_respects_cap():
    complete5 = und(5, *itertools.combinations(range(5), 2))
    assert len(enumerate_dags(complete5)) == 120
    with pytest.raises(ClassTooLargeError) as info:
        enumerate_dags(complete5, max_class_size=100)
    assert info.value.cap == 100


def test_enumerate_product_over_components():
    g = und(6, (0, 1), (1, 2), (3, 4), (4, 5))
    assert len(enumerate_dags(g)) == 9


def test_enumerate_rejects_non_chain_graph():
    with pytest.raises(InvalidArgumentError):
        enumerate_dags(MixedGraph(3, frozenset({(0, 1)}), frozenset({(1, 2), (0, 2)})))


def test_enumerate_equals_brute_force_class(rng):
    for _ in range(100):
        n = int(rng.integers(1, 6))
        g = random_dag(rng, n, rng.uniform(0.2, 0.9))
        got = [d.edges for d in enumerate_dags(cpdag_from_dag(g))]
        assert len(got) == len(set(got))
        assert set(got) == (brute_mec(g) if g.edges else {frozenset()})


# --- ngDAG patterns


def test_ngdag_pattern_fig1():
    p = ngdag_pattern(NgDag(CHAIN, (False, False, True)))
    assert p == NgPattern(MixedGraph(3, frozenset({(1, 2)}), frozenset({(0, 1)})), (False, False, True))
    assert len(enumerate_dags(p.graph)) == 2


def test_ngdag_pattern_extremes(rng):
    for _ in range(50):
        n = int(rng.integers(1, 7))
        g = random_dag(rng, n, 0.5)
        assert ngdag_pattern(NgDag(g, (False,) * n)).graph == cpdag_from_dag(g)
        assert ngdag_pattern(NgDag(g, (True,) * n)).graph == g.to_mixed()


def test_ngdag_pattern_matches_brute_force_class(rng):
    for _ in range(150):
        n = int(rng.integers(1, 6))
        g = random_dag(rng, n, rng.uniform(0.2, 0.9))
        ng = tuple(bool(rng.random() < 0.4) for _ in range(n))
        p = ngdag_pattern(NgDag(g, ng))
        members = brute_ng_class(g, ng) if g.edges else {frozenset()}
        if g.edges:
            assert (p.graph.directed, p.graph.undirected) == compelled(n, members)
        assert {d.edges for d in enumerate_dags(p.graph)} == members
        assert p.ng == ng


def test_ngdag_pattern_is_chain_graph():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        n = int(rng.integers(1, 8))
        g = random_dag(rng, n, rng.uniform(0.1, 0.9))
        ng = tuple(bool(b) for b in rng.random(n) < 0.5)
        assert is_chain_graph(ngdag_pattern(NgDag(g, ng)).graph)


def test_is_chain_graph_examples():
    assert is_chain_graph(CHAIN.to_mixed())
    assert not is_chain_graph(MixedGraph(3, frozenset({(0, 1)}), frozenset({(1, 2), (0, 2)})))


# --- distribution equivalence


def test_distribution_equivalence_examples():
    fwd, back = Dag(2, frozenset({(0, 1)})), Dag(2, frozenset({(1, 0)}))
    assert distribution_equivalent(NgDag(fwd, (False, False)), NgDag(back, (False, False)))
    assert not distribution_equivalent(NgDag(fwd, (True, False)), NgDag(back, (False, True)))
    d = NgDag(CHAIN, (False, True, False))
    assert distribution_equivalent(d, d)
    with pytest.raises(InvalidArgumentError):
        distribution_equivalent(d, NgDag(fwd, (False, False)))


def test_ng_vector_is_part_of_equivalence():
    assert not distribution_equivalent(NgDag(COLLIDER, (False,) * 3), NgDag(COLLIDER, (True, False, False)))


@st.composite
def small_ngdags(draw, n=3):
    pairs = list(itertools.combinations(range(n), 2))
    perm = draw(st.permutations(range(n)))
    present = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = frozenset((perm[i], perm[j]) for (i, j), keep in zip(pairs, present) if keep)
    ng = tuple(draw(st.lists(st.booleans(), min_size=n, max_size=n)))
    return NgDag(Dag(n, edges), ng)


@settings(max_examples=200, deadline=None)
@given(small_ngdags(), small_ngdags(), small_ngdags())
def test_distribution_equivalence_is_an_equivalence_relation(a, b, c):
    assert distribution_equivalent(a, a)
    assert distribution_equivalent(a, b) == distribution_equivalent(b, a)
    if distribution_equivalent(a, b) and distribution_equivalent(b, c):
        assert distribution_equivalent(a, c)


def test_equivalent_members_share_d_separations(rng):
    for _ in range(40):
        n = int(rng.integers(2, 6))
        g = random_dag(rng, n, 0.6)
        members = enumerate_dags(cpdag_from_dag(g))
        for m in members:
            assert m.skeleton() == g.skeleton()
            assert colliders(n, m.edges) == colliders(n, g.edges)
        for x, y in itertools.combinations(range(n), 2):
            rest = [v for v in range(n) if v not in (x, y)]
            for k in range(len(rest) + 1):
                for cond in itertools.combinations(rest, k):
                    assert len({d_separated(m, x, y, cond) for m in members}) == 1


def test_all_dags_small_count():
    # number of labelled DAGs on 1..4 nodes
    assert [sum(1 for _ in all_dags(n)) for n in (1, 2, 3, 4)] == [1, 3, 25, 543]


# --- serialization and display


def test_pattern_json_round_trip(rng):
    for _ in range(30):
        n = int(rng.integers(1, 6))
        g = random_dag(rng, n, 0.5)
        p = ngdag_pattern(NgDag(g, tuple(bool(b) for b in rng.random(n) < 0.5)))
        names = [f"v{i}" for i in range(n)]
        back, back_names = pattern_from_json(pattern_to_json(p, names))
        assert back == p and back_names == names
        graph, _ = pattern_from_json(pattern_to_json(p.graph))
        assert graph == p.graph


def test_pattern_json_rejects_unordered_undirected_pair():
    with pytest.raises(InvalidArgumentError):
        pattern_from_json({"nodes": ["a", "b"], "directed": [], "undirected": [[1, 0]]})


def test_format_pattern():
    p = ngdag_pattern(NgDag(CHAIN, (False, False, True)))
    assert format_pattern(p, ["x", "y", "z"]) == "x — y, y → z; non-Gaussian: {z}"
    assert format_pattern(MixedGraph(2, frozenset(), frozenset())) == "(no edges)"
