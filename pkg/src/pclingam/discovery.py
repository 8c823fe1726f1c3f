"""The PClingam pipeline.

1. Estimate the d-separation-equivalence pattern (PC with Fisher-z tests), or
   take it as given.
2. Score every DAG in the class by the non-Gaussianity of its standardized OLS
   residuals and keep the best one.
3. Flag residuals whose normality is rejected and return the ngDAG pattern of
   the best DAG with those flags.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DegenerateDataError, InsufficientDataError, InvalidArgumentError
from .graphs import (
    DEFAULT_MAX_CLASS_SIZE,
    Dag,
    MixedGraph,
    NgDag,
    NgPattern,
    consistent_extension,
    cpdag_from_dag,
    enumerate_dags,
    format_pattern,
    ngdag_pattern,
    pattern_to_json,
)
from .scm import Dataset
from .stats import (
    ScoreConfig,
    anderson_darling,
    fisher_z,
    node_residual,
    ols_residuals,
    partial_correlation_from_corr,
    score_term,
)

__all__ = [
    "DiscoveryConfig",
    "DiscoveryReport",
    "PcResult",
    "pc_search",
    "pc_pattern",
    "select_best_dag",
    "residual_p_values",
    "classify_p_values",
    "ng_vector",
    "pclingam",
]


@dataclass(frozen=True)
class DiscoveryConfig:
    """Tuning knobs; ``max_cond_size=None`` means ``n - 2``."""

    ci_alpha: float = 0.01
    ng_alpha: float = 0.01
    max_class_size: int = DEFAULT_MAX_CLASS_SIZE
    max_cond_size: int | None = None

    def __post_init__(self):
        for name in ("ci_alpha", "ng_alpha"):
            a = getattr(self, name)
            if not 0.0 < a < 1.0:
                raise InvalidArgumentError(f"{name} must lie in (0, 1), got {a}")
        if self.max_class_size < 1:
            raise InvalidArgumentError("max_class_size must be positive")
        if self.max_cond_size is not None and self.max_cond_size < 0:
            raise InvalidArgumentError("max_cond_size must be nonnegative")

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PcResult:
    pattern: MixedGraph
    sepsets: dict = field(compare=False)
    repairs: int = 0


def _correlation(data: Dataset) -> np.ndarray:
    x = data.values
    if np.any(x.std(axis=1) == 0):
        raise DegenerateDataError("constant variable in data")
    return np.atleast_2d(np.corrcoef(x))


def _skeleton(data: Dataset, config: DiscoveryConfig):
    n, n_samples = data.n_vars, data.n_samples
    corr = _correlation(data)
    adj = [set(range(n)) - {i} for i in range(n)]
    sepsets: dict[tuple[int, int], frozenset] = {}
    max_depth = n - 2 if config.max_cond_size is None else config.max_cond_size
    depth = 0
    while depth <= max_depth:
        # adjacency sets frozen per level (order-independent "stable" variant)
        frozen = [frozenset(a) for a in adj]
        tested = False
        for i in range(n):
            for j in sorted(frozen[i]):
                if j not in adj[i]:
                    continue
                others = sorted(frozen[i] - {j})
                if len(others) < depth:
                    continue
                tested = True
                for cond in itertools.combinations(others, depth):
                    r = partial_correlation_from_corr(corr, i, j, cond)
                    if fisher_z(r, n_samples, depth, config.ci_alpha).independent:
                        adj[i].discard(j)
                        adj[j].discard(i)
                        sepsets[(min(i, j), max(i, j))] = frozenset(cond)
                        break
        if not tested:
            break
        depth += 1
    return adj, sepsets


def _relaxed_extension(graph: MixedGraph) -> Dag:
    """Acyclic orientation that keeps the directed edges and creates as few new
    colliders as a greedy sink-elimination can manage.  Needs an acyclic
    directed part.
    """
    n = graph.node_count
    alive = set(range(n))
    edges = set(graph.directed)
    while alive:
        best, best_cost = None, None
        for x in sorted(alive):
            if graph.children(x) & alive:
                continue
            nbrs = graph.neighbors(x) & alive
            adj_x = (graph.parents(x) | graph.neighbors(x)) & alive
            cost = sum(1 for y in nbrs for z in adj_x if z != y and not graph.adjacent(y, z))
            if best_cost is None or cost < best_cost:
                best, best_cost = x, cost
        for y in graph.neighbors(best) & alive:
            edges.add((y, best))
        alive.remove(best)
    return Dag(n, frozenset(edges))


def _is_acyclic(n: int, edges) -> bool:
    try:
        Dag(n, frozenset(edges))
    except InvalidArgumentError:
        return False
    return True


def pc_search(data: Dataset, config: DiscoveryConfig = DiscoveryConfig()) -> PcResult:
    """PC skeleton search, collider orientation, and completion to a valid pattern.

    Collider orientations proposed in both directions for the same edge are
    dropped.  If the remaining orientations admit no consistent DAG
    extension, orientations are accepted greedily (sorted order) while an
    extension still exists; if even the bare skeleton has none, the pattern is
    built from a greedy extension that may add colliders.  Every dropped
    orientation or added collider counts as one repair.  The output is the
    CPDAG of the resulting extension.
    """
    n = data.n_vars
    if data.n_samples <= n + 3:
        raise InsufficientDataError(f"PC needs more than {n + 3} samples, got {data.n_samples}")
    adj, sepsets = _skeleton(data, config)
    skeleton = {(i, j) for i in range(n) for j in adj[i] if i < j}

    proposals: dict[tuple[int, int], set] = {}
    for b in range(n):
        for a, c in itertools.combinations(sorted(adj[b]), 2):
            if c in adj[a]:
                continue
            if b not in sepsets[(a, c)]:
                for t in (a, c):
                    proposals.setdefault((min(t, b), max(t, b)), set()).add((t, b))
    repairs = sum(1 for dirs in proposals.values() if len(dirs) > 1)
    oriented = sorted(next(iter(dirs)) for dirs in proposals.values() if len(dirs) == 1)

    def build(directed):
        pairs = {(min(a, b), max(a, b)) for a, b in directed}
        return MixedGraph(n, frozenset(directed), frozenset(skeleton - pairs))

    ext = consistent_extension(build(oriented))
    if ext is None:
        accepted: list[tuple[int, int]] = []
        if consistent_extension(build([])) is not None:
            for e in oriented:
                if consistent_extension(build(accepted + [e])) is not None:
                    accepted.append(e)
            ext = consistent_extension(build(accepted))
            repairs += len(oriented) - len(accepted)
        else:
            for e in oriented:
                if _is_acyclic(n, accepted + [e]):
                    accepted.append(e)
            partial = build(accepted)
            ext = _relaxed_extension(partial)
            declared = Dag(n, frozenset(accepted)).unshielded_colliders()
            repairs += len(oriented) - len(accepted) + len(ext.unshielded_colliders() - declared)
    return PcResult(cpdag_from_dag(ext), sepsets, repairs)


def pc_pattern(data: Dataset, config: DiscoveryConfig = DiscoveryConfig()) -> MixedGraph:
    """Estimated d-separation-equivalence pattern (see :func:`pc_search`)."""
    return pc_search(data, config).pattern


def select_best_dag(
    data: Dataset,
    pattern: MixedGraph,
    config: DiscoveryConfig = DiscoveryConfig(),
    score_config: ScoreConfig = ScoreConfig(),
) -> tuple[Dag, list[tuple[Dag, float]]]:
    """Score every DAG of the class; return the first one attaining the maximum."""
    dags = enumerate_dags(pattern, config.max_class_size)
    cache: dict[tuple[int, frozenset], float] = {}

    def term(i, parents):
        key = (i, parents)
        if key not in cache:
            cache[key] = score_term(node_residual(data, i, parents), score_config)
        return cache[key]

    scores = [(g, math.fsum(term(i, g.parents(i)) for i in range(g.node_count))) for g in dags]
    best = 0
    for k, (_, u) in enumerate(scores):
        if u > scores[best][1]:
            best = k
    return scores[best][0], scores


def residual_p_values(residuals: Dataset) -> tuple[float, ...]:
    return tuple(anderson_darling(row).p_value for row in residuals.values)


def classify_p_values(p_values, ng_alpha: float = 0.01) -> tuple[bool, ...]:
    """Non-Gaussian iff normality is rejected, ``p < ng_alpha``."""
    return tuple(bool(p < ng_alpha) for p in p_values)


def ng_vector(residuals: Dataset, ng_alpha: float = 0.01) -> tuple[bool, ...]:
    return classify_p_values(residual_p_values(residuals), ng_alpha)


@dataclass(frozen=True)
class DiscoveryReport:
    pattern: NgPattern
    best_dag: Dag
    dag_scores: tuple
    residual_p_values: tuple
    config_used: DiscoveryConfig
    names: tuple
    step1: str = "pc"
    repairs: int = 0

    def summary(self) -> str:
        return format_pattern(self.pattern, self.names)

    def to_json(self) -> dict:
        return {
            "format_version": 1,
            "names": list(self.names),
            "pattern": pattern_to_json(self.pattern, self.names),
            "best_dag": [list(e) for e in sorted(self.best_dag.edges)],
            "dag_scores": [{"edges": [list(e) for e in sorted(g.edges)], "score": u} for g, u in self.dag_scores],
            "residual_p_values": list(self.residual_p_values),
            "config": self.config_used.to_json(),
            "step1": self.step1,
            "repairs": self.repairs,
        }


def pclingam(
    data: Dataset,
    config: DiscoveryConfig = DiscoveryConfig(),
    oracle_pattern: MixedGraph | NgPattern | None = None,
) -> DiscoveryReport:
    """Run the three PClingam steps on ``data``.

    If ``oracle_pattern`` is given it replaces the PC step (e.g. the true
    d-separation-equivalence pattern).
    """
    if oracle_pattern is not None:
        step1 = oracle_pattern.graph if isinstance(oracle_pattern, NgPattern) else oracle_pattern
        if step1.node_count != data.n_vars:
            raise InvalidArgumentError("oracle pattern and data have different node counts")
        label, repairs = "oracle", 0
    else:
        pc = pc_search(data, config)
        step1, label, repairs = pc.pattern, "pc", pc.repairs
    best, scores = select_best_dag(data, step1, config)
    pvals = residual_p_values(ols_residuals(data, best))
    ng = classify_p_values(pvals, config.ng_alpha)
    return DiscoveryReport(
        pattern=ngdag_pattern(NgDag(best, ng)),
        best_dag=best,
        dag_scores=tuple(scores),
        residual_p_values=pvals,
        config_used=config,
        names=data.names,
        step1=label,
        repairs=repairs,
    )
