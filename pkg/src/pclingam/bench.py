"""Simulation harness: random models, PClingam runs, and edge-mark confusion matrices."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .discovery import DiscoveryConfig, pclingam
from .errors import InvalidArgumentError, PclingamError
from .graphs import EdgeMark, MixedGraph, NgPattern, cpdag_from_dag, ngdag_pattern, pattern_to_json
from .scm import random_model, sample

__all__ = [
    "ConfusionMatrix",
    "RunRecord",
    "ExperimentResult",
    "edge_marks",
    "confusion_matrix",
    "run_experiment",
]

_MARKS = list(EdgeMark)


def _graph(pattern: NgPattern | MixedGraph) -> MixedGraph:
    return pattern.graph if isinstance(pattern, NgPattern) else pattern


def edge_marks(pattern: NgPattern | MixedGraph, n: int | None = None) -> dict[tuple[int, int], EdgeMark]:
    """Mark of every canonical pair ``(i, j)``, ``i < j``."""
    graph = _graph(pattern)
    n = graph.node_count if n is None else n
    if n != graph.node_count:
        raise InvalidArgumentError(f"pattern has {graph.node_count} nodes, expected {n}")
    return {(i, j): graph.mark(i, j) for i in range(n) for j in range(i + 1, n)}


@dataclass
class ConfusionMatrix:
    """Rows: true mark, columns: estimated mark, both ordered ``* — → ←``."""

    counts: np.ndarray = field(default_factory=lambda: np.zeros((4, 4), dtype=np.int64))

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64).reshape(4, 4)
        if np.any(self.counts < 0):
            raise InvalidArgumentError("counts must be nonnegative")

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.counts + other.counts)

    def __eq__(self, other):
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return np.array_equal(self.counts, other.counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def diagonal(self) -> int:
        return int(np.trace(self.counts))

    @property
    def diagonal_fraction(self) -> float:
        return self.diagonal / self.total if self.total else float("nan")

    def to_text(self) -> str:
        header = "      " + "".join(f"{m.value:>6}" for m in _MARKS)
        rows = [header]
        for r, m in enumerate(_MARKS):
            rows.append(f"{m.value:>6}" + "".join(f"{int(v):>6}" for v in self.counts[r]))
        if self.total:
            rows.append(f"diagonal: {self.diagonal}/{self.total} ({self.diagonal_fraction:.3f})")
        else:
            rows.append("diagonal: 0/0")
        return "\n".join(rows)

    def to_json(self) -> dict:
        return {
            "labels": [m.value for m in _MARKS],
            "counts": self.counts.tolist(),
            "total": self.total,
            "diagonal": self.diagonal,
        }


def confusion_matrix(true_pattern: NgPattern | MixedGraph, est_pattern: NgPattern | MixedGraph) -> ConfusionMatrix:
    n = _graph(true_pattern).node_count
    if _graph(est_pattern).node_count != n:
        raise InvalidArgumentError("patterns have different node counts")
    truth, est = edge_marks(true_pattern), edge_marks(est_pattern)
    counts = np.zeros((4, 4), dtype=np.int64)
    for pair, mark in truth.items():
        counts[mark.index, est[pair].index] += 1
    return ConfusionMatrix(counts)


@dataclass
class RunRecord:
    run: int
    true_pattern: NgPattern
    est_pattern: NgPattern | None = None
    repairs: int = 0
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    def to_json(self) -> dict:
        return {
            "run": self.run,
            "true_pattern": pattern_to_json(self.true_pattern),
            "est_pattern": None if self.est_pattern is None else pattern_to_json(self.est_pattern),
            "repairs": self.repairs,
            "error": self.error,
        }


@dataclass
class ExperimentResult:
    matrix: ConfusionMatrix
    runs: list[RunRecord]

    @property
    def failures(self) -> int:
        return sum(r.failed for r in self.runs)

    @property
    def total_repairs(self) -> int:
        return sum(r.repairs for r in self.runs)


def run_experiment(
    n_runs: int = 20,
    node_count: int = 6,
    n_samples: int = 1000,
    step1: str = "oracle",
    config: DiscoveryConfig = DiscoveryConfig(),
    seed: int | None = 0,
    edge_prob: float | None = None,
    ng_prob: float = 0.5,
) -> ExperimentResult:
    """Repeat: random model, sample, PClingam, tally against the true pattern.

    ``step1`` is ``"oracle"`` (true CPDAG given) or ``"pc"``.  Run ``k`` uses
    the ``k``-th child of ``SeedSequence(seed)``, so any run can be replayed
    alone.  Runs that raise a pipeline error are kept in ``runs`` with their
    message and left out of the matrix.
    """
    if step1 not in ("oracle", "pc"):
        raise InvalidArgumentError(f"step1 must be 'oracle' or 'pc', got {step1!r}")
    if n_runs < 0 or node_count < 1 or n_samples < 1:
        raise InvalidArgumentError("n_runs must be >= 0; node_count and n_samples positive")
    matrix = ConfusionMatrix()
    records = []
    for k, child in enumerate(np.random.SeedSequence(seed).spawn(n_runs)):
        rng = np.random.default_rng(child)
        model = random_model(node_count, edge_prob, ng_prob, rng)
        truth = ngdag_pattern(model.ngdag)
        data = sample(model, n_samples, rng)
        oracle = cpdag_from_dag(model.dag) if step1 == "oracle" else None
        try:
            report = pclingam(data, config, oracle_pattern=oracle)
        except PclingamError as exc:
            records.append(RunRecord(k, truth, error=f"{type(exc).__name__}: {exc}"))
            continue
        matrix = matrix + confusion_matrix(truth, report.pattern)
        records.append(RunRecord(k, truth, report.pattern, report.repairs))
    return ExperimentResult(matrix, records)
