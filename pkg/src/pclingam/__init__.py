"""Causal discovery of linear acyclic models with mixed Gaussian and
non-Gaussian disturbances (PClingam), with ngDAG-pattern utilities and a
simulation harness.
"""

from .discovery import DiscoveryConfig, DiscoveryReport, pc_pattern, pclingam, select_best_dag
from .errors import (
    ClassTooLargeError,
    ContractViolationError,
    DegenerateDataError,
    InconsistentOrientationError,
    InputError,
    InsufficientDataError,
    InvalidArgumentError,
    NotEquivalentError,
    PclingamError,
)
from .graphs import (
    Dag,
    EdgeMark,
    MixedGraph,
    NgDag,
    NgPattern,
    cpdag_from_dag,
    d_separated,
    distribution_equivalent,
    enumerate_dags,
    is_chain_graph,
    meek_closure,
    ngdag_pattern,
)
from .scm import Dataset, DisturbanceSpec, Family, ScmModel, random_model, reduced_form, sample

__version__ = "0.1.0"
