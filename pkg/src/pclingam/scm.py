"""Linear acyclic structural causal models and data sets.

A model assigns ``x_i = sum_j b[i, j] x_j + e_i + c_i`` in causal order, with
mutually independent disturbances ``e_i``.  Each disturbance is drawn from one
of a fixed set of families, shifted to mean zero and scaled to a target
variance.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import stats as _st

from .errors import InputError, InvalidArgumentError, NotEquivalentError
from .graphs import Dag, NgDag, distribution_equivalent, ngdag_pattern

__all__ = [
    "Family",
    "NON_GAUSSIAN_FAMILIES",
    "DisturbanceSpec",
    "ScmModel",
    "Dataset",
    "reduced_form",
    "implied_covariance",
    "sample",
    "match_parametrization",
    "random_model",
    "default_edge_prob",
    "fig1_model",
    "read_csv",
    "write_csv",
]


class Family(str, enum.Enum):
    GAUSSIAN = "gaussian"
    SIGNED_SQUARE_GAUSSIAN = "signed_square_gaussian"
    CUBED_GAUSSIAN = "cubed_gaussian"
    STUDENT_T2 = "student_t2"
    BIMODAL_MOG = "bimodal_mog"
    LOGNORMAL = "lognormal"
    UNIFORM = "uniform"


NON_GAUSSIAN_FAMILIES = tuple(f for f in Family if f is not Family.GAUSSIAN)

# t(2) has no variance; scale it so its interquartile range equals that of N(0, 1)
_T2_SCALE = _st.norm.ppf(0.75) / math.sqrt(2.0 / 3.0)
_LOGNORMAL_MEAN = math.exp(0.5)
_LOGNORMAL_SD = math.sqrt((math.e - 1.0) * math.e)


def _unit_draw(family: Family, rng: np.random.Generator, size: int) -> np.ndarray:
    """Mean-zero, unit-variance draw (nominal unit scale for t(2))."""
    if family is Family.GAUSSIAN:
        return rng.standard_normal(size)
    if family is Family.SIGNED_SQUARE_GAUSSIAN:
        g = rng.standard_normal(size)
        return np.sign(g) * g**2 / math.sqrt(3.0)  # E g^4 = 3
    if family is Family.CUBED_GAUSSIAN:
        return rng.standard_normal(size) ** 3 / math.sqrt(15.0)  # E g^6 = 15
    if family is Family.STUDENT_T2:
        return rng.standard_t(2, size) * _T2_SCALE
    if family is Family.BIMODAL_MOG:
        centers = np.where(rng.random(size) < 0.5, -2.0, 2.0)
        return (centers + rng.standard_normal(size)) / math.sqrt(5.0)
    if family is Family.LOGNORMAL:
        return (np.exp(rng.standard_normal(size)) - _LOGNORMAL_MEAN) / _LOGNORMAL_SD
    if family is Family.UNIFORM:
        return rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), size)
    raise InvalidArgumentError(f"unknown family {family!r}")


@dataclass(frozen=True)
class DisturbanceSpec:
    """Distribution of one disturbance term.

    ``target_variance`` is exact for every family except ``STUDENT_T2``, whose
    variance is infinite; there it fixes the scale nominally (IQR matched to a
    Gaussian of that variance).
    """

    family: Family = Family.GAUSSIAN
    target_variance: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        v = float(self.target_variance)
        if not (v > 0 and math.isfinite(v)):
            raise InvalidArgumentError(f"target_variance must be positive, got {self.target_variance!r}")
        object.__setattr__(self, "target_variance", v)

    @property
    def is_gaussian(self) -> bool:
        return self.family is Family.GAUSSIAN

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return _unit_draw(self.family, rng, size) * math.sqrt(self.target_variance)


@dataclass(frozen=True, eq=False)
class Dataset:
    """``values`` has shape ``(n_vars, n_samples)``; row ``i`` is variable ``names[i]``."""

    names: tuple
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim == 1:
            values = values[None, :]
        if values.ndim != 2:
            raise InvalidArgumentError("values must be a 2-D array (n_vars, n_samples)")
        names = tuple(str(s) for s in self.names)
        if len(names) != values.shape[0]:
            raise InvalidArgumentError(f"{len(names)} names for {values.shape[0]} variables")
        if values.shape[1] < 1:
            raise InvalidArgumentError("a dataset needs at least one sample")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("dataset contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_samples(cls, samples, names: Sequence[str] | None = None) -> "Dataset":
        """Build from a ``(n_samples, n_vars)`` array, the usual tabular layout."""
        arr = np.asarray(samples, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if names is None:
            names = [f"x{i + 1}" for i in range(arr.shape[1])]
        return cls(tuple(names), arr.T)

    @property
    def n_vars(self) -> int:
        return self.values.shape[0]

    @property
    def n_samples(self) -> int:
        return self.values.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.names == other.names and np.array_equal(self.values, other.values)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ScmModel:
    """Linear acyclic SCM.

    ``b[i, j]`` is the direct effect of ``x_j`` on ``x_i``; it may be nonzero
    only when ``j`` precedes ``i`` in ``order``.
    """

    b: np.ndarray
    disturbances: tuple
    order: tuple | None = None
    c: np.ndarray | None = None
    names: tuple | None = None

    def __post_init__(self):
        b = np.array(self.b, dtype=float)
        if b.ndim != 2 or b.shape[0] != b.shape[1] or b.shape[0] < 1:
            raise InvalidArgumentError("b must be a non-empty square matrix")
        n = b.shape[0]
        if not np.all(np.isfinite(b)):
            raise InvalidArgumentError("b contains non-finite entries")
        dag = Dag(n, frozenset((j, i) for i, j in zip(*np.nonzero(b))))
        order = tuple(dag.topological_order()) if self.order is None else tuple(int(v) for v in self.order)
        if sorted(order) != list(range(n)):
            raise InvalidArgumentError("order must be a permutation of the node indices")
        pos = {v: k for k, v in enumerate(order)}
        for j, i in dag.edges:
            if pos[j] >= pos[i]:
                raise InvalidArgumentError(f"b[{i}, {j}] is nonzero but {j} does not precede {i} in order")
        c = np.zeros(n) if self.c is None else np.array(self.c, dtype=float).reshape(n)
        dist = tuple(d if isinstance(d, DisturbanceSpec) else DisturbanceSpec(*d) for d in self.disturbances)
        if len(dist) != n:
            raise InvalidArgumentError(f"{len(dist)} disturbance specs for {n} nodes")
        names = tuple(f"x{i + 1}" for i in range(n)) if self.names is None else tuple(map(str, self.names))
        if len(names) != n:
            raise InvalidArgumentError("names length does not match node count")
        b.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "disturbances", dist)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "_dag", dag)

    @property
    def n(self) -> int:
        return self.b.shape[0]

    @property
    def dag(self) -> Dag:
        return self._dag

    @property
    def ng(self) -> tuple:
        return tuple(not d.is_gaussian for d in self.disturbances)

    @property
    def ngdag(self) -> NgDag:
        return NgDag(self.dag, self.ng)

    @property
    def variances(self) -> np.ndarray:
        return np.array([d.target_variance for d in self.disturbances])

    def to_json(self) -> dict:
        return {
            "format_version": 1,
            "names": list(self.names),
            "order": list(self.order),
            "b": self.b.tolist(),
            "c": self.c.tolist(),
            "disturbances": [{"family": d.family.value, "variance": d.target_variance} for d in self.disturbances],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ScmModel":
        try:
            return cls(
                b=np.array(obj["b"], dtype=float),
                disturbances=tuple(DisturbanceSpec(Family(d["family"]), d["variance"]) for d in obj["disturbances"]),
                order=tuple(obj["order"]),
                c=np.array(obj.get("c", [0.0] * len(obj["b"])), dtype=float),
                names=tuple(obj["names"]) if "names" in obj else None,
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvalidArgumentError):
                raise
            raise InputError(f"malformed model JSON: {exc}") from None


def reduced_form(model: ScmModel) -> np.ndarray:
    """``A = (I - B)^-1``, the matrix of total effects of disturbances on variables."""
    # forward substitution in causal order keeps non-ancestor entries exactly 0
    a = np.zeros((model.n, model.n))
    for i in model.order:
        a[i] = model.b[i] @ a
        a[i, i] = 1.0
    return a


def implied_covariance(model: ScmModel) -> np.ndarray:
    a = reduced_form(model)
    return a @ np.diag(model.variances) @ a.T


def sample(model: ScmModel, n_samples: int, seed: int | np.random.Generator | None = None) -> Dataset:
    """Draw ``n_samples`` i.i.d. vectors from ``model``; deterministic given ``seed``."""
    if int(n_samples) < 1:
        raise InvalidArgumentError("n_samples must be positive")
    n_samples = int(n_samples)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    e = np.empty((model.n, n_samples))
    for i, spec in enumerate(model.disturbances):
        e[i] = spec.draw(rng, n_samples)
    x = np.zeros((model.n, n_samples))
    for i in model.order:
        x[i] = model.b[i] @ x + e[i] + model.c[i]
    return Dataset(model.names, x)


def default_edge_prob(n: int) -> float:
    """Edge probability giving about ``n`` expected edges."""
    return 1.0 if n <= 3 else 2.0 / (n - 1)


def random_model(
    n: int,
    edge_prob: float | None = None,
    ng_prob: float = 0.5,
    seed: int | np.random.Generator | None = None,
    names: Sequence[str] | None = None,
) -> ScmModel:
    """Random SCM: random causal order, |b| ~ U[0.5, 1.5] with random sign.

    Each node is non-Gaussian with probability ``ng_prob`` (family chosen
    uniformly among the non-Gaussian ones); variances are U[1, 3].
    """
    if edge_prob is None:
        edge_prob = default_edge_prob(n)
    if not (0.0 <= edge_prob <= 1.0 and 0.0 <= ng_prob <= 1.0):
        raise InvalidArgumentError("probabilities must lie in [0, 1]")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    order = rng.permutation(n)
    b = np.zeros((n, n))
    for later in range(n):
        for earlier in range(later):
            if rng.random() < edge_prob:
                magnitude = rng.uniform(0.5, 1.5)
                sign = 1.0 if rng.random() < 0.5 else -1.0
                b[order[later], order[earlier]] = sign * magnitude
    dist = []
    for _ in range(n):
        if rng.random() < ng_prob:
            family = NON_GAUSSIAN_FAMILIES[rng.integers(len(NON_GAUSSIAN_FAMILIES))]
        else:
            family = Family.GAUSSIAN
        dist.append(DisturbanceSpec(family, rng.uniform(1.0, 3.0)))
    return ScmModel(b, tuple(dist), tuple(int(v) for v in order), names=names)


def fig1_model(ez_family: Family = Family.UNIFORM) -> ScmModel:
    """``x := e_x``, ``y := 3x + e_y``, ``z := -2y + e_z``; e_x, e_y Gaussian."""
    b = np.zeros((3, 3))
    b[1, 0] = 3.0
    b[2, 1] = -2.0
    dist = (DisturbanceSpec(), DisturbanceSpec(), DisturbanceSpec(ez_family))
    return ScmModel(b, dist, (0, 1, 2), names=("x", "y", "z"))


def match_parametrization(m1: ScmModel, d2: NgDag) -> ScmModel:
    """A model with structure ``d2`` implying the same distribution as ``m1``.

    ``d2`` must be distribution-equivalent to ``m1.ngdag``, so the two DAGs
    differ only inside chain components whose disturbances are all Gaussian.
    Per component ``C`` with reduced form ``A1`` (over ``C`` only), a new
    within-component parametrization ``A2`` with ``A1 D1 A1' = A2 D2 A2'`` is
    obtained by population regression along ``d2``; weights and constants
    from outside the component are mapped by ``w2 = A2^-1 A1 w1``.
    """
    if d2.node_count != m1.n:
        raise InvalidArgumentError("node counts differ")
    if not distribution_equivalent(m1.ngdag, d2):
        raise NotEquivalentError("target ngDAG is not distribution-equivalent to the model")
    if d2.dag == m1.dag:
        return m1

    b1 = np.asarray(m1.b)
    var1 = m1.variances
    b2 = b1.copy()
    var2 = var1.copy()
    c2 = np.array(m1.c)
    pattern = ngdag_pattern(d2)
    for comp in pattern.graph.chain_components():
        if len(comp) < 2:
            continue
        idx = list(comp)
        local = {v: k for k, v in enumerate(idx)}
        k = len(idx)
        a1 = np.linalg.inv(np.eye(k) - b1[np.ix_(idx, idx)])
        sigma = a1 @ np.diag(var1[idx]) @ a1.T

        bcc = np.zeros((k, k))
        dcc = np.zeros(k)
        for v in idx:
            par = sorted(local[p] for p in d2.dag.parents(v) if p in local)
            i = local[v]
            if par:
                coef = np.linalg.solve(sigma[np.ix_(par, par)], sigma[par, i])
                bcc[i, par] = coef
                dcc[i] = sigma[i, i] - sigma[i, par] @ coef
            else:
                dcc[i] = sigma[i, i]
        a2 = np.linalg.inv(np.eye(k) - bcc)
        transfer = np.linalg.solve(a2, a1)  # A2^-1 A1

        outside = [j for j in range(m1.n) if j not in local]
        b2[np.ix_(idx, idx)] = bcc
        if outside:
            b2[np.ix_(idx, outside)] = transfer @ b1[np.ix_(idx, outside)]
        c2[idx] = transfer @ np.asarray(m1.c)[idx]
        var2[idx] = dcc

    # clear numerical dust on edges that d2 does not contain
    mask = np.zeros_like(b2, dtype=bool)
    for j, i in d2.dag.edges:
        mask[i, j] = True
    b2[~mask] = 0.0
    dist = tuple(DisturbanceSpec(d.family, v) for d, v in zip(m1.disturbances, var2))
    return ScmModel(b2, dist, tuple(d2.dag.topological_order()), c=c2, names=m1.names)


# ---------------------------------------------------------------------------
# CSV I/O


def read_csv(path: str | Path) -> Dataset:
    """Read a header-plus-rows CSV; raises :class:`InputError` with row/column on bad cells."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    except (UnicodeDecodeError, csv.Error) as exc:
        raise InputError(f"{path}: malformed CSV ({exc})") from None
    if not rows or not any(cell.strip() for cell in rows[0]):
        raise InputError(f"{path}: missing header row")
    names = [cell.strip() for cell in rows[0]]
    data = []
    for r, row in enumerate(rows[1:], start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(names):
            raise InputError(f"{path}: row {r} has {len(row)} fields, expected {len(names)}")
        vals = []
        for k, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise InputError(f"{path}: row {r}, column {k + 1} ({names[k]}): not a number: {cell!r}") from None
            if not math.isfinite(v):
                raise InputError(f"{path}: row {r}, column {k + 1} ({names[k]}): non-finite value {cell!r}")
            vals.append(v)
        data.append(vals)
    if not data:
        raise InputError(f"{path}: no data rows")
    return Dataset(tuple(names), np.array(data).T)


def write_csv(data: Dataset, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(data.names)
        for row in data.values.T:
            writer.writerow([repr(float(v)) for v in row])
