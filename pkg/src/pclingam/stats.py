"""Statistical primitives: partial correlation, Fisher-z CI test, OLS residuals,
the absolute-value non-Gaussianity score, and the Anderson-Darling normality test.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import stats as _st

from .errors import (
    ContractViolationError,
    DegenerateDataError,
    InsufficientDataError,
    InvalidArgumentError,
)
from .graphs import Dag
from .scm import Dataset

__all__ = [
    "CiTestResult",
    "NormalityResult",
    "Contrast",
    "ScoreConfig",
    "partial_correlation",
    "partial_correlation_from_corr",
    "fisher_z",
    "ci_test",
    "ols_fit",
    "ols_residuals",
    "node_residual",
    "score_term",
    "nongaussianity_score",
    "anderson_darling",
    "ad_pvalue",
]

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
_EIG_TOL = 1e-12
_STANDARDIZED_TOL = 0.01


@dataclass(frozen=True)
class CiTestResult:
    statistic: float
    p_value: float
    independent: bool


@dataclass(frozen=True)
class NormalityResult:
    a_squared: float
    p_value: float


class Contrast(str, enum.Enum):
    ABS = "abs"


_CONTRASTS = {
    Contrast.ABS: (np.abs, _SQRT_2_OVER_PI),
}


@dataclass(frozen=True)
class ScoreConfig:
    """Contrast function ``f`` and its Gaussian reference ``k = E f(g)``, ``g ~ N(0, 1)``."""

    contrast: Contrast = Contrast.ABS
    gaussian_reference: float | None = None

    def __post_init__(self):
        contrast = Contrast(self.contrast)
        _, k = _CONTRASTS[contrast]
        if self.gaussian_reference is not None and not math.isclose(self.gaussian_reference, k, rel_tol=1e-12):
            raise InvalidArgumentError(f"gaussian_reference {self.gaussian_reference} does not match {contrast.value}")
        object.__setattr__(self, "contrast", contrast)
        object.__setattr__(self, "gaussian_reference", k)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return _CONTRASTS[self.contrast][0](x)


def _as_array(data) -> np.ndarray:
    return data.values if isinstance(data, Dataset) else np.asarray(data, dtype=float)


def _check_pair(n: int, i: int, j: int, cond: Sequence[int]) -> None:
    for v in (i, j, *cond):
        if not 0 <= v < n:
            raise InvalidArgumentError(f"variable index {v} out of range")
    if i == j:
        raise InvalidArgumentError("i and j must differ")
    if i in cond or j in cond:
        raise InvalidArgumentError("i and j must not be in the conditioning set")


def partial_correlation_from_corr(corr: np.ndarray, i: int, j: int, cond: Iterable[int] = ()) -> float:
    """Partial correlation of ``i`` and ``j`` given ``cond`` from a correlation matrix.

    Uses the inverse of the ``[i, j, cond]`` submatrix.  Raises
    :class:`DegenerateDataError` when that submatrix is numerically singular.
    """
    idx = [i, j, *cond]
    sub = corr[np.ix_(idx, idx)]
    eig = np.linalg.eigvalsh(sub)
    if eig[0] <= _EIG_TOL * max(eig[-1], 1.0):
        raise DegenerateDataError(f"singular covariance among variables {idx}")
    prec = np.linalg.inv(sub)
    r = -prec[0, 1] / math.sqrt(prec[0, 0] * prec[1, 1])
    return float(min(1.0, max(-1.0, r)))


def partial_correlation(data: Dataset, i: int, j: int, cond: Iterable[int] = ()) -> float:
    """Sample partial correlation of variables ``i`` and ``j`` given ``cond``."""
    x = _as_array(data)
    cond = list(cond)
    _check_pair(x.shape[0], i, j, cond)
    if x.shape[1] <= len(cond) + 2:
        raise InsufficientDataError(f"need more than {len(cond) + 2} samples")
    idx = [i, j, *cond]
    sub = x[idx]
    sd = sub.std(axis=1)
    if np.any(sd == 0):
        raise DegenerateDataError("constant variable")
    corr = np.corrcoef(sub)
    return partial_correlation_from_corr(corr, 0, 1, range(2, len(idx)))


def fisher_z(r: float, n_samples: int, cond_size: int, alpha: float) -> CiTestResult:
    """Fisher-z test of zero (partial) correlation ``r`` from ``n_samples`` samples."""
    dof = n_samples - cond_size - 3
    if dof < 1:
        raise InsufficientDataError(f"{n_samples} samples too few for conditioning set of size {cond_size}")
    r = min(1.0 - 1e-15, max(-1.0 + 1e-15, r))
    stat = math.sqrt(dof) * math.atanh(r)
    p = float(min(1.0, 2.0 * _st.norm.sf(abs(stat))))
    return CiTestResult(stat, p, p > alpha)


def ci_test(data: Dataset, i: int, j: int, cond: Iterable[int] = (), alpha: float = 0.01) -> CiTestResult:
    cond = list(cond)
    x = _as_array(data)
    _check_pair(x.shape[0], i, j, cond)
    if x.shape[1] - len(cond) - 3 < 1:
        raise InsufficientDataError(f"{x.shape[1]} samples too few for conditioning set of size {len(cond)}")
    r = partial_correlation(data, i, j, cond)
    return fisher_z(r, x.shape[1], len(cond), alpha)


def _regress(x: np.ndarray, i: int, parents: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    n_samples = x.shape[1]
    if n_samples <= len(parents) + 1:
        raise InsufficientDataError(f"node {i}: {n_samples} samples for {len(parents)} parents")
    design = np.column_stack([np.ones(n_samples), *(x[p] for p in parents)])
    coef, _, rank, _ = np.linalg.lstsq(design, x[i], rcond=None)
    if rank < design.shape[1]:
        raise DegenerateDataError(f"node {i}: rank-deficient regressors {list(parents)}")
    return coef[1:], x[i] - design @ coef


def _standardize(resid: np.ndarray, i: int, scale: float) -> np.ndarray:
    sd = resid.std()
    if sd <= 1e-12 * max(scale, 1.0):
        raise DegenerateDataError(f"node {i}: zero-variance residual")
    return (resid - resid.mean()) / sd


def node_residual(data: Dataset, i: int, parents: Iterable[int]) -> np.ndarray:
    """Standardized OLS residual of variable ``i`` regressed on ``parents``."""
    x = _as_array(data)
    _, resid = _regress(x, i, sorted(parents))
    return _standardize(resid, i, float(np.abs(x[i]).max()))


def ols_fit(data: Dataset, dag: Dag) -> tuple[np.ndarray, np.ndarray]:
    """Regress every node on its parents (with intercept).

    Returns ``(b, residuals)``: ``b[i, j]`` is the estimated coefficient of
    ``x_j`` in the equation of ``x_i``; ``residuals`` are raw, shape
    ``(n_vars, n_samples)``.
    """
    x = _as_array(data)
    n = x.shape[0]
    if dag.node_count != n:
        raise InvalidArgumentError(f"DAG has {dag.node_count} nodes, data has {n} variables")
    b = np.zeros((n, n))
    resid = np.empty_like(x)
    for i in range(n):
        pa = sorted(dag.parents(i))
        coef, resid[i] = _regress(x, i, pa)
        b[i, pa] = coef
    return b, resid


def ols_residuals(data: Dataset, dag: Dag) -> Dataset:
    """OLS residuals of every node on its parents, standardized to mean 0, variance 1."""
    x = _as_array(data)
    _, resid = ols_fit(data, dag)
    out = np.vstack([_standardize(resid[i], i, float(np.abs(x[i]).max())) for i in range(x.shape[0])])
    names = data.names if isinstance(data, Dataset) else tuple(f"x{i + 1}" for i in range(x.shape[0]))
    return Dataset(names, out)


def score_term(residual: np.ndarray, config: ScoreConfig = ScoreConfig()) -> float:
    """One node's contribution ``(mean f(e) - k)^2`` to the score."""
    return float((config.apply(residual).mean() - config.gaussian_reference) ** 2)


def nongaussianity_score(residuals: Dataset, config: ScoreConfig = ScoreConfig()) -> float:
    """``U = sum_i (mean f(e_i) - k)^2`` over standardized residuals."""
    e = _as_array(residuals)
    if e.shape[0] == 0:
        return 0.0
    mean = e.mean(axis=1)
    var = e.var(axis=1)
    if np.any(np.abs(mean) > _STANDARDIZED_TOL) or np.any(np.abs(var - 1.0) > _STANDARDIZED_TOL):
        raise ContractViolationError("residuals must be standardized (mean 0, variance 1)")
    return math.fsum(score_term(row, config) for row in e)


def ad_pvalue(a2_adjusted: float) -> float:
    """p-value of the small-sample-adjusted A*^2 for composite normality.

    D'Agostino & Stephens piecewise approximation.  The two upper pieces
    disagree slightly at 0.6, so the upper piece is capped at the lower
    piece's value there to keep p non-increasing in A*^2.
    """
    a = float(a2_adjusted)
    if a < 0.2:
        p = 1.0 - math.exp(-13.436 + 101.14 * a - 223.73 * a**2)
    elif a < 0.34:
        p = 1.0 - math.exp(-8.318 + 42.796 * a - 59.938 * a**2)
    elif a < 0.6:
        p = math.exp(0.9177 - 4.279 * a - 1.38 * a**2)
    elif a <= 13.0:
        p = min(math.exp(1.2937 - 5.709 * a + 0.0186 * a**2), _P_AT_0_6)
    else:
        p = 0.0
    return min(1.0, max(0.0, p))


_P_AT_0_6 = math.exp(0.9177 - 4.279 * 0.6 - 1.38 * 0.6**2)


def anderson_darling(sample) -> NormalityResult:
    """Anderson-Darling test of normality with estimated mean and variance.

    Returns the raw A^2; the p-value uses ``A*^2 = A^2 (1 + 0.75/N + 2.25/N^2)``.
    """
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    n = x.size
    if n < 8:
        raise InsufficientDataError(f"Anderson-Darling needs at least 8 samples, got {n}")
    sd = x.std(ddof=1)
    if not sd > 0:
        raise DegenerateDataError("constant sample")
    w = (x - x.mean()) / sd
    logcdf = _st.norm.logcdf(w)
    logsf = _st.norm.logsf(w)
    i = np.arange(1, n + 1)
    a2 = -n - np.sum((2 * i - 1) * (logcdf + logsf[::-1])) / n
    a2 = max(float(a2), 0.0)
    adjusted = a2 * (1.0 + 0.75 / n + 2.25 / n**2)
    return NormalityResult(a2, ad_pvalue(adjusted))
