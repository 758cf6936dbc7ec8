"""Hierarchical group-lasso estimation.

The penalty is a sum, over a collection of coefficient blocks, of Euclidean
norms of nested suffix groups: within a block whose entries are ordered from
highest to lowest inclusion priority, every suffix {k, ..., end} forms a
group.  Zeroing the suffix starting at k therefore forces all
lower-priority entries to zero, which is how the estimator encodes that
recent lags are admitted before distant ones.

The composite objective  0.5 * ||y - X theta||^2 + lambda * penalty(theta)
is minimized by proximal gradient descent with optional momentum
acceleration; the proximal operator of the nested penalty is exact
(sequential group soft-thresholding from the innermost suffix outwards).
Tuning runs a warm-started lambda path selected by BIC, and the selected
support is refit by least squares to undo shrinkage bias.
"""

from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .design import (
    ROLE_HF,
    ROLE_HF_DAY,
    ROLE_HF_MONTH,
    ROLE_HF_WEEK,
    ROLE_INTERCEPT,
    ROLE_LF,
    CenteringRecord,
    Column,
    Design,
    ModelKind,
    ModelSpec,
    center_scale,
)
from .errors import NumericalError

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for the proximal gradient path solver."""

    max_iterations: int = 10000
    tolerance: float = 1e-8
    acceleration: bool = True
    n_lambda: int = 50
    lambda_min_ratio: float = 1e-3
    track_objective: bool = False

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.n_lambda < 1:
            raise ValueError("n_lambda must be >= 1")
        if not 0 < self.lambda_min_ratio <= 1:
            raise ValueError("lambda_min_ratio must be in (0, 1]")


@dataclass(frozen=True)
class Block:
    """One top-level coefficient block, ordered by inclusion priority."""

    name: str
    indices: tuple[int, ...]

    def __post_init__(self):
        if not self.indices:
            raise ValueError(f"block {self.name!r} is empty")
        if len(set(self.indices)) != len(self.indices):
            raise ValueError(f"block {self.name!r} has repeated indices")


@dataclass(frozen=True)
class GroupStructure:
    """Ordered blocks whose suffixes form the nested penalty groups.

    A block of length 1 degenerates to a plain l1 term.  With
    ``weighted=True`` each suffix norm is weighted by the square root of its
    size (off by default; the unweighted sum is the canonical penalty).
    """

    blocks: tuple[Block, ...]
    weighted: bool = False

    def __post_init__(self):
        seen: set[int] = set()
        for b in self.blocks:
            overlap = seen.intersection(b.indices)
            if overlap:
                raise ValueError(f"blocks overlap at indices {sorted(overlap)}")
            seen.update(b.indices)

    def covered_indices(self) -> set[int]:
        out: set[int] = set()
        for b in self.blocks:
            out.update(b.indices)
        return out

    def suffix_weights(self, length: int) -> np.ndarray:
        if self.weighted:
            return np.sqrt(np.arange(length, 0, -1, dtype=float))
        return np.ones(length)

    @property
    def compiled(self) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
        """Per block: (index array, suffix weights), cached for hot loops."""
        cached = self.__dict__.get("_compiled")
        if cached is None:
            cached = tuple(
                (
                    np.asarray(b.indices, dtype=np.intp),
                    self.suffix_weights(len(b.indices)),
                )
                for b in self.blocks
            )
            self.__dict__["_compiled"] = cached
        return cached


def make_groups(spec: ModelSpec | ModelKind, columns: Sequence[Column]) -> GroupStructure:
    """Build the penalty structure implied by a design's column layout.

    LF coefficients form one block per variable ordered by (lag, position)
    recency; HF lag coefficients form one block ordered by lag (or by
    day/week/month for the aggregate layout).  For the per-position model a
    single LF lag degenerates to an l1 term on the scalar coefficient.
    """
    kind = spec.kind if isinstance(spec, ModelSpec) else spec
    if kind not in (ModelKind.POOLED, ModelKind.POOLED_DWM, ModelKind.RUMIDAS_EQ):
        raise ValueError(f"no hierarchical group structure defined for {kind}")
    lf_by_var: dict[str, list[tuple[tuple, int]]] = {}
    hf: list[tuple[tuple, int]] = []
    dwm_rank = {ROLE_HF_DAY: 0, ROLE_HF_WEEK: 1, ROLE_HF_MONTH: 2}
    for pos, col in enumerate(columns):
        if col.role == ROLE_LF:
            key = (col.lf_lag or 1, col.position or 0)
            lf_by_var.setdefault(col.variable or "", []).append((key, pos))
        elif col.role == ROLE_HF:
            hf.append(((col.hf_lag,), pos))
        elif col.role in dwm_rank:
            hf.append(((dwm_rank[col.role],), pos))
        elif col.role == ROLE_INTERCEPT:
            raise ValueError("intercept columns cannot be penalized")
        else:
            raise ValueError(f"unknown column role {col.role!r}")
    blocks: list[Block] = []
    for var, entries in lf_by_var.items():
        entries.sort(key=lambda e: e[0])
        blocks.append(Block(f"lf:{var}", tuple(pos for _, pos in entries)))
    if hf:
        hf.sort(key=lambda e: e[0])
        blocks.append(Block("hf", tuple(pos for _, pos in hf)))
    if not blocks:
        raise ValueError("design has no penalizable columns")
    return GroupStructure(tuple(blocks))


def penalty(theta: np.ndarray, groups: GroupStructure) -> float:
    """Sum over blocks of the Euclidean norms of all nested suffix groups."""
    theta = np.asarray(theta, dtype=float)
    total = 0.0
    for idx, weights in groups.compiled:
        u = theta[idx]
        suffix_norms = np.sqrt(np.cumsum(u[::-1] ** 2))[::-1]
        total += float(suffix_norms @ weights)
    return total


def prox_nested(v: np.ndarray, groups: GroupStructure, threshold: float) -> np.ndarray:
    """Exact proximal operator of ``threshold * penalty``.

    Per block, group soft-thresholding is applied sequentially from the
    innermost suffix to the outermost; for chains of nested groups this
    composition is the exact prox.  Thresholded entries are exact zeros, and
    within a block the zero set is always a suffix, so the hierarchy of
    zeros holds by construction.
    """
    out = np.array(v, dtype=float, copy=True)
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    if threshold == 0.0:
        return out
    for idx, w in groups.compiled:
        u = out[idx]
        vals = u.tolist()
        # backward sweep: shrink factor of each suffix, with the running
        # squared norm updated in place of rescaling the array
        factors = [0.0] * len(vals)
        sq = 0.0
        for k in range(len(vals) - 1, -1, -1):
            sq += vals[k] * vals[k]
            t = threshold * w[k]
            norm = math.sqrt(sq)
            if norm <= t:
                factors[k] = 0.0
                sq = 0.0
            else:
                shrink = 1.0 - t / norm
                factors[k] = shrink
                sq *= shrink * shrink
        # entry j is scaled by every suffix it belongs to: steps 0..j
        running = 1.0
        for j, f in enumerate(factors):
            running = running * f if running != 0.0 else 0.0
            factors[j] = running
        out[idx] = u * np.asarray(factors)
    return out


def prox_gradient_gap(
    X: np.ndarray,
    y: np.ndarray,
    theta: np.ndarray,
    lam: float,
    groups: GroupStructure,
    step: float,
) -> float:
    """Sup-norm violation of the fixed-point condition theta = prox(theta - step*grad).

    Zero at (and only at) the minimizer, for any positive step.
    """
    grad = X.T @ (X @ theta - y)
    mapped = prox_nested(theta - step * grad, groups, step * lam)
    return float(np.max(np.abs(theta - mapped))) if theta.size else 0.0


# ---------------------------------------------------------------------------
# Path solver


@dataclass
class SolutionPath:
    """Solutions of the penalized problem along a descending lambda grid."""

    lambdas: np.ndarray
    coefs: np.ndarray  # (n_lambda, p), fitting scale
    rss: np.ndarray
    df: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray
    lipschitz: float
    objectives: list[np.ndarray] | None = None


def _leading_eigenvalue(G: np.ndarray, tol: float = 1e-6, max_iter: int = 10000) -> float:
    """Largest eigenvalue of a symmetric PSD matrix by power iteration."""
    p = G.shape[0]
    if p == 0:
        return 0.0
    v = 1.0 + np.arange(p, dtype=float) / p
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iter):
        w = G @ v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v = w / norm
        if abs(norm - est) <= tol * norm:
            return norm
        est = norm
    logger.warning("power iteration hit the iteration cap; using last estimate")
    return est


def lambda_grid(design: Design, groups: GroupStructure, config: SolverConfig) -> np.ndarray:
    """Descending log-spaced grid from the smallest all-zero-certifying lambda.

    The top value is the largest block-wise norm of X'y (divided by the
    outermost group weight): at that level the zero vector satisfies the
    optimality condition, because the subdifferential of the penalty at zero
    contains the product of the outermost groups' unit balls.
    """
    corr = design.X.T @ design.target
    top = 0.0
    for block in groups.blocks:
        w_outer = groups.suffix_weights(len(block.indices))[0]
        top = max(top, float(np.linalg.norm(corr[np.asarray(block.indices)])) / w_outer)
    if top == 0.0:
        return np.array([0.0])
    if config.n_lambda == 1:
        return np.array([top])
    ratios = config.lambda_min_ratio ** (
        np.arange(config.n_lambda) / (config.n_lambda - 1)
    )
    return top * ratios


def fit_path(
    design: Design,
    groups: GroupStructure,
    config: SolverConfig | None = None,
    lambdas: np.ndarray | None = None,
) -> SolutionPath:
    """Solve the penalized problem along a descending lambda grid.

    Each solve is warm-started from its predecessor and uses step 1/L with L
    the leading eigenvalue of X'X.  With acceleration on, momentum candidates
    that would increase the objective are rejected, the momentum is restarted
    and a plain descent step is taken instead, so the accepted objective
    sequence is nonincreasing for every lambda.
    """
    config = config or SolverConfig()
    X, y = design.X, design.target
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise NumericalError("design contains non-finite values")
    if lambdas is None:
        lambdas = lambda_grid(design, groups, config)
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.size > 1 and np.any(np.diff(lambdas) > 0):
        raise ValueError("lambda grid must be nonincreasing")

    G = X.T @ X
    c = X.T @ y
    yty = float(y @ y)
    lip = _leading_eigenvalue(G) * 1.001
    lip = max(lip, np.finfo(float).tiny)

    p = X.shape[1]
    coefs = np.zeros((lambdas.size, p))
    rss = np.zeros(lambdas.size)
    iters = np.zeros(lambdas.size, dtype=int)
    conv = np.zeros(lambdas.size, dtype=bool)
    objectives: list[np.ndarray] | None = [] if config.track_objective else None

    theta = np.zeros(p)
    for k, lam in enumerate(lambdas):
        theta, r, it, ok, hist = _solve_single(
            G, c, yty, float(lam), groups, theta, lip, config
        )
        coefs[k] = theta
        rss[k] = r
        iters[k] = it
        conv[k] = ok
        if objectives is not None:
            objectives.append(hist)
        if not ok:
            logger.warning(
                "proximal gradient did not converge at lambda=%.6g "
                "(%d iterations)", lam, it
            )
    df = np.count_nonzero(coefs, axis=1)
    return SolutionPath(lambdas, coefs, rss, df, iters, conv, lip, objectives)


def _solve_single(G, c, yty, lam, groups, theta0, lip, config):
    """Minimize 0.5*||y - X theta||^2 + lam*penalty from a warm start."""

    def rss_of(theta, Gt):
        return yty - 2.0 * float(c @ theta) + float(theta @ Gt)

    def objective(theta):
        Gt = G @ theta
        r = rss_of(theta, Gt)
        return 0.5 * r + lam * penalty(theta, groups), r

    theta = np.array(theta0, copy=True)
    obj, r = objective(theta)
    z = theta.copy()
    t_mom = 1.0
    history = [obj] if config.track_objective else None
    converged = False
    it = 0
    for it in range(1, config.max_iterations + 1):
        if config.acceleration:
            cand = prox_nested(z - (G @ z - c) / lip, groups, lam / lip)
            obj_cand, r_cand = objective(cand)
            if obj_cand > obj:
                # momentum overshoot: restart and take a plain descent step
                t_mom = 1.0
                cand, obj_cand, r_cand, lip = _plain_step(
                    G, c, theta, obj, r, lam, groups, lip, objective
                )
        else:
            cand, obj_cand, r_cand, lip = _plain_step(
                G, c, theta, obj, r, lam, groups, lip, objective
            )
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_mom * t_mom))
        z = cand + ((t_mom - 1.0) / t_next) * (cand - theta)
        t_mom = t_next
        delta = obj - obj_cand
        theta, obj, r = cand, obj_cand, r_cand
        if history is not None:
            history.append(obj)
        if delta <= config.tolerance * max(abs(obj), 1e-12):
            converged = True
            break
    return (
        theta,
        max(r, 0.0),
        it,
        converged,
        np.array(history) if history is not None else None,
    )


def _plain_step(G, c, theta, obj, r_theta, lam, groups, lip, objective):
    """One proximal gradient step that never increases the objective.

    The Lipschitz estimate is doubled on the (rare) event of an increase; if
    no descent is possible even with a tiny step we are at the numerical
    optimum and the current iterate is returned unchanged.
    """
    grad = G @ theta - c
    for _ in range(60):
        cand = prox_nested(theta - grad / lip, groups, lam / lip)
        obj_cand, r_cand = objective(cand)
        if obj_cand <= obj:
            return cand, obj_cand, r_cand, lip
        lip *= 2.0
    return theta, obj, r_theta, lip


# ---------------------------------------------------------------------------
# Selection and refitting


@dataclass(frozen=True)
class PathPoint:
    lambda_: float
    rss: float
    df: int
    bic: float


@dataclass(frozen=True)
class BICSelection:
    index: int
    lambda_: float
    points: tuple[PathPoint, ...]
    perfect_fit: bool


def bic_select(path: SolutionPath, design: Design, refit_rss: bool = True) -> BICSelection:
    """Pick the path point minimizing n*log(RSS/n) + df*log(n).

    Degrees of freedom are the exact nonzero counts of the regularized
    solutions.  By default the RSS entering the criterion is that of the
    least-squares refit on each point's active set, i.e. of the estimator
    actually used downstream; set ``refit_rss=False`` to score the shrunken
    solutions instead (markedly worse at support recovery, because the
    criterion then keeps descending lambda to relieve shrinkage bias).
    Ties (including multiple perfect fits) resolve to the larger lambda,
    i.e. the sparser model.
    """
    if path.lambdas.size == 0:
        raise ValueError("empty path")
    n = design.n_effective
    if refit_rss:
        rss = np.empty(path.lambdas.size)
        cache: dict[bytes, float] = {}
        for k in range(path.lambdas.size):
            mask = path.coefs[k] != 0.0
            key = mask.tobytes()
            if key not in cache:
                active = np.flatnonzero(mask)
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", RuntimeWarning)
                    coef = post_lasso(design, active)
                resid = design.target - design.X @ coef
                cache[key] = float(resid @ resid)
            rss[k] = cache[key]
    else:
        rss = path.rss
    scale = float(design.target @ design.target)
    perfect = rss <= 1e-24 * max(scale, 1e-300)
    with np.errstate(divide="ignore"):
        bic = n * np.log(np.where(perfect, 1.0, rss) / n) + path.df * np.log(n)
    bic[perfect] = -np.inf
    best = 0
    for k in range(1, bic.size):
        if bic[k] < bic[best]:
            best = k
    if perfect[best]:
        warnings.warn("perfect fit on the path; BIC is degenerate", RuntimeWarning)
    points = tuple(
        PathPoint(float(l), float(r), int(d), float(b))
        for l, r, d, b in zip(path.lambdas, rss, path.df, bic)
    )
    return BICSelection(best, float(path.lambdas[best]), points, bool(perfect[best]))


def _lstsq(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, tuple[str, ...]]:
    coef, _, rank, sv = np.linalg.lstsq(X, y, rcond=None)
    flags: list[str] = []
    if rank < X.shape[1]:
        flags.append("rank_deficient")
    if sv.size and sv[-1] > 0 and sv[0] / sv[-1] > CONDITION_LIMIT:
        flags.append("ill_conditioned")
    return coef, tuple(flags)


def post_lasso(design: Design, active_set: np.ndarray) -> np.ndarray:
    """Least squares on the active columns; zeros elsewhere.

    A rank-deficient active submatrix falls back to the minimum-norm
    solution with a warning.
    """
    active = np.asarray(active_set, dtype=int)
    coef = np.zeros(design.n_columns)
    if active.size == 0:
        return coef
    sub, flags = _lstsq(design.X[:, active], design.target)
    if "rank_deficient" in flags:
        warnings.warn(
            "active submatrix is rank deficient; using the minimum-norm "
            "least-squares refit",
            RuntimeWarning,
        )
    coef[active] = sub
    return coef


def ols(design: Design, allow_minimum_norm: bool = False) -> np.ndarray:
    """Least squares via a rank-revealing (SVD) factorization."""
    n, p = design.X.shape
    if n <= p and not allow_minimum_norm:
        raise NumericalError(
            f"underdetermined system (n={n}, p={p}); pass allow_minimum_norm=True "
            "for the minimum-norm solution"
        )
    coef, flags = _lstsq(design.X, design.target)
    if "ill_conditioned" in flags:
        warnings.warn(
            f"design condition number exceeds {CONDITION_LIMIT:.0e}", RuntimeWarning
        )
    return coef


# ---------------------------------------------------------------------------
# Fit results


@dataclass
class FitResult:
    """Fitted coefficients plus the diagnostics needed downstream.

    ``coefficients`` (and the implied ``intercept``) are on the original
    data scale and are the vector used for forecasting; for the hierarchical
    estimator that is the post-selection least-squares refit by default,
    with the shrunken solution kept alongside.  ``residuals`` are those of
    the reported coefficients on the fitting (centered) scale.
    """

    coefficients: np.ndarray
    intercept: float
    active_set: np.ndarray
    residuals: np.ndarray
    estimator: str
    lambda_: float | None = None
    path: tuple[PathPoint, ...] | None = None
    coefficients_shrunk: np.ndarray | None = None
    iterations: np.ndarray | None = None
    converged: np.ndarray | None = None
    flags: tuple[str, ...] = ()
    columns: tuple[Column, ...] | None = None

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X) @ self.coefficients + self.intercept

    @property
    def rss(self) -> float:
        return float(self.residuals @ self.residuals)

    def to_dict(self) -> dict:
        labels = (
            [c.label() for c in self.columns]
            if self.columns is not None
            else [f"x{i}" for i in range(self.coefficients.size)]
        )
        out = {
            "estimator": self.estimator,
            "intercept": self.intercept,
            "coefficients": dict(zip(labels, map(float, self.coefficients))),
            "active_set": [int(i) for i in self.active_set],
            "lambda": self.lambda_,
            "flags": list(self.flags),
        }
        if self.path is not None:
            out["path"] = [
                {"lambda": p.lambda_, "rss": p.rss, "df": p.df, "bic": p.bic}
                for p in self.path
            ]
        return out

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _original_scale(coef: np.ndarray, record: CenteringRecord | None) -> tuple[np.ndarray, float]:
    if record is None:
        return coef.copy(), 0.0
    orig = coef / record.column_scales
    intercept = record.target_mean - float(orig @ record.column_means)
    return orig, intercept


def fit_hierarchical(
    design: Design,
    groups: GroupStructure | None = None,
    config: SolverConfig | None = None,
    do_scale: bool = True,
    post_ols: bool = True,
    lambdas: np.ndarray | None = None,
    refit_rss: bool = True,
) -> FitResult:
    """Full hierarchical fit: center/scale, lambda path, BIC, post refit."""
    config = config or SolverConfig()
    centered, record = center_scale(design, do_scale=do_scale)
    if groups is None:
        groups = make_groups(design.kind, design.columns)
    path = fit_path(centered, groups, config, lambdas)
    sel = bic_select(path, centered, refit_rss=refit_rss)
    shrunk = path.coefs[sel.index]
    active = np.flatnonzero(shrunk != 0.0)
    flags: list[str] = []
    if sel.perfect_fit:
        flags.append("perfect_fit")
    if post_ols:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            fitted = post_lasso(centered, active)
        if any("rank deficient" in str(w.message) for w in caught):
            flags.append("rank_deficient_refit")
    else:
        fitted = shrunk
    residuals = centered.target - centered.X @ fitted
    coef, intercept = _original_scale(fitted, record)
    shrunk_orig, _ = _original_scale(shrunk, record)
    if not bool(path.converged.all()):
        flags.append("not_converged")
    return FitResult(
        coefficients=coef,
        intercept=intercept,
        active_set=active,
        residuals=residuals,
        estimator="hier",
        lambda_=sel.lambda_,
        path=sel.points,
        coefficients_shrunk=shrunk_orig,
        iterations=path.iterations,
        converged=path.converged,
        flags=tuple(flags),
        columns=design.columns,
    )


def fit_ols(design: Design, center: bool = True, allow_minimum_norm: bool = False) -> FitResult:
    """Plain least-squares fit, optionally on the centered design."""
    n, p = design.X.shape
    if n <= p and not allow_minimum_norm:
        raise NumericalError(f"underdetermined system (n={n}, p={p})")
    if center:
        centered, record = center_scale(design, do_scale=False)
    else:
        centered, record = design, None
    coef, flags = _lstsq(centered.X, centered.target)
    residuals = centered.target - centered.X @ coef
    orig, intercept = _original_scale(coef, record)
    return FitResult(
        coefficients=orig,
        intercept=intercept,
        active_set=np.flatnonzero(coef != 0.0),
        residuals=residuals,
        estimator="ols",
        flags=flags,
        columns=design.columns,
    )


# ---------------------------------------------------------------------------
# Estimator facade


class HierarchicalGroupLasso(RegressorMixin, BaseEstimator):
    """Scikit-learn style regressor wrapping the hierarchical path solver.

    Parameters
    ----------
    groups : sequence of sequences of int, optional
        Column-index blocks in inclusion-priority order; within each block
        every suffix forms a penalty group.  ``None`` treats all features as
        one block ordered as given.
    n_lambda, lambda_min_ratio : path grid geometry.
    max_iterations, tolerance, acceleration : inner solver controls.
    standardize : bool
        Scale predictors to unit variance before penalizing (the target and
        predictors are always centered; the model carries no intercept
        internally and ``intercept_`` is recovered from the centering).
    post_ols : bool
        Refit the selected support by least squares (default) instead of
        reporting the shrunken coefficients.

    Attributes
    ----------
    coef_, intercept_, active_set_, lambda_, bic_path_, result_
    """

    def __init__(
        self,
        groups=None,
        n_lambda: int = 50,
        lambda_min_ratio: float = 1e-3,
        max_iterations: int = 10000,
        tolerance: float = 1e-8,
        acceleration: bool = True,
        standardize: bool = True,
        post_ols: bool = True,
    ):
        self.groups = groups
        self.n_lambda = n_lambda
        self.lambda_min_ratio = lambda_min_ratio
        self.max_iterations = max_iterations
        self.tolerance = tolerance
        self.acceleration = acceleration
        self.standardize = standardize
        self.post_ols = post_ols

    def _structure(self, p: int) -> GroupStructure:
        if self.groups is None:
            return GroupStructure((Block("all", tuple(range(p))),))
        if isinstance(self.groups, GroupStructure):
            return self.groups
        blocks = tuple(
            Block(f"b{k}", tuple(int(i) for i in idx))
            for k, idx in enumerate(self.groups)
        )
        structure = GroupStructure(blocks)
        covered = structure.covered_indices()
        if covered and (min(covered) < 0 or max(covered) >= p):
            raise ValueError("group indices out of range")
        return structure

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        if X.shape[0] < 2:
            raise ValueError("need at least 2 samples")
        design = _bare_design(X, y)
        config = SolverConfig(
            max_iterations=self.max_iterations,
            tolerance=self.tolerance,
            acceleration=self.acceleration,
            n_lambda=self.n_lambda,
            lambda_min_ratio=self.lambda_min_ratio,
        )
        result = fit_hierarchical(
            design,
            groups=self._structure(X.shape[1]),
            config=config,
            do_scale=self.standardize,
            post_ols=self.post_ols,
        )
        self.result_ = result
        self.coef_ = result.coefficients
        self.intercept_ = result.intercept
        self.active_set_ = result.active_set
        self.lambda_ = result.lambda_
        self.bic_path_ = result.path
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        return self.result_.predict(X)


def _bare_design(X: np.ndarray, y: np.ndarray) -> Design:
    """Wrap plain arrays in a Design so the functional API applies."""
    n, p = X.shape
    return Design(
        target=np.asarray(y, dtype=float),
        X=np.asarray(X, dtype=float),
        columns=tuple(Column(ROLE_HF, hf_lag=j + 1) for j in range(p)),
        kind=ModelKind.POOLED,
        horizon=1,
        m=1,
        anchors=np.arange(n),
        first_used=np.arange(n),
    )
