"""Forecast-comparison statistics.

Two tools: the Diebold-Mariano test for equal predictive accuracy of a pair
of forecast sequences, and the Model Confidence Set, a bootstrap elimination
procedure returning the set of models that cannot be statistically
outperformed at a chosen confidence level.  Both operate on per-origin loss
series evaluated on a common sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DataError


@dataclass(frozen=True)
class DMResult:
    statistic: float
    p_value: float
    n: int
    hac_lag: int
    mean_differential: float
    degenerate: bool = False
    variance_fallback: bool = False


def dm_test(
    loss1: np.ndarray,
    loss2: np.ndarray,
    h: int = 1,
    harvey_correction: bool = False,
) -> DMResult:
    """Test equal predictive accuracy from two aligned loss series.

    The statistic is mean(d) / sqrt(V/n) for d = loss1 - loss2, with V the
    Newey-West long-run variance (Bartlett kernel, truncation lag h-1) and a
    two-sided standard-normal p-value.  Negative values favour the first
    model.  With ``harvey_correction`` the small-sample adjustment is applied
    and the p-value uses a t distribution with n-1 degrees of freedom.
    """
    loss1 = np.asarray(loss1, dtype=float)
    loss2 = np.asarray(loss2, dtype=float)
    if loss1.ndim != 1 or loss1.shape != loss2.shape:
        raise DataError("loss series must be one-dimensional and equally long")
    d = loss1 - loss2
    n = d.size
    if h < 1:
        raise DataError("horizon must be >= 1")
    if n <= h:
        raise DataError(f"need more than h={h} observations, have {n}")
    lag = h - 1
    if np.all(d == 0.0):
        return DMResult(0.0, 1.0, n, lag, 0.0)

    dbar = float(d.mean())
    centered = d - dbar
    gamma0 = float(centered @ centered) / n
    lrv = gamma0
    for k in range(1, lag + 1):
        gamma_k = float(centered[k:] @ centered[:-k]) / n
        lrv += 2.0 * (1.0 - k / (lag + 1.0)) * gamma_k
    fallback = False
    if lrv <= 0.0:
        lrv = gamma0
        fallback = True
    if lrv <= 0.0:
        # constant nonzero differential: infinitely significant
        return DMResult(
            math.copysign(math.inf, dbar), 0.0, n, lag, dbar, degenerate=True
        )
    statistic = dbar / math.sqrt(lrv / n)
    if harvey_correction:
        adj = (n + 1 - 2 * h + h * (h - 1) / n) / n
        statistic *= math.sqrt(max(adj, 0.0))
        p_value = 2.0 * float(stats.t.sf(abs(statistic), df=n - 1))
    else:
        p_value = 2.0 * float(stats.norm.sf(abs(statistic)))
    return DMResult(
        statistic, p_value, n, lag, dbar, variance_fallback=fallback
    )


def dm_matrix(
    losses: np.ndarray, h: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """Pairwise DM statistics and p-values for the columns of a loss matrix."""
    losses = np.asarray(losses, dtype=float)
    M = losses.shape[1]
    stat = np.zeros((M, M))
    pval = np.ones((M, M))
    for i in range(M):
        for j in range(i + 1, M):
            res = dm_test(losses[:, i], losses[:, j], h=h)
            stat[i, j], stat[j, i] = res.statistic, -res.statistic
            pval[i, j] = pval[j, i] = res.p_value
    return stat, pval


@dataclass(frozen=True)
class MCSResult:
    """Surviving set and per-model elimination p-values.

    ``p_values[i]`` is the running maximum of elimination-step p-values up
    to (and including) the step at which model i was removed; survivors are
    exactly the models with p-value >= alpha, so lowering alpha never
    shrinks the set.
    """

    survivors: tuple[int, ...]
    p_values: np.ndarray
    elimination_order: tuple[int, ...]
    alpha: float
    reps: int
    block_length: int
    statistic: str = "Tmax"
    tie_breaks: int = 0

    def survives(self, i: int) -> bool:
        return i in self.survivors


def moving_block_indices(
    n: int, block_length: int, reps: int, rng: np.random.Generator
) -> np.ndarray:
    """(reps, n) moving-block bootstrap index matrix."""
    if not 1 <= block_length <= n:
        raise DataError(f"block length must be in [1, {n}]")
    n_blocks = -(-n // block_length)
    starts = rng.integers(0, n - block_length + 1, size=(reps, n_blocks))
    idx = starts[:, :, None] + np.arange(block_length)[None, None, :]
    return idx.reshape(reps, -1)[:, :n]


def _pairwise_tstats(means: np.ndarray, dev: np.ndarray, members: np.ndarray):
    """t-statistics of all pairwise mean loss differentials within a set.

    ``dev`` holds recentered bootstrap means (reps x M).  The bootstrap
    variance of a pairwise differential is the second moment of the
    corresponding deviation difference.  Differentials that are identically
    zero in every bootstrap draw get a zero statistic; a nonzero differential
    with zero bootstrap variance is infinitely significant.
    """
    d = dev[:, members]
    sq = (d * d).mean(axis=0)
    cross = (d.T @ d) / d.shape[0]
    var = sq[:, None] + sq[None, :] - 2.0 * cross
    np.maximum(var, 0.0, out=var)
    diff = means[members][:, None] - means[members][None, :]
    denom = np.sqrt(var)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = diff / denom
    zero = denom == 0.0
    t[zero] = 0.0
    t[zero & (diff > 0)] = np.inf
    t[zero & (diff < 0)] = -np.inf
    np.fill_diagonal(t, -np.inf)
    return t, denom


def mcs(
    losses: np.ndarray,
    alpha: float = 0.25,
    reps: int = 5000,
    block_length: int | None = None,
    seed: int = 0,
) -> MCSResult:
    """Model Confidence Set via the range statistic over pairwise t-stats.

    At each elimination step the statistic is max_{i,j} t_ij, where t_ij
    standardizes the mean loss differential of models i and j by its
    moving-block bootstrap variance; its null distribution comes from the
    recentered bootstrap deviations.  While the step p-value is below alpha
    the model with the largest standardized deficit is removed (ties go to
    the lowest column index).  Elimination is run to the end so every model
    gets a p-value; the survivors at level alpha are returned.
    """
    losses = np.asarray(losses, dtype=float)
    if losses.ndim != 2:
        raise DataError("losses must be an (n, M) matrix")
    n, M = losses.shape
    if M < 1:
        raise DataError("need at least one model")
    if M == 1:
        return MCSResult((0,), np.ones(1), (), alpha, reps, 0)
    if block_length is None:
        block_length = int(math.ceil(n ** (1.0 / 3.0)))
    if n <= block_length:
        raise DataError(f"need more than block_length={block_length} observations")

    rng = np.random.default_rng(seed)
    idx = moving_block_indices(n, block_length, reps, rng)
    means = losses.mean(axis=0)
    # bootstrap means per model, recentered at the sample means; chunked so
    # the (reps, n, M) gather is never materialized at once
    dev = np.empty((reps, M))
    step = max(1, 2_000_000 // (n * M))
    for s in range(0, reps, step):
        dev[s:s + step] = losses[idx[s:s + step]].mean(axis=1) - means

    included = list(range(M))
    p_values = np.ones(M)
    step_pvals: list[float] = []
    order: list[int] = []
    tie_breaks = 0
    running_max = 0.0
    while len(included) > 1:
        members = np.array(included)
        t_obs, denom = _pairwise_tstats(means, dev, members)
        t_max = float(t_obs.max())
        # null distribution: recentered bootstrap version of the same statistic
        d = dev[:, members]
        k = len(members)
        zero_var = denom == 0.0
        t_boot_max = np.empty(reps)
        chunk = max(1, 2_000_000 // (k * k))
        for s in range(0, reps, chunk):
            part = d[s:s + chunk]
            num = part[:, :, None] - part[:, None, :]
            with np.errstate(divide="ignore", invalid="ignore"):
                tb = num / denom[None, :, :]
            tb[:, zero_var] = 0.0
            for a in range(k):
                tb[:, a, a] = -np.inf
            t_boot_max[s:s + len(part)] = tb.max(axis=(1, 2))
        p_step = float(np.mean(t_boot_max >= t_max))
        running_max = max(running_max, p_step)
        step_pvals.append(p_step)

        deficits = t_obs.max(axis=1)
        worst_local = int(np.argmax(deficits))
        if np.count_nonzero(deficits == deficits[worst_local]) > 1:
            tie_breaks += 1
        worst = included[worst_local]
        p_values[worst] = running_max
        order.append(worst)
        included.remove(worst)

    survivors = tuple(i for i in range(M) if p_values[i] >= alpha)
    return MCSResult(
        survivors=survivors,
        p_values=p_values,
        elimination_order=tuple(order),
        alpha=alpha,
        reps=reps,
        block_length=block_length,
        tie_breaks=tie_breaks,
    )
