"""Regression designs for the mixed-frequency model variants.

Every builder turns an :class:`~mfhier.data.MFDataset` into a ``Design``:
a target vector, a predictor matrix, and per-column metadata.  Rows are
anchored at a HF index n (0-based): the target is the observation h-1 steps
ahead of n (direct forecasting), HF regressors are the lags x[n-1..n-p], and
LF regressors are the values of previous LF periods.  The within-period
position dummies always refer to the position of the anchor n, i.e. of the
information set, never of the target date.

Variants:

* ``RUMIDAS_EQ``      one equation per within-period position i, one row per
                      LF period, position-specific coefficients;
* ``RUMIDAS_DUMMY``   the m equations stacked into a single design through
                      position dummies (coefficients still vary with i);
* ``POOLED``          dummies on the LF block only; HF lag coefficients are
                      shared across positions;
* ``HAR``             intercept + yesterday + 5-day mean + 20-day mean of the
                      HF series itself;
* ``POOLED_DWM``      the pooled LF block combined with the three HAR-style
                      HF aggregates.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .data import MFDataset
from .errors import DataError


class ModelKind(str, enum.Enum):
    RUMIDAS_EQ = "RUMIDAS_EQ"
    RUMIDAS_DUMMY = "RUMIDAS_DUMMY"
    POOLED = "POOLED"
    HAR = "HAR"
    POOLED_DWM = "POOLED_DWM"


@dataclass(frozen=True)
class ModelSpec:
    """What to build: model variant, lag orders, horizon, LF variable subset."""

    kind: ModelKind
    q_lf: int = 1
    p_hf: int | None = None  # None means m at build time
    horizon: int = 1
    include_intercept: bool = False
    lf_variables: tuple[str, ...] | None = None  # None means all

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.q_lf < 0:
            raise ValueError("q_lf must be >= 0")
        if self.p_hf is not None and self.p_hf < 1:
            raise ValueError("p_hf must be >= 1")

    def resolve_p(self, m: int) -> int:
        return m if self.p_hf is None else self.p_hf

    def resolve_lf(self, ds: MFDataset) -> tuple[str, ...]:
        if self.lf_variables is None:
            return ds.labels
        missing = [v for v in self.lf_variables if v not in ds.labels]
        if missing:
            raise DataError(f"unknown LF variables: {missing}")
        return tuple(self.lf_variables)


ROLE_LF = "LF"
ROLE_HF = "HF"
ROLE_HF_DAY = "HF_DAY"
ROLE_HF_WEEK = "HF_WEEK"
ROLE_HF_MONTH = "HF_MONTH"
ROLE_INTERCEPT = "INTERCEPT"


@dataclass(frozen=True)
class Column:
    """Metadata for one design column."""

    role: str
    variable: str | None = None
    lf_lag: int | None = None
    hf_lag: int | None = None
    position: int | None = None

    def label(self) -> str:
        if self.role == ROLE_LF:
            parts = [f"lf:{self.variable}", f"l{self.lf_lag}"]
            if self.position is not None:
                parts.append(f"i{self.position}")
            return ":".join(parts)
        if self.role == ROLE_HF:
            if self.position is not None:
                return f"hf:j{self.hf_lag}:i{self.position}"
            return f"hf:j{self.hf_lag}"
        return self.role.lower()


@dataclass(frozen=True)
class CenteringRecord:
    """Per-column normalization applied before fitting.

    Scales are population standard deviations; columns flagged constant are
    centered but kept at scale 1 so the record is always invertible.
    """

    target_mean: float
    column_means: np.ndarray
    column_scales: np.ndarray
    constant_columns: np.ndarray

    def __post_init__(self):
        if np.any(self.column_scales <= 0):
            raise ValueError("centering scales must be strictly positive")


@dataclass(frozen=True)
class Design:
    """Target, predictors and metadata for one (model, horizon) pair."""

    target: np.ndarray
    X: np.ndarray
    columns: tuple[Column, ...]
    kind: ModelKind
    horizon: int
    m: int
    anchors: np.ndarray
    first_used: np.ndarray  # earliest HF index consumed by each row
    centering: CenteringRecord | None = None
    position: int | None = None  # set for RUMIDAS_EQ designs

    def __post_init__(self):
        n, p = self.X.shape
        if self.target.shape != (n,):
            raise ValueError("target length does not match X")
        if len(self.columns) != p:
            raise ValueError("column metadata length does not match X")
        if self.anchors.shape != (n,) or self.first_used.shape != (n,):
            raise ValueError("row metadata length does not match X")

    @property
    def n_effective(self) -> int:
        return self.target.size

    @property
    def n_columns(self) -> int:
        return self.X.shape[1]

    def labels(self) -> list[str]:
        return [c.label() for c in self.columns]

    def to_csv(self, path) -> None:
        """Write target plus predictors with metadata labels as header."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["anchor", "target"] + self.labels())
            for i in range(self.n_effective):
                writer.writerow(
                    [int(self.anchors[i]), _fmt(self.target[i])]
                    + [_fmt(v) for v in self.X[i]]
                )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _anchor_bounds(ds: MFDataset, p: int, q: int, h: int) -> tuple[int, int]:
    """Inclusive range of valid anchor indices for the lag/horizon layout."""
    lo = max(p, q * ds.m)
    hi = ds.n_hf - h
    if hi < lo:
        raise DataError(
            f"insufficient history: need at least {lo + h} HF observations, "
            f"have {ds.n_hf}"
        )
    return lo, hi


def _first_used(ds: MFDataset, anchors: np.ndarray, p: int, q: int) -> np.ndarray:
    """Earliest HF index consumed by each row (oldest HF lag or LF period start)."""
    oldest_hf = anchors - p
    if q > 0:
        oldest_lf = (anchors // ds.m - q) * ds.m
        return np.minimum(oldest_hf, oldest_lf)
    return oldest_hf


def _lf_block(
    ds: MFDataset,
    anchors: np.ndarray,
    variables: Sequence[str],
    q: int,
    with_dummies: bool,
) -> tuple[np.ndarray, list[Column]]:
    """LF columns ordered by variable, then lag, then (if dummied) position."""
    var_idx = {v: k for k, v in enumerate(ds.labels)}
    periods = anchors // ds.m
    positions = anchors % ds.m + 1
    cols: list[np.ndarray] = []
    meta: list[Column] = []
    for v in variables:
        k = var_idx[v]
        for lag in range(1, q + 1):
            values = ds.lf[periods - lag, k]
            if with_dummies:
                for i in range(1, ds.m + 1):
                    cols.append(np.where(positions == i, values, 0.0))
                    meta.append(Column(ROLE_LF, variable=v, lf_lag=lag, position=i))
            else:
                cols.append(values)
                meta.append(Column(ROLE_LF, variable=v, lf_lag=lag))
    if not cols:
        return np.empty((anchors.size, 0)), []
    return np.column_stack(cols), meta


def _hf_lags(ds: MFDataset, anchors: np.ndarray, p: int) -> np.ndarray:
    """(n, p) matrix of lags x[n-1], ..., x[n-p]."""
    return ds.hf[anchors[:, None] - np.arange(1, p + 1)[None, :]]


def _dwm_block(ds: MFDataset, anchors: np.ndarray) -> tuple[np.ndarray, list[Column]]:
    lags = _hf_lags(ds, anchors, 20)
    block = np.column_stack(
        [lags[:, 0], lags[:, :5].mean(axis=1), lags.mean(axis=1)]
    )
    meta = [Column(ROLE_HF_DAY), Column(ROLE_HF_WEEK), Column(ROLE_HF_MONTH)]
    return block, meta


def build_rumidas_eq(ds: MFDataset, spec: ModelSpec, position: int) -> Design:
    """Design for the single equation of within-period position i.

    One row per usable LF period: the anchor runs over the HF indices whose
    within-period position equals ``position``.
    """
    if not 1 <= position <= ds.m:
        raise DataError(f"position must be in 1..{ds.m}")
    if spec.kind is not ModelKind.RUMIDAS_EQ:
        raise DataError(f"spec kind {spec.kind} does not match builder")
    p = spec.resolve_p(ds.m)
    lo, hi = _anchor_bounds(ds, p, spec.q_lf, spec.horizon)
    anchors = np.arange(lo, hi + 1)
    anchors = anchors[anchors % ds.m + 1 == position]
    if anchors.size == 0:
        raise DataError("insufficient history for this position")
    variables = spec.resolve_lf(ds)
    lf, lf_meta = _lf_block(ds, anchors, variables, spec.q_lf, with_dummies=False)
    lf_meta = [replace(c, position=position) for c in lf_meta]
    hf = _hf_lags(ds, anchors, p)
    hf_meta = [Column(ROLE_HF, hf_lag=j, position=position) for j in range(1, p + 1)]
    X = np.column_stack([lf, hf]) if lf.size else hf
    return Design(
        target=ds.hf[anchors + spec.horizon - 1],
        X=X,
        columns=tuple(lf_meta + hf_meta),
        kind=spec.kind,
        horizon=spec.horizon,
        m=ds.m,
        anchors=anchors,
        first_used=_first_used(ds, anchors, p, spec.q_lf),
        position=position,
    )


def build_rumidas_dummy(ds: MFDataset, spec: ModelSpec) -> Design:
    """All m equations stacked into one design via position dummies."""
    if spec.kind is not ModelKind.RUMIDAS_DUMMY:
        raise DataError(f"spec kind {spec.kind} does not match builder")
    p = spec.resolve_p(ds.m)
    lo, hi = _anchor_bounds(ds, p, spec.q_lf, spec.horizon)
    anchors = np.arange(lo, hi + 1)
    variables = spec.resolve_lf(ds)
    lf, lf_meta = _lf_block(ds, anchors, variables, spec.q_lf, with_dummies=True)
    lags = _hf_lags(ds, anchors, p)
    positions = anchors % ds.m + 1
    hf_cols = []
    hf_meta = []
    for j in range(1, p + 1):
        for i in range(1, ds.m + 1):
            hf_cols.append(np.where(positions == i, lags[:, j - 1], 0.0))
            hf_meta.append(Column(ROLE_HF, hf_lag=j, position=i))
    X = np.column_stack(([lf] if lf.size else []) + hf_cols)
    return Design(
        target=ds.hf[anchors + spec.horizon - 1],
        X=X,
        columns=tuple(lf_meta + hf_meta),
        kind=spec.kind,
        horizon=spec.horizon,
        m=ds.m,
        anchors=anchors,
        first_used=_first_used(ds, anchors, p, spec.q_lf),
    )


def build_pooled(ds: MFDataset, spec: ModelSpec) -> Design:
    """Stacked design with shared HF lag coefficients across positions."""
    if spec.kind is not ModelKind.POOLED:
        raise DataError(f"spec kind {spec.kind} does not match builder")
    p = spec.resolve_p(ds.m)
    lo, hi = _anchor_bounds(ds, p, spec.q_lf, spec.horizon)
    anchors = np.arange(lo, hi + 1)
    variables = spec.resolve_lf(ds)
    lf, lf_meta = _lf_block(ds, anchors, variables, spec.q_lf, with_dummies=True)
    hf = _hf_lags(ds, anchors, p)
    hf_meta = [Column(ROLE_HF, hf_lag=j) for j in range(1, p + 1)]
    X = np.column_stack([lf, hf]) if lf.size else hf
    return Design(
        target=ds.hf[anchors + spec.horizon - 1],
        X=X,
        columns=tuple(lf_meta + hf_meta),
        kind=spec.kind,
        horizon=spec.horizon,
        m=ds.m,
        anchors=anchors,
        first_used=_first_used(ds, anchors, p, spec.q_lf),
    )


def build_har(ds: MFDataset, spec: ModelSpec) -> Design:
    """Heterogeneous autoregression on the HF series: day, week, month means."""
    if spec.kind is not ModelKind.HAR:
        raise DataError(f"spec kind {spec.kind} does not match builder")
    lo, hi = _anchor_bounds(ds, 20, 0, spec.horizon)
    anchors = np.arange(lo, hi + 1)
    block, meta = _dwm_block(ds, anchors)
    if spec.include_intercept:
        X = np.column_stack([np.ones(anchors.size), block])
        meta = [Column(ROLE_INTERCEPT)] + meta
    else:
        X = block
    return Design(
        target=ds.hf[anchors + spec.horizon - 1],
        X=X,
        columns=tuple(meta),
        kind=spec.kind,
        horizon=spec.horizon,
        m=ds.m,
        anchors=anchors,
        first_used=anchors - 20,
    )


def build_pooled_dwm(ds: MFDataset, spec: ModelSpec) -> Design:
    """Pooled LF block combined with the day/week/month HF aggregates."""
    if spec.kind is not ModelKind.POOLED_DWM:
        raise DataError(f"spec kind {spec.kind} does not match builder")
    lo, hi = _anchor_bounds(ds, 20, spec.q_lf, spec.horizon)
    anchors = np.arange(lo, hi + 1)
    variables = spec.resolve_lf(ds)
    lf, lf_meta = _lf_block(ds, anchors, variables, spec.q_lf, with_dummies=True)
    block, hf_meta = _dwm_block(ds, anchors)
    X = np.column_stack([lf, block]) if lf.size else block
    return Design(
        target=ds.hf[anchors + spec.horizon - 1],
        X=X,
        columns=tuple(lf_meta + hf_meta),
        kind=spec.kind,
        horizon=spec.horizon,
        m=ds.m,
        anchors=anchors,
        first_used=_first_used(ds, anchors, 20, spec.q_lf),
    )


def build_design(ds: MFDataset, spec: ModelSpec, position: int | None = None) -> Design:
    """Dispatch to the builder for ``spec.kind``."""
    if spec.kind is ModelKind.RUMIDAS_EQ:
        if position is None:
            raise DataError("RUMIDAS_EQ requires a within-period position")
        return build_rumidas_eq(ds, spec, position)
    if spec.kind is ModelKind.RUMIDAS_DUMMY:
        return build_rumidas_dummy(ds, spec)
    if spec.kind is ModelKind.POOLED:
        return build_pooled(ds, spec)
    if spec.kind is ModelKind.HAR:
        return build_har(ds, spec)
    if spec.kind is ModelKind.POOLED_DWM:
        return build_pooled_dwm(ds, spec)
    raise DataError(f"unknown model kind {spec.kind}")


def center_scale(design: Design, do_scale: bool = True) -> tuple[Design, CenteringRecord]:
    """De-mean target and non-intercept columns, optionally scale to unit sd.

    Zero-variance columns are centered but flagged and left at scale 1.
    Returns the transformed design (with the record attached) and the
    record needed to map coefficients and predictions back.
    """
    if design.n_effective < 2:
        raise DataError("need at least 2 rows to center")
    X = design.X.copy()
    is_intercept = np.array([c.role == ROLE_INTERCEPT for c in design.columns])
    means = X.mean(axis=0)
    means[is_intercept] = 0.0
    X = X - means
    sds = X.std(axis=0)
    constant = (sds == 0.0) & ~is_intercept
    scales = np.ones_like(sds)
    if do_scale:
        ok = ~constant & ~is_intercept & (sds > 0)
        scales[ok] = sds[ok]
        X[:, ok] /= sds[ok]
    target_mean = float(design.target.mean())
    record = CenteringRecord(target_mean, means, scales, constant)
    centered = replace(
        design, target=design.target - target_mean, X=X, centering=record
    )
    return centered, record
