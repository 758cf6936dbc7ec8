"""Rolling-window direct-forecast engine.

A window is a contiguous span of high-frequency observations.  For every
window, model and horizon, the design is restricted to rows whose data lie
entirely inside the window (centering statistics included), the model is
fitted on those rows only, and the forecast is made for the observation h
steps past the window end from the last in-window regressor values.  Nothing
outside the window can influence a forecast, so perturbing later data leaves
earlier forecasts bit-identical.

Forecast origins are indexed by the window end; all models share the same
origin grid at a given horizon, and evaluation always runs on the common
sample of origins where every model produced a forecast.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .data import MFDataset
from .design import Design, ModelKind, ModelSpec, ROLE_LF, build_design
from .errors import DataError, NumericalError
from .solver import (
    FitResult,
    GroupStructure,
    SolverConfig,
    fit_hierarchical,
    fit_ols,
    make_groups,
)

logger = logging.getLogger(__name__)

ESTIMATORS = ("hier", "ols")


@dataclass(frozen=True)
class ModelEntry:
    """One line of the model grid: a named (spec, estimator) pair."""

    name: str
    spec: ModelSpec
    estimator: str

    def __post_init__(self):
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"estimator must be one of {ESTIMATORS}")
        if self.estimator == "hier" and self.spec.kind in (
            ModelKind.HAR,
            ModelKind.RUMIDAS_DUMMY,
        ):
            raise ValueError(f"{self.spec.kind.value} is estimated by OLS only")


@dataclass(frozen=True)
class BacktestSpec:
    """Rolling-window layout and the model grid to run."""

    models: tuple[ModelEntry, ...]
    window_length: int = 1200
    horizons: tuple[int, ...] = (1, 5, 20, 40, 60, 120)
    step: int = 1
    refit_every: int = 1

    def __post_init__(self):
        if not self.models:
            raise ValueError("no models configured")
        if len({m.name for m in self.models}) != len(self.models):
            raise ValueError("model names must be unique")
        if any(h < 1 for h in self.horizons) or not self.horizons:
            raise ValueError("horizons must be positive")
        if self.step < 1 or self.refit_every < 1:
            raise ValueError("step and refit_every must be >= 1")

    def validate_for(self, ds: MFDataset) -> None:
        if self.window_length % ds.m != 0:
            raise DataError(
                f"window length {self.window_length} is not a multiple of m={ds.m}"
            )
        need = self.window_length + max(self.horizons)
        if need > ds.n_hf:
            raise DataError(
                f"window plus max horizon needs {need} HF observations, "
                f"data has {ds.n_hf}"
            )


@dataclass(frozen=True)
class ForecastEntry:
    forecast: float
    realized: float

    @property
    def error(self) -> float:
        return self.realized - self.forecast

    @property
    def abs_loss(self) -> float:
        return abs(self.error)

    @property
    def sq_loss(self) -> float:
        return self.error * self.error


@dataclass(frozen=True)
class FitRecord:
    """Per-(model, horizon, origin) fit diagnostics for the selection report."""

    model: str
    horizon: int
    origin: int
    failed: bool = False
    message: str = ""
    n_active: int = 0
    lf_active: bool = False
    lambda_: float | None = None
    refit: bool = True


@dataclass
class ForecastTable:
    """Forecasts, realizations and losses keyed by (model, horizon, origin)."""

    entries: dict = field(default_factory=dict)

    def add(self, model: str, horizon: int, origin: int, forecast: float, realized: float):
        self.entries[(model, horizon, origin)] = ForecastEntry(
            float(forecast), float(realized)
        )

    def models(self) -> list[str]:
        return sorted({k[0] for k in self.entries})

    def horizons(self) -> list[int]:
        return sorted({k[1] for k in self.entries})

    def origins(self, model: str, horizon: int) -> list[int]:
        return sorted(o for (mdl, h, o) in self.entries if mdl == model and h == horizon)

    def common_origins(self, horizon: int, models: Sequence[str] | None = None) -> list[int]:
        models = list(models) if models is not None else self.models()
        sets = [set(self.origins(mdl, horizon)) for mdl in models]
        sets = [s for s in sets if s]
        if not sets:
            return []
        return sorted(set.intersection(*sets))

    def errors(self, model: str, horizon: int, origins: Iterable[int]) -> np.ndarray:
        return np.array(
            [self.entries[(model, horizon, o)].error for o in origins], dtype=float
        )

    def loss_matrix(
        self,
        horizon: int,
        models: Sequence[str] | None = None,
        loss: str = "MAFE",
    ) -> tuple[list[int], list[str], np.ndarray]:
        """Per-origin losses on the common sample, one column per model."""
        models = list(models) if models is not None else self.models()
        origins = self.common_origins(horizon, models)
        if not origins:
            raise DataError(f"no common forecast origins at horizon {horizon}")
        errs = np.column_stack([self.errors(mdl, horizon, origins) for mdl in models])
        if loss.upper() == "MAFE":
            return origins, models, np.abs(errs)
        if loss.upper() == "RMSFE":
            return origins, models, errs**2
        raise ValueError(f"unknown loss {loss!r}")

    def to_records(self) -> list[tuple]:
        out = []
        for (model, h, origin) in sorted(self.entries):
            e = self.entries[(model, h, origin)]
            out.append((model, h, origin, e.forecast, e.realized, e.error))
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["model", "horizon", "origin", "forecast", "realized", "error"])
            for model, h, origin, fc, rz, err in self.to_records():
                writer.writerow(
                    [model, h, origin, _fmt(fc), _fmt(rz), _fmt(err)]
                )

    @classmethod
    def read_csv(cls, path) -> "ForecastTable":
        table = cls()
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            required = {"model", "horizon", "origin", "forecast", "realized"}
            if reader.fieldnames is None or not required.issubset(reader.fieldnames):
                raise DataError(f"{path}: not a forecast table")
            for row in reader:
                table.add(
                    row["model"],
                    int(row["horizon"]),
                    int(row["origin"]),
                    float(row["forecast"]),
                    float(row["realized"]),
                )
        return table


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def loss_summary(table: ForecastTable, loss: str = "MAFE") -> dict[tuple[str, int], float]:
    """MAFE or RMSFE per (model, horizon), evaluated on the common sample."""
    out: dict[tuple[str, int], float] = {}
    for h in table.horizons():
        origins, models, losses = table.loss_matrix(h, loss=loss)
        means = losses.mean(axis=0)
        for mdl, v in zip(models, means):
            out[(mdl, h)] = float(np.sqrt(v)) if loss.upper() == "RMSFE" else float(v)
    return out


def selection_frequency(records: Sequence[FitRecord]) -> dict[tuple[str, int], float]:
    """Share of windows (in percent) with at least one active LF coefficient."""
    counts: dict[tuple[str, int], list[int]] = {}
    for rec in records:
        if rec.failed:
            continue
        hit, total = counts.setdefault((rec.model, rec.horizon), [0, 0])
        counts[(rec.model, rec.horizon)] = [hit + int(rec.lf_active), total + 1]
    return {
        key: 100.0 * hit / total for key, (hit, total) in counts.items() if total > 0
    }


# ---------------------------------------------------------------------------
# Backtest engine


def _row_slice(design: Design, lo: int, hi: int) -> Design:
    """Rows lo..hi inclusive, as a design of its own."""
    sl = slice(lo, hi + 1)
    return replace(
        design,
        target=design.target[sl],
        X=design.X[sl],
        anchors=design.anchors[sl],
        first_used=design.first_used[sl],
    )


class _ModelRunner:
    """Per-(model, horizon) fitting state: design, groups, cached fit."""

    def __init__(
        self,
        ds: MFDataset,
        entry: ModelEntry,
        horizon: int,
        config: SolverConfig,
        post_ols: bool = True,
    ):
        self.ds = ds
        self.entry = entry
        self.horizon = horizon
        self.config = config
        self.post_ols = post_ols
        self.spec = replace(entry.spec, horizon=horizon)
        self._designs: dict[int | None, Design] = {}
        self._groups: dict[int | None, GroupStructure] = {}
        self._lf_cols: dict[int | None, np.ndarray] = {}
        self._last_fit: dict[int | None, FitResult] = {}
        self.windows_seen = 0

    def _design_for(self, position: int | None) -> Design:
        if position not in self._designs:
            design = build_design(self.ds, self.spec, position)
            self._designs[position] = design
            self._lf_cols[position] = np.array(
                [i for i, c in enumerate(design.columns) if c.role == ROLE_LF],
                dtype=int,
            )
            if self.entry.estimator == "hier":
                self._groups[position] = make_groups(self.spec, design.columns)
        return self._designs[position]

    def forecast(self, window_start: int, window_end: int, refit_every: int):
        """Fit on the window and forecast h steps past its end.

        Returns (forecast, realized, FitRecord).
        """
        ds, h = self.ds, self.horizon
        anchor = window_end + 1
        position = (
            anchor % ds.m + 1 if self.spec.kind is ModelKind.RUMIDAS_EQ else None
        )
        design = self._design_for(position)

        idx = int(np.searchsorted(design.anchors, anchor))
        if idx >= design.n_effective or design.anchors[idx] != anchor:
            raise DataError(f"no design row at forecast anchor {anchor}")
        x_row = design.X[idx]
        realized = float(design.target[idx])

        refit = (
            position not in self._last_fit
            or self.windows_seen % refit_every == 0
        )
        if refit:
            lo = int(np.searchsorted(design.first_used, window_start, side="left"))
            hi = int(np.searchsorted(design.anchors, window_end - h + 1, side="right")) - 1
            if hi - lo + 1 < 2:
                raise DataError("window too short for this model")
            sub = _row_slice(design, lo, hi)
            if self.entry.estimator == "hier":
                fit = fit_hierarchical(
                    sub,
                    groups=self._groups[position],
                    config=self.config,
                    post_ols=self.post_ols,
                )
            elif self.spec.kind is ModelKind.HAR:
                fit = fit_ols(sub, center=False)
            else:
                fit = fit_ols(sub, center=True)
            self._last_fit[position] = fit
        fit = self._last_fit[position]

        lf_cols = self._lf_cols[position]
        record = FitRecord(
            model=self.entry.name,
            horizon=h,
            origin=window_end,
            n_active=int(np.count_nonzero(fit.coefficients)),
            lf_active=bool(np.any(fit.coefficients[lf_cols] != 0.0)),
            lambda_=fit.lambda_,
            refit=refit,
        )
        return float(fit.predict(x_row[None, :])[0]), realized, record


def rolling_backtest(
    ds: MFDataset,
    spec: BacktestSpec,
    config: SolverConfig | None = None,
    post_ols: bool = True,
) -> tuple[ForecastTable, list[FitRecord]]:
    """Run the full rolling-window exercise.

    Windows advance by ``spec.step`` HF observations; at each origin (the
    window end) every configured model is re-fitted on window data only and
    forecasts the observation ``h`` steps ahead.  Failed fits are logged and
    excluded; all successful entries at a horizon share the same origin grid.
    ``post_ols=False`` forecasts from the shrunken coefficients instead of
    the post-selection refit.
    """
    config = config or SolverConfig()
    spec.validate_for(ds)
    W = spec.window_length
    table = ForecastTable()
    records: list[FitRecord] = []
    for entry in spec.models:
        for h in sorted(spec.horizons):
            runner = _ModelRunner(ds, entry, h, config, post_ols=post_ols)
            last_start = ds.n_hf - W - h
            for start in range(0, last_start + 1, spec.step):
                end = start + W - 1
                try:
                    fc, realized, record = runner.forecast(start, end, spec.refit_every)
                except (DataError, NumericalError, np.linalg.LinAlgError) as exc:
                    records.append(
                        FitRecord(entry.name, h, end, failed=True, message=str(exc))
                    )
                    logger.warning(
                        "fit failed for %s h=%d origin=%d: %s", entry.name, h, end, exc
                    )
                else:
                    table.add(entry.name, h, end, fc, realized)
                    records.append(record)
                runner.windows_seen += 1
    return table, records
