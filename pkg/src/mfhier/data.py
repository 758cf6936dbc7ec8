"""Data ingestion and mixed-frequency alignment.

A mixed-frequency dataset pairs one high-frequency (HF) series, observed m
times per low-frequency (LF) period, with K low-frequency series observed
once per period.  Raw inputs are stationarity-transformed with the usual
FRED-MD transformation codes and the HF series is forced onto a fixed grid
of exactly m observations per period before any regression design is built.
"""

from __future__ import annotations

import csv
import datetime as _dt
import logging
from dataclasses import dataclass
from typing import Callable, Hashable, Sequence

import numpy as np

from .errors import DataError

logger = logging.getLogger(__name__)

VALID_TCODES = (1, 2, 3, 4, 5, 6)


@dataclass(frozen=True)
class RawSeries:
    """A single time series as read from disk.

    Values may contain NaN for explicitly missing observations (e.g. the
    leading observations lost to differencing); timestamps must be strictly
    increasing and there must be at least two of them.
    """

    timestamps: tuple
    values: np.ndarray
    label: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "timestamps", tuple(self.timestamps))
        if len(self.timestamps) != len(values):
            raise DataError(
                f"series {self.label!r}: {len(self.timestamps)} timestamps "
                f"but {len(values)} values"
            )
        if len(values) < 2:
            raise DataError(f"series {self.label!r}: need at least 2 observations")
        for a, b in zip(self.timestamps, self.timestamps[1:]):
            if not a < b:
                raise DataError(
                    f"series {self.label!r}: timestamps not strictly increasing at {b}"
                )
        finite = np.isfinite(values) | np.isnan(values)
        if not finite.all():
            raise DataError(f"series {self.label!r}: values must be finite or NaN")

    def __len__(self) -> int:
        return len(self.values)


def apply_tcode(series: RawSeries, code: int) -> RawSeries:
    """Apply a stationarity transformation code to a series.

    Codes: 1 level, 2 first difference, 3 second difference, 4 log,
    5 log first difference, 6 log second difference.  Differencing loses
    leading observations, which are returned as NaN so downstream alignment
    can trim a common sample.
    """
    if code not in VALID_TCODES:
        raise DataError(f"series {series.label!r}: unknown transformation code {code}")
    x = series.values
    if code >= 4:
        bad = np.where(~np.isnan(x) & (x <= 0))[0]
        if bad.size:
            raise DataError(
                f"series {series.label!r}: non-positive value {x[bad[0]]} at index "
                f"{bad[0]} under a log transformation (code {code})"
            )
    if code == 1:
        out = x.copy()
    elif code == 2:
        out = _diff(x, 1)
    elif code == 3:
        out = _diff(x, 2)
    elif code == 4:
        out = np.log(x)
    elif code == 5:
        out = _diff(np.log(x), 1)
    else:
        out = _diff(np.log(x), 2)
    return RawSeries(series.timestamps, out, series.label)


def _diff(x: np.ndarray, order: int) -> np.ndarray:
    out = x.copy()
    for _ in range(order):
        out[1:] = out[1:] - out[:-1]
        out[0] = np.nan
        # keep one extra leading NaN per differencing round
        first = np.argmax(~np.isnan(out)) if (~np.isnan(out)).any() else len(out)
        out[:first] = np.nan
    return out


@dataclass(frozen=True)
class AlignedPanel:
    """HF observations arranged on a fixed (period x position) grid."""

    periods: tuple
    values: np.ndarray  # shape (T, m)
    log: tuple = ()

    @property
    def m(self) -> int:
        return self.values.shape[1]


def monthly_period(ts) -> str:
    """Default calendar: assign a date to its 'YYYY-MM' month."""
    return f"{ts.year:04d}-{ts.month:02d}"


def align_fixed_m(
    series: RawSeries,
    m: int,
    calendar: Callable[[object], Hashable] | Sequence[Hashable] = monthly_period,
    max_deviation: int = 5,
) -> AlignedPanel:
    """Force exactly m HF observations into every LF period.

    Periods with more than m observations drop the excess from the start of
    the period.  Periods with fewer insert linearly interpolated values at
    the start of the period, between the last value of the previous period
    and the first value of the current one.  A first period that is short
    and has no predecessor is padded by repeating its first value (logged as
    a warning).  Every insertion and deletion is recorded in the alignment
    log.
    """
    if m < 2:
        raise DataError("frequency mismatch m must be >= 2")
    if callable(calendar):
        keys = [calendar(ts) for ts in series.timestamps]
    else:
        keys = list(calendar)
        if len(keys) != len(series):
            raise DataError("calendar assignment length does not match series length")
    if np.isnan(series.values).any():
        raise DataError(
            f"series {series.label!r}: missing values must be resolved before alignment"
        )

    periods: list = []
    chunks: dict = {}
    for key, value in zip(keys, series.values):
        if key not in chunks:
            periods.append(key)
            chunks[key] = []
        elif key != periods[-1]:
            raise DataError(f"period {key!r} is not contiguous in time")
        chunks[key].append(float(value))

    log: list[dict] = []
    rows = np.empty((len(periods), m), dtype=float)
    prev_last: float | None = None
    for r, key in enumerate(periods):
        obs = chunks[key]
        count = len(obs)
        if abs(count - m) > max_deviation:
            raise DataError(
                f"period {key!r} has {count} observations; outside the sanity bound "
                f"[{m - max_deviation}, {m + max_deviation}]"
            )
        if count > m:
            for pos in range(count - m):
                log.append(
                    {"period": key, "action": "delete", "position": pos, "value": obs[pos]}
                )
            obs = obs[count - m:]
        elif count < m:
            missing = m - count
            first = obs[0]
            if prev_last is None:
                fills = [first] * missing
                logger.warning(
                    "period %r is short by %d with no predecessor; front-padded by "
                    "repeating its first value",
                    key,
                    missing,
                )
            else:
                step = (first - prev_last) / (missing + 1)
                fills = [prev_last + step * (j + 1) for j in range(missing)]
            for pos, value in enumerate(fills):
                log.append(
                    {"period": key, "action": "insert", "position": pos, "value": value}
                )
            obs = fills + obs
        rows[r] = obs
        prev_last = rows[r, -1]
    return AlignedPanel(tuple(periods), rows, tuple(log))


@dataclass(frozen=True)
class MFDataset:
    """Aligned mixed-frequency dataset.

    ``hf`` holds the high-frequency series flattened in time order, exactly
    m values per period, so observation n (0-based) belongs to period
    ``n // m`` at within-period position ``n % m + 1``.  ``lf`` holds one row
    per period and one column per low-frequency variable; row tau is the
    value observed at the end of period tau.
    """

    hf: np.ndarray
    lf: np.ndarray
    m: int
    labels: tuple[str, ...]
    periods: tuple = ()

    def __post_init__(self):
        hf = np.asarray(self.hf, dtype=float)
        lf = np.asarray(self.lf, dtype=float)
        if lf.ndim == 1:
            lf = lf[:, None]
        object.__setattr__(self, "hf", hf)
        object.__setattr__(self, "lf", lf)
        object.__setattr__(self, "labels", tuple(self.labels))
        if hf.ndim != 1:
            raise DataError("hf must be one-dimensional")
        if hf.size != lf.shape[0] * self.m:
            raise DataError(
                f"hf length {hf.size} != T*m = {lf.shape[0]}*{self.m}"
            )
        if lf.shape[1] != len(self.labels):
            raise DataError("number of labels does not match LF columns")
        if not np.isfinite(hf).all() or not np.isfinite(lf).all():
            raise DataError("dataset must not contain missing values")
        if self.periods and len(self.periods) != lf.shape[0]:
            raise DataError("period keys do not match the number of LF rows")

    @property
    def T(self) -> int:
        return self.lf.shape[0]

    @property
    def n_hf(self) -> int:
        return self.hf.size

    def period_of(self, n: int) -> int:
        return n // self.m

    def position_of(self, n: int) -> int:
        return n % self.m + 1

    def period_index(self) -> np.ndarray:
        """(T*m, 2) array mapping each HF index to (period, position), 1-based."""
        n = np.arange(self.n_hf)
        return np.column_stack([n // self.m + 1, n % self.m + 1])


def assemble(
    hf_aligned: AlignedPanel,
    lf_list: Sequence[RawSeries],
    m: int,
    calendar: Callable[[object], Hashable] = monthly_period,
) -> MFDataset:
    """Combine an aligned HF panel with transformed LF series.

    The sample is trimmed on both sides to the periods covered by every
    input; leading periods whose LF values are missing (lost to
    differencing) are dropped for all series.
    """
    if hf_aligned.m != m:
        raise DataError(f"aligned panel has m={hf_aligned.m}, expected {m}")
    per_series: list[dict] = []
    for s in lf_list:
        mapping: dict = {}
        for ts, v in zip(s.timestamps, s.values):
            key = calendar(ts)
            if key in mapping:
                raise DataError(f"series {s.label!r}: duplicate observation for {key!r}")
            mapping[key] = float(v)
        per_series.append(mapping)

    def has_all(key) -> bool:
        return all(key in mp and not np.isnan(mp[key]) for mp in per_series)

    common = [key for key in hf_aligned.periods if has_all(key)]
    if not common:
        raise DataError("no common periods across HF and LF inputs")
    # common periods must be one contiguous run of the HF panel
    first = hf_aligned.periods.index(common[0])
    run = hf_aligned.periods[first:first + len(common)]
    if list(run) != common:
        gaps = [k for k in run if k not in common]
        raise DataError(f"interior periods missing LF data: {gaps[:5]}")

    rows = hf_aligned.values[first:first + len(common)]
    lf = np.column_stack([[mp[k] for k in common] for mp in per_series])
    labels = tuple(s.label for s in lf_list)
    return MFDataset(rows.reshape(-1), lf, m, labels, tuple(common))


def simulate_pooled_rumidas(
    m: int,
    T: int,
    alpha: np.ndarray,
    beta: np.ndarray,
    lf_ar: float = 0.5,
    lf_scale: float = 1.0,
    noise_scale: float = 1.0,
    seed: int = 0,
    burn_in: int = 10,
    labels: Sequence[str] | None = None,
) -> tuple[MFDataset, dict]:
    """Generate a synthetic dataset from the pooled mixed-frequency model.

    Each LF variable follows an independent AR(1) with coefficient
    ``lf_ar`` and innovation scale ``lf_scale``.  The HF series is generated
    recursively: at HF index n with within-period position i, the mean is
    ``sum_v alpha[v, i] * y_v[period(n) - 1] + sum_j beta[j] * x[n - j]``
    plus Gaussian noise with scale ``noise_scale``.  Pre-sample values are
    zero and ``burn_in`` leading periods are discarded.

    Returns the dataset together with a dictionary of the true parameters.
    """
    alpha = np.atleast_2d(np.asarray(alpha, dtype=float))
    beta = np.asarray(beta, dtype=float)
    K = alpha.shape[0]
    if alpha.shape[1] != m:
        raise DataError(f"alpha must have m={m} coefficients per LF variable")
    if beta.size != m:
        raise DataError(f"beta must have m={m} coefficients")
    if np.abs(beta).sum() >= 1.0:
        raise DataError(
            f"unstable HF dynamics: sum |beta| = {np.abs(beta).sum():.4f} >= 1"
        )
    if labels is None:
        labels = tuple(f"lf{k + 1}" for k in range(K))
    labels = tuple(labels)
    if len(labels) != K:
        raise DataError("labels do not match the number of LF variables")

    rng = np.random.default_rng(seed)
    total = T + burn_in
    lf = np.zeros((total, K))
    eps_y = rng.normal(scale=lf_scale, size=(total, K))
    for t in range(total):
        prev = lf[t - 1] if t > 0 else np.zeros(K)
        lf[t] = lf_ar * prev + eps_y[t]

    n_total = total * m
    x = np.zeros(n_total)
    eps_x = rng.normal(scale=noise_scale, size=n_total) if noise_scale > 0 else np.zeros(n_total)
    lf_term = np.zeros((total, m))
    lf_term[1:] = lf[:-1] @ alpha  # position-specific effect of the previous period
    lf_term = lf_term.reshape(-1)
    nonzero = [(j, float(beta[j - 1])) for j in range(1, m + 1) if beta[j - 1] != 0.0]
    for n in range(n_total):
        mean = lf_term[n]
        for j, bj in nonzero:
            if n - j >= 0:
                mean += bj * x[n - j]
        x[n] = mean + eps_x[n]

    ds = MFDataset(
        x[burn_in * m:],
        lf[burn_in:],
        m,
        labels,
        tuple(f"p{t + 1:04d}" for t in range(T)),
    )
    truth = {
        "m": m,
        "T": T,
        "labels": list(labels),
        "alpha": alpha.tolist(),
        "beta": beta.tolist(),
        "lf_ar": lf_ar,
        "lf_scale": lf_scale,
        "noise_scale": noise_scale,
        "seed": seed,
        "burn_in": burn_in,
    }
    return ds, truth


# ---------------------------------------------------------------------------
# Dataset bundle persistence (CSV + JSON, full precision)


def write_dataset_bundle(ds: MFDataset, directory) -> list[str]:
    """Write a dataset as hf.csv / lf.csv / meta.json inside ``directory``.

    Numeric values use 17 significant digits so a round trip is bit-exact.
    Returns the file names written.
    """
    import json
    import os

    os.makedirs(directory, exist_ok=True)
    periods = ds.periods or tuple(f"p{t + 1:04d}" for t in range(ds.T))
    hf_path = os.path.join(directory, "hf.csv")
    with open(hf_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["period", "position", "value"])
        for n, v in enumerate(ds.hf):
            writer.writerow([periods[n // ds.m], n % ds.m + 1, format(v, ".17g")])
    lf_path = os.path.join(directory, "lf.csv")
    with open(lf_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["period"] + list(ds.labels))
        for t in range(ds.T):
            writer.writerow([periods[t]] + [format(v, ".17g") for v in ds.lf[t]])
    meta_path = os.path.join(directory, "meta.json")
    with open(meta_path, "w") as fh:
        json.dump(
            {"m": ds.m, "T": ds.T, "labels": list(ds.labels)},
            fh,
            sort_keys=True,
            indent=2,
        )
        fh.write("\n")
    return ["hf.csv", "lf.csv", "meta.json"]


def read_dataset_bundle(directory) -> MFDataset:
    """Load a dataset bundle written by :func:`write_dataset_bundle`."""
    import json
    import os

    with open(os.path.join(directory, "meta.json")) as fh:
        meta = json.load(fh)
    m, labels = int(meta["m"]), tuple(meta["labels"])
    periods: list = []
    hf_values: list[float] = []
    with open(os.path.join(directory, "hf.csv"), newline="") as fh:
        for row in csv.DictReader(fh):
            if not periods or periods[-1] != row["period"]:
                periods.append(row["period"])
            hf_values.append(float(row["value"]))
    lf_rows: list[list[float]] = []
    with open(os.path.join(directory, "lf.csv"), newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header[1:]) != labels:
            raise DataError(f"{directory}: lf.csv columns do not match meta.json")
        for row in reader:
            lf_rows.append([float(c) for c in row[1:]])
    return MFDataset(
        np.array(hf_values), np.array(lf_rows), m, labels, tuple(periods)
    )


# ---------------------------------------------------------------------------
# CSV ingestion


def read_hf_csv(path) -> RawSeries:
    """Read a high-frequency CSV with header ``date,value`` and ISO dates."""
    timestamps: list = []
    values: list[float] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header[:2]] != ["date", "value"]:
            raise DataError(f"{path}: expected header 'date,value'")
        for lineno, row in enumerate(reader, start=2):
            if not row or not row[0].strip():
                continue
            try:
                timestamps.append(_dt.date.fromisoformat(row[0].strip()))
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: bad date {row[0]!r}") from exc
            values.append(_parse_float(row[1], path, lineno))
    return RawSeries(tuple(timestamps), np.array(values), "hf")


def read_lf_csv(path) -> tuple[list[RawSeries], dict[str, int]]:
    """Read a low-frequency CSV in FRED-MD layout.

    The first row names the series; an optional second row (first cell
    empty, 'tcode' or 'transform') gives integer transformation codes.
    Returns the series in column order and the code mapping (empty if the
    file has none).
    """
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if any(c.strip() for c in row)]
    if len(rows) < 3:
        raise DataError(f"{path}: too few rows for a LF csv")
    header = [c.strip() for c in rows[0]]
    if header[0].lower() != "date":
        raise DataError(f"{path}: first column must be 'date'")
    names = header[1:]
    tcodes: dict[str, int] = {}
    body = rows[1:]
    marker = body[0][0].strip().lower()
    if marker in ("", "tcode", "transform"):
        for name, cell in zip(names, body[0][1:]):
            try:
                tcodes[name] = int(cell)
            except ValueError as exc:
                raise DataError(f"{path}: bad transformation code {cell!r} for {name}") from exc
        body = body[1:]
    timestamps = []
    data = []
    for lineno, row in enumerate(body, start=2):
        try:
            timestamps.append(_dt.date.fromisoformat(row[0].strip()))
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: bad date {row[0]!r}") from exc
        data.append([_parse_float(c, path, lineno, allow_empty=True) for c in row[1:]])
    matrix = np.array(data, dtype=float)
    if matrix.shape[1] != len(names):
        raise DataError(f"{path}: ragged rows")
    series = [
        RawSeries(tuple(timestamps), matrix[:, j], names[j]) for j in range(len(names))
    ]
    return series, tcodes


def _parse_float(cell: str, path, lineno: int, allow_empty: bool = False) -> float:
    cell = cell.strip()
    if not cell and allow_empty:
        return float("nan")
    try:
        return float(cell)
    except ValueError as exc:
        raise DataError(f"{path}:{lineno}: bad number {cell!r}") from exc
