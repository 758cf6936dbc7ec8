"""Command line front end: ``mfh``.

Subcommands wire the pipeline stages together through an ``out/`` directory:

    mfh transform   raw LF csv  -> out/transform/  (stationarity transforms)
    mfh align       raw HF csv  -> out/align/      (fixed-m dataset bundle)
    mfh simulate    synthetic dataset bundle       (written to out/align/)
    mfh backtest    bundle      -> out/backtest/   (forecasts, losses, fit log)
    mfh evaluate    forecasts   -> out/evaluate/   (DM matrix, MCS, tables)
    mfh report      summaries   -> out/report/     (markdown tables)

Settings come from an INI config file; command-line flags override config
keys, which override defaults.  Every command writes a manifest with input
hashes, the effective-config hash and the seed, and outputs are written
atomically.  All numeric CSV output carries 17 significant digits.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import datetime as _dt
import hashlib
import io
import json
import logging
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .data import (
    align_fixed_m,
    apply_tcode,
    assemble,
    monthly_period,
    read_dataset_bundle,
    read_hf_csv,
    read_lf_csv,
    simulate_pooled_rumidas,
    write_dataset_bundle,
)
from .design import ModelKind, ModelSpec
from .errors import DataError, NumericalError
from .evalstats import dm_test, mcs
from .forecast import (
    BacktestSpec,
    ForecastTable,
    ModelEntry,
    loss_summary,
    rolling_backtest,
)
from .solver import SolverConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# Configuration

DEFAULTS: dict[str, dict[str, str]] = {
    "data": {"m": "20", "log_hf": "false", "tcode_overrides": ""},
    "simulate": {
        "m": "20",
        "t": "120",
        "labels": "lf1",
        "beta": "0.4 0.2 0.1 0.05",
        "lf_ar": "0.5",
        "lf_scale": "1.0",
        "noise_scale": "1.0",
        "seed": "0",
        "burn_in": "10",
    },
    "models": {"models": "har, pooled-hier:all"},
    "backtest": {
        "window": "1200",
        "horizons": "1 5 20 40 60 120",
        "step": "1",
        "refit_every": "1",
    },
    "solver": {
        "n_lambda": "50",
        "lambda_min_ratio": "1e-3",
        "max_iterations": "10000",
        "tolerance": "1e-8",
        "acceleration": "true",
        "post_ols": "true",
    },
    "evaluate": {
        "alpha": "0.25",
        "reps": "5000",
        "block_length": "auto",
        "seed": "0",
        "loss": "MAFE",
    },
    "output": {"dir": "out"},
}


class RunConfig:
    """Layered settings: command-line flags > config file > defaults."""

    def __init__(self, values: dict[tuple[str, str], str]):
        self.values = values

    @classmethod
    def load(cls, path: str | None, overrides: dict[tuple[str, str], str]) -> "RunConfig":
        values: dict[tuple[str, str], str] = {
            (s, k): v for s, sec in DEFAULTS.items() for k, v in sec.items()
        }
        if path is not None:
            if not os.path.exists(path):
                raise DataError(f"config file not found: {path}")
            parser = configparser.ConfigParser(interpolation=None)
            try:
                parser.read(path)
            except configparser.Error as exc:
                raise UsageError(f"bad config file {path}: {exc}") from exc
            for section in parser.sections():
                for key, value in parser.items(section):
                    values[(section.lower(), key)] = value.strip()
        for (section, key), value in overrides.items():
            if value is not None:
                values[(section.lower(), key.lower())] = str(value)
        return cls(values)

    def get(self, section: str, key: str, default: str | None = None) -> str:
        # configparser lowercases option names; canonicalize lookups the same way
        section, key = section.lower(), key.lower()
        if (section, key) in self.values:
            return self.values[(section, key)]
        if default is not None:
            return default
        raise UsageError(f"missing config key [{section}] {key}")

    def get_int(self, section: str, key: str) -> int:
        raw = self.get(section, key)
        try:
            return int(raw)
        except ValueError as exc:
            raise UsageError(f"[{section}] {key} must be an integer, got {raw!r}") from exc

    def get_float(self, section: str, key: str) -> float:
        raw = self.get(section, key)
        try:
            return float(raw)
        except ValueError as exc:
            raise UsageError(f"[{section}] {key} must be a number, got {raw!r}") from exc

    def get_bool(self, section: str, key: str) -> bool:
        raw = self.get(section, key).lower()
        if raw in ("1", "true", "yes", "on"):
            return True
        if raw in ("0", "false", "no", "off"):
            return False
        raise UsageError(f"[{section}] {key} must be a boolean, got {raw!r}")

    def get_ints(self, section: str, key: str) -> tuple[int, ...]:
        raw = self.get(section, key).replace(",", " ")
        try:
            return tuple(int(tok) for tok in raw.split())
        except ValueError as exc:
            raise UsageError(f"[{section}] {key} must be integers, got {raw!r}") from exc

    def get_floats(self, section: str, key: str) -> tuple[float, ...]:
        raw = self.get(section, key, " ").replace(",", " ")
        return tuple(float(tok) for tok in raw.split())

    def out_dir(self, stage: str) -> str:
        return os.path.join(self.get("output", "dir"), stage)

    def digest(self) -> str:
        lines = [f"{s}.{k}={v}" for (s, k), v in sorted(self.values.items())]
        return hashlib.sha256("\n".join(lines).encode()).hexdigest()

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            max_iterations=self.get_int("solver", "max_iterations"),
            tolerance=self.get_float("solver", "tolerance"),
            acceleration=self.get_bool("solver", "acceleration"),
            n_lambda=self.get_int("solver", "n_lambda"),
            lambda_min_ratio=self.get_float("solver", "lambda_min_ratio"),
        )


# ---------------------------------------------------------------------------
# Output helpers


def _write_atomic(path: str, data: str) -> None:
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(
    directory: str,
    command: str,
    config: RunConfig,
    inputs: list[str],
    outputs: list[str],
    seed: int | None = None,
) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "config_hash": config.digest(),
        "seed": seed,
        "inputs": {os.path.basename(p): _sha256(p) for p in inputs if os.path.isfile(p)},
        "input_dirs": {
            p: sorted(os.listdir(p)) for p in inputs if os.path.isdir(p)
        },
        "outputs": sorted(outputs),
    }
    _write_atomic(
        os.path.join(directory, "manifest.json"),
        json.dumps(manifest, sort_keys=True, indent=2) + "\n",
    )


def _csv_text(rows: list[list]) -> str:
    buf = io.StringIO()
    csv.writer(buf).writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Model grid parsing

_KIND_TOKENS = {
    "pooled": ModelKind.POOLED,
    "eq": ModelKind.RUMIDAS_EQ,
    "dwm": ModelKind.POOLED_DWM,
    "dummy": ModelKind.RUMIDAS_DUMMY,
}


def parse_model_token(token: str, labels: tuple[str, ...]) -> ModelEntry:
    """One grid entry, e.g. ``har``, ``pooled-hier:all`` or ``eq-ols:Cpi+Vix``."""
    token = token.strip()
    if not token:
        raise UsageError("empty model token")
    if token == "har":
        return ModelEntry(
            "har", ModelSpec(kind=ModelKind.HAR, include_intercept=True), "ols"
        )
    head, _, var_part = token.partition(":")
    try:
        kind_tok, estimator = head.split("-", 1)
        kind = _KIND_TOKENS[kind_tok]
    except (ValueError, KeyError) as exc:
        raise UsageError(
            f"bad model token {token!r}; expected har or "
            "{pooled|eq|dwm|dummy}-{hier|ols}[:VAR[+VAR...]|all]"
        ) from exc
    if estimator not in ("hier", "ols"):
        raise UsageError(f"bad estimator in model token {token!r}")
    if not var_part or var_part == "all":
        variables = None
    else:
        variables = tuple(v.strip() for v in var_part.split("+"))
        missing = [v for v in variables if v not in labels]
        if missing:
            raise DataError(f"model {token!r} names unknown LF variables {missing}")
    spec = ModelSpec(kind=kind, lf_variables=variables)
    try:
        return ModelEntry(token, spec, estimator)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def parse_model_grid(config: RunConfig, labels: tuple[str, ...]) -> tuple[ModelEntry, ...]:
    tokens = [t for t in config.get("models", "models").split(",") if t.strip()]
    if not tokens:
        raise UsageError("no models configured")
    return tuple(parse_model_token(tok, labels) for tok in tokens)


# ---------------------------------------------------------------------------
# Commands


def cmd_transform(config: RunConfig) -> int:
    lf_path = config.get("data", "lf_csv")
    series_list, file_codes = read_lf_csv(lf_path)
    overrides = {}
    raw = config.get("data", "tcode_overrides", " ").replace(",", " ")
    for tok in raw.split():
        name, _, code = tok.partition("=")
        if not code:
            raise UsageError(f"bad tcode override {tok!r}; expected NAME=CODE")
        overrides[name] = int(code)
    out_rows: list[list] = []
    provenance = {}
    transformed = []
    for s in series_list:
        code = overrides.get(s.label, file_codes.get(s.label, 1))
        if code not in (1, 2, 3, 4, 5, 6):
            raise DataError(f"column {s.label!r}: unknown transformation code {code}")
        provenance[s.label] = {
            "code": code,
            "source": "override" if s.label in overrides else (
                "file" if s.label in file_codes else "default"
            ),
        }
        transformed.append(apply_tcode(s, code))
    header = ["date"] + [s.label for s in transformed]
    out_rows.append(header)
    for i, ts in enumerate(transformed[0].timestamps):
        row = [ts.isoformat()]
        for s in transformed:
            v = s.values[i]
            row.append("" if np.isnan(v) else _fmt(v))
        out_rows.append(row)
    out = config.out_dir("transform")
    os.makedirs(out, exist_ok=True)
    _write_atomic(os.path.join(out, "lf_transformed.csv"), _csv_text(out_rows))
    _write_atomic(
        os.path.join(out, "transform_provenance.json"),
        json.dumps(provenance, sort_keys=True, indent=2) + "\n",
    )
    _write_manifest(
        out, "transform", config, [lf_path],
        ["lf_transformed.csv", "transform_provenance.json"],
    )
    print(f"transform: wrote {out}/lf_transformed.csv ({len(transformed)} columns)")
    return EXIT_OK


def cmd_align(config: RunConfig) -> int:
    hf_path = config.get("data", "hf_csv")
    m = config.get_int("data", "m")
    hf = read_hf_csv(hf_path)
    if config.get_bool("data", "log_hf"):
        hf = apply_tcode(hf, 4)
    panel = align_fixed_m(hf, m, monthly_period)
    lf_file = os.path.join(config.out_dir("transform"), "lf_transformed.csv")
    if not os.path.exists(lf_file):
        lf_file = config.get("data", "lf_csv")
    series_list, codes = read_lf_csv(lf_file)
    if codes:
        raise DataError(
            f"{lf_file} still carries transformation codes; run 'mfh transform' first"
        )
    ds = assemble(panel, series_list, m, monthly_period)
    out = config.out_dir("align")
    files = write_dataset_bundle(ds, out)
    _write_atomic(
        os.path.join(out, "alignment_log.json"),
        json.dumps(list(panel.log), sort_keys=True, indent=2) + "\n",
    )
    _write_manifest(
        out, "align", config, [hf_path, lf_file], files + ["alignment_log.json"]
    )
    print(
        f"align: {ds.T} periods x m={ds.m}, {len(ds.labels)} LF variables, "
        f"{len(panel.log)} alignment edits -> {out}"
    )
    return EXIT_OK


def cmd_simulate(config: RunConfig) -> int:
    m = config.get_int("simulate", "m")
    T = config.get_int("simulate", "T")
    seed = config.get_int("simulate", "seed")
    labels = tuple(config.get("simulate", "labels").replace(",", " ").split())
    beta = np.zeros(m)
    given = config.get_floats("simulate", "beta")
    if len(given) > m:
        raise UsageError(f"beta has {len(given)} entries but m={m}")
    beta[: len(given)] = given
    alpha = np.zeros((len(labels), m))
    for k, label in enumerate(labels):
        row = config.get_floats("simulate", f"alpha_{label}")
        if len(row) > m:
            raise UsageError(f"alpha_{label} has {len(row)} entries but m={m}")
        alpha[k, : len(row)] = row
    ds, truth = simulate_pooled_rumidas(
        m,
        T,
        alpha,
        beta,
        lf_ar=config.get_float("simulate", "lf_ar"),
        lf_scale=config.get_float("simulate", "lf_scale"),
        noise_scale=config.get_float("simulate", "noise_scale"),
        seed=seed,
        burn_in=config.get_int("simulate", "burn_in"),
        labels=labels,
    )
    out = config.out_dir("align")
    files = write_dataset_bundle(ds, out)
    _write_atomic(
        os.path.join(out, "truth.json"),
        json.dumps(truth, sort_keys=True, indent=2) + "\n",
    )
    _write_manifest(out, "simulate", config, [], files + ["truth.json"], seed=seed)
    print(f"simulate: T={T}, m={m}, {len(labels)} LF variables -> {out}")
    return EXIT_OK


def cmd_backtest(config: RunConfig) -> int:
    bundle_dir = config.out_dir("align")
    ds = read_dataset_bundle(bundle_dir)
    models = parse_model_grid(config, ds.labels)
    try:
        spec = BacktestSpec(
            models=models,
            window_length=config.get_int("backtest", "window"),
            horizons=config.get_ints("backtest", "horizons"),
            step=config.get_int("backtest", "step"),
            refit_every=config.get_int("backtest", "refit_every"),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    table, records = rolling_backtest(
        ds, spec, config.solver_config(),
        post_ols=config.get_bool("solver", "post_ols"),
    )
    out = config.out_dir("backtest")
    os.makedirs(out, exist_ok=True)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["model", "horizon", "origin", "forecast", "realized", "error"])
    for model, h, origin, fc, rz, err in table.to_records():
        writer.writerow([model, h, origin, _fmt(fc), _fmt(rz), _fmt(err)])
    _write_atomic(os.path.join(out, "forecasts.csv"), buf.getvalue())

    log_rows = [
        ["model", "horizon", "origin", "failed", "message", "n_active", "lf_active",
         "lambda", "refit"]
    ]
    for r in sorted(records, key=lambda r: (r.model, r.horizon, r.origin)):
        log_rows.append(
            [
                r.model,
                r.horizon,
                r.origin,
                int(r.failed),
                r.message,
                r.n_active,
                int(r.lf_active),
                "" if r.lambda_ is None else _fmt(r.lambda_),
                int(r.refit),
            ]
        )
    _write_atomic(os.path.join(out, "fitlog.csv"), _csv_text(log_rows))

    loss_kind = config.get("evaluate", "loss").upper()
    payload = _summary_payload(table, [m.name for m in models], loss_kind)
    _write_atomic(
        os.path.join(out, "summary.json"),
        json.dumps(payload, sort_keys=True, indent=2) + "\n",
    )
    failures = [r for r in records if r.failed]
    if failures:
        _write_atomic(
            os.path.join(out, "failures.json"),
            json.dumps(
                [
                    {"model": r.model, "horizon": r.horizon, "origin": r.origin,
                     "message": r.message}
                    for r in failures
                ],
                sort_keys=True,
                indent=2,
            ) + "\n",
        )
    outputs = ["forecasts.csv", "fitlog.csv", "summary.json"] + (
        ["failures.json"] if failures else []
    )
    _write_manifest(out, "backtest", config, [bundle_dir], outputs)
    n_fc = len(table.entries)
    print(
        f"backtest: {n_fc} forecasts over {len(models)} models x "
        f"{len(spec.horizons)} horizons ({len(failures)} failures) -> {out}"
    )
    return EXIT_OK


def _read_fitlog(path: str) -> list[dict]:
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append(row)
    return rows


def cmd_evaluate(config: RunConfig) -> int:
    backtest_dir = config.out_dir("backtest")
    fc_path = os.path.join(backtest_dir, "forecasts.csv")
    table = ForecastTable.read_csv(fc_path)
    alpha = config.get_float("evaluate", "alpha")
    reps = config.get_int("evaluate", "reps")
    seed = config.get_int("evaluate", "seed")
    block_raw = config.get("evaluate", "block_length")
    block_length = None if block_raw == "auto" else int(block_raw)
    loss_kind = config.get("evaluate", "loss").upper()

    dm_rows = [["horizon", "model1", "model2", "statistic", "p_value", "n", "hac_lag"]]
    mcs_report: dict[str, dict] = {}
    for h in table.horizons():
        try:
            origins, models, losses = table.loss_matrix(h, loss=loss_kind)
        except DataError as exc:
            raise DataError(
                f"{exc}; the forecast table mixes incompatible origin grids, "
                "rerun 'mfh backtest' so all models share origins"
            ) from exc
        dropped = {
            m: len(table.origins(m, h)) - len(origins) for m in models
        }
        if any(dropped.values()):
            logger.warning(
                "horizon %d: dropped origins per model (failed fits): %s", h, dropped
            )
        for i in range(len(models)):
            for j in range(i + 1, len(models)):
                res = dm_test(losses[:, i], losses[:, j], h=h)
                dm_rows.append(
                    [
                        h,
                        models[i],
                        models[j],
                        _fmt(res.statistic),
                        _fmt(res.p_value),
                        res.n,
                        res.hac_lag,
                    ]
                )
        result = mcs(
            losses, alpha=alpha, reps=reps, block_length=block_length, seed=seed
        )
        mcs_report[str(h)] = {
            "alpha": alpha,
            "B": reps,
            "block_length": result.block_length,
            "survivors": [models[i] for i in result.survivors],
            "p_values": {
                models[i]: float(result.p_values[i]) for i in range(len(models))
            },
        }
    out = config.out_dir("evaluate")
    os.makedirs(out, exist_ok=True)
    _write_atomic(os.path.join(out, "dm_tests.csv"), _csv_text(dm_rows))
    _write_atomic(
        os.path.join(out, "mcs.json"),
        json.dumps(mcs_report, sort_keys=True, indent=2) + "\n",
    )

    freq_rows = [["model", "horizon", "selection_pct"]]
    freq: dict[str, dict[int, float]] = {}
    fitlog_path = os.path.join(backtest_dir, "fitlog.csv")
    if os.path.exists(fitlog_path):
        records = _read_fitlog(fitlog_path)
        counts: dict[tuple[str, int], list[int]] = {}
        for row in records:
            if row["failed"] == "1":
                continue
            key = (row["model"], int(row["horizon"]))
            hit, total = counts.setdefault(key, [0, 0])
            counts[key] = [hit + int(row["lf_active"] == "1"), total + 1]
        for (model, h), (hit, total) in sorted(counts.items()):
            pct = 100.0 * hit / total
            freq_rows.append([model, h, _fmt(pct)])
            freq.setdefault(model, {})[h] = pct
    _write_atomic(os.path.join(out, "selection_frequency.csv"), _csv_text(freq_rows))

    summary = _summary_payload(table, table.models(), loss_kind)
    md = _render_report(summary, mcs_report, freq)
    _write_atomic(os.path.join(out, "evaluation.md"), md)
    _write_manifest(
        out,
        "evaluate",
        config,
        [fc_path, fitlog_path],
        ["dm_tests.csv", "mcs.json", "selection_frequency.csv", "evaluation.md"],
        seed=seed,
    )
    print(f"evaluate: DM + {100 * (1 - alpha):.0f}% MCS for "
          f"{len(table.models())} models -> {out}")
    return EXIT_OK


def cmd_report(config: RunConfig) -> int:
    backtest_dir = config.out_dir("backtest")
    evaluate_dir = config.out_dir("evaluate")
    summary_path = os.path.join(backtest_dir, "summary.json")
    if not os.path.exists(summary_path):
        raise DataError(f"missing {summary_path}; run 'mfh backtest' first")
    with open(summary_path) as fh:
        summary = json.load(fh)
    mcs_report = {}
    mcs_path = os.path.join(evaluate_dir, "mcs.json")
    if os.path.exists(mcs_path):
        with open(mcs_path) as fh:
            mcs_report = json.load(fh)
    freq: dict[str, dict[int, float]] = {}
    freq_path = os.path.join(evaluate_dir, "selection_frequency.csv")
    if os.path.exists(freq_path):
        with open(freq_path, newline="") as fh:
            for row in csv.DictReader(fh):
                freq.setdefault(row["model"], {})[int(row["horizon"])] = float(
                    row["selection_pct"]
                )
    md = _render_report(summary, mcs_report, freq)
    out = config.out_dir("report")
    os.makedirs(out, exist_ok=True)
    _write_atomic(os.path.join(out, "report.md"), md)
    _write_manifest(out, "report", config, [backtest_dir, evaluate_dir], ["report.md"])
    print(f"report: wrote {out}/report.md")
    return EXIT_OK


def _summary_payload(table: ForecastTable, model_order, loss_kind: str) -> dict:
    """Loss matrix in the models-by-horizons layout used by summary.json."""
    summary = loss_summary(table, loss_kind)
    matrix: dict[str, dict[str, float]] = {}
    for (model, h), value in summary.items():
        matrix.setdefault(model, {})[str(h)] = value
    return {
        "loss": loss_kind,
        "horizons": sorted(table.horizons()),
        "models": list(model_order),
        "values": matrix,
    }


def _render_report(summary: dict, mcs_report: dict, freq: dict) -> str:
    """Markdown loss table (MCS members in bold) plus selection frequencies."""
    horizons = summary["horizons"]
    models = summary["models"]
    lines = [
        f"# Forecast comparison ({summary['loss']})",
        "",
        "Entries in **bold** are members of the Model Confidence Set at the",
        "configured level.",
        "",
        "| model | " + " | ".join(f"h={h}" for h in horizons) + " |",
        "|" + "---|" * (len(horizons) + 1),
    ]
    for model in models:
        cells = []
        for h in horizons:
            value = summary["values"].get(model, {}).get(str(h))
            if value is None:
                cells.append("-")
                continue
            text = f"{value:.4f}"
            members = mcs_report.get(str(h), {}).get("survivors", [])
            cells.append(f"**{text}**" if model in members else text)
        lines.append(f"| {model} | " + " | ".join(cells) + " |")
    lines.append("")
    if freq:
        lines += [
            "## Share of windows selecting any low-frequency variable (%)",
            "",
            "| model | " + " | ".join(f"h={h}" for h in horizons) + " |",
            "|" + "---|" * (len(horizons) + 1),
        ]
        for model in models:
            row = freq.get(model)
            if row is None:
                continue
            cells = [f"{row[h]:.2f}" if h in row else "-" for h in horizons]
            lines.append(f"| {model} | " + " | ".join(cells) + " |")
        lines.append("")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="mfh", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="INI config file")
        p.add_argument("--out", help="output directory root")
        p.add_argument("--seed", type=int, help="seed for stochastic steps")
        p.add_argument("--m", type=int, help="HF observations per LF period")
        p.add_argument("--window", type=int, help="rolling window length")
        p.add_argument("--horizons", help="forecast horizons, e.g. '1 5 20'")

    p = sub.add_parser("transform", help="apply stationarity transformations")
    add_common(p)
    p.add_argument("--lf", help="low-frequency CSV")
    p.add_argument("--tcode", action="append", default=[],
                   help="override, NAME=CODE (repeatable)")

    p = sub.add_parser("align", help="align the HF series to fixed m and assemble")
    add_common(p)
    p.add_argument("--hf", help="high-frequency CSV (date,value)")
    p.add_argument("--lf", help="low-frequency CSV (used if no transform output)")
    p.add_argument("--log-hf", action="store_true", default=None,
                   help="log-transform the HF series before alignment")

    p = sub.add_parser("simulate", help="generate a synthetic dataset bundle")
    add_common(p)
    p.add_argument("--periods", type=int, help="number of LF periods T")

    p = sub.add_parser("backtest", help="rolling-window forecast exercise")
    add_common(p)
    p.add_argument("--models", help="comma-separated model grid")
    p.add_argument("--step", type=int, help="window advance in HF observations")

    p = sub.add_parser("evaluate", help="DM tests and Model Confidence Set")
    add_common(p)
    p.add_argument("--alpha", type=float, help="MCS elimination level")
    p.add_argument("--reps", type=int, help="bootstrap replications")

    p = sub.add_parser("report", help="render markdown tables from outputs")
    add_common(p)
    return parser


def _overrides_from_args(args: argparse.Namespace) -> dict[tuple[str, str], str]:
    mapping = {
        "out": ("output", "dir"),
        "m": ("data", "m"),
        "window": ("backtest", "window"),
        "horizons": ("backtest", "horizons"),
        "lf": ("data", "lf_csv"),
        "hf": ("data", "hf_csv"),
        "log_hf": ("data", "log_hf"),
        "models": ("models", "models"),
        "step": ("backtest", "step"),
        "alpha": ("evaluate", "alpha"),
        "reps": ("evaluate", "reps"),
        "periods": ("simulate", "T"),
    }
    overrides: dict[tuple[str, str], str] = {}
    for attr, key in mapping.items():
        value = getattr(args, attr, None)
        if value is not None:
            overrides[key] = str(value).lower() if isinstance(value, bool) else str(value)
    if getattr(args, "seed", None) is not None:
        overrides[("simulate", "seed")] = str(args.seed)
        overrides[("evaluate", "seed")] = str(args.seed)
    if getattr(args, "m", None) is not None:
        overrides[("simulate", "m")] = str(args.m)
    for tok in getattr(args, "tcode", []) or []:
        prev = overrides.get(("data", "tcode_overrides"), "")
        overrides[("data", "tcode_overrides")] = f"{prev} {tok}".strip()
    return overrides


COMMANDS = {
    "transform": cmd_transform,
    "align": cmd_align,
    "simulate": cmd_simulate,
    "backtest": cmd_backtest,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = RunConfig.load(args.config, _overrides_from_args(args))
        return COMMANDS[args.command](config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
