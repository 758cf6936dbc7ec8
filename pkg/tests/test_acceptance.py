"""Acceptance suite: one test per criterion, one printed line per criterion.

Lines print inside each test (visible with ``-s`` or on failure) and are
echoed again in a terminal summary section after the run.
"""

import json
import os
import time

import numpy as np
import pytest

from mfhier.cli import main as cli_main
from mfhier.data import MFDataset, simulate_pooled_rumidas
from mfhier.design import (
    ModelKind,
    ModelSpec,
    build_pooled,
    build_pooled_dwm,
    build_rumidas_dummy,
    build_rumidas_eq,
    center_scale,
)
from mfhier.forecast import BacktestSpec, ModelEntry, loss_summary, rolling_backtest
from mfhier.evalstats import dm_test, mcs
from mfhier.solver import (
    Block,
    GroupStructure,
    SolverConfig,
    _bare_design,
    bic_select,
    fit_hierarchical,
    fit_path,
    lambda_grid,
    make_groups,
    ols,
    prox_gradient_gap,
    prox_nested,
)

from oracles import nested_penalty_value, prox_gradient_reference, prox_oracle_brute
from test_design import pooling_matrix, pooling_restrictions

CONFIG_PATH = os.path.join(os.path.dirname(__file__), "..", "configs", "synthetic.ini")


def report(number: int, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {detail}"
    print(line)
    import conftest

    conftest.ACCEPTANCE_LINES.append(line)
    assert ok, f"criterion {number}: {detail}"


def random_groups(rng, p):
    cuts = []
    if p > 1:
        k = int(rng.integers(0, min(3, p - 1) + 1))
        if k:
            cuts = sorted(rng.choice(range(1, p), size=k, replace=False).tolist())
    blocks, prev = [], 0
    for cut in cuts + [p]:
        blocks.append(tuple(range(prev, cut)))
        prev = cut
    return GroupStructure(tuple(Block(f"b{i}", idx) for i, idx in enumerate(blocks)))


def assert_prefix_active(theta, groups):
    """Within each block the nonzero entries must form a leading prefix."""
    violations = 0
    for block in groups.blocks:
        vals = theta[np.asarray(block.indices)]
        nz = np.flatnonzero(vals != 0.0)
        if nz.size and nz.max() != nz.size - 1:
            violations += 1
    return violations


def test_c01_prox_matches_brute_force_oracle():
    start = time.monotonic()
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(100):
        p = int(rng.integers(1, 7))
        groups = random_groups(rng, p)
        v = rng.normal(scale=2.0, size=p)
        t = float(rng.uniform(0.01, 2.5))
        ours = prox_nested(v, groups, t)
        blocks = [b.indices for b in groups.blocks]
        oracle, best_f = prox_oracle_brute(v, blocks, t)
        gap = float(np.max(np.abs(ours - oracle)))
        worst = max(worst, gap)
        f_ours = 0.5 * float(np.sum((ours - v) ** 2)) + nested_penalty_value(
            ours, blocks, t
        )
        assert abs(f_ours - best_f) <= 1e-10 * max(1.0, abs(best_f))
    elapsed = time.monotonic() - start
    report(
        1,
        worst < 1e-6 and elapsed < 60,
        f"prox vs brute-force oracle on 100 draws: max linf gap {worst:.2e}, "
        f"{elapsed:.1f}s (< 60s)",
    )


def test_c02_path_certificate_and_reference():
    start = time.monotonic()
    rng = np.random.default_rng(202)
    cfg = SolverConfig(tolerance=1e-13, n_lambda=10, lambda_min_ratio=1e-2)
    worst_cert = 0.0
    worst_ref = 0.0
    for d in range(20):
        n, p = 50, 6
        X = rng.normal(size=(n, p))
        X -= X.mean(0)
        X /= X.std(0)
        theta = np.zeros(p)
        theta[: 1 + d % 4] = rng.normal(size=1 + d % 4)
        y = X @ theta + rng.normal(scale=0.5, size=n)
        y -= y.mean()
        design = _bare_design(X, y)
        groups = random_groups(rng, p)
        path = fit_path(design, groups, cfg)
        blocks = [b.indices for b in groups.blocks]

        def prox_fn(v, t, groups=groups):
            return prox_nested(v, groups, t)

        for k, lam in enumerate(path.lambdas):
            gap = prox_gradient_gap(
                X, y, path.coefs[k], float(lam), groups, 1.0 / path.lipschitz
            )
            worst_cert = max(worst_cert, gap)
            ref, _ = prox_gradient_reference(
                X, y, float(lam), blocks, prox_fn, n_starts=10, seed=1000 * d + k
            )
            worst_ref = max(worst_ref, float(np.max(np.abs(path.coefs[k] - ref))))
    elapsed = time.monotonic() - start
    report(
        2,
        worst_cert < 1e-6 and worst_ref < 1e-5 and elapsed < 120,
        f"20 designs x 10-point paths: certificate gap {worst_cert:.2e} (<1e-6), "
        f"10-restart reference gap {worst_ref:.2e} (<1e-5), {elapsed:.1f}s (< 120s)",
    )


def test_c03_hierarchy_of_zeros_exact():
    rng = np.random.default_rng(303)
    checked = 0
    violations = 0
    # sweep: pooled, dwm and per-position fits over several simulated sets
    for seed in range(4):
        m = int(rng.integers(4, 9))
        alpha = np.zeros((1, m))
        alpha[0, : 2] = [0.5, 0.25]
        beta = np.zeros(m)
        beta[:2] = [0.4, 0.2]
        ds, _ = simulate_pooled_rumidas(
            m, 80, alpha, beta, noise_scale=0.3, seed=seed
        )
        for builder, kind, pos in (
            (build_pooled, ModelKind.POOLED, None),
            (build_rumidas_eq, ModelKind.RUMIDAS_EQ, 1 + seed % m),
        ):
            spec = ModelSpec(kind=kind)
            design = builder(ds, spec) if pos is None else builder(ds, spec, pos)
            centered, _ = center_scale(design)
            groups = make_groups(kind, design.columns)
            path = fit_path(centered, groups, SolverConfig(n_lambda=25))
            for theta in path.coefs:
                violations += assert_prefix_active(theta, groups)
                checked += 1
            fit = fit_hierarchical(design, groups=groups)
            violations += assert_prefix_active(fit.coefficients, groups)
            violations += assert_prefix_active(fit.coefficients_shrunk, groups)
            checked += 2
    ds, _ = simulate_pooled_rumidas(20, 60, np.zeros((1, 20)), np.full(20, 0.04), seed=9)
    design = build_pooled_dwm(ds, ModelSpec(kind=ModelKind.POOLED_DWM))
    groups = make_groups(ModelKind.POOLED_DWM, design.columns)
    centered, _ = center_scale(design)
    for theta in fit_path(centered, groups, SolverConfig(n_lambda=25)).coefs:
        violations += assert_prefix_active(theta, groups)
        checked += 1
    report(
        3,
        violations == 0,
        f"hierarchy of exact zeros over {checked} fitted solutions: "
        f"{violations} violations (0 tolerated)",
    )


def test_c04_limit_cases():
    rng = np.random.default_rng(404)
    X = rng.normal(size=(200, 8))
    X -= X.mean(0)
    X /= X.std(0)
    y = X[:, :3] @ np.array([1.0, -0.5, 0.25]) + rng.normal(scale=0.5, size=200)
    y -= y.mean()
    design = _bare_design(X, y)
    groups = random_groups(rng, 8)
    cfg = SolverConfig(tolerance=1e-14)
    grid = lambda_grid(design, groups, cfg)
    at_top = fit_path(design, groups, cfg, lambdas=grid[:1]).coefs[0]
    at_zero = fit_path(design, groups, cfg, lambdas=np.array([0.0])).coefs[0]
    ref = ols(design)
    rel = float(np.linalg.norm(at_zero - ref) / np.linalg.norm(ref))
    ok = np.count_nonzero(at_top) == 0 and rel < 1e-6
    report(
        4,
        ok,
        f"lambda=lambda_top gives {np.count_nonzero(at_top)} nonzeros (want 0); "
        f"lambda=0 vs OLS relative error {rel:.2e} (<1e-6)",
    )


def test_c05_pooled_stacked_equivalence():
    m, T = 3, 200
    ds, _ = simulate_pooled_rumidas(
        m, T, [[0.3, 0.1, 0.0]], [0.4, 0.1, 0.0], noise_scale=0.5, seed=505
    )
    dummy = build_rumidas_dummy(ds, ModelSpec(kind=ModelKind.RUMIDAS_DUMMY))
    pooled = build_pooled(ds, ModelSpec(kind=ModelKind.POOLED))
    dummy_c, _ = center_scale(dummy, do_scale=False)
    pooled_c, _ = center_scale(pooled, do_scale=False)
    theta_pooled = ols(pooled_c)
    R = pooling_restrictions(dummy)
    from oracles import restricted_ols_kkt

    theta_restricted = restricted_ols_kkt(dummy_c.X, dummy_c.target, R)
    C = pooling_matrix(dummy, pooled)
    gap = float(np.max(np.abs(C.T @ theta_restricted / C.sum(0) - theta_pooled)))
    report(
        5,
        gap < 1e-8,
        f"pooled OLS vs restricted stacked OLS (m=3, T=200): max gap {gap:.2e} (<1e-8)",
    )


def test_c06_parameter_counts():
    rng = np.random.default_rng(606)
    m = 20
    ds1 = MFDataset(rng.normal(size=40 * m), rng.normal(size=(40, 1)), m, ("v0",))
    dummy = build_rumidas_dummy(ds1, ModelSpec(kind=ModelKind.RUMIDAS_DUMMY))
    pooled1 = build_pooled(ds1, ModelSpec(kind=ModelKind.POOLED))
    ds11 = MFDataset(
        rng.normal(size=40 * m),
        rng.normal(size=(40, 11)),
        m,
        tuple(f"v{k}" for k in range(11)),
    )
    pooled11 = build_pooled(ds11, ModelSpec(kind=ModelKind.POOLED))
    ok = (
        dummy.n_columns == (1 + m) * m
        and pooled1.n_columns == 2 * m
        and pooled11.n_columns == 240
    )
    report(
        6,
        ok,
        f"columns: stacked {dummy.n_columns} (want {(1 + m) * m}), pooled "
        f"{pooled1.n_columns} (want {2 * m}), 11-variable pooled "
        f"{pooled11.n_columns} (want 240)",
    )


def test_c07_support_recovery():
    start = time.monotonic()
    m, T = 20, 300
    alpha = np.zeros((1, m))
    alpha[0, :3] = [0.5, 0.3, 0.2]
    beta = np.zeros(m)
    beta[:4] = [0.4, 0.2, 0.1, 0.05]
    sigma = 0.14  # measured signal-to-noise ratio ~ 5 for this profile
    ds_big, _ = simulate_pooled_rumidas(m, 2000, alpha, beta, noise_scale=sigma, seed=1)
    snr = (ds_big.hf.var() - sigma**2) / sigma**2
    truth = set(range(3)) | set(range(m, m + 4))
    hits = 0
    reps = 200
    for seed in range(reps):
        ds, _ = simulate_pooled_rumidas(m, T, alpha, beta, noise_scale=sigma, seed=seed)
        design = build_pooled(ds, ModelSpec(kind=ModelKind.POOLED))
        fit = fit_hierarchical(design)
        active = set(fit.active_set.tolist())
        if truth <= active and len(active - truth) <= 3:
            hits += 1
    rate = hits / reps
    elapsed = time.monotonic() - start
    report(
        7,
        rate >= 0.90 and elapsed < 600,
        f"support recovery (SNR~{snr:.1f}): true support + <=3 false positives in "
        f"{100 * rate:.1f}% of {reps} replications (>=90%), {elapsed:.0f}s (< 600s)",
    )


def test_c08_dm_size_and_exact_cases():
    rng = np.random.default_rng(808)
    reps, n = 1000, 500
    rejections = 0
    for _ in range(reps):
        d = rng.normal(size=n)
        if dm_test(d, np.zeros(n), h=1).p_value < 0.05:
            rejections += 1
    rate = 100.0 * rejections / reps
    l1 = np.abs(rng.normal(size=200))
    l2 = np.abs(rng.normal(size=200))
    a, b = dm_test(l1, l2, h=5), dm_test(l2, l1, h=5)
    antisym = a.statistic == -b.statistic and a.p_value == b.p_value
    zero = dm_test(l1, l1.copy(), h=3)
    exact = zero.statistic == 0.0 and zero.p_value == 1.0
    report(
        8,
        3.5 <= rate <= 6.5 and antisym and exact,
        f"DM size at 5% over {reps} null replications: {rate:.2f}% (in [3.5, 6.5]); "
        f"antisymmetry exact: {antisym}; zero differential exact: {exact}",
    )


def test_c09_mcs_sanity():
    start = time.monotonic()
    rng = np.random.default_rng(909)
    base = np.abs(rng.normal(size=500))
    dup = mcs(np.column_stack([base, base]), alpha=0.25, reps=2000, seed=11)
    dup_ok = dup.survivors == (0, 1) and np.all(dup.p_values == 1.0)
    sigma = 0.2
    good = np.abs(rng.normal(scale=sigma, size=500))
    bad = np.abs(rng.normal(scale=sigma, size=500)) + 10 * sigma
    dom = mcs(np.column_stack([good, bad]), alpha=0.25, reps=2000, seed=12)
    dom_ok = dom.survivors == (0,) and dom.p_values[1] < 0.01
    elapsed = time.monotonic() - start
    report(
        9,
        dup_ok and dom_ok and elapsed < 120,
        f"identical duo survive with p=1: {dup_ok}; 10-sigma dominated model "
        f"eliminated with p={dom.p_values[1]:.4f} (<0.01); {elapsed:.1f}s (< 120s)",
    )


def test_c10_no_look_ahead():
    m, T = 5, 60
    beta = np.zeros(m)
    beta[0] = 0.6
    alpha = np.zeros((1, m))
    alpha[0, 0] = 0.4
    ds, _ = simulate_pooled_rumidas(m, T, alpha, beta, noise_scale=0.4, seed=10)
    spec = BacktestSpec(
        models=(
            ModelEntry("pooled-hier", ModelSpec(kind=ModelKind.POOLED), "hier"),
            ModelEntry("har", ModelSpec(kind=ModelKind.HAR, include_intercept=True), "ols"),
            ModelEntry("eq-hier", ModelSpec(kind=ModelKind.RUMIDAS_EQ), "hier"),
        ),
        window_length=100,
        horizons=(1, 5),
        step=7,
    )
    cfg = SolverConfig(n_lambda=12)
    base, _ = rolling_backtest(ds, spec, cfg)
    mismatches = 0
    total = 0
    for cut in (ds.n_hf - 1, ds.n_hf - 40):
        hf = ds.hf.copy()
        hf[cut:] += 1e3  # violent shock to everything at and after the cut
        shocked = MFDataset(hf, ds.lf, ds.m, ds.labels, ds.periods)
        table, _ = rolling_backtest(shocked, spec, cfg)
        for (model, h, origin), entry in base.entries.items():
            if origin < cut:  # window entirely before the perturbation
                total += 1
                if table.entries[(model, h, origin)].forecast != entry.forecast:
                    mismatches += 1
    report(
        10,
        mismatches == 0 and total > 0,
        f"post-window perturbations: {mismatches}/{total} forecasts changed at "
        "earlier origins (bit-compared, 0 tolerated)",
    )


def test_c11_end_to_end_determinism(tmp_path):
    start = time.monotonic()
    outputs = []
    for run in ("a", "b"):
        out = tmp_path / run
        for cmd in ("simulate", "backtest", "evaluate", "report"):
            rc = cli_main([cmd, "--config", CONFIG_PATH, "--out", str(out)])
            assert rc == 0, f"{cmd} failed"
        outputs.append(out)
    differing = []
    compared = 0
    for sub in ("align", "backtest", "evaluate", "report"):
        names = sorted(os.listdir(outputs[0] / sub))
        assert names == sorted(os.listdir(outputs[1] / sub))
        for name in names:
            if name == "manifest.json":
                continue  # carries a timestamp by design
            compared += 1
            a = (outputs[0] / sub / name).read_bytes()
            b = (outputs[1] / sub / name).read_bytes()
            if a != b:
                differing.append(f"{sub}/{name}")
    elapsed = time.monotonic() - start
    report(
        11,
        not differing and elapsed < 300,
        f"two pipeline runs, {compared} files compared byte-for-byte: "
        f"{len(differing)} differ {differing}; {elapsed:.0f}s (< 300s)",
    )


@pytest.mark.skipif(
    "MFH_REAL_DATA" not in os.environ,
    reason="set MFH_REAL_DATA to a directory with hf.csv and lf.csv to enable",
)
def test_c12_qualitative_real_data(tmp_path):
    """Optional: with user-supplied realized-variance + macro data, at h=1 the
    regularized pooled model should select (near) zero LF coefficients and the
    HAR should attain the lowest MAFE."""
    data_dir = os.environ["MFH_REAL_DATA"]
    out = str(tmp_path / "real")
    hf = os.path.join(data_dir, "hf.csv")
    lf = os.path.join(data_dir, "lf.csv")
    assert cli_main(["transform", "--lf", lf, "--out", out]) == 0
    assert cli_main(["align", "--hf", hf, "--lf", lf, "--out", out, "--m", "20"]) == 0
    assert (
        cli_main(
            [
                "backtest", "--out", out, "--window", "1200", "--horizons", "1",
                "--models", "har, pooled-hier:all", "--step", "20",
            ]
        )
        == 0
    )
    assert cli_main(["evaluate", "--out", out]) == 0
    summary = json.loads(open(os.path.join(out, "backtest", "summary.json")).read())
    mafe = {m: v["1"] for m, v in summary["values"].items()}
    har_best = mafe["har"] == min(mafe.values())
    import csv as _csv

    with open(os.path.join(out, "evaluate", "selection_frequency.csv")) as fh:
        freq = {
            (r["model"], r["horizon"]): float(r["selection_pct"])
            for r in _csv.DictReader(fh)
        }
    near_zero = freq[("pooled-hier:all", "1")] <= 5.0
    report(
        12,
        har_best and near_zero,
        f"h=1 on user data: HAR lowest MAFE: {har_best}; pooled LF selection "
        f"{freq[('pooled-hier:all', '1')]: .2f}% (near zero)",
    )
