"""Command-line entry point.

Subcommands wire the library into file-level workflows:

    fit          averaged predictions at the prediction set -> CSV
    bands        simultaneous confidence intervals -> CSV
    coverage     Monte Carlo coverage grid -> CSV
    rate         sup-norm rate study -> CSV
    diagnostics  spectral-model checks -> CSV
    dry-run      validate the config and print the planned grid

Value precedence, lowest to highest: built-in defaults, the
DNCBANDS_OUT environment variable (output directory only), the config
file, command-line flags.  Every CSV starts with a comment line
carrying the config hash and the master seed.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import bands as bands_mod
from . import bootstrap as bootstrap_mod
from . import diagnostics as diag_mod
from . import dnc, krr, simulation
from .config import (
    RESOLUTION_GUARD,
    ConfigError,
    RunConfig,
    config_hash,
    effective_grid,
    make_config,
    parse_config_text,
)
from .kernels import SpectralModel, effective_dimension, effective_dimension_tail

ENV_OUTPUT_DIR = "DNCBANDS_OUT"


class DataError(ValueError):
    pass


def read_data_csv(path):
    """Training data CSV: header x1..xd,y; returns (X, y)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    lines = [ln for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise DataError(f"{path}: empty data file")
    header = [h.strip() for h in lines[0].split(",")]
    if len(header) < 2 or header[-1] != "y":
        raise DataError(f"{path}: header must be x1..xd,y, got {lines[0]!r}")
    dim = len(header) - 1
    expected = [f"x{j + 1}" for j in range(dim)]
    if header[:-1] != expected:
        raise DataError(f"{path}: covariate columns must be {expected}, got {header[:-1]}")
    xs, ys = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != dim + 1:
            raise DataError(
                f"{path}: line {lineno}: expected {dim + 1} fields, got {len(parts)}"
            )
        try:
            row = [float(p) for p in parts]
        except ValueError:
            raise DataError(f"{path}: line {lineno}: non-numeric field in {line!r}") from None
        xs.append(row[:-1])
        ys.append(row[-1])
    return np.asarray(xs, dtype=np.float64), np.asarray(ys, dtype=np.float64)


def read_points_csv(path):
    """Prediction points CSV: header x1..xd; returns (T, d) array."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise DataError(f"{path}: empty points file")
    header = [h.strip() for h in lines[0].split(",")]
    dim = len(header)
    expected = [f"x{j + 1}" for j in range(dim)]
    if header != expected:
        raise DataError(f"{path}: header must be {expected}, got {header}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != dim:
            raise DataError(f"{path}: line {lineno}: expected {dim} fields, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise DataError(f"{path}: line {lineno}: non-numeric field in {line!r}") from None
    return np.asarray(rows, dtype=np.float64)


def _metadata(cfg: RunConfig) -> str:
    return f"config_hash={config_hash(cfg)} master_seed={cfg.seed}"


def _dgp_table(cfg: RunConfig) -> tuple:
    """Config stores (x, f) pairs; the simulation wants (xs, fs)."""
    if not cfg.dgp_table:
        return ()
    xs, fs = zip(*cfg.dgp_table)
    return (xs, fs)


def _outdir(cfg: RunConfig) -> str:
    os.makedirs(cfg.output_dir, exist_ok=True)
    return cfg.output_dir


def _prediction_points(cfg: RunConfig, x: np.ndarray, seed):
    """Configured points file, or seeded uniforms in the data bounding box."""
    if cfg.prediction_path:
        pts = read_points_csv(cfg.prediction_path)
        if pts.shape[1] != x.shape[1]:
            raise DataError(
                f"prediction points have dimension {pts.shape[1]}, data has {x.shape[1]}"
            )
        return pts
    rng = np.random.default_rng(seed)
    lo = x.min(axis=0)
    hi = x.max(axis=0)
    return lo + (hi - lo) * rng.uniform(size=(cfg.prediction_count, x.shape[1]))


def _fit_pipeline(cfg: RunConfig, data_path):
    """Shared front half of fit/bands: data -> (matrix, points, seeds)."""
    x, y = read_data_csv(data_path)
    n_total = x.shape[0]
    if n_total % cfg.partitions != 0:
        raise DataError(
            f"P does not divide N (P={cfg.partitions}, N={n_total})"
        )
    root = np.random.SeedSequence(cfg.seed)
    s_plan, s_pred, s_boot = root.spawn(3)
    points = _prediction_points(cfg, x, s_pred)
    kernel = cfg.kernel_spec()
    b_exp = 2.0 * kernel.nu + x.shape[1]
    rho = krr.penalty_schedule(n_total, b_exp, cfg.penalty_r_prime, cfg.penalty_c)
    sample = krr.Sample(x, y)
    plan = dnc.make_partition_plan(n_total, cfg.partitions, s_plan)
    matrix = dnc.fit_all_partitions(sample, plan, kernel, rho, points, threads=cfg.threads)
    return matrix, points, s_boot


def cmd_fit(cfg: RunConfig, data_path) -> list:
    matrix, points, _ = _fit_pipeline(cfg, data_path)
    out = os.path.join(_outdir(cfg), "predictions.csv")
    dim = points.shape[1]
    xcols = "x_tilde" if dim == 1 else ",".join(f"x_tilde_{j + 1}" for j in range(dim))
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(f"# {_metadata(cfg)}\n")
        fh.write(f"t,{xcols},f_bar\n")
        for t in range(points.shape[0]):
            coords = ",".join(repr(float(v)) for v in points[t])
            fh.write(f"{t},{coords},{float(matrix.row_mean[t])!r}\n")
    return [out]


def cmd_bands(cfg: RunConfig, data_path) -> list:
    if cfg.bootstrap_replicates < RESOLUTION_GUARD / cfg.alpha:
        raise ConfigError(
            f"bootstrap.replicates={cfg.bootstrap_replicates} is below the "
            f"resolution guard B >= {RESOLUTION_GUARD:.0f}/alpha = "
            f"{RESOLUTION_GUARD / cfg.alpha:.0f} for alpha={cfg.alpha}"
        )
    matrix, points, s_boot = _fit_pipeline(cfg, data_path)
    if cfg.bootstrap_scheme == "empirical":
        draws = bootstrap_mod.empirical_draws(matrix, cfg.bootstrap_replicates, s_boot)
    else:
        draws = bootstrap_mod.multiplier_draws(
            matrix, cfg.bootstrap_replicates, s_boot, cfg.bootstrap_multiplier
        )
    calibrated = bands_mod.calibrate(draws, cfg.alpha)
    out = os.path.join(_outdir(cfg), "bands.csv")
    bands_mod.save_bands_csv(out, points, matrix.row_mean, calibrated, metadata=_metadata(cfg))
    return [out]


def cmd_coverage(cfg: RunConfig) -> list:
    n_total, grid_p, grid_t, trials = effective_grid(cfg)
    offenders = [(p, t) for p in grid_p for t in grid_t if n_total % p != 0]
    if offenders:
        raise ConfigError(
            f"cells with P not dividing N={n_total}: {sorted(set(offenders))}"
        )
    dgp = simulation.DgpSpec(n_total, cfg.dgp_true_function, _dgp_table(cfg))
    kernel = cfg.kernel_spec()
    report = simulation.run_coverage_grid(
        dgp, grid_p, grid_t, cfg.alpha, cfg.bootstrap_replicates, trials,
        cfg.seed, kernel=kernel, r_prime=cfg.penalty_r_prime,
        schedule_c=cfg.penalty_c, scheme=cfg.bootstrap_scheme,
        multiplier=cfg.bootstrap_multiplier, threads=cfg.threads,
    )
    if cfg.diagnostics_enabled:
        report = _attach_diagnostics(cfg, report, dgp, kernel, grid_p, grid_t, trials)
    out = os.path.join(_outdir(cfg), "coverage.csv")
    simulation.write_coverage_csv(report, out, metadata=_metadata(cfg))
    _print_coverage_summary(report)
    return [out]


def _attach_diagnostics(cfg, report, dgp, kernel, grid_p, grid_t, trials):
    """Per-cell variance proxy and estimated proxy-to-noise ratio."""
    model = SpectralModel.from_matern(kernel, 1, cfg.diagnostics_truncation)
    b_exp = 2.0 * kernel.nu + 1.0
    rho = krr.penalty_schedule(dgp.n, b_exp, cfg.penalty_r_prime, cfg.penalty_c)
    cell_seeds = np.random.SeedSequence(cfg.seed).spawn(len(grid_p) * len(grid_t))
    diag = {}
    i = 0
    for p in grid_p:
        for t in grid_t:
            s = dgp.n // p
            proxy = diag_mod.variance_proxy(model, s, rho)
            # re-derive the first trial of the cell for the empirical floor
            trial_seed = cell_seeds[i].spawn(max(trials, 1))[0]
            _, matrix = simulation._band_trial(
                dgp, t, p, kernel, rho, cfg.alpha, cfg.bootstrap_replicates,
                cfg.bootstrap_scheme, cfg.bootstrap_multiplier, trial_seed,
            )
            g_est = diag_mod.g_ratio_estimate(matrix, model, s, rho) if p > 1 else float("inf")
            diag[(p, t)] = {"variance_proxy": proxy, "g_rho_est": g_est}
            i += 1
    return simulation.CoverageReport(report.cells, report.master_seed, diag)


def _print_coverage_summary(report) -> None:
    print("p,t,trials,hits,coverage,ci_lo,ci_hi")
    for cell in report.cells:
        lo, hi = cell.ci99
        print(
            f"{cell.partitions},{cell.points},{cell.trials},{cell.hits},"
            f"{cell.coverage:.4f},{lo:.4f},{hi:.4f}"
        )


def cmd_rate(cfg: RunConfig) -> list:
    result = simulation.rate_study(
        cfg.rate_ns, cfg.penalty_r_prime, cfg.rate_reps, cfg.seed,
        kernel=cfg.kernel_spec(), schedule_c=cfg.penalty_c, threads=cfg.threads,
        true_function=cfg.dgp_true_function, table=_dgp_table(cfg),
    )
    out = os.path.join(_outdir(cfg), "rate.csv")
    simulation.write_rate_csv(result, out, metadata=_metadata(cfg))
    print(f"slope of log(median sup-err^2) vs log N: {result.slope}")
    return [out]


def cmd_diagnostics(cfg: RunConfig) -> list:
    kernel = cfg.kernel_spec()
    model = SpectralModel.from_matern(kernel, 1, cfg.diagnostics_truncation)
    rows = []
    for rho in cfg.diagnostics_rhos:
        check = diag_mod.check_trace_bound(model, rho)
        rows.append(("trace_bound", rho, check.lhs, check.rhs, check.ratio))
    for rho in cfg.diagnostics_rhos:
        rows.append(
            (
                "effective_dimension",
                rho,
                effective_dimension(model, rho),
                effective_dimension_tail(model, rho),
                "",
            )
        )
    # interpolation inequality over seeded random expansions
    j_interp = min(cfg.diagnostics_truncation, 256)
    interp_model = SpectralModel.polynomial(model.decay_exponent, j_interp)
    rng = np.random.default_rng(cfg.seed)
    grid = np.linspace(0.0, 1.0, 2048)
    max_ratio = 0.0
    for _ in range(100):
        theta = rng.normal(size=j_interp)
        f = diag_mod.EigenExpansionFunction(theta, interp_model)
        max_ratio = max(max_ratio, diag_mod.check_interpolation_inequality(f, grid).ratio)
    rows.append(("interpolation_max_ratio", j_interp, max_ratio, "", ""))
    s = cfg.dgp_n // cfg.partitions if cfg.partitions and cfg.dgp_n % cfg.partitions == 0 else cfg.dgp_n
    b_exp = 2.0 * kernel.nu + 1.0
    rho_sched = krr.penalty_schedule(cfg.dgp_n, b_exp, cfg.penalty_r_prime, cfg.penalty_c)
    rows.append(("variance_proxy", s, diag_mod.variance_proxy(model, s, rho_sched), "", ""))

    out = os.path.join(_outdir(cfg), "diagnostics.csv")
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(f"# {_metadata(cfg)}\n")
        fh.write("check,param,value_a,value_b,ratio\n")
        for name, param, a, b, ratio in rows:
            fh.write(f"{name},{param!r},{a!r},{b!r},{ratio!r}\n")
    return [out]


def cmd_dry_run(cfg: RunConfig) -> list:
    n_total, grid_p, grid_t, trials = effective_grid(cfg)
    print(f"config_hash={config_hash(cfg)} master_seed={cfg.seed}")
    print(f"coverage grid: N={n_total}, trials per cell={trials}")
    for p in grid_p:
        for t in grid_t:
            ok = "" if n_total % p == 0 else "  (P does not divide N!)"
            print(f"  cell P={p} T={t}{ok}")
    print(f"cells: {len(grid_p)}x{len(grid_t)}={len(grid_p) * len(grid_t)}")
    return []


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dncbands",
        description="Divide-and-conquer KRR with bootstrap simultaneous confidence bands",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_data in (
        ("fit", True),
        ("bands", True),
        ("coverage", False),
        ("rate", False),
        ("diagnostics", False),
        ("dry-run", False),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", help="path to a key=value config file")
        if needs_data:
            p.add_argument("--data", required=True, help="training data CSV (x1..xd,y)")
        p.add_argument("--out", help="output directory (overrides config and env)")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--threads", type=int, help="worker-parallelism cap")
        p.add_argument("--alpha", type=float, help="band miscoverage level override")
        p.add_argument("--partitions", type=int, help="partition count override")
        p.add_argument("--prediction-count", type=int, help="prediction set size override")
        p.add_argument("--replicates", type=int, help="bootstrap replicate count override")
        p.add_argument("--full-scale", action="store_true", help="use the published full grid")
    return parser


def _config_from_args(args) -> RunConfig:
    overrides = {}
    if os.environ.get(ENV_OUTPUT_DIR):
        overrides["output.dir"] = os.environ[ENV_OUTPUT_DIR]
    file_raw = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            file_raw = parse_config_text(fh.read())
    overrides.update(file_raw)
    flag_map = {
        "out": "output.dir",
        "seed": "seed",
        "threads": "threads",
        "alpha": "alpha",
        "partitions": "partitions",
        "prediction_count": "prediction.count",
        "replicates": "bootstrap.replicates",
    }
    for attr, key in flag_map.items():
        value = getattr(args, attr, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "full_scale", False):
        overrides["grid.full_scale"] = True
    return make_config(overrides)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        if args.command == "fit":
            written = cmd_fit(cfg, args.data)
        elif args.command == "bands":
            written = cmd_bands(cfg, args.data)
        elif args.command == "coverage":
            written = cmd_coverage(cfg)
        elif args.command == "rate":
            written = cmd_rate(cfg)
        elif args.command == "diagnostics":
            written = cmd_diagnostics(cfg)
        else:
            written = cmd_dry_run(cfg)
    except (ConfigError, DataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
