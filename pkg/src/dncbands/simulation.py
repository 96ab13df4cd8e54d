"""Monte Carlo harness: synthetic data, coverage grid, rate study.

The data-generating process is one-dimensional: covariates and
prediction points uniform on [0, 1], Gaussian noise whose variance
exp(4 |x - 1/2|) depends on the covariate, and a sine truth whose
frequency uses the literal constant 3.14 rather than pi (widths of
order 3e-7 separate the two at the quarter-period; the literal is kept
deliberately and flagged in the README).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import beta as beta_dist

from . import bands as bands_mod
from . import bootstrap as bootstrap_mod
from . import dnc, krr
from .kernels import KernelSpec

SIN_FREQUENCY = 2.0 * 3.14  # literal 3.14, not math.pi


def _as_seedseq(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


@dataclass(frozen=True)
class DgpSpec:
    """Synthetic heteroscedastic regression setup on [0, 1]."""

    n: int
    true_function: str = "sin2pix"
    # piecewise-linear table (xs, fs), used when true_function == "table"
    table: tuple = ()
    # multiplies the noise standard deviation; 0 gives noise-free trials
    noise_scale: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"sample size must be positive, got {self.n}")
        if self.true_function not in ("sin2pix", "table"):
            raise ValueError(f"unknown true function {self.true_function!r}")
        if self.true_function == "table":
            if len(self.table) != 2 or len(self.table[0]) != len(self.table[1]):
                raise ValueError("table must be a pair of equal-length sequences")
        if self.noise_scale < 0:
            raise ValueError(f"noise scale must be non-negative, got {self.noise_scale}")

    def f_star(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.true_function == "sin2pix":
            return np.sin(SIN_FREQUENCY * x)
        xs, fs = (np.asarray(v, dtype=np.float64) for v in self.table)
        return np.interp(x, xs, fs)

    @staticmethod
    def noise_variance(x) -> np.ndarray:
        return np.exp(4.0 * np.abs(np.asarray(x, dtype=np.float64) - 0.5))


def generate_trial(dgp: DgpSpec, n_points: int, seed):
    """One synthetic trial: (sample, prediction points, true values).

    Draw order is pinned (covariates, prediction points, noise) so a
    seed identifies the trial exactly.
    """
    if n_points < 1:
        raise ValueError(f"prediction set size must be positive, got {n_points}")
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, 1.0, size=(dgp.n, 1))
    x_tilde = rng.uniform(0.0, 1.0, size=(n_points, 1))
    noise = rng.normal(0.0, 1.0, size=dgp.n) * (
        dgp.noise_scale * np.sqrt(DgpSpec.noise_variance(x[:, 0]))
    )
    y = dgp.f_star(x[:, 0]) + noise
    truth = dgp.f_star(x_tilde[:, 0])
    return krr.Sample(x, y), x_tilde, truth


def _band_trial(dgp, n_points, n_partitions, kernel, rho, alpha, n_replicates,
                scheme, multiplier, trial_seed):
    """Run the full pipeline once; returns (covered, local matrix)."""
    s_data, s_plan, s_boot = trial_seed.spawn(3)
    sample, x_tilde, truth = generate_trial(dgp, n_points, s_data)
    plan = dnc.make_partition_plan(dgp.n, n_partitions, s_plan)
    matrix = dnc.fit_all_partitions(sample, plan, kernel, rho, x_tilde)
    if scheme == "empirical":
        draws = bootstrap_mod.empirical_draws(matrix, n_replicates, s_boot)
    else:
        draws = bootstrap_mod.multiplier_draws(matrix, n_replicates, s_boot, multiplier)
    calibrated = bands_mod.calibrate(draws, alpha)
    intervals = bands_mod.band_intervals(calibrated, matrix.row_mean)
    return bands_mod.covers(intervals, truth), matrix


def run_coverage_cell(
    dgp: DgpSpec,
    n_partitions: int,
    n_points: int,
    alpha: float,
    n_replicates: int,
    trials: int,
    seed,
    kernel: KernelSpec = KernelSpec(),
    r_prime: float = 0.5,
    schedule_c: float = 1.0,
    scheme: str = "empirical",
    multiplier: str = "gaussian",
    threads: int = 1,
) -> tuple[int, int]:
    """Monte Carlo hit count for one (P, T) configuration.

    alpha is the band miscoverage level (0.05 for nominal 95% bands).
    Each trial draws fresh data, fits the divide-and-conquer estimator
    with rho from the penalty schedule at the full sample size, and
    checks whether the truth lands strictly inside all T intervals.
    """
    if dgp.n % n_partitions != 0:
        raise ValueError(
            f"P does not divide N (P={n_partitions}, N={dgp.n})"
        )
    if trials == 0:
        return 0, 0
    b_exp = 2.0 * kernel.nu + 1.0  # eigendecay exponent in dimension 1
    rho = krr.penalty_schedule(dgp.n, b_exp, r_prime, schedule_c)
    trial_seeds = _as_seedseq(seed).spawn(trials)

    def one(ts):
        covered, _ = _band_trial(
            dgp, n_points, n_partitions, kernel, rho, alpha,
            n_replicates, scheme, multiplier, ts,
        )
        return covered

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            hits = sum(pool.map(one, trial_seeds))
    else:
        hits = sum(one(ts) for ts in trial_seeds)
    return int(hits), trials


def coverage_ci99(hits: int, trials: int) -> tuple[float, float]:
    """Exact Clopper-Pearson 99% interval for a binomial proportion."""
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    if not (0 <= hits <= trials):
        raise ValueError(f"hits {hits} outside [0, {trials}]")
    if hits == 0:
        lo = 0.0
    else:
        lo = float(beta_dist.ppf(0.005, hits, trials - hits + 1))
    if hits == trials:
        hi = 1.0
    else:
        hi = float(beta_dist.ppf(0.995, hits + 1, trials - hits))
    return lo, hi


@dataclass(frozen=True)
class CoverageCell:
    partitions: int
    points: int
    trials: int
    hits: int

    @property
    def coverage(self) -> float:
        return self.hits / self.trials if self.trials else float("nan")

    @property
    def ci99(self) -> tuple[float, float]:
        return coverage_ci99(self.hits, self.trials)


@dataclass(frozen=True)
class CoverageReport:
    cells: list[CoverageCell]
    master_seed: int
    diagnostics: dict = field(default_factory=dict)  # (P, T) -> extra columns


def run_coverage_grid(
    dgp: DgpSpec,
    grid_p,
    grid_t,
    alpha: float,
    n_replicates: int,
    trials: int,
    master_seed: int,
    kernel: KernelSpec = KernelSpec(),
    r_prime: float = 0.5,
    schedule_c: float = 1.0,
    scheme: str = "empirical",
    multiplier: str = "gaussian",
    threads: int = 1,
) -> CoverageReport:
    """Run every (P, T) cell with independently derived seed streams."""
    offenders = [p for p in grid_p if dgp.n % p != 0]
    if offenders:
        raise ValueError(
            f"partition counts {offenders} do not divide N={dgp.n}"
        )
    root = np.random.SeedSequence(master_seed)
    cell_seeds = root.spawn(len(grid_p) * len(grid_t))
    cells = []
    i = 0
    for p in grid_p:
        for t in grid_t:
            hits, done = run_coverage_cell(
                dgp, p, t, alpha, n_replicates, trials, cell_seeds[i],
                kernel=kernel, r_prime=r_prime, schedule_c=schedule_c,
                scheme=scheme, multiplier=multiplier, threads=threads,
            )
            cells.append(CoverageCell(p, t, done, hits))
            i += 1
    return CoverageReport(cells, master_seed)


def partition_bound_check(n_total: int, b: float, r_prime: float, c: float = 1.0) -> float:
    """Largest partition count consistent with the averaging regime.

    Accepts any r' in [1/(2b), 1]: unlike the penalty schedule, the
    bound is meaningful down to the exponent's zero.
    """
    if n_total < 1:
        raise ValueError(f"N must be positive, got {n_total}")
    if not (b > 1):
        raise ValueError(f"decay exponent b must exceed 1, got {b}")
    if not (1.0 / (2.0 * b) <= r_prime <= 1.0):
        raise ValueError(f"r' must lie in [1/(2b), 1], got {r_prime}")
    exponent = (2.0 * b * r_prime - 1.0) / (2.0 * b * r_prime + 1.0)
    return c * float(n_total) ** exponent


def power_of_two_sqrt(n_total: int) -> int:
    """sqrt(N) rounded to a power of two (exponent rounded half up)."""
    return 2 ** int(math.floor(math.log2(n_total) / 2.0 + 0.5))


@dataclass(frozen=True)
class RateStudyResult:
    sizes: list[int]
    partition_counts: list[int]
    median_sup_errors: list[float]
    slope: float  # d log(err^2) / d log N, nan when undefined


def rate_study(
    sizes,
    r_prime: float,
    reps: int,
    seed,
    kernel: KernelSpec = KernelSpec(),
    schedule_c: float = 1.0,
    partition_rule=power_of_two_sqrt,
    grid_size: int = 512,
    true_function: str = "sin2pix",
    table: tuple = (),
    predictor=None,
    threads: int = 1,
) -> RateStudyResult:
    """Sup-norm error of the averaged estimator as the sample grows.

    The sup norm is taken over a fixed uniform grid; the returned slope
    is the least-squares fit of log(median sup error squared) against
    log N.  A custom ``predictor(sample, plan, points)`` can replace
    the divide-and-conquer pipeline (used to exercise degenerate
    cases); it must return the averaged prediction vector.
    """
    grid = np.linspace(0.0, 1.0, grid_size).reshape(-1, 1)
    b_exp = 2.0 * kernel.nu + 1.0
    sizes = list(sizes)
    size_seeds = _as_seedseq(seed).spawn(len(sizes))

    medians = []
    p_used = []
    for n_total, s_n in zip(sizes, size_seeds):
        n_partitions = int(partition_rule(n_total))
        if n_total % n_partitions != 0:
            raise ValueError(
                f"partition rule gave P={n_partitions} for N={n_total}, not a divisor"
            )
        p_used.append(n_partitions)
        dgp = DgpSpec(n_total, true_function, table)
        truth = dgp.f_star(grid[:, 0])
        rho = krr.penalty_schedule(n_total, b_exp, r_prime, schedule_c)
        rep_seeds = s_n.spawn(reps)

        def one(rs):
            s_data, s_plan = rs.spawn(2)
            sample, _, _ = generate_trial(dgp, 1, s_data)
            plan = dnc.make_partition_plan(n_total, n_partitions, s_plan)
            if predictor is None:
                matrix = dnc.fit_all_partitions(sample, plan, kernel, rho, grid)
                f_bar = matrix.row_mean
            else:
                f_bar = np.asarray(predictor(sample, plan, grid), dtype=np.float64)
            return float(np.max(np.abs(f_bar - truth)))

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                errs = list(pool.map(one, rep_seeds))
        else:
            errs = [one(rs) for rs in rep_seeds]
        medians.append(float(np.median(errs)))

    if any(m <= 0.0 for m in medians) or len(sizes) < 2:
        slope = float("nan")
    else:
        logn = np.log(np.asarray(sizes, dtype=np.float64))
        logerr2 = 2.0 * np.log(np.asarray(medians))
        slope = float(np.polyfit(logn, logerr2, 1)[0])
    return RateStudyResult(sizes, p_used, medians, slope)


def write_coverage_csv(report: CoverageReport, path, metadata: str = "") -> None:
    """Grid CSV: one row per cell, plot-ready long format."""
    diag_keys = []
    if report.diagnostics:
        first = next(iter(report.diagnostics.values()))
        diag_keys = list(first)
    with open(path, "w", encoding="utf-8") as fh:
        note = "axes=log2(P),log2(T),coverage"
        fh.write(f"# {metadata} {note}\n" if metadata else f"# {note}\n")
        extra = ("," + ",".join(diag_keys)) if diag_keys else ""
        fh.write("p,t,trials,hits,coverage,ci_lo,ci_hi" + extra + "\n")
        for cell in report.cells:
            lo, hi = cell.ci99
            row = (
                f"{cell.partitions},{cell.points},{cell.trials},{cell.hits},"
                f"{cell.coverage!r},{lo!r},{hi!r}"
            )
            if diag_keys:
                vals = report.diagnostics.get((cell.partitions, cell.points), {})
                row += "," + ",".join(repr(float(vals[k])) for k in diag_keys)
            fh.write(row + "\n")


def write_rate_csv(result: RateStudyResult, path, metadata: str = "") -> None:
    """Rate CSV: one row per N and a slope footer row."""
    with open(path, "w", encoding="utf-8") as fh:
        if metadata:
            fh.write(f"# {metadata}\n")
        fh.write("n,partitions,median_sup_err\n")
        for n_total, p, err in zip(
            result.sizes, result.partition_counts, result.median_sup_errors
        ):
            fh.write(f"{n_total},{p},{err!r}\n")
        fh.write(f"slope,,{result.slope!r}\n")
