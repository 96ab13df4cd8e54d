"""Acceptance suite: one printed pass/fail line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.

Criterion 1 is pinned to kernel lengthscale 1.0 and is expected to be
red: at that lengthscale the Matern-7/2 kernel over-smooths the sine
target so heavily that the averaged estimator's bias (about 0.3 at the
benchmark sizes, cross-checked against an independent kernel-ridge
implementation) dwarfs the bootstrap band widths, and no Monte Carlo
luck can reach the pinned coverage window.  The companion validation
test demonstrates that the identical pipeline reaches the window once
the lengthscale resolves the target (0.2); see README, "Choosing the
lengthscale".
"""

import itertools
import math

import numpy as np
import pytest

from dncbands.bands import band_intervals, calibrate, covers
from dncbands.bootstrap import (
    bootstrap_moments,
    empirical_draws,
    multiplier_draws,
    resample_deltas,
)
from dncbands.cli import main as cli_main
from dncbands.diagnostics import (
    EigenExpansionFunction,
    check_interpolation_inequality,
    check_trace_bound,
)
from dncbands.dnc import LocalPredictionMatrix
from dncbands.kernels import KernelSpec, SpectralModel, gram_matrix
from dncbands.krr import Sample, fit, predict
from dncbands.simulation import (
    DgpSpec,
    coverage_ci99,
    power_of_two_sqrt,
    rate_study,
    run_coverage_cell,
)

from test_bands import brute_force_calibrate, random_instance

DESK_N = 2**12
DESK_P = 2**6
DESK_TS = (2**2, 2**6)
DESK_ALPHA = 0.05  # miscoverage for nominal 95% bands
DESK_B = 1000
DESK_R = 500
ACCEPT_SEED = 20260808
THREADS = 4

COVERAGE_WINDOW = (0.90, 0.98)
CI_BAND = (0.91, 0.97)
FLATNESS_LIMIT = 2.0 * math.sqrt(0.05 * 0.95 * 2.0 / DESK_R)


def report(num, name, ok, detail):
    print(f"\n[acceptance] {num:>2} {name}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num} ({name}): {detail}"


def desk_cells(lengthscale, seed):
    kernel = KernelSpec(nu=3.5, lengthscale=lengthscale, output_scale=1.0)
    dgp = DgpSpec(DESK_N)
    out = {}
    for t in DESK_TS:
        hits, trials = run_coverage_cell(
            dgp, DESK_P, t, DESK_ALPHA, DESK_B, DESK_R,
            np.random.SeedSequence([seed, t]),
            kernel=kernel, r_prime=0.5, schedule_c=1.0, threads=THREADS,
        )
        out[t] = (hits, trials)
    return out


@pytest.fixture(scope="module")
def literal_desk_run():
    # the pinned benchmark configuration, lengthscale 1.0 included
    return desk_cells(1.0, ACCEPT_SEED)


@pytest.fixture(scope="module")
def validated_desk_run():
    # identical pipeline in the regime where the kernel resolves the target
    return desk_cells(0.2, ACCEPT_SEED)


def coverage_detail(cells):
    parts = []
    ok = True
    for t, (hits, trials) in sorted(cells.items()):
        cov = hits / trials
        lo, hi = coverage_ci99(hits, trials)
        in_window = COVERAGE_WINDOW[0] <= cov <= COVERAGE_WINDOW[1]
        overlaps = lo <= CI_BAND[1] and hi >= CI_BAND[0]
        ok = ok and in_window and overlaps
        parts.append(f"T={t}: cov={cov:.3f} ci99=({lo:.3f},{hi:.3f})")
    return ok, "; ".join(parts)


def test_criterion_01_desk_scale_coverage(literal_desk_run):
    ok, detail = coverage_detail(literal_desk_run)
    report(
        1, "desk-scale coverage (lengthscale 1.0)", ok,
        detail + f" vs window {COVERAGE_WINDOW} and CI band {CI_BAND}",
    )


def test_criterion_02_coverage_flat_in_t(literal_desk_run):
    covs = {t: h / r for t, (h, r) in literal_desk_run.items()}
    gap = abs(covs[DESK_TS[0]] - covs[DESK_TS[1]])
    report(
        2, "coverage flat in T", gap <= FLATNESS_LIMIT,
        f"|{covs[DESK_TS[0]]:.3f} - {covs[DESK_TS[1]]:.3f}| = {gap:.4f} "
        f"<= {FLATNESS_LIMIT:.4f}",
    )


def test_validation_desk_scale_coverage_resolving_lengthscale(validated_desk_run):
    """Not a numbered criterion: the window is attainable at lengthscale 0.2."""
    ok, detail = coverage_detail(validated_desk_run)
    covs = {t: h / r for t, (h, r) in validated_desk_run.items()}
    gap = abs(covs[DESK_TS[0]] - covs[DESK_TS[1]])
    report(
        "1v", "desk-scale coverage (lengthscale 0.2 validation)",
        ok and gap <= FLATNESS_LIMIT,
        detail + f"; flatness gap {gap:.4f} <= {FLATNESS_LIMIT:.4f}",
    )


def test_criterion_03_calibration_oracle_equivalence():
    rng = np.random.default_rng(ACCEPT_SEED)
    mismatches = 0
    for _ in range(100):
        deltas, alpha = random_instance(rng)
        from dncbands.bootstrap import BootstrapDraws

        bands = calibrate(BootstrapDraws("empirical", deltas), alpha)
        k_oracle, cov_oracle = brute_force_calibrate(deltas, alpha)
        b = deltas.shape[0]
        ordered = np.sort(deltas, axis=0)
        agree = (
            bands.achieved_tail == k_oracle / b
            and abs(bands.achieved_coverage - cov_oracle) < 1e-15
            and np.array_equal(bands.lower, ordered[k_oracle - 1])
            and np.array_equal(bands.upper, ordered[b - k_oracle])
        )
        mismatches += 0 if agree else 1
    report(3, "calibration oracle equivalence", mismatches == 0,
           f"{mismatches} mismatches over 100 random instances")


def test_criterion_04_bootstrap_exact_moment_enumeration():
    rng = np.random.default_rng(ACCEPT_SEED + 1)
    worst_mean = 0.0
    worst_cov = 0.0
    for p in (1, 2, 3, 4):
        for t in (1, 2):
            values = rng.normal(size=(p, t))
            matrix = LocalPredictionMatrix.from_values(values)
            idx = np.array(
                list(itertools.product(range(p), repeat=p)), dtype=np.int64
            )
            deltas = resample_deltas(matrix.values, matrix.row_mean, idx)
            worst_mean = max(worst_mean, float(np.max(np.abs(deltas.mean(axis=0)))))
            centered = values - matrix.row_mean
            closed = centered.T @ centered / p**2
            empirical = deltas.T @ deltas / deltas.shape[0]
            worst_cov = max(worst_cov, float(np.max(np.abs(empirical - closed))))
    ok = worst_mean < 1e-12 and worst_cov < 1e-12
    report(4, "bootstrap exact-moment enumeration", ok,
           f"max |mean| = {worst_mean:.2e}, max |cov error| = {worst_cov:.2e}")


def test_criterion_05_degenerate_bootstrap_identities():
    single = LocalPredictionMatrix.from_values(np.array([[0.3, -1.7, 0.1]]))
    bands_single = calibrate(empirical_draws(single, 400, seed=5), 0.05)
    one_ok = np.array_equal(bands_single.lower, bands_single.upper) and np.all(
        bands_single.lower == 0.0
    )
    identical = LocalPredictionMatrix.from_values(np.tile([0.1, 0.7, -0.2], (6, 1)))
    bands_identical = calibrate(empirical_draws(identical, 400, seed=6), 0.05)
    same_ok = np.array_equal(bands_identical.lower, bands_identical.upper)
    report(5, "degenerate-bootstrap identities", one_ok and same_ok,
           f"P=1 zero-width: {one_ok}; identical rows zero-width: {same_ok}")


def test_criterion_06_scheme_agreement():
    # the schemes' second moments differ by max_t row_mean_t^2 / P for the
    # literal multiplier definition, so the fixed matrix uses enough rows
    # for that systematic term to sit well under the 5% tolerance
    rng = np.random.default_rng(2026)
    matrix = LocalPredictionMatrix.from_values(rng.normal(size=(256, 8)))
    b = 10**5
    _, sd_emp = bootstrap_moments(empirical_draws(matrix, b, seed=7))
    _, sd_mul = bootstrap_moments(multiplier_draws(matrix, b, seed=8))
    worst = float(np.max(np.abs(sd_emp - sd_mul) / sd_emp))
    report(6, "empirical vs multiplier sd agreement", worst < 0.05,
           f"max relative sd gap {worst:.4f} < 0.05 at B=1e5")


def test_criterion_07_rate_study():
    result = rate_study(
        [2**k for k in range(10, 15)],
        r_prime=0.5,
        reps=20,
        seed=ACCEPT_SEED + 2,
        kernel=KernelSpec(nu=3.5, lengthscale=1.0),
        partition_rule=power_of_two_sqrt,
        threads=THREADS,
    )
    target = -7.0 / 9.0
    ok = abs(result.slope - target) <= 0.35
    report(7, "sup-norm rate study", ok,
           f"slope {result.slope:.3f} within +-0.35 of {target:.3f}; "
           f"medians {[round(e, 4) for e in result.median_sup_errors]}")


def test_criterion_08_krr_residual_and_limits():
    rng = np.random.default_rng(ACCEPT_SEED + 3)
    worst_resid = 0.0
    for n, rho, nu, ell in (
        (64, 6.2e-4, 3.5, 1.0),
        (64, 6.2e-4, 3.5, 0.2),
        (128, 1e-6, 2.5, 0.5),
        (16, 10.0, 0.5, 1.0),
    ):
        x = rng.uniform(0, 1, (n, 1))
        y = np.sin(2 * np.pi * x[:, 0]) + rng.normal(size=n)
        spec = KernelSpec(nu=nu, lengthscale=ell)
        fitted = fit(Sample(x, y), spec, rho)
        k = gram_matrix(spec, x)
        resid = np.linalg.norm(
            (k + n * rho * np.eye(n)) @ fitted.dual_weights - y
        ) / np.linalg.norm(y)
        worst_resid = max(worst_resid, float(resid))

    # ridge limit
    x = rng.uniform(0, 1, (12, 1))
    y = rng.normal(size=12)
    big = fit(Sample(x, y), KernelSpec(), 1e8)
    ridge_ok = np.max(np.abs(predict(big, np.linspace(0, 1, 7)))) <= (
        np.linalg.norm(y) / 1e8
    )

    # interpolation limit on well-conditioned points
    xi = np.array([[0.0], [0.25], [0.5], [0.75], [1.0]])
    yi = np.array([0.4, -0.8, 1.2, 0.3, -0.6])
    interp = fit(Sample(xi, yi), KernelSpec(nu=0.5), 1e-10)
    interp_ok = np.max(np.abs(predict(interp, xi) - yi) / np.abs(yi)) < 1e-4

    ok = worst_resid <= 1e-8 and ridge_ok and interp_ok
    report(8, "KRR residual and limit properties", ok,
           f"worst residual {worst_resid:.2e} <= 1e-8; ridge limit {ridge_ok}; "
           f"interpolation limit {interp_ok}")


def test_criterion_09_spectral_inequality_suites():
    violations = 0
    for b in (1.5, 2.0, 4.0, 8.0):
        for j in (10**2, 10**4):
            model = SpectralModel.polynomial(b, j)
            for rho in np.logspace(-6, -1, 12):
                check = check_trace_bound(model, float(rho))
                violations += 0 if check.lhs <= check.rhs else 1

    model = SpectralModel.polynomial(8.0, 256)
    grid = np.linspace(0, 1, 2048)
    rng = np.random.default_rng(ACCEPT_SEED + 4)
    ratios = []
    scale_drift = 0.0
    for _ in range(100):
        theta = rng.normal(size=256)
        base = check_interpolation_inequality(EigenExpansionFunction(theta, model), grid)
        scaled = check_interpolation_inequality(
            EigenExpansionFunction(9.0 * theta, model), grid
        )
        ratios.append(base.ratio)
        scale_drift = max(scale_drift, abs(scaled.ratio - base.ratio) / base.ratio)
    ok = violations == 0 and np.isfinite(max(ratios)) and max(ratios) < 10.0 and scale_drift < 1e-12
    report(9, "trace-bound and interpolation suites", ok,
           f"{violations} trace-bound violations; max ratio {max(ratios):.3f}; "
           f"scale drift {scale_drift:.2e}")


def test_criterion_10_determinism_across_threads(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "dgp.n = 1024\ngrid.p = 8\ngrid.t = 4\ngrid.trials = 30\n"
        "bootstrap.replicates = 500\nkernel.lengthscale = 0.2\nseed = 99\n"
    )
    outputs = []
    for threads in (1, 3):
        out = tmp_path / f"out_{threads}"
        code = cli_main(
            ["coverage", "--config", str(cfg), "--out", str(out),
             "--threads", str(threads)]
        )
        assert code == 0
        outputs.append((out / "coverage.csv").read_bytes())
    ok = outputs[0] == outputs[1]
    report(10, "coverage CSV determinism across --threads", ok,
           f"byte-identical: {ok}")
