"""Simultaneous element-wise band calibration from bootstrap draws.

Calibration finds a single tail level c, shared by every component,
such that the band built from each column's (c, 1-c) empirical
quantiles contains at least a 1-alpha fraction of the bootstrap
replicates component-wise.  Because coverage is monotone in c, the
largest admissible c is well defined, and it can be read off a rank
transform without scanning candidate levels:

    m_b = min over components of (#draws strictly below b, #draws
          strictly above b); then c = k/B, where k is the largest
          depth attained by at least ceil((1-alpha) B) replicates.

Conventions pinned here (they matter for exactness):
  * empirical quantiles are inverse-ECDF order statistics, lower index
    k = ceil(cB), upper symmetric from the top;
  * "inside" means strict inequality on both sides;
  * sorting is stable, so ties are broken by replicate index;
  * achievable coverage moves in steps of 1/B and the returned bands
    are the smallest with coverage >= 1 - alpha.

Components whose delta column has zero spread get a zero-width band,
are flagged, and impose no constraint on the tail level (a point mass
can never be strictly covered).  If even the widest candidate band
(k = 1) misses the target -- possible when many weakly coupled
components meet a small B -- that widest band is returned and
``tail_reachable`` is set to False.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bootstrap import BootstrapDraws


@dataclass(frozen=True)
class Bands:
    """Calibrated per-component offsets for the centered bootstrap law."""

    lower: np.ndarray  # (T,)
    upper: np.ndarray  # (T,)
    alpha: float
    achieved_tail: float
    achieved_coverage: float
    degenerate: np.ndarray  # (T,) bool, zero-spread components
    tail_reachable: bool


def _min_inside_count(b_total: int, alpha: float) -> int:
    """Smallest integer count with count / B >= 1 - alpha."""
    target = 1.0 - alpha
    count = int(np.ceil(b_total * target))
    while count > 0 and (count - 1) / b_total >= target:
        count -= 1
    while count <= b_total and count / b_total < target:
        count += 1
    return count


def calibrate(draws: BootstrapDraws, alpha: float) -> Bands:
    """Choose the equal-tail level and the per-component band offsets."""
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie strictly inside (0, 1), got {alpha}")
    deltas = np.asarray(draws.deltas, dtype=np.float64)
    b_total, t_total = deltas.shape
    if t_total < 1:
        raise ValueError("draws must cover at least one component")

    sorted_cols = np.sort(deltas, axis=0, kind="stable")
    degenerate = sorted_cols[0] == sorted_cols[-1]
    k_max = max(1, (b_total - 1) // 2)

    if bool(np.all(degenerate)):
        k = k_max
        coverage = 1.0
        reachable = True
    else:
        depth = np.full(b_total, np.iinfo(np.int64).max, dtype=np.int64)
        for t in range(t_total):
            if degenerate[t]:
                continue
            col = deltas[:, t]
            ordered = sorted_cols[:, t]
            below = np.searchsorted(ordered, col, side="left")
            above = b_total - np.searchsorted(ordered, col, side="right")
            np.minimum(depth, np.minimum(below, above), out=depth)
        need = _min_inside_count(b_total, alpha)
        if need > b_total:
            k_star = 0
        else:
            k_star = int(np.partition(depth, b_total - need)[b_total - need])
        k_star = min(k_star, k_max)
        reachable = k_star >= 1
        k = max(1, k_star)
        coverage = float(np.count_nonzero(depth >= k) / b_total)

    lower = sorted_cols[k - 1].copy()
    upper = sorted_cols[b_total - k].copy()
    return Bands(
        lower=lower,
        upper=upper,
        alpha=float(alpha),
        achieved_tail=k / b_total,
        achieved_coverage=coverage,
        degenerate=degenerate,
        tail_reachable=reachable,
    )


def band_intervals(bands: Bands, f_bar: np.ndarray) -> np.ndarray:
    """Per-component intervals for the true values: (f_bar - u, f_bar - l).

    The upper bootstrap offset bounds f_bar minus the truth from above,
    hence it produces the interval's lower endpoint.
    """
    f = np.asarray(f_bar, dtype=np.float64)
    if f.shape != bands.lower.shape:
        raise ValueError("f_bar length does not match the calibrated bands")
    return np.column_stack((f - bands.upper, f - bands.lower))


def covers(intervals: np.ndarray, truth) -> bool:
    """True iff every truth value lies strictly inside its interval."""
    iv = np.asarray(intervals, dtype=np.float64)
    tr = np.asarray(truth, dtype=np.float64).reshape(-1)
    if iv.shape != (tr.shape[0], 2):
        raise ValueError("intervals and truth have mismatched lengths")
    return bool(np.all((tr > iv[:, 0]) & (tr < iv[:, 1])))


def save_bands_csv(path, x_tilde, f_bar, bands: Bands, metadata: str = "") -> None:
    """Write intervals as CSV: t, x_tilde, f_bar, lower, upper."""
    x = np.asarray(x_tilde, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    iv = band_intervals(bands, f_bar)
    dim = x.shape[1]
    xcols = "x_tilde" if dim == 1 else ",".join(f"x_tilde_{j + 1}" for j in range(dim))
    with open(path, "w", encoding="utf-8") as fh:
        if metadata:
            fh.write(f"# {metadata}\n")
        fh.write(f"t,{xcols},f_bar,lower,upper\n")
        for t in range(x.shape[0]):
            coords = ",".join(repr(float(v)) for v in x[t])
            fh.write(
                f"{t},{coords},{float(f_bar[t])!r},{float(iv[t, 0])!r},{float(iv[t, 1])!r}\n"
            )
