"""Trajectory evaluation against ground truth.

Aligns estimated fixes with a reference track by timestamp
interpolation, reduces the paired errors to summary statistics with a
Gaussian fit, and prepares histogram rows for external plotting. All
statistics use the population convention (divisor n), which coincides
with the Gaussian maximum-likelihood fit.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateInputError, DomainError, NoOverlapError
from .validation import check_positive

_PCT_NORMS = ("path_scale", "truth_distance")


@dataclass(frozen=True)
class GroundTruthTrack:
    """Reference positions over time, optionally labelled."""

    points: tuple

    def __post_init__(self):
        cleaned = []
        for entry in self.points:
            if len(entry) == 2:
                t, pos = entry
                label = None
            else:
                t, pos, label = entry
            cleaned.append((float(t), (float(pos[0]), float(pos[1])), label))
        if len(cleaned) < 2:
            raise DomainError("ground truth needs at least 2 points")
        times = [t for t, _, _ in cleaned]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise DomainError("ground truth timestamps must be strictly increasing")
        object.__setattr__(self, "points", tuple(cleaned))

    @property
    def t_start_s(self) -> float:
        return self.points[0][0]

    @property
    def t_end_s(self) -> float:
        return self.points[-1][0]

    def times(self) -> list:
        return [t for t, _, _ in self.points]

    def position_at(self, t: float) -> np.ndarray:
        times = self.times()
        xs = [p[0] for _, p, _ in self.points]
        ys = [p[1] for _, p, _ in self.points]
        return np.array(
            [np.interp(t, times, xs), np.interp(t, times, ys)], dtype=float
        )


@dataclass(frozen=True)
class Alignment:
    """Fix/truth pairs plus the count of fixes that found no partner.

    Iterates as the pair list, so it can be passed anywhere a plain
    list of (fix, truth_position) is expected.
    """

    pairs: tuple
    n_dropped: int

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self):
        return len(self.pairs)


@dataclass(frozen=True)
class ErrorStats:
    """Summary of per-fix position errors."""

    n: int
    mean_m: float
    sigma_m: float
    max_m: float
    fitted_mu_m: float
    fitted_sigma_m: float
    histogram: tuple

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "mean_m": self.mean_m,
            "sigma_m": self.sigma_m,
            "max_m": self.max_m,
            "fitted_mu_m": self.fitted_mu_m,
            "fitted_sigma_m": self.fitted_sigma_m,
            "histogram": [list(row) for row in self.histogram],
        }


def align(fixes: Sequence, truth: GroundTruthTrack, max_gap_s: float) -> Alignment:
    """Pair each fix with the interpolated truth at the fix timestamp.

    Fixes outside the truth time span, or whose timestamp sits farther
    than ``max_gap_s`` from every truth sample, are dropped and counted.
    """
    check_positive(max_gap_s, "max_gap_s")
    times = truth.times()
    xs = np.array([p[0] for _, p, _ in truth.points])
    ys = np.array([p[1] for _, p, _ in truth.points])
    t_arr = np.array(times)

    pairs = []
    dropped = 0
    for fix in fixes:
        t = fix.t
        if t < times[0] or t > times[-1]:
            dropped += 1
            continue
        idx = bisect_left(times, t)
        left = times[max(idx - 1, 0)]
        right = times[min(idx, len(times) - 1)]
        if min(abs(t - left), abs(t - right)) > max_gap_s:
            dropped += 1
            continue
        pos = np.array([np.interp(t, t_arr, xs), np.interp(t, t_arr, ys)])
        pairs.append((fix, pos))
    if not pairs:
        raise NoOverlapError(
            "no fix timestamp overlaps the ground-truth span within max_gap_s"
        )
    return Alignment(pairs=tuple(pairs), n_dropped=dropped)


def _pair_errors(pairs: Sequence) -> np.ndarray:
    errors = np.array(
        [
            math.hypot(fix.position[0] - pos[0], fix.position[1] - pos[1])
            for fix, pos in pairs
        ]
    )
    if errors.size == 0:
        raise DomainError("need at least one (fix, truth) pair")
    return errors


def error_stats(pairs: Sequence) -> ErrorStats:
    """Reduce aligned pairs to error statistics and a histogram.

    Histogram bin width follows the Freedman-Diaconis rule, clamped so
    at least 20 bins always cover the error range.
    """
    errors = _pair_errors(pairs)
    n = errors.size
    mean = float(np.mean(errors))
    sigma = float(np.std(errors))
    peak = float(np.max(errors))

    # Gaussian maximum likelihood: mu is the sample mean, sigma the
    # root mean squared deviation about it (divisor n).
    fitted_mu = float(errors.sum() / n)
    fitted_sigma = float(math.sqrt(np.sum((errors - fitted_mu) ** 2) / n))

    q75, q25 = np.percentile(errors, [75.0, 25.0])
    lo = float(errors.min())
    hi = float(errors.max())
    span = hi - lo
    width = 2.0 * (q75 - q25) / n ** (1.0 / 3.0)
    if width > 0.0 and span > 0.0:
        bins = max(20, math.ceil(span / width))
    else:
        bins = 20
    # Edges collapse when the span is below the float spacing of the edge
    # values; widen to a unit window around the (near-)constant value, the
    # same range numpy picks when every sample is equal.
    if span <= bins * max(np.spacing(abs(lo)), np.spacing(abs(hi))):
        counts, edges = np.histogram(errors, bins=bins, range=(lo - 0.5, hi + 0.5))
    else:
        counts, edges = np.histogram(errors, bins=bins)
    histogram = tuple(
        (float(edges[i]), float(edges[i + 1]), int(counts[i]))
        for i in range(len(counts))
    )
    return ErrorStats(
        n=int(n),
        mean_m=mean,
        sigma_m=sigma,
        max_m=peak,
        fitted_mu_m=fitted_mu,
        fitted_sigma_m=fitted_sigma,
        histogram=histogram,
    )


def gaussian_pdf(x, mu: float, sigma: float):
    """Normal density with mean ``mu`` and width ``sigma``, per meter."""
    if not (sigma > 0.0) or not math.isfinite(sigma):
        raise DomainError(f"sigma must be positive, got {sigma!r}")
    arr = np.asarray(x, dtype=float)
    out = np.exp(-((arr - mu) ** 2) / (2.0 * sigma * sigma)) / (
        sigma * math.sqrt(2.0 * math.pi)
    )
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out


def percent_distance_error(
    pairs: Sequence, normalization: str = "path_scale"
) -> tuple:
    """Mean and sigma of per-pair errors as percentages of a path scale.

    ``path_scale`` divides each error by (total ground-truth path length
    / number of pairs); ``truth_distance`` divides by the total path
    length itself. A reference track with zero path length cannot be
    normalized.
    """
    if normalization not in _PCT_NORMS:
        raise DomainError(
            f"normalization must be one of {_PCT_NORMS}, got {normalization!r}"
        )
    pairs = list(pairs)
    if not pairs:
        raise DomainError("need at least one (fix, truth) pair")
    truth_xy = np.array([pos for _, pos in pairs], dtype=float)
    steps = np.linalg.norm(np.diff(truth_xy, axis=0), axis=1)
    path_length = float(steps.sum())
    if path_length <= 0.0:
        raise DegenerateInputError(
            "ground-truth path length is zero; percentage error is undefined"
        )
    if normalization == "path_scale":
        scale = path_length / len(pairs)
    else:
        scale = path_length
    errors = _pair_errors(pairs)
    pct = 100.0 * errors / scale
    return float(np.mean(pct)), float(np.std(pct))


def histogram_rows(stats: ErrorStats) -> list:
    """Histogram rows (bin_lo, bin_hi, count, pdf_fit) for plotting.

    ``pdf_fit`` is the fitted Gaussian evaluated at the bin center, or
    0.0 when the fit is degenerate (zero sigma).
    """
    rows = []
    for lo, hi, count in stats.histogram:
        center = 0.5 * (lo + hi)
        if stats.fitted_sigma_m > 0.0:
            fit = gaussian_pdf(center, stats.fitted_mu_m, stats.fitted_sigma_m)
        else:
            fit = 0.0
        rows.append((lo, hi, count, fit))
    return rows
