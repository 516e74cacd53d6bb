"""Distribution summaries and empirical densities of injury-metric samples."""

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from injury_surrogate.campaign.records import Metric
from injury_surrogate.errors import DataError
from injury_surrogate.errors import RequestError

logger = logging.getLogger(__name__)

DEFAULT_PERCENTILES = (90.0, 95.0)
DEFAULT_MODE_BINS = 100
# relative width of the single bin used when every value is identical
DEGENERATE_BIN_WIDTH = 1e-9


@dataclass(frozen=True)
class Histogram:
    """Equal-width histogram normalized to a probability density.

    Attributes:
        edges: Bin edges, length ``bins + 1``
        densities: Density per bin; Σ density · width = 1
    """

    edges: np.ndarray
    densities: np.ndarray

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.densities * self.widths))


@dataclass(frozen=True)
class DistributionSummary:
    """Statistical properties of one injury-metric distribution.

    Attributes:
        metric: Metric the values belong to, when known
        n_samples: Number of values summarized
        mean: Arithmetic mean
        std: Sample standard deviation (n - 1 denominator)
        mode: Midpoint of the tallest histogram bin
        min: Smallest value
        max: Largest value
        var_levels: (percentile, value) pairs in ascending percentile order
    """

    metric: Metric | None
    n_samples: int
    mean: float
    std: float
    mode: float
    min: float
    max: float
    var_levels: tuple[tuple[float, float], ...]

    def var(self, percentile: float) -> float:
        for level, value in self.var_levels:
            if level == percentile:
                return value
        msg = f"VaR at {percentile:g} was not computed"
        raise RequestError(msg)

    def to_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "mean": self.mean,
            "std": self.std,
            "mode": self.mode,
            "min": self.min,
            "max": self.max,
            "var": {f"{p:g}": v for p, v in self.var_levels},
            "mean_minus_std": self.mean - self.std,
            "mean_plus_std": self.mean + self.std,
            "max_above_mean": self.max - self.mean,
        }


def _checked_values(values: Sequence[float] | np.ndarray) -> np.ndarray:
    array = np.asarray(values, dtype=float).ravel()
    if array.size == 0:
        msg = "Cannot summarize an empty set of values"
        raise DataError(msg)
    if not np.all(np.isfinite(array)):
        msg = "Values contain NaN or Inf"
        raise DataError(msg)
    return array


def empirical_pdf(values: Sequence[float] | np.ndarray, bins: int) -> Histogram:
    """Empirical probability density over equal-width bins spanning [min, max].

    When every value is identical the result is one bin of width
    ``DEGENERATE_BIN_WIDTH`` (relative to the value) holding all the mass.

    Args:
        values: Samples
        bins: Number of bins (>= 1)

    Returns:
        Histogram: Edges and densities
    """
    array = _checked_values(values)
    if bins < 1:
        msg = f"bins must be >= 1, got {bins}"
        raise RequestError(msg)

    low, high = float(array.min()), float(array.max())
    if low == high:
        half = 0.5 * DEGENERATE_BIN_WIDTH * max(1.0, abs(low))
        edges = np.array([low - half, low + half])
        return Histogram(edges=edges, densities=np.array([1.0 / (edges[1] - edges[0])]))

    densities, edges = np.histogram(array, bins=bins, range=(low, high), density=True)
    return Histogram(edges=edges, densities=densities)


def summarize(
    values: Sequence[float] | np.ndarray,
    percentiles: Sequence[float] = DEFAULT_PERCENTILES,
    mode_bins: int = DEFAULT_MODE_BINS,
    metric: Metric | None = None,
) -> DistributionSummary:
    """Summarize a sample of injury-metric values.

    VaR at p is the empirical p-th percentile with linear interpolation between
    order statistics.

    Args:
        values: Finite samples, at least one
        percentiles: VaR levels, each in (0, 100)
        mode_bins: Histogram bins used for the mode estimate
        metric: Metric recorded on the summary

    Returns:
        DistributionSummary: Mean, std, mode, min, max and VaR levels

    Raises:
        DataError: Empty or non-finite values
        RequestError: Percentiles outside (0, 100)
    """
    array = _checked_values(values)
    levels = sorted(float(p) for p in percentiles)
    if any(not 0 < p < 100 for p in levels):  # noqa: PLR2004
        msg = f"Percentiles must lie in (0, 100), got {levels}"
        raise RequestError(msg)

    histogram = empirical_pdf(array, mode_bins)
    peak = int(np.argmax(histogram.densities))
    low, high = float(array.min()), float(array.max())
    mode = low if low == high else float(0.5 * (histogram.edges[peak] + histogram.edges[peak + 1]))

    var_values = np.percentile(array, levels, method="linear") if levels else []
    std = float(np.std(array, ddof=1)) if array.size > 1 else 0.0

    return DistributionSummary(
        metric=metric,
        n_samples=int(array.size),
        mean=float(np.mean(array)),
        std=std,
        mode=mode,
        min=low,
        max=high,
        var_levels=tuple((p, float(v)) for p, v in zip(levels, var_values, strict=True)),
    )
