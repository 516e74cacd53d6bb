"""
Tests for distribution summaries and empirical densities.

VaR values are checked against a sort-and-interpolate oracle using the same
interpolation formula as ``numpy.percentile(method="linear")``.
"""

import math

import numpy as np
import pytest

from injury_surrogate.campaign.records import DesignBox
from injury_surrogate.campaign.records import Metric
from injury_surrogate.errors import DataError
from injury_surrogate.errors import RequestError
from injury_surrogate.uq.sampling import lhs_design
from injury_surrogate.uq.sampling import pushforward
from injury_surrogate.uq.statistics import empirical_pdf
from injury_surrogate.uq.statistics import summarize


def _sort_and_interpolate(values, percentile):
    ordered = sorted(values)
    position = (len(ordered) - 1) * (percentile / 100)
    lower = math.floor(position)
    upper = min(lower + 1, len(ordered) - 1)
    gamma = position - lower
    a, b = ordered[lower], ordered[upper]
    if gamma >= 0.5:  # noqa: PLR2004
        return b - (b - a) * (1 - gamma)
    return a + (b - a) * gamma


class TestSummarize:
    def test_constant_values(self):
        summary = summarize([7.0] * 50)
        assert summary.mean == 7.0  # noqa: PLR2004
        assert summary.std == 0.0
        assert summary.mode == 7.0  # noqa: PLR2004
        assert summary.min == summary.max == 7.0  # noqa: PLR2004
        assert summary.var(90) == summary.var(95) == 7.0  # noqa: PLR2004

    def test_single_value(self):
        summary = summarize([3.5])
        assert summary.std == 0.0
        assert summary.var(90) == 3.5  # noqa: PLR2004

    def test_one_to_hundred(self):
        summary = summarize(np.arange(1.0, 101.0))
        assert summary.var(90) == _sort_and_interpolate(range(1, 101), 90)
        assert summary.var(90) == pytest.approx(90.1)
        assert summary.mean == pytest.approx(50.5)

    @pytest.mark.parametrize("seed", range(100))
    def test_var_matches_sort_and_interpolate(self, seed):
        rng = np.random.default_rng(seed)
        values = rng.normal(loc=20, scale=5, size=int(rng.integers(1, 300)))
        levels = (90.0, 95.0, float(rng.uniform(1, 99)))
        summary = summarize(values, levels)
        for level in levels:
            assert summary.var(level) == _sort_and_interpolate(values.tolist(), level)

    def test_ordering_invariants(self):
        values = np.random.default_rng(2).gamma(2.0, 3.0, size=5000)
        summary = summarize(values, (50, 90, 95, 99))
        var_values = [v for _, v in summary.var_levels]
        assert var_values == sorted(var_values)
        assert summary.min <= var_values[0]
        assert var_values[-1] <= summary.max
        assert summary.min <= summary.mode <= summary.max
        assert summary.std >= 0

    def test_levels_are_sorted(self):
        summary = summarize(np.arange(10.0), (95, 90))
        assert [p for p, _ in summary.var_levels] == [90.0, 95.0]

    def test_mode_finds_the_peak(self):
        rng = np.random.default_rng(6)
        values = np.concatenate([rng.normal(10, 0.2, 5000), rng.uniform(0, 20, 500)])
        assert summarize(values).mode == pytest.approx(10.0, abs=0.5)

    def test_to_dict(self):
        summary = summarize(np.arange(1.0, 101.0), metric=Metric.HIC15)
        document = summary.to_dict()
        assert set(document["var"]) == {"90", "95"}
        assert document["mean_minus_std"] == pytest.approx(summary.mean - summary.std)
        assert document["max_above_mean"] == pytest.approx(49.5)

    def test_unknown_level(self):
        with pytest.raises(RequestError):
            summarize([1.0, 2.0]).var(99)

    @pytest.mark.parametrize("values", [[], [1.0, float("nan")], [float("inf")]])
    def test_invalid_values(self, values):
        with pytest.raises(DataError):
            summarize(values)

    @pytest.mark.parametrize("level", [0, 100, -5, 150])
    def test_invalid_levels(self, level):
        with pytest.raises(RequestError):
            summarize([1.0, 2.0, 3.0], (level,))


class TestEmpiricalPdf:
    def test_uniform_samples(self):
        unit = DesignBox((0.0, 1.0), (0.0, 1.0))
        values = lhs_design(1000, unit, seed=0)[:, 0]
        histogram = empirical_pdf(values, 10)
        assert len(histogram.densities) == 10  # noqa: PLR2004
        np.testing.assert_allclose(histogram.densities, 1.0, atol=0.15)

    def test_two_values_two_bins(self):
        histogram = empirical_pdf([0.0, 1.0], 2)
        np.testing.assert_allclose(histogram.densities, [1.0, 1.0])
        np.testing.assert_allclose(histogram.widths, [0.5, 0.5])

    @pytest.mark.parametrize("bins", [1, 7, 100])
    def test_density_integrates_to_one(self, bins):
        values = np.random.default_rng(bins).normal(size=3000)
        histogram = empirical_pdf(values, bins)
        assert histogram.total_mass == pytest.approx(1.0, abs=1e-9)
        assert histogram.edges[0] == values.min()
        assert histogram.edges[-1] == values.max()

    def test_identical_values_give_one_bin(self):
        histogram = empirical_pdf([4.2] * 10, 100)
        assert len(histogram.densities) == 1
        assert histogram.edges[0] < 4.2 < histogram.edges[1]  # noqa: PLR2004
        assert histogram.total_mass == pytest.approx(1.0)

    def test_rejects_zero_bins(self):
        with pytest.raises(RequestError):
            empirical_pdf([1.0, 2.0], 0)


@pytest.mark.slow
class TestInjuryDistributions:
    """Distributions of the 27-run models over 10,000 LHS input samples."""

    @pytest.fixture(scope="class")
    def summaries(self, full_models):
        result = {}
        for metric, model in full_models.items():
            values = pushforward(model, lhs_design(10_000, model.box, seed=0))
            result[metric] = (summarize(values, metric=metric), empirical_pdf(values, 100))
        return result

    def test_hic15(self, summaries):
        summary, _ = summaries[Metric.HIC15]
        assert summary.mean == pytest.approx(26.24, abs=1.5)
        assert summary.std == pytest.approx(4.88, abs=1.0)
        assert summary.min >= 17.0  # noqa: PLR2004
        assert summary.max <= 35.5  # noqa: PLR2004
        assert summary.var(90) == pytest.approx(32.8, abs=1.0)
        assert summary.var(95) == pytest.approx(33.09, abs=1.0)

    def test_a_t1_max(self, summaries):
        summary, _ = summaries[Metric.A_T1_MAX]
        assert summary.mean == pytest.approx(14.41, abs=0.5)
        assert summary.std == pytest.approx(0.7, abs=0.3)
        assert summary.var(90) == pytest.approx(15.22, abs=0.5)
        assert summary.var(95) == pytest.approx(15.5, abs=0.5)

    @pytest.mark.parametrize("metric", list(Metric))
    def test_mode_lies_in_the_densest_region(self, summaries, metric):
        summary, histogram = summaries[metric]
        assert summary.min <= summary.mode <= summary.max
        peak = int(np.argmax(histogram.densities))
        centre = 0.5 * (histogram.edges[peak] + histogram.edges[peak + 1])
        assert abs(summary.mode - centre) <= 2 * histogram.widths[peak]
