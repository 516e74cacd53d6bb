import xml.etree.ElementTree as ET

import matplotlib.pyplot as plt
import numpy as np
import pytest

from injury_surrogate.campaign.records import Metric
from injury_surrogate.uq.plots import make_histogram_figure
from injury_surrogate.uq.plots import make_parity_figure
from injury_surrogate.uq.plots import make_surface_figure
from injury_surrogate.uq.plots import save_svg
from injury_surrogate.uq.plots import var_line_gid
from injury_surrogate.uq.plots import var_region_gid
from injury_surrogate.uq.statistics import empirical_pdf
from injury_surrogate.uq.statistics import summarize

SVG_NAMESPACE = "{http://www.w3.org/2000/svg}"


def _svg_ids(path):
    root = ET.parse(path).getroot()  # noqa: S314
    assert root.tag == f"{SVG_NAMESPACE}svg"
    return {element.get("id") for element in root.iter() if element.get("id")}


class TestHistogramFigure:
    def setup_method(self):
        values = np.random.default_rng(0).normal(26, 5, size=2000)
        self.summary = summarize(values, (90, 95), metric=Metric.HIC15)
        self.histogram = empirical_pdf(values, 50)

    def teardown_method(self):
        plt.close("all")

    def test_var_regions_start_at_var(self):
        figure = make_histogram_figure(self.histogram, self.summary)
        axes = figure.axes[0]
        regions = {patch.get_gid(): patch for patch in axes.patches if patch.get_gid()}
        for percentile, value in self.summary.var_levels:
            region = regions[var_region_gid(percentile)]
            assert region.get_x() == value
            assert region.get_x() + region.get_width() == pytest.approx(self.histogram.edges[-1])
        lines = {line.get_gid(): line for line in axes.lines}
        for percentile, value in self.summary.var_levels:
            assert lines[var_line_gid(percentile)].get_xdata()[0] == value

    def test_svg_carries_var_ids(self, tmp_path):
        path = save_svg(make_histogram_figure(self.histogram, self.summary), tmp_path / "histogram.svg")
        ids = _svg_ids(path)
        assert {"var-90", "var-95", "var-90-exceedance", "var-95-exceedance"} <= ids

    def test_repeated_renders_are_identical(self, tmp_path):
        first = save_svg(make_histogram_figure(self.histogram, self.summary), tmp_path / "a.svg")
        second = save_svg(make_histogram_figure(self.histogram, self.summary), tmp_path / "b.svg")
        assert first.read_bytes() == second.read_bytes()

    def test_save_closes_the_figure(self, tmp_path):
        figure = make_histogram_figure(self.histogram, self.summary)
        save_svg(figure, tmp_path / "histogram.svg")
        assert not plt.fignum_exists(figure.number)


class TestOtherFigures:
    def teardown_method(self):
        plt.close("all")

    def test_parity_figure(self, tmp_path):
        figure = make_parity_figure([14.1, 15.0, 13.2], [14.0, 16.3, 13.1], 10.0, Metric.A_T1_MAX)
        ids = _svg_ids(save_svg(figure, tmp_path / "parity.svg"))
        assert {"parity-line", "parity-points"} <= ids

    def test_parity_figure_with_identical_values(self, tmp_path):
        figure = make_parity_figure([5.0], [5.0], 10.0)
        assert save_svg(figure, tmp_path / "parity.svg").stat().st_size > 0

    def test_surface_figure(self, tmp_path, full_models):
        figure = make_surface_figure(full_models[Metric.HIC15], resolution=15)
        assert len(figure.axes) == 4  # noqa: PLR2004
        _svg_ids(save_svg(figure, tmp_path / "surface.svg"))
