import json

import numpy as np

from injury_surrogate.campaign.records import Metric
from injury_surrogate.uq.reports import HISTOGRAM_COLUMNS
from injury_surrogate.uq.reports import read_histogram
from injury_surrogate.uq.reports import summary_document
from injury_surrogate.uq.reports import write_histogram
from injury_surrogate.uq.reports import write_summary
from injury_surrogate.uq.statistics import empirical_pdf
from injury_surrogate.uq.statistics import summarize


class TestReports:
    def setup_method(self):
        rng = np.random.default_rng(1)
        self.values = rng.normal(14.4, 0.7, size=1000)
        self.summaries = {
            Metric.A_T1_MAX: summarize(self.values, metric=Metric.A_T1_MAX),
            Metric.HIC15: summarize(rng.normal(26, 5, size=1000), metric=Metric.HIC15),
        }

    def test_summary_sections_follow_metric_order(self):
        document = summary_document(self.summaries, {"lhs_seed": 0})
        assert list(document["metrics"]) == ["hic15", "a_t1_max"]
        assert document["settings"] == {"lhs_seed": 0}

    def test_written_summary_is_json(self, tmp_path):
        path = write_summary(self.summaries, tmp_path / "out" / "summary.json")
        document = json.loads(path.read_text(encoding="utf-8"))
        hic15 = document["metrics"]["hic15"]
        assert hic15["var"]["90"] == self.summaries[Metric.HIC15].var(90)
        assert hic15["n_samples"] == 1000  # noqa: PLR2004

    def test_histogram_csv_keeps_full_precision(self, tmp_path):
        histogram = empirical_pdf(self.values, 100)
        path = write_histogram(histogram, tmp_path / "histogram.csv")
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == ",".join(HISTOGRAM_COLUMNS)
        assert len(lines) == 101  # noqa: PLR2004
        reloaded = read_histogram(path)
        np.testing.assert_array_equal(reloaded.edges, histogram.edges)
        np.testing.assert_array_equal(reloaded.densities, histogram.densities)
