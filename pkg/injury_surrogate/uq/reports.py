"""Summary documents and histogram tables written by the stats command."""

import json
import logging
from collections.abc import Mapping
from pathlib import Path
from typing import Any

import pandas as pd

from injury_surrogate.campaign.records import Metric
from injury_surrogate.uq.statistics import DistributionSummary
from injury_surrogate.uq.statistics import Histogram

logger = logging.getLogger(__name__)

HISTOGRAM_COLUMNS = ["bin_lo", "bin_hi", "density"]


def write_json(document: Mapping[str, Any], path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")
    return path


def summary_document(
    summaries: Mapping[Metric, DistributionSummary],
    settings: Mapping[str, Any] | None = None,
) -> dict[str, Any]:
    """Structured summary with one section per metric, in metric order."""
    return {
        "settings": dict(settings or {}),
        "metrics": {
            metric.value: summaries[metric].to_dict()
            for metric in Metric
            if metric in summaries
        },
    }


def write_summary(
    summaries: Mapping[Metric, DistributionSummary],
    path: Path | str,
    settings: Mapping[str, Any] | None = None,
) -> Path:
    path = write_json(summary_document(summaries, settings), path)
    logger.info(f"Wrote summary for {', '.join(m.value for m in summaries)} to {path}")
    return path


def histogram_frame(histogram: Histogram) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "bin_lo": histogram.edges[:-1],
            "bin_hi": histogram.edges[1:],
            "density": histogram.densities,
        },
        columns=HISTOGRAM_COLUMNS,
    )


def write_histogram(histogram: Histogram, path: Path | str) -> Path:
    """Write ``bin_lo,bin_hi,density`` rows with full float precision."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    histogram_frame(histogram).to_csv(path, index=False, lineterminator="\n", float_format="%.17g")
    return path


def read_histogram(path: Path | str) -> Histogram:
    frame = pd.read_csv(path, float_precision="round_trip")
    edges = [*frame["bin_lo"].to_list(), float(frame["bin_hi"].iloc[-1])]
    return Histogram(
        edges=pd.Series(edges, dtype=float).to_numpy(),
        densities=frame["density"].to_numpy(dtype=float),
    )
