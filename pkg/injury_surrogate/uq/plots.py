"""Static SVG figures: injury-metric histograms, parity plots and posterior surfaces."""

import logging
from collections.abc import Sequence
from pathlib import Path

import matplotlib as mpl

mpl.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

from injury_surrogate.campaign.records import METRIC_LABELS  # noqa: E402
from injury_surrogate.campaign.records import Metric  # noqa: E402
from injury_surrogate.gp.model import GpModel  # noqa: E402
from injury_surrogate.uq.statistics import DistributionSummary  # noqa: E402
from injury_surrogate.uq.statistics import Histogram  # noqa: E402

logger = logging.getLogger(__name__)

# fixed salt and no date keep repeated renders byte-identical
SVG_RC = {"svg.hashsalt": "injury-surrogate", "svg.fonttype": "path"}
SVG_METADATA = {"Date": None}
SURFACE_RESOLUTION = 60
VAR_COLORS = ("tab:orange", "tab:red", "tab:purple", "tab:brown")


def var_line_gid(percentile: float) -> str:
    return f"var-{percentile:g}"


def var_region_gid(percentile: float) -> str:
    return f"var-{percentile:g}-exceedance"


def _metric_label(metric: Metric | None) -> str:
    return METRIC_LABELS[metric] if metric else "Injury metric"


def make_histogram_figure(
    histogram: Histogram,
    summary: DistributionSummary,
    width: float = 8,
    height: float = 5,
) -> plt.Figure:
    """Histogram of an injury-metric distribution with its VaR levels marked.

    Each VaR level gets a vertical line and a shaded exceedance region running
    from the VaR value to the upper end of the histogram. Both carry SVG ids
    (``var-90`` and ``var-90-exceedance`` for the 90th percentile).

    Args:
        histogram: Empirical density of the distribution
        summary: Summary holding the VaR levels
        width: Figure width in inches
        height: Figure height in inches

    Returns:
        matplotlib.figure.Figure: The histogram figure
    """
    figure, axes = plt.subplots(figsize=(width, height))
    axes.stairs(
        histogram.densities,
        histogram.edges,
        fill=True,
        color="tab:blue",
        alpha=0.6,
        label="Empirical PDF",
    )

    upper = float(histogram.edges[-1])
    for index, (percentile, value) in enumerate(summary.var_levels):
        color = VAR_COLORS[index % len(VAR_COLORS)]
        region = Rectangle(
            (value, 0.0),
            max(upper - value, 0.0),
            1.0,
            transform=axes.get_xaxis_transform(),
            facecolor=color,
            alpha=0.15,
            edgecolor="none",
            gid=var_region_gid(percentile),
        )
        axes.add_patch(region)
        axes.axvline(
            value,
            color=color,
            linestyle="--",
            linewidth=1.5,
            gid=var_line_gid(percentile),
            label=f"VaR {percentile:g}% = {value:.4g}",
        )

    axes.set(
        xlabel=_metric_label(summary.metric),
        ylabel="Probability density",
        title=f"{_metric_label(summary.metric)} distribution ({summary.n_samples} samples)",
    )
    axes.legend(loc="upper left")
    figure.tight_layout()
    return figure


def make_parity_figure(
    predicted: Sequence[float],
    observed: Sequence[float],
    threshold_pct: float,
    metric: Metric | None = None,
    width: float = 6,
    height: float = 6,
) -> plt.Figure:
    """Predicted versus observed values with the relative-error acceptance band."""
    predicted = np.asarray(predicted, dtype=float)
    observed = np.asarray(observed, dtype=float)
    figure, axes = plt.subplots(figsize=(width, height))

    values = np.concatenate([predicted, observed])
    low, high = float(values.min()), float(values.max())
    pad = 0.05 * (high - low) if high > low else max(abs(high), 1.0) * 0.05
    line = np.array([low - pad, high + pad])
    band = threshold_pct / 100.0

    axes.plot(line, line, color="black", linewidth=1, gid="parity-line")
    axes.fill_between(
        line,
        line * (1 - band),
        line * (1 + band),
        color="tab:green",
        alpha=0.15,
        label=f"±{threshold_pct:g}% of observed",
    )
    axes.scatter(observed, predicted, color="tab:blue", zorder=3, gid="parity-points")
    axes.set(
        xlim=tuple(line),
        ylim=tuple(line),
        xlabel=f"Observed {_metric_label(metric)}",
        ylabel=f"Predicted {_metric_label(metric)}",
        aspect="equal",
    )
    axes.legend(loc="upper left")
    figure.tight_layout()
    return figure


def make_surface_figure(
    model: GpModel,
    resolution: int = SURFACE_RESOLUTION,
    width: float = 11,
    height: float = 4.5,
) -> plt.Figure:
    """Posterior mean and standard deviation over the design box."""
    box = model.box
    torso = np.linspace(box.torso_angle_range[0], box.torso_angle_range[1], resolution)
    dring = np.linspace(box.dring_z_range[0], box.dring_z_range[1], resolution)
    grid_torso, grid_dring = np.meshgrid(torso, dring)
    queries = np.column_stack([grid_torso.ravel(), grid_dring.ravel()])
    means, variances = model.predict_many(queries)

    figure, (mean_axes, std_axes) = plt.subplots(1, 2, figsize=(width, height))
    panels = (
        (mean_axes, means, "viridis", f"Posterior mean {_metric_label(model.metric)}"),
        (std_axes, np.sqrt(variances), "magma", "Posterior standard deviation"),
    )
    train = np.array([p.as_tuple() for p in model.train_inputs])
    for axes, values, colormap, title in panels:
        image = axes.contourf(
            grid_torso, grid_dring, values.reshape(grid_torso.shape), levels=20, cmap=colormap
        )
        figure.colorbar(image, ax=axes)
        axes.scatter(train[:, 0], train[:, 1], color="white", edgecolor="black", s=20)
        axes.set(xlabel="Torso angle (deg)", ylabel="D-ring Z", title=title)

    figure.tight_layout()
    return figure


def save_svg(figure: plt.Figure, path: Path | str) -> Path:
    """Write ``figure`` as SVG and release it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with mpl.rc_context(SVG_RC):
        figure.savefig(path, format="svg", metadata=SVG_METADATA)
    plt.close(figure)
    logger.debug(f"Wrote {path}")
    return path
