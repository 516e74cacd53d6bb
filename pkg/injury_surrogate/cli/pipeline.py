"""Command implementations behind ``manage.py surrogate``.

Every function takes a resolved :class:`RunConfig`, writes its files under
``config.out`` and returns what it computed so the command can report it.
"""

import logging
import re
from collections.abc import Mapping
from dataclasses import dataclass
from dataclasses import field
from pathlib import Path

from injury_surrogate.adaptive.candidates import CandidateSet
from injury_surrogate.adaptive.candidates import CandidateSource
from injury_surrogate.adaptive.candidates import from_file
from injury_surrogate.adaptive.candidates import grid_midpoints
from injury_surrogate.adaptive.candidates import lhs_pool
from injury_surrogate.adaptive.refinement import AccuracyReport
from injury_surrogate.adaptive.refinement import AdaptiveLoopSuspended
from injury_surrogate.adaptive.refinement import LedgerOracle
from injury_surrogate.adaptive.refinement import adaptive_loop
from injury_surrogate.adaptive.refinement import augment_and_refit
from injury_surrogate.adaptive.refinement import evaluate_accuracy
from injury_surrogate.adaptive.refinement import propose_points
from injury_surrogate.campaign.fixture import load_fixture
from injury_surrogate.campaign.io import export
from injury_surrogate.campaign.io import ingest
from injury_surrogate.campaign.io import read_pending
from injury_surrogate.campaign.io import write_pending
from injury_surrogate.campaign.records import InputPoint
from injury_surrogate.campaign.records import Ledger
from injury_surrogate.campaign.records import Metric
from injury_surrogate.campaign.records import RunRecord
from injury_surrogate.cli.config import RunConfig
from injury_surrogate.errors import DataError
from injury_surrogate.errors import RequestError
from injury_surrogate.gp.fitting import MIN_TRAINING_POINTS
from injury_surrogate.gp.fitting import fit
from injury_surrogate.gp.model import GpModel
from injury_surrogate.gp.serialization import load_model
from injury_surrogate.gp.serialization import save_model
from injury_surrogate.uq.plots import make_histogram_figure
from injury_surrogate.uq.plots import make_parity_figure
from injury_surrogate.uq.plots import make_surface_figure
from injury_surrogate.uq.plots import save_svg
from injury_surrogate.uq.reports import write_histogram
from injury_surrogate.uq.reports import write_json
from injury_surrogate.uq.reports import write_summary
from injury_surrogate.uq.sampling import lhs_design
from injury_surrogate.uq.sampling import pushforward
from injury_surrogate.uq.statistics import DistributionSummary
from injury_surrogate.uq.statistics import empirical_pdf
from injury_surrogate.uq.statistics import summarize

logger = logging.getLogger(__name__)

LEDGER_FILENAME = "ledger.csv"
SUMMARY_FILENAME = "summary.json"
_CASE_RANGE = re.compile(r"^\s*(\d+)\s*(?:-\s*(\d+)\s*)?$")


# ------------------------------------------------------------------------------
# file names under --out


def model_file(out: Path, metric: Metric) -> Path:
    return out / f"model_{metric.value}.json"


def archived_model_file(out: Path, metric: Metric, size: int) -> Path:
    return out / f"model_{metric.value}.n{size}.json"


def pending_file(out: Path, metric: Metric) -> Path:
    return out / f"pending_{metric.value}.csv"


def accuracy_file(out: Path, metric: Metric) -> Path:
    return out / f"accuracy_{metric.value}.json"


# ------------------------------------------------------------------------------
# inputs


def parse_cases(text: str) -> list[int]:
    """Expand ``"1-25,27"`` into case numbers, keeping first-seen order."""
    cases: list[int] = []
    for part in text.split(","):
        match = _CASE_RANGE.match(part)
        if not match:
            msg = f"Invalid case selection {part.strip()!r} in {text!r}"
            raise RequestError(msg)
        first = int(match.group(1))
        last = int(match.group(2) or first)
        if last < first:
            msg = f"Empty case range {part.strip()!r}"
            raise RequestError(msg)
        cases.extend(c for c in range(first, last + 1) if c not in cases)
    return cases


def resolve_ledger(
    config: RunConfig,
    *,
    fixture: bool = False,
    ledger_path: Path | None = None,
    cases: str | None = None,
) -> Ledger:
    """The ledger a command works on.

    ``--fixture`` selects the bundled 27-run table, ``--ledger`` a CSV file;
    without either, the ledger stored in the output directory is used.
    """
    if fixture and ledger_path:
        msg = "Use either --fixture or --ledger, not both"
        raise RequestError(msg)
    if fixture:
        ledger = load_fixture(config.box)
    else:
        path = ledger_path or config.out / LEDGER_FILENAME
        if not path.is_file():
            msg = f"No ledger at {path}; pass --fixture or --ledger"
            raise DataError(msg)
        ledger = ingest(path, config.box)
    if cases:
        ledger = ledger.select(parse_cases(cases))
    return ledger


def load_models(config: RunConfig, model_path: Path | None = None) -> dict[Metric, GpModel]:
    """Models for the configured metrics, or the single model at ``model_path``."""
    if model_path is not None:
        model = load_model(model_path)
        if model.metric is None:
            msg = f"{model_path} does not record which metric it predicts"
            raise DataError(msg)
        return {model.metric: model}
    return {metric: load_model(model_file(config.out, metric)) for metric in config.metrics}


def build_candidates(config: RunConfig) -> CandidateSet:
    if config.candidates == CandidateSource.LHS_POOL:
        return lhs_pool(config.box, config.candidate_pool_size, config.fit.seed)
    if config.candidates == CandidateSource.USER_SUPPLIED:
        return from_file(config.candidate_file, config.box)  # type: ignore[arg-type]
    return grid_midpoints(config.box, edge_midpoints=config.candidate_edge_midpoints)


def _next_case_id(*groups: tuple[int | None, ...]) -> int:
    known = [c for group in groups for c in group if c is not None]
    return max(known, default=0) + 1


def _write_accuracy(
    config: RunConfig, metric: Metric, reports: list[AccuracyReport], status: str
) -> Path:
    path = write_json(
        {
            "metric": metric.value,
            "status": status,
            "reports": [report.to_dict() for report in reports],
        },
        accuracy_file(config.out, metric),
    )
    last = reports[-1] if reports else None
    if last is not None:
        figure = make_parity_figure(
            [e.predicted for e in last.entries],
            [e.observed for e in last.entries],
            config.threshold_pct,
            metric,
        )
        save_svg(figure, config.out / f"parity_{metric.value}.svg")
    return path


def _store_refit(config: RunConfig, metric: Metric, previous: GpModel, refit: GpModel) -> None:
    """Archive the previous model file, then write the refit one in its place."""
    current = model_file(config.out, metric)
    if current.is_file():
        archive = archived_model_file(config.out, metric, len(previous))
        current.replace(archive)
        logger.info(f"Kept the {len(previous)}-run model as {archive}")
    save_model(refit, current)


# ------------------------------------------------------------------------------
# commands


def cmd_ingest(config: RunConfig, path: Path) -> Ledger:
    """Validate a ledger CSV and store it as the working ledger."""
    ledger = ingest(path, config.box)
    export(ledger, config.out / LEDGER_FILENAME)
    return ledger


def cmd_export(config: RunConfig, ledger: Ledger, path: Path | None = None) -> Path:
    return export(ledger, path or config.out / LEDGER_FILENAME)


@dataclass(frozen=True)
class FitOutcome:
    metric: Metric
    model: GpModel
    log_marginal_likelihood: float
    in_sample: AccuracyReport
    model_path: Path


def cmd_fit(config: RunConfig, ledger: Ledger) -> list[FitOutcome]:
    """Fit one model per configured metric and write model, report and surface files.

    Raises:
        DataError: Fewer than two runs in the ledger
    """
    if len(ledger) < MIN_TRAINING_POINTS:
        msg = f"Fitting needs at least {MIN_TRAINING_POINTS} runs; the ledger has {len(ledger)}"
        raise DataError(msg)

    outcomes = []
    for metric in config.metrics:
        model = fit(
            ledger.inputs(),
            ledger.outputs(metric),
            config.fit,
            config.box,
            case_ids=ledger.case_ids,
            metric=metric,
        )
        in_sample = evaluate_accuracy(model, ledger.runs, metric, config.threshold_pct)
        lml = model.log_marginal_likelihood()
        path = save_model(model, model_file(config.out, metric))
        write_json(
            {
                "metric": metric.value,
                "n_runs": len(model),
                "cases": list(model.case_ids),
                "kernel": model.params.to_dict(),
                "standardization": {"mean": model.output_mean, "scale": model.output_scale},
                "jitter": model.jitter,
                "log_marginal_likelihood": lml,
                "max_in_sample_error_pct": in_sample.worst_error_pct,
                "in_sample": [entry.to_dict() for entry in in_sample.entries],
            },
            config.out / f"fit_report_{metric.value}.json",
        )
        save_svg(make_surface_figure(model), config.out / f"surface_{metric.value}.svg")
        outcomes.append(FitOutcome(metric, model, lml, in_sample, path))
    return outcomes


def cmd_propose(
    config: RunConfig, models: Mapping[Metric, GpModel]
) -> dict[Metric, list[tuple[int, InputPoint]]]:
    """Write the ``k`` highest-variance candidates of each model to a pending manifest."""
    base = build_candidates(config)
    proposals = {}
    for metric, model in models.items():
        candidates = base.excluding(model.train_inputs)
        if len(candidates) == 0:
            msg = f"Every {base.provenance} candidate is already a training input"
            raise RequestError(msg)
        k = config.k
        if k > len(candidates):
            logger.warning(f"Only {len(candidates)} candidates left; proposing all of them")
            k = len(candidates)
        points = propose_points(model, candidates, k)
        first = _next_case_id(model.case_ids)
        entries = [(first + i, point) for i, point in enumerate(points)]
        write_pending(entries, pending_file(config.out, metric))
        proposals[metric] = entries
    return proposals


def _runs_for_pending(results: Ledger, pending_path: Path) -> list[RunRecord]:
    runs = []
    missing = []
    for case_id, point in read_pending(pending_path):
        run = results.find(point)
        if run is None:
            missing.append(f"case {case_id} at ({point.torso_angle:g}, {point.dring_z:g})")
        else:
            runs.append(run)
    if missing:
        msg = f"Results have no run for pending {', '.join(missing)}"
        raise DataError(msg)
    return runs


def cmd_check(
    config: RunConfig,
    models: Mapping[Metric, GpModel],
    results: Ledger,
    pending_path: Path | None = None,
) -> dict[Metric, AccuracyReport]:
    """Check each model against simulation results and write report and parity files.

    With ``pending_path`` every pending point must have a result, and only those
    runs are checked.
    """
    runs = list(results.runs) if pending_path is None else _runs_for_pending(results, pending_path)
    reports = {}
    for metric, model in models.items():
        report = evaluate_accuracy(model, runs, metric, config.threshold_pct)
        _write_accuracy(config, metric, [report], "passed" if report.passed else "failed")
        reports[metric] = report
    return reports


@dataclass(frozen=True)
class AugmentOutcome:
    metric: Metric
    model: GpModel
    added: tuple[int, ...]
    before: AccuracyReport
    after: AccuracyReport


def cmd_augment(
    config: RunConfig, models: Mapping[Metric, GpModel], results: Ledger
) -> list[AugmentOutcome]:
    """Add the failing result runs (all of them with ``augment_all``) and refit."""
    outcomes = []
    for metric, model in models.items():
        before = evaluate_accuracy(model, results.runs, metric, config.threshold_pct)
        failing = {entry.case_id for entry in before.failing}
        new_runs = [r for r in results.runs if config.augment_all or r.case_id in failing]
        if new_runs:
            refit = augment_and_refit(model, new_runs, metric)
            _store_refit(config, metric, model, refit)
        else:
            logger.info(f"{metric}: no failing runs, model unchanged")
            refit = model
        after = evaluate_accuracy(refit, results.runs, metric, config.threshold_pct)
        _write_accuracy(config, metric, [before, after], "passed" if after.passed else "failed")
        outcomes.append(
            AugmentOutcome(metric, refit, tuple(r.case_id for r in new_runs), before, after)
        )
    return outcomes


@dataclass
class AdaptOutcome:
    metric: Metric
    model: GpModel
    status: str
    reports: list[AccuracyReport] = field(default_factory=list)
    pending: list[tuple[int, InputPoint]] = field(default_factory=list)


def cmd_adapt(
    config: RunConfig, models: Mapping[Metric, GpModel], oracle_ledger: Ledger
) -> list[AdaptOutcome]:
    """Run the adaptive loop with ``oracle_ledger`` as the simulation oracle.

    When the ledger lacks a proposed point, the loop suspends: the points are
    written to the pending manifest and the latest model is saved.
    """
    base = build_candidates(config)
    oracle = LedgerOracle(oracle_ledger)
    outcomes = []
    for metric, model in models.items():
        try:
            final, reports = adaptive_loop(
                model,
                oracle,
                base,
                config.k,
                config.threshold_pct,
                config.max_rounds,
                metric=metric,
                augment_all=config.augment_all,
            )
        except AdaptiveLoopSuspended as e:
            first = _next_case_id(oracle_ledger.case_ids, e.model.case_ids)
            pending = [(first + i, point) for i, point in enumerate(e.points)]
            write_pending(pending, pending_file(config.out, metric))
            if len(e.model) != len(model):
                _store_refit(config, metric, model, e.model)
            if e.reports:
                _write_accuracy(config, metric, e.reports, "suspended")
            outcomes.append(AdaptOutcome(metric, e.model, "suspended", e.reports, pending))
            continue

        if len(final) != len(model):
            _store_refit(config, metric, model, final)
        status = "passed" if reports and reports[-1].passed else "failed"
        if reports:
            _write_accuracy(config, metric, reports, status)
        outcomes.append(AdaptOutcome(metric, final, status, reports))
    return outcomes


def cmd_stats(config: RunConfig, models: Mapping[Metric, GpModel]) -> dict[Metric, DistributionSummary]:
    """Push LHS samples through each model and write summary, histogram CSV and SVG."""
    design = lhs_design(config.lhs_samples, config.box, config.lhs_seed)
    summaries = {}
    for metric in Metric:
        if metric not in models:
            continue
        values = pushforward(
            models[metric],
            design,
            posterior_sampling=config.posterior_sampling,
            seed=config.lhs_seed,
        )
        summary = summarize(values, config.var_percentiles, config.histogram_bins, metric)
        histogram = empirical_pdf(values, config.histogram_bins)
        write_histogram(histogram, config.out / f"histogram_{metric.value}.csv")
        save_svg(
            make_histogram_figure(histogram, summary),
            config.out / f"histogram_{metric.value}.svg",
        )
        summaries[metric] = summary
    write_summary(summaries, config.out / SUMMARY_FILENAME, settings=config.to_dict())
    return summaries
