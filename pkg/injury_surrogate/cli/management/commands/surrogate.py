import logging
from pathlib import Path
from typing import Any

from django.core.management.base import BaseCommand
from django.core.management.base import CommandError

from injury_surrogate.adaptive.candidates import CandidateSource
from injury_surrogate.adaptive.refinement import AccuracyReport
from injury_surrogate.campaign.io import ingest
from injury_surrogate.cli import pipeline
from injury_surrogate.cli.config import METRIC_BOTH
from injury_surrogate.cli.config import RunConfig
from injury_surrogate.cli.config import load_run_config
from injury_surrogate.errors import SurrogateError
from injury_surrogate.gp.kernels import Smoothness

logger = logging.getLogger(__name__)

EXIT_DATA_ERROR = 2
EXIT_GATE_FAILED = 3

SUBCOMMANDS = ("ingest", "export", "fit", "propose", "check", "augment", "adapt", "stats")

# flag dest -> configuration key
_OVERRIDES = {
    "metric": "METRIC",
    "seed": "SEED",
    "smoothness": "SMOOTHNESS",
    "restarts": "RESTARTS",
    "threshold": "THRESHOLD_PCT",
    "k": "K",
    "max_rounds": "MAX_ROUNDS",
    "candidates": "CANDIDATES",
    "candidate_file": "CANDIDATE_FILE",
    "edge_midpoints": "CANDIDATE_EDGE_MIDPOINTS",
    "augment_all": "AUGMENT_ALL",
    "samples": "LHS_SAMPLES",
    "lhs_seed": "LHS_SEED",
    "percentiles": "VAR_PERCENTILES",
    "bins": "HISTOGRAM_BINS",
    "posterior_sampling": "POSTERIOR_SAMPLING",
    "out": "OUT",
}


def _percentiles(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p.strip()]


class Command(BaseCommand):
    """
    Django management command driving the injury surrogate pipeline.

    Subcommands share the configuration flags; the exit code is 0 on success,
    2 for usage and data errors and 3 when an accuracy gate fails.
    """

    help = "Fit, refine and analyse Gaussian Process surrogates of crash injury metrics"

    def add_arguments(self, parser: Any) -> None:
        subparsers = parser.add_subparsers(dest="subcommand", required=True)
        for name in SUBCOMMANDS:
            subparser = subparsers.add_parser(name, help=f"{name} step of the pipeline")
            self._add_common_arguments(subparser)
            getattr(self, f"_add_{name}_arguments", lambda _: None)(subparser)

    def _add_common_arguments(self, parser: Any) -> None:
        parser.add_argument("--config", type=Path, default=None, help="KEY=value configuration file")
        parser.add_argument("--out", type=str, default=None, help="Output directory")
        parser.add_argument(
            "--metric",
            choices=[METRIC_BOTH, "hic15", "a_t1_max"],
            default=None,
            help="Metric(s) to process",
        )
        parser.add_argument("--seed", type=int, default=None, help="Seed of the hyperparameter search")
        parser.add_argument("--fixture", action="store_true", help="Use the bundled 27-run table as ledger")
        parser.add_argument("--ledger", type=Path, default=None, help="Ledger CSV to use")
        parser.add_argument("--cases", type=str, default=None, help="Case selection such as 1-25 or 26,27")
        parser.add_argument("--model", type=Path, default=None, help="Model file instead of --out/model_<metric>.json")

    def _add_ingest_arguments(self, parser: Any) -> None:
        parser.add_argument("path", type=Path, help="Ledger CSV to validate and store")

    def _add_fit_arguments(self, parser: Any) -> None:
        parser.add_argument("--smoothness", choices=[s.value for s in Smoothness], default=None)
        parser.add_argument("--restarts", type=int, default=None)

    def _add_candidate_arguments(self, parser: Any) -> None:
        parser.add_argument("--k", type=int, default=None, help="Points proposed per round")
        parser.add_argument("--candidates", choices=[c.value for c in CandidateSource], default=None)
        parser.add_argument("--candidate-file", type=str, default=None)
        parser.add_argument("--edge-midpoints", action="store_true", default=None)

    def _add_propose_arguments(self, parser: Any) -> None:
        self._add_candidate_arguments(parser)

    def _add_check_arguments(self, parser: Any) -> None:
        parser.add_argument("--results", type=Path, default=None, help="Ledger CSV with the new runs")
        parser.add_argument("--pending", type=Path, default=None, help="Pending manifest the results answer")
        parser.add_argument("--threshold", type=float, default=None, help="Accuracy gate in percent")

    def _add_augment_arguments(self, parser: Any) -> None:
        parser.add_argument("--results", type=Path, default=None, help="Ledger CSV with the new runs")
        parser.add_argument("--threshold", type=float, default=None)
        parser.add_argument("--augment-all", action="store_true", default=None)
        parser.add_argument("--restarts", type=int, default=None)

    def _add_adapt_arguments(self, parser: Any) -> None:
        self._add_candidate_arguments(parser)
        parser.add_argument("--threshold", type=float, default=None)
        parser.add_argument("--max-rounds", type=int, default=None)
        parser.add_argument("--augment-all", action="store_true", default=None)
        parser.add_argument("--restarts", type=int, default=None)

    def _add_stats_arguments(self, parser: Any) -> None:
        parser.add_argument("--samples", type=int, default=None, help="LHS sample count")
        parser.add_argument("--lhs-seed", type=int, default=None)
        parser.add_argument("--percentiles", type=_percentiles, default=None, help="VaR levels, e.g. 90,95")
        parser.add_argument("--bins", type=int, default=None)
        parser.add_argument("--posterior-sampling", action="store_true", default=None)

    def handle(self, *args: Any, **options: Any) -> None:  # noqa: ARG002
        """
        Handle the command execution.

        Raises:
            CommandError: With returncode 2 for data errors, 3 for a failed gate
        """
        subcommand = options["subcommand"]
        try:
            config = load_run_config(
                options.get("config"),
                {key: options.get(dest) for dest, key in _OVERRIDES.items()},
            )
            getattr(self, f"run_{subcommand}")(config, options)
        except (SurrogateError, FileNotFoundError, OSError) as e:
            logger.error(f"{subcommand} failed: {e!s}")
            raise CommandError(f"{subcommand} failed: {e!s}", returncode=EXIT_DATA_ERROR) from e

    # --------------------------------------------------------------------------

    def _ledger(self, config: RunConfig, options: dict, path_option: str = "ledger") -> Any:
        return pipeline.resolve_ledger(
            config,
            fixture=options["fixture"],
            ledger_path=options.get(path_option),
            cases=options.get("cases"),
        )

    def _report(self, report: AccuracyReport) -> None:
        for entry in report.entries:
            self.stdout.write(
                f"  case {entry.case_id:>4} ({entry.point.torso_angle:g}, {entry.point.dring_z:g}): "
                f"predicted {entry.predicted:.4g}, observed {entry.observed:.4g}, "
                f"error {entry.rel_error_pct:.2f}%"
            )
        style = self.style.SUCCESS if report.passed else self.style.ERROR
        verdict = "passed" if report.passed else "FAILED"
        self.stdout.write(
            style(f"  worst error {report.worst_error_pct:.2f}% vs {report.threshold_pct:g}%: {verdict}")
        )

    def _gate(self, failed: list[str]) -> None:
        if failed:
            msg = f"Accuracy gate failed for {', '.join(failed)}"
            raise CommandError(msg, returncode=EXIT_GATE_FAILED)

    def run_ingest(self, config: RunConfig, options: dict) -> None:
        ledger = pipeline.cmd_ingest(config, options["path"])
        self.stdout.write(self.style.SUCCESS(f"Ingested {len(ledger)} runs into {config.out}"))

    def run_export(self, config: RunConfig, options: dict) -> None:
        path = pipeline.cmd_export(config, self._ledger(config, options))
        self.stdout.write(self.style.SUCCESS(f"Exported ledger to {path}"))

    def run_fit(self, config: RunConfig, options: dict) -> None:
        for outcome in pipeline.cmd_fit(config, self._ledger(config, options)):
            params = outcome.model.params
            self.stdout.write(
                self.style.SUCCESS(
                    f"{outcome.metric}: {len(outcome.model)} runs, log likelihood "
                    f"{outcome.log_marginal_likelihood:.4f}, lengthscales "
                    f"({params.lengthscales[0]:.3g}, {params.lengthscales[1]:.3g}), "
                    f"max in-sample error {outcome.in_sample.worst_error_pct:.3f}% -> {outcome.model_path}"
                )
            )

    def run_propose(self, config: RunConfig, options: dict) -> None:
        models = pipeline.load_models(config, options.get("model"))
        for metric, entries in pipeline.cmd_propose(config, models).items():
            self.stdout.write(self.style.SUCCESS(f"{metric}: {len(entries)} points to simulate"))
            for case_id, point in entries:
                self.stdout.write(f"  case {case_id}: ({point.torso_angle:g}, {point.dring_z:g})")

    def _results(self, config: RunConfig, options: dict) -> Any:
        if options.get("results"):
            results = ingest(options["results"], config.box)
            if options.get("cases"):
                results = results.select(pipeline.parse_cases(options["cases"]))
            return results
        return self._ledger(config, options)

    def run_check(self, config: RunConfig, options: dict) -> None:
        models = pipeline.load_models(config, options.get("model"))
        reports = pipeline.cmd_check(config, models, self._results(config, options), options.get("pending"))
        for metric, report in reports.items():
            self.stdout.write(f"{metric} ({report.training_size} training runs):")
            self._report(report)
        self._gate([str(m) for m, r in reports.items() if not r.passed])

    def run_augment(self, config: RunConfig, options: dict) -> None:
        models = pipeline.load_models(config, options.get("model"))
        outcomes = pipeline.cmd_augment(config, models, self._results(config, options))
        for outcome in outcomes:
            self.stdout.write(
                f"{outcome.metric}: added cases {list(outcome.added)}, now {len(outcome.model)} runs"
            )
            self._report(outcome.after)
        self._gate([str(o.metric) for o in outcomes if not o.after.passed])

    def run_adapt(self, config: RunConfig, options: dict) -> None:
        models = pipeline.load_models(config, options.get("model"))
        outcomes = pipeline.cmd_adapt(config, models, self._ledger(config, options))
        for outcome in outcomes:
            self.stdout.write(f"{outcome.metric}: {outcome.status}, {len(outcome.model)} training runs")
            for report in outcome.reports:
                self._report(report)
            if outcome.pending:
                self.stdout.write(
                    self.style.WARNING(
                        f"  waiting for {len(outcome.pending)} simulations listed in "
                        f"{pipeline.pending_file(config.out, outcome.metric)}"
                    )
                )
        self._gate([str(o.metric) for o in outcomes if o.status == "failed"])

    def run_stats(self, config: RunConfig, options: dict) -> None:
        models = pipeline.load_models(config, options.get("model"))
        for metric, summary in pipeline.cmd_stats(config, models).items():
            var_text = ", ".join(f"VaR{p:g} {v:.4g}" for p, v in summary.var_levels)
            self.stdout.write(
                self.style.SUCCESS(
                    f"{metric}: mean {summary.mean:.4g}, std {summary.std:.4g}, mode {summary.mode:.4g}, "
                    f"min {summary.min:.4g}, max {summary.max:.4g}, {var_text}"
                )
            )
