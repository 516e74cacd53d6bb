"""Variance-driven adaptive refinement of a trained surrogate.

Each round proposes the candidates with the largest predictive variance, obtains
simulation results for them from an oracle, and checks the surrogate against
those results. Rounds that miss the accuracy gate feed the tested runs back into
the training set and refit.
"""

import logging
import math
from collections.abc import Callable
from collections.abc import Mapping
from collections.abc import Sequence
from dataclasses import dataclass
from dataclasses import field
from typing import NamedTuple
from typing import Protocol

import numpy as np

from injury_surrogate.adaptive.candidates import CandidateSet
from injury_surrogate.campaign.records import InputPoint
from injury_surrogate.campaign.records import Ledger
from injury_surrogate.campaign.records import Metric
from injury_surrogate.campaign.records import SAME_POINT_TOLERANCE
from injury_surrogate.campaign.records import RunRecord
from injury_surrogate.campaign.records import points_to_array
from injury_surrogate.errors import ConflictError
from injury_surrogate.errors import OracleUnavailableError
from injury_surrogate.errors import RequestError
from injury_surrogate.errors import UndefinedReferenceError
from injury_surrogate.gp.fitting import fit
from injury_surrogate.gp.model import GpModel
from injury_surrogate.gp.model import require_model

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD_PCT = 10.0
DEFAULT_K = 5
DEFAULT_MAX_ROUNDS = 5
# outputs at a shared input closer than this count as the same observation
SAME_OUTPUT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class AccuracyEntry:
    case_id: int
    point: InputPoint
    predicted: float
    observed: float
    rel_error_pct: float

    def to_dict(self) -> dict:
        return {
            "case": self.case_id,
            "torso_angle_deg": self.point.torso_angle,
            "dring_z": self.point.dring_z,
            "predicted": self.predicted,
            "observed": self.observed,
            "rel_error_pct": self.rel_error_pct,
        }


@dataclass(frozen=True)
class AccuracyReport:
    """Result of checking a model against simulation runs.

    Attributes:
        entries: One entry per tested run, in test order
        threshold_pct: Acceptance threshold; passing needs every error strictly below it
        metric: Metric that was checked
        training_size: Number of training runs of the checked model
        round_index: Adaptive round that produced the report, if any
        verification: Report re-checks already-augmented runs after a refit
    """

    entries: tuple[AccuracyEntry, ...]
    threshold_pct: float
    metric: Metric | None = None
    training_size: int = 0
    round_index: int | None = None
    verification: bool = False

    @property
    def worst_error_pct(self) -> float:
        return max(entry.rel_error_pct for entry in self.entries)

    @property
    def passed(self) -> bool:
        return self.worst_error_pct < self.threshold_pct

    @property
    def failing(self) -> tuple[AccuracyEntry, ...]:
        return tuple(e for e in self.entries if e.rel_error_pct >= self.threshold_pct)

    def to_dict(self) -> dict:
        return {
            "metric": self.metric.value if self.metric else None,
            "round": self.round_index,
            "verification": self.verification,
            "training_size": self.training_size,
            "threshold_pct": self.threshold_pct,
            "worst_error_pct": self.worst_error_pct,
            "passed": self.passed,
            "entries": [entry.to_dict() for entry in self.entries],
        }


def relative_error_pct(predicted: float, observed: float) -> float:
    """100 · |predicted − observed| / |observed|.

    Raises:
        UndefinedReferenceError: If ``observed`` is zero
    """
    if observed == 0:
        msg = f"Relative error is undefined for an observed value of 0 (predicted {predicted})"
        raise UndefinedReferenceError(msg)
    return 100.0 * abs(predicted - observed) / abs(observed)


def propose_points(model: GpModel | None, candidates: CandidateSet, k: int) -> list[InputPoint]:
    """The ``k`` candidates with the largest predictive variance, largest first.

    Equal variances are ordered lexicographically by (torso_angle, dring_z).

    Raises:
        ModelStateError: If ``model`` is not trained
        RequestError: If ``k`` < 1, the set is empty or ``k`` exceeds its size
    """
    model = require_model(model)
    if k < 1:
        msg = f"k must be >= 1, got {k}"
        raise RequestError(msg)
    if len(candidates) == 0:
        msg = "Candidate set is empty"
        raise RequestError(msg)
    if k > len(candidates):
        msg = f"Requested {k} points from only {len(candidates)} candidates"
        raise RequestError(msg)

    raw = points_to_array(candidates.points)
    _, variances = model.predict_many(raw)
    order = np.lexsort((raw[:, 1], raw[:, 0], -variances))
    proposal = [candidates.points[i] for i in order[:k]]
    logger.debug(
        "Proposed "
        + ", ".join(f"{p} (var {variances[i]:.4g})" for p, i in zip(proposal, order, strict=False))
    )
    return proposal


def evaluate_accuracy(
    model: GpModel | None,
    test_runs: Sequence[RunRecord],
    metric: Metric,
    threshold_pct: float = DEFAULT_THRESHOLD_PCT,
) -> AccuracyReport:
    """Compare posterior means with observed values of ``metric``.

    Args:
        model: Trained model for ``metric``
        test_runs: Runs to check against, at least one
        metric: Metric to compare
        threshold_pct: Acceptance threshold in percent (> 0)

    Returns:
        AccuracyReport: Per-run errors and the gate outcome

    Raises:
        RequestError: No test runs or a non-positive threshold
        UndefinedReferenceError: A run observed exactly 0
    """
    model = require_model(model)
    if not test_runs:
        msg = "Accuracy evaluation needs at least one test run"
        raise RequestError(msg)
    if not threshold_pct > 0:
        msg = f"threshold_pct must be > 0, got {threshold_pct}"
        raise RequestError(msg)
    for run in test_runs:
        if not model.box.contains(run.input):
            logger.warning(f"Test case {run.case_id} at {run.input} lies outside the design box")

    means, _ = model.predict_many([run.input for run in test_runs])
    entries = tuple(
        AccuracyEntry(
            case_id=run.case_id,
            point=run.input,
            predicted=float(mean),
            observed=run.value(metric),
            rel_error_pct=relative_error_pct(float(mean), run.value(metric)),
        )
        for run, mean in zip(test_runs, means, strict=True)
    )
    return AccuracyReport(
        entries=entries,
        threshold_pct=float(threshold_pct),
        metric=metric,
        training_size=len(model),
    )


def augment_and_refit(
    model: GpModel | None,
    new_runs: Sequence[RunRecord],
    metric: Metric,
) -> GpModel:
    """Refit on the model's training data plus ``new_runs``.

    Runs already present with the same output are skipped. The input model is
    left untouched; the refit reuses its fit configuration and seed.

    Raises:
        ConflictError: A new run repeats a training input with a different output
    """
    model = require_model(model)
    inputs = list(model.train_inputs)
    outputs = [float(v) for v in model.train_outputs]
    case_ids = list(model.case_ids)

    for run in new_runs:
        value = run.value(metric)
        known = next(
            (i for i, point in enumerate(inputs) if point.is_close(run.input)),
            None,
        )
        if known is not None:
            if math.isclose(outputs[known], value, rel_tol=0, abs_tol=SAME_OUTPUT_TOLERANCE):
                logger.debug(f"Case {run.case_id} is already in the training set")
                continue
            msg = (
                f"Case {run.case_id} at {run.input} reports {metric} = {value}, but the "
                f"training set has {outputs[known]} there"
            )
            logger.error(msg)
            raise ConflictError(msg)
        inputs.append(run.input)
        outputs.append(value)
        case_ids.append(run.case_id)

    return fit(
        inputs,
        outputs,
        model.fit_config,
        model.box,
        case_ids=case_ids,
        metric=metric,
    )


class Oracle(Protocol):
    """Supplies simulation results for requested design points."""

    def __call__(self, points: Sequence[InputPoint]) -> list[RunRecord]: ...


class LedgerOracle:
    """Oracle answering from runs that were already simulated.

    Raises :class:`OracleUnavailableError` listing every point without a run.
    """

    def __init__(self, ledger: Ledger, tol: float = SAME_POINT_TOLERANCE) -> None:
        self.ledger = ledger
        self.tol = tol

    def __call__(self, points: Sequence[InputPoint]) -> list[RunRecord]:
        found = [self.ledger.find(point, self.tol) for point in points]
        missing = [p for p, run in zip(points, found, strict=True) if run is None]
        if missing:
            msg = f"No simulation results for {len(missing)} of {len(points)} requested points"
            raise OracleUnavailableError(msg, missing)
        return [run for run in found if run is not None]


class FunctionOracle:
    """Oracle evaluating analytic responses, one callable per metric.

    Metrics without a callable are recorded as ``placeholder``. New runs are
    numbered from ``first_case_id`` upward.
    """

    def __init__(
        self,
        responses: Mapping[Metric, Callable[[InputPoint], float]],
        first_case_id: int = 1,
        placeholder: float = 1.0,
    ) -> None:
        if not responses:
            msg = "FunctionOracle needs a response for at least one metric"
            raise RequestError(msg)
        self.responses = dict(responses)
        self.next_case_id = first_case_id
        self.placeholder = placeholder

    def _value(self, metric: Metric, point: InputPoint) -> float:
        response = self.responses.get(metric)
        return float(response(point)) if response else self.placeholder

    def __call__(self, points: Sequence[InputPoint]) -> list[RunRecord]:
        runs = []
        for point in points:
            runs.append(
                RunRecord(
                    case_id=self.next_case_id,
                    input=point,
                    hic15=self._value(Metric.HIC15, point),
                    a_t1_max=self._value(Metric.A_T1_MAX, point),
                )
            )
            self.next_case_id += 1
        return runs


class LoopResult(NamedTuple):
    model: GpModel
    reports: list[AccuracyReport]


class AdaptiveLoopSuspended(OracleUnavailableError):
    """The oracle could not supply a round's points; the loop stopped there.

    Attributes:
        points: The points awaiting simulation
        model: Latest model at the time of suspension
        reports: Reports of the rounds that completed
    """

    def __init__(
        self,
        msg: str,
        points: Sequence[InputPoint],
        model: GpModel,
        reports: list[AccuracyReport],
    ) -> None:
        super().__init__(msg, points)
        self.model = model
        self.reports = reports


@dataclass
class _LoopState:
    model: GpModel
    reports: list[AccuracyReport] = field(default_factory=list)
    tested: list[RunRecord] = field(default_factory=list)
    # inputs of every run tested so far, across rounds
    seen: list[InputPoint] = field(default_factory=list)


def adaptive_loop(  # noqa: PLR0913
    initial: GpModel | None,
    oracle: Oracle,
    candidates: CandidateSet,
    k: int = DEFAULT_K,
    threshold_pct: float = DEFAULT_THRESHOLD_PCT,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    *,
    metric: Metric | None = None,
    augment_all: bool = False,
) -> LoopResult:
    """Refine ``initial`` until the accuracy gate passes or the rounds run out.

    Candidates that are already training inputs or were tested in an earlier
    round are never proposed again, and ``k`` is clamped to what is left. When no
    candidates remain after an augmentation, the runs of the last round are
    re-checked against the refit model and recorded as a verification report.

    Args:
        initial: Trained starting model
        oracle: Source of simulation results
        candidates: Points searched for the largest variance
        k: Points proposed per round
        threshold_pct: Accuracy gate in percent
        max_rounds: Maximum number of rounds (>= 1)
        metric: Metric to refine; defaults to the model's metric
        augment_all: Add every tested run, also in a passing round, instead of
            only the failing ones

    Returns:
        LoopResult: Final model and the report of every round

    Raises:
        AdaptiveLoopSuspended: The oracle had no result for a proposed point
    """
    model = require_model(initial)
    metric = metric or model.metric
    if metric is None:
        msg = "The metric to refine must be given for a model without one"
        raise RequestError(msg)
    if max_rounds < 1:
        msg = f"max_rounds must be >= 1, got {max_rounds}"
        raise RequestError(msg)
    if k < 1:
        msg = f"k must be >= 1, got {k}"
        raise RequestError(msg)

    state = _LoopState(model=model)
    for round_index in range(1, max_rounds + 1):
        remaining = candidates.excluding([*state.model.train_inputs, *state.seen])
        if len(remaining) == 0:
            _verify_last_round(state, metric, threshold_pct)
            break
        if k > len(remaining):
            logger.warning(f"Only {len(remaining)} candidates left; proposing {len(remaining)} not {k}")
        proposal = propose_points(state.model, remaining, min(k, len(remaining)))

        try:
            runs = oracle(proposal)
        except OracleUnavailableError as e:
            logger.info(f"Round {round_index}: waiting for {len(e.points)} simulations")
            raise AdaptiveLoopSuspended(str(e), e.points, state.model, state.reports) from e

        report = evaluate_accuracy(state.model, runs, metric, threshold_pct)
        state.reports.append(
            AccuracyReport(
                entries=report.entries,
                threshold_pct=report.threshold_pct,
                metric=metric,
                training_size=report.training_size,
                round_index=round_index,
            )
        )
        state.tested = list(runs)
        state.seen.extend(run.input for run in runs)
        logger.info(
            f"Round {round_index} ({metric}, {len(state.model)} runs): worst error "
            f"{report.worst_error_pct:.2f}% -> {'passed' if report.passed else 'failed'}"
        )

        if report.passed:
            if augment_all:
                state.model = augment_and_refit(state.model, runs, metric)
            break

        failing_cases = {entry.case_id for entry in report.failing}
        new_runs = runs if augment_all else [r for r in runs if r.case_id in failing_cases]
        state.model = augment_and_refit(state.model, new_runs, metric)
        logger.info(f"Round {round_index}: training set grown to {len(state.model)} runs")

    return LoopResult(model=state.model, reports=state.reports)


def _verify_last_round(state: _LoopState, metric: Metric, threshold_pct: float) -> None:
    if not state.tested:
        logger.warning("No candidates to propose")
        return
    report = evaluate_accuracy(state.model, state.tested, metric, threshold_pct)
    state.reports.append(
        AccuracyReport(
            entries=report.entries,
            threshold_pct=report.threshold_pct,
            metric=metric,
            training_size=report.training_size,
            round_index=len(state.reports),
            verification=True,
        )
    )
    logger.info(
        f"Candidates exhausted; refit model checked on the last round's runs: worst error "
        f"{report.worst_error_pct:.2f}%"
    )
