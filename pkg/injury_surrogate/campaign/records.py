"""Run-ledger records shared by every module.

The design space has two inputs: torso recline angle (degrees) and D-ring Z offset.
D-ring values are stored verbatim in "table units" (the simulation table lists
-5 ... 5) and every kernel evaluation happens on the unit square, so the choice
between the table and the millimetre reading never changes a prediction.
"""

import logging
import math
from collections.abc import Iterable
from collections.abc import Sequence
from dataclasses import dataclass
from dataclasses import field
from enum import StrEnum

import numpy as np

from injury_surrogate.errors import ConfigurationError
from injury_surrogate.errors import ConflictError
from injury_surrogate.errors import DataError
from injury_surrogate.errors import RangeError

logger = logging.getLogger(__name__)

LEDGER_SCHEMA_VERSION = 1
DRING_UNITS_NOTE = (
    "D-ring Z values are table units as printed in the simulation results table "
    "(-5 ... 5); the method text quotes -50 mm ... 50 mm. Predictions do not depend "
    "on the reading because inputs are normalized to the unit square."
)
# inputs closer than this (raw units) are treated as the same design point
SAME_POINT_TOLERANCE = 1e-9


class Metric(StrEnum):
    HIC15 = "hic15"
    A_T1_MAX = "a_t1_max"


METRIC_LABELS = {
    Metric.HIC15: "HIC15",
    Metric.A_T1_MAX: "a_T1,max [m/s²]",
}


@dataclass(frozen=True, order=True)
class InputPoint:
    """A point in the design space.

    Ordering is lexicographic on (torso_angle, dring_z), which is the tie-break
    used when ranking candidates.

    Attributes:
        torso_angle: Occupant torso recline angle in degrees (x1)
        dring_z: D-ring Z offset in table units (x2)
    """

    torso_angle: float
    dring_z: float

    def as_tuple(self) -> tuple[float, float]:
        return (self.torso_angle, self.dring_z)

    def is_close(self, other: "InputPoint", tol: float = SAME_POINT_TOLERANCE) -> bool:
        return abs(self.torso_angle - other.torso_angle) <= tol and abs(self.dring_z - other.dring_z) <= tol


@dataclass(frozen=True)
class DesignBox:
    """Axis-aligned design box with independent uniform inputs.

    Attributes:
        torso_angle_range: (lo, hi) in degrees
        dring_z_range: (lo, hi) in table units
    """

    torso_angle_range: tuple[float, float] = (-10.0, 10.0)
    dring_z_range: tuple[float, float] = (-5.0, 5.0)

    def __post_init__(self) -> None:
        for name, (lo, hi) in (
            ("torso_angle_range", self.torso_angle_range),
            ("dring_z_range", self.dring_z_range),
        ):
            if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
                msg = f"Degenerate design box: {name} must satisfy lo < hi, got ({lo}, {hi})"
                raise ConfigurationError(msg)
        object.__setattr__(self, "torso_angle_range", tuple(map(float, self.torso_angle_range)))
        object.__setattr__(self, "dring_z_range", tuple(map(float, self.dring_z_range)))

    @property
    def lower(self) -> np.ndarray:
        return np.array([self.torso_angle_range[0], self.dring_z_range[0]])

    @property
    def upper(self) -> np.ndarray:
        return np.array([self.torso_angle_range[1], self.dring_z_range[1]])

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, point: InputPoint, tol: float = 1e-12) -> bool:
        lo_t, hi_t = self.torso_angle_range
        lo_d, hi_d = self.dring_z_range
        return (
            lo_t - tol <= point.torso_angle <= hi_t + tol
            and lo_d - tol <= point.dring_z <= hi_d + tol
        )

    def normalize_array(self, raw: np.ndarray) -> np.ndarray:
        """Map raw (n, 2) coordinates affinely onto the unit square."""
        return (np.asarray(raw, dtype=float) - self.lower) / self.span

    def denormalize_array(self, unit: np.ndarray) -> np.ndarray:
        return self.lower + np.asarray(unit, dtype=float) * self.span

    def to_dict(self) -> dict[str, list[float]]:
        return {
            "torso_angle_range": list(self.torso_angle_range),
            "dring_z_range": list(self.dring_z_range),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DesignBox":
        try:
            return cls(
                torso_angle_range=tuple(data["torso_angle_range"]),
                dring_z_range=tuple(data["dring_z_range"]),
            )
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, ConfigurationError):
                raise
            msg = f"Invalid design box description: {e}"
            raise ConfigurationError(msg) from e


def normalize(point: InputPoint, box: DesignBox) -> tuple[float, float]:
    """Map a raw input onto the unit square of ``box``.

    Out-of-box inputs are allowed and land outside [0, 1].

    Args:
        point: Raw input
        box: Design box defining the affine map

    Returns:
        tuple[float, float]: Normalized (u1, u2)
    """
    u1, u2 = box.normalize_array(np.array([point.as_tuple()]))[0]
    return (float(u1), float(u2))


def denormalize(unit: tuple[float, float], box: DesignBox) -> InputPoint:
    x1, x2 = box.denormalize_array(np.array([unit]))[0]
    return InputPoint(float(x1), float(x2))


def points_to_array(points: Iterable[InputPoint]) -> np.ndarray:
    """Stack input points into a raw (n, 2) array."""
    array = np.array([p.as_tuple() for p in points], dtype=float)
    return array.reshape(-1, 2)


@dataclass(frozen=True)
class RunRecord:
    """One completed crash simulation.

    Attributes:
        case_id: Case number, unique within a ledger
        input: Design point of the run
        hic15: Head Injury Criterion over 15 ms (dimensionless)
        a_t1_max: Peak T1 X-acceleration in m/s²
    """

    case_id: int
    input: InputPoint
    hic15: float
    a_t1_max: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.hic15) and self.hic15 >= 0):
            msg = f"Case {self.case_id}: hic15 must be finite and >= 0, got {self.hic15}"
            raise DataError(msg)
        if not (math.isfinite(self.a_t1_max) and self.a_t1_max > 0):
            msg = f"Case {self.case_id}: a_t1_max must be finite and > 0, got {self.a_t1_max}"
            raise DataError(msg)

    def value(self, metric: Metric) -> float:
        if metric == Metric.HIC15:
            return self.hic15
        return self.a_t1_max


def find_conflicts(runs: Sequence[RunRecord], tol: float = 1e-12) -> list[tuple[RunRecord, RunRecord]]:
    """Return pairs of runs that share an input but report different outputs."""
    conflicts = []
    seen: list[RunRecord] = []
    for run in runs:
        other = next((s for s in seen if s.input.is_close(run.input)), None)
        if other is None:
            seen.append(run)
            continue
        if not (
            math.isclose(run.hic15, other.hic15, rel_tol=0, abs_tol=tol)
            and math.isclose(run.a_t1_max, other.a_t1_max, rel_tol=0, abs_tol=tol)
        ):
            conflicts.append((other, run))
    return conflicts


@dataclass(frozen=True)
class Ledger:
    """Ordered, validated collection of simulation runs.

    Attributes:
        runs: Runs in ledger order
        box: Design box every run must lie in
        schema_version: File schema version the ledger was read with
    """

    runs: tuple[RunRecord, ...]
    box: DesignBox = field(default_factory=DesignBox)
    schema_version: int = LEDGER_SCHEMA_VERSION

    def __post_init__(self) -> None:
        object.__setattr__(self, "runs", tuple(self.runs))
        case_ids = [run.case_id for run in self.runs]
        duplicates = sorted({c for c in case_ids if case_ids.count(c) > 1})
        if duplicates:
            msg = f"Duplicate case ids in ledger: {duplicates}"
            raise DataError(msg)
        outside = [run.case_id for run in self.runs if not self.box.contains(run.input)]
        if outside:
            msg = f"Cases outside the design box {self.box.to_dict()}: {outside}"
            raise RangeError(msg)
        conflicts = find_conflicts(self.runs)
        if conflicts:
            pairs = ", ".join(f"{a.case_id}/{b.case_id}" for a, b in conflicts)
            msg = f"Runs share an input but disagree on outputs: {pairs}"
            raise ConflictError(msg)

    def __len__(self) -> int:
        return len(self.runs)

    @property
    def case_ids(self) -> tuple[int, ...]:
        return tuple(run.case_id for run in self.runs)

    def inputs(self) -> list[InputPoint]:
        return [run.input for run in self.runs]

    def outputs(self, metric: Metric) -> list[float]:
        return [run.value(metric) for run in self.runs]

    def get(self, case_id: int) -> RunRecord:
        for run in self.runs:
            if run.case_id == case_id:
                return run
        msg = f"Case {case_id} is not in the ledger"
        raise DataError(msg)

    def select(self, case_ids: Iterable[int]) -> "Ledger":
        """Return a ledger holding only ``case_ids``, in ledger order."""
        wanted = set(case_ids)
        missing = wanted - set(self.case_ids)
        if missing:
            msg = f"Cases not in the ledger: {sorted(missing)}"
            raise DataError(msg)
        return Ledger(
            runs=tuple(run for run in self.runs if run.case_id in wanted),
            box=self.box,
            schema_version=self.schema_version,
        )

    def find(self, point: InputPoint, tol: float = SAME_POINT_TOLERANCE) -> RunRecord | None:
        return next((run for run in self.runs if run.input.is_close(point, tol)), None)
