"""Ledger and manifest files.

Ledger CSV schema (bit-exact header, UTF-8, LF line endings)::

    case,torso_angle_deg,dring_z,hic15,a_t1_max

Exported ledgers get a ``<name>.meta.json`` sidecar recording the design box,
the units note and the schema version.
"""

import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from injury_surrogate.campaign.records import DRING_UNITS_NOTE
from injury_surrogate.campaign.records import LEDGER_SCHEMA_VERSION
from injury_surrogate.campaign.records import DesignBox
from injury_surrogate.campaign.records import InputPoint
from injury_surrogate.campaign.records import Ledger
from injury_surrogate.campaign.records import RunRecord
from injury_surrogate.campaign.records import find_conflicts
from injury_surrogate.errors import ConflictError
from injury_surrogate.errors import DataError
from injury_surrogate.errors import RangeError

logger = logging.getLogger(__name__)

LEDGER_COLUMNS = ["case", "torso_angle_deg", "dring_z", "hic15", "a_t1_max"]
PENDING_COLUMNS = ["case", "torso_angle_deg", "dring_z"]

# data rows start on line 2, after the header
_FIRST_DATA_LINE = 2
_MAX_REPORTED_ERRORS = 10


def metadata_path(path: Path) -> Path:
    return path.with_name(f"{path.stem}.meta.json")


def _read_table(path: Path, columns: list[str]) -> pd.DataFrame:
    """Read a CSV with an exact header into a frame of numeric columns.

    Raises:
        DataError: If the file is missing, empty, malformed or has bad values
    """
    if not path.is_file():
        msg = f"File not found: {path}"
        raise DataError(msg)

    try:
        frame = pd.read_csv(
            path,
            float_precision="round_trip",
            keep_default_na=False,
            na_values=[],
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError as e:
        msg = f"{path} is empty; expected header {','.join(columns)}"
        raise DataError(msg) from e
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        msg = f"Could not parse {path}: {e}"
        raise DataError(msg) from e

    if list(frame.columns) != columns:
        msg = (
            f"{path}: header must be exactly '{','.join(columns)}', "
            f"got '{','.join(map(str, frame.columns))}'"
        )
        raise DataError(msg)
    if frame.empty:
        msg = f"{path} has a header but no data rows"
        raise DataError(msg)

    problems = []
    parsed = {}
    for column in columns:
        values = pd.to_numeric(frame[column], errors="coerce").astype(float)
        bad = ~np.isfinite(values.to_numpy())
        problems.extend(
            f"line {index + _FIRST_DATA_LINE}, column {column}: "
            f"invalid value {frame[column].iloc[index]!r}"
            for index in np.flatnonzero(bad)
        )
        parsed[column] = values
    if problems:
        shown = "; ".join(problems[:_MAX_REPORTED_ERRORS])
        more = len(problems) - _MAX_REPORTED_ERRORS
        suffix = f" (and {more} more)" if more > 0 else ""
        msg = f"{path}: {shown}{suffix}"
        raise DataError(msg)

    cases = parsed["case"].to_numpy()
    non_integral = np.flatnonzero(cases != np.floor(cases))
    if non_integral.size:
        lines = ", ".join(str(i + _FIRST_DATA_LINE) for i in non_integral)
        msg = f"{path}: case numbers must be integers (lines {lines})"
        raise DataError(msg)

    return pd.DataFrame(parsed)


def ingest(path: Path | str, box: DesignBox) -> Ledger:
    """Read and validate a ledger CSV.

    Args:
        path: CSV file in the ledger schema
        box: Design box every run must lie in

    Returns:
        Ledger: Validated ledger in file order

    Raises:
        DataError: Parse failures, duplicate case ids or invalid metric values
        RangeError: Inputs outside ``box`` (lines are named)
        ConflictError: Runs sharing an input with different outputs
    """
    path = Path(path)
    metadata_file = metadata_path(path)
    if metadata_file.is_file():
        version = json.loads(metadata_file.read_text(encoding="utf-8")).get(
            "schema_version"
        )
        if version != LEDGER_SCHEMA_VERSION:
            msg = f"{metadata_file}: unsupported schema_version {version!r}"
            raise DataError(msg)

    frame = _read_table(path, LEDGER_COLUMNS)

    runs: list[RunRecord] = []
    range_problems = []
    lines_by_case: dict[int, list[int]] = {}
    for offset, row in enumerate(frame.itertuples(index=False)):
        line = offset + _FIRST_DATA_LINE
        case_id = int(row.case)
        point = InputPoint(float(row.torso_angle_deg), float(row.dring_z))
        lines_by_case.setdefault(case_id, []).append(line)
        if not box.contains(point):
            range_problems.append(
                f"line {line} (case {case_id}): input ({point.torso_angle:g}, "
                f"{point.dring_z:g}) outside torso {box.torso_angle_range} "
                f"x D-ring {box.dring_z_range}"
            )
            continue
        try:
            runs.append(
                RunRecord(
                    case_id=case_id,
                    input=point,
                    hic15=float(row.hic15),
                    a_t1_max=float(row.a_t1_max),
                )
            )
        except DataError as e:
            msg = f"{path}, line {line}: {e}"
            raise DataError(msg) from e

    if range_problems:
        msg = f"{path}: " + "; ".join(range_problems)
        logger.error(msg)
        raise RangeError(msg)

    duplicated = {c: lines for c, lines in lines_by_case.items() if len(lines) > 1}
    if duplicated:
        detail = "; ".join(f"case {c} on lines {lines}" for c, lines in duplicated.items())
        msg = f"{path}: duplicate case ids: {detail}"
        raise DataError(msg)

    conflicts = find_conflicts(runs)
    if conflicts:
        detail = ", ".join(f"cases {a.case_id} and {b.case_id}" for a, b in conflicts)
        msg = f"{path}: conflicting outputs for identical inputs: {detail}"
        raise ConflictError(msg)

    ledger = Ledger(runs=tuple(runs), box=box)
    logger.info(f"Ingested {len(ledger)} runs from {path}")
    return ledger


def export(ledger: Ledger, path: Path | str) -> Path:
    """Write ``ledger`` as CSV plus its metadata sidecar.

    Args:
        ledger: Ledger to write
        path: Destination CSV path

    Returns:
        Path: The CSV path written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(
        {
            "case": [run.case_id for run in ledger.runs],
            "torso_angle_deg": [run.input.torso_angle for run in ledger.runs],
            "dring_z": [run.input.dring_z for run in ledger.runs],
            "hic15": [run.hic15 for run in ledger.runs],
            "a_t1_max": [run.a_t1_max for run in ledger.runs],
        },
        columns=LEDGER_COLUMNS,
    )
    frame.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")

    metadata = {
        "schema_version": ledger.schema_version,
        "columns": LEDGER_COLUMNS,
        "box": ledger.box.to_dict(),
        "units_note": DRING_UNITS_NOTE,
        "n_runs": len(ledger),
    }
    metadata_path(path).write_text(
        json.dumps(metadata, indent=2) + "\n", encoding="utf-8"
    )
    logger.info(f"Exported {len(ledger)} runs to {path}")
    return path


def write_pending(entries: list[tuple[int, InputPoint]], path: Path | str) -> Path:
    """Write the pending-points manifest the user fills with simulation results.

    Args:
        entries: (case number, input) pairs awaiting simulation
        path: Destination CSV path

    Returns:
        Path: The manifest path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(
        {
            "case": [case for case, _ in entries],
            "torso_angle_deg": [point.torso_angle for _, point in entries],
            "dring_z": [point.dring_z for _, point in entries],
        },
        columns=PENDING_COLUMNS,
    )
    frame.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
    logger.info(f"Wrote {len(entries)} pending points to {path}")
    return path


def read_pending(path: Path | str) -> list[tuple[int, InputPoint]]:
    frame = _read_table(Path(path), PENDING_COLUMNS)
    return [
        (int(row.case), InputPoint(float(row.torso_angle_deg), float(row.dring_z)))
        for row in frame.itertuples(index=False)
    ]
