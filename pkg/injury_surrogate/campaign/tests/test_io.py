import json

import pytest

from injury_surrogate.campaign.io import LEDGER_COLUMNS
from injury_surrogate.campaign.io import export
from injury_surrogate.campaign.io import ingest
from injury_surrogate.campaign.io import metadata_path
from injury_surrogate.campaign.io import read_pending
from injury_surrogate.campaign.io import write_pending
from injury_surrogate.campaign.records import DesignBox
from injury_surrogate.campaign.records import InputPoint
from injury_surrogate.errors import ConflictError
from injury_surrogate.errors import DataError
from injury_surrogate.errors import RangeError

HEADER = ",".join(LEDGER_COLUMNS)


def _write(path, *rows, header=HEADER):
    path.write_text("\n".join([header, *rows]) + "\n", encoding="utf-8")
    return path


class TestIngest:
    """Ledger CSV validation."""

    def setup_method(self):
        self.box = DesignBox()

    def test_reads_rows_in_file_order(self, tmp_path):
        path = _write(tmp_path / "runs.csv", "7,0,0,25.84,14.35", "2,-10,-2.5,19.44,14.32")
        ledger = ingest(path, self.box)
        assert ledger.case_ids == (7, 2)
        assert ledger.get(2).input == InputPoint(-10.0, -2.5)
        assert ledger.get(7).hic15 == 25.84  # noqa: PLR2004

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="not found"):
            ingest(tmp_path / "absent.csv", self.box)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("", encoding="utf-8")
        with pytest.raises(DataError):
            ingest(path, self.box)

    def test_header_only(self, tmp_path):
        path = _write(tmp_path / "runs.csv")
        with pytest.raises(DataError, match="no data rows"):
            ingest(path, self.box)

    def test_wrong_header(self, tmp_path):
        path = _write(tmp_path / "runs.csv", "1,0,0,20,14", header="case,torso,dring,hic,a")
        with pytest.raises(DataError, match="header"):
            ingest(path, self.box)

    def test_invalid_value_names_line_and_column(self, tmp_path):
        path = _write(tmp_path / "runs.csv", "1,0,0,20,14", "2,abc,0,20,14")
        with pytest.raises(DataError, match="line 3, column torso_angle_deg"):
            ingest(path, self.box)

    def test_non_integral_case_number(self, tmp_path):
        path = _write(tmp_path / "runs.csv", "1.5,0,0,20,14")
        with pytest.raises(DataError, match="integers"):
            ingest(path, self.box)

    def test_out_of_box_row_names_line(self, tmp_path):
        path = _write(tmp_path / "runs.csv", "1,0,0,20,14", "2,11,0,20,14")
        with pytest.raises(RangeError, match="line 3"):
            ingest(path, self.box)

    def test_duplicate_case_ids_name_lines(self, tmp_path):
        path = _write(tmp_path / "runs.csv", "1,0,0,20,14", "1,5,0,21,14")
        with pytest.raises(DataError, match=r"case 1 on lines \[2, 3\]"):
            ingest(path, self.box)

    def test_conflicting_outputs(self, tmp_path):
        path = _write(tmp_path / "runs.csv", "1,0,0,20,14", "2,0,0,21,14")
        with pytest.raises(ConflictError):
            ingest(path, self.box)

    def test_negative_hic15_names_line(self, tmp_path):
        path = _write(tmp_path / "runs.csv", "1,0,0,-20,14")
        with pytest.raises(DataError, match="line 2"):
            ingest(path, self.box)

    def test_unsupported_schema_version(self, tmp_path):
        path = _write(tmp_path / "runs.csv", "1,0,0,20,14")
        metadata_path(path).write_text(json.dumps({"schema_version": 99}), encoding="utf-8")
        with pytest.raises(DataError, match="schema_version"):
            ingest(path, self.box)


class TestExport:
    def test_round_trip_is_exact(self, tmp_path, fixture_ledger):
        path = export(fixture_ledger, tmp_path / "ledger.csv")
        assert ingest(path, fixture_ledger.box) == fixture_ledger

    def test_header_and_line_endings(self, tmp_path, fixture_ledger):
        path = export(fixture_ledger, tmp_path / "ledger.csv")
        content = path.read_bytes()
        assert content.startswith(f"{HEADER}\n".encode())
        assert b"\r" not in content
        assert content.count(b"\n") == len(fixture_ledger) + 1

    def test_sidecar_records_box_and_schema(self, tmp_path, fixture_ledger):
        path = export(fixture_ledger, tmp_path / "out" / "ledger.csv")
        metadata = json.loads(metadata_path(path).read_text(encoding="utf-8"))
        assert metadata["schema_version"] == fixture_ledger.schema_version
        assert metadata["box"] == fixture_ledger.box.to_dict()
        assert metadata["n_runs"] == len(fixture_ledger)
        assert "table units" in metadata["units_note"]


class TestPendingManifest:
    def test_write_then_read(self, tmp_path):
        entries = [(28, InputPoint(-7.5, -3.75)), (29, InputPoint(2.5, 1.25))]
        path = write_pending(entries, tmp_path / "pending.csv")
        assert path.read_text(encoding="utf-8").splitlines()[0] == "case,torso_angle_deg,dring_z"
        assert read_pending(path) == entries

    def test_read_missing_manifest(self, tmp_path):
        with pytest.raises(DataError):
            read_pending(tmp_path / "pending.csv")
