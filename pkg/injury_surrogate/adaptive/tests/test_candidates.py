import pytest

from injury_surrogate.adaptive.candidates import CandidateSet
from injury_surrogate.adaptive.candidates import CandidateSource
from injury_surrogate.adaptive.candidates import from_file
from injury_surrogate.adaptive.candidates import from_points
from injury_surrogate.adaptive.candidates import grid_midpoints
from injury_surrogate.adaptive.candidates import lhs_pool
from injury_surrogate.campaign.io import write_pending
from injury_surrogate.campaign.records import DesignBox
from injury_surrogate.campaign.records import InputPoint
from injury_surrogate.errors import DataError
from injury_surrogate.errors import RangeError


class TestGridMidpoints:
    def setup_method(self):
        self.box = DesignBox()

    def test_cell_centres(self):
        candidates = grid_midpoints(self.box)
        assert len(candidates) == 16  # noqa: PLR2004
        assert candidates.provenance == CandidateSource.GRID_MIDPOINTS
        assert {p.torso_angle for p in candidates.points} == {-7.5, -2.5, 2.5, 7.5}
        assert {p.dring_z for p in candidates.points} == {-3.75, -1.25, 1.25, 3.75}

    def test_edge_midpoints_are_added(self):
        candidates = grid_midpoints(self.box, edge_midpoints=True)
        assert len(candidates) == 56  # noqa: PLR2004
        assert InputPoint(-2.5, -5.0) in candidates.points
        assert InputPoint(2.5, 0.0) in candidates.points

    def test_no_candidate_is_a_grid_node(self, grid_ledger):
        nodes = set(grid_ledger.inputs())
        candidates = grid_midpoints(self.box, edge_midpoints=True)
        assert not nodes & set(candidates.points)


class TestCandidateSet:
    def test_duplicates_are_dropped(self):
        candidates = from_points([InputPoint(0.0, 0.0), InputPoint(0.0, 0.0), InputPoint(1.0, 0.0)], DesignBox())
        assert len(candidates) == 2  # noqa: PLR2004

    def test_outside_points_are_rejected(self):
        with pytest.raises(RangeError):
            from_points([InputPoint(0.0, 6.0)], DesignBox())

    def test_excluding(self):
        candidates = grid_midpoints(DesignBox())
        remaining = candidates.excluding([InputPoint(-7.5, -3.75), InputPoint(0.0, 0.0)])
        assert len(remaining) == 15  # noqa: PLR2004
        assert InputPoint(-7.5, -3.75) not in remaining.points
        assert remaining.provenance == candidates.provenance

    def test_empty_set_is_allowed(self):
        assert len(CandidateSet(points=(), provenance="user-supplied", box=DesignBox())) == 0


class TestOtherSources:
    def test_lhs_pool(self):
        box = DesignBox()
        pool = lhs_pool(box, 1000, seed=3)
        assert len(pool) == 1000  # noqa: PLR2004
        assert pool.provenance == CandidateSource.LHS_POOL
        assert pool.points == lhs_pool(box, 1000, seed=3).points

    def test_from_file(self, tmp_path):
        path = write_pending([(1, InputPoint(-2.5, -5.0)), (2, InputPoint(2.5, 0.0))], tmp_path / "c.csv")
        candidates = from_file(path, DesignBox())
        assert candidates.points == (InputPoint(-2.5, -5.0), InputPoint(2.5, 0.0))
        assert candidates.provenance == CandidateSource.USER_SUPPLIED

    def test_from_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            from_file(tmp_path / "missing.csv", DesignBox())
