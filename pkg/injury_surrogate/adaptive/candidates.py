"""Candidate sets searched for the highest predictive variance."""

import logging
from collections.abc import Iterable
from dataclasses import dataclass
from enum import StrEnum
from pathlib import Path

import numpy as np

from injury_surrogate.campaign.io import read_pending
from injury_surrogate.campaign.records import DesignBox
from injury_surrogate.campaign.records import InputPoint
from injury_surrogate.errors import RangeError
from injury_surrogate.uq.sampling import lhs_sample

logger = logging.getLogger(__name__)

GRID_LEVELS = 5
DEFAULT_POOL_SIZE = 1000


class CandidateSource(StrEnum):
    GRID_MIDPOINTS = "grid-midpoints"
    LHS_POOL = "lhs-pool"
    USER_SUPPLIED = "user-supplied"


@dataclass(frozen=True)
class CandidateSet:
    """Design points over which the next simulations are chosen.

    Attributes:
        points: Candidate inputs, unique and inside ``box``
        provenance: How the points were generated
        box: Design box the points belong to
    """

    points: tuple[InputPoint, ...]
    provenance: CandidateSource
    box: DesignBox

    def __post_init__(self) -> None:
        unique: list[InputPoint] = []
        for point in self.points:
            if not any(point.is_close(kept) for kept in unique):
                unique.append(point)
        outside = [p for p in unique if not self.box.contains(p)]
        if outside:
            msg = f"{len(outside)} candidate points lie outside the design box, first {outside[0]}"
            raise RangeError(msg)
        object.__setattr__(self, "points", tuple(unique))
        object.__setattr__(self, "provenance", CandidateSource(self.provenance))

    def __len__(self) -> int:
        return len(self.points)

    def excluding(self, points: Iterable[InputPoint]) -> "CandidateSet":
        """Copy without any candidate that coincides with one of ``points``."""
        taken = list(points)
        kept = tuple(p for p in self.points if not any(p.is_close(t) for t in taken))
        return CandidateSet(points=kept, provenance=self.provenance, box=self.box)


def grid_midpoints(
    box: DesignBox,
    *,
    edge_midpoints: bool = False,
    levels: int = GRID_LEVELS,
) -> CandidateSet:
    """Midpoints of the ``levels`` x ``levels`` training grid spanning ``box``.

    The default gives the (levels - 1)² cell centres. With ``edge_midpoints`` the
    midpoints of every grid edge are added as well, i.e. every node of the
    half-step grid that is not a training-grid node.
    """
    torso = np.linspace(*box.torso_angle_range, 2 * levels - 1)
    dring = np.linspace(*box.dring_z_range, 2 * levels - 1)
    points = []
    for i, x1 in enumerate(torso):
        for j, x2 in enumerate(dring):
            odd = (i % 2) + (j % 2)
            if odd == 2 or (edge_midpoints and odd == 1):  # noqa: PLR2004
                points.append(InputPoint(float(x1), float(x2)))
    return CandidateSet(points=tuple(points), provenance=CandidateSource.GRID_MIDPOINTS, box=box)


def lhs_pool(box: DesignBox, n: int = DEFAULT_POOL_SIZE, seed: int = 0) -> CandidateSet:
    return CandidateSet(
        points=tuple(lhs_sample(n, box, seed)),
        provenance=CandidateSource.LHS_POOL,
        box=box,
    )


def from_file(path: Path | str, box: DesignBox) -> CandidateSet:
    """Candidates from a file in the pending-points manifest layout."""
    entries = read_pending(path)
    logger.info(f"Read {len(entries)} candidate points from {path}")
    return CandidateSet(
        points=tuple(point for _, point in entries),
        provenance=CandidateSource.USER_SUPPLIED,
        box=box,
    )


def from_points(points: Iterable[InputPoint], box: DesignBox) -> CandidateSet:
    return CandidateSet(points=tuple(points), provenance=CandidateSource.USER_SUPPLIED, box=box)
