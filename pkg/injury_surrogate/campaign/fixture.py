"""Bundled parametric crash-simulation results.

Cases 1-25 are the 5x5 grid over torso angle {-10, -5, 0, 5, 10} degrees and D-ring
Z offset {-5, -2.5, 0, 2.5, 5} table units. Cases 26 and 27 are the two runs added
during adaptive refinement of the a_T1,max model.
"""

from injury_surrogate.campaign.records import DesignBox
from injury_surrogate.campaign.records import InputPoint
from injury_surrogate.campaign.records import Ledger
from injury_surrogate.campaign.records import RunRecord

GRID_CASES = tuple(range(1, 26))
ADDITIONAL_CASES = (26, 27)

# (case, torso_angle_deg, dring_z, hic15, a_t1_max)
_FIXTURE_ROWS: tuple[tuple[int, float, float, float, float], ...] = (
    (1, -10.0, -5.0, 20.46, 13.74),
    (2, -10.0, -2.5, 19.44, 14.32),
    (3, -10.0, 0.0, 18.91, 13.68),
    (4, -10.0, 2.5, 19.44, 13.33),
    (5, -10.0, 5.0, 19.34, 13.64),
    (6, -5.0, -5.0, 21.77, 16.33),
    (7, -5.0, -2.5, 21.93, 15.29),
    (8, -5.0, 0.0, 21.38, 14.61),
    (9, -5.0, 2.5, 21.42, 13.92),
    (10, -5.0, 5.0, 22.00, 14.71),
    (11, 0.0, -5.0, 26.41, 14.82),
    (12, 0.0, -2.5, 25.02, 14.86),
    (13, 0.0, 0.0, 25.84, 14.35),
    (14, 0.0, 2.5, 25.11, 13.20),
    (15, 0.0, 5.0, 23.53, 13.08),
    (16, 5.0, -5.0, 32.00, 14.16),
    (17, 5.0, -2.5, 32.91, 14.46),
    (18, 5.0, 0.0, 31.20, 15.23),
    (19, 5.0, 2.5, 31.23, 14.21),
    (20, 5.0, 5.0, 30.85, 14.82),
    (21, 10.0, -5.0, 32.43, 13.53),
    (22, 10.0, -2.5, 32.65, 14.47),
    (23, 10.0, 0.0, 32.13, 14.02),
    (24, 10.0, 2.5, 32.73, 14.12),
    (25, 10.0, 5.0, 32.05, 14.60),
    (26, -2.5, -5.0, 24.28, 13.98),
    (27, 2.5, 0.0, 27.54, 13.43),
)


def load_fixture(box: DesignBox | None = None) -> Ledger:
    """Return the bundled 27-case ledger.

    Args:
        box: Design box for the ledger; defaults to [-10, 10] x [-5, 5]

    Returns:
        Ledger: The simulation results exactly as tabulated
    """
    runs = tuple(
        RunRecord(
            case_id=case,
            input=InputPoint(torso_angle=torso, dring_z=dring),
            hic15=hic15,
            a_t1_max=a_t1_max,
        )
        for case, torso, dring, hic15, a_t1_max in _FIXTURE_ROWS
    )
    return Ledger(runs=runs, box=box or DesignBox())
