"""Latin Hypercube sampling of the design box and pushforward through the GP."""

import logging
from collections.abc import Sequence

import numpy as np
from scipy.stats import qmc

from injury_surrogate.campaign.records import DesignBox
from injury_surrogate.campaign.records import InputPoint
from injury_surrogate.campaign.records import points_to_array
from injury_surrogate.errors import RequestError
from injury_surrogate.gp.model import GpModel
from injury_surrogate.gp.model import require_model

logger = logging.getLogger(__name__)

DEFAULT_SAMPLE_COUNT = 10_000
# rows per posterior evaluation; bounds the (rows x n_train) cross-covariance
PUSHFORWARD_CHUNK = 4096


def lhs_design(n: int, box: DesignBox, seed: int) -> np.ndarray:
    """Latin Hypercube design as a raw (n, 2) array.

    Each dimension has exactly one sample in each of its ``n`` equal-width strata.
    """
    if n < 1:
        msg = f"Sample count must be >= 1, got {n}"
        raise RequestError(msg)
    sampler = qmc.LatinHypercube(d=2, seed=np.random.default_rng(seed))
    unit = sampler.random(n)
    return qmc.scale(unit, box.lower, box.upper)


def lhs_sample(n: int, box: DesignBox, seed: int) -> list[InputPoint]:
    """Draw ``n`` stratified input points, uniform and independent per dimension.

    Args:
        n: Number of samples (>= 1)
        box: Design box to sample
        seed: Seed; identical seeds give identical samples

    Returns:
        list[InputPoint]: The samples in generation order
    """
    return [InputPoint(float(x1), float(x2)) for x1, x2 in lhs_design(n, box, seed)]


def pushforward(
    model: GpModel | None,
    points: np.ndarray | Sequence[InputPoint],
    *,
    posterior_sampling: bool = False,
    seed: int | None = None,
) -> np.ndarray:
    """Propagate input samples through the trained GP.

    By default only the posterior mean is propagated. With ``posterior_sampling``
    each value gets an independent draw from that point's marginal predictive
    distribution.

    Args:
        model: Trained GP
        points: Raw inputs, (n, 2) array or sequence of InputPoint
        posterior_sampling: Add marginal posterior noise to each value
        seed: Seed for posterior sampling

    Returns:
        np.ndarray: One value per input, in input order

    Raises:
        ModelStateError: If ``model`` is not a trained model
    """
    model = require_model(model)
    raw = points if isinstance(points, np.ndarray) else points_to_array(points)

    means = np.empty(len(raw))
    variances = np.empty(len(raw))
    for start in range(0, len(raw), PUSHFORWARD_CHUNK):
        stop = start + PUSHFORWARD_CHUNK
        means[start:stop], variances[start:stop] = model.predict_many(raw[start:stop])

    if not posterior_sampling:
        return means
    rng = np.random.default_rng(seed)
    return means + np.sqrt(variances) * rng.standard_normal(len(raw))
