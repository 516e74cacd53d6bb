"""Hyperparameter fitting by maximizing the log marginal likelihood.

The search runs L-BFGS-B in log-parameter space from several seeded starting
points and keeps the best optimum. The first start is the geometric centre of
the bounds; the remaining ones are drawn uniformly in log space.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import asdict
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from injury_surrogate.campaign.records import DesignBox
from injury_surrogate.campaign.records import InputPoint
from injury_surrogate.campaign.records import Metric
from injury_surrogate.errors import ConfigurationError
from injury_surrogate.errors import DataError
from injury_surrogate.errors import FitError
from injury_surrogate.errors import NumericalError
from injury_surrogate.errors import ParameterDomainError
from injury_surrogate.gp.kernels import KernelParams
from injury_surrogate.gp.kernels import Smoothness
from injury_surrogate.gp.model import GpModel
from injury_surrogate.gp.model import condition

logger = logging.getLogger(__name__)

MIN_TRAINING_POINTS = 2
# returned for parameter vectors whose system cannot be factorized
_FAILED_OBJECTIVE = 1e25


@dataclass(frozen=True)
class FitConfig:
    """Settings for :func:`fit`.

    A bound pair with ``lo == hi`` pins that hyperparameter.

    Attributes:
        smoothness: Matérn smoothness (not optimized)
        restarts: Number of optimizer starts
        seed: Seed for the random starts
        lengthscale_bounds: Bounds in normalized input units
        signal_variance_bounds: Bounds in standardized output units
        noise_variance_bounds: Bounds in standardized output units
        standardize: Standardize outputs before fitting
    """

    smoothness: Smoothness = Smoothness.FIVE_HALVES
    restarts: int = 8
    seed: int = 0
    lengthscale_bounds: tuple[float, float] = (0.25, 5.0)
    signal_variance_bounds: tuple[float, float] = (1e-3, 1e3)
    noise_variance_bounds: tuple[float, float] = (1e-8, 1e-6)
    standardize: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "smoothness", Smoothness(self.smoothness))
        if self.restarts < 1:
            msg = f"restarts must be >= 1, got {self.restarts}"
            raise ConfigurationError(msg)
        for name in ("lengthscale_bounds", "signal_variance_bounds", "noise_variance_bounds"):
            lo, hi = (float(v) for v in getattr(self, name))
            if not (0 < lo <= hi and math.isfinite(hi)):
                msg = f"{name} must satisfy 0 < lo <= hi, got ({lo}, {hi})"
                raise ConfigurationError(msg)
            object.__setattr__(self, name, (lo, hi))

    def log_bounds(self) -> np.ndarray:
        """(4, 2) log-space bounds for [signal, lengthscale1, lengthscale2, noise]."""
        bounds = [
            self.signal_variance_bounds,
            self.lengthscale_bounds,
            self.lengthscale_bounds,
            self.noise_variance_bounds,
        ]
        return np.log(np.array(bounds, dtype=float))

    def to_dict(self) -> dict:
        data = asdict(self)
        data["smoothness"] = self.smoothness.value
        for key in ("lengthscale_bounds", "signal_variance_bounds", "noise_variance_bounds"):
            data[key] = list(data[key])
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "FitConfig":
        return cls(
            smoothness=Smoothness(data["smoothness"]),
            restarts=int(data["restarts"]),
            seed=int(data["seed"]),
            lengthscale_bounds=tuple(data["lengthscale_bounds"]),
            signal_variance_bounds=tuple(data["signal_variance_bounds"]),
            noise_variance_bounds=tuple(data["noise_variance_bounds"]),
            standardize=bool(data["standardize"]),
        )


def _params_from_log(theta: np.ndarray, smoothness: Smoothness) -> KernelParams:
    signal, length_1, length_2, noise = np.exp(theta)
    return KernelParams(
        signal_variance=float(signal),
        lengthscales=(float(length_1), float(length_2)),
        smoothness=smoothness,
        noise_variance=float(noise),
    )


class _NegativeLogLikelihood:
    """Objective over the free log-parameters; pinned ones are held fixed."""

    def __init__(
        self,
        inputs: Sequence[InputPoint],
        outputs: Sequence[float],
        box: DesignBox,
        config: FitConfig,
        standardization: tuple[float, float],
    ) -> None:
        self.inputs = inputs
        self.outputs = outputs
        self.box = box
        self.config = config
        self.standardization = standardization
        bounds = config.log_bounds()
        self.free = bounds[:, 0] < bounds[:, 1]
        self.fixed_values = bounds[:, 0].copy()
        self.free_bounds = [tuple(b) for b in bounds[self.free]]

    def full(self, free_theta: np.ndarray) -> np.ndarray:
        theta = self.fixed_values.copy()
        theta[self.free] = free_theta
        return theta

    def __call__(self, free_theta: np.ndarray) -> float:
        try:
            params = _params_from_log(self.full(free_theta), self.config.smoothness)
            model = condition(
                self.inputs,
                self.outputs,
                params,
                self.box,
                standardization=self.standardization,
            )
            return -model.log_marginal_likelihood()
        except (NumericalError, ParameterDomainError, FloatingPointError):
            return _FAILED_OBJECTIVE


def _starting_points(objective: _NegativeLogLikelihood, config: FitConfig) -> list[np.ndarray]:
    bounds = np.array(objective.free_bounds, dtype=float).reshape(-1, 2)
    rng = np.random.default_rng(config.seed)
    starts = [bounds.mean(axis=1)]
    starts.extend(
        rng.uniform(bounds[:, 0], bounds[:, 1]) for _ in range(config.restarts - 1)
    )
    return starts


def fit(
    inputs: Sequence[InputPoint],
    outputs: Sequence[float],
    config: FitConfig | None = None,
    box: DesignBox | None = None,
    *,
    case_ids: Sequence[int | None] | None = None,
    metric: Metric | None = None,
) -> GpModel:
    """Fit Matérn hyperparameters and return the conditioned posterior.

    Args:
        inputs: Raw training inputs (at least two)
        outputs: Observed outputs for one metric
        config: Fit settings; defaults to :class:`FitConfig`
        box: Design box for normalization; defaults to [-10, 10] x [-5, 5]
        case_ids: Ledger case numbers recorded on the model
        metric: Metric recorded on the model

    Returns:
        GpModel: Posterior at the best hyperparameters found

    Raises:
        DataError: Fewer than two points, length mismatch or non-finite outputs
        FitError: No restart produced a positive-definite system
    """
    config = config or FitConfig()
    box = box or DesignBox()
    inputs = tuple(inputs)
    y = np.array(outputs, dtype=float)
    if len(inputs) < MIN_TRAINING_POINTS or len(inputs) != len(y):
        msg = (
            f"Fitting needs at least {MIN_TRAINING_POINTS} runs with one output each "
            f"(got {len(inputs)} inputs and {len(y)} outputs)"
        )
        raise DataError(msg)
    if not np.all(np.isfinite(y)):
        msg = "Training outputs contain NaN or Inf"
        raise DataError(msg)

    if config.standardize:
        scale = float(np.std(y, ddof=1))
        standardization = (float(np.mean(y)), scale if scale > 0 else 1.0)
    else:
        standardization = (0.0, 1.0)

    objective = _NegativeLogLikelihood(inputs, y, box, config, standardization)
    best_theta: np.ndarray | None = None
    best_value = math.inf

    if not objective.free.any():
        best_theta = objective.fixed_values
        best_value = objective(np.array([]))
    else:
        for index, start in enumerate(_starting_points(objective, config)):
            result = minimize(
                objective,
                start,
                method="L-BFGS-B",
                bounds=objective.free_bounds,
            )
            value = float(result.fun)
            if not math.isfinite(value) or value >= _FAILED_OBJECTIVE:
                logger.warning(f"Restart {index} failed: {result.message}")
                continue
            logger.debug(f"Restart {index}: -log likelihood {value:.6g}")
            # strict improvement keeps the earliest start on ties
            if value < best_value:
                best_value = value
                best_theta = objective.full(np.asarray(result.x, dtype=float))

    if best_theta is None or best_value >= _FAILED_OBJECTIVE:
        msg = f"All {config.restarts} restarts failed to produce a positive-definite system"
        logger.error(msg)
        raise FitError(msg)

    params = _params_from_log(best_theta, config.smoothness)
    try:
        model = condition(
            inputs,
            y,
            params,
            box,
            standardization=standardization,
            case_ids=case_ids,
            metric=metric,
            fit_config=config,
        )
    except NumericalError as e:
        msg = f"Best hyperparameters {params} do not give a usable model: {e}"
        raise FitError(msg) from e

    logger.info(
        f"Fitted {metric or 'model'} on {len(inputs)} runs: signal variance "
        f"{params.signal_variance:.4g}, lengthscales "
        f"({params.lengthscales[0]:.4g}, {params.lengthscales[1]:.4g}), noise variance "
        f"{params.noise_variance:.3g}, log likelihood {-best_value:.6g}"
    )
    return model
