"""Exact Gaussian Process posterior with a zero prior mean.

Outputs are standardized (sample mean removed, divided by the sample standard
deviation) before conditioning unless ``standardize=False``; the zero prior mean
and every hyperparameter then live in standardized units. Predictions are
returned in the original output units.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING
from typing import NamedTuple

import numpy as np
from scipy.linalg import LinAlgError
from scipy.linalg import cho_solve
from scipy.linalg import cholesky
from scipy.linalg import solve_triangular

from injury_surrogate.campaign.records import DesignBox
from injury_surrogate.campaign.records import InputPoint
from injury_surrogate.campaign.records import Metric
from injury_surrogate.campaign.records import points_to_array
from injury_surrogate.errors import DataError
from injury_surrogate.errors import ModelStateError
from injury_surrogate.errors import NumericalError
from injury_surrogate.gp.kernels import KernelParams
from injury_surrogate.gp.kernels import build_gram
from injury_surrogate.gp.kernels import cross_covariance

if TYPE_CHECKING:
    from injury_surrogate.gp.fitting import FitConfig

logger = logging.getLogger(__name__)

JITTER_START = 1e-10
JITTER_MAX = 1e-6
JITTER_GROWTH = 10.0
VARIANCE_CLAMP_TOLERANCE = 1e-8
DUPLICATE_NOISE_FLOOR = 1e-8


class Prediction(NamedTuple):
    mean: float
    variance: float


def cholesky_with_jitter(matrix: np.ndarray) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of ``matrix``, adding diagonal jitter if needed.

    The plain factorization is tried first, then jitter 1e-10, 1e-9, ... 1e-6.

    Returns:
        tuple: (lower-triangular factor, jitter that was added)

    Raises:
        NumericalError: If the matrix is not positive definite even at 1e-6
    """
    jitter = 0.0
    identity = np.eye(matrix.shape[0])
    while True:
        try:
            factor = cholesky(matrix + jitter * identity, lower=True, check_finite=True)
            if jitter > 0:
                logger.debug(f"Cholesky needed jitter {jitter:g}")
            return factor, jitter
        except (LinAlgError, ValueError) as e:
            jitter = JITTER_START if jitter == 0 else jitter * JITTER_GROWTH
            if jitter > JITTER_MAX * (1 + 1e-9):
                msg = f"Covariance matrix is not positive definite even with jitter {JITTER_MAX:g}"
                raise NumericalError(msg) from e


def _has_duplicates(inputs: np.ndarray) -> bool:
    return len(np.unique(inputs, axis=0)) < len(inputs)


@dataclass(frozen=True, eq=False)
class GpModel:
    """Trained posterior state for one injury metric.

    Instances are immutable; augmenting or refitting produces a new model.

    Attributes:
        box: Design box used to normalize inputs
        params: Kernel hyperparameters in normalized/standardized units
        train_inputs: Raw training inputs
        train_outputs: Raw training outputs
        normalized_inputs: Training inputs mapped to the unit square
        output_mean: Standardization offset
        output_scale: Standardization scale
        jitter: Diagonal jitter added for the factorization
        chol_factor: Lower factor L with L Lᵀ = K + (σ² + jitter) I
        alpha: (K + σ² I)⁻¹ y in standardized units
        case_ids: Ledger case numbers of the training runs, when known
        metric: Metric the model predicts, when known
        fit_config: Configuration that produced ``params``, when fitted
    """

    box: DesignBox
    params: KernelParams
    train_inputs: tuple[InputPoint, ...]
    train_outputs: np.ndarray
    normalized_inputs: np.ndarray
    output_mean: float
    output_scale: float
    jitter: float
    chol_factor: np.ndarray
    alpha: np.ndarray
    case_ids: tuple[int | None, ...] = ()
    metric: Metric | None = None
    fit_config: "FitConfig | None" = None

    def __len__(self) -> int:
        return len(self.train_inputs)

    @property
    def standardized_outputs(self) -> np.ndarray:
        return (self.train_outputs - self.output_mean) / self.output_scale

    def predict_many(self, queries: np.ndarray | Sequence[InputPoint]) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean and variance at many raw inputs.

        Args:
            queries: (m, 2) raw inputs or a sequence of InputPoint

        Returns:
            tuple: (means, variances), each of shape (m,), in output units

        Raises:
            NumericalError: If a variance is more negative than round-off allows
        """
        if not isinstance(queries, np.ndarray):
            queries = points_to_array(queries)
        unit = self.box.normalize_array(queries)
        outside = np.any((unit < 0) | (unit > 1), axis=1)
        if outside.any():
            logger.warning(f"{int(outside.sum())} queries lie outside the design box; extrapolating")

        cross = cross_covariance(unit, self.normalized_inputs, self.params)
        mean = cross @ self.alpha
        projected = solve_triangular(self.chol_factor, cross.T, lower=True)
        variance = self.params.signal_variance - np.einsum("ij,ij->j", projected, projected)

        tolerance = VARIANCE_CLAMP_TOLERANCE * max(1.0, self.params.signal_variance)
        if np.any(variance < -tolerance):
            worst = float(variance.min())
            msg = f"Predictive variance {worst:g} is negative beyond round-off"
            logger.error(msg)
            raise NumericalError(msg)
        variance = np.clip(variance, 0.0, None)

        return (
            self.output_mean + self.output_scale * mean,
            self.output_scale**2 * variance,
        )

    def predict(self, query: InputPoint) -> Prediction:
        means, variances = self.predict_many(np.array([query.as_tuple()]))
        return Prediction(mean=float(means[0]), variance=float(variances[0]))

    def log_marginal_likelihood(self) -> float:
        """log p(y | X, θ) of the standardized outputs.

        Computed as -½ yᵀα - Σ log Lᵢᵢ - (n/2) log 2π.
        """
        diagonal = np.diag(self.chol_factor)
        if not np.all(np.isfinite(diagonal)) or np.any(diagonal <= 0):
            msg = "Model factorization is invalid"
            raise NumericalError(msg)
        y = self.standardized_outputs
        n = len(y)
        value = (
            -0.5 * float(y @ self.alpha)
            - float(np.sum(np.log(diagonal)))
            - 0.5 * n * math.log(2.0 * math.pi)
        )
        if not math.isfinite(value):
            msg = f"Log marginal likelihood is not finite ({value})"
            raise NumericalError(msg)
        return value


def _standardization(outputs: np.ndarray, *, standardize: bool) -> tuple[float, float]:
    if not standardize:
        return 0.0, 1.0
    mean = float(np.mean(outputs))
    scale = float(np.std(outputs, ddof=1)) if len(outputs) > 1 else 0.0
    if not math.isfinite(scale) or scale <= 0:
        logger.warning("Training outputs have zero spread; using unit output scale")
        scale = 1.0
    return mean, scale


def condition(
    inputs: Sequence[InputPoint],
    outputs: Sequence[float],
    params: KernelParams,
    box: DesignBox,
    *,
    standardize: bool = True,
    standardization: tuple[float, float] | None = None,
    case_ids: Sequence[int | None] | None = None,
    metric: Metric | None = None,
    fit_config: "FitConfig | None" = None,
) -> GpModel:
    """Condition the GP on training data for fixed hyperparameters.

    Args:
        inputs: Raw training inputs (at least one)
        outputs: Observed outputs, same length as ``inputs``
        params: Kernel hyperparameters
        box: Design box for normalization
        standardize: Standardize outputs before conditioning
        standardization: Explicit (mean, scale) overriding ``standardize``
        case_ids: Ledger case numbers to record on the model
        metric: Metric to record on the model
        fit_config: Fit configuration to record on the model

    Returns:
        GpModel: The posterior

    Raises:
        DataError: Mismatched lengths or non-finite outputs
        NumericalError: If K + σ²I cannot be factorized
    """
    inputs = tuple(inputs)
    y = np.array(outputs, dtype=float)
    if len(inputs) == 0 or len(inputs) != len(y):
        msg = f"Need matching, non-empty inputs and outputs (got {len(inputs)} and {len(y)})"
        raise DataError(msg)
    if not np.all(np.isfinite(y)):
        msg = "Training outputs contain NaN or Inf"
        raise DataError(msg)

    unit = box.normalize_array(points_to_array(inputs))
    if params.noise_variance < DUPLICATE_NOISE_FLOOR and _has_duplicates(unit):
        logger.warning(
            f"Duplicate training inputs with noise variance {params.noise_variance:g}; "
            "relying on jitter for a positive-definite system"
        )

    if standardization is not None:
        output_mean, output_scale = standardization
    else:
        output_mean, output_scale = _standardization(y, standardize=standardize)
    y_standard = (y - output_mean) / output_scale

    system = build_gram(unit, params) + params.noise_variance * np.eye(len(y))
    factor, jitter = cholesky_with_jitter(system)
    alpha = cho_solve((factor, True), y_standard)

    for array in (y, unit, factor, alpha):
        array.setflags(write=False)

    return GpModel(
        box=box,
        params=params,
        train_inputs=inputs,
        train_outputs=y,
        normalized_inputs=unit,
        output_mean=float(output_mean),
        output_scale=float(output_scale),
        jitter=jitter,
        chol_factor=factor,
        alpha=alpha,
        case_ids=tuple(case_ids) if case_ids is not None else (None,) * len(inputs),
        metric=metric,
        fit_config=fit_config,
    )


def require_model(model: GpModel | None) -> GpModel:
    if model is None or not isinstance(model, GpModel):
        msg = "A trained GpModel is required"
        raise ModelStateError(msg)
    return model


def predict(model: GpModel | None, query: InputPoint) -> Prediction:
    """Posterior mean (expected injury response) and variance at ``query``."""
    return require_model(model).predict(query)


def log_marginal_likelihood(model: GpModel | None) -> float:
    return require_model(model).log_marginal_likelihood()
