"""Matérn covariance functions on the normalized unit square."""

import math
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from scipy.spatial.distance import cdist

from injury_surrogate.errors import ParameterDomainError

INPUT_DIMENSIONS = 2


class Smoothness(StrEnum):
    HALF = "1/2"
    THREE_HALVES = "3/2"
    FIVE_HALVES = "5/2"

    @property
    def nu(self) -> float:
        return {"1/2": 0.5, "3/2": 1.5, "5/2": 2.5}[self.value]


@dataclass(frozen=True)
class KernelParams:
    """Matérn hyperparameters.

    Attributes:
        signal_variance: Output scale of the kernel (k(x, x))
        lengthscales: One lengthscale per input dimension, in normalized units
        smoothness: Matérn smoothness selector
        noise_variance: Observation noise variance added to the Gram diagonal
    """

    signal_variance: float
    lengthscales: tuple[float, float]
    smoothness: Smoothness = Smoothness.FIVE_HALVES
    noise_variance: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "lengthscales", tuple(float(v) for v in self.lengthscales))
        object.__setattr__(self, "smoothness", Smoothness(self.smoothness))
        if not (math.isfinite(self.signal_variance) and self.signal_variance > 0):
            msg = f"signal_variance must be > 0, got {self.signal_variance}"
            raise ParameterDomainError(msg)
        if len(self.lengthscales) != INPUT_DIMENSIONS:
            msg = f"Expected {INPUT_DIMENSIONS} lengthscales, got {len(self.lengthscales)}"
            raise ParameterDomainError(msg)
        if not all(math.isfinite(v) and v > 0 for v in self.lengthscales):
            msg = f"lengthscales must all be > 0, got {self.lengthscales}"
            raise ParameterDomainError(msg)
        if not (math.isfinite(self.noise_variance) and self.noise_variance >= 0):
            msg = f"noise_variance must be >= 0, got {self.noise_variance}"
            raise ParameterDomainError(msg)

    def to_dict(self) -> dict:
        return {
            "signal_variance": self.signal_variance,
            "lengthscales": list(self.lengthscales),
            "smoothness": self.smoothness.value,
            "noise_variance": self.noise_variance,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "KernelParams":
        return cls(
            signal_variance=float(data["signal_variance"]),
            lengthscales=tuple(data["lengthscales"]),
            smoothness=Smoothness(data["smoothness"]),
            noise_variance=float(data["noise_variance"]),
        )


def matern_correlation(r: np.ndarray, smoothness: Smoothness) -> np.ndarray:
    """Matérn correlation as a function of scaled distance ``r``."""
    r = np.asarray(r, dtype=float)
    if smoothness == Smoothness.HALF:
        return np.exp(-r)
    if smoothness == Smoothness.THREE_HALVES:
        scaled = math.sqrt(3.0) * r
        return (1.0 + scaled) * np.exp(-scaled)
    scaled = math.sqrt(5.0) * r
    return (1.0 + scaled + scaled**2 / 3.0) * np.exp(-scaled)


def cross_covariance(a: np.ndarray, b: np.ndarray, params: KernelParams) -> np.ndarray:
    """Covariance matrix between two sets of normalized points.

    Args:
        a: (m, 2) normalized inputs
        b: (n, 2) normalized inputs
        params: Kernel hyperparameters

    Returns:
        np.ndarray: (m, n) matrix with entries k(a_i, b_j)
    """
    scale = np.asarray(params.lengthscales)
    a = np.atleast_2d(np.asarray(a, dtype=float)) / scale
    b = np.atleast_2d(np.asarray(b, dtype=float)) / scale
    r = cdist(a, b, metric="euclidean")
    return params.signal_variance * matern_correlation(r, params.smoothness)


def matern_cov(a: tuple[float, float], b: tuple[float, float], params: KernelParams) -> float:
    """Evaluate k(a, b) for two normalized points.

    Args:
        a: First normalized input
        b: Second normalized input
        params: Kernel hyperparameters (validated on construction)

    Returns:
        float: The covariance; equals ``signal_variance`` when ``a == b``
    """
    return float(cross_covariance(np.array([a]), np.array([b]), params)[0, 0])


def build_gram(inputs: np.ndarray, params: KernelParams) -> np.ndarray:
    """Gram matrix K over normalized training inputs.

    The diagonal is set to ``signal_variance`` exactly and the matrix is
    symmetrized, so round-off never breaks either property. The noise term is
    not included.

    Args:
        inputs: (n, 2) normalized inputs; duplicates are allowed
        params: Kernel hyperparameters

    Returns:
        np.ndarray: (n, n) covariance matrix
    """
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    gram = cross_covariance(inputs, inputs, params)
    gram = 0.5 * (gram + gram.T)
    np.fill_diagonal(gram, params.signal_variance)
    return gram
