"""Run configuration: settings defaults, an optional key=value file, then flags.

The configuration file uses the ``.env`` layout (``KEY=value`` lines, ``#``
comments) and is read with django-environ into a private environment, so the
process environment is never touched.
"""

import logging
from collections.abc import Callable
from collections.abc import Mapping
from dataclasses import dataclass
from dataclasses import field
from pathlib import Path
from typing import Any

import environ
from django.conf import settings
from django.core.exceptions import ImproperlyConfigured

from injury_surrogate.adaptive.candidates import CandidateSource
from injury_surrogate.adaptive.refinement import DEFAULT_K
from injury_surrogate.adaptive.refinement import DEFAULT_MAX_ROUNDS
from injury_surrogate.adaptive.refinement import DEFAULT_THRESHOLD_PCT
from injury_surrogate.campaign.records import DesignBox
from injury_surrogate.campaign.records import Metric
from injury_surrogate.errors import ConfigurationError
from injury_surrogate.gp.fitting import FitConfig
from injury_surrogate.gp.kernels import Smoothness
from injury_surrogate.uq.sampling import DEFAULT_SAMPLE_COUNT
from injury_surrogate.uq.statistics import DEFAULT_MODE_BINS
from injury_surrogate.uq.statistics import DEFAULT_PERCENTILES

logger = logging.getLogger(__name__)

METRIC_BOTH = "both"

# how each configuration key is read from a file
_FILE_READERS: dict[str, Callable[[environ.Env, str], Any]] = {
    "TORSO_ANGLE_RANGE": lambda env, key: env.list(key, cast=float),
    "DRING_Z_RANGE": lambda env, key: env.list(key, cast=float),
    "METRIC": lambda env, key: env.str(key),
    "SMOOTHNESS": lambda env, key: env.str(key),
    "SEED": lambda env, key: env.int(key),
    "RESTARTS": lambda env, key: env.int(key),
    "LENGTHSCALE_BOUNDS": lambda env, key: env.list(key, cast=float),
    "SIGNAL_VARIANCE_BOUNDS": lambda env, key: env.list(key, cast=float),
    "NOISE_VARIANCE_BOUNDS": lambda env, key: env.list(key, cast=float),
    "THRESHOLD_PCT": lambda env, key: env.float(key),
    "K": lambda env, key: env.int(key),
    "MAX_ROUNDS": lambda env, key: env.int(key),
    "CANDIDATES": lambda env, key: env.str(key),
    "CANDIDATE_FILE": lambda env, key: env.str(key),
    "CANDIDATE_POOL_SIZE": lambda env, key: env.int(key),
    "CANDIDATE_EDGE_MIDPOINTS": lambda env, key: env.bool(key),
    "AUGMENT_ALL": lambda env, key: env.bool(key),
    "LHS_SAMPLES": lambda env, key: env.int(key),
    "LHS_SEED": lambda env, key: env.int(key),
    "VAR_PERCENTILES": lambda env, key: env.list(key, cast=float),
    "HISTOGRAM_BINS": lambda env, key: env.int(key),
    "POSTERIOR_SAMPLING": lambda env, key: env.bool(key),
    "OUT": lambda env, key: env.str(key),
}
CONFIG_KEYS = frozenset(_FILE_READERS)


def read_config_file(path: Path | str) -> dict[str, Any]:
    """Typed values of every key set in a ``KEY=value`` configuration file.

    Raises:
        ConfigurationError: Missing file, unknown keys or values of the wrong type
    """
    path = Path(path)
    if not path.is_file():
        msg = f"Configuration file not found: {path}"
        raise ConfigurationError(msg)

    # class-level ENVIRON keeps the file's values out of os.environ
    file_env_class = type("RunConfigEnv", (environ.Env,), {"ENVIRON": {}})
    file_env_class.read_env(str(path), overwrite=True)
    file_env = file_env_class()

    unknown = sorted(set(file_env.ENVIRON) - CONFIG_KEYS)
    if unknown:
        msg = f"Unknown keys in {path}: {', '.join(unknown)}"
        raise ConfigurationError(msg)
    values = {}
    for key in file_env.ENVIRON:
        try:
            values[key] = _FILE_READERS[key](file_env, key)
        except (ValueError, ImproperlyConfigured) as e:
            msg = f"{path}: invalid value for {key}: {e}"
            raise ConfigurationError(msg) from e
    logger.debug(f"Read {len(values)} settings from {path}")
    return values


def _pair(values: Any, key: str) -> tuple[float, float]:
    pair = tuple(float(v) for v in values)
    if len(pair) != 2:  # noqa: PLR2004
        msg = f"{key} needs exactly two numbers, got {list(values)}"
        raise ConfigurationError(msg)
    return pair  # type: ignore[return-value]


def parse_metrics(value: str) -> tuple[Metric, ...]:
    if value == METRIC_BOTH:
        return tuple(Metric)
    try:
        return (Metric(value),)
    except ValueError as e:
        msg = f"Unknown metric {value!r}; use {', '.join(m.value for m in Metric)} or {METRIC_BOTH}"
        raise ConfigurationError(msg) from e


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs besides its input files.

    Attributes:
        box: Design box
        metrics: Metrics to process
        fit: Hyperparameter search settings
        threshold_pct: Accuracy gate in percent
        k: Points proposed per round
        max_rounds: Rounds of the adaptive loop
        candidates: Candidate-set source
        candidate_file: Candidate file for the user-supplied source
        candidate_pool_size: Size of the LHS candidate pool
        candidate_edge_midpoints: Add grid-edge midpoints to the cell centres
        augment_all: Augment with every tested run instead of the failing ones
        lhs_samples: Number of LHS input samples for the statistics
        lhs_seed: Seed of the LHS samples
        var_percentiles: VaR levels
        histogram_bins: Bins of the histogram and the mode estimate
        posterior_sampling: Sample the marginal posterior during pushforward
        out: Output directory
    """

    box: DesignBox = field(default_factory=DesignBox)
    metrics: tuple[Metric, ...] = tuple(Metric)
    fit: FitConfig = field(default_factory=FitConfig)
    threshold_pct: float = DEFAULT_THRESHOLD_PCT
    k: int = DEFAULT_K
    max_rounds: int = DEFAULT_MAX_ROUNDS
    candidates: CandidateSource = CandidateSource.GRID_MIDPOINTS
    candidate_file: Path | None = None
    candidate_pool_size: int = 1000
    candidate_edge_midpoints: bool = False
    augment_all: bool = False
    lhs_samples: int = DEFAULT_SAMPLE_COUNT
    lhs_seed: int = 0
    var_percentiles: tuple[float, ...] = DEFAULT_PERCENTILES
    histogram_bins: int = DEFAULT_MODE_BINS
    posterior_sampling: bool = False
    out: Path = Path("surrogate_output")

    def __post_init__(self) -> None:
        checks = (
            (self.threshold_pct > 0, f"THRESHOLD_PCT must be > 0, got {self.threshold_pct}"),
            (self.k >= 1, f"K must be >= 1, got {self.k}"),
            (self.max_rounds >= 1, f"MAX_ROUNDS must be >= 1, got {self.max_rounds}"),
            (self.lhs_samples >= 1, f"LHS_SAMPLES must be >= 1, got {self.lhs_samples}"),
            (self.histogram_bins >= 1, f"HISTOGRAM_BINS must be >= 1, got {self.histogram_bins}"),
            (self.candidate_pool_size >= 1, f"CANDIDATE_POOL_SIZE must be >= 1, got {self.candidate_pool_size}"),
            (
                all(0 < p < 100 for p in self.var_percentiles),  # noqa: PLR2004
                f"VAR_PERCENTILES must lie in (0, 100), got {list(self.var_percentiles)}",
            ),
            (
                self.candidates != CandidateSource.USER_SUPPLIED or self.candidate_file is not None,
                "CANDIDATES=user-supplied needs CANDIDATE_FILE",
            ),
        )
        for ok, msg in checks:
            if not ok:
                raise ConfigurationError(msg)

    def to_dict(self) -> dict[str, Any]:
        """Settings recorded alongside generated reports."""
        return {
            "box": self.box.to_dict(),
            "metrics": [m.value for m in self.metrics],
            "fit": self.fit.to_dict(),
            "lhs_samples": self.lhs_samples,
            "lhs_seed": self.lhs_seed,
            "var_percentiles": list(self.var_percentiles),
            "histogram_bins": self.histogram_bins,
            "posterior_sampling": self.posterior_sampling,
        }

    @classmethod
    def from_values(cls, values: Mapping[str, Any]) -> "RunConfig":
        """Build from a complete mapping of configuration keys."""
        try:
            fit = FitConfig(
                smoothness=Smoothness(values["SMOOTHNESS"]),
                restarts=int(values["RESTARTS"]),
                seed=int(values["SEED"]),
                lengthscale_bounds=_pair(values["LENGTHSCALE_BOUNDS"], "LENGTHSCALE_BOUNDS"),
                signal_variance_bounds=_pair(values["SIGNAL_VARIANCE_BOUNDS"], "SIGNAL_VARIANCE_BOUNDS"),
                noise_variance_bounds=_pair(values["NOISE_VARIANCE_BOUNDS"], "NOISE_VARIANCE_BOUNDS"),
            )
            candidate_file = values.get("CANDIDATE_FILE") or None
            return cls(
                box=DesignBox(
                    torso_angle_range=_pair(values["TORSO_ANGLE_RANGE"], "TORSO_ANGLE_RANGE"),
                    dring_z_range=_pair(values["DRING_Z_RANGE"], "DRING_Z_RANGE"),
                ),
                metrics=parse_metrics(str(values["METRIC"])),
                fit=fit,
                threshold_pct=float(values["THRESHOLD_PCT"]),
                k=int(values["K"]),
                max_rounds=int(values["MAX_ROUNDS"]),
                candidates=CandidateSource(values["CANDIDATES"]),
                candidate_file=Path(candidate_file) if candidate_file else None,
                candidate_pool_size=int(values["CANDIDATE_POOL_SIZE"]),
                candidate_edge_midpoints=bool(values["CANDIDATE_EDGE_MIDPOINTS"]),
                augment_all=bool(values["AUGMENT_ALL"]),
                lhs_samples=int(values["LHS_SAMPLES"]),
                lhs_seed=int(values["LHS_SEED"]),
                var_percentiles=tuple(float(p) for p in values["VAR_PERCENTILES"]),
                histogram_bins=int(values["HISTOGRAM_BINS"]),
                posterior_sampling=bool(values["POSTERIOR_SAMPLING"]),
                out=Path(values["OUT"]),
            )
        except KeyError as e:
            msg = f"Missing configuration key {e.args[0]}"
            raise ConfigurationError(msg) from e
        except ValueError as e:
            if isinstance(e, ConfigurationError):
                raise
            msg = f"Invalid configuration: {e}"
            raise ConfigurationError(msg) from e


def load_run_config(
    config_file: Path | str | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> RunConfig:
    """Resolve the run configuration.

    Precedence, lowest first: ``settings.SURROGATE``, the configuration file,
    then ``overrides`` (flags). ``None`` overrides are ignored.
    """
    values: dict[str, Any] = dict(settings.SURROGATE)
    if config_file:
        values.update(read_config_file(config_file))
    unknown = sorted(set(overrides or {}) - CONFIG_KEYS)
    if unknown:
        msg = f"Unknown configuration keys: {', '.join(unknown)}"
        raise ConfigurationError(msg)
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return RunConfig.from_values(values)
