import pytest

from injury_surrogate.campaign.fixture import GRID_CASES
from injury_surrogate.campaign.fixture import load_fixture
from injury_surrogate.campaign.records import Ledger
from injury_surrogate.campaign.records import Metric
from injury_surrogate.gp.fitting import FitConfig
from injury_surrogate.gp.fitting import fit
from injury_surrogate.gp.model import GpModel

# noise pinned close to zero so the posterior mean reproduces the training runs
INTERPOLATING_CONFIG = FitConfig(noise_variance_bounds=(1e-8, 1e-6))


def fit_ledger(ledger: Ledger, metric: Metric, config: FitConfig | None = None) -> GpModel:
    return fit(
        ledger.inputs(),
        ledger.outputs(metric),
        config,
        ledger.box,
        case_ids=ledger.case_ids,
        metric=metric,
    )


@pytest.fixture(autouse=True)
def _output_directory(settings, tmp_path) -> None:
    settings.SURROGATE = {**settings.SURROGATE, "OUT": str(tmp_path / "out")}


@pytest.fixture(scope="session")
def fixture_ledger() -> Ledger:
    return load_fixture()


@pytest.fixture(scope="session")
def grid_ledger(fixture_ledger: Ledger) -> Ledger:
    return fixture_ledger.select(GRID_CASES)


@pytest.fixture(scope="session")
def full_models(fixture_ledger: Ledger) -> dict[Metric, GpModel]:
    """Default-configuration models on all 27 runs."""
    return {metric: fit_ledger(fixture_ledger, metric) for metric in Metric}


@pytest.fixture(scope="session")
def grid_models(grid_ledger: Ledger) -> dict[Metric, GpModel]:
    """Default-configuration models on the 25 grid runs."""
    return {metric: fit_ledger(grid_ledger, metric) for metric in Metric}


@pytest.fixture(scope="session")
def interpolating_grid_models(grid_ledger: Ledger) -> dict[Metric, GpModel]:
    return {metric: fit_ledger(grid_ledger, metric, INTERPOLATING_CONFIG) for metric in Metric}


@pytest.fixture
def interpolating_config() -> FitConfig:
    return INTERPOLATING_CONFIG
