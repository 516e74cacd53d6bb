import math

import numpy as np
import pytest

from injury_surrogate.campaign.records import DesignBox
from injury_surrogate.campaign.records import InputPoint
from injury_surrogate.campaign.records import Metric
from injury_surrogate.errors import ConfigurationError
from injury_surrogate.errors import DataError
from injury_surrogate.errors import FitError
from injury_surrogate.errors import NumericalError
from injury_surrogate.gp.fitting import FitConfig
from injury_surrogate.gp.fitting import fit
from injury_surrogate.gp.kernels import Smoothness


class TestFitConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"restarts": 0},
            {"lengthscale_bounds": (2.0, 1.0)},
            {"noise_variance_bounds": (0.0, 1.0)},
            {"signal_variance_bounds": (1.0, float("inf"))},
        ],
    )
    def test_invalid_settings(self, kwargs):
        with pytest.raises(ConfigurationError):
            FitConfig(**kwargs)

    def test_dict_round_trip(self):
        config = FitConfig(smoothness=Smoothness.THREE_HALVES, restarts=3, seed=4)
        assert FitConfig.from_dict(config.to_dict()) == config


class TestFit:
    def test_recovers_a_smooth_curve(self, interpolating_config):
        box = DesignBox((0.0, math.pi), (-5.0, 5.0))
        xs = np.linspace(0.0, math.pi, 5)
        inputs = [InputPoint(float(x), 0.0) for x in xs]
        model = fit(inputs, np.sin(xs).tolist(), interpolating_config, box)
        held_out = 3 * math.pi / 8
        assert model.predict(InputPoint(held_out, 0.0)).mean == pytest.approx(math.sin(held_out), abs=0.05)

    @pytest.mark.parametrize("metric", list(Metric))
    def test_reproduces_grid_runs(self, metric, interpolating_grid_models, grid_ledger):
        model = interpolating_grid_models[metric]
        means, _ = model.predict_many(grid_ledger.inputs())
        observed = np.array(grid_ledger.outputs(metric))
        assert np.max(100 * np.abs(means - observed) / observed) < 1.0

    @pytest.mark.parametrize("metric", list(Metric))
    def test_reproduces_all_fixture_runs(self, metric, interpolating_config, fixture_ledger):
        model = fit(
            fixture_ledger.inputs(),
            fixture_ledger.outputs(metric),
            interpolating_config,
            fixture_ledger.box,
        )
        means, _ = model.predict_many(fixture_ledger.inputs())
        observed = np.array(fixture_ledger.outputs(metric))
        assert np.max(100 * np.abs(means - observed) / observed) < 1.0

    def test_default_fit_interpolates(self, full_models, fixture_ledger):
        assert FitConfig().noise_variance_bounds[1] <= 1e-6  # noqa: PLR2004
        for metric, model in full_models.items():
            means, _ = model.predict_many(fixture_ledger.inputs())
            observed = np.array(fixture_ledger.outputs(metric))
            assert np.max(100 * np.abs(means - observed) / observed) < 1.0

    def test_records_metadata(self, full_models, fixture_ledger):
        model = full_models[Metric.HIC15]
        assert model.metric == Metric.HIC15
        assert model.case_ids == fixture_ledger.case_ids
        assert model.fit_config == FitConfig()
        assert len(model) == 27  # noqa: PLR2004

    def test_fitted_parameters_respect_bounds(self, full_models):
        config = FitConfig()
        for model in full_models.values():
            params = model.params
            lo, hi = config.lengthscale_bounds
            assert all(lo * (1 - 1e-9) <= v <= hi * (1 + 1e-9) for v in params.lengthscales)
            lo, hi = config.noise_variance_bounds
            assert lo * (1 - 1e-9) <= params.noise_variance <= hi * (1 + 1e-9)

    def test_is_deterministic(self, grid_ledger):
        config = FitConfig(restarts=3, seed=7)
        first = fit(grid_ledger.inputs(), grid_ledger.outputs(Metric.HIC15), config)
        second = fit(grid_ledger.inputs(), grid_ledger.outputs(Metric.HIC15), config)
        assert first.params == second.params
        np.testing.assert_array_equal(first.alpha, second.alpha)

    def test_pinned_parameters_are_not_optimized(self, grid_ledger):
        config = FitConfig(lengthscale_bounds=(0.5, 0.5), noise_variance_bounds=(1e-4, 1e-4), restarts=2)
        model = fit(grid_ledger.inputs(), grid_ledger.outputs(Metric.HIC15), config)
        assert model.params.lengthscales == pytest.approx((0.5, 0.5))
        assert model.params.noise_variance == pytest.approx(1e-4)

    def test_fully_pinned_configuration(self, grid_ledger):
        config = FitConfig(
            lengthscale_bounds=(0.4, 0.4),
            signal_variance_bounds=(1.0, 1.0),
            noise_variance_bounds=(1e-6, 1e-6),
        )
        model = fit(grid_ledger.inputs(), grid_ledger.outputs(Metric.A_T1_MAX), config)
        assert model.params.signal_variance == pytest.approx(1.0)

    def test_constant_outputs(self):
        inputs = [InputPoint(-5.0, 0.0), InputPoint(0.0, 2.0), InputPoint(5.0, -3.0)]
        model = fit(inputs, [17.0, 17.0, 17.0])
        for point in (InputPoint(-9.0, 4.0), InputPoint(1.0, 1.0)):
            assert model.predict(point).mean == pytest.approx(17.0, abs=1e-9)

    def test_needs_two_runs(self):
        with pytest.raises(DataError, match="at least 2"):
            fit([InputPoint(0.0, 0.0)], [20.0])

    def test_rejects_non_finite_outputs(self):
        with pytest.raises(DataError):
            fit([InputPoint(0.0, 0.0), InputPoint(1.0, 1.0)], [20.0, float("inf")])

    def test_all_restarts_failing(self, monkeypatch, grid_ledger):
        def broken_condition(*args, **kwargs):
            msg = "not positive definite"
            raise NumericalError(msg)

        monkeypatch.setattr("injury_surrogate.gp.fitting.condition", broken_condition)
        with pytest.raises(FitError):
            fit(grid_ledger.inputs(), grid_ledger.outputs(Metric.HIC15), FitConfig(restarts=2))
