import numpy as np
import pytest

from uxcast.dataset import MetricId, clean
from uxcast.features import FeatureSchema
from uxcast.gbrt import Hyperparameters, fit_gbrt, save_model
from uxcast.serving import bundle_filename
from uxcast.synth import FleetConfig, generate_fleet, simulate_samples


@pytest.fixture(scope="session")
def small_noiseless():
    """A 12-device noiseless curated dataset plus its schema."""
    cfg = FleetConfig(n_devices=12, iterations_per_test=2, noise_sigma=0.0,
                      incomplete_rate=0.0, extreme_rate=0.0, seed=5)
    fleet = generate_fleet(cfg)
    curated = clean(simulate_samples(fleet, cfg), fleet)
    return curated, FeatureSchema.from_device_specs(fleet)


@pytest.fixture(scope="session")
def trained_model_dir(tmp_path_factory, small_noiseless):
    """Nine bundles fit with fixed hyperparameters (no grid search), on disk."""
    from uxcast.dataset import build_matrix

    curated, schema = small_noiseless
    out = tmp_path_factory.mktemp("models")
    hyper = Hyperparameters(16, 0.3, 1.0, None, None)
    for metric in MetricId:
        X, y, _ = build_matrix(curated, metric, schema)
        model = fit_gbrt(X, y, hyper, seed=11, schema=schema, metric=metric)
        (out / bundle_filename(metric)).write_bytes(save_model(model))
    return out


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
