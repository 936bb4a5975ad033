"""Save trained bundles, reload them, and build what-if predictions.

This is the library view of what `uxcast serve` exposes over HTTP and the
browser UI consumes.

Run:  python demos/05_predict_service.py
"""

import tempfile
from pathlib import Path

from uxcast.dataset import MetricId, build_matrix, clean
from uxcast.features import FeatureSchema
from uxcast.gbrt import Hyperparameters, fit_gbrt, save_model
from uxcast.serving import bundle_filename, load_model_dir, parse_spec_fields, prediction_set
from uxcast.synth import FleetConfig, generate_fleet, simulate_samples

config = FleetConfig(seed=1)
fleet = generate_fleet(config)
curated = clean(simulate_samples(fleet, config), fleet)
schema = FeatureSchema.from_device_specs(fleet)

model_dir = Path(tempfile.mkdtemp(prefix="uxcast-demo-"))
hyper = Hyperparameters(64, 0.3, 1.0, None, None)
for metric in MetricId:
    X, y, _ = build_matrix(curated, metric, schema)
    model = fit_gbrt(X, y, hyper, seed=3, schema=schema, metric=metric)
    (model_dir / bundle_filename(metric)).write_bytes(save_model(model))
print(f"wrote 9 bundles to {model_dir}")

modelset = load_model_dir(model_dir)
print(f"loaded bundle_version {modelset.bundle_version}")

candidate = parse_spec_fields({
    "cpu_base_freq_ghz": 2.4,
    "cpu_core_count": 8,
    "cpu_thread_count": 16,
    "cpu_vendor": "VendorA",
    "ram_data_rate_gts": 4,
    "ram_capacity_gb": 16,
    "display_horizontal_px": 2256,
    "display_vertical_px": 1504,
    "display_refresh_hz": 60,
})
result = prediction_set(modelset, candidate)
print("\npredictions for a premium candidate device:")
for metric_id, value in result["predictions"].items():
    print(f"  {metric_id:28s} {value:10.2f} {result['units'][metric_id]}")

print(f"""
The HTTP equivalents:
  uxcast serve {model_dir} --port 8077
  curl localhost:8077/api/schema
  curl -X POST localhost:8077/api/predict -d '{{"spec": {{...}}}}'
""")
