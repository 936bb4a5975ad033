"""Walk through the data pipeline: generate a fleet, simulate telemetry, clean it.

Run:  python demos/01_data_pipeline.py
"""

from uxcast.dataset import MetricId, clean
from uxcast.synth import FleetConfig, generate_fleet, simulate_samples

# A 54-device synthetic fleet.  Devices come from six product tiers, so specs
# co-move the way real laptop lines do.
config = FleetConfig(seed=1)
fleet = generate_fleet(config)
print(f"fleet: {len(fleet)} devices, "
      f"{len({d.cpu_vendor for d in fleet})} vendors, "
      f"thread counts {sorted({d.cpu_thread_count for d in fleet})}")
print("first device:", fleet[0])

# Simulate noisy per-iteration samples: 54 devices x 4 workloads x 9 metrics
# x 5 iterations.  ~2% of tests fail to complete, ~1% of smoothness samples
# come back as degenerate captures (100% dropped frames / 0% animation).
samples = simulate_samples(fleet, config)
print(f"\nsimulated {len(samples)} raw samples")

# Cleaning drops incomplete tests and degenerate extremes, then reduces each
# (device, workload, metric) group to its median.
curated = clean(samples, fleet)
print("provenance:", curated.provenance)
print(f"curated rows: {len(curated.rows)} "
      f"(= devices x workloads x metrics, minus fully-discarded groups)")

device = fleet[0].device_id
print(f"\ncurated medians for {device} / web_browse:")
for metric in MetricId:
    value = curated.rows.get((device, "web_browse", metric))
    if value is not None:
        print(f"  {metric.value:28s} {value:10.2f} {metric.unit}")
