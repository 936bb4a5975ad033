"""Deterministic synthetic fleet and telemetry generator.

Stands in for a real device lab: it draws a fleet of laptop specs and
simulates per-iteration metric samples from fixed, documented response
surfaces (``data/surfaces.json``) under multiplicative log-normal noise.

Devices are drawn from six product tiers, as in real laptop product lines:
a tier fixes the core/thread configuration and maps directly to RAM
capacity, RAM data rate, and display resolution, while base frequency sits
in overlapping per-tier bands and the SoC vendor is independent.  Specs
therefore co-move (better CPUs ship with more RAM and sharper displays),
which is also what gives every tier dense coverage in a modest fleet.

Surfaces are monotone in thread count and RAM capacity by construction:
latency, jank, and frame-drop values fall as those specs grow, animation
smoothness rises.  They are deliberately NOT a reconstruction of any
measured fleet; they exist so the pipeline can be exercised against known
ground truth.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np

from .dataset import DeviceSpec, MetricGroup, MetricId, MetricSample
from .seeding import make_rng

__all__ = [
    "FleetConfig",
    "load_surfaces",
    "surface_value",
    "generate_fleet",
    "simulate_samples",
    "render_device_csv",
    "render_sample_csv",
]

_RESOLUTIONS = ((1366, 768), (1920, 1080), (2256, 1504), (2560, 1600))
_REFRESH_HZ = 60

# The six product tiers: (cores, smt multiplier, ram GT/s, ram GB,
# resolution preset index).  Base frequency is drawn independently of tier:
# vendors bin SKUs by frequency across every segment, and the OS rescales
# the running frequency anyway.
_TIERS = (
    (2, 1, 2, 4, 0),
    (4, 1, 2, 4, 0),
    (6, 1, 3, 8, 1),
    (8, 1, 3, 8, 1),
    (6, 2, 4, 16, 2),
    (8, 2, 4, 16, 3),
)
_FREQ_MIN = 1.1
_FREQ_STEPS = 20  # 1.1 .. 3.0 GHz in 0.1 steps


@dataclass(frozen=True)
class FleetConfig:
    """Knobs for fleet generation and sample simulation."""

    n_devices: int = 54
    iterations_per_test: int = 5
    workloads: tuple[str, ...] = ("web_browse", "docs_edit", "meet_call", "youtube_play")
    noise_sigma: float = 0.05
    incomplete_rate: float = 0.02
    extreme_rate: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.n_devices < 3:
            raise ValueError(f"n_devices must be >= 3, got {self.n_devices}")
        if self.iterations_per_test < 1:
            raise ValueError(
                f"iterations_per_test must be >= 1, got {self.iterations_per_test}"
            )
        if not self.workloads or len(set(self.workloads)) != len(self.workloads):
            raise ValueError("workloads must be non-empty and unique")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        for name in ("incomplete_rate", "extreme_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate < 1.0:
                raise ValueError(f"{name} must be in [0, 1), got {rate}")


@lru_cache(maxsize=1)
def load_surfaces() -> dict:
    """The checked-in response-surface constants."""
    path = resources.files("uxcast").joinpath("data/surfaces.json")
    return json.loads(path.read_text(encoding="utf-8"))


def surface_value(metric: MetricId, *, threads: int, ram_gb: int, freq_ghz: float,
                  vendor_index: int, workload: str = "") -> float:
    """Noise-free metric value from the fixed response surfaces.

    value = base + per_thread*threads + per_ram_gb*ram_gb + per_ghz*freq
            + vendor_offset + workload_offset,
    floored at 0, with percent metrics capped at 100.  Workloads without a
    configured offset contribute 0.
    """
    entry = load_surfaces()["metrics"][metric.value]
    value = (
        entry["base"]
        + entry["per_thread"] * threads
        + entry["per_ram_gb"] * ram_gb
        + entry["per_ghz"] * freq_ghz
        + entry["vendor_offsets"][vendor_index]
        + entry["workload_offsets"].get(workload, 0.0)
    )
    value = max(0.0, value)
    if metric.unit == "percent":
        value = min(100.0, value)
    return value


def generate_fleet(config: FleetConfig) -> list[DeviceSpec]:
    """Draw a deterministic fleet of device specs.

    The six product tiers are balanced across the fleet (a test bed covers
    every segment), then shuffled; each device draws an independent base
    frequency and vendor.  Frequencies land on 0.1 GHz steps in [1.1, 3.0];
    cores in {2,4,6,8} with threads = cores or 2x cores; RAM rate in
    {2,3,4} GT/s and capacity in {4,8,16} GB; four resolution presets;
    every display refreshes at 60 Hz.
    """
    vendors = load_surfaces()["vendors"]
    rng = make_rng(config.seed, 0)
    tiers = np.array([i % len(_TIERS) for i in range(config.n_devices)])
    rng.shuffle(tiers)
    fleet: list[DeviceSpec] = []
    for i in range(config.n_devices):
        cores, smt, ram_rate, ram_gb, res = _TIERS[tiers[i]]
        freq_step = int(rng.integers(0, _FREQ_STEPS))
        vendor = vendors[int(rng.integers(0, len(vendors)))]
        width, height = _RESOLUTIONS[res]
        fleet.append(DeviceSpec(
            device_id=f"dev-{i:03d}",
            cpu_base_freq_ghz=round(_FREQ_MIN + 0.1 * freq_step, 1),
            cpu_core_count=cores,
            cpu_thread_count=cores * smt,
            cpu_vendor=vendor,
            ram_data_rate_gts=ram_rate,
            ram_capacity_gb=ram_gb,
            display_horizontal_px=width,
            display_vertical_px=height,
            display_refresh_hz=_REFRESH_HZ,
        ))
    return fleet


def simulate_samples(fleet: list[DeviceSpec], config: FleetConfig) -> list[MetricSample]:
    """Simulate per-iteration samples for every (device, workload, metric).

    Each sample is the surface value times exp(sigma * z).  With probability
    ``incomplete_rate`` a sample is flagged as a test that did not complete;
    with probability ``extreme_rate`` a smoothness-group sample is replaced
    by its degenerate capture value (100% dropped frames, 0% animation).
    """
    if not fleet:
        raise ValueError("fleet must be non-empty")
    surfaces = load_surfaces()
    vendors = surfaces["vendors"]
    rng = make_rng(config.seed, 1)
    samples: list[MetricSample] = []
    for spec in fleet:
        vendor_index = vendors.index(spec.cpu_vendor)
        for workload in config.workloads:
            for metric in MetricId:
                clean = surface_value(
                    metric,
                    threads=spec.cpu_thread_count,
                    ram_gb=spec.ram_capacity_gb,
                    freq_ghz=spec.cpu_base_freq_ghz,
                    vendor_index=vendor_index,
                    workload=workload,
                )
                for iteration in range(config.iterations_per_test):
                    value = clean * float(np.exp(config.noise_sigma * rng.standard_normal()))
                    if metric.unit == "percent":
                        value = min(100.0, value)
                    completed = rng.uniform() >= config.incomplete_rate
                    if metric.group is MetricGroup.SMOOTHNESS:
                        if rng.uniform() < config.extreme_rate:
                            value = 100.0 if metric is MetricId.DROPPED_FRAMES else 0.0
                    samples.append(MetricSample(
                        device_id=spec.device_id,
                        workload_id=workload,
                        iteration=iteration,
                        metric=metric,
                        value=value,
                        test_completed=completed,
                    ))
    return samples


def render_device_csv(devices: list[DeviceSpec]) -> str:
    from .dataset import DEVICE_CSV_HEADER

    lines = [",".join(DEVICE_CSV_HEADER)]
    for d in devices:
        lines.append(
            f"{d.device_id},{d.cpu_base_freq_ghz!r},{d.cpu_core_count},"
            f"{d.cpu_thread_count},{d.cpu_vendor},{d.ram_data_rate_gts},"
            f"{d.ram_capacity_gb},{d.display_horizontal_px},"
            f"{d.display_vertical_px},{d.display_refresh_hz}"
        )
    return "\n".join(lines) + "\n"


def render_sample_csv(samples: list[MetricSample]) -> str:
    from .dataset import SAMPLE_CSV_HEADER

    lines = [",".join(SAMPLE_CSV_HEADER)]
    for s in samples:
        completed = "true" if s.test_completed else "false"
        lines.append(
            f"{s.device_id},{s.workload_id},{s.iteration},{s.metric.value},"
            f"{s.value!r},{completed}"
        )
    return "\n".join(lines) + "\n"
