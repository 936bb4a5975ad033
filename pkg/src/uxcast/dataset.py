"""Device specs, metric samples, and the cleaning pipeline.

Raw telemetry arrives as two CSV tables (devices and per-iteration metric
samples).  Cleaning discards incomplete tests and degenerate extreme readings,
then collapses the surviving iterations of each (device, workload, metric)
triple to their median.
"""

from __future__ import annotations

import csv
import io
import statistics
from dataclasses import dataclass
from enum import Enum
from typing import IO, Iterable, Mapping

__all__ = [
    "MetricGroup",
    "MetricId",
    "DeviceSpec",
    "MetricSample",
    "Provenance",
    "CuratedDataset",
    "EmptyMetricError",
    "parse_device_table",
    "parse_sample_table",
    "clean",
    "build_matrix",
]


class MetricGroup(str, Enum):
    LATENCY = "latency"
    RESPONSIVENESS = "responsiveness"
    SMOOTHNESS = "smoothness"


class MetricId(str, Enum):
    """The nine predicted UX metrics, keyed by their CSV/wire names."""

    STARTUP_TIME = "startup_time"
    TAB_SWITCH_TIME = "tab_switch_time"
    LARGEST_CONTENTFUL_PAINT = "largest_contentful_paint"
    JANKY_INTERVALS = "janky_intervals"
    KEY_PRESS_DELAY = "key_press_delay"
    MOUSE_PRESS_DELAY = "mouse_press_delay"
    DROPPED_FRAMES = "dropped_frames"
    WINDOW_ANIMATION = "window_animation"
    TAB_SWITCH_ANIMATION = "tab_switch_animation"

    @property
    def group(self) -> MetricGroup:
        return _METRIC_GROUPS[self]

    @property
    def unit(self) -> str:
        return _METRIC_UNITS[self]

    @property
    def lower_is_better(self) -> bool:
        # Animation smoothness is a relative-FPS percentage (higher is
        # better); everything else measures delay, jank, or frame loss.
        return self not in (MetricId.WINDOW_ANIMATION, MetricId.TAB_SWITCH_ANIMATION)


_METRIC_GROUPS = {
    MetricId.STARTUP_TIME: MetricGroup.LATENCY,
    MetricId.TAB_SWITCH_TIME: MetricGroup.LATENCY,
    MetricId.LARGEST_CONTENTFUL_PAINT: MetricGroup.LATENCY,
    MetricId.JANKY_INTERVALS: MetricGroup.RESPONSIVENESS,
    MetricId.KEY_PRESS_DELAY: MetricGroup.RESPONSIVENESS,
    MetricId.MOUSE_PRESS_DELAY: MetricGroup.RESPONSIVENESS,
    MetricId.DROPPED_FRAMES: MetricGroup.SMOOTHNESS,
    MetricId.WINDOW_ANIMATION: MetricGroup.SMOOTHNESS,
    MetricId.TAB_SWITCH_ANIMATION: MetricGroup.SMOOTHNESS,
}

_METRIC_UNITS = {
    MetricId.STARTUP_TIME: "ms",
    MetricId.TAB_SWITCH_TIME: "ms",
    MetricId.LARGEST_CONTENTFUL_PAINT: "ms",
    MetricId.JANKY_INTERVALS: "count",
    MetricId.KEY_PRESS_DELAY: "ms",
    MetricId.MOUSE_PRESS_DELAY: "ms",
    MetricId.DROPPED_FRAMES: "percent",
    MetricId.WINDOW_ANIMATION: "percent",
    MetricId.TAB_SWITCH_ANIMATION: "percent",
}

# Samples carrying these exact values are degenerate capture artifacts, not
# measurements: a fully dropped frame stream or a zero-FPS animation.
_EXTREME_VALUES = {
    MetricId.DROPPED_FRAMES: 100.0,
    MetricId.WINDOW_ANIMATION: 0.0,
    MetricId.TAB_SWITCH_ANIMATION: 0.0,
}


class EmptyMetricError(ValueError):
    """A requested metric has no curated rows."""

    def __init__(self, metric: "MetricId"):
        self.metric = metric
        super().__init__(f"empty metric: {metric.value}")


@dataclass(frozen=True)
class DeviceSpec:
    """One device's hardware specification."""

    device_id: str
    cpu_base_freq_ghz: float
    cpu_core_count: int
    cpu_thread_count: int
    cpu_vendor: str
    ram_data_rate_gts: int
    ram_capacity_gb: int
    display_horizontal_px: int
    display_vertical_px: int
    display_refresh_hz: int

    def __post_init__(self):
        numeric = {
            "cpu_base_freq_ghz": self.cpu_base_freq_ghz,
            "cpu_core_count": self.cpu_core_count,
            "cpu_thread_count": self.cpu_thread_count,
            "ram_data_rate_gts": self.ram_data_rate_gts,
            "ram_capacity_gb": self.ram_capacity_gb,
            "display_horizontal_px": self.display_horizontal_px,
            "display_vertical_px": self.display_vertical_px,
            "display_refresh_hz": self.display_refresh_hz,
        }
        for name, value in numeric.items():
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value!r}")
        if self.cpu_thread_count < self.cpu_core_count:
            raise ValueError(
                f"cpu_thread_count ({self.cpu_thread_count}) must be >= "
                f"cpu_core_count ({self.cpu_core_count})"
            )
        if not self.device_id:
            raise ValueError("device_id must be non-empty")


@dataclass(frozen=True)
class MetricSample:
    """One measurement of one metric from one test iteration."""

    device_id: str
    workload_id: str
    iteration: int
    metric: MetricId
    value: float
    test_completed: bool

    def __post_init__(self):
        if self.value < 0:
            raise ValueError(f"negative value: {self.value!r}")
        if self.iteration < 0:
            raise ValueError(f"negative iteration: {self.iteration!r}")


@dataclass(frozen=True)
class Provenance:
    """Where the input samples went during cleaning."""

    incomplete: int
    extreme: int
    surviving: int


@dataclass(frozen=True)
class CuratedDataset:
    """Median-aggregated dataset keyed by (device, workload, metric)."""

    devices: tuple[DeviceSpec, ...]
    rows: Mapping[tuple[str, str, MetricId], float]
    provenance: Provenance

    def device_ids(self) -> list[str]:
        return [d.device_id for d in self.devices]


DEVICE_CSV_HEADER = [
    "device_id",
    "cpu_base_freq_ghz",
    "cpu_core_count",
    "cpu_thread_count",
    "cpu_vendor",
    "ram_data_rate_gts",
    "ram_capacity_gb",
    "display_horizontal_px",
    "display_vertical_px",
    "display_refresh_hz",
]

SAMPLE_CSV_HEADER = [
    "device_id",
    "workload_id",
    "iteration",
    "metric",
    "value",
    "test_completed",
]


def _reader(text: str | IO[str]) -> Iterable[list[str]]:
    if isinstance(text, str):
        text = io.StringIO(text)
    return csv.reader(text)


def _check_header(row: list[str], expected: list[str]) -> None:
    if row != expected:
        unknown = [c for c in row if c not in expected]
        if unknown:
            raise ValueError(f"unknown column(s) in header: {', '.join(unknown)}")
        raise ValueError(
            f"bad header: expected {','.join(expected)}, got {','.join(row)}"
        )


def parse_device_table(text: str | IO[str]) -> list[DeviceSpec]:
    """Parse the device CSV into specs, validating each line.

    Vendor labels are encountered (and later registered into the feature
    schema) in first-seen order; this function only validates per-line.
    """
    rows = iter(_reader(text))
    try:
        header = next(rows)
    except StopIteration:
        raise ValueError("empty input: missing device CSV header") from None
    _check_header(header, DEVICE_CSV_HEADER)

    devices: list[DeviceSpec] = []
    seen: set[str] = set()
    for lineno, row in enumerate(rows, start=2):
        if not row:
            continue
        if len(row) != len(DEVICE_CSV_HEADER):
            raise ValueError(
                f"line {lineno}: expected {len(DEVICE_CSV_HEADER)} fields, got {len(row)}"
            )
        fields = dict(zip(DEVICE_CSV_HEADER, row))
        try:
            spec = DeviceSpec(
                device_id=fields["device_id"],
                cpu_base_freq_ghz=_parse_number(fields, "cpu_base_freq_ghz", lineno),
                cpu_core_count=_parse_int(fields, "cpu_core_count", lineno),
                cpu_thread_count=_parse_int(fields, "cpu_thread_count", lineno),
                cpu_vendor=fields["cpu_vendor"],
                ram_data_rate_gts=_parse_int(fields, "ram_data_rate_gts", lineno),
                ram_capacity_gb=_parse_int(fields, "ram_capacity_gb", lineno),
                display_horizontal_px=_parse_int(fields, "display_horizontal_px", lineno),
                display_vertical_px=_parse_int(fields, "display_vertical_px", lineno),
                display_refresh_hz=_parse_int(fields, "display_refresh_hz", lineno),
            )
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        if spec.device_id in seen:
            raise ValueError(f"line {lineno}: duplicate device_id {spec.device_id!r}")
        seen.add(spec.device_id)
        devices.append(spec)
    return devices


def _parse_number(fields: dict, name: str, lineno: int) -> float:
    raw = fields[name]
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"field {name}: not a number: {raw!r}") from None


def _parse_int(fields: dict, name: str, lineno: int) -> int:
    raw = fields[name]
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"field {name}: not an integer: {raw!r}") from None


def parse_sample_table(text: str | IO[str]) -> list[MetricSample]:
    """Parse the sample CSV into metric samples, in input order."""
    rows = iter(_reader(text))
    try:
        header = next(rows)
    except StopIteration:
        raise ValueError("empty input: missing sample CSV header") from None
    _check_header(header, SAMPLE_CSV_HEADER)

    samples: list[MetricSample] = []
    for lineno, row in enumerate(rows, start=2):
        if not row:
            continue
        if len(row) != len(SAMPLE_CSV_HEADER):
            raise ValueError(
                f"line {lineno}: expected {len(SAMPLE_CSV_HEADER)} fields, got {len(row)}"
            )
        fields = dict(zip(SAMPLE_CSV_HEADER, row))
        try:
            metric = MetricId(fields["metric"])
        except ValueError:
            raise ValueError(
                f"line {lineno}: unknown metric name {fields['metric']!r}"
            ) from None
        completed_raw = fields["test_completed"].strip().lower()
        if completed_raw not in ("true", "false"):
            raise ValueError(
                f"line {lineno}: field test_completed: unparseable boolean "
                f"{fields['test_completed']!r}"
            )
        try:
            sample = MetricSample(
                device_id=fields["device_id"],
                workload_id=fields["workload_id"],
                iteration=_parse_int(fields, "iteration", lineno),
                metric=metric,
                value=_parse_number(fields, "value", lineno),
                test_completed=completed_raw == "true",
            )
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        samples.append(sample)
    return samples


def clean(samples: Iterable[MetricSample], devices: Iterable[DeviceSpec]) -> CuratedDataset:
    """Run the cleaning pipeline over raw samples.

    In order: drop samples from tests that did not complete, drop per-sample
    extreme readings (100% dropped frames, 0% animation smoothness), then
    reduce each (device, workload, metric) group to the median of its
    surviving iterations.  A sample that is both incomplete and extreme
    counts as incomplete.
    """
    devices = tuple(devices)
    known = {d.device_id for d in devices}

    incomplete = 0
    extreme = 0
    groups: dict[tuple[str, str, MetricId], list[float]] = {}
    for sample in samples:
        if sample.device_id not in known:
            raise ValueError(f"sample references unknown device {sample.device_id!r}")
        if not sample.test_completed:
            incomplete += 1
            continue
        cutoff = _EXTREME_VALUES.get(sample.metric)
        if cutoff is not None and sample.value == cutoff:
            extreme += 1
            continue
        groups.setdefault(
            (sample.device_id, sample.workload_id, sample.metric), []
        ).append(sample.value)

    rows = {key: statistics.median(values) for key, values in groups.items()}
    surviving = sum(len(v) for v in groups.values())
    return CuratedDataset(
        devices=devices,
        rows=rows,
        provenance=Provenance(incomplete=incomplete, extreme=extreme, surviving=surviving),
    )


def build_matrix(curated: CuratedDataset, metric: MetricId, schema):
    """Assemble the (features, targets) training pairs for one metric.

    Returns ``(X, y, device_ids)`` with one row per (device, workload) entry
    of the metric.  Row order is devices in dataset order, workloads sorted,
    so identical inputs always produce identical matrices.  ``device_ids``
    is aligned with the rows for grouped splitting.
    """
    import numpy as np

    from .features import encode

    per_device: dict[str, list[tuple[str, float]]] = {}
    for (device_id, workload_id, m), value in curated.rows.items():
        if m is metric:
            per_device.setdefault(device_id, []).append((workload_id, value))

    feats: list[np.ndarray] = []
    targets: list[float] = []
    row_devices: list[str] = []
    for spec in curated.devices:
        entries = per_device.get(spec.device_id)
        if not entries:
            continue
        vector = encode(spec, schema)
        for _, value in sorted(entries):
            feats.append(vector)
            targets.append(value)
            row_devices.append(spec.device_id)

    if not feats:
        raise EmptyMetricError(metric)
    return np.array(feats), np.array(targets), row_devices
