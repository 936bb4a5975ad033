"""Fixed feature schema and device-spec encoding.

A device encodes to a 10-slot vector: three CPU numbers, a 4-slot one-hot
vendor block, two RAM numbers, and a single pixel-count slot.  Display
refresh rate is deliberately not a slot; two specs differing only in refresh
rate encode identically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .dataset import DeviceSpec

__all__ = [
    "VENDOR_SLOTS",
    "SLOT_NAMES",
    "UnknownVendorError",
    "FeatureSchema",
    "pixel_count",
    "one_hot_vendor",
    "encode",
]

VENDOR_SLOTS = 4

SLOT_NAMES = (
    "cpu_base_freq_ghz",
    "cpu_core_count",
    "cpu_thread_count",
    "vendor_0",
    "vendor_1",
    "vendor_2",
    "vendor_3",
    "ram_data_rate_gts",
    "ram_capacity_gb",
    "pixel_count",
)

# Largest integer exactly representable in a float64 slot.
_MAX_EXACT_INT = 2**53


class UnknownVendorError(ValueError):
    def __init__(self, label: str):
        self.label = label
        super().__init__(f"unknown vendor: {label!r}")


@dataclass(frozen=True)
class FeatureSchema:
    """Slot layout plus the vendor-label -> one-hot-slot registry.

    Vendor slots are assigned in registration order (first appearance in the
    device table), which keeps the encoding deterministic without assuming
    any canonical vendor ordering.
    """

    vendors: tuple[str, ...]

    def __post_init__(self):
        if len(self.vendors) > VENDOR_SLOTS:
            raise ValueError(
                f"at most {VENDOR_SLOTS} vendor labels supported, got {len(self.vendors)}"
            )
        if len(set(self.vendors)) != len(self.vendors):
            raise ValueError("duplicate vendor labels")

    @classmethod
    def from_device_specs(cls, specs: Iterable[DeviceSpec]) -> "FeatureSchema":
        labels: list[str] = []
        for spec in specs:
            if spec.cpu_vendor not in labels:
                labels.append(spec.cpu_vendor)
        return cls(vendors=tuple(labels))

    @property
    def slot_names(self) -> tuple[str, ...]:
        return SLOT_NAMES

    @property
    def n_slots(self) -> int:
        return len(SLOT_NAMES)

    def vendor_index(self, label: str) -> int:
        try:
            return self.vendors.index(label)
        except ValueError:
            raise UnknownVendorError(label) from None


def pixel_count(horizontal: int, vertical: int) -> int:
    """Total pixels of a display, the single resolution feature."""
    if horizontal <= 0 or vertical <= 0:
        raise ValueError("pixel dimensions must be positive")
    product = int(horizontal) * int(vertical)
    if product > _MAX_EXACT_INT:
        raise OverflowError(f"pixel count {product} overflows the feature slot")
    return product


def one_hot_vendor(label: str, schema: FeatureSchema) -> np.ndarray:
    """One-hot encoding of a registered vendor label over the 4 vendor slots."""
    slots = np.zeros(VENDOR_SLOTS)
    slots[schema.vendor_index(label)] = 1.0
    return slots


def encode(spec: DeviceSpec, schema: FeatureSchema) -> np.ndarray:
    """Encode a device spec into the 10-slot feature vector."""
    vector = np.empty(len(SLOT_NAMES))
    vector[0] = spec.cpu_base_freq_ghz
    vector[1] = spec.cpu_core_count
    vector[2] = spec.cpu_thread_count
    vector[3:7] = one_hot_vendor(spec.cpu_vendor, schema)
    vector[7] = spec.ram_data_rate_gts
    vector[8] = spec.ram_capacity_gb
    vector[9] = pixel_count(spec.display_horizontal_px, spec.display_vertical_px)
    return vector
