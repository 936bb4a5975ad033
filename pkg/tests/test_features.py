import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uxcast.dataset import DeviceSpec
from uxcast.features import (
    SLOT_NAMES,
    FeatureSchema,
    UnknownVendorError,
    encode,
    one_hot_vendor,
    pixel_count,
)

SCHEMA = FeatureSchema(vendors=("VendorA", "VendorB", "VendorC", "VendorD"))


def spec(**overrides):
    fields = dict(
        device_id="dev-01",
        cpu_base_freq_ghz=2.4,
        cpu_core_count=4,
        cpu_thread_count=8,
        cpu_vendor="VendorB",
        ram_data_rate_gts=4,
        ram_capacity_gb=8,
        display_horizontal_px=1920,
        display_vertical_px=1080,
        display_refresh_hz=60,
    )
    fields.update(overrides)
    return DeviceSpec(**fields)


class TestPixelCount:
    def test_full_hd(self):
        assert pixel_count(1920, 1080) == 2073600

    def test_identity(self):
        assert pixel_count(1, 1) == 1

    def test_wqxga(self):
        assert pixel_count(2560, 1600) == 4096000

    def test_overflow(self):
        with pytest.raises(OverflowError):
            pixel_count(2**27, 2**27)


class TestOneHotVendor:
    def test_index_two(self):
        assert one_hot_vendor("VendorC", SCHEMA).tolist() == [0, 0, 1, 0]

    def test_index_zero(self):
        assert one_hot_vendor("VendorA", SCHEMA).tolist() == [1, 0, 0, 0]

    def test_unknown_label(self):
        with pytest.raises(UnknownVendorError, match="unknown vendor"):
            one_hot_vendor("VendorX", SCHEMA)


class TestSchema:
    def test_ten_slots_four_vendor(self):
        assert len(SLOT_NAMES) == 10
        assert sum(1 for s in SLOT_NAMES if s.startswith("vendor_")) == 4
        assert "display_refresh_hz" not in SLOT_NAMES

    def test_registration_order(self):
        specs = [spec(device_id=f"d{i}", cpu_vendor=v)
                 for i, v in enumerate(["VendorC", "VendorA", "VendorC", "VendorB"])]
        schema = FeatureSchema.from_device_specs(specs)
        assert schema.vendors == ("VendorC", "VendorA", "VendorB")
        assert schema.vendor_index("VendorC") == 0

    def test_at_most_four_vendors(self):
        with pytest.raises(ValueError, match="at most 4"):
            FeatureSchema(vendors=("a", "b", "c", "d", "e"))


class TestEncode:
    def test_slot_by_slot(self):
        vector = encode(spec(), SCHEMA)
        assert vector.tolist() == [2.4, 4, 8, 0, 1, 0, 0, 4, 8, 2073600]

    def test_refresh_rate_ignored(self):
        a = encode(spec(display_refresh_hz=60), SCHEMA)
        b = encode(spec(display_refresh_hz=120), SCHEMA)
        assert np.array_equal(a, b)

    def test_vendor_slots_sum_to_one(self):
        for vendor in SCHEMA.vendors:
            vector = encode(spec(cpu_vendor=vendor), SCHEMA)
            assert vector[3:7].sum() == 1
            assert set(vector[3:7]) <= {0.0, 1.0}


@st.composite
def specs(draw):
    cores = draw(st.sampled_from([2, 4, 6, 8]))
    return spec(
        cpu_base_freq_ghz=round(draw(st.floats(min_value=1.0, max_value=4.0)), 1),
        cpu_core_count=cores,
        cpu_thread_count=cores * draw(st.sampled_from([1, 2])),
        cpu_vendor=draw(st.sampled_from(SCHEMA.vendors)),
        ram_data_rate_gts=draw(st.sampled_from([2, 3, 4])),
        ram_capacity_gb=draw(st.sampled_from([4, 8, 16])),
        display_horizontal_px=draw(st.integers(min_value=640, max_value=4000)),
        display_vertical_px=draw(st.integers(min_value=480, max_value=2500)),
        display_refresh_hz=draw(st.sampled_from([60, 90, 120])),
    )


class TestEncodeProperties:
    @given(specs())
    @settings(deadline=None)
    def test_shape_and_one_hot(self, s):
        vector = encode(s, SCHEMA)
        assert vector.shape == (10,)
        assert vector[3:7].sum() == 1
        assert all(v >= 0 for v in vector)

    @given(specs(), specs())
    @settings(deadline=None)
    def test_injective_up_to_refresh_rate(self, a, b):
        va, vb = encode(a, SCHEMA), encode(b, SCHEMA)
        identity = (
            a.cpu_base_freq_ghz, a.cpu_core_count, a.cpu_thread_count, a.cpu_vendor,
            a.ram_data_rate_gts, a.ram_capacity_gb,
            a.display_horizontal_px * a.display_vertical_px,
        ) == (
            b.cpu_base_freq_ghz, b.cpu_core_count, b.cpu_thread_count, b.cpu_vendor,
            b.ram_data_rate_gts, b.ram_capacity_gb,
            b.display_horizontal_px * b.display_vertical_px,
        )
        assert np.array_equal(va, vb) == identity
