"""Model-bundle loading and the prediction payloads served to clients.

The CLI ``predict`` command and the HTTP service share this module so their
outputs are field-for-field identical for the same spec and bundles.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analysis import ImportanceMatrix
from .dataset import DeviceSpec, MetricId
from .features import FeatureSchema, UnknownVendorError, encode
from .gbrt import GbrtModel, load_model, predict_matrix

__all__ = [
    "SPEC_INPUT_FIELDS",
    "SpecFieldError",
    "ModelSet",
    "bundle_filename",
    "load_model_dir",
    "parse_spec_fields",
    "prediction_set",
    "schema_payload",
]

# (name, converter, kind) for the nine prediction inputs, in wire order.
SPEC_INPUT_FIELDS = (
    ("cpu_base_freq_ghz", float, "numeric"),
    ("cpu_core_count", int, "numeric"),
    ("cpu_thread_count", int, "numeric"),
    ("cpu_vendor", str, "categorical"),
    ("ram_data_rate_gts", int, "numeric"),
    ("ram_capacity_gb", int, "numeric"),
    ("display_horizontal_px", int, "numeric"),
    ("display_vertical_px", int, "numeric"),
    ("display_refresh_hz", int, "numeric"),
)

# UI control bounds; generous, not tied to any particular fleet.
_FIELD_BOUNDS = {
    "cpu_base_freq_ghz": (0.5, 5.0, 0.1),
    "cpu_core_count": (1, 32, 1),
    "cpu_thread_count": (1, 64, 1),
    "ram_data_rate_gts": (1, 16, 1),
    "ram_capacity_gb": (1, 128, 1),
    "display_horizontal_px": (640, 7680, 1),
    "display_vertical_px": (360, 4320, 1),
    "display_refresh_hz": (30, 240, 1),
}

_METRIC_DESCRIPTIONS = {
    MetricId.STARTUP_TIME: "How long an application takes to open its window",
    MetricId.TAB_SWITCH_TIME: "Delay between switching tabs and the next rendered frame",
    MetricId.LARGEST_CONTENTFUL_PAINT: "Delay until the page's largest content block is painted",
    MetricId.JANKY_INTERVALS: "How often user input sat queued for over 100 ms",
    MetricId.KEY_PRESS_DELAY: "Delay before an application reacts to a key press",
    MetricId.MOUSE_PRESS_DELAY: "Delay before an application reacts to a mouse press",
    MetricId.DROPPED_FRAMES: "Share of frames dropped while scrolling or updating",
    MetricId.WINDOW_ANIMATION: "Window-animation frame rate relative to 60 FPS",
    MetricId.TAB_SWITCH_ANIMATION: "Tab-switch animation frame rate relative to 60 FPS",
}


class SpecFieldError(ValueError):
    """A prediction input field is missing or invalid."""

    def __init__(self, fld: str, message: str):
        self.field = fld
        super().__init__(message)


def bundle_filename(metric: MetricId) -> str:
    return f"model_{metric.value}.json"


@dataclass(frozen=True)
class ModelSet:
    """The nine per-metric models plus their shared schema and content hash."""

    models: dict[MetricId, GbrtModel]
    schema: FeatureSchema
    bundle_version: str


def load_model_dir(model_dir: str | Path) -> ModelSet:
    """Load all nine bundles from a directory, checking schema consistency.

    The bundle_version is a content hash over the bundle bytes (in metric
    order), so any retrained model changes the served version string.
    """
    model_dir = Path(model_dir)
    models: dict[MetricId, GbrtModel] = {}
    digest = hashlib.sha256()
    schema: FeatureSchema | None = None
    for metric in MetricId:
        path = model_dir / bundle_filename(metric)
        if not path.is_file():
            raise FileNotFoundError(f"missing model bundle: {path}")
        data = path.read_bytes()
        model = load_model(data)
        if model.metric is not metric:
            raise ValueError(
                f"{path} contains model for {model.metric}, expected {metric}"
            )
        if schema is None:
            schema = model.schema
        elif model.schema != schema:
            raise ValueError(f"{path} uses a different feature schema than its peers")
        digest.update(data)
        models[metric] = model
    assert schema is not None
    return ModelSet(models=models, schema=schema, bundle_version=digest.hexdigest()[:12])


def parse_spec_fields(fields: dict) -> DeviceSpec:
    """Validate a mapping of the nine input fields into a DeviceSpec.

    Raises SpecFieldError naming the first offending field.
    """
    values = {}
    for name, conv, _kind in SPEC_INPUT_FIELDS:
        if name not in fields:
            raise SpecFieldError(name, f"missing field: {name}")
        raw = fields[name]
        try:
            if conv is int and isinstance(raw, float) and not raw.is_integer():
                raise ValueError("not an integer")
            values[name] = conv(raw)
        except (TypeError, ValueError):
            raise SpecFieldError(name, f"invalid value for {name}: {raw!r}") from None
    extra = set(fields) - {name for name, _, _ in SPEC_INPUT_FIELDS}
    if extra:
        fld = sorted(extra)[0]
        raise SpecFieldError(fld, f"unknown field: {fld}")
    try:
        return DeviceSpec(device_id="candidate", **values)
    except ValueError as exc:
        message = str(exc)
        fld = next(
            (name for name, _, _ in SPEC_INPUT_FIELDS if name in message),
            "spec",
        )
        raise SpecFieldError(fld, message) from None


def prediction_set(modelset: ModelSet, spec: DeviceSpec) -> dict:
    """All nine predictions for one spec, with units and the spec echo.

    Raises UnknownVendorError for vendors absent from the training schema.
    """
    vector = encode(spec, modelset.schema)
    row = np.asarray(vector)[None, :]
    predictions = {}
    units = {}
    for metric in MetricId:
        predictions[metric.value] = float(predict_matrix(modelset.models[metric], row)[0])
        units[metric.value] = metric.unit
    return {
        "predictions": predictions,
        "units": units,
        "bundle_version": modelset.bundle_version,
        "spec": {name: getattr(spec, name) for name, _, _ in SPEC_INPUT_FIELDS},
    }


def schema_payload(modelset: ModelSet) -> dict:
    """The /api/schema document: input controls, vendors, metric catalog."""
    features = []
    for name, _conv, kind in SPEC_INPUT_FIELDS:
        if kind == "categorical":
            features.append({
                "name": name,
                "kind": "categorical",
                "choices": list(modelset.schema.vendors),
            })
        else:
            lo, hi, step = _FIELD_BOUNDS[name]
            entry = {"name": name, "kind": "numeric", "min": lo, "max": hi, "step": step}
            if name == "display_refresh_hz":
                entry["used_by_model"] = False
            features.append(entry)
    metrics = [
        {
            "id": m.value,
            "group": m.group.value,
            "unit": m.unit,
            "direction": "lower" if m.lower_is_better else "higher",
            "description": _METRIC_DESCRIPTIONS[m],
        }
        for m in MetricId
    ]
    return {
        "features": features,
        "vendors": list(modelset.schema.vendors),
        "metrics": metrics,
    }


def load_importance_file(model_dir: str | Path) -> ImportanceMatrix | None:
    path = Path(model_dir) / "importance.json"
    if not path.is_file():
        return None
    return ImportanceMatrix.from_json_obj(json.loads(path.read_text(encoding="utf-8")))
