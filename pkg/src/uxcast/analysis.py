"""Rank correlation between specs and metrics, and feature importance.

Kendall's tau-b is used (rather than tau-a or Pearson) because hardware spec
values are heavily tied across a fleet.  Feature importance is permutation
importance: the drop in a model's R^2 when a single feature column is
shuffled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import CuratedDataset, MetricId
from .features import SLOT_NAMES, pixel_count
from .gbrt import GbrtModel, predict_matrix
from .seeding import make_rng
from .evaluation import r_squared

__all__ = [
    "CORRELATION_SPEC_FIELDS",
    "CorrelationMatrix",
    "ImportanceMatrix",
    "kendall_tau_b",
    "correlation_matrix",
    "permutation_importance",
    "normalize_importance",
]

# Vendor is categorical and has no rank; refresh rate is kept as a row and
# simply comes out degenerate on fleets where it never varies.
CORRELATION_SPEC_FIELDS = (
    "cpu_base_freq_ghz",
    "cpu_core_count",
    "cpu_thread_count",
    "ram_data_rate_gts",
    "ram_capacity_gb",
    "pixel_count",
    "display_refresh_hz",
)


def kendall_tau_b(x, y) -> float:
    """Kendall's tau-b: (C - D) / sqrt((n0 - t_x)(n0 - t_y)).

    C and D count concordant and discordant pairs; n0 = n(n-1)/2; t_x and
    t_y count pairs tied in each vector.  All pairs are enumerated, which is
    fine at fleet sizes.
    """
    a = np.asarray(x, dtype=np.float64)
    b = np.asarray(y, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise ValueError("inputs must be equal-length 1-D vectors with >= 2 points")
    n = a.size
    iu = np.triu_indices(n, k=1)
    dx = np.sign(a[:, None] - a[None, :])[iu]
    dy = np.sign(b[:, None] - b[None, :])[iu]
    prod = dx * dy
    concordant = int(np.sum(prod > 0))
    discordant = int(np.sum(prod < 0))
    ties_x = int(np.sum(dx == 0))
    ties_y = int(np.sum(dy == 0))
    n0 = n * (n - 1) // 2
    if ties_x == n0 or ties_y == n0:
        raise ValueError("degenerate ranking: all values tied")
    return (concordant - discordant) / np.sqrt(
        float(n0 - ties_x) * float(n0 - ties_y)
    )


@dataclass(frozen=True)
class CorrelationMatrix:
    """tau-b of each spec field against each metric; None marks degenerate cells."""

    spec_fields: tuple[str, ...]
    metrics: tuple[MetricId, ...]
    values: dict[tuple[str, MetricId], float | None]

    def to_csv(self) -> str:
        header = "spec_field," + ",".join(m.value for m in self.metrics)
        lines = [header]
        for fld in self.spec_fields:
            cells = []
            for m in self.metrics:
                v = self.values[(fld, m)]
                cells.append("" if v is None else repr(v))
            lines.append(fld + "," + ",".join(cells))
        return "\n".join(lines) + "\n"


def _spec_field_value(spec, fld: str) -> float:
    if fld == "pixel_count":
        return float(pixel_count(spec.display_horizontal_px, spec.display_vertical_px))
    return float(getattr(spec, fld))


def correlation_matrix(curated: CuratedDataset) -> CorrelationMatrix:
    """Rank-correlate spec fields against per-device mean metric values.

    Each device's metric value is the mean over its workloads' curated rows;
    devices lacking rows for a metric are skipped pairwise.  Degenerate
    columns (all tied, or fewer than two devices) produce None entries
    rather than failures.
    """
    per_device: dict[MetricId, dict[str, list[float]]] = {m: {} for m in MetricId}
    for (device_id, _workload, metric), value in curated.rows.items():
        per_device[metric].setdefault(device_id, []).append(value)
    if sum(1 for d in curated.devices if any(
            d.device_id in per_device[m] for m in MetricId)) < 2:
        raise ValueError("need at least 2 devices with curated rows")

    values: dict[tuple[str, MetricId], float | None] = {}
    for fld in CORRELATION_SPEC_FIELDS:
        for metric in MetricId:
            xs, ys = [], []
            for spec in curated.devices:
                rows = per_device[metric].get(spec.device_id)
                if rows:
                    xs.append(_spec_field_value(spec, fld))
                    ys.append(float(np.mean(rows)))
            try:
                values[(fld, metric)] = kendall_tau_b(xs, ys)
            except ValueError:
                values[(fld, metric)] = None
    return CorrelationMatrix(
        spec_fields=CORRELATION_SPEC_FIELDS,
        metrics=tuple(MetricId),
        values=values,
    )


def permutation_importance(model: GbrtModel, rows: np.ndarray, targets: np.ndarray,
                           repeats: int, seed: int) -> np.ndarray:
    """Raw importance per feature slot: mean R^2 drop under column shuffles.

    Each (slot, repeat) cell shuffles only that column, with a permutation
    keyed by (seed, slot, repeat) so results do not depend on evaluation
    order.  A slot no tree ever splits on scores exactly zero.
    """
    X = np.ascontiguousarray(rows, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("rows must be a non-empty 2-D matrix")
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    base = r_squared(y, predict_matrix(model, X))
    importances = np.zeros(X.shape[1])
    for slot in range(X.shape[1]):
        drop = 0.0
        for repeat in range(repeats):
            perm = make_rng(seed, slot, repeat).permutation(X.shape[0])
            shuffled = X.copy()
            shuffled[:, slot] = X[perm, slot]
            drop += base - r_squared(y, predict_matrix(model, shuffled))
        importances[slot] = drop / repeats
    return importances


def normalize_importance(raw) -> np.ndarray:
    """Clamp negatives to zero, then scale so the maximum is 1 (zeros stay zeros)."""
    values = np.clip(np.asarray(raw, dtype=np.float64), 0.0, None)
    peak = values.max() if values.size else 0.0
    if peak == 0.0:
        return values
    return values / peak


@dataclass(frozen=True)
class ImportanceMatrix:
    """Normalized per-model feature importances: 10 slots x 9 models."""

    slot_names: tuple[str, ...]
    metrics: tuple[MetricId, ...]
    values: np.ndarray  # (n_slots, n_metrics), each column in [0, 1]

    @classmethod
    def from_models(cls, per_model_raw: dict[MetricId, np.ndarray]) -> "ImportanceMatrix":
        metrics = tuple(MetricId)
        cols = [normalize_importance(per_model_raw[m]) for m in metrics]
        return cls(
            slot_names=SLOT_NAMES,
            metrics=metrics,
            values=np.column_stack(cols),
        )

    def to_csv(self) -> str:
        header = "feature," + ",".join(m.value for m in self.metrics)
        lines = [header]
        for i, name in enumerate(self.slot_names):
            lines.append(name + "," + ",".join(repr(float(v)) for v in self.values[i]))
        return "\n".join(lines) + "\n"

    def to_json_obj(self) -> dict:
        return {
            "features": list(self.slot_names),
            "metrics": [m.value for m in self.metrics],
            "values": [[float(v) for v in row] for row in self.values],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "ImportanceMatrix":
        return cls(
            slot_names=tuple(obj["features"]),
            metrics=tuple(MetricId(m) for m in obj["metrics"]),
            values=np.array(obj["values"], dtype=np.float64),
        )
