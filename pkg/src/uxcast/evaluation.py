"""Grouped device splits, accuracy metrics, and hyperparameter grid search.

Splitting and cross-validation are grouped by device: every row of a device
lands in exactly one partition or fold, so no model is ever scored on rows
of a device it trained on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .dataset import CuratedDataset, MetricId, build_matrix
from .features import FeatureSchema
from .gbrt import GbrtModel, Hyperparameters, fit_gbrt, predict_matrix
from .seeding import child_seed, make_rng, stage_seeds

__all__ = [
    "SplitManifest",
    "Grid",
    "MetricResult",
    "EvaluationReport",
    "split_devices",
    "mse",
    "r_squared",
    "maape",
    "grid_search",
    "combo_train_seed",
    "evaluate_all",
]

SPLIT_RATIOS = (0.8, 0.1, 0.1)


@dataclass(frozen=True)
class SplitManifest:
    """Disjoint train/validation/test device sets plus their provenance."""

    train: tuple[str, ...]
    validation: tuple[str, ...]
    test: tuple[str, ...]
    seed: int
    ratios: tuple[float, float, float] = SPLIT_RATIOS

    def to_json_obj(self) -> dict:
        return {
            "train": list(self.train),
            "validation": list(self.validation),
            "test": list(self.test),
            "seed": self.seed,
            "ratios": list(self.ratios),
        }


@dataclass(frozen=True)
class Grid:
    """Candidate values for the five tuned hyperparameters.

    ``None`` stands for unlimited depth / all features.  The defaults cover
    every optimum the tuning is expected to land on for this problem size.
    """

    n_estimators: tuple[int, ...] = (32, 64, 96, 128)
    learning_rate: tuple[float, ...] = (0.1, 0.2, 0.3)
    subsample: tuple[float, ...] = (0.5, 0.6, 0.7, 1.0)
    max_depth: tuple[int | None, ...] = (2, 3, 5, None)
    max_features: tuple[int | None, ...] = (2, 3, 6, 7, None)

    def __post_init__(self):
        for name in ("n_estimators", "learning_rate", "subsample", "max_depth",
                     "max_features"):
            if not getattr(self, name):
                raise ValueError(f"grid axis {name} must be non-empty")

    def combos(self) -> list[tuple[float, float, int | None, int | None]]:
        """The (lr, subsample, depth, features) axes, n_estimators excluded."""
        return [
            (lr, sub, depth, mf)
            for lr in self.learning_rate
            for sub in self.subsample
            for depth in self.max_depth
            for mf in self.max_features
        ]

    def points(self) -> list[Hyperparameters]:
        """Full grid in canonical enumeration order (n_estimators outermost)."""
        return [
            Hyperparameters(n, lr, sub, depth, mf)
            for n in self.n_estimators
            for (lr, sub, depth, mf) in self.combos()
        ]


@dataclass(frozen=True)
class MetricResult:
    """One metric's tuned model quality."""

    metric: MetricId
    hyperparameters: Hyperparameters
    fit_r2: float
    test_maape_radians: float
    test_maape_percent: float
    test_mse: float

    def to_json_obj(self) -> dict:
        return {
            "metric": self.metric.value,
            "hyperparameters": self.hyperparameters.to_json_obj(),
            "fit_r2": self.fit_r2,
            "test_maape_radians": self.test_maape_radians,
            "test_maape_percent": self.test_maape_percent,
            "test_mse": self.test_mse,
        }


@dataclass(frozen=True)
class EvaluationReport:
    """Per-metric results, their means, the split, and the CV table."""

    per_metric: tuple[MetricResult, ...]
    split: SplitManifest
    mean_fit_r2: float
    mean_test_maape_radians: float
    mean_test_maape_percent: float
    cv_rows: tuple[tuple[MetricId, Hyperparameters, float], ...] = field(default=())

    def to_json_obj(self) -> dict:
        return {
            "per_metric": [r.to_json_obj() for r in self.per_metric],
            "split": self.split.to_json_obj(),
            "mean_fit_r2": self.mean_fit_r2,
            "mean_test_maape_radians": self.mean_test_maape_radians,
            "mean_test_maape_percent": self.mean_test_maape_percent,
        }

    def cv_table_csv(self) -> str:
        lines = ["metric,n_estimators,learning_rate,subsample,max_depth,max_features,cv_mse"]
        for metric, hyper, cv_mse in self.cv_rows:
            depth = "" if hyper.max_depth is None else str(hyper.max_depth)
            mf = "" if hyper.max_features is None else str(hyper.max_features)
            lines.append(
                f"{metric.value},{hyper.n_estimators},{hyper.learning_rate},"
                f"{hyper.subsample},{depth},{mf},{cv_mse!r}"
            )
        return "\n".join(lines) + "\n"


def split_devices(device_ids: list[str], seed: int) -> SplitManifest:
    """80/10/10 pseudo-random split of devices.

    Devices are shuffled deterministically by ``seed``; sizes are
    n_val = round(0.1 n), n_test = round(0.1 n) (Python half-to-even
    rounding), train takes the rest; assignment is train, then validation,
    then test in shuffled order.
    """
    ids = list(device_ids)
    n = len(ids)
    if n < 3:
        raise ValueError(f"need at least 3 devices to split, got {n}")
    if len(set(ids)) != n:
        raise ValueError("device_ids must be unique")
    order = make_rng(seed).permutation(n)
    shuffled = [ids[i] for i in order]
    n_val = round(0.1 * n)
    n_test = round(0.1 * n)
    n_train = n - n_val - n_test
    return SplitManifest(
        train=tuple(shuffled[:n_train]),
        validation=tuple(shuffled[n_train:n_train + n_val]),
        test=tuple(shuffled[n_train + n_val:]),
        seed=int(seed),
    )


def mse(actual, predicted) -> float:
    """Mean squared error."""
    a = np.asarray(actual, dtype=np.float64)
    p = np.asarray(predicted, dtype=np.float64)
    if a.shape != p.shape or a.size == 0:
        raise ValueError("actual and predicted must be equal-length and non-empty")
    return float(np.mean((a - p) ** 2))


def r_squared(actual, predicted) -> float:
    """Coefficient of determination: 1 - SS_res / SS_tot."""
    a = np.asarray(actual, dtype=np.float64)
    p = np.asarray(predicted, dtype=np.float64)
    if a.shape != p.shape or a.size < 2:
        raise ValueError("actual and predicted must be equal-length with >= 2 points")
    ss_tot = float(np.sum((a - np.mean(a)) ** 2))
    if ss_tot == 0.0:
        raise ValueError("degenerate targets: zero total variance")
    ss_res = float(np.sum((a - p) ** 2))
    return 1.0 - ss_res / ss_tot


def maape(actual, predicted) -> tuple[float, float]:
    """Mean arctangent absolute percentage error, as (radians, percent).

    Per point: arctan(|y - yhat| / |y|), with arctan(0/0) = 0 and a zero
    actual against a positive prediction scoring the arctan limit pi/2.
    The percent form is 100 * radians.
    """
    a = np.asarray(actual, dtype=np.float64)
    p = np.asarray(predicted, dtype=np.float64)
    if a.shape != p.shape or a.size == 0:
        raise ValueError("actual and predicted must be equal-length and non-empty")
    if np.any(a < 0) or np.any(p < 0):
        raise ValueError("maape is defined for non-negative values only")
    aape = np.empty(a.shape)
    zero = a == 0
    aape[zero] = np.where(p[zero] == 0, 0.0, math.pi / 2)
    nz = ~zero
    with np.errstate(over="ignore"):  # arctan(inf) is the correct pi/2 limit
        aape[nz] = np.arctan(np.abs(a[nz] - p[nz]) / np.abs(a[nz]))
    radians = float(np.mean(aape))
    return radians, 100.0 * radians


def combo_train_seed(seed: int, combo_index: int, fold_index: int) -> int:
    """Training seed for one (grid combo, CV fold) cell.

    A pure function of the search seed and the point's position, never of
    execution order, so parallel and sequential searches agree.  Grid points
    differing only in n_estimators share a seed by construction: boosting
    stage streams are indexed, so an m-estimator model is exactly the first
    m stages of the longest fit.
    """
    return child_seed(seed, 1, combo_index, fold_index)


def _assign_folds(device_order: list[str], folds: int, seed: int) -> dict[str, int]:
    rng = make_rng(child_seed(seed, 0))
    order = rng.permutation(len(device_order))
    return {device_order[j]: i % folds for i, j in enumerate(order)}


def grid_search(rows: np.ndarray, targets: np.ndarray, device_ids: list[str],
                grid: Grid, folds: int, seed: int,
                ) -> tuple[Hyperparameters, list[tuple[Hyperparameters, float]]]:
    """Cross-validated grid search minimizing held-out-fold MSE.

    Devices are partitioned into ``folds`` groups deterministically by
    ``seed``; each grid point's score is the mean MSE over held-out folds.
    Ties break toward fewer estimators, then shallower depth, then lower
    learning rate, then grid enumeration order.  Returns the winning point
    and the full (point, mean MSE) table in enumeration order.
    """
    X = np.ascontiguousarray(rows, dtype=np.float64)
    y = np.ascontiguousarray(targets, dtype=np.float64)
    if folds < 2:
        raise ValueError(f"folds must be >= 2, got {folds}")
    device_order: list[str] = []
    seen = set()
    for d in device_ids:
        if d not in seen:
            seen.add(d)
            device_order.append(d)
    if len(device_order) < folds:
        raise ValueError(
            f"need at least {folds} distinct devices for {folds}-fold CV, "
            f"got {len(device_order)}"
        )
    fold_of_device = _assign_folds(device_order, folds, seed)
    row_fold = np.array([fold_of_device[d] for d in device_ids])

    combos = grid.combos()
    checkpoints = np.array(sorted(grid.n_estimators), dtype=np.int64)
    max_est = int(checkpoints[-1])
    # mse_sums[k, c]: summed held-out MSE of (n_estimators=checkpoints[k], combos[c])
    mse_sums = np.zeros((len(checkpoints), len(combos)))
    for fold in range(folds):
        val_mask = row_fold == fold
        train_mask = ~val_mask
        X_tr, y_tr = X[train_mask], y[train_mask]
        X_va, y_va = X[val_mask], y[val_mask]
        for c, (lr, sub, depth, mf) in enumerate(combos):
            dl = -1 if depth is None else depth
            mfv = X.shape[1] if mf is None else mf
            seeds = stage_seeds(combo_train_seed(seed, c, fold), max_est)
            val_raw = _kernels.boost_validation_curve(
                X_tr, y_tr, float(np.mean(y_tr)), X_va, max_est, lr, sub, dl, mfv,
                seeds, checkpoints,
            )
            val_pred = np.maximum(val_raw, 0.0)
            for k in range(len(checkpoints)):
                mse_sums[k, c] += float(np.mean((y_va - val_pred[k]) ** 2))

    mean_mse = mse_sums / folds
    n_index = {n: k for k, n in enumerate(checkpoints)}
    cv_table: list[tuple[Hyperparameters, float]] = []
    best: Hyperparameters | None = None
    best_key: tuple | None = None
    for n_est in grid.n_estimators:
        for c, (lr, sub, depth, mf) in enumerate(combos):
            point = Hyperparameters(n_est, lr, sub, depth, mf)
            score = float(mean_mse[n_index[n_est], c])
            cv_table.append((point, score))
            depth_key = math.inf if depth is None else depth
            key = (score, n_est, depth_key, lr, len(cv_table))
            if best_key is None or key < best_key:
                best_key = key
                best = point
    assert best is not None
    return best, cv_table


def evaluate_all(curated: CuratedDataset, grid: Grid, folds: int, seed: int,
                 ) -> tuple[dict[MetricId, GbrtModel], EvaluationReport]:
    """Tune, fit, and score one model per metric.

    Devices are split once by ``seed``; each metric runs a grid search on
    the training devices, refits on train+validation rows with the winning
    hyperparameters, and reports fit R^2 on those rows plus MAAPE/MSE on the
    held-out test devices.
    """
    ids = curated.device_ids()
    manifest = split_devices(ids, seed)
    schema = FeatureSchema.from_device_specs(curated.devices)
    train_set = set(manifest.train)
    fitval_set = train_set | set(manifest.validation)
    test_set = set(manifest.test)

    models: dict[MetricId, GbrtModel] = {}
    results: list[MetricResult] = []
    cv_rows: list[tuple[MetricId, Hyperparameters, float]] = []
    for index, metric in enumerate(MetricId):
        X, y, row_devices = build_matrix(curated, metric, schema)
        in_train = np.array([d in train_set for d in row_devices])
        in_fitval = np.array([d in fitval_set for d in row_devices])
        in_test = np.array([d in test_set for d in row_devices])

        train_devices = [d for d, m in zip(row_devices, in_train) if m]
        best, cv_table = grid_search(
            X[in_train], y[in_train], train_devices, grid, folds,
            child_seed(seed, 1, index),
        )
        cv_rows.extend((metric, point, score) for point, score in cv_table)

        model = fit_gbrt(
            X[in_fitval], y[in_fitval], best, child_seed(seed, 2, index),
            schema=schema, metric=metric,
        )
        fit_pred = predict_matrix(model, X[in_fitval])
        fit_r2 = r_squared(y[in_fitval], fit_pred)
        test_pred = predict_matrix(model, X[in_test])
        maape_rad, maape_pct = maape(y[in_test], test_pred)
        test_mse = mse(y[in_test], test_pred)

        models[metric] = model
        results.append(MetricResult(
            metric=metric,
            hyperparameters=best,
            fit_r2=fit_r2,
            test_maape_radians=maape_rad,
            test_maape_percent=maape_pct,
            test_mse=test_mse,
        ))

    report = EvaluationReport(
        per_metric=tuple(results),
        split=manifest,
        mean_fit_r2=float(np.mean([r.fit_r2 for r in results])),
        mean_test_maape_radians=float(np.mean([r.test_maape_radians for r in results])),
        mean_test_maape_percent=float(np.mean([r.test_maape_percent for r in results])),
        cv_rows=tuple(cv_rows),
    )
    return models, report
