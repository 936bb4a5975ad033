"""Gradient boosted regression trees with least-squares loss.

The ensemble is the classic additive model: a constant baseline (the mean of
the training targets) plus shrunken regression trees fit stage by stage to
the current residuals.  Trees grow greedily using the least-squares
improvement criterion, optionally on a random row subsample and random
feature subsets.  Predictions are clipped from below at zero because every
target metric is non-negative.

Randomness: ``numpy.random.SeedSequence(train_seed)`` is spawned into one
child per boosting stage; each child's 64-bit state seeds a SplitMix64
stream that supplies that stage's subsample draw and per-node feature
subsets.  Stage streams are indexed, not consumed sequentially, so the first
k stages of any fit are identical to a k-estimator fit with the same seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .dataset import MetricId
from .features import SLOT_NAMES, FeatureSchema
from .seeding import SplitMix64, stage_seeds

__all__ = [
    "Hyperparameters",
    "RegressionTree",
    "GbrtModel",
    "ModelBundleError",
    "MalformedBundleError",
    "BundleVersionError",
    "BundleSchemaError",
    "fit_tree",
    "tree_predict",
    "fit_gbrt",
    "gbrt_predict",
    "predict_matrix",
    "staged_training_mse",
    "save_model",
    "load_model",
    "FORMAT_VERSION",
]

FORMAT_VERSION = 1


class ModelBundleError(ValueError):
    """Base class for model (de)serialization failures."""


class MalformedBundleError(ModelBundleError):
    pass


class BundleVersionError(ModelBundleError):
    pass


class BundleSchemaError(ModelBundleError):
    pass


@dataclass(frozen=True)
class Hyperparameters:
    """The five tuned knobs.

    ``max_depth=None`` means trees are expanded until all leaves are pure;
    ``max_features=None`` means all features are considered for the best
    split.
    """

    n_estimators: int
    learning_rate: float
    subsample: float
    max_depth: int | None
    max_features: int | None

    def __post_init__(self):
        if self.n_estimators < 0:
            raise ValueError(f"n_estimators must be >= 0, got {self.n_estimators}")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError(f"learning_rate must be in (0, 1], got {self.learning_rate}")
        if not 0.0 < self.subsample <= 1.0:
            raise ValueError(f"subsample must be in (0, 1], got {self.subsample}")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError(f"max_depth must be positive or None, got {self.max_depth}")
        if self.max_features is not None and not 1 <= self.max_features <= len(SLOT_NAMES):
            raise ValueError(
                f"max_features must be in [1, {len(SLOT_NAMES)}] or None, "
                f"got {self.max_features}"
            )

    def to_json_obj(self) -> dict:
        return {
            "n_estimators": self.n_estimators,
            "learning_rate": self.learning_rate,
            "subsample": self.subsample,
            "max_depth": self.max_depth,
            "max_features": self.max_features,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Hyperparameters":
        return cls(
            n_estimators=obj["n_estimators"],
            learning_rate=obj["learning_rate"],
            subsample=obj["subsample"],
            max_depth=obj["max_depth"],
            max_features=obj["max_features"],
        )


@dataclass(frozen=True, eq=False)
class RegressionTree:
    """Flat node arrays in preorder; ``feature[i] < 0`` marks a leaf.

    Routing: a sample goes left iff its value at ``feature[i]`` is <= the
    node threshold.  Leaf values are the means of the training residuals
    routed to them.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def depth(self) -> int:
        """Longest root-to-leaf path, in edges."""
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        best = 0
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depths[self.left[i]] = depths[i] + 1
                depths[self.right[i]] = depths[i] + 1
            elif depths[i] > best:
                best = depths[i]
        return int(best)


@dataclass(frozen=True, eq=False)
class GbrtModel:
    """A fitted per-metric ensemble.

    ``schema`` and ``metric`` tie a model to the pipeline's feature layout
    and are required for serialization; bare research fits on ad-hoc
    matrices may leave them unset.
    """

    baseline: float
    learning_rate: float
    trees: tuple[RegressionTree, ...]
    hyperparameters: Hyperparameters
    train_seed: int
    n_features: int
    clip_at_zero: bool = True
    schema: FeatureSchema | None = None
    metric: MetricId | None = None
    _packed: tuple | None = field(default=None, repr=False, compare=False)

    def packed(self) -> tuple:
        """Concatenated node arrays with per-tree root offsets, for fast predict."""
        if self._packed is None:
            if self.trees:
                sizes = np.array([t.n_nodes for t in self.trees], dtype=np.int64)
                offsets = np.concatenate(([0], np.cumsum(sizes)))
                feat = np.concatenate([t.feature for t in self.trees])
                thr = np.concatenate([t.threshold for t in self.trees])
                left = np.concatenate(
                    [t.left + off for t, off in zip(self.trees, offsets)]
                )
                right = np.concatenate(
                    [t.right + off for t, off in zip(self.trees, offsets)]
                )
                leaf = np.concatenate([t.value for t in self.trees])
            else:
                offsets = np.zeros(1, dtype=np.int64)
                feat = np.empty(0, dtype=np.int64)
                thr = np.empty(0)
                left = np.empty(0, dtype=np.int64)
                right = np.empty(0, dtype=np.int64)
                leaf = np.empty(0)
            object.__setattr__(self, "_packed", (feat, thr, left, right, leaf, offsets))
        return self._packed


def fit_tree(rows: np.ndarray, residuals: np.ndarray, depth_limit: int | None,
             max_features: int | None, rng: SplitMix64) -> RegressionTree:
    """Fit one regression tree to residuals.

    Candidate features at each node are a uniform random subset of size
    ``max_features`` drawn without replacement from ``rng`` (``None`` scans
    every feature and consumes no draws); candidate thresholds are midpoints
    between consecutive sorted distinct values.  ``rng`` is advanced in
    place, one draw block per node in preorder.
    """
    X = np.ascontiguousarray(rows, dtype=np.float64)
    resid = np.ascontiguousarray(residuals, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("rows must be a non-empty 2-D matrix")
    if resid.shape[0] != X.shape[0]:
        raise ValueError("residuals must align with rows")
    n, n_feat = X.shape
    mf = n_feat if max_features is None else min(max_features, n_feat)
    dl = -1 if depth_limit is None else depth_limit

    sidx = np.empty((n_feat, n), dtype=np.int64)
    for f in range(n_feat):
        sidx[f] = np.argsort(X[:, f], kind="mergesort")
    cap = 2 * n + 1
    feat = np.full(cap, -1, dtype=np.int64)
    thr = np.zeros(cap)
    left = np.zeros(cap, dtype=np.int64)
    right = np.zeros(cap, dtype=np.int64)
    leaf = np.zeros(cap)
    n_nodes, state = _kernels.build_tree(
        X, resid, sidx, n, dl, mf, np.uint64(rng.state),
        feat, thr, left, right, leaf,
        np.zeros(n, dtype=np.bool_), np.empty(n, dtype=np.int64),
        np.empty(n, dtype=np.int64), np.empty(n_feat), np.empty(n_feat, dtype=np.int64),
    )
    rng.state = int(state)
    return RegressionTree(
        feature=feat[:n_nodes].copy(),
        threshold=thr[:n_nodes].copy(),
        left=left[:n_nodes].copy(),
        right=right[:n_nodes].copy(),
        value=leaf[:n_nodes].copy(),
    )


def tree_predict(tree: RegressionTree, x: Sequence[float]) -> float:
    """Value of the leaf reached by routing ``x`` (<= threshold goes left)."""
    node = 0
    while tree.feature[node] >= 0:
        if x[tree.feature[node]] <= tree.threshold[node]:
            node = int(tree.left[node])
        else:
            node = int(tree.right[node])
    return float(tree.value[node])


def fit_gbrt(rows: np.ndarray, targets: np.ndarray, hyper: Hyperparameters,
             seed: int, *, schema: FeatureSchema | None = None,
             metric: MetricId | None = None) -> GbrtModel:
    """Fit the boosted ensemble.

    Stage m draws ceil(subsample*n) rows without replacement (subsample=1
    consumes no draw), fits a tree to the residuals on those rows, and adds
    it with shrinkage.  All randomness comes from per-stage streams derived
    from ``seed`` (see module docstring), so identical inputs produce
    identical models.
    """
    X = np.ascontiguousarray(rows, dtype=np.float64)
    y = np.ascontiguousarray(targets, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("rows must be a 2-D matrix")
    if y.shape[0] != X.shape[0]:
        raise ValueError("targets must align with rows")
    if X.shape[0] < 2:
        raise ValueError(f"need at least 2 rows to fit, got {X.shape[0]}")
    if not np.all(np.isfinite(y)):
        raise ValueError("targets must be finite")

    n_feat = X.shape[1]
    mf = n_feat if hyper.max_features is None else min(hyper.max_features, n_feat)
    dl = -1 if hyper.max_depth is None else hyper.max_depth

    trees: list[RegressionTree] = []
    baseline = float(np.mean(y))
    if hyper.n_estimators > 0:
        seeds = stage_seeds(seed, hyper.n_estimators)
        feat, thr, left, right, leaf, sizes, _ = _kernels.fit_boost(
            X, y, baseline, hyper.n_estimators, hyper.learning_rate,
            hyper.subsample, dl, mf, seeds,
        )
        for t in range(hyper.n_estimators):
            nn = sizes[t]
            trees.append(RegressionTree(
                feature=feat[t, :nn].copy(),
                threshold=thr[t, :nn].copy(),
                left=left[t, :nn].copy(),
                right=right[t, :nn].copy(),
                value=leaf[t, :nn].copy(),
            ))
    return GbrtModel(
        baseline=baseline,
        learning_rate=hyper.learning_rate,
        trees=tuple(trees),
        hyperparameters=hyper,
        train_seed=int(seed),
        n_features=n_feat,
        clip_at_zero=True,
        schema=schema,
        metric=metric,
    )


def gbrt_predict(model: GbrtModel, x: Sequence[float]) -> float:
    """max(0, baseline + learning_rate * sum of tree outputs) for one input."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.n_features,):
        raise ValueError(
            f"input width {x.shape} does not match model's {model.n_features} features"
        )
    acc = 0.0
    for tree in model.trees:
        acc += tree_predict(tree, x)
    raw = model.baseline + model.learning_rate * acc
    return max(0.0, raw) if model.clip_at_zero else raw


def predict_matrix(model: GbrtModel, rows: np.ndarray) -> np.ndarray:
    """Vectorized ``gbrt_predict`` over a matrix of inputs."""
    X = np.ascontiguousarray(rows, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError("rows do not match the model's feature width")
    feat, thr, left, right, leaf, offsets = model.packed()
    out = np.empty(X.shape[0])
    _kernels.ensemble_apply(feat, thr, left, right, leaf, offsets, X,
                            model.learning_rate, model.baseline,
                            model.clip_at_zero, out)
    return out


def staged_training_mse(rows: np.ndarray, targets: np.ndarray,
                        hyper: Hyperparameters, seed: int) -> np.ndarray:
    """Raw (unclipped) training MSE after 0..n_estimators boosting stages."""
    X = np.ascontiguousarray(rows, dtype=np.float64)
    y = np.ascontiguousarray(targets, dtype=np.float64)
    if hyper.n_estimators == 0:
        return np.array([float(np.mean((y - np.mean(y)) ** 2))])
    n_feat = X.shape[1]
    mf = n_feat if hyper.max_features is None else min(hyper.max_features, n_feat)
    dl = -1 if hyper.max_depth is None else hyper.max_depth
    seeds = stage_seeds(seed, hyper.n_estimators)
    *_, curve = _kernels.fit_boost(
        X, y, float(np.mean(y)), hyper.n_estimators, hyper.learning_rate,
        hyper.subsample, dl, mf, seeds,
    )
    return curve


def _float_list(arr: np.ndarray) -> list[float]:
    return [float(v) for v in arr]


def save_model(model: GbrtModel) -> bytes:
    """Serialize a model to its canonical JSON bundle.

    Serialization is canonical (sorted keys, fixed separators, shortest
    round-trip float repr), so identical models produce identical bytes and
    save -> load -> save is a fixed point.
    """
    if model.schema is None or model.metric is None:
        raise ModelBundleError("only models with a schema and metric can be saved")
    obj = {
        "format_version": FORMAT_VERSION,
        "metric": model.metric.value,
        "schema": {
            "slots": list(SLOT_NAMES),
            "vendors": list(model.schema.vendors),
        },
        "baseline": model.baseline,
        "learning_rate": model.learning_rate,
        "clip_at_zero": model.clip_at_zero,
        "hyperparameters": model.hyperparameters.to_json_obj(),
        "train_seed": model.train_seed,
        "trees": [
            {
                "feature": [int(v) for v in t.feature],
                "threshold": _float_list(t.threshold),
                "left": [int(v) for v in t.left],
                "right": [int(v) for v in t.right],
                "value": _float_list(t.value),
            }
            for t in model.trees
        ],
    }
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def load_model(data: bytes) -> GbrtModel:
    """Parse a JSON bundle back into a model with bit-identical predictions."""
    try:
        obj = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedBundleError(f"malformed model bundle: {exc}") from None
    if not isinstance(obj, dict):
        raise MalformedBundleError("malformed model bundle: not a JSON object")
    version = obj.get("format_version")
    if version != FORMAT_VERSION:
        raise BundleVersionError(
            f"unsupported bundle format_version {version!r}, expected {FORMAT_VERSION}"
        )
    try:
        schema_obj = obj["schema"]
        if tuple(schema_obj["slots"]) != SLOT_NAMES:
            raise BundleSchemaError(
                f"bundle schema slots {schema_obj['slots']!r} do not match {list(SLOT_NAMES)}"
            )
        schema = FeatureSchema(vendors=tuple(schema_obj["vendors"]))
        metric = MetricId(obj["metric"])
        hyper = Hyperparameters.from_json_obj(obj["hyperparameters"])
        trees = tuple(
            RegressionTree(
                feature=np.array(t["feature"], dtype=np.int64),
                threshold=np.array(t["threshold"], dtype=np.float64),
                left=np.array(t["left"], dtype=np.int64),
                right=np.array(t["right"], dtype=np.int64),
                value=np.array(t["value"], dtype=np.float64),
            )
            for t in obj["trees"]
        )
        model = GbrtModel(
            baseline=float(obj["baseline"]),
            learning_rate=float(obj["learning_rate"]),
            trees=trees,
            hyperparameters=hyper,
            train_seed=int(obj["train_seed"]),
            n_features=len(SLOT_NAMES),
            clip_at_zero=bool(obj["clip_at_zero"]),
            schema=schema,
            metric=metric,
        )
    except BundleSchemaError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedBundleError(f"malformed model bundle: {exc}") from None
    for tree in model.trees:
        if not (len(tree.feature) == len(tree.threshold) == len(tree.left)
                == len(tree.right) == len(tree.value)):
            raise MalformedBundleError("malformed model bundle: ragged tree arrays")
    if len(model.trees) != hyper.n_estimators:
        raise MalformedBundleError(
            f"bundle has {len(model.trees)} trees but n_estimators={hyper.n_estimators}"
        )
    if not math.isfinite(model.baseline):
        raise MalformedBundleError("bundle baseline is not finite")
    return model
