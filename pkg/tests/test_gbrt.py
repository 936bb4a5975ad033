import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uxcast.dataset import MetricId
from uxcast.features import FeatureSchema
from uxcast.gbrt import (
    BundleSchemaError,
    BundleVersionError,
    GbrtModel,
    Hyperparameters,
    MalformedBundleError,
    RegressionTree,
    fit_gbrt,
    fit_tree,
    gbrt_predict,
    load_model,
    predict_matrix,
    save_model,
    staged_training_mse,
    tree_predict,
)
from uxcast.seeding import SplitMix64, stage_seeds

SCHEMA = FeatureSchema(vendors=("VendorA", "VendorB", "VendorC", "VendorD"))


def brute_force_best_split(xs, residuals):
    """Independent exhaustive search over midpoint splits of one feature."""
    order = np.argsort(xs)
    xs, residuals = xs[order], residuals[order]
    best = None
    for k in range(len(xs) - 1):
        if xs[k] == xs[k + 1]:
            continue
        thr = (xs[k] + xs[k + 1]) / 2
        left, right = residuals[:k + 1], residuals[k + 1:]
        improvement = (len(left) * len(right)) / len(xs) * (
            left.mean() - right.mean()) ** 2
        if best is None or improvement > best[1]:
            best = (thr, improvement, left.mean(), right.mean())
    return best


class TestFitTree:
    def test_pure_residuals_single_leaf(self):
        X = np.array([[1.0], [2.0], [3.0]])
        tree = fit_tree(X, np.full(3, 7.0), None, None, SplitMix64(0))
        assert tree.n_nodes == 1
        assert tree.value[0] == 7.0

    def test_best_split_matches_brute_force(self):
        xs = np.array([1.0, 2.0, 3.0, 4.0])
        residuals = np.array([0.0, 0.0, 10.0, 10.0])
        thr, _, left_mean, right_mean = brute_force_best_split(xs, residuals)
        assert thr == 2.5
        tree = fit_tree(xs[:, None], residuals, 1, None, SplitMix64(0))
        assert tree.feature[0] == 0
        assert tree.threshold[0] == thr
        assert tree.value[tree.left[0]] == left_mean == 0.0
        assert tree.value[tree.right[0]] == right_mean == 10.0

    def test_depth_limit_bounds_height(self):
        gen = np.random.default_rng(0)
        X = gen.random((60, 4))
        residuals = gen.normal(size=60)
        for limit in (1, 2, 3):
            tree = fit_tree(X, residuals, limit, None, SplitMix64(3))
            assert tree.depth() <= limit

    def test_empty_rows_rejected(self):
        with pytest.raises(ValueError, match="non-empty"):
            fit_tree(np.empty((0, 2)), np.empty(0), None, None, SplitMix64(0))

    @given(st.integers(min_value=0, max_value=2**32))
    @settings(deadline=None, max_examples=25)
    def test_random_split_matches_brute_force_on_random_data(self, seed):
        gen = np.random.default_rng(seed)
        xs = gen.random(12)
        residuals = gen.normal(size=12)
        tree = fit_tree(xs[:, None], residuals, 1, None, SplitMix64(0))
        expected = brute_force_best_split(xs, residuals)
        if tree.feature[0] < 0:
            assert expected is None or expected[1] <= 0
        else:
            assert tree.threshold[0] == expected[0]


class TestTreePredict:
    def test_single_leaf(self):
        tree = RegressionTree(
            feature=np.array([-1]), threshold=np.zeros(1),
            left=np.zeros(1, dtype=np.int64), right=np.zeros(1, dtype=np.int64),
            value=np.array([7.0]),
        )
        assert tree_predict(tree, [123.0, -5.0]) == 7.0

    def test_boundary_goes_left(self):
        tree = RegressionTree(
            feature=np.array([0, -1, -1]), threshold=np.array([2.5, 0.0, 0.0]),
            left=np.array([1, 0, 0]), right=np.array([2, 0, 0]),
            value=np.array([0.0, 0.0, 10.0]),
        )
        assert tree_predict(tree, [2.5]) == 0.0
        assert tree_predict(tree, [3.0]) == 10.0


class TestFitGbrt:
    def test_constant_targets_reproduced(self):
        X = np.random.default_rng(0).random((6, 3))
        model = fit_gbrt(X, np.full(6, 4.0), Hyperparameters(10, 0.3, 1.0, None, None), 1)
        assert set(predict_matrix(model, X)) == {4.0}

    def test_zero_estimators_predicts_clipped_baseline(self):
        X = np.random.default_rng(0).random((4, 2))
        model = fit_gbrt(X, np.array([1.0, 2.0, 3.0, 6.0]),
                         Hyperparameters(0, 0.3, 1.0, None, None), 1)
        assert model.trees == ()
        assert gbrt_predict(model, [0.5, 0.5]) == 3.0

    def test_unlimited_depth_memorizes_distinct_rows(self):
        X = np.arange(1.0, 9.0)[:, None]
        y = np.arange(1.0, 9.0)
        model = fit_gbrt(X, y, Hyperparameters(1, 1.0, 1.0, None, None), 1)
        assert np.mean((predict_matrix(model, X) - y) ** 2) == 0.0

    def test_too_few_rows(self):
        with pytest.raises(ValueError, match="at least 2"):
            fit_gbrt(np.ones((1, 2)), np.ones(1), Hyperparameters(4, 0.3, 1.0, None, None), 1)

    def test_non_finite_targets(self):
        with pytest.raises(ValueError, match="finite"):
            fit_gbrt(np.ones((3, 2)), np.array([1.0, np.inf, 2.0]),
                     Hyperparameters(4, 0.3, 1.0, None, None), 1)

    def test_equals_per_stage_fit_tree_composition(self):
        """fit_gbrt must be exactly the composition of per-stage fit_tree calls."""
        gen = np.random.default_rng(3)
        X = gen.random((40, 5))
        y = 10 * X[:, 0] + gen.normal(0, 1, 40) + 20
        X_eval = gen.random((10, 5))
        for hyper in (Hyperparameters(12, 0.3, 0.6, 3, 2),
                      Hyperparameters(8, 0.2, 1.0, None, None)):
            model = fit_gbrt(X, y, hyper, seed=99)
            n = X.shape[0]
            seeds = stage_seeds(99, hyper.n_estimators)
            current = np.full(n, np.mean(y))
            k = int(np.ceil(hyper.subsample * n))
            trees = []
            for stage in range(hyper.n_estimators):
                stream = SplitMix64(int(seeds[stage]))
                if hyper.subsample < 1.0:
                    keys = stream.keys(n)
                    rows = np.sort(np.argsort(keys, kind="mergesort")[:k])
                else:
                    rows = np.arange(n)
                residuals = y - current
                tree = fit_tree(X[rows], residuals[rows], hyper.max_depth,
                                hyper.max_features, stream)
                trees.append(tree)
                current = current + hyper.learning_rate * np.array(
                    [tree_predict(tree, x) for x in X])
            manual = np.empty(X_eval.shape[0])
            for i, x in enumerate(X_eval):
                acc = 0.0
                for tree in trees:
                    acc += tree_predict(tree, x)
                manual[i] = max(0.0, np.mean(y) + hyper.learning_rate * acc)
            assert np.array_equal(manual, predict_matrix(model, X_eval))

    def test_truncation_is_prefix_of_longer_fit(self):
        gen = np.random.default_rng(5)
        X = gen.random((30, 4))
        y = gen.random(30) * 50
        short = fit_gbrt(X, y, Hyperparameters(6, 0.3, 0.6, 3, 2), seed=7)
        long = fit_gbrt(X, y, Hyperparameters(20, 0.3, 0.6, 3, 2), seed=7)
        for a, b in zip(short.trees, long.trees):
            assert np.array_equal(a.feature, b.feature)
            assert np.array_equal(a.threshold, b.threshold)
            assert np.array_equal(a.value, b.value)


class TestGbrtPredict:
    def _baseline_model(self, baseline):
        return GbrtModel(
            baseline=baseline, learning_rate=0.1, trees=(),
            hyperparameters=Hyperparameters(0, 0.1, 1.0, None, None),
            train_seed=0, n_features=3,
        )

    def test_negative_raw_clipped_to_zero(self):
        assert gbrt_predict(self._baseline_model(-3.2), [0, 0, 0]) == 0.0

    def test_clip_is_identity_on_nonnegative(self):
        assert gbrt_predict(self._baseline_model(412.7), [0, 0, 0]) == 412.7

    def test_baseline_only(self):
        assert gbrt_predict(self._baseline_model(5.0), [1, 2, 3]) == 5.0

    def test_matrix_predict_matches_single(self):
        gen = np.random.default_rng(9)
        X = gen.random((25, 4))
        y = gen.random(25) * 10
        model = fit_gbrt(X, y, Hyperparameters(10, 0.2, 0.7, 3, None), seed=4)
        X_eval = gen.random((40, 4))
        batch = predict_matrix(model, X_eval)
        for x, expected in zip(X_eval, batch):
            assert gbrt_predict(model, x) == expected

    def test_piecewise_constant_on_duplicate_inputs(self):
        gen = np.random.default_rng(11)
        X = gen.random((20, 3))
        y = gen.random(20)
        model = fit_gbrt(X, y, Hyperparameters(15, 0.3, 1.0, None, None), seed=2)
        x = np.array([0.5, 0.5, 0.5])
        assert gbrt_predict(model, x) == gbrt_predict(model, x.copy())


class TestMonotonicity:
    @given(st.integers(min_value=0, max_value=2**32))
    @settings(deadline=None, max_examples=20)
    def test_training_mse_non_increasing_full_sample(self, seed):
        gen = np.random.default_rng(seed)
        n = int(gen.integers(4, 64))
        X = gen.random((n, 5))
        y = gen.random(n) * 100
        lr = float(gen.choice([0.1, 0.3, 0.5, 1.0]))
        depth = [2, 3, None][int(gen.integers(0, 3))]
        curve = staged_training_mse(
            X, y, Hyperparameters(20, lr, 1.0, depth, None), seed=int(seed))
        assert all(curve[m + 1] <= curve[m] + 1e-9 for m in range(len(curve) - 1))


class TestSerialization:
    def _model(self):
        gen = np.random.default_rng(21)
        X = gen.random((30, 10))
        y = gen.random(30) * 500
        return fit_gbrt(X, y, Hyperparameters(8, 0.3, 0.7, 3, 6), seed=13,
                        schema=SCHEMA, metric=MetricId.STARTUP_TIME)

    def test_save_load_save_is_identity(self):
        blob = save_model(self._model())
        assert save_model(load_model(blob)) == blob

    def test_roundtrip_preserves_predictions_exactly(self):
        model = self._model()
        restored = load_model(save_model(model))
        X = np.random.default_rng(5).random((1000, 10)) * np.array(
            [4, 8, 16, 1, 1, 1, 1, 4, 16, 4e6])
        assert np.array_equal(predict_matrix(model, X), predict_matrix(restored, X))

    def test_truncated_stream(self):
        blob = save_model(self._model())
        with pytest.raises(MalformedBundleError):
            load_model(blob[:100])

    def test_version_mismatch(self):
        blob = save_model(self._model()).replace(b'"format_version":1', b'"format_version":99')
        with pytest.raises(BundleVersionError):
            load_model(blob)

    def test_schema_mismatch(self):
        blob = save_model(self._model()).replace(b"pixel_count", b"pixel_total")
        with pytest.raises(BundleSchemaError):
            load_model(blob)

    def test_unsaveable_without_schema(self):
        from uxcast.gbrt import ModelBundleError

        gen = np.random.default_rng(2)
        bare = fit_gbrt(gen.random((4, 2)), gen.random(4),
                        Hyperparameters(2, 0.3, 1.0, None, None), 1)
        with pytest.raises(ModelBundleError):
            save_model(bare)

    def test_identical_seeds_identical_bytes(self):
        assert save_model(self._model()) == save_model(self._model())

    def test_different_seeds_differ(self):
        gen = np.random.default_rng(21)
        X = gen.random((30, 10))
        y = gen.random(30) * 500
        a = fit_gbrt(X, y, Hyperparameters(8, 0.3, 0.7, 3, 6), seed=13,
                     schema=SCHEMA, metric=MetricId.STARTUP_TIME)
        b = fit_gbrt(X, y, Hyperparameters(8, 0.3, 0.7, 3, 6), seed=14,
                     schema=SCHEMA, metric=MetricId.STARTUP_TIME)
        assert save_model(a) != save_model(b)


class TestHyperparameters:
    def test_validation(self):
        with pytest.raises(ValueError):
            Hyperparameters(8, 0.0, 1.0, None, None)
        with pytest.raises(ValueError):
            Hyperparameters(8, 0.3, 1.5, None, None)
        with pytest.raises(ValueError):
            Hyperparameters(8, 0.3, 1.0, 0, None)
        with pytest.raises(ValueError):
            Hyperparameters(8, 0.3, 1.0, None, 11)
        with pytest.raises(ValueError):
            Hyperparameters(-1, 0.3, 1.0, None, None)
