"""Train one boosted ensemble per metric and inspect the evaluation report.

Uses a reduced hyperparameter grid so the demo finishes in seconds; the CLI
`uxcast train` runs the full 960-point grid instead.

Run:  python demos/02_train_and_evaluate.py
"""

from uxcast.dataset import clean
from uxcast.evaluation import Grid, evaluate_all
from uxcast.synth import FleetConfig, generate_fleet, simulate_samples

config = FleetConfig(seed=1)
fleet = generate_fleet(config)
curated = clean(simulate_samples(fleet, config), fleet)

# Devices are split 80/10/10; the grid search cross-validates on the training
# devices only, grouped by device so no model is scored on rows of a device
# it has already seen.
demo_grid = Grid(
    n_estimators=(32, 96),
    learning_rate=(0.1, 0.3),
    subsample=(0.7, 1.0),
    max_depth=(2, None),
    max_features=(3, None),
)
models, report = evaluate_all(curated, demo_grid, folds=5, seed=1)

print(f"split: {len(report.split.train)} train / "
      f"{len(report.split.validation)} validation / {len(report.split.test)} test")
print(f"\n{'metric':28s} {'fit R^2':>9s} {'test MAAPE':>11s}  chosen hyperparameters")
for r in report.per_metric:
    h = r.hyperparameters
    depth = "pure" if h.max_depth is None else h.max_depth
    feats = "all" if h.max_features is None else h.max_features
    print(f"{r.metric.value:28s} {r.fit_r2:9.4f} {r.test_maape_percent:10.2f}%  "
          f"trees={h.n_estimators} lr={h.learning_rate} sub={h.subsample} "
          f"depth={depth} features={feats}")
print(f"\nmean fit R^2: {report.mean_fit_r2:.4f}")
print(f"mean test MAAPE: {report.mean_test_maape_percent:.2f}%")
