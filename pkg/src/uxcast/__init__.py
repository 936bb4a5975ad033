"""uxcast: predict laptop UX metrics from hardware specifications.

The pipeline: parse device and sample CSVs, clean and median-aggregate the
samples, encode specs into a fixed 10-slot feature vector, and fit one
gradient-boosted regression tree ensemble per UX metric, tuned by grouped
cross-validated grid search and scored with R^2 and MAAPE.  A synthetic
fleet generator provides ground-truth data, and ``uxcast serve`` exposes the
trained models over HTTP.
"""

from .analysis import (
    CorrelationMatrix,
    ImportanceMatrix,
    correlation_matrix,
    kendall_tau_b,
    normalize_importance,
    permutation_importance,
)
from .dataset import (
    CuratedDataset,
    DeviceSpec,
    EmptyMetricError,
    MetricGroup,
    MetricId,
    MetricSample,
    Provenance,
    build_matrix,
    clean,
    parse_device_table,
    parse_sample_table,
)
from .evaluation import (
    EvaluationReport,
    Grid,
    MetricResult,
    SplitManifest,
    evaluate_all,
    grid_search,
    maape,
    mse,
    r_squared,
    split_devices,
)
from .features import FeatureSchema, UnknownVendorError, encode, one_hot_vendor, pixel_count
from .gbrt import (
    GbrtModel,
    Hyperparameters,
    RegressionTree,
    fit_gbrt,
    fit_tree,
    gbrt_predict,
    load_model,
    predict_matrix,
    save_model,
    tree_predict,
)
from .synth import FleetConfig, generate_fleet, simulate_samples, surface_value

__version__ = "0.1.0"
