"""Command-line entry points for the full pipeline.

Subcommands: generate (synthetic fleet), train (tune + fit + evaluate),
predict, correlate, importance, serve.  Every command is deterministic given
its flags, including --seed.

Exit codes: 2 for bad inputs or unusable paths, 3 for an empty metric or an
unloadable bundle set, 4 for an unknown vendor in a prediction spec.
"""

from __future__ import annotations

import argparse
import json
import os
import socket
import sys
from pathlib import Path

import numpy as np

from .analysis import ImportanceMatrix, correlation_matrix, permutation_importance
from .dataset import (
    EmptyMetricError,
    MetricId,
    build_matrix,
    clean,
    parse_device_table,
    parse_sample_table,
)
from .evaluation import Grid, evaluate_all
from .features import FeatureSchema, UnknownVendorError
from .gbrt import ModelBundleError, save_model
from .seeding import child_seed
from .serving import (
    SPEC_INPUT_FIELDS,
    SpecFieldError,
    bundle_filename,
    load_model_dir,
    parse_spec_fields,
    prediction_set,
)
from .synth import FleetConfig, generate_fleet, render_device_csv, render_sample_csv, simulate_samples

MODEL_DIR_ENV = "UXCAST_MODEL_DIR"

EXIT_USAGE = 2
EXIT_EMPTY_METRIC = 3
EXIT_UNKNOWN_VENDOR = 4


class CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_USAGE, f"cannot read {path}: {exc}") from None


def _load_curated(devices_path: str, samples_path: str):
    try:
        devices = parse_device_table(_read_text(devices_path))
        samples = parse_sample_table(_read_text(samples_path))
        return clean(samples, devices)
    except ValueError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from None


def cmd_generate(args) -> int:
    try:
        config = FleetConfig(
            n_devices=args.n_devices,
            iterations_per_test=args.iterations,
            noise_sigma=args.noise_sigma,
            incomplete_rate=args.incomplete_rate,
            extreme_rate=args.extreme_rate,
            seed=args.seed,
        )
    except ValueError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from None
    fleet = generate_fleet(config)
    samples = simulate_samples(fleet, config)
    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "devices.csv").write_text(render_device_csv(fleet), encoding="utf-8")
        (out_dir / "samples.csv").write_text(render_sample_csv(samples), encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_USAGE, f"cannot write to {out_dir}: {exc}") from None
    print(f"wrote {out_dir / 'devices.csv'} ({len(fleet)} devices)")
    print(f"wrote {out_dir / 'samples.csv'} ({len(samples)} samples)")
    return 0


def cmd_train(args) -> int:
    curated = _load_curated(args.devices, args.samples)
    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(EXIT_USAGE, f"cannot create {out_dir}: {exc}") from None
    try:
        models, report = evaluate_all(curated, Grid(), args.folds, args.seed)
    except EmptyMetricError as exc:
        raise CliError(EXIT_EMPTY_METRIC, str(exc)) from None
    except ValueError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from None

    schema = FeatureSchema.from_device_specs(curated.devices)
    fitval = set(report.split.train) | set(report.split.validation)
    raw_importance = {}
    for index, metric in enumerate(MetricId):
        X, y, row_devices = build_matrix(curated, metric, schema)
        mask = np.array([d in fitval for d in row_devices])
        raw_importance[metric] = permutation_importance(
            models[metric], X[mask], y[mask], repeats=5,
            seed=child_seed(args.seed, 3, index),
        )
    importance = ImportanceMatrix.from_models(raw_importance)

    try:
        for metric, model in models.items():
            (out_dir / bundle_filename(metric)).write_bytes(save_model(model))
        (out_dir / "report.json").write_text(_dump_json(report.to_json_obj()), encoding="utf-8")
        (out_dir / "cv_table.csv").write_text(report.cv_table_csv(), encoding="utf-8")
        (out_dir / "importance.json").write_text(
            _dump_json(importance.to_json_obj()), encoding="utf-8"
        )
    except OSError as exc:
        raise CliError(EXIT_USAGE, f"cannot write to {out_dir}: {exc}") from None
    print(f"wrote 9 model bundles + report.json to {out_dir}")
    print(f"mean fit R^2: {report.mean_fit_r2:.4f}  "
          f"mean test MAAPE: {report.mean_test_maape_percent:.2f}%")
    return 0


def _resolve_model_dir(args) -> str:
    model_dir = args.model_dir or os.environ.get(MODEL_DIR_ENV)
    if not model_dir:
        raise CliError(
            EXIT_USAGE,
            f"no model directory given and {MODEL_DIR_ENV} is not set",
        )
    return model_dir


def cmd_predict(args) -> int:
    fields = {}
    for item in args.spec or []:
        if "=" not in item:
            raise CliError(EXIT_USAGE, f"--spec expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        fields[key] = value
    try:
        spec = parse_spec_fields(fields)
    except SpecFieldError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from None
    try:
        modelset = load_model_dir(_resolve_model_dir(args))
    except (FileNotFoundError, ModelBundleError, ValueError) as exc:
        raise CliError(EXIT_EMPTY_METRIC, str(exc)) from None
    try:
        result = prediction_set(modelset, spec)
    except UnknownVendorError as exc:
        raise CliError(EXIT_UNKNOWN_VENDOR, str(exc)) from None
    sys.stdout.write(_dump_json(result))
    return 0


def cmd_correlate(args) -> int:
    curated = _load_curated(args.devices, args.samples)
    try:
        matrix = correlation_matrix(curated)
    except ValueError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from None
    sys.stdout.write(matrix.to_csv())
    return 0


def cmd_importance(args) -> int:
    try:
        modelset = load_model_dir(_resolve_model_dir(args))
    except (FileNotFoundError, ModelBundleError, ValueError) as exc:
        raise CliError(EXIT_EMPTY_METRIC, str(exc)) from None
    curated = _load_curated(args.devices, args.samples)
    raw = {}
    try:
        for index, metric in enumerate(MetricId):
            X, y, _ = build_matrix(curated, metric, modelset.schema)
            raw[metric] = permutation_importance(
                modelset.models[metric], X, y, repeats=args.repeats,
                seed=child_seed(args.seed, 3, index),
            )
    except (EmptyMetricError, ValueError) as exc:
        raise CliError(EXIT_USAGE, str(exc)) from None
    sys.stdout.write(ImportanceMatrix.from_models(raw).to_csv())
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    try:
        app = create_app(_resolve_model_dir(args), static_dir=args.static_dir)
    except (FileNotFoundError, ModelBundleError, ValueError) as exc:
        raise CliError(EXIT_EMPTY_METRIC, str(exc)) from None
    try:
        probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((args.host, args.port))
        probe.close()
    except OSError as exc:
        raise CliError(EXIT_USAGE, f"cannot bind {args.host}:{args.port}: {exc}") from None
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uxcast",
        description="Predict laptop UX metrics from hardware specs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic devices.csv + samples.csv")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--n-devices", type=int, default=54)
    p.add_argument("--iterations", type=int, default=5)
    p.add_argument("--noise-sigma", type=float, default=0.05)
    p.add_argument("--incomplete-rate", type=float, default=0.02)
    p.add_argument("--extreme-rate", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="tune, fit, and evaluate all nine models")
    p.add_argument("devices")
    p.add_argument("samples")
    p.add_argument("out_dir")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--folds", type=int, default=5)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict all nine metrics for one spec")
    p.add_argument("model_dir", nargs="?", default=None,
                   help=f"defaults to ${MODEL_DIR_ENV}")
    p.add_argument("--spec", action="append", metavar="KEY=VALUE",
                   help="spec field, repeatable; all nine fields are required")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("correlate", help="spec/metric rank-correlation matrix as CSV")
    p.add_argument("devices")
    p.add_argument("samples")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("importance", help="permutation feature importance as CSV")
    p.add_argument("model_dir", nargs="?", default=None,
                   help=f"defaults to ${MODEL_DIR_ENV}")
    p.add_argument("devices")
    p.add_argument("samples")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_importance)

    p = sub.add_parser("serve", help="run the HTTP prediction service")
    p.add_argument("model_dir", nargs="?", default=None,
                   help=f"defaults to ${MODEL_DIR_ENV}")
    p.add_argument("--port", type=int, default=8077)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--static-dir", default=os.environ.get("UXCAST_STATIC_DIR"),
                   help="directory of UI assets to serve under /")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"uxcast: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
