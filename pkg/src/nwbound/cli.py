"""Command-line entry point.

Subcommands: ``datagen`` (synthetic datasets with a ground-truth
sidecar), ``predict`` (per-query probabilities with bound breakdowns),
``eval`` (metrics, confusion matrix, ranking curves), ``bench``
(runtime scaling tables), and ``calibrate`` (regime report, smoothness
estimate, bandwidth search).

Configuration comes from flags, optionally seeded by a JSON config file
(flags win). All randomness flows from one ``--seed`` through named
substreams, so identical configurations reproduce outputs byte for byte
apart from wall-clock columns. Exit codes: 0 success, 2 configuration
error, 3 data error. Configuration is validated before any file is
touched, so an invalid invocation never leaves partial outputs.
"""

import argparse
import json
import sys
import zlib
from pathlib import Path

import numpy as np

from .bounds import BoundConfig, TailParams, total_bound
from .calibration import detect_regime, estimate_lipschitz, optimize_bandwidth
from .data import (
    DatasetError,
    load_csv,
    load_features_csv,
    train_test_split,
    write_csv,
)
from .dyadic import DyadicGridClassifier
from .estimators import LocalizedNWClassifier, RegularNWClassifier
from .evaluation import confusion_matrix, cumulative_recall, evaluate, scaling_benchmark
from .kernels import KernelSpec
from .synthetic import (
    LogisticGroundTruth,
    MarginClusterConfig,
    _min_interclass_distance,
    generate_margin,
    generate_overlapping,
)

__all__ = ["main", "ConfigError", "DataError"]


class ConfigError(Exception):
    """Invalid configuration; maps to exit code 2."""


class DataError(Exception):
    """Unreadable or inconsistent data; maps to exit code 3."""


def _substream(seed, name):
    """Independent seed material for one named purpose."""
    return [int(seed), zlib.crc32(name.encode("ascii"))]


def _fmt(x):
    return repr(float(x))


# ---------------------------------------------------------------- parser


def _add_model_flags(p):
    p.add_argument("--variant", choices=("regular", "localized", "dyadic"),
                   default="regular")
    p.add_argument("--kernel", default="epanechnikov",
                   help="kernel family for the regular/localized variants")
    p.add_argument("--bandwidth", type=float, default=1.0)
    p.add_argument("--no-truncate", dest="truncate", action="store_false",
                   help="keep gaussian kernel weights beyond one bandwidth "
                        "(requires --tail-cutoff/--tail-diameter for bounds)")
    p.add_argument("--k", type=int, default=50,
                   help="neighbor count for the localized variant")
    p.add_argument("--leaf-size", type=int, default=16)
    p.add_argument("--resolution", type=int, default=4,
                   help="grid exponent m for the dyadic variant")
    p.add_argument("--classes", type=int, default=None,
                   help="class count override (default: inferred from labels)")


def _add_bound_flags(p):
    p.add_argument("--lipschitz", type=float, default=None,
                   help="smoothness constant L of the true class probabilities")
    p.add_argument("--margin", type=float, default=None,
                   help="separation margin gamma between classes")
    p.add_argument("--delta", type=float, default=None,
                   help="confidence level (default 0.05)")
    p.add_argument("--sigma", type=float, default=None,
                   help="sub-gaussian label noise scale (default 0.25)")
    p.add_argument("--tail-cutoff", type=float, default=None)
    p.add_argument("--tail-diameter", type=float, default=None)


def _add_io_flags(p, train=False, test=False, out=False):
    if train:
        p.add_argument("--train", default=None, help="training CSV (label last)")
    if test:
        p.add_argument("--test", default=None)
    if out:
        p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--truncate-features", type=int, default=None,
                   help="keep only the first N feature columns of input CSVs")
    p.add_argument("--has-header", action="store_true")
    p.add_argument("--config", default=None,
                   help="JSON file of flag defaults; explicit flags win")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nwbound",
        description="Kernel-weighted classification with per-query error bounds.",
        allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("datagen", help="generate a synthetic dataset")
    p.add_argument("--mode", choices=("overlapping", "margin"), default=None)
    p.add_argument("--n", type=int, default=1000,
                   help="sample count (overlapping mode)")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--w", default=None,
                   help="comma-separated ramp direction (normalized; default axis 0)")
    p.add_argument("--b", type=float, default=-2.0)
    p.add_argument("--steepness", type=float, default=0.6,
                   help="logistic steepness k; smoothness constant is k/4")
    p.add_argument("--box", default=None,
                   help="per-dimension feature range low:high "
                        "(default 0:4 overlapping, 0:30 margin)")
    p.add_argument("--gamma", type=float, default=6.67)
    p.add_argument("--radius", type=float, default=0.5)
    p.add_argument("--per-class", type=int, default=300)
    p.add_argument("--classes", type=int, default=5,
                   help="cluster count (margin mode)")
    p.add_argument("--test-fraction", type=float, default=None,
                   help="also split into <stem>_train.csv / <stem>_test.csv")
    _add_io_flags(p, out=True)

    p = sub.add_parser("predict", help="per-query probabilities and bounds")
    _add_model_flags(p)
    _add_bound_flags(p)
    _add_io_flags(p, train=True, test=True, out=True)

    p = sub.add_parser("eval", help="metrics on a labeled test set")
    _add_model_flags(p)
    _add_bound_flags(p)
    p.add_argument("--prob-threshold", type=float, default=0.5)
    p.add_argument("--oracle", default=None,
                   help="datagen sidecar JSON; adds a bound-coverage metric")
    _add_io_flags(p, train=True, test=True, out=True)

    p = sub.add_parser("bench", help="runtime scaling across training sizes")
    _add_model_flags(p)
    p.add_argument("--n-grid", default="1000,10000,100000",
                   help="comma-separated increasing training sizes")
    p.add_argument("--d", type=int, default=5)
    p.add_argument("--queries", type=int, default=200)
    p.add_argument("--repeats", type=int, default=3)
    _add_io_flags(p, out=True)

    p = sub.add_parser("calibrate",
                       help="regime detection, smoothness estimate, bandwidth search")
    _add_model_flags(p)
    _add_bound_flags(p)
    p.add_argument("--p-t", type=float, default=0.1,
                   help="threshold probability of the smoothness estimate")
    p.add_argument("--subsample", type=int, default=None,
                   help="subsample size for the smoothness estimate")
    p.add_argument("--sample-size", type=int, default=1000,
                   help="subsample size for regime detection")
    p.add_argument("--ratio-threshold", type=float, default=0.5)
    p.add_argument("--use-sup", action="store_true",
                   help="largest same-label distance in the denominator")
    p.add_argument("--search", action="store_true",
                   help="run the bandwidth search on a held-out split")
    p.add_argument("--bandwidth-range", default=None, help="low:high")
    p.add_argument("--budget", type=int, default=30)
    p.add_argument("--weight", type=float, default=0.95)
    p.add_argument("--val-fraction", type=float, default=0.2)
    _add_io_flags(p, train=True, out=True)

    return parser


def _apply_config_file(argv, args):
    try:
        text = Path(args.config).read_text()
        overrides = json.loads(text)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}")
    if not isinstance(overrides, dict):
        raise ConfigError("config file must hold a JSON object")
    valid = set(vars(args))
    # flags typed on the command line win over the file
    explicit = {tok[2:].split("=", 1)[0].replace("-", "_")
                for tok in argv if tok.startswith("--")}
    for key, value in overrides.items():
        dest = key.replace("-", "_")
        if dest not in valid:
            raise ConfigError(f"unknown config key {key!r}")
        if dest not in explicit:
            setattr(args, dest, value)
    return args


# ------------------------------------------------------------- helpers


def _require(args, flag):
    value = getattr(args, flag.lstrip("-").replace("-", "_"))
    if value is None:
        raise ConfigError(f"{flag} is required")
    return value


def _validate_model_config(args):
    try:
        if args.variant == "dyadic":
            if int(args.resolution) < 1:
                raise ValueError(
                    f"resolution must be positive, got {args.resolution}")
        else:
            KernelSpec(args.kernel, args.bandwidth, args.truncate)
            if args.variant == "localized" and int(args.k) < 1:
                raise ValueError(f"--k must be positive, got {args.k}")
        if args.classes is not None and int(args.classes) < 1:
            raise ValueError(f"--classes must be positive, got {args.classes}")
    except ValueError as exc:
        raise ConfigError(str(exc))


def _reject_dyadic_bounds(args):
    if args.variant != "dyadic":
        return
    for flag in ("lipschitz", "margin", "delta", "sigma",
                 "tail_cutoff", "tail_diameter"):
        if getattr(args, flag) is not None:
            raise ConfigError(
                "the dyadic grid variant cannot produce uncertainty bounds: "
                "cell-majority voting keeps no kernel mass to bound with; "
                "rerun with --variant regular or --variant localized")


def _build_bound_config(args):
    """BoundConfig from flags; raises ConfigError when the regime is missing."""
    if args.lipschitz is None and args.margin is None:
        raise ConfigError(
            "bounds need exactly one regime parameter: "
            "--lipschitz (overlapping data) or --margin (separated data)")
    if (args.tail_cutoff is None) != (args.tail_diameter is None):
        raise ConfigError(
            "--tail-cutoff and --tail-diameter must be given together")
    try:
        tail = None
        if args.tail_cutoff is not None:
            tail = TailParams(args.tail_cutoff, args.tail_diameter)
        cfg = BoundConfig(
            lipschitz=args.lipschitz,
            margin=args.margin,
            delta=0.05 if args.delta is None else args.delta,
            sigma=0.25 if args.sigma is None else args.sigma,
            tail=tail,
        )
    except ValueError as exc:
        raise ConfigError(str(exc))
    if args.variant != "dyadic":
        if not args.truncate and tail is None:
            raise ConfigError(
                "bounds for a non-truncated kernel need --tail-cutoff and "
                "--tail-diameter")
        if args.truncate and tail is not None:
            raise ConfigError(
                "--tail-cutoff/--tail-diameter apply only with --no-truncate")
    return cfg


def _build_model(args, n_classes=None):
    if args.variant == "dyadic":
        return DyadicGridClassifier(resolution=args.resolution,
                                    n_classes=n_classes)
    if args.variant == "localized":
        return LocalizedNWClassifier(
            kernel=args.kernel, bandwidth=args.bandwidth,
            truncate=args.truncate, n_neighbors=args.k,
            leaf_size=args.leaf_size, n_classes=n_classes)
    return RegularNWClassifier(
        kernel=args.kernel, bandwidth=args.bandwidth,
        truncate=args.truncate, n_classes=n_classes)


def _read_dataset(path, args, num_classes=None):
    try:
        return load_csv(path, feature_truncation=args.truncate_features,
                        has_header=args.has_header, num_classes=num_classes)
    except (OSError, DatasetError) as exc:
        raise DataError(str(exc))


def _read_queries(path, args):
    try:
        return load_features_csv(path, feature_truncation=args.truncate_features,
                                 has_header=args.has_header)
    except (OSError, DatasetError) as exc:
        raise DataError(str(exc))


def _data_phase(fn, *a, **kw):
    try:
        return fn(*a, **kw)
    except (OSError, DatasetError) as exc:
        raise DataError(str(exc))
    except ValueError as exc:
        raise DataError(str(exc))


def _parse_range(text, flag):
    try:
        lo, hi = (float(part) for part in text.split(":"))
    except ValueError:
        raise ConfigError(f"{flag} must look like low:high, got {text!r}")
    return lo, hi


def _write_text(path, text):
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise DataError(str(exc))


# ---------------------------------------------------------- subcommands


def cmd_datagen(args):
    mode = _require(args, "--mode")
    out = Path(_require(args, "--out"))
    if args.test_fraction is not None and not 0.0 < args.test_fraction < 1.0:
        raise ConfigError(
            f"--test-fraction must lie in (0, 1), got {args.test_fraction}")
    lines = [f"mode: {mode}"]
    if mode == "overlapping":
        d = int(args.d)
        if d < 1:
            raise ConfigError(f"--d must be positive, got {args.d}")
        if args.w is None:
            w = np.zeros(d)
            w[0] = 1.0
        else:
            try:
                w = np.asarray([float(p) for p in args.w.split(",")])
            except ValueError:
                raise ConfigError(f"--w must be comma-separated numbers, got {args.w!r}")
            if w.size != d:
                raise ConfigError(f"--w has {w.size} entries for --d {d}")
            norm = float(np.linalg.norm(w))
            if norm == 0.0:
                raise ConfigError("--w must be a nonzero vector")
            w = w / norm
        lo, hi = _parse_range(args.box or "0:4", "--box")
        try:
            truth = LogisticGroundTruth(w, args.b, args.steepness)
        except ValueError as exc:
            raise ConfigError(str(exc))
        box = (np.full(d, lo), np.full(d, hi))
        try:
            ds, _ = generate_overlapping(truth, args.n, box,
                                         _substream(args.seed, "datagen"))
        except ValueError as exc:
            raise ConfigError(str(exc))
        meta = {
            "mode": "overlapping",
            "w": [float(v) for v in truth.w],
            "b": truth.b,
            "k": truth.k,
            "lipschitz": truth.lipschitz,
            "box": [lo, hi],
            "n": ds.n,
            "num_classes": 2,
            "seed": int(args.seed),
        }
        lines += [f"w: {','.join(_fmt(v) for v in truth.w)}",
                  f"b: {_fmt(truth.b)}", f"k: {_fmt(truth.k)}",
                  f"lipschitz: {_fmt(truth.lipschitz)}"]
    else:
        lo, hi = _parse_range(args.box or "0:30", "--box")
        d = int(args.d)
        if d < 1:
            raise ConfigError(f"--d must be positive, got {args.d}")
        try:
            cfg = MarginClusterConfig(
                gamma=args.gamma, num_classes=args.classes, radius=args.radius,
                points_per_class=args.per_class,
                box=(np.full(d, lo), np.full(d, hi)))
            ds = generate_margin(cfg, _substream(args.seed, "datagen"))
        except ValueError as exc:
            raise ConfigError(str(exc))
        measured = (
            _min_interclass_distance(ds.features, ds.labels)
            if cfg.num_classes > 1 else None)
        meta = {
            "mode": "margin",
            "gamma": float(cfg.gamma),
            "radius": float(cfg.radius),
            "num_classes": cfg.num_classes,
            "points_per_class": cfg.points_per_class,
            "box": [lo, hi],
            "measured_margin": measured,
            "n": ds.n,
            "seed": int(args.seed),
        }
        lines += [f"gamma: {_fmt(cfg.gamma)}", f"radius: {_fmt(cfg.radius)}"]
        if measured is not None:
            lines.append(f"measured_margin: {_fmt(measured)}")

    stem = out.with_suffix("") if out.suffix else out
    sidecar = Path(f"{stem}.meta.json")
    written = []
    if args.test_fraction is not None:
        try:
            train, test = train_test_split(
                ds, args.test_fraction, _substream(args.seed, "split"))
        except ValueError as exc:
            raise ConfigError(str(exc))
        for part, name in ((train, f"{stem}_train.csv"), (test, f"{stem}_test.csv")):
            _data_phase(write_csv, part, name)
            written.append((name, part.n))
    else:
        _data_phase(write_csv, ds, str(out))
        written.append((str(out), ds.n))
    _write_text(sidecar, json.dumps(meta, indent=2) + "\n")
    written.append((str(sidecar), None))
    for name, rows in written:
        lines.append(f"wrote: {name}" + (f" ({rows} rows)" if rows else ""))
    print("\n".join(lines))
    return 0


def _predict_rows(model, estimates, cfg):
    num = model.n_classes_
    header = ",".join([f"prob_{c}" for c in range(num)]
                      + ["class", "kappa", "bias", "sampling", "total", "abstained"])
    rows = [header]
    for est in estimates:
        breakdown = total_bound(est, cfg, model.kernel_spec_)
        rows.append(",".join(
            [_fmt(p) for p in est.probs]
            + [str(est.predicted_class), _fmt(est.kappa),
               _fmt(breakdown.bias), _fmt(breakdown.sampling),
               _fmt(breakdown.total), str(int(est.abstained))]))
    return rows


def cmd_predict(args):
    _validate_model_config(args)
    _reject_dyadic_bounds(args)
    cfg = None if args.variant == "dyadic" else _build_bound_config(args)
    train_path = _require(args, "--train")
    query_path = _require(args, "--test")

    train = _read_dataset(train_path, args, num_classes=args.classes)
    queries = _read_queries(query_path, args)
    model = _build_model(args, n_classes=train.num_classes)
    _data_phase(model.fit, train.features, train.labels)
    if args.variant == "dyadic":
        predicted = _data_phase(model.predict, queries)
        rows = ["class,abstained"]
        rows += [f"{int(p)},{int(p < 0)}" for p in predicted]
    else:
        estimates = _data_phase(model.estimate_batch, queries)
        rows = _data_phase(_predict_rows, model, estimates, cfg)
    text = "\n".join(rows) + "\n"
    if args.out:
        _write_text(args.out, text)
        print(f"wrote: {args.out} ({len(rows) - 1} rows)")
    else:
        sys.stdout.write(text)
    return 0


def _crc_csv(curve):
    rows = ["fraction_flagged,errors_captured"]
    rows += [f"{_fmt(x)},{_fmt(y)}"
             for x, y in zip(curve.fraction_flagged, curve.errors_captured)]
    return "\n".join(rows) + "\n"


def _confusion_csv(matrix):
    num = matrix.shape[0]
    rows = ["true_class," + ",".join(f"pred_{c}" for c in range(num))]
    rows += [f"{i}," + ",".join(str(int(v)) for v in matrix[i])
             for i in range(num)]
    return "\n".join(rows) + "\n"


def _load_oracle(path):
    try:
        meta = json.loads(Path(path).read_text())
    except OSError as exc:
        raise DataError(f"cannot read oracle sidecar: {exc}")
    except json.JSONDecodeError as exc:
        raise DataError(f"oracle sidecar is not valid JSON: {exc}")
    if meta.get("mode") != "overlapping":
        raise DataError(
            "bound coverage needs an overlapping-mode sidecar with the "
            "logistic ground truth; margin sidecars carry no probability oracle")
    try:
        return LogisticGroundTruth(np.asarray(meta["w"], dtype=np.float64),
                                   meta["b"], meta["k"])
    except (KeyError, ValueError) as exc:
        raise DataError(f"oracle sidecar is incomplete: {exc}")


def cmd_eval(args):
    _validate_model_config(args)
    _reject_dyadic_bounds(args)
    cfg = None if args.variant == "dyadic" else _build_bound_config(args)
    train_path = _require(args, "--train")
    test_path = _require(args, "--test")
    outdir = Path(_require(args, "--out"))

    train = _read_dataset(train_path, args, num_classes=args.classes)
    test = _read_dataset(test_path, args, num_classes=args.classes)
    num_classes = max(train.num_classes, test.num_classes)
    model = _build_model(args, n_classes=num_classes)
    _data_phase(model.fit, train.features, train.labels)

    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(str(exc))

    summary = []
    if args.variant == "dyadic":
        predicted = _data_phase(model.predict, test.features)
        matrix = confusion_matrix(predicted, test.labels, num_classes)
        accuracy = float(np.trace(matrix)) / test.n
        abstentions = int((predicted < 0).sum())
        metrics = [("accuracy", _fmt(accuracy)),
                   ("abstentions", str(abstentions)),
                   ("n_queries", str(test.n))]
        summary += [f"accuracy: {_fmt(accuracy)}",
                    f"abstentions: {abstentions} of {test.n}",
                    "note: the dyadic variant reports no probabilities or bounds"]
    else:
        estimates = _data_phase(model.estimate_batch, test.features)
        breakdowns = _data_phase(
            lambda: [total_bound(e, cfg, model.kernel_spec_) for e in estimates])
        report = evaluate(estimates, breakdowns, test.labels,
                          prob_threshold=args.prob_threshold)
        metrics = [("accuracy", _fmt(report.accuracy)),
                   ("weighted_precision", _fmt(report.weighted_precision)),
                   ("weighted_recall", _fmt(report.weighted_recall)),
                   ("abstentions", str(report.abstentions)),
                   ("type1", str(report.type1)),
                   ("type2", str(report.type2)),
                   ("ece", _fmt(report.ece)),
                   ("mean_bound", _fmt(report.mean_bound)),
                   ("n_queries", str(report.n_queries))]
        if args.oracle:
            truth = _load_oracle(args.oracle)
            if num_classes != 2:
                raise DataError(
                    "the logistic oracle is binary; evaluated data has "
                    f"{num_classes} classes")
            p_true = _data_phase(truth.class_probs, test.features)
            gaps = np.asarray(
                [np.max(np.abs(p_true[i] - est.probs))
                 for i, est in enumerate(estimates)])
            totals = np.asarray([b.total for b in breakdowns])
            coverage = float((gaps <= totals).mean())
            metrics.append(("bound_coverage", _fmt(coverage)))
            summary.append(f"bound_coverage: {_fmt(coverage)}")
        matrix = report.confusion
        per_class = ["class,precision,recall,support"]
        support = np.bincount(test.labels, minlength=num_classes)
        for c in range(num_classes):
            per_class.append(f"{c},{_fmt(report.precision[c])},"
                             f"{_fmt(report.recall[c])},{int(support[c])}")
        _write_text(outdir / "per_class.csv", "\n".join(per_class) + "\n")
        for ranking in ("bound_width", "one_minus_confidence"):
            curve = cumulative_recall(estimates, breakdowns, test.labels,
                                      ranking=ranking)
            _write_text(outdir / f"crc_{ranking}.csv", _crc_csv(curve))
        summary = [f"accuracy: {_fmt(report.accuracy)}",
                   f"mean_bound: {_fmt(report.mean_bound)}",
                   f"ece: {_fmt(report.ece)}",
                   f"abstentions: {report.abstentions} of {report.n_queries}",
                   f"type1: {report.type1}  type2: {report.type2}"] + summary

    _write_text(outdir / "metrics.csv",
                "\n".join(["metric,value"] + [f"{k},{v}" for k, v in metrics]) + "\n")
    _write_text(outdir / "confusion.csv", _confusion_csv(matrix))
    _write_text(outdir / "summary.txt", "\n".join(summary) + "\n")
    print("\n".join(summary))
    print(f"wrote: {outdir}")
    return 0


def cmd_bench(args):
    _validate_model_config(args)
    try:
        n_grid = [int(part) for part in args.n_grid.split(",")]
    except ValueError:
        raise ConfigError(f"--n-grid must be comma-separated integers, got {args.n_grid!r}")
    if len(n_grid) < 2 or any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ConfigError(f"--n-grid must be increasing with >= 2 sizes, got {args.n_grid!r}")
    if args.repeats < 3:
        raise ConfigError(f"--repeats must be at least 3, got {args.repeats}")
    if args.queries < 1:
        raise ConfigError(f"--queries must be positive, got {args.queries}")
    if args.d < 1:
        raise ConfigError(f"--d must be positive, got {args.d}")

    make_model = lambda: _build_model(args)
    result = scaling_benchmark(make_model, n_grid, args.d, args.queries,
                               repeats=args.repeats,
                               seed=_substream(args.seed, "bench"))
    rows = ["n,fit_time,query_time,sigma"]
    rows += [f"{r.n},{_fmt(r.fit_time)},{_fmt(r.query_time)},{_fmt(r.sigma)}"
             for r in result.rows]
    table = "\n".join(rows) + "\n"
    if args.out:
        _write_text(args.out, table)
        print(f"wrote: {args.out}")
    else:
        sys.stdout.write(table)
    print(f"query_time_slope: {_fmt(result.query_time_slope)}")
    print(f"fit_time_slope: {_fmt(result.fit_time_slope)}")
    return 0


def cmd_calibrate(args):
    _validate_model_config(args)
    if args.sample_size < 2:
        raise ConfigError(f"--sample-size must be at least 2, got {args.sample_size}")
    if not 0.0 < args.p_t <= 1.0:
        raise ConfigError(f"--p-t must lie in (0, 1], got {args.p_t}")
    if args.search:
        if args.variant == "dyadic":
            raise ConfigError("the bandwidth search needs a kernel variant; "
                              "rerun with --variant regular or localized")
        if args.bandwidth_range is None:
            raise ConfigError("--search needs --bandwidth-range low:high")
        search_range = _parse_range(args.bandwidth_range, "--bandwidth-range")
        if not 0.0 < args.val_fraction < 1.0:
            raise ConfigError(
                f"--val-fraction must lie in (0, 1), got {args.val_fraction}")
    train_path = _require(args, "--train")

    ds = _read_dataset(train_path, args, num_classes=args.classes)
    report = _data_phase(detect_regime, ds, args.sample_size,
                         _substream(args.seed, "regime"),
                         args.ratio_threshold)
    lipschitz = _data_phase(estimate_lipschitz, ds, args.p_t,
                            args.subsample, _substream(args.seed, "lipschitz"),
                            args.use_sup)
    regime_rows = [
        "regime,max_intra_class_distance,max_global_distance,"
        "estimated_margin,sample_size,note",
        ",".join([
            report.regime,
            _fmt(report.max_intra_class_distance),
            _fmt(report.max_global_distance),
            "" if report.estimated_margin is None else _fmt(report.estimated_margin),
            str(report.sample_size),
            report.note or "",
        ]),
    ]
    out_lines = regime_rows + [f"lipschitz_estimate,{_fmt(lipschitz)}"]

    trace_rows = None
    if args.search:
        try:
            fit_part, val_part = train_test_split(
                ds, args.val_fraction, _substream(args.seed, "val-split"))
        except ValueError as exc:
            raise ConfigError(str(exc))
        if args.lipschitz is not None or args.margin is not None:
            cfg = _build_bound_config(args)
        else:
            # fall back on what this run just estimated
            try:
                if report.regime == "separable":
                    cfg = BoundConfig(margin=report.estimated_margin,
                                      delta=0.05 if args.delta is None else args.delta,
                                      sigma=0.25 if args.sigma is None else args.sigma)
                else:
                    cfg = BoundConfig(lipschitz=lipschitz,
                                      delta=0.05 if args.delta is None else args.delta,
                                      sigma=0.25 if args.sigma is None else args.sigma)
            except ValueError as exc:
                raise ConfigError(str(exc))
        prototype = _build_model(args)
        try:
            search = optimize_bandwidth(prototype, fit_part, val_part, cfg,
                                        search_range, weight=args.weight,
                                        budget=args.budget)
        except ValueError as exc:
            raise ConfigError(str(exc))
        trace_rows = ["bandwidth,accuracy,mean_bound,score"]
        trace_rows += [f"{_fmt(lam)},{_fmt(acc)},{_fmt(bound)},{_fmt(score)}"
                       for lam, acc, bound, score in search.trace]
        out_lines.append(f"best_bandwidth,{_fmt(search.bandwidth)}")
        out_lines.append(f"best_score,{_fmt(search.score)}")
        out_lines += trace_rows

    print("\n".join(out_lines))
    if args.out:
        outdir = Path(args.out)
        try:
            outdir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise DataError(str(exc))
        _write_text(outdir / "regime.csv", "\n".join(regime_rows) + "\n")
        _write_text(outdir / "lipschitz.csv",
                    f"lipschitz_estimate,{_fmt(lipschitz)}\n")
        if trace_rows is not None:
            _write_text(outdir / "bandwidth_trace.csv",
                        "\n".join(trace_rows) + "\n")
        print(f"wrote: {outdir}")
    return 0


_COMMANDS = {
    "datagen": cmd_datagen,
    "predict": cmd_predict,
    "eval": cmd_eval,
    "bench": cmd_bench,
    "calibrate": cmd_calibrate,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "config", None):
            args = _apply_config_file(argv, args)
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
