"""Command line entry point: ``dskf <command> [options]``.

Exit status is 0 on success, 1 for usage errors and 2 for data errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .alignment import ReferenceStrategy, align_ensemble
from .consensus import DskfConfig, dskf
from .exceptions import DataError, SizeMismatchError
from .experiment import (
    EVALUATION_METRICS,
    EXPERIMENT_METRICS,
    ExperimentSpec,
    emit_report,
    evaluate_partitions,
    load_dataset,
    normalize_features,
    read_ensemble,
    run_experiment,
    write_ensemble,
    write_labels,
)
from .generation import Dataset, GenerationConfig, generate_ensemble, benchmark_k_range

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _metric_list(text: str) -> list[str]:
    return [m.strip() for m in text.split(",") if m.strip()]


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        cfg = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    return cfg


def _merged(args: argparse.Namespace, keys: list[str]) -> dict:
    """Config-file values overridden by any flag the user actually passed."""
    out = _load_config(args.config)
    for key in keys:
        val = getattr(args, key, None)
        if val is not None:
            out[key] = val
    return out


def _write_or_print(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, help="master random seed (default 0)")
    p.add_argument("--config", help="JSON file with settings; flags override it")
    p.add_argument("--output", "-o", help="output file (default: standard output)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dskf", description="Selective clustering ensembles with kappa and F-score.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a k-means ensemble as CSV (one column per partition)")
    _common(g)
    g.add_argument("--data", help="CSV dataset with header row")
    g.add_argument("--label-column")
    g.add_argument("--m", type=int)
    g.add_argument("--k-min", type=int)
    g.add_argument("--k-max", type=int)
    g.add_argument("--distance", choices=["euclidean", "cosine"])
    g.add_argument("--max-iters", type=int)
    g.add_argument("--normalize", choices=["none", "minmax", "zscore"])

    a = sub.add_parser("align", help="align an ensemble file to one of its partitions")
    _common(a)
    a.add_argument("--ensemble", help="ensemble CSV")
    a.add_argument("--strategy", choices=[s.value for s in ReferenceStrategy])
    a.add_argument("--reference-index", type=int)

    e = sub.add_parser("evaluate", help="compare two label files")
    _common(e)
    e.add_argument("--reference", help="reference labels, one per line")
    e.add_argument("--computed", help="computed labels, one per line")
    e.add_argument("--metrics", type=_metric_list,
                   help=f"comma separated subset of {','.join(EVALUATION_METRICS)}")
    e.add_argument("--beta", type=float)
    e.add_argument("--format", choices=["table", "json"])

    c = sub.add_parser("ensemble", help="run one DSKF consensus on an ensemble file")
    _common(c)
    c.add_argument("--ensemble", help="ensemble CSV")
    c.add_argument("--final-k", type=int)
    c.add_argument("--selection", choices=["top", "threshold"])
    c.add_argument("--m-prime", type=int)
    c.add_argument("--sigma", type=float)
    c.add_argument("--beta", type=float)
    c.add_argument("--weighting", choices=["f_score", "uniform"])
    c.add_argument("--reference", choices=[s.value for s in ReferenceStrategy])
    c.add_argument("--diagnostics", help="write diagnostics JSON here")

    x = sub.add_parser("experiment", help="multi-trial benchmark against ground truth")
    _common(x)
    x.add_argument("--data", dest="dataset_path", help="CSV dataset with header row")
    x.add_argument("--label-column")
    x.add_argument("--trials", type=int)
    x.add_argument("--m", type=int)
    x.add_argument("--k-min", type=int)
    x.add_argument("--k-max", type=int)
    x.add_argument("--final-k", type=int)
    x.add_argument("--selection", choices=["top", "threshold"])
    x.add_argument("--m-prime", type=int)
    x.add_argument("--sigma", type=float)
    x.add_argument("--beta", type=float)
    x.add_argument("--weighting", choices=["f_score", "uniform"])
    x.add_argument("--reference", choices=[s.value for s in ReferenceStrategy])
    x.add_argument("--distance", choices=["euclidean", "cosine"])
    x.add_argument("--document", action="store_const", const=True,
                   help="document data: cosine k-means with k fixed to the class count")
    x.add_argument("--normalize", choices=["auto", "none", "minmax", "zscore"])
    x.add_argument("--metrics", type=_metric_list,
                   help=f"comma separated subset of {','.join(EXPERIMENT_METRICS)}")
    x.add_argument("--format", choices=["table", "json"])
    x.add_argument("--no-timings", dest="no_timings", action="store_const", const=True,
                   help="omit wall-clock timings so reports are byte-reproducible")
    return parser


def _require(cfg: dict, key: str, flag: str):
    if cfg.get(key) is None:
        raise UsageError(f"missing required option {flag}")
    return cfg[key]


def cmd_generate(args) -> int:
    cfg = _merged(args, ["data", "label_column", "m", "k_min", "k_max", "distance",
                         "max_iters", "normalize", "seed"])
    data = load_dataset(_require(cfg, "data", "--data"), cfg.get("label_column"))
    x = normalize_features(data.features.copy(), cfg.get("normalize", "none"))
    data = Dataset(x, data.ground_truth, data.name)
    k_min, k_max = cfg.get("k_min"), cfg.get("k_max")
    if k_min is None or k_max is None:
        if data.ground_truth is None:
            raise UsageError("--k-min/--k-max are required without ground-truth labels")
        lo, hi = benchmark_k_range(data.n, data.n_classes)
        k_min, k_max = k_min or lo, k_max or hi
    gen = GenerationConfig(m=cfg.get("m", 50), k_range=(k_min, k_max),
                           distance=cfg.get("distance", "euclidean"),
                           max_iters=cfg.get("max_iters", 100), seed=cfg.get("seed", 0))
    ens = generate_ensemble(data, gen)
    if args.output:
        write_ensemble(ens, args.output)
    else:
        _write_ensemble_stream(ens, sys.stdout)
    return EXIT_OK


def _write_ensemble_stream(ens, fh) -> None:
    w = csv.writer(fh)
    w.writerow([f"p{i}" for i in range(ens.m)])
    w.writerows(ens.label_matrix().T.tolist())


def cmd_align(args) -> int:
    cfg = _merged(args, ["ensemble", "strategy", "reference_index", "seed"])
    ens = read_ensemble(_require(cfg, "ensemble", "--ensemble"))
    aligned = align_ensemble(ens, cfg.get("strategy", "random"), cfg.get("seed", 0),
                             reference_index=cfg.get("reference_index"))
    print(f"reference partition: p{aligned.reference_index}", file=sys.stderr)
    if args.output:
        write_ensemble(aligned, args.output)
    else:
        _write_ensemble_stream(aligned, sys.stdout)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = _merged(args, ["reference", "computed", "metrics", "beta", "format"])
    metrics = cfg.get("metrics", ["nmi", "kappa"])
    if not metrics:
        raise UsageError("nothing to report: empty metric set")
    bad = set(metrics) - set(EVALUATION_METRICS)
    if bad:
        raise UsageError(f"unknown metrics {sorted(bad)}; choose from {','.join(EVALUATION_METRICS)}")
    report = evaluate_partitions(_require(cfg, "reference", "--reference"),
                                 _require(cfg, "computed", "--computed"),
                                 metrics, beta=cfg.get("beta", 1.0))
    text = emit_report(report, cfg.get("format", "table"))
    _write_or_print(text, args.output)
    return EXIT_OK


def cmd_ensemble(args) -> int:
    cfg = _merged(args, ["ensemble", "final_k", "selection", "m_prime", "sigma", "beta",
                         "weighting", "reference", "seed", "diagnostics"])
    final_k = _require(cfg, "final_k", "--final-k")
    ens = read_ensemble(_require(cfg, "ensemble", "--ensemble"))
    dcfg = DskfConfig(
        final_k=final_k, selection=cfg.get("selection", "top"),
        m_prime=cfg.get("m_prime"), sigma=cfg.get("sigma", 0.0), beta=cfg.get("beta", 1.0),
        weighting=cfg.get("weighting", "f_score"), reference=cfg.get("reference", "random"),
    )
    result, diag = dskf(ens, dcfg, seed=cfg.get("seed", 0))
    if args.output:
        write_labels(result, args.output)
    else:
        sys.stdout.write("".join(f"{v}\n" for v in result.labels))
    if cfg.get("diagnostics"):
        payload = {
            "reference_index": diag.reference_index,
            "diversity": diag.diversity.tolist(),
            "selected": diag.selected,
            "weights": {"cluster_index": [list(ci) for ci in diag.weights.cluster_index],
                        "raw": diag.weights.raw.tolist(),
                        "normalized": diag.weights.normalized.tolist()},
            "timings": diag.timings,
        }
        Path(cfg["diagnostics"]).write_text(json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


def cmd_experiment(args) -> int:
    keys = ["dataset_path", "label_column", "trials", "m", "final_k", "selection", "m_prime",
            "sigma", "beta", "weighting", "reference", "distance", "document", "normalize",
            "metrics", "seed"]
    cfg = _merged(args, keys + ["k_min", "k_max", "format", "no_timings"])
    _require(cfg, "dataset_path", "--data")
    fmt = cfg.pop("format", "table")
    no_timings = bool(cfg.pop("no_timings", False))
    k_min, k_max = cfg.pop("k_min", None), cfg.pop("k_max", None)
    if (k_min is None) != (k_max is None):
        raise UsageError("--k-min and --k-max go together")
    if k_min is not None:
        cfg["k_range"] = (k_min, k_max)
    if "metrics" in cfg and not cfg["metrics"]:
        raise UsageError("nothing to report: empty metric set")
    try:
        spec = ExperimentSpec.from_dict(cfg)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    report = run_experiment(spec)
    text = emit_report(report, fmt, include_timings=not no_timings)
    _write_or_print(text, args.output)
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "align": cmd_align,
    "evaluate": cmd_evaluate,
    "ensemble": cmd_ensemble,
    "experiment": cmd_experiment,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"dskf {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, SizeMismatchError, OSError) as exc:
        print(f"dskf {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"dskf {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
