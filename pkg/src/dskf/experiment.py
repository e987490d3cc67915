"""Dataset/label file IO, multi-trial experiments and reports."""
from __future__ import annotations

import csv
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .alignment import ReferenceStrategy, align_partition
from .consensus import DskfConfig, dskf
from .exceptions import (
    DataError,
    EmptyDatasetError,
    MissingLabelColumnError,
    NonNumericFeatureError,
    SizeMismatchError,
)
from .generation import Dataset, Distance, GenerationConfig, generate_ensemble, mix_seed, benchmark_k_range
from .metrics import MetricConfig, classification_scores, nmi, smep
from .partition import Ensemble, Partition

EXPERIMENT_METRICS = ("nmi", "kappa")
EVALUATION_METRICS = ("nmi", "kappa", "accuracy", "f", "smep")


# -- files -------------------------------------------------------------------

def _dense_ids(values: Sequence[str]) -> np.ndarray:
    uniq = sorted(set(values))
    try:
        uniq = sorted(uniq, key=float)
    except ValueError:
        pass
    lookup = {v: i for i, v in enumerate(uniq)}
    return np.array([lookup[v] for v in values], dtype=np.int64)


def load_dataset(path: str | Path, label_column: str | None = None) -> Dataset:
    """Read a comma-separated file with a header row.

    Every column except ``label_column`` must be numeric. Ground-truth
    labels may be arbitrary strings; they are mapped to dense ids in sorted
    order (numeric order when they all parse as numbers).
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such dataset file: {path}")
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    if not rows:
        raise EmptyDatasetError(f"{path}: empty dataset (no header)")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if not body:
        raise EmptyDatasetError(f"{path}: empty dataset")
    label_idx = None
    if label_column is not None:
        if label_column not in header:
            raise MissingLabelColumnError(f"{path}: label column {label_column!r} not in header {header}")
        label_idx = header.index(label_column)
    feature_idx = [i for i in range(len(header)) if i != label_idx]
    if not feature_idx:
        raise DataError(f"{path}: no feature columns")

    feats = np.empty((len(body), len(feature_idx)))
    labels = []
    for r, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise DataError(f"{path}:{r}: expected {len(header)} fields, got {len(row)}")
        for c, i in enumerate(feature_idx):
            try:
                feats[r - 2, c] = float(row[i])
            except ValueError:
                raise NonNumericFeatureError(
                    f"{path}:{r}: non-numeric value {row[i]!r} in column {header[i]!r}") from None
        if label_idx is not None:
            labels.append(row[label_idx].strip())
    if not np.all(np.isfinite(feats)):
        raise NonNumericFeatureError(f"{path}: features contain NaN or infinite values")
    truth = Partition(_dense_ids(labels)) if label_idx is not None else None
    try:
        return Dataset(feats, truth, name=path.stem)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc


def read_labels(path: str | Path) -> Partition:
    """One integer label per line; blank lines are ignored."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such label file: {path}")
    values = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            values.append(int(line))
        except ValueError:
            raise DataError(f"{path}:{lineno}: not an integer label: {line!r}") from None
    if not values:
        raise DataError(f"{path}: no labels")
    if min(values) < 0:
        raise DataError(f"{path}: labels must be non-negative")
    return Partition(np.array(values))


def write_labels(p: Partition, path: str | Path) -> None:
    Path(path).write_text("".join(f"{v}\n" for v in p.labels))


def write_ensemble(ens: Ensemble, path: str | Path) -> None:
    """CSV with one column per partition (``p0, p1, ...``) and one row per sample."""
    Y = ens.label_matrix().T
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"p{i}" for i in range(ens.m)])
        w.writerows(Y.tolist())


def read_ensemble(path: str | Path) -> Ensemble:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such ensemble file: {path}")
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if len(rows) < 2:
        raise EmptyDatasetError(f"{path}: empty ensemble")
    try:
        Y = np.array([[int(v) for v in r] for r in rows[1:]], dtype=np.int64)
    except ValueError:
        raise DataError(f"{path}: ensemble labels must be integers") from None
    if Y.shape[1] != len(rows[0]):
        raise DataError(f"{path}: ragged ensemble file")
    return Ensemble.from_labels(Y.T)


def normalize_features(x: np.ndarray, mode: str) -> np.ndarray:
    if mode == "none":
        return x
    if mode == "minmax":
        lo, span = x.min(axis=0), np.ptp(x, axis=0)
        return (x - lo) / np.where(span > 0, span, 1.0)
    if mode == "zscore":
        sd = x.std(axis=0)
        return (x - x.mean(axis=0)) / np.where(sd > 0, sd, 1.0)
    raise ValueError(f"unknown normalization {mode!r}")


# -- experiments -------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentSpec:
    """Multi-trial DSKF benchmark settings.

    ``None`` for ``k_range`` / ``final_k`` means the benchmark protocol:
    ``[k*, floor(sqrt(n))]`` and ``k*``. ``normalize="auto"`` rescales
    features to [0, 1] for Euclidean runs and leaves document data alone.
    """

    dataset_path: str
    label_column: str | None = "class"
    trials: int = 50
    seed: int = 0
    m: int = 50
    k_range: tuple[int, int] | None = None
    distance: str = "euclidean"
    max_iters: int = 100
    kmeans_plus_plus: bool = False
    document: bool = False
    normalize: str = "auto"
    final_k: int | None = None
    selection: str = "top"
    m_prime: int | None = None
    sigma: float = 0.0
    beta: float = 1.0
    weighting: str = "f_score"
    reference: str = "random"
    metrics: tuple[str, ...] = EXPERIMENT_METRICS

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        object.__setattr__(self, "metrics", tuple(self.metrics))
        bad = set(self.metrics) - set(EXPERIMENT_METRICS)
        if bad:
            raise ValueError(f"unsupported experiment metrics: {sorted(bad)}")
        if self.k_range is not None:
            object.__setattr__(self, "k_range", tuple(int(v) for v in self.k_range))
        Distance(self.distance)
        ReferenceStrategy(self.reference)
        if self.normalize not in ("auto", "none", "minmax", "zscore"):
            raise ValueError(f"unknown normalization {self.normalize!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        known = cls.__dataclass_fields__
        unknown = set(d) - set(known)
        if unknown:
            raise ValueError(f"unknown experiment settings: {sorted(unknown)}")
        return cls(**d)

    def effective_distance(self) -> str:
        return Distance.COSINE.value if self.document else self.distance

    def effective_normalize(self) -> str:
        if self.normalize != "auto":
            return self.normalize
        return "none" if self.effective_distance() == "cosine" else "minmax"

    def generation_config(self, data: Dataset, seed: int) -> GenerationConfig:
        k_star = data.n_classes
        if self.document:
            k_range = (k_star, k_star)
        elif self.k_range is not None:
            k_range = self.k_range
        else:
            k_range = benchmark_k_range(data.n, k_star)
        return GenerationConfig(
            m=self.m, k_range=k_range, distance=self.effective_distance(),
            max_iters=self.max_iters, seed=seed, kmeans_plus_plus=self.kmeans_plus_plus,
        )

    def dskf_config(self, data: Dataset) -> DskfConfig:
        return DskfConfig(
            final_k=self.final_k or data.n_classes, selection=self.selection,
            m_prime=self.m_prime, sigma=self.sigma, beta=self.beta,
            weighting=self.weighting, reference=self.reference,
        )


@dataclass
class Report:
    """Experiment or evaluation results.

    ``per_trial`` rows and ``aggregate`` ({"means": ..., "stds": ...}) are
    plain JSON-compatible dicts; see README for the field names.
    """

    dataset: str
    config: dict
    metrics: list[str]
    per_trial: list[dict] = field(default_factory=list)
    aggregate: dict = field(default_factory=dict)
    kind: str = "experiment"

    def to_dict(self, include_timings: bool = True) -> dict:
        d = asdict(self)
        if not include_timings:
            for row in d["per_trial"]:
                row.pop("timings", None)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        return cls(**d)


def _stats(values: Iterable[float]) -> dict:
    arr = np.asarray(list(values), dtype=float)
    return {"mean": float(arr.mean()), "std": float(arr.std())}


def score_against_truth(truth: Partition, p: Partition, metric: str) -> float:
    if metric == "nmi":
        return nmi(truth, p)
    if metric == "kappa":
        aligned, _ = align_partition(p, truth)
        return classification_scores(truth, aligned).kappa
    raise ValueError(f"unknown metric {metric!r}")


def run_trial(spec: ExperimentSpec, data: Dataset, trial: int) -> dict:
    truth = data.ground_truth
    trial_seed = mix_seed(spec.seed, trial)
    t0 = time.perf_counter()
    ens = generate_ensemble(data, spec.generation_config(data, mix_seed(trial_seed, 0)))
    t1 = time.perf_counter()
    consensus, diag = dskf(ens, spec.dskf_config(data), seed=mix_seed(trial_seed, 1))
    t2 = time.perf_counter()
    row: dict = {"trial": trial, "seed": trial_seed, "base_stats": {}}
    for metric in spec.metrics:
        row["base_stats"][metric] = _stats(score_against_truth(truth, p, metric) for p in ens)
        row[f"dskf_{metric}"] = score_against_truth(truth, consensus, metric)
    t3 = time.perf_counter()
    row["reference_index"] = diag.reference_index
    row["selected"] = diag.selected
    row["timings"] = {"generation": t1 - t0, **diag.timings, "scoring": t3 - t2, "total": t3 - t0}
    return row


def aggregate_rows(rows: list[dict], metrics: Sequence[str]) -> dict:
    cols: dict[str, list[float]] = {}
    for metric in metrics:
        cols[f"avg_base_{metric}"] = [r["base_stats"][metric]["mean"] for r in rows]
        cols[f"std_base_{metric}"] = [r["base_stats"][metric]["std"] for r in rows]
        cols[f"dskf_{metric}"] = [r[f"dskf_{metric}"] for r in rows]
    stats = {k: _stats(v) for k, v in cols.items()}
    return {"means": {k: s["mean"] for k, s in stats.items()},
            "stds": {k: s["std"] for k, s in stats.items()}}


def prepare_dataset(spec: ExperimentSpec) -> Dataset:
    data = load_dataset(spec.dataset_path, spec.label_column)
    if data.ground_truth is None:
        raise DataError("experiments need ground-truth labels (set label_column)")
    x = normalize_features(np.array(data.features), spec.effective_normalize())
    return Dataset(x, data.ground_truth, data.name)


def run_experiment(spec: ExperimentSpec) -> Report:
    data = prepare_dataset(spec)
    rows = [run_trial(spec, data, t) for t in range(spec.trials)]
    config = asdict(spec)
    config["resolved"] = {
        "k_range": list(spec.generation_config(data, 0).k_range),
        "final_k": spec.dskf_config(data).final_k,
        "normalize": spec.effective_normalize(),
        "distance": spec.effective_distance(),
    }
    return Report(data.name, config, list(spec.metrics), rows, aggregate_rows(rows, spec.metrics))


def evaluate_partitions(
    reference: str | Path | Partition,
    computed: str | Path | Partition,
    metrics: Sequence[str] = ("nmi", "kappa"),
    beta: float = 1.0,
) -> Report:
    """Compare a computed labelling with a reference one.

    Kappa, accuracy and F are computed after aligning the computed labels to
    the reference; NMI and SMEP use the raw labels.
    """
    ref = reference if isinstance(reference, Partition) else read_labels(reference)
    comp = computed if isinstance(computed, Partition) else read_labels(computed)
    if ref.n != comp.n:
        raise SizeMismatchError(f"label files differ in length ({ref.n} vs {comp.n})")
    bad = set(metrics) - set(EVALUATION_METRICS)
    if bad:
        raise ValueError(f"unsupported metrics: {sorted(bad)}")
    values: dict[str, float] = {}
    scores = None
    if {"kappa", "accuracy", "f"} & set(metrics):
        aligned, _ = align_partition(comp, ref)
        scores = classification_scores(ref, aligned, MetricConfig(beta=beta))
    for metric in metrics:
        if metric == "nmi":
            values[metric] = nmi(ref, comp)
        elif metric == "smep":
            values[metric] = smep(comp, ref)
        elif metric == "kappa":
            values[metric] = scores.kappa
        elif metric == "accuracy":
            values[metric] = scores.accuracy
        elif metric == "f":
            values[metric] = scores.macro_f
    name = str(computed) if not isinstance(computed, Partition) else "computed"
    config = {"reference": str(reference) if not isinstance(reference, Partition) else "reference",
              "beta": beta}
    return Report(name, config, list(metrics), [{"trial": 0, **values}],
                  {"means": dict(values), "stds": {k: 0.0 for k in values}}, kind="evaluation")


# -- output ------------------------------------------------------------------

_LABELS = {"nmi": "NMI", "kappa": "kappa", "accuracy": "accuracy", "f": "F", "smep": "SMEP"}


def format_table(r: Report) -> str:
    if not r.metrics:
        raise ValueError("nothing to report")
    means = r.aggregate["means"]
    if r.kind == "evaluation":
        rows = [("metric", "value")] + [(_LABELS[m], f"{means[m]:.2f}") for m in r.metrics]
    else:
        stds = r.aggregate["stds"]
        rows = [("dataset", "metric", "Avg(base)", "Std(base)", "DSKF", "Std(DSKF)")]
        for m in r.metrics:
            rows.append((r.dataset, _LABELS[m], f"{means[f'avg_base_{m}']:.2f}",
                         f"{means[f'std_base_{m}']:.2f}", f"{means[f'dskf_{m}']:.2f}",
                         f"{stds[f'dskf_{m}']:.2f}"))
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def format_json(r: Report, include_timings: bool = True) -> str:
    if not r.metrics:
        raise ValueError("nothing to report")
    return json.dumps(r.to_dict(include_timings), indent=2, sort_keys=True) + "\n"


def emit_report(r: Report, fmt: str = "table", path: str | Path | None = None,
                include_timings: bool = True) -> str:
    """Render ``r`` as an aligned table (2 decimals) or JSON (full precision).

    Writes to ``path`` when given; returns the rendered text either way.
    """
    if fmt == "table":
        text = format_table(r)
    elif fmt == "json":
        text = format_json(r, include_timings)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise DataError(f"cannot write report to {path}: {exc}") from exc
    return text


def read_report(path: str | Path) -> Report:
    return Report.from_dict(json.loads(Path(path).read_text()))

