"""End-to-end flows: preprocess logs into datasets, run transfer evaluations.

Preprocessing is fully deterministic: stable serializations, no
timestamps, manifests carrying the sha256 of every materialized input, so
a rerun over identical inputs is byte-identical.

Transfer evaluation trains on the source home only and applies the frozen
result to targets, restricted to the label set both homes share. The
features-only path classifies window embeddings by nearest class centroid
(no optimizer anywhere, so "frozen at target" is trivially true and the
report records zero target optimizer steps); learned classifiers are
delegated to an external trainer over the exported datasets.
"""

from __future__ import annotations

import hashlib
import json
import subprocess
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .activities import (
    COMMON_ACTIVITIES,
    ActivityMap,
    common_label_set,
    load_activity_map,
    serialize_activity_map,
)
from .augment import AugmentationCache, load_cache
from .config import (
    CLASSIFIER_NEAREST_CENTROID,
    FEATURES_RAW_IDS,
    FEATURES_TDOST,
    ExperimentConfig,
)
from .embedding import EmbeddingSpec, embed_hash, read_matrix
from .errors import ConfigError, DataError, ServiceError
from .events import EventLog, parse_log, serialize_log
from .layouts import HomeLayout, load_layout, serialize_layout
from .metrics import accuracy, mean_and_std, weighted_f1
from .render import RenderedTrigger, TemplateOptions
from .resources import builtin_activity_map, builtin_cache_text, builtin_layout
from .synth import build_home
from .windows import (
    DatasetRow,
    TdostWindow,
    assign_folds,
    build_windows,
    export_jsonl,
    load_dataset,
    segment,
    triplicate,
)

N_FOLDS = 3


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass(slots=True)
class LoadedHome:
    home_id: str
    log: EventLog
    layout: HomeLayout
    activity_map: ActivityMap
    input_hashes: dict[str, str]
    parse_summary: dict | None = None


def _named_text(value: str, builtin_reader) -> str:
    if value.startswith("builtin:"):
        return builtin_reader(value.split(":", 1)[1])
    path = Path(value)
    if not path.exists():
        raise ConfigError(f"input file does not exist: {value}")
    return path.read_text(encoding="utf-8")


def load_home(config: ExperimentConfig, home_id: str) -> LoadedHome:
    """Materialize one home's inputs and record their content hashes."""
    source = config.homes.get(home_id)
    if source is None:
        raise ConfigError(f"no input source configured for home {home_id!r}")
    if source.kind == "synthetic":
        home = build_home(source.template, days=source.days, seed=source.seed)
        hashes = {
            "log": sha256_text(serialize_log(home.log)),
            "layout": sha256_text(serialize_layout(home.layout)),
            "activity_map": sha256_text(serialize_activity_map(home.activity_map)),
        }
        return LoadedHome(home_id, home.log, home.layout, home.activity_map, hashes)
    log_path = Path(source.log_path)
    if not log_path.exists():
        raise ConfigError(f"log file does not exist: {source.log_path}")
    log_text = log_path.read_text(encoding="utf-8")
    layout_text = _named_text(
        source.layout, lambda name: serialize_layout(builtin_layout(name))
    )
    map_text = _named_text(
        source.activity_map,
        lambda name: serialize_activity_map(builtin_activity_map(name)),
    )
    layout = load_layout(layout_text)
    amap = load_activity_map(map_text)
    log, summary = parse_log(log_text, home_id, lenient=config.lenient)
    hashes = {
        "log": sha256_text(log_text),
        "layout": sha256_text(layout_text),
        "activity_map": sha256_text(map_text),
    }
    return LoadedHome(
        home_id, log, layout, amap, hashes,
        parse_summary=json.loads(summary.to_json()),
    )


def load_cache_source(config: ExperimentConfig) -> tuple[AugmentationCache, str]:
    if not config.cache:
        raise ConfigError("no sentence cache configured")
    if config.cache.startswith("builtin:"):
        text = builtin_cache_text(config.cache.split(":", 1)[1])
    else:
        path = Path(config.cache)
        if not path.exists():
            raise ConfigError(f"cache file does not exist: {config.cache}")
        text = path.read_text(encoding="utf-8")
    return load_cache(text), sha256_text(text)


def _filter_unknown(log: EventLog, layout: HomeLayout) -> tuple[EventLog, int]:
    kept = [e for e in log.events if e.sensor_id in layout]
    return EventLog(home_id=log.home_id, events=kept), len(log.events) - len(kept)


def _raw_id_windows(pieces, home_id: str) -> list[TdostWindow]:
    """Baseline feature windows: raw 'SENSOR VALUE' tokens, no verbalizing."""
    windows = []
    for i, piece in enumerate(pieces):
        triggers = []
        previous = None
        for j, event in enumerate(piece.events):
            lag = None
            if previous is not None:
                lag = max(0, int((event.timestamp - previous).total_seconds() // 1))
            triggers.append(
                RenderedTrigger(
                    sentences=(f"{event.sensor_id} {event.value.raw}",),
                    source_event_index=j,
                    lag_seconds=lag,
                    is_sequence_head=previous is None,
                )
            )
            previous = event.timestamp
        wid = f"{home_id}-w{i:05d}"
        windows.append(
            TdostWindow(
                window_id=wid,
                home_id=home_id,
                label=piece.label,
                triggers=tuple(triggers),
                group_id=wid,
            )
        )
    return windows


@dataclass(slots=True)
class PreprocessResult:
    home_id: str
    dataset_path: Path
    manifest_path: Path
    windows: list[TdostWindow]
    manifest: dict


def run_preprocess(
    config: ExperimentConfig,
    home_id: str,
    feature_mode: str | None = None,
    loaded: LoadedHome | None = None,
) -> PreprocessResult:
    """Parse, segment, render, split and export one home's dataset."""
    mode = feature_mode if feature_mode is not None else config.feature_mode
    home = loaded if loaded is not None else load_home(config, home_id)
    log = home.log
    dropped_unknown = 0
    if config.skip_unknown_sensors:
        log, dropped_unknown = _filter_unknown(log, home.layout)
    result = segment(
        log,
        home.activity_map,
        window_length=config.window_length,
        min_remainder=config.min_remainder,
    )
    options = TemplateOptions(lag_position=config.lag_position)
    cache_hash = None
    if mode == FEATURES_RAW_IDS:
        windows = _raw_id_windows(result.pieces, home_id)
    else:
        lookup = None
        if config.variant.uses_cache:
            cache, cache_hash = load_cache_source(config)
            lookup = cache.sentence_lookup()
        windows = build_windows(
            result.pieces,
            home.layout,
            config.variant,
            sentence_lookup=lookup,
            options=options,
            home_id=home_id,
        )
        if config.variant.uses_cache:
            windows = triplicate(windows)
    plan = assign_folds(windows, seed=config.seed, paper_shuffle=config.paper_shuffle)

    label_counts: dict[str, int] = {}
    for w in windows:
        label_counts[w.label] = label_counts.get(w.label, 0) + 1
    fold_counts = [0] * N_FOLDS
    for w in windows:
        fold_counts[w.fold] += 1

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tag = config.variant.value if mode == FEATURES_TDOST else FEATURES_RAW_IDS
    stem = f"{home_id}_{tag}_seed{config.seed}"
    dataset_path = out_dir / f"{stem}.jsonl"
    manifest_path = out_dir / f"{stem}.manifest.json"

    manifest = {
        "home": home_id,
        "variant": config.variant.value,
        "feature_mode": mode,
        "seed": config.seed,
        "window_length": config.window_length,
        "min_remainder": config.min_remainder,
        "paper_shuffle": config.paper_shuffle,
        "lag_position": config.lag_position,
        "inputs": dict(home.input_hashes, **({"cache": cache_hash} if cache_hash else {})),
        "counts": {
            "events": result.total_events,
            "discarded_events": result.discarded_events,
            "dropped_unknown_sensors": dropped_unknown,
            "windows": len(windows),
            "groups": len({w.group_id for w in windows}),
            "val_windows": sum(1 for w in windows if w.split == "val"),
            "folds": fold_counts,
        },
        "labels": [l for l in COMMON_ACTIVITIES if l in label_counts],
        "label_counts": {l: label_counts[l] for l in sorted(label_counts)},
        "small_classes": sorted(plan.small_classes),
    }
    dataset_path.write_text(export_jsonl(windows), encoding="utf-8")
    manifest_path.write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return PreprocessResult(
        home_id=home_id,
        dataset_path=dataset_path,
        manifest_path=manifest_path,
        windows=windows,
        manifest=manifest,
    )


# ---------------------------------------------------------------------------
# Features-only evaluation: nearest class centroid over window embeddings.


def window_vectors(rows: list[DatasetRow], spec: EmbeddingSpec) -> np.ndarray:
    """One unit vector per window: mean of its trigger sentence embeddings."""
    if spec.kind == "external":
        matrix = read_matrix(spec.matrix_path)
        total = sum(len(r.sentences) for r in rows)
        if matrix.shape[0] != total:
            raise DataError(
                f"matrix has {matrix.shape[0]} rows, dataset needs {total}"
            )
        if matrix.shape[1] != spec.dimension:
            raise DataError(
                f"matrix dimension {matrix.shape[1]} != spec {spec.dimension}"
            )
    else:
        matrix = None
    vectors = np.zeros((len(rows), spec.dimension), dtype=np.float64)
    cursor = 0
    for i, row in enumerate(rows):
        n = len(row.sentences)
        if matrix is None:
            stack = np.stack(
                [embed_hash(s[0], spec.dimension, spec.seed) for s in row.sentences]
            )
        else:
            stack = matrix[cursor:cursor + n]
        cursor += n
        pooled = stack.mean(axis=0)
        norm = float(np.linalg.norm(pooled))
        vectors[i] = pooled / norm if norm else pooled
    return vectors


@dataclass(slots=True)
class FoldMetric:
    acc: float
    wf1: float


@dataclass(slots=True)
class TransferRun:
    source: str
    target: str
    classifier: str
    variant: str
    labels: tuple[str, ...]
    folds: list[FoldMetric]
    n_train: int
    n_test: int
    target_optimizer_steps: int = 0

    def summary(self) -> dict:
        accs = [f.acc for f in self.folds]
        wf1s = [f.wf1 for f in self.folds]
        acc_mean, acc_std = mean_and_std(accs)
        wf1_mean, wf1_std = mean_and_std(wf1s)
        return {
            "source": self.source,
            "target": self.target,
            "classifier": self.classifier,
            "variant": self.variant,
            "labels": list(self.labels),
            "folds": [{"acc": f.acc, "wf1": f.wf1} for f in self.folds],
            "acc_mean": acc_mean,
            "acc_std": acc_std,
            "wf1_mean": wf1_mean,
            "wf1_std": wf1_std,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "target_optimizer_steps": self.target_optimizer_steps,
        }


def nearest_centroid_transfer(
    source_rows: list[DatasetRow],
    target_rows: list[DatasetRow],
    labels: tuple[str, ...],
    spec: EmbeddingSpec,
    n_folds: int = N_FOLDS,
) -> list[FoldMetric]:
    """Per-fold: centroids from source train rows, scored on the target fold."""
    source_rows = [r for r in source_rows if r.label in labels]
    target_rows = [r for r in target_rows if r.label in labels]
    if not source_rows or not target_rows:
        raise DataError("no rows left after restricting to the shared labels")
    source_vecs = window_vectors(source_rows, spec)
    target_vecs = window_vectors(target_rows, spec)
    metrics = []
    for fold in range(n_folds):
        train_idx = [
            i for i, r in enumerate(source_rows)
            if r.fold != fold and r.split == "train"
        ]
        test_idx = [i for i, r in enumerate(target_rows) if r.fold == fold]
        if not train_idx or not test_idx:
            raise DataError(f"fold {fold} has an empty train or test side")
        centroids = np.zeros((len(labels), spec.dimension), dtype=np.float64)
        for c, label in enumerate(labels):
            members = [i for i in train_idx if source_rows[i].label == label]
            if not members:
                continue
            centroid = source_vecs[members].mean(axis=0)
            norm = float(np.linalg.norm(centroid))
            centroids[c] = centroid / norm if norm else centroid
        scores = target_vecs[test_idx] @ centroids.T
        pred_idx = scores.argmax(axis=1)
        y_true = [target_rows[i].label for i in test_idx]
        y_pred = [labels[p] for p in pred_idx]
        metrics.append(
            FoldMetric(
                acc=accuracy(y_true, y_pred),
                wf1=weighted_f1(y_true, y_pred, list(labels)),
            )
        )
    return metrics


# ---------------------------------------------------------------------------
# External trainer handoff.


def run_trainer(
    command: tuple[str, ...],
    source_dataset: Path,
    target_dataset: Path,
    metrics_path: Path,
    classifier: str,
    seed: int,
) -> dict:
    """Run the external trainer and read back its metrics document."""
    filled = [
        part.format(
            source=str(source_dataset),
            target=str(target_dataset),
            metrics=str(metrics_path),
            classifier=classifier,
            seed=seed,
        )
        for part in command
    ]
    try:
        proc = subprocess.run(filled, capture_output=True, text=True)
    except OSError as exc:
        raise ServiceError(f"could not launch trainer {filled[0]!r}: {exc}") from exc
    if proc.returncode != 0:
        raise ServiceError(
            f"trainer exited with {proc.returncode}: {proc.stderr.strip()[-2000:]}"
        )
    if not metrics_path.exists():
        raise ServiceError(f"trainer wrote no metrics file at {metrics_path}")
    doc = json.loads(metrics_path.read_text(encoding="utf-8"))
    folds = doc.get("folds")
    if (
        not isinstance(folds, list)
        or not folds
        or not all(isinstance(f, dict) and {"acc", "wf1"} <= f.keys() for f in folds)
    ):
        raise ServiceError("trainer metrics must carry folds with acc and wf1")
    return doc


@dataclass(slots=True)
class ExperimentReport:
    config_echo: dict
    runs: list[TransferRun] = field(default_factory=list)
    manifests: dict[str, dict] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "config": self.config_echo,
                "runs": [run.summary() for run in self.runs],
                "manifests": self.manifests,
            },
            indent=2,
            sort_keys=True,
        ) + "\n"


def run_transfer(config: ExperimentConfig, allow_within_home: bool = True) -> ExperimentReport:
    """Evaluate source-to-target transfer for every configured target.

    A target equal to the source reduces to within-home evaluation (the
    fold split already keeps train and test apart).
    """
    config.validate(allow_within_home=allow_within_home)
    report = ExperimentReport(
        config_echo={
            "source": config.source,
            "targets": list(config.targets),
            "variant": config.variant.value,
            "classifier": config.classifier,
            "seed": config.seed,
            "embedding": {
                "kind": config.embedding.kind,
                "dimension": config.embedding.dimension,
                "seed": config.embedding.seed,
            },
        }
    )
    homes = {config.source: load_home(config, config.source)}
    for target in config.targets:
        if target not in homes:
            homes[target] = load_home(config, target)
    results = {
        home_id: run_preprocess(config, home_id, loaded=loaded)
        for home_id, loaded in homes.items()
    }
    for home_id, result in results.items():
        report.manifests[home_id] = result.manifest

    for target in config.targets:
        labels = common_label_set(
            homes[config.source].activity_map, homes[target].activity_map
        )
        source_rows = load_dataset(
            results[config.source].dataset_path.read_text(encoding="utf-8")
        )
        target_rows = load_dataset(
            results[target].dataset_path.read_text(encoding="utf-8")
        )
        if config.trainer_command and config.classifier != CLASSIFIER_NEAREST_CENTROID:
            metrics_path = Path(config.out_dir) / (
                f"trainer_{config.source}_to_{target}_{config.classifier}.json"
            )
            doc = run_trainer(
                config.trainer_command,
                results[config.source].dataset_path,
                results[target].dataset_path,
                metrics_path,
                config.classifier,
                config.seed,
            )
            folds = [FoldMetric(acc=f["acc"], wf1=f["wf1"]) for f in doc["folds"]]
            steps = int(doc.get("target_optimizer_steps", 0))
        else:
            folds = nearest_centroid_transfer(
                source_rows, target_rows, labels, config.embedding
            )
            steps = 0
        run = TransferRun(
            source=config.source,
            target=target,
            classifier=config.classifier,
            variant=config.variant.value
            if config.feature_mode == FEATURES_TDOST
            else FEATURES_RAW_IDS,
            labels=labels,
            folds=folds,
            n_train=sum(
                1 for r in source_rows
                if r.label in labels and r.split == "train"
            ),
            n_test=sum(1 for r in target_rows if r.label in labels),
            target_optimizer_steps=steps,
        )
        report.runs.append(run)
    return report
