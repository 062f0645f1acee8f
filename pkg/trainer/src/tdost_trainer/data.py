"""Read exported window datasets and their manifests.

One JSONL line per window: {"window_id", "home", "label", "fold", "split",
"llm_slot", "sentences": [[s, ...], ...], "lags": [null, int, ...]}. The
sidecar manifest (same stem, ".manifest.json") carries the label list in
canonical order plus the preprocessing counts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


class DatasetError(Exception):
    """The dataset or manifest violates the export contract."""


@dataclass(frozen=True, slots=True)
class Window:
    window_id: str
    home: str
    label: str
    fold: int
    split: str
    llm_slot: int | None
    sentences: tuple[tuple[str, ...], ...]
    lags: tuple[int | None, ...]

    @property
    def texts(self) -> tuple[str, ...]:
        """One sentence per trigger: the first slot of each."""
        return tuple(slots[0] for slots in self.sentences)


def load_windows(path: str | Path) -> list[Window]:
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"dataset file does not exist: {path}")
    windows = []
    for line_no, line in enumerate(
        path.read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"{path.name}:{line_no} is not valid JSON: {exc}") from exc
        try:
            sentences = tuple(tuple(s) for s in doc["sentences"])
            if not sentences or any(not slots for slots in sentences):
                raise ValueError("window without sentences")
            windows.append(
                Window(
                    window_id=doc["window_id"],
                    home=doc["home"],
                    label=doc["label"],
                    fold=int(doc["fold"]),
                    split=doc["split"],
                    llm_slot=doc["llm_slot"],
                    sentences=sentences,
                    lags=tuple(doc["lags"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DatasetError(f"{path.name}:{line_no} is malformed: {exc}") from exc
    if not windows:
        raise DatasetError(f"dataset {path.name} holds no windows")
    return windows


def manifest_path_for(dataset_path: str | Path) -> Path:
    return Path(dataset_path).with_suffix(".manifest.json")


def load_manifest(dataset_path: str | Path) -> dict | None:
    """The manifest next to a dataset, or None when the exporter kept it."""
    path = manifest_path_for(dataset_path)
    if not path.exists():
        return None
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DatasetError(f"manifest {path.name} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise DatasetError(f"manifest {path.name} must be an object")
    return doc


def label_order(windows: list[Window], manifest: dict | None) -> tuple[str, ...]:
    """Canonical label order: the manifest's if present, else sorted."""
    present = {w.label for w in windows}
    if manifest and isinstance(manifest.get("labels"), list):
        ordered = [l for l in manifest["labels"] if l in present]
        missing = present - set(ordered)
        if missing:
            raise DatasetError(
                f"labels {sorted(missing)} appear in the dataset "
                f"but not in its manifest"
            )
        return tuple(ordered)
    return tuple(sorted(present))


def shared_labels(source: tuple[str, ...], target: tuple[str, ...]) -> tuple[str, ...]:
    """Intersection in source order; transfer is scored only on these."""
    keep = tuple(l for l in source if l in set(target))
    if not keep:
        raise DatasetError("source and target share no labels")
    return keep


@dataclass(slots=True)
class FoldSplit:
    train: list[Window]
    val: list[Window]
    test: list[Window]


def split_fold(windows: list[Window], fold: int, labels: tuple[str, ...]) -> FoldSplit:
    """Train/val from the other folds, test from this one.

    Aborts when a class has no training window, because a classifier head
    sized to `labels` cannot learn an absent class.
    """
    pool = [w for w in windows if w.label in set(labels)]
    train = [w for w in pool if w.fold != fold and w.split == "train"]
    val = [w for w in pool if w.fold != fold and w.split == "val"]
    test = [w for w in pool if w.fold == fold]
    trained = {w.label for w in train}
    for label in labels:
        if label not in trained:
            raise DatasetError(
                f"class {label!r} is absent from the train split of fold {fold}"
            )
    if not val:
        val = train
    if not test:
        raise DatasetError(f"fold {fold} has no test windows")
    return FoldSplit(train=train, val=val, test=test)
