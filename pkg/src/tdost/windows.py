"""Segment labeled logs into fixed-length windows and plan folds/splits.

Annotated spans are translated onto the common label set (events outside
any span become Other), consecutive same-label runs are chunked into
100-trigger pieces, and short remainders below a floor are discarded but
counted so nothing silently disappears.

Fold assignment is stratified over three folds at sibling-group
granularity: the three sentence variants of one llm window always share a
fold and split. Within each fold a seeded stratified fifth of the windows
is marked "val"; evaluation run i then uses fold i as test, the
val-marked rows of the other folds as validation and the rest as train.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from .activities import COMMON_ACTIVITIES, OTHER, ActivityMap
from .errors import DataError, SegmentationError
from .events import EventLog, SensorEvent
from .render import RenderedTrigger, TemplateOptions, Variant, DEFAULT_OPTIONS, render_window

WINDOW_LENGTH = 100
MIN_REMAINDER = 10
N_FOLDS = 3
VAL_FRACTION = 0.2
LLM_COPIES = 3

SPLIT_TRAIN = "train"
SPLIT_VAL = "val"

_LABEL_RANK = {label: i for i, label in enumerate(COMMON_ACTIVITIES)}


@dataclass(frozen=True, slots=True)
class Piece:
    """A chunk of at most WINDOW_LENGTH consecutive same-label events."""

    label: str
    events: tuple[SensorEvent, ...]


@dataclass(slots=True)
class SegmentResult:
    pieces: list[Piece]
    discarded_events: int
    total_events: int

    def conserved(self) -> bool:
        kept = sum(len(p.events) for p in self.pieces)
        return kept + self.discarded_events == self.total_events


def _label_events(log: EventLog, amap: ActivityMap) -> list[str]:
    """Common label per event; begin/end markers are inclusive."""
    labels: list[str] = []
    open_raw: str | None = None
    for i, event in enumerate(log.events):
        ann = event.annotation
        if ann is not None and ann.marker == "begin":
            if open_raw is not None:
                raise SegmentationError(
                    f"event {i}: activity {ann.activity!r} begins inside "
                    f"open activity {open_raw!r}"
                )
            open_raw = ann.activity
            labels.append(amap.translate(open_raw))
        elif ann is not None:  # end
            if open_raw is None or ann.activity != open_raw:
                raise SegmentationError(
                    f"event {i}: end of {ann.activity!r} does not match "
                    f"open activity {open_raw!r}"
                )
            labels.append(amap.translate(open_raw))
            open_raw = None
        else:
            labels.append(amap.translate(open_raw) if open_raw is not None else OTHER)
    if open_raw is not None:
        raise SegmentationError(f"activity {open_raw!r} never ends")
    return labels


def segment(
    log: EventLog,
    amap: ActivityMap,
    window_length: int = WINDOW_LENGTH,
    min_remainder: int = MIN_REMAINDER,
) -> SegmentResult:
    """Chunk the log into same-label pieces of at most window_length events."""
    if not 1 <= min_remainder <= window_length:
        raise ValueError("min_remainder must be in 1..window_length")
    labels = _label_events(log, amap)
    pieces: list[Piece] = []
    discarded = 0
    run_start = 0
    for i in range(1, len(labels) + 1):
        if i < len(labels) and labels[i] == labels[run_start]:
            continue
        run = log.events[run_start:i]
        label = labels[run_start]
        for j in range(0, len(run), window_length):
            chunk = run[j:j + window_length]
            if len(chunk) < min_remainder:
                discarded += len(chunk)
            else:
                pieces.append(Piece(label=label, events=tuple(chunk)))
        run_start = i
    return SegmentResult(
        pieces=pieces,
        discarded_events=discarded,
        total_events=len(log.events),
    )


@dataclass(slots=True)
class TdostWindow:
    """One classifiable unit: rendered triggers plus split bookkeeping."""

    window_id: str
    home_id: str
    label: str
    triggers: tuple[RenderedTrigger, ...]
    group_id: str
    llm_slot: int | None = None
    fold: int | None = None
    split: str | None = None


def build_windows(
    pieces: list[Piece],
    layout,
    variant: Variant,
    sentence_lookup=None,
    options: TemplateOptions = DEFAULT_OPTIONS,
    home_id: str | None = None,
) -> list[TdostWindow]:
    home = home_id if home_id is not None else layout.home_id
    windows = []
    for i, piece in enumerate(pieces):
        triggers = render_window(
            list(piece.events), layout, variant, sentence_lookup, options
        )
        wid = f"{home}-w{i:05d}"
        windows.append(
            TdostWindow(
                window_id=wid,
                home_id=home,
                label=piece.label,
                triggers=tuple(triggers),
                group_id=wid,
            )
        )
    return windows


def triplicate(windows: list[TdostWindow]) -> list[TdostWindow]:
    """Split 3-sentence llm windows into three single-sentence siblings."""
    out = []
    for window in windows:
        if any(len(t.sentences) != LLM_COPIES for t in window.triggers):
            raise ValueError(
                f"window {window.window_id} does not carry "
                f"{LLM_COPIES} sentences per trigger"
            )
        for slot in range(LLM_COPIES):
            triggers = tuple(
                RenderedTrigger(
                    sentences=(t.sentences[slot],),
                    source_event_index=t.source_event_index,
                    lag_seconds=t.lag_seconds,
                    is_sequence_head=t.is_sequence_head,
                )
                for t in window.triggers
            )
            out.append(
                TdostWindow(
                    window_id=f"{window.window_id}-s{slot}",
                    home_id=window.home_id,
                    label=window.label,
                    triggers=triggers,
                    group_id=window.window_id,
                    llm_slot=slot,
                )
            )
    return out


@dataclass(slots=True)
class FoldPlan:
    seed: int
    n_folds: int
    fold_of_group: dict[str, int]
    val_groups: set[str] = field(default_factory=set)
    small_classes: list[tuple[str, int]] = field(default_factory=list)


def _grouped(windows: list[TdostWindow]) -> dict[str, list[TdostWindow]]:
    groups: dict[str, list[TdostWindow]] = {}
    for w in windows:
        groups.setdefault(w.group_id, []).append(w)
    return groups


def _label_order(labels) -> list[str]:
    return sorted(labels, key=lambda l: (_LABEL_RANK.get(l, len(_LABEL_RANK)), l))


def assign_folds(
    windows: list[TdostWindow],
    seed: int,
    n_folds: int = N_FOLDS,
    val_fraction: float = VAL_FRACTION,
    paper_shuffle: bool = False,
) -> FoldPlan:
    """Stratified fold and validation assignment, applied in place.

    Per class, fold sizes differ by at most one group; sibling groups
    never straddle folds or splits. Classes with fewer groups than folds
    are recorded as small and spread as far as they go.
    """
    groups = _grouped(windows)
    label_of_group = {gid: members[0].label for gid, members in groups.items()}
    by_label: dict[str, list[str]] = {}
    for gid in groups:
        by_label.setdefault(label_of_group[gid], []).append(gid)

    rng = random.Random(seed * 2 + (1 if paper_shuffle else 0))
    plan = FoldPlan(seed=seed, n_folds=n_folds, fold_of_group={})
    fold_loads = [0] * n_folds
    fold_class_groups: list[dict[str, list[str]]] = [dict() for _ in range(n_folds)]

    for label in _label_order(by_label):
        gids = list(by_label[label])
        rng.shuffle(gids)
        if len(gids) < n_folds:
            plan.small_classes.append((label, len(gids)))
        base, extra = divmod(len(gids), n_folds)
        counts = [base] * n_folds
        for k in sorted(range(n_folds), key=lambda k: (fold_loads[k], k))[:extra]:
            counts[k] += 1
        cursor = 0
        for k in range(n_folds):
            for gid in gids[cursor:cursor + counts[k]]:
                plan.fold_of_group[gid] = k
                fold_loads[k] += len(groups[gid])
                fold_class_groups[k].setdefault(label, []).append(gid)
            cursor += counts[k]

    for k in range(n_folds):
        plan.val_groups |= _carve_val(fold_class_groups[k], groups, val_fraction)

    for w in windows:
        w.fold = plan.fold_of_group[w.group_id]
        w.split = SPLIT_VAL if w.group_id in plan.val_groups else SPLIT_TRAIN
    return plan


def _carve_val(
    class_groups: dict[str, list[str]],
    groups: dict[str, list[TdostWindow]],
    val_fraction: float,
) -> set[str]:
    """Largest-remainder stratified pick of validation groups in one fold."""
    total_groups = sum(len(gids) for gids in class_groups.values())
    target = round(val_fraction * total_groups)
    quotas = {
        label: val_fraction * len(gids) for label, gids in class_groups.items()
    }
    take = {label: int(q) for label, q in quotas.items()}
    shortfall = target - sum(take.values())
    remainders = sorted(
        class_groups,
        key=lambda l: (-(quotas[l] - take[l]), _LABEL_RANK.get(l, len(_LABEL_RANK)), l),
    )
    for label in remainders:
        if shortfall <= 0:
            break
        if take[label] < len(class_groups[label]):
            take[label] += 1
            shortfall -= 1
    chosen: set[str] = set()
    for label in _label_order(class_groups):
        chosen.update(class_groups[label][:take[label]])
    return chosen


def window_record(window: TdostWindow) -> dict:
    return {
        "window_id": window.window_id,
        "home": window.home_id,
        "label": window.label,
        "fold": window.fold,
        "split": window.split,
        "llm_slot": window.llm_slot,
        "sentences": [list(t.sentences) for t in window.triggers],
        "lags": [t.lag_seconds for t in window.triggers],
    }


def export_jsonl(windows: list[TdostWindow]) -> str:
    return "".join(
        json.dumps(window_record(w), ensure_ascii=False) + "\n" for w in windows
    )


@dataclass(frozen=True, slots=True)
class DatasetRow:
    """One exported window as read back from JSONL."""

    window_id: str
    home: str
    label: str
    fold: int
    split: str
    llm_slot: int | None
    sentences: tuple[tuple[str, ...], ...]
    lags: tuple[int | None, ...]


def load_dataset(text: str) -> list[DatasetRow]:
    rows = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"dataset line {line_no} is not valid JSON: {exc}") from exc
        try:
            rows.append(
                DatasetRow(
                    window_id=doc["window_id"],
                    home=doc["home"],
                    label=doc["label"],
                    fold=int(doc["fold"]),
                    split=doc["split"],
                    llm_slot=doc["llm_slot"],
                    sentences=tuple(tuple(s) for s in doc["sentences"]),
                    lags=tuple(doc["lags"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"dataset line {line_no} is malformed: {exc}") from exc
    return rows
