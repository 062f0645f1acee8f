"""Experiment configuration: JSON in, validated dataclasses out."""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

from .embedding import DEFAULT_DIMENSION, DEFAULT_SEED, EmbeddingSpec
from .errors import ConfigError
from .render import Variant
from .verbalize import LAG_PREFIX, LAG_SUFFIX
from .windows import MIN_REMAINDER, WINDOW_LENGTH

CLASSIFIER_NEAREST_CENTROID = "nearest_centroid"
CLASSIFIER_BASELINE_IDS = "baseline_ids"
CLASSIFIER_BILSTM = "bilstm"
CLASSIFIER_CONVBILSTM = "convbilstm"

CLASSIFIERS = (
    CLASSIFIER_NEAREST_CENTROID,
    CLASSIFIER_BASELINE_IDS,
    CLASSIFIER_BILSTM,
    CLASSIFIER_CONVBILSTM,
)

# Classifier kinds the harness can evaluate without an external trainer.
FEATURES_ONLY_CLASSIFIERS = (CLASSIFIER_NEAREST_CENTROID, CLASSIFIER_BASELINE_IDS)

FEATURES_TDOST = "tdost"
FEATURES_RAW_IDS = "raw_ids"


@dataclass(frozen=True, slots=True)
class HomeSource:
    """Where one home's inputs come from: files on disk, a packaged name,
    or a synthetic template."""

    kind: str  # "files" | "synthetic"
    log_path: str | None = None
    layout: str | None = None  # path or "builtin:<name>"
    activity_map: str | None = None  # path or "builtin:<name>"
    template: str | None = None
    days: int = 12
    seed: int = 0

    @staticmethod
    def from_dict(home_id: str, doc: dict) -> "HomeSource":
        kind = doc.get("kind", "files")
        if kind == "files":
            for key in ("log", "layout", "activity_map"):
                if not isinstance(doc.get(key), str) or not doc[key]:
                    raise ConfigError(f"home {home_id!r}: missing {key!r} path")
            return HomeSource(
                kind="files",
                log_path=doc["log"],
                layout=doc["layout"],
                activity_map=doc["activity_map"],
            )
        if kind == "synthetic":
            template = doc.get("template")
            if not isinstance(template, str) or not template:
                raise ConfigError(f"home {home_id!r}: synthetic source needs a template")
            days = doc.get("days", 12)
            seed = doc.get("seed", 0)
            if not isinstance(days, int) or days < 1:
                raise ConfigError(f"home {home_id!r}: days must be a positive integer")
            if not isinstance(seed, int):
                raise ConfigError(f"home {home_id!r}: seed must be an integer")
            return HomeSource(kind="synthetic", template=template, days=days, seed=seed)
        raise ConfigError(f"home {home_id!r}: unknown source kind {kind!r}")


@dataclass(frozen=True, slots=True)
class ExperimentConfig:
    source: str
    targets: tuple[str, ...]
    variant: Variant
    seed: int
    classifier: str = CLASSIFIER_NEAREST_CENTROID
    embedding: EmbeddingSpec = field(default_factory=EmbeddingSpec)
    homes: dict[str, HomeSource] = field(default_factory=dict)
    cache: str | None = None  # path or "builtin:<name>"; llm variants only
    out_dir: str = "out"
    window_length: int = WINDOW_LENGTH
    min_remainder: int = MIN_REMAINDER
    lenient: bool = False
    skip_unknown_sensors: bool = False
    paper_shuffle: bool = False
    lag_position: str = LAG_PREFIX
    trainer_command: tuple[str, ...] | None = None

    def validate(self, allow_within_home: bool = False) -> "ExperimentConfig":
        if not self.source:
            raise ConfigError("source home must be set")
        if not self.targets:
            raise ConfigError("at least one target home must be set")
        if not allow_within_home and self.source in self.targets:
            raise ConfigError(
                f"source {self.source!r} is also a target; within-home "
                f"evaluation must be requested explicitly"
            )
        if len(set(self.targets)) != len(self.targets):
            raise ConfigError("duplicate target homes")
        if self.classifier not in CLASSIFIERS:
            raise ConfigError(
                f"unknown classifier {self.classifier!r}, expected one of {CLASSIFIERS}"
            )
        if self.classifier not in FEATURES_ONLY_CLASSIFIERS and not self.trainer_command:
            raise ConfigError(
                f"classifier {self.classifier!r} needs a trainer_command"
            )
        for home in (self.source, *self.targets):
            if home not in self.homes:
                raise ConfigError(f"no input source configured for home {home!r}")
        if not 1 <= self.min_remainder <= self.window_length:
            raise ConfigError("min_remainder must be in 1..window_length")
        if self.lag_position not in (LAG_PREFIX, LAG_SUFFIX):
            raise ConfigError("lag_position must be prefix or suffix")
        if self.variant.uses_cache and not self.cache:
            raise ConfigError(f"variant {self.variant.value!r} needs a sentence cache")
        return self

    @property
    def feature_mode(self) -> str:
        return (
            FEATURES_RAW_IDS
            if self.classifier == CLASSIFIER_BASELINE_IDS
            else FEATURES_TDOST
        )


def _parse_embedding(doc: object) -> EmbeddingSpec:
    if doc is None:
        return EmbeddingSpec()
    if not isinstance(doc, dict):
        raise ConfigError("embedding must be an object")
    try:
        return EmbeddingSpec(
            kind=doc.get("kind", "hash"),
            dimension=doc.get("dimension", DEFAULT_DIMENSION),
            seed=doc.get("seed", DEFAULT_SEED),
            matrix_path=doc.get("matrix_path"),
        )
    except ValueError as exc:
        raise ConfigError(f"bad embedding spec: {exc}") from exc


def load_config(source: str | io.TextIOBase) -> ExperimentConfig:
    """Parse an experiment config document without cross-field validation;
    call .validate() at the point of use."""
    text = source.read() if hasattr(source, "read") else source
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be an object")
    try:
        variant = Variant(doc.get("variant", "basic"))
    except ValueError as exc:
        raise ConfigError(f"unknown variant {doc.get('variant')!r}") from exc
    seed = doc.get("seed")
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("seed must be an integer")
    homes_doc = doc.get("homes", {})
    if not isinstance(homes_doc, dict):
        raise ConfigError("homes must be an object")
    homes = {
        home_id: HomeSource.from_dict(home_id, entry)
        for home_id, entry in homes_doc.items()
    }
    targets = doc.get("targets", [])
    if isinstance(targets, str):
        targets = [targets]
    trainer_command = doc.get("trainer_command")
    if trainer_command is not None:
        if not isinstance(trainer_command, list) or not all(
            isinstance(p, str) for p in trainer_command
        ):
            raise ConfigError("trainer_command must be a list of strings")
        trainer_command = tuple(trainer_command)
    return ExperimentConfig(
        source=doc.get("source", ""),
        targets=tuple(targets),
        variant=variant,
        seed=seed,
        classifier=doc.get("classifier", CLASSIFIER_NEAREST_CENTROID),
        embedding=_parse_embedding(doc.get("embedding")),
        homes=homes,
        cache=doc.get("cache"),
        out_dir=doc.get("out_dir", "out"),
        window_length=doc.get("window_length", WINDOW_LENGTH),
        min_remainder=doc.get("min_remainder", MIN_REMAINDER),
        lenient=bool(doc.get("lenient", False)),
        skip_unknown_sensors=bool(doc.get("skip_unknown_sensors", False)),
        paper_shuffle=bool(doc.get("paper_shuffle", False)),
        lag_position=doc.get("lag_position", LAG_PREFIX),
        trainer_command=trainer_command,
    )
