"""Per-home activity maps onto the shared 12-label vocabulary."""

from __future__ import annotations

import io
import json
from dataclasses import dataclass

from .errors import ConfigError, DataError, UnmappedLabelError

# Canonical order; intersections and reports preserve it.
COMMON_ACTIVITIES = (
    "Relax",
    "Cook",
    "Leave Home",
    "Enter Home",
    "Sleep",
    "Eat",
    "Work",
    "Bed to Toilet",
    "Bathing",
    "Take Medicine",
    "Personal Hygiene",
    "Other",
)

OTHER = "Other"

_COMMON_SET = frozenset(COMMON_ACTIVITIES)
_COMMON_RANK = {label: i for i, label in enumerate(COMMON_ACTIVITIES)}


@dataclass(frozen=True, slots=True)
class ActivityMap:
    """Raw labels of one home mapped onto the common activity set."""

    home_id: str
    entries: dict[str, str]

    def translate(self, raw_label: str) -> str:
        label = raw_label.strip()
        common = self.entries.get(label)
        if common is None:
            raise UnmappedLabelError(
                f"activity {raw_label!r} not in map for home {self.home_id!r}"
            )
        return common

    def image(self) -> tuple[str, ...]:
        """Common labels this map produces, in canonical order."""
        present = set(self.entries.values())
        return tuple(label for label in COMMON_ACTIVITIES if label in present)


def load_activity_map(source: str | io.TextIOBase) -> ActivityMap:
    text = source.read() if hasattr(source, "read") else source
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"activity map is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or {"home_id", "entries"} - doc.keys():
        raise DataError("activity map must be an object with home_id and entries")
    home_id, entries = doc["home_id"], doc["entries"]
    if not isinstance(home_id, str) or not home_id:
        raise DataError(f"home_id must be a non-empty string, got {home_id!r}")
    if not isinstance(entries, dict) or not entries:
        raise DataError("entries must be a non-empty object")
    checked: dict[str, str] = {}
    for raw, common in entries.items():
        if not isinstance(raw, str) or not raw.strip():
            raise DataError(f"bad raw label {raw!r}")
        if common not in _COMMON_SET:
            raise DataError(
                f"raw label {raw!r} maps to unknown common label {common!r}"
            )
        checked[raw.strip()] = common
    return ActivityMap(home_id=home_id, entries=checked)


def serialize_activity_map(amap: ActivityMap) -> str:
    return json.dumps({"home_id": amap.home_id, "entries": amap.entries}, indent=2) + "\n"


def common_label_set(*maps: ActivityMap) -> tuple[str, ...]:
    """Common labels reachable in every given home, canonical order.

    An empty intersection means the homes share no transferable activity
    and is treated as a configuration error.
    """
    if not maps:
        raise ConfigError("common_label_set needs at least one activity map")
    shared = set(maps[0].image())
    for amap in maps[1:]:
        shared &= set(amap.image())
    if not shared:
        raise ConfigError(
            "no shared common activities between homes "
            + ", ".join(m.home_id for m in maps)
        )
    return tuple(sorted(shared, key=_COMMON_RANK.__getitem__))
