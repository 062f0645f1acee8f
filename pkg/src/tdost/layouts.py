"""Home layout documents: sensor metadata keyed by sensor id.

A layout JSON document looks like:

    {
      "home_id": "milan",
      "residents": 1,
      "description": "single-floor apartment, one resident and a pet",
      "sensors": [
        {"id": "M013", "type": "motion",
         "location_basic": "bathroom",
         "location_granular": "bathroom near sink"}
      ]
    }

Location phrases are free-form lower-case noun phrases (embedded acronyms
like "TV" stay upper-case); the granular phrase must contain the basic one
so the coarse room is always recoverable from the landmark form.
"""

from __future__ import annotations

import enum
import io
import json
from dataclasses import dataclass

from .errors import LayoutError, UnresolvedSensorError


class SensorType(enum.Enum):
    MOTION = "motion"
    DOOR = "door"
    TEMPERATURE = "temperature"
    ITEM = "item"
    LIGHT_SWITCH = "light switch"
    ACTIVATE_DEVICE = "activate device"

    @property
    def phrase(self) -> str:
        """Lower-case name used inside rendered sentences."""
        return self.value

    @property
    def prompt_name(self) -> str:
        """Title-case name used inside augmentation trigger keys."""
        return self.value.title()


_TYPE_BY_TOKEN = {t.value: t for t in SensorType}


@dataclass(frozen=True, slots=True)
class SensorMeta:
    sensor_id: str
    sensor_type: SensorType
    location_basic: str
    location_granular: str


@dataclass(frozen=True, slots=True)
class HomeLayout:
    home_id: str
    residents: int
    description: str
    sensors: dict[str, SensorMeta]

    def lookup(self, sensor_id: str) -> SensorMeta:
        meta = self.sensors.get(sensor_id)
        if meta is None:
            raise UnresolvedSensorError(
                f"sensor {sensor_id!r} not in layout for home {self.home_id!r}"
            )
        return meta

    def __contains__(self, sensor_id: str) -> bool:
        return sensor_id in self.sensors


def _check_phrase(name: str, phrase: object, sensor_id: str) -> str:
    if not isinstance(phrase, str) or not phrase.strip():
        raise LayoutError(f"sensor {sensor_id!r}: {name} must be a non-empty string")
    if phrase != phrase.strip() or "  " in phrase:
        raise LayoutError(f"sensor {sensor_id!r}: {name} has stray whitespace: {phrase!r}")
    if phrase[0].isupper():
        raise LayoutError(f"sensor {sensor_id!r}: {name} must not start upper-case: {phrase!r}")
    return phrase


def _parse_sensor(entry: object, index: int) -> SensorMeta:
    if not isinstance(entry, dict):
        raise LayoutError(f"sensors[{index}] is not an object")
    missing = {"id", "type", "location_basic", "location_granular"} - entry.keys()
    if missing:
        raise LayoutError(f"sensors[{index}] missing keys: {sorted(missing)}")
    sensor_id = entry["id"]
    if not isinstance(sensor_id, str) or not sensor_id or sensor_id != sensor_id.strip():
        raise LayoutError(f"sensors[{index}] has a bad id: {sensor_id!r}")
    type_tok = entry["type"]
    if type_tok not in _TYPE_BY_TOKEN:
        raise LayoutError(
            f"sensor {sensor_id!r}: unknown type {type_tok!r} "
            f"(expected one of {sorted(_TYPE_BY_TOKEN)})"
        )
    basic = _check_phrase("location_basic", entry["location_basic"], sensor_id)
    granular = _check_phrase("location_granular", entry["location_granular"], sensor_id)
    if basic not in granular:
        raise LayoutError(
            f"sensor {sensor_id!r}: location_granular {granular!r} "
            f"does not contain location_basic {basic!r}"
        )
    return SensorMeta(
        sensor_id=sensor_id,
        sensor_type=_TYPE_BY_TOKEN[type_tok],
        location_basic=basic,
        location_granular=granular,
    )


def load_layout(source: str | io.TextIOBase) -> HomeLayout:
    """Parse and validate a layout JSON document."""
    text = source.read() if hasattr(source, "read") else source
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LayoutError(f"layout is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise LayoutError("layout root must be an object")
    missing = {"home_id", "residents", "description", "sensors"} - doc.keys()
    if missing:
        raise LayoutError(f"layout missing keys: {sorted(missing)}")
    home_id = doc["home_id"]
    if not isinstance(home_id, str) or not home_id:
        raise LayoutError(f"home_id must be a non-empty string, got {home_id!r}")
    residents = doc["residents"]
    if not isinstance(residents, int) or isinstance(residents, bool) or residents < 1:
        raise LayoutError(f"residents must be a positive integer, got {residents!r}")
    description = doc["description"]
    if not isinstance(description, str):
        raise LayoutError("description must be a string")
    if not isinstance(doc["sensors"], list) or not doc["sensors"]:
        raise LayoutError("sensors must be a non-empty array")
    sensors: dict[str, SensorMeta] = {}
    for i, entry in enumerate(doc["sensors"]):
        meta = _parse_sensor(entry, i)
        if meta.sensor_id in sensors:
            raise LayoutError(f"duplicate sensor id {meta.sensor_id!r}")
        sensors[meta.sensor_id] = meta
    return HomeLayout(
        home_id=home_id,
        residents=residents,
        description=description,
        sensors=sensors,
    )


def serialize_layout(layout: HomeLayout) -> str:
    doc = {
        "home_id": layout.home_id,
        "residents": layout.residents,
        "description": layout.description,
        "sensors": [
            {
                "id": meta.sensor_id,
                "type": meta.sensor_type.value,
                "location_basic": meta.location_basic,
                "location_granular": meta.location_granular,
            }
            for meta in layout.sensors.values()
        ],
    }
    return json.dumps(doc, indent=2) + "\n"
