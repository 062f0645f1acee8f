"""Synthetic paired homes for end-to-end checks without real deployments.

A home template is a layout document extended with per-sensor room tags
and activity scripts. Generation walks each day's scripts in start order,
emitting motion toggles (plus door and temperature readings where the room
has them) with noisy dwell times, annotating each episode's first and last
event. Two fixed templates ship in the package: same activities, disjoint
sensor ids, differently worded locations that share room nouns, so
transfer has signal to find while raw ids have none.

The module also hosts the deterministic paraphrase generator standing in
for a live language model in tests and offline corpora.
"""

from __future__ import annotations

import datetime as dt
import json
import random
import re
from dataclasses import dataclass

from .activities import ActivityMap
from .augment import PROMPT_PREAMBLE, TriggerKey
from .embedding import token_hash
from .errors import DataError
from .events import Annotation, EventLog, SensorEvent, SensorValue
from .layouts import HomeLayout, SensorType, load_layout
from .resources import builtin_template_text
from .verbalize import number_to_words

DEFAULT_DAYS = 12
DEFAULT_START = dt.date(2024, 3, 4)  # a Monday, so weekday coverage is predictable

_MIN_DWELL = 0.5
_EPISODE_GAP = 60.0


@dataclass(frozen=True, slots=True)
class ActivityScript:
    raw_label: str
    common: str
    rooms: tuple[str, ...]
    start_hour: tuple[float, float]
    triggers: tuple[int, int]
    dwell_mean: float
    dwell_sd: float
    episodes_per_day: int = 1


@dataclass(frozen=True, slots=True)
class HomeTemplate:
    layout: HomeLayout
    scripts: tuple[ActivityScript, ...]
    room_of: dict[str, str]  # sensor id -> room tag
    noise_per_gap: tuple[int, int]

    def sensors_in(self, room: str, sensor_type: SensorType | None = None) -> list[str]:
        return [
            sid
            for sid, tag in self.room_of.items()
            if tag == room
            and (sensor_type is None or self.layout.sensors[sid].sensor_type is sensor_type)
        ]


@dataclass(frozen=True, slots=True)
class GeneratedHome:
    template: HomeTemplate
    log: EventLog
    layout: HomeLayout
    activity_map: ActivityMap


def load_template(text: str) -> HomeTemplate:
    """Parse a template document; its layout part follows the layout schema."""
    layout = load_layout(text)
    doc = json.loads(text)
    room_of: dict[str, str] = {}
    for entry in doc["sensors"]:
        room = entry.get("room")
        if not isinstance(room, str) or not room:
            raise DataError(f"template sensor {entry['id']!r} has no room tag")
        room_of[entry["id"]] = room
    raw_scripts = doc.get("scripts")
    if not isinstance(raw_scripts, list) or not raw_scripts:
        raise DataError("template has no activity scripts")
    scripts = []
    for s in raw_scripts:
        script = ActivityScript(
            raw_label=s["raw_label"],
            common=s["common"],
            rooms=tuple(s["rooms"]),
            start_hour=(float(s["start_hour"][0]), float(s["start_hour"][1])),
            triggers=(int(s["triggers"][0]), int(s["triggers"][1])),
            dwell_mean=float(s["dwell_mean"]),
            dwell_sd=float(s["dwell_sd"]),
            episodes_per_day=int(s.get("episodes_per_day", 1)),
        )
        if script.triggers[0] < 2:
            raise DataError(
                f"script {script.raw_label!r} needs at least 2 triggers per episode"
            )
        for room in script.rooms:
            if not any(tag == room for tag in room_of.values()):
                raise DataError(f"script {script.raw_label!r} uses unknown room {room!r}")
        scripts.append(script)
    if len({s.raw_label for s in scripts}) != len(scripts):
        raise DataError("duplicate raw labels across template scripts")
    noise = doc.get("noise_per_gap", [0, 2])
    return HomeTemplate(
        layout=layout,
        scripts=tuple(scripts),
        room_of=room_of,
        noise_per_gap=(int(noise[0]), int(noise[1])),
    )


def template_activity_map(template: HomeTemplate) -> ActivityMap:
    return ActivityMap(
        home_id=template.layout.home_id,
        entries={s.raw_label: s.common for s in template.scripts},
    )


def _dwell(rng: random.Random, mean: float, sd: float) -> float:
    return max(_MIN_DWELL, rng.gauss(mean, sd))


def _episode_events(
    template: HomeTemplate,
    script: ActivityScript,
    start: dt.datetime,
    rng: random.Random,
) -> list[SensorEvent]:
    n = rng.randint(*script.triggers)
    per_room = [n // len(script.rooms)] * len(script.rooms)
    per_room[0] += n - sum(per_room)
    events: list[SensorEvent] = []
    t = start
    for room, count in zip(script.rooms, per_room):
        motion = template.sensors_in(room, SensorType.MOTION)
        doors = template.sensors_in(room, SensorType.DOOR)
        temps = template.sensors_in(room, SensorType.TEMPERATURE)
        if not motion:
            raise DataError(f"room {room!r} has no motion sensors")
        for k in range(count):
            t = t + dt.timedelta(seconds=_dwell(rng, script.dwell_mean, script.dwell_sd))
            if doors and k == 0:
                sid, value = doors[0], "OPEN"
            elif doors and k == count - 1:
                sid, value = doors[0], "CLOSE"
            elif temps and k % 20 == 10:
                sid, value = rng.choice(temps), str(rng.randint(18, 28))
            else:
                sid = motion[(k // 2) % len(motion)]
                value = "ON" if k % 2 == 0 else "OFF"
            events.append(
                SensorEvent(
                    timestamp=t,
                    sensor_id=sid,
                    value=SensorValue.from_token(value),
                    annotation=None,
                )
            )
    first, last = events[0], events[-1]
    events[0] = SensorEvent(
        first.timestamp, first.sensor_id, first.value,
        Annotation(script.raw_label, "begin"),
    )
    events[-1] = SensorEvent(
        last.timestamp, last.sensor_id, last.value,
        Annotation(script.raw_label, "end"),
    )
    return events


def _noise_events(
    template: HomeTemplate,
    window: tuple[dt.datetime, dt.datetime],
    rng: random.Random,
) -> list[SensorEvent]:
    lo, hi = window
    span = (hi - lo).total_seconds()
    if span < 10.0:
        return []
    count = rng.randint(*template.noise_per_gap)
    motion = [
        sid
        for sid, meta in template.layout.sensors.items()
        if meta.sensor_type is SensorType.MOTION
    ]
    times = sorted(rng.uniform(1.0, span - 1.0) for _ in range(count))
    return [
        SensorEvent(
            timestamp=lo + dt.timedelta(seconds=offset),
            sensor_id=rng.choice(motion),
            value=SensorValue.from_token(rng.choice(("ON", "OFF"))),
            annotation=None,
        )
        for offset in times
    ]


def generate(
    template: HomeTemplate,
    days: int = DEFAULT_DAYS,
    seed: int = 0,
    start_date: dt.date = DEFAULT_START,
) -> EventLog:
    """Deterministic event log: every script runs every day, noise between."""
    rng = random.Random(seed)
    events: list[SensorEvent] = []
    cursor: dt.datetime | None = None
    for day in range(days):
        date = start_date + dt.timedelta(days=day)
        plan = []
        for script in template.scripts:
            for _ in range(script.episodes_per_day):
                hour = rng.uniform(*script.start_hour)
                start = dt.datetime.combine(date, dt.time()) + dt.timedelta(hours=hour)
                plan.append((start, script))
        plan.sort(key=lambda item: item[0])
        for start, script in plan:
            if cursor is not None:
                earliest = cursor + dt.timedelta(seconds=_EPISODE_GAP)
                if start < earliest:
                    start = earliest
                else:
                    events.extend(_noise_events(template, (cursor, start), rng))
            episode = _episode_events(template, script, start, rng)
            events.extend(episode)
            cursor = episode[-1].timestamp
    return EventLog(home_id=template.layout.home_id, events=events)


def build_home(name: str, days: int = DEFAULT_DAYS, seed: int = 0) -> GeneratedHome:
    template = load_template(builtin_template_text(name))
    log = generate(template, days=days, seed=seed)
    return GeneratedHome(
        template=template,
        log=log,
        layout=template.layout,
        activity_map=template_activity_map(template),
    )


def paired_homes(seed: int, days: int = DEFAULT_DAYS) -> tuple[GeneratedHome, GeneratedHome]:
    """The shipped source/target pair, with per-home derived seeds."""
    return (
        build_home("home_a", days=days, seed=seed * 1000 + 1),
        build_home("home_b", days=days, seed=seed * 1000 + 2),
    )


# ---------------------------------------------------------------------------
# Deterministic paraphrases standing in for a live model.

_OPENERS = (
    "On {weekday} during the {period}, ",
    "It was {weekday} in the {period} when ",
    "The {period} of {weekday} found that ",
    "Sometime in the {period} this {weekday}, ",
    "As the {period} unfolded on {weekday}, ",
    "During a quiet {period} stretch on {weekday}, ",
)

_ACTIVE_BODIES = (
    "the {type} sensor {loc} picked up activity",
    "the {type} sensor {loc} sprang to life",
    "movement registered on the {type} sensor {loc}",
    "the {type} sensor {loc} reported a reading of {value}",
    "a signal of {value} arrived from the {type} sensor {loc}",
    "the {type} sensor {loc} noted a change to {value}",
)

_IDLE_BODIES = (
    "the {type} sensor {loc} stayed quiet",
    "the {type} sensor {loc} settled back to rest",
    "no further movement reached the {type} sensor {loc}",
    "the {type} sensor {loc} reported a reading of {value}",
    "a signal of {value} arrived from the {type} sensor {loc}",
    "the {type} sensor {loc} wound down to {value}",
)

_CLOSERS = (
    ", hinting at the household's rhythm.",
    ", a small note in the day's routine.",
    ", as the home carried on around it.",
    ", marking another beat of domestic life.",
    ".",
    ", quietly logged for the record.",
)


def _value_phrase(value: str) -> str:
    if re.fullmatch(r"\d+", value):
        return number_to_words(value)
    return value


def synthetic_sentences(key: TriggerKey, seed: int = 0) -> tuple[str, str, str]:
    """Three varied, id-free sentences for a trigger key."""
    rng = random.Random(token_hash(key.canonical(), seed))
    idle = key.value.upper() in ("OFF", "CLOSE")
    bodies = _IDLE_BODIES if idle else _ACTIVE_BODIES
    loc = key.location
    if loc.split(" ", 1)[0] not in ("in", "on", "near", "between"):
        loc = f"in the {loc}"
    slots = {
        "weekday": key.weekday,
        "period": key.period.lower(),
        "type": key.sensor_type.lower(),
        "loc": loc,
        "value": _value_phrase(key.value),
    }
    sentences = []
    for opener, body, closer in zip(
        rng.sample(_OPENERS, 3), rng.sample(bodies, 3), rng.sample(_CLOSERS, 3)
    ):
        text = (opener + body + closer).format(**slots)
        sentences.append(text[0].upper() + text[1:])
    return tuple(sentences)


_KEY_LINE_RE = re.compile(
    r"^\('([^']+)', '([^']+)', '([^']+)', '([^']+)', '([^']+)'\)$"
)


class FakeChatClient:
    """Offline stand-in for the chat endpoint; answers prompts with
    deterministic paraphrases so the full prompt/parse path is exercised."""

    model = "synthetic-paraphrase"

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.prompts: list[str] = []

    def complete(self, prompt: str) -> str:
        self.prompts.append(prompt)
        if not prompt.startswith(PROMPT_PREAMBLE):
            raise ValueError("prompt does not carry the expected preamble")
        out = {}
        for line in prompt[len(PROMPT_PREAMBLE):].strip().splitlines():
            match = _KEY_LINE_RE.match(line.strip())
            if not match:
                raise ValueError(f"bad trigger line in prompt: {line!r}")
            key = TriggerKey(*match.groups())
            out[key.canonical()] = list(synthetic_sentences(key, self.seed))
        return json.dumps(out)
