"""Parsing, validation and serialization of raw smart-home event logs.

The on-disk grammar is one event per line, whitespace-delimited:

    DATE TIME SENSOR VALUE [ACTIVITY-WORDS... begin|end]

Timestamps are naive local time with an optional fractional-second part of
up to six digits. Activity names may span several tokens; the trailing
marker token must be exactly ``begin`` or ``end``.
"""

from __future__ import annotations

import datetime as dt
import io
import json
import logging
import re
from dataclasses import dataclass, field

from .errors import ParseError

log = logging.getLogger(__name__)

BINARY_STATES = frozenset({"ON", "OFF", "OPEN", "CLOSE"})

VALUE_BINARY = "binary"
VALUE_NUMERIC = "numeric"
VALUE_OTHER = "other"

_NUMERIC_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)$")
_MARKERS = ("begin", "end")


@dataclass(frozen=True, slots=True)
class SensorValue:
    """A sensor reading, keeping the raw token for lossless round-trips."""

    raw: str
    kind: str

    @staticmethod
    def from_token(token: str) -> "SensorValue":
        if token.upper() in BINARY_STATES:
            return SensorValue(raw=token, kind=VALUE_BINARY)
        if _NUMERIC_RE.match(token):
            return SensorValue(raw=token, kind=VALUE_NUMERIC)
        return SensorValue(raw=token, kind=VALUE_OTHER)

    @property
    def state(self) -> str:
        """Normalized binary state (upper-case)."""
        if self.kind != VALUE_BINARY:
            raise ValueError(f"not a binary value: {self.raw!r}")
        return self.raw.upper()


@dataclass(frozen=True, slots=True)
class Annotation:
    activity: str
    marker: str  # "begin" | "end"


@dataclass(frozen=True, slots=True)
class SensorEvent:
    timestamp: dt.datetime
    sensor_id: str
    value: SensorValue
    annotation: Annotation | None = None


@dataclass(slots=True)
class ParseSummary:
    lines: int = 0
    events: int = 0
    skipped: int = 0
    non_monotone: int = 0

    def to_json(self) -> str:
        return json.dumps(
            {
                "lines": self.lines,
                "events": self.events,
                "skipped": self.skipped,
                "non_monotone": self.non_monotone,
            }
        )


@dataclass(slots=True)
class EventLog:
    home_id: str
    events: list[SensorEvent] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)


def _parse_timestamp(date_tok: str, time_tok: str, line_no: int) -> dt.datetime:
    text = f"{date_tok} {time_tok}"
    for fmt in ("%Y-%m-%d %H:%M:%S.%f", "%Y-%m-%d %H:%M:%S"):
        try:
            return dt.datetime.strptime(text, fmt)
        except ValueError:
            continue
    raise ParseError(f"bad timestamp {text!r}", line_no)


def parse_line(line: str, line_no: int = 0) -> SensorEvent:
    """Parse one raw log line into an event.

    Raises ParseError for anything outside the grammar: short lines, bad
    timestamps, or trailing annotation tokens without a begin/end marker.
    """
    tokens = line.split()
    if len(tokens) < 4:
        raise ParseError(f"expected at least 4 fields, got {len(tokens)}", line_no)
    timestamp = _parse_timestamp(tokens[0], tokens[1], line_no)
    sensor_id, value_tok = tokens[2], tokens[3]
    annotation = None
    if len(tokens) > 4:
        marker = tokens[-1]
        if marker not in _MARKERS:
            raise ParseError(f"annotation marker must be begin|end, got {marker!r}", line_no)
        activity = " ".join(tokens[4:-1])
        if not activity:
            raise ParseError("annotation marker without an activity name", line_no)
        annotation = Annotation(activity=activity, marker=marker)
    return SensorEvent(
        timestamp=timestamp,
        sensor_id=sensor_id,
        value=SensorValue.from_token(value_tok),
        annotation=annotation,
    )


def parse_log(source: str | io.TextIOBase, home_id: str, lenient: bool = False) -> tuple[EventLog, ParseSummary]:
    """Parse a whole log into events plus a summary of what was seen.

    Strict mode raises on the first malformed line; lenient mode skips and
    counts it. Out-of-order timestamps are never fatal, only counted.
    """
    text = source.read() if hasattr(source, "read") else source
    summary = ParseSummary()
    events: list[SensorEvent] = []
    previous: dt.datetime | None = None
    for line_no, line in enumerate(text.splitlines(), start=1):
        summary.lines += 1
        if not line.strip():
            summary.skipped += 1
            continue
        try:
            event = parse_line(line, line_no)
        except ParseError as exc:
            if not lenient:
                raise
            summary.skipped += 1
            log.warning("skipping malformed line: %s", exc)
            continue
        if previous is not None and event.timestamp < previous:
            summary.non_monotone += 1
        previous = event.timestamp
        events.append(event)
        summary.events += 1
    return EventLog(home_id=home_id, events=events), summary


def format_timestamp(ts: dt.datetime) -> str:
    if ts.microsecond:
        return ts.strftime("%Y-%m-%d %H:%M:%S.%f")
    return ts.strftime("%Y-%m-%d %H:%M:%S")


def serialize_event(event: SensorEvent) -> str:
    parts = [format_timestamp(event.timestamp), event.sensor_id, event.value.raw]
    if event.annotation is not None:
        parts.append(f"{event.annotation.activity} {event.annotation.marker}")
    return " ".join(parts)


def serialize_log(log_: EventLog) -> str:
    return "".join(serialize_event(e) + "\n" for e in log_.events)
