"""Render sensor events into textual trigger descriptions.

Four variants: "basic" is the bare template over coarse room names,
"temporal" switches to landmark-level locations and adds relative lags
(absolute clock time on the first trigger of a window), "llm" substitutes
cached model-written sentences, and "llm_temporal" adds the same time
clauses to those.

Sentences never contain sensor ids; the template vocabulary is lower-case
by construction and stored location phrases pass through verbatim.
"""

from __future__ import annotations

import datetime as dt
import enum
import math
import re
from dataclasses import dataclass

from .errors import DataError
from .events import SensorEvent, VALUE_NUMERIC
from .layouts import HomeLayout, SensorMeta
from .verbalize import LAG_PREFIX, LAG_SUFFIX, clock_to_words, lag_phrase, number_to_words

ID_TOKEN_RE = re.compile(r"\b[A-Z]+[0-9]+\b")

# Location phrases already carrying a spatial preposition are inserted
# verbatim; bare room phrases get "in".
_PREPOSITIONS = frozenset({"in", "on", "near", "between"})


class Variant(enum.Enum):
    BASIC = "basic"
    TEMPORAL = "temporal"
    LLM = "llm"
    LLM_TEMPORAL = "llm_temporal"

    @property
    def uses_granular(self) -> bool:
        return self is not Variant.BASIC

    @property
    def uses_cache(self) -> bool:
        return self in (Variant.LLM, Variant.LLM_TEMPORAL)

    @property
    def uses_time(self) -> bool:
        return self in (Variant.TEMPORAL, Variant.LLM_TEMPORAL)


@dataclass(frozen=True, slots=True)
class TemplateOptions:
    """Ordering of the time clauses around the base sentence.

    The default leads non-head sentences with the lag and trails head
    sentences with the clock; the alternate ordering swaps both, for
    ablations of clause position.
    """

    lag_position: str = LAG_PREFIX

    def __post_init__(self):
        if self.lag_position not in (LAG_PREFIX, LAG_SUFFIX):
            raise ValueError(f"unknown lag position {self.lag_position!r}")


DEFAULT_OPTIONS = TemplateOptions()


@dataclass(frozen=True, slots=True)
class RenderedTrigger:
    """One event's textual form(s) plus the timing facts used to build them."""

    sentences: tuple[str, ...]
    source_event_index: int
    lag_seconds: int | None  # None marks the window head
    is_sequence_head: bool


def located(meta: SensorMeta, granular: bool) -> str:
    phrase = meta.location_granular if granular else meta.location_basic
    first_word = phrase.split(" ", 1)[0]
    if first_word in _PREPOSITIONS:
        return phrase
    return f"in {phrase}"


def value_words(event: SensorEvent) -> str:
    """Sentence form of a reading: numerics in words, everything else verbatim."""
    value = event.value
    if value.kind != VALUE_NUMERIC:
        return value.raw
    raw = value.raw.lstrip("+")
    if raw.startswith("-"):
        return f"minus {number_to_words(raw[1:])}"
    return number_to_words(raw)


def check_id_free(sentence: str, sensor_id: str) -> str:
    """Reject sentences leaking sensor-style identifier tokens."""
    match = ID_TOKEN_RE.search(sentence)
    if match:
        raise DataError(
            f"identifier token {match.group(0)!r} leaked into sentence "
            f"for sensor {sensor_id!r}: {sentence!r}"
        )
    return sentence


def base_sentence(event: SensorEvent, meta: SensorMeta, granular: bool) -> str:
    return (
        f"{meta.sensor_type.phrase} sensor {located(meta, granular)} "
        f"fired with value {value_words(event)}"
    )


def _floor_lag(current: dt.datetime, previous: dt.datetime) -> int:
    delta = (current - previous).total_seconds()
    return max(0, math.floor(delta))


def render_basic(event: SensorEvent, meta: SensorMeta) -> str:
    return check_id_free(base_sentence(event, meta, granular=False), event.sensor_id)


def render_temporal(
    event: SensorEvent,
    meta: SensorMeta,
    lag_seconds: int | None,
    options: TemplateOptions = DEFAULT_OPTIONS,
) -> str:
    """Granular-location sentence with a lag clause, or the clock on heads."""
    body = base_sentence(event, meta, granular=True)
    if lag_seconds is None:
        clock = clock_to_words(event.timestamp.time())
        if options.lag_position == LAG_PREFIX:
            sentence = f"{body} {clock}"
        else:
            sentence = f"{clock}, {body}"
    else:
        if options.lag_position == LAG_PREFIX:
            sentence = lag_phrase(lag_seconds, LAG_PREFIX).lower() + body
        else:
            sentence = body + lag_phrase(lag_seconds, LAG_SUFFIX)
    return check_id_free(sentence, event.sensor_id)


def _decapitalize(sentence: str) -> str:
    return sentence[0].lower() + sentence[1:] if sentence else sentence


def _strip_terminal_punct(sentence: str) -> str:
    return sentence.rstrip(".!? ")


def render_llm_temporal(
    sentences: tuple[str, ...],
    event: SensorEvent,
    lag_seconds: int | None,
    options: TemplateOptions = DEFAULT_OPTIONS,
) -> tuple[str, ...]:
    """Attach time clauses to cached model sentences.

    Non-head sentences get the lag clause ahead of the decapitalized
    original; head sentences get the clock appended after terminal
    punctuation is dropped.
    """
    out = []
    for s in sentences:
        if lag_seconds is None:
            clock = clock_to_words(event.timestamp.time())
            if options.lag_position == LAG_PREFIX:
                out.append(f"{_strip_terminal_punct(s)} {clock}")
            else:
                out.append(f"{clock[0].upper()}{clock[1:]}, {_decapitalize(s)}")
        else:
            if options.lag_position == LAG_PREFIX:
                out.append(lag_phrase(lag_seconds, LAG_PREFIX) + _decapitalize(s))
            else:
                out.append(_strip_terminal_punct(s) + lag_phrase(lag_seconds, LAG_SUFFIX))
    return tuple(out)


def render_window(
    events: list[SensorEvent],
    layout: HomeLayout,
    variant: Variant,
    sentence_lookup=None,
    options: TemplateOptions = DEFAULT_OPTIONS,
) -> list[RenderedTrigger]:
    """Render a window of events; the first event is the sequence head.

    ``sentence_lookup`` maps an event (via its trigger key) to cached
    sentences and is required for the llm variants; see augment.trigger_key.
    """
    if not events:
        raise ValueError("cannot render an empty window")
    if variant.uses_cache and sentence_lookup is None:
        raise ValueError(f"variant {variant.value} needs a sentence lookup")
    rendered: list[RenderedTrigger] = []
    previous: dt.datetime | None = None
    for i, event in enumerate(events):
        meta = layout.lookup(event.sensor_id)
        lag = None if previous is None else _floor_lag(event.timestamp, previous)
        head = previous is None
        if variant is Variant.BASIC:
            sentences = (render_basic(event, meta),)
        elif variant is Variant.TEMPORAL:
            sentences = (render_temporal(event, meta, lag, options),)
        else:
            cached = tuple(sentence_lookup(event, meta))
            if len(cached) != 3:
                raise DataError(
                    f"expected 3 cached sentences for sensor {event.sensor_id!r}, "
                    f"got {len(cached)}"
                )
            if variant is Variant.LLM_TEMPORAL:
                sentences = render_llm_temporal(cached, event, lag, options)
            else:
                sentences = cached
            for s in sentences:
                check_id_free(s, event.sensor_id)
        rendered.append(
            RenderedTrigger(
                sentences=sentences,
                source_event_index=i,
                lag_seconds=lag,
                is_sequence_head=head,
            )
        )
        previous = event.timestamp
    return rendered
