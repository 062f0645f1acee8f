"""Model-written sentence augmentation with an offline-first cache.

Triggers are keyed by the 5-tuple (weekday, day period, sensor type,
granular location, value token) so repeats of the same situation reuse the
same sentences. Prompts batch five keys; responses must be JSON mapping
each key's canonical string to exactly three sentences.
"""

from __future__ import annotations

import io
import json
import logging
import os
from dataclasses import dataclass, field

from .errors import CacheMissError, DataError, ResponseFormatError, ServiceError
from .events import SensorEvent
from .layouts import SensorMeta
from .verbalize import period_of_day, weekday_name

log = logging.getLogger(__name__)

BATCH_SIZE = 5
SENTENCES_PER_KEY = 3
DEFAULT_MAX_RETRIES = 3
API_KEY_ENV = "TDOST_LLM_API_KEY"

PROMPT_PREAMBLE = (
    "You are an AI assistant that is helping in generating diverse texts "
    "and adding context to each sensor reading leveraging world knowledge. "
    "Please generate diverse text sentences (3) for each sensor trigger. "
    "You will be given a window of 5 sensor triggers. The given sensor "
    "trigger has the format: (Day of Week, Time on that day, sensor type, "
    "location context of the sensor, Value of the Sensor). The output "
    "should be a JSON (key : (Day of Week, Time on that day, sensor type, "
    "location context of the sensor, Value of the Sensor) ) containing a "
    "list of the generated sentences. Sensor Trigger Window:"
)


@dataclass(frozen=True, slots=True)
class TriggerKey:
    weekday: str
    period: str
    sensor_type: str
    location: str
    value: str

    def canonical(self) -> str:
        return (
            f"('{self.weekday}', '{self.period}', '{self.sensor_type}', "
            f"'{self.location}', '{self.value}')"
        )


def trigger_key(event: SensorEvent, meta: SensorMeta) -> TriggerKey:
    return TriggerKey(
        weekday=weekday_name(event.timestamp.date()),
        period=period_of_day(event.timestamp.time()),
        sensor_type=meta.sensor_type.prompt_name,
        location=meta.location_granular,
        value=event.value.raw,
    )


@dataclass(frozen=True, slots=True)
class PromptBatch:
    text: str
    keys: tuple[TriggerKey, ...]  # distinct keys, before padding
    padded: int


def build_prompt(keys: list[TriggerKey]) -> PromptBatch:
    """Prompt for up to five keys; short batches repeat the last key."""
    if not keys or len(keys) > BATCH_SIZE:
        raise ValueError(f"prompt batch must hold 1..{BATCH_SIZE} keys, got {len(keys)}")
    padded = BATCH_SIZE - len(keys)
    full = list(keys) + [keys[-1]] * padded
    lines = "\n".join(k.canonical() for k in full)
    return PromptBatch(
        text=f"{PROMPT_PREAMBLE}\n{lines}",
        keys=tuple(keys),
        padded=padded,
    )


def _strip_fences(body: str) -> str:
    text = body.strip()
    if text.startswith("```"):
        first_newline = text.find("\n")
        if first_newline == -1:
            raise ResponseFormatError("fenced response with no content")
        text = text[first_newline + 1:]
        if text.rstrip().endswith("```"):
            text = text.rstrip()[:-3]
    return text


def parse_response(body: str, expected: list[TriggerKey]) -> dict[TriggerKey, tuple[str, ...]]:
    """Extract three sentences per expected key from a model response.

    Raises ResponseFormatError on anything off-shape: non-JSON bodies,
    missing keys, wrong sentence counts, empty sentences. Extra keys are
    ignored.
    """
    try:
        doc = json.loads(_strip_fences(body))
    except json.JSONDecodeError as exc:
        raise ResponseFormatError(f"response is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ResponseFormatError("response root must be a JSON object")
    out: dict[TriggerKey, tuple[str, ...]] = {}
    for key in expected:
        if key in out:
            continue
        entry = doc.get(key.canonical())
        if entry is None:
            raise ResponseFormatError(f"response missing key {key.canonical()}")
        if (
            not isinstance(entry, list)
            or len(entry) != SENTENCES_PER_KEY
            or not all(isinstance(s, str) and s.strip() for s in entry)
        ):
            raise ResponseFormatError(
                f"key {key.canonical()} needs exactly {SENTENCES_PER_KEY} "
                f"non-empty sentences"
            )
        out[key] = tuple(s.strip() for s in entry)
    return out


@dataclass(slots=True)
class AugmentationCache:
    """Canonical key string -> sentence triple, with per-entry provenance."""

    entries: dict[str, tuple[str, ...]] = field(default_factory=dict)
    provenance: dict[str, dict] = field(default_factory=dict)

    def __contains__(self, key: TriggerKey) -> bool:
        return key.canonical() in self.entries

    def lookup(self, key: TriggerKey) -> tuple[str, ...]:
        sentences = self.entries.get(key.canonical())
        if sentences is None:
            raise CacheMissError(f"no cached sentences for {key.canonical()}")
        return sentences

    def put(self, key: TriggerKey, sentences: tuple[str, ...], provenance: dict) -> None:
        self.entries[key.canonical()] = tuple(sentences)
        self.provenance[key.canonical()] = provenance

    def sentence_lookup(self):
        """Adapter for render_window: (event, meta) -> sentences."""
        def lookup(event: SensorEvent, meta: SensorMeta) -> tuple[str, ...]:
            return self.lookup(trigger_key(event, meta))
        return lookup


def load_cache(source: str | io.TextIOBase) -> AugmentationCache:
    text = source.read() if hasattr(source, "read") else source
    cache = AugmentationCache()
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"cache line {line_no} is not valid JSON: {exc}") from exc
        if not isinstance(record, dict) or {"key", "sentences"} - record.keys():
            raise DataError(f"cache line {line_no} must have key and sentences")
        sentences = record["sentences"]
        if (
            not isinstance(sentences, list)
            or len(sentences) != SENTENCES_PER_KEY
            or not all(isinstance(s, str) and s for s in sentences)
        ):
            raise DataError(
                f"cache line {line_no}: sentences must be {SENTENCES_PER_KEY} "
                f"non-empty strings"
            )
        cache.entries[record["key"]] = tuple(sentences)
        cache.provenance[record["key"]] = record.get("provenance", {})
    return cache


def serialize_cache(cache: AugmentationCache) -> str:
    """Cache file body, one record per line, sorted by key for stable diffs."""
    lines = []
    for key in sorted(cache.entries):
        record = {
            "key": key,
            "sentences": list(cache.entries[key]),
            "provenance": cache.provenance.get(key, {}),
        }
        lines.append(json.dumps(record, sort_keys=True))
    return "".join(line + "\n" for line in lines)


class HttpChatClient:
    """Minimal chat-completions client against an OpenAI-style endpoint."""

    def __init__(self, endpoint: str, model: str, api_key_env: str = API_KEY_ENV,
                 timeout: float = 60.0):
        self.endpoint = endpoint
        self.model = model
        self.api_key_env = api_key_env
        self.timeout = timeout

    def complete(self, prompt: str) -> str:
        import requests

        api_key = os.environ.get(self.api_key_env)
        if not api_key:
            raise ServiceError(f"environment variable {self.api_key_env} is not set")
        try:
            response = requests.post(
                self.endpoint,
                headers={"Authorization": f"Bearer {api_key}"},
                json={
                    "model": self.model,
                    "messages": [{"role": "user", "content": prompt}],
                },
                timeout=self.timeout,
            )
            response.raise_for_status()
            doc = response.json()
        except requests.RequestException as exc:
            raise ServiceError(f"chat endpoint failure: {exc}") from exc
        try:
            return doc["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ServiceError(f"unexpected chat response shape: {doc!r}") from exc


@dataclass(slots=True)
class AugmentReport:
    distinct_keys: int = 0
    cache_hits: int = 0
    prompts_issued: int = 0
    new_entries: int = 0


def collect_keys(events: list[SensorEvent], layout) -> list[TriggerKey]:
    """Distinct trigger keys in first-appearance order."""
    seen: dict[TriggerKey, None] = {}
    for event in events:
        seen.setdefault(trigger_key(event, layout.lookup(event.sensor_id)), None)
    return list(seen)


def augment(
    events: list[SensorEvent],
    layout,
    cache: AugmentationCache,
    offline: bool = True,
    client=None,
    max_retries: int = DEFAULT_MAX_RETRIES,
) -> AugmentReport:
    """Ensure the cache covers every trigger key in the events.

    Offline mode raises CacheMissError on the first uncovered key. Live
    mode batches misses five at a time through the client, retrying each
    batch up to max_retries times on malformed responses.
    """
    keys = collect_keys(events, layout)
    report = AugmentReport(distinct_keys=len(keys))
    missing = [k for k in keys if k not in cache]
    report.cache_hits = len(keys) - len(missing)
    if not missing:
        return report
    if offline:
        raise CacheMissError(
            f"{len(missing)} keys missing from cache in offline mode, "
            f"first: {missing[0].canonical()}"
        )
    if client is None:
        raise ValueError("live augmentation needs a client")
    for start in range(0, len(missing), BATCH_SIZE):
        batch = build_prompt(missing[start:start + BATCH_SIZE])
        parsed = None
        for attempt in range(1, max_retries + 1):
            body = client.complete(batch.text)
            report.prompts_issued += 1
            try:
                parsed = parse_response(body, list(batch.keys))
                break
            except ResponseFormatError as exc:
                log.warning("attempt %d/%d: %s", attempt, max_retries, exc)
        if parsed is None:
            raise ServiceError(
                f"no well-formed response after {max_retries} attempts"
            )
        for key, sentences in parsed.items():
            cache.put(key, sentences, {"source": "live", "model": getattr(client, "model", "unknown")})
            report.new_entries += 1
    return report
