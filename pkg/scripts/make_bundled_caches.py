#!/usr/bin/env python3
"""Rebuild the packaged sentence cache at src/tdost/data/caches/examples.jsonl.

The cache bundles sentence triples recorded from live chat-model sessions
over two small trigger sequences (a Milan bedroom-to-bathroom walk and a
Cairo breakfast). Where a session kept only one sentence of the triple,
the remaining slots are filled with deterministic synthetic paraphrases so
every entry satisfies the three-sentences contract. Rerunning the script
is idempotent.
"""

from __future__ import annotations

import pathlib

from tdost.augment import AugmentationCache, TriggerKey, serialize_cache
from tdost.synth import synthetic_sentences

OUT = pathlib.Path(__file__).resolve().parent.parent / "src" / "tdost" / "data" / "caches" / "examples.jsonl"

FILLER_SEED = 2024

# Full recorded triples.
RECORDED = {
    TriggerKey("Friday", "Late Night", "Motion", "bedroom", "ON"): (
        "In the stillness of the late Friday night, the bedroom's motion sensor sprang to life, suggesting someone had just entered.",
        "The bedroom's still air was pierced by the activation of the motion sensor, recording a disturbance late on Friday night.",
        "An unseen guest seemed to have ventured into the bedroom late Friday night, as indicated by the motion sensor's alert.",
    ),
    TriggerKey("Friday", "Late Night", "Motion", "bedroom", "OFF"): (
        "The bedroom was still and quiet, with no movement detected late on Friday night.",
        "As the clock struck deep into late night on Friday, the motion sensor in the bedroom remained inactive, signaling an undisturbed slumber.",
        "The absence of motion in the bedroom late at night on Friday indicated everyone had settled for the night.",
    ),
    TriggerKey("Friday", "Late Night", "Motion", "bedroom on bed", "OFF"): (
        "After a brief stir, the bedroom bed motion sensor ceased its alert late on Friday night, suggesting the occupant had returned to rest.",
        "The motion on the bed came to a standstill late Friday night, as the individual may have found peace in the embrace of sleep.",
        "Following a momentary flurry of activity, the bedroom bed sensor quieted down, hinting at the sleeper's return to tranquility.",
    ),
    TriggerKey("Friday", "Late Night", "Motion", "walk-in closet", "ON"): (
        "A hushed motion was detected within the walk-in closet late at night on Friday, suggesting a discreet presence.",
        "The solitude of the walk-in closet was broken late Friday night as the motion sensor reported unexpected activity.",
        "Late on Friday night, the motion sensor inside the walk-in closet was triggered, hinting at some nocturnal shuffling.",
    ),
    TriggerKey("Friday", "Late Night", "Motion", "bathroom near sink", "ON"): (
        "In the solitude of late-night Friday, the bathroom sensor near the sink was triggered, suggesting a nocturnal visitor.",
        "The motion detector by the bathroom sink sprang to life, signaling an unexpected presence during the late hours of Friday.",
        "Activity was registered by the motion sensor in the bathroom next to the sink, piercing the late-night silence.",
    ),
}

# Sessions that kept only the first sentence of the triple.
RECORDED_FIRST = {
    TriggerKey("Wednesday", "Early Morning", "Motion", "kitchen", "ON"):
        "The kitchen motion sensor registered activity early Wednesday morning, perhaps a sign of an early bird preparing breakfast.",
    TriggerKey("Wednesday", "Early Morning", "Motion", "living room", "OFF"):
        "The early morning bustle in the living room has subsided, with the motion sensor now indicating no further movement on Wednesday.",
    TriggerKey("Wednesday", "Early Morning", "Motion", "living room near bottom of stairs", "OFF"):
        "The early morning bustle slowed down as the motion sensor in the living room near the stairs ceased detecting movement on Wednesday.",
    TriggerKey("Wednesday", "Early Morning", "Motion", "dining area near kitchen", "ON"):
        "An early riser stirred in the dining area close to the kitchen, triggering the motion sensor on this Wednesday morning.",
    TriggerKey("Wednesday", "Early Morning", "Motion", "kitchen", "OFF"):
        "Culinary preparations came to a pause in the kitchen on Wednesday morning, reflected by the motion sensor's transition to an inactive state.",
    TriggerKey("Wednesday", "Early Morning", "Motion", "near couch in living room", "ON"):
        "The presence of someone or something near the couch in the living room was detected by the motion sensor, as it switched on early Wednesday morning.",
}


def build() -> AugmentationCache:
    cache = AugmentationCache()
    for key, sentences in RECORDED.items():
        cache.put(key, sentences, {"source": "recorded"})
    for key, first in RECORDED_FIRST.items():
        fillers = synthetic_sentences(key, FILLER_SEED)
        cache.put(key, (first, fillers[1], fillers[2]), {"source": "recorded+filler"})
    return cache


def main() -> None:
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(serialize_cache(build()), encoding="utf-8")
    print(f"wrote {OUT} ({len(build().entries)} entries)")


if __name__ == "__main__":
    main()
