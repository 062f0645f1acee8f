"""Acceptance gate: seven checks, one verdict line each.

The verdict lines bypass pytest's capture so a plain `pytest` run always
shows them. Every check is also a real assertion, so a FAIL here fails
the suite.
"""

import datetime as dt
import json
import pathlib
import random
import time

import pytest

from tdost.activities import COMMON_ACTIVITIES, common_label_set
from tdost.augment import augment, load_cache
from tdost.config import load_config
from tdost.errors import DataError
from tdost.events import SensorEvent, SensorValue, serialize_log
from tdost.pipeline import load_home, run_preprocess, run_transfer, sha256_text
from tdost.render import (
    ID_TOKEN_RE,
    Variant,
    render_basic,
    render_temporal,
    render_window,
)
from tdost.resources import builtin_activity_map, builtin_layout
from tdost.synth import FakeChatClient, build_home, paired_homes
from tdost.verbalize import clock_to_words, number_to_words, period_of_day
from tdost.windows import assign_folds, build_windows, segment, triplicate

from . import oracles

DATA = pathlib.Path(__file__).parent / "data"

# Pinned on the first computation of criterion 7; the whole chain from the
# template JSON to the centroid scores is deterministic, so these are exact.
PINNED_TDOST_ACC = 0.9573252688172044
PINNED_RAW_IDS_ACC = 0.12768817204301075


def announce(capsys, number, name, problems, elapsed=None, budget=None, extra=""):
    if elapsed is not None and budget is not None and elapsed > budget:
        problems.append(f"took {elapsed:.2f}s, budget {budget:.0f}s")
    verdict = "PASS" if not problems else "FAIL"
    timing = f" [{elapsed:.2f}s]" if elapsed is not None else ""
    detail = f" {extra}" if extra else ""
    with capsys.disabled():
        print(f"\nacceptance {number}/7 {name}: {verdict}{timing}{detail}")
    assert not problems, f"{name}: " + "; ".join(problems)


def load_rows(name):
    return json.loads((DATA / name).read_text(encoding="utf-8"))["rows"]


def event_at(sensor_id, value, when):
    return SensorEvent(timestamp=when, sensor_id=sensor_id,
                       value=SensorValue.from_token(value))


def test_1_golden_template_rows(capsys):
    """All published conversion rows render byte-identically."""
    started = time.perf_counter()
    problems = []
    aruba = builtin_layout("aruba")
    for row in load_rows("golden_basic_aruba.json"):
        event = event_at(row["sensor_id"], row["value"], dt.datetime(2024, 3, 4, 9, 0))
        got = render_basic(event, aruba.lookup(event.sensor_id))
        if got != row["expected"]:
            problems.append(f"basic {row['sensor_id']}: {got!r}")
    milan = builtin_layout("milan")
    temporal_rows = load_rows("golden_temporal_milan.json")
    for row in temporal_rows:
        if row["head_time"] is None:
            when, lag = dt.datetime(2024, 3, 4, 9, 0), row["lag_seconds"]
        else:
            hour, minute = map(int, row["head_time"].split(":"))
            when, lag = dt.datetime(2024, 3, 4, hour, minute), None
        event = event_at(row["sensor_id"], row["value"], when)
        got = render_temporal(event, milan.lookup(event.sensor_id), lag)
        if got != row["expected"]:
            problems.append(f"temporal {row['sensor_id']}: {got!r}")
    total = len(load_rows("golden_basic_aruba.json")) + len(temporal_rows)
    if total != 32:
        problems.append(f"expected 32 golden rows, found {total}")
    announce(capsys, 1, "golden template rows", problems,
             elapsed=time.perf_counter() - started, budget=1.0,
             extra=f"rows={total}")


def test_2_verbalizer_table(capsys):
    """Spot values plus a 10,000-case differential against the oracle."""
    problems = []
    checks = [
        (number_to_words(22), "twenty-two"),
        (number_to_words(120), "one hundred and twenty"),
        (clock_to_words(dt.time(7, 30)), "at seven hours thirty minutes AM"),
        (period_of_day(dt.time(7, 42)), "Early Morning"),
    ]
    for got, want in checks:
        if got != want:
            problems.append(f"{got!r} != {want!r}")
    rng = random.Random(20240601)
    mismatches = 0
    for _ in range(10_000):
        n = rng.randint(0, 1_000_000)
        if number_to_words(n) != oracles.spell_integer(n):
            mismatches += 1
    if mismatches:
        problems.append(f"{mismatches} differential mismatches")
    announce(capsys, 2, "verbalizer table", problems, extra="cases=10004")


def test_3_id_hygiene(capsys):
    """No sensor-style identifier token in any sentence of the full corpus."""
    started = time.perf_counter()
    problems = []
    sentences = 0
    leaks = []
    for home in paired_homes(1):
        cache = load_cache("")
        augment(home.log.events, home.layout, cache,
                offline=False, client=FakeChatClient(seed=1))
        lookup = cache.sentence_lookup()
        for variant in Variant:
            rendered = render_window(
                list(home.log.events), home.layout, variant,
                lookup if variant.uses_cache else None,
            )
            for trigger in rendered:
                for sentence in trigger.sentences:
                    sentences += 1
                    match = ID_TOKEN_RE.search(sentence)
                    if match and len(leaks) < 5:
                        leaks.append(f"{match.group(0)!r} in {sentence!r}")
    if leaks:
        problems.append("; ".join(leaks))
    if sentences < 10_000:
        problems.append(f"corpus too small to be convincing: {sentences}")
    announce(capsys, 3, "id hygiene", problems,
             elapsed=time.perf_counter() - started, budget=10.0,
             extra=f"sentences={sentences}")


def test_4_windowing_and_fold_invariants(capsys):
    """Exhaustive counting on a synthetic log of at least 5,000 events."""
    started = time.perf_counter()
    problems = []
    home = build_home("home_a", days=15, seed=11)
    n_events = len(home.log.events)
    if n_events < 5_000:
        problems.append(f"log has only {n_events} events")
    result = segment(home.log, home.activity_map)

    if any(len(p.events) > 100 for p in result.pieces):
        problems.append("a window exceeds 100 events")
    if any(len(p.events) < 10 for p in result.pieces):
        problems.append("a kept remainder is shorter than 10 events")
    kept = sum(len(p.events) for p in result.pieces)
    if kept + result.discarded_events != result.total_events != n_events:
        problems.append("event conservation violated")

    windows = build_windows(result.pieces, home.layout, Variant.BASIC)
    assign_folds(windows, seed=7)
    group_fold = {}
    group_split = {}
    group_label = {}
    for w in windows:
        if w.group_id in group_fold and group_fold[w.group_id] != w.fold:
            problems.append(f"group {w.group_id} straddles folds")
        if w.group_id in group_split and group_split[w.group_id] != w.split:
            problems.append(f"group {w.group_id} straddles splits")
        group_fold[w.group_id] = w.fold
        group_split[w.group_id] = w.split
        group_label[w.group_id] = w.label
    for label in {w.label for w in windows}:
        per_fold = [
            sum(1 for g, l in group_label.items()
                if l == label and group_fold[g] == fold)
            for fold in range(3)
        ]
        if max(per_fold) - min(per_fold) > 1:
            problems.append(f"class {label!r} fold spread {per_fold}")
    for fold in range(3):
        fold_groups = [g for g, f in group_fold.items() if f == fold]
        n_val = sum(1 for g in fold_groups if group_split[g] == "val")
        want = round(0.2 * len(fold_groups))
        if abs(n_val - want) > 1:
            problems.append(f"fold {fold} val {n_val} vs expected {want}")

    cache = load_cache("")
    augment(home.log.events, home.layout, cache,
            offline=False, client=FakeChatClient(seed=1))
    llm = triplicate(build_windows(
        result.pieces, home.layout, Variant.LLM,
        sentence_lookup=cache.sentence_lookup(),
    ))
    if len(llm) != 3 * len(windows):
        problems.append(f"triplication made {len(llm)} of {len(windows)} windows")
    siblings = {}
    for w in llm:
        siblings.setdefault(w.group_id, []).append(w.llm_slot)
    if any(sorted(slots) != [0, 1, 2] for slots in siblings.values()):
        problems.append("a sibling group does not carry slots 0,1,2")
    announce(capsys, 4, "windowing and fold invariants", problems,
             elapsed=time.perf_counter() - started, budget=10.0,
             extra=f"events={n_events} windows={len(windows)}")


def test_5_activity_maps(capsys):
    """The four published maps load, translate fully, and intersect right."""
    problems = []
    for name in ("aruba", "milan", "kyoto7", "cairo"):
        amap = builtin_activity_map(name)
        for raw in amap.entries:
            try:
                translated = amap.translate(raw)
            except DataError as exc:
                problems.append(f"{name}: {exc}")
                continue
            if translated not in COMMON_ACTIVITIES:
                problems.append(f"{name}: {raw!r} -> {translated!r} off the common set")
    shared = common_label_set(builtin_activity_map("cairo"), builtin_activity_map("kyoto7"))
    if set(shared) != {"Sleep", "Work", "Bed to Toilet", "Other"}:
        problems.append(f"cairo/kyoto7 intersection {shared}")
    announce(capsys, 5, "activity maps", problems)


def test_6_preprocess_determinism(capsys, tmp_path):
    """Identical config twice: byte-identical dataset and manifest."""
    config = load_config(json.dumps({
        "seed": 7,
        "source": "synth-a",
        "targets": ["synth-b"],
        "out_dir": str(tmp_path),
        "homes": {
            "synth-a": {"kind": "synthetic", "template": "home_a", "days": 4, "seed": 1},
        },
    }))
    problems = []
    first = run_preprocess(config, "synth-a")
    hashes = (
        sha256_text(first.dataset_path.read_text(encoding="utf-8")),
        sha256_text(first.manifest_path.read_text(encoding="utf-8")),
    )
    second = run_preprocess(config, "synth-a")
    again = (
        sha256_text(second.dataset_path.read_text(encoding="utf-8")),
        sha256_text(second.manifest_path.read_text(encoding="utf-8")),
    )
    if hashes != again:
        problems.append("rerun produced different bytes")
    announce(capsys, 6, "preprocess determinism", problems,
             extra=f"dataset_sha={hashes[0][:12]}")


def test_7_features_only_transfer_gap(capsys, tmp_path):
    """Verbalized features transfer across the synthetic pair; raw ids do not."""
    started = time.perf_counter()
    problems = []

    def pair_config(classifier):
        return load_config(json.dumps({
            "seed": 1,
            "source": "synth-a",
            "targets": ["synth-b"],
            "classifier": classifier,
            "out_dir": str(tmp_path / classifier),
            "homes": {
                "synth-a": {"kind": "synthetic", "template": "home_a",
                            "days": 12, "seed": 1001},
                "synth-b": {"kind": "synthetic", "template": "home_b",
                            "days": 12, "seed": 1002},
            },
        }))

    # The config above must denote the same pair paired_homes(1) builds.
    canonical = paired_homes(1)
    loaded = load_home(pair_config("nearest_centroid"), "synth-a")
    if loaded.input_hashes["log"] != sha256_text(serialize_log(canonical[0].log)):
        problems.append("config does not reproduce the shipped pair")

    tdost_acc = run_transfer(pair_config("nearest_centroid")).runs[0].summary()["acc_mean"]
    raw_acc = run_transfer(pair_config("baseline_ids")).runs[0].summary()["acc_mean"]
    if tdost_acc < 0.60:
        problems.append(f"verbalized accuracy {tdost_acc:.4f} < 0.60")
    if raw_acc > 0.35:
        problems.append(f"raw-id accuracy {raw_acc:.4f} > 0.35")
    if PINNED_TDOST_ACC is not None and abs(tdost_acc - PINNED_TDOST_ACC) > 1e-9:
        problems.append(f"verbalized accuracy drifted from {PINNED_TDOST_ACC}")
    if PINNED_RAW_IDS_ACC is not None and abs(raw_acc - PINNED_RAW_IDS_ACC) > 1e-9:
        problems.append(f"raw-id accuracy drifted from {PINNED_RAW_IDS_ACC}")
    announce(capsys, 7, "features-only transfer gap", problems,
             elapsed=time.perf_counter() - started, budget=120.0,
             extra=f"tdost={tdost_acc:.4f} raw_ids={raw_acc:.4f}")
