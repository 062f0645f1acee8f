#!/usr/bin/env python3
"""Full-scale evaluation driver for the public CASAS homes.

The test suite runs everything at desk scale on synthetic homes; the
numbers reported for the real corpora need assets this repository cannot
ship:

  * the raw CASAS annotated logs (aruba, milan, cairo, kyoto7), available
    from the WSU CASAS archive; place each as <data-root>/<home>/events.txt
  * pretrained sentence encoders (downloaded by sentence-transformers on
    first use; install the trainer's 'encoders' extra)
  * a chat-completions endpoint if the llm/llm_temporal variants are to
    be regenerated instead of replayed from a cache

This script stitches the two command line tools together exactly as the
tests do, but at full scale: parse and check each log, optionally extend
the sentence cache, export datasets per variant, then train and score
every ordered home pair. Expect hours of CPU time with the full grid and
a pretrained encoder; start with --pairs aruba:milan --variants basic to
calibrate.

Every invocation is printed before it runs, so a --dry-run transcript
doubles as a worked example of the CLI surface.
"""

from __future__ import annotations

import argparse
import itertools
import json
import shlex
import subprocess
import sys
from pathlib import Path

HOMES = ("aruba", "milan", "cairo", "kyoto7")
VARIANTS = ("basic", "temporal", "llm", "llm_temporal")
CLASSIFIERS = ("bilstm", "convbilstm")


def run(cmd: list[str], dry: bool) -> None:
    print("+", " ".join(shlex.quote(c) for c in cmd), flush=True)
    if not dry:
        subprocess.run(cmd, check=True)


def home_entry(data_root: Path, home: str) -> dict:
    return {
        "kind": "files",
        "log_path": str(data_root / home / "events.txt"),
        "layout": f"builtin:{home}",
        "activity_map": f"builtin:{home}",
    }


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--data-root", type=Path, default=Path("data"),
                        help="directory holding <home>/events.txt per home")
    parser.add_argument("--out", type=Path, default=Path("out/full_scale"))
    parser.add_argument("--pairs", nargs="*", default=None,
                        help="source:target pairs (default: all ordered pairs)")
    parser.add_argument("--variants", nargs="*", default=list(VARIANTS),
                        choices=VARIANTS)
    parser.add_argument("--classifiers", nargs="*", default=list(CLASSIFIERS),
                        choices=[*CLASSIFIERS, "baseline_ids"])
    parser.add_argument("--encoder", default="all-distilroberta-v1",
                        help="hash, all-distilroberta-v1 or sentence-t5")
    parser.add_argument("--cache", default="builtin:examples",
                        help="sentence cache for the llm variants")
    parser.add_argument("--endpoint", default=None,
                        help="chat-completions URL; enables live augmentation")
    parser.add_argument("--model", default=None,
                        help="chat model name for live augmentation")
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--workers", type=int, default=1,
                        help="grid cells trained as parallel processes")
    parser.add_argument("--dry-run", action="store_true")
    args = parser.parse_args(argv)

    if args.pairs:
        pairs = [tuple(p.split(":", 1)) for p in args.pairs]
    else:
        pairs = [p for p in itertools.permutations(HOMES, 2)]
    for source, target in pairs:
        for home in (source, target):
            if home not in HOMES:
                parser.error(f"unknown home {home!r}")
            log = args.data_root / home / "events.txt"
            if not log.exists() and not args.dry_run:
                print(f"missing {log}; fetch the CASAS release for "
                      f"{home!r} and place its annotated log there",
                      file=sys.stderr)
                return 1

    args.out.mkdir(parents=True, exist_ok=True)

    # Sanity-check each log once before anything expensive.
    for home in sorted({h for pair in pairs for h in pair}):
        run(["tdost", "parse", "--log",
             str(args.data_root / home / "events.txt"),
             "--home", home, "--lenient"], args.dry_run)

    cache = args.cache
    needs_cache = any(v.startswith("llm") for v in args.variants)
    if needs_cache and args.endpoint:
        cache_path = args.out / "sentence_cache.jsonl"
        for home in sorted({h for pair in pairs for h in pair}):
            cmd = ["tdost", "augment",
                   "--log", str(args.data_root / home / "events.txt"),
                   "--home", home, "--layout", f"builtin:{home}",
                   "--cache", cache if not cache_path.exists() else str(cache_path),
                   "--live", "--endpoint", args.endpoint,
                   "--seed", str(args.seed),
                   "--out-cache", str(cache_path), "--lenient"]
            if args.model:
                cmd += ["--model", args.model]
            run(cmd, args.dry_run)
        cache = str(cache_path)

    for source, target in pairs:
        for variant in args.variants:
            for classifier in args.classifiers:
                tag = f"{source}_to_{target}_{variant}_{classifier}"
                out_dir = args.out / tag
                config = {
                    "seed": args.seed,
                    "source": source,
                    "targets": [target],
                    "variant": variant,
                    "classifier": classifier,
                    "out_dir": str(out_dir),
                    "homes": {h: home_entry(args.data_root, h)
                              for h in (source, target)},
                    "trainer_command": [
                        "tdost-trainer",
                        "--source", "{source}", "--target", "{target}",
                        "--metrics", "{metrics}",
                        "--classifier", "{classifier}", "--seed", "{seed}",
                        "--encoder",
                        "hash" if classifier == "baseline_ids" else args.encoder,
                        "--workers", str(args.workers),
                    ],
                }
                if variant.startswith("llm"):
                    config["cache"] = cache
                config_path = args.out / f"{tag}.json"
                if not args.dry_run:
                    config_path.write_text(json.dumps(config, indent=2) + "\n",
                                           encoding="utf-8")
                print(f"# config: {config_path}")
                run(["tdost", "transfer", "--config", str(config_path)],
                    args.dry_run)
    print(f"reports under {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
