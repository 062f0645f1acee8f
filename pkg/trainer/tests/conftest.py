import json
import subprocess
import sys

import pytest


def export_pair(out_dir, classifier: str) -> dict:
    """Export the synthetic home pair with the companion pipeline CLI.

    The trainer never imports that package; tests reach it the same way a
    user would, through its command line.
    """
    config = {
        "seed": 1,
        "source": "synth-a",
        "targets": ["synth-b"],
        "classifier": classifier,
        "out_dir": str(out_dir),
        "homes": {
            "synth-a": {"kind": "synthetic", "template": "home_a",
                        "days": 12, "seed": 1001},
            "synth-b": {"kind": "synthetic", "template": "home_b",
                        "days": 12, "seed": 1002},
        },
    }
    config_path = out_dir / f"config_{classifier}.json"
    config_path.write_text(json.dumps(config), encoding="utf-8")
    proc = subprocess.run(
        [sys.executable, "-m", "tdost.cli", "export", "--config",
         str(config_path)],
        capture_output=True, text=True, check=True,
    )
    return json.loads(proc.stdout)


@pytest.fixture(scope="session")
def exported_pair(tmp_path_factory):
    """Sentence datasets (basic variant) plus raw-token datasets."""
    out_dir = tmp_path_factory.mktemp("exports")
    sentences = export_pair(out_dir, "nearest_centroid")
    raw = export_pair(out_dir, "baseline_ids")
    return {
        "source": sentences["synth-a"]["dataset"],
        "target": sentences["synth-b"]["dataset"],
        "source_raw": raw["synth-a"]["dataset"],
        "target_raw": raw["synth-b"]["dataset"],
    }
