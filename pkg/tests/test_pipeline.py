"""End-to-end preprocessing and transfer flows."""

import json
import re
import sys

import numpy as np
import pytest

from tdost.augment import augment, serialize_cache
from tdost.config import ExperimentConfig, HomeSource, load_config
from tdost.embedding import EmbeddingSpec, embed_hash, write_matrix
from tdost.errors import ConfigError, DataError, ServiceError
from tdost.activities import serialize_activity_map
from tdost.events import serialize_log
from tdost.layouts import serialize_layout
from tdost.pipeline import (
    load_home,
    nearest_centroid_transfer,
    run_preprocess,
    run_trainer,
    run_transfer,
    sha256_text,
    window_vectors,
)
from tdost.resources import builtin_layout
from tdost.synth import FakeChatClient, build_home
from tdost.windows import load_dataset


def synthetic_config(tmp_path, **overrides) -> ExperimentConfig:
    doc = {
        "seed": 7,
        "source": "synth-a",
        "targets": ["synth-b"],
        "out_dir": str(tmp_path / "out"),
        "homes": {
            "synth-a": {"kind": "synthetic", "template": "home_a", "days": 2, "seed": 1},
            "synth-b": {"kind": "synthetic", "template": "home_b", "days": 2, "seed": 2},
        },
    }
    doc.update(overrides)
    return load_config(json.dumps(doc))


@pytest.fixture(scope="module")
def home_a():
    return build_home("home_a", days=2, seed=1)


class TestLoadHome:
    def test_synthetic_source(self, tmp_path):
        config = synthetic_config(tmp_path)
        loaded = load_home(config, "synth-a")
        assert loaded.home_id == "synth-a"
        assert len(loaded.log.events) > 100
        assert set(loaded.input_hashes) == {"log", "layout", "activity_map"}
        assert loaded.parse_summary is None

    def test_synthetic_hashes_are_reproducible(self, tmp_path):
        config = synthetic_config(tmp_path)
        first = load_home(config, "synth-a")
        second = load_home(config, "synth-a")
        assert first.input_hashes == second.input_hashes

    def test_files_source(self, tmp_path, home_a):
        log_path = tmp_path / "a.txt"
        log_path.write_text(serialize_log(home_a.log), encoding="utf-8")
        layout_path = tmp_path / "a.layout.json"
        layout_path.write_text(serialize_layout(home_a.layout), encoding="utf-8")
        map_path = tmp_path / "a.map.json"
        map_text = serialize_activity_map(home_a.activity_map)
        map_path.write_text(map_text, encoding="utf-8")
        config = synthetic_config(
            tmp_path,
            homes={
                "synth-a": {
                    "log": str(log_path),
                    "layout": str(layout_path),
                    "activity_map": str(map_path),
                }
            },
        )
        loaded = load_home(config, "synth-a")
        assert loaded.parse_summary is not None
        assert loaded.parse_summary["events"] == len(home_a.log.events)
        assert loaded.input_hashes["log"] == sha256_text(serialize_log(home_a.log))
        assert loaded.input_hashes["activity_map"] == sha256_text(map_text)

    def test_builtin_reference_hashes_content_not_name(self, tmp_path, home_a):
        """A builtin: reference and a file with identical content hash alike."""
        log_path = tmp_path / "a.txt"
        log_path.write_text(serialize_log(home_a.log), encoding="utf-8")
        layout_file = tmp_path / "milan.layout.json"
        layout_file.write_text(serialize_layout(builtin_layout("milan")), encoding="utf-8")
        map_path = tmp_path / "a.map.json"
        map_path.write_text(serialize_activity_map(home_a.activity_map), encoding="utf-8")

        def config_with_layout(ref):
            return synthetic_config(
                tmp_path,
                homes={
                    "synth-a": {
                        "log": str(log_path),
                        "layout": ref,
                        "activity_map": str(map_path),
                    }
                },
            )

        by_name = load_home(config_with_layout("builtin:milan"), "synth-a")
        by_file = load_home(config_with_layout(str(layout_file)), "synth-a")
        assert by_name.input_hashes["layout"] == by_file.input_hashes["layout"]

    def test_unconfigured_home_rejected(self, tmp_path):
        config = synthetic_config(tmp_path)
        with pytest.raises(ConfigError, match="no input source configured"):
            load_home(config, "cairo")

    def test_missing_log_file_rejected(self, tmp_path):
        config = synthetic_config(
            tmp_path,
            homes={
                "synth-a": {
                    "log": str(tmp_path / "absent.txt"),
                    "layout": "builtin:milan",
                    "activity_map": "builtin:milan",
                }
            },
        )
        with pytest.raises(ConfigError, match="log file does not exist"):
            load_home(config, "synth-a")


class TestRunPreprocess:
    def test_writes_dataset_and_manifest(self, tmp_path):
        config = synthetic_config(tmp_path)
        result = run_preprocess(config, "synth-a")
        assert result.dataset_path.name == "synth-a_basic_seed7.jsonl"
        assert result.manifest_path.name == "synth-a_basic_seed7.manifest.json"
        assert result.dataset_path.exists() and result.manifest_path.exists()
        manifest = json.loads(result.manifest_path.read_text(encoding="utf-8"))
        assert manifest == json.loads(json.dumps(result.manifest))
        assert manifest["home"] == "synth-a"
        assert manifest["variant"] == "basic"
        assert manifest["feature_mode"] == "tdost"
        assert manifest["counts"]["windows"] == len(result.windows)
        assert manifest["counts"]["folds"] == [
            sum(1 for w in result.windows if w.fold == f) for f in range(3)
        ]
        assert set(manifest["inputs"]) == {"log", "layout", "activity_map"}

    def test_event_conservation(self, tmp_path):
        """Every event either lands in a window or is counted as discarded."""
        config = synthetic_config(tmp_path)
        result = run_preprocess(config, "synth-a")
        counts = result.manifest["counts"]
        in_windows = sum(len(w.triggers) for w in result.windows)
        assert in_windows + counts["discarded_events"] == counts["events"]

    def test_rerun_is_byte_identical(self, tmp_path):
        config = synthetic_config(tmp_path)
        first = run_preprocess(config, "synth-a")
        dataset_bytes = first.dataset_path.read_bytes()
        manifest_bytes = first.manifest_path.read_bytes()
        second = run_preprocess(config, "synth-a")
        assert second.dataset_path.read_bytes() == dataset_bytes
        assert second.manifest_path.read_bytes() == manifest_bytes

    def test_labels_listed_in_canonical_order(self, tmp_path):
        config = synthetic_config(tmp_path)
        manifest = run_preprocess(config, "synth-a").manifest
        present = set(manifest["label_counts"])
        assert set(manifest["labels"]) == present
        assert sum(manifest["label_counts"].values()) == manifest["counts"]["windows"]

    def test_raw_id_feature_mode(self, tmp_path):
        config = synthetic_config(tmp_path, classifier="baseline_ids")
        result = run_preprocess(config, "synth-a")
        assert result.dataset_path.name == "synth-a_raw_ids_seed7.jsonl"
        assert result.manifest["feature_mode"] == "raw_ids"
        rows = load_dataset(result.dataset_path.read_text(encoding="utf-8"))
        for row in rows[:20]:
            for slots in row.sentences:
                assert len(slots) == 1
                assert re.fullmatch(r"[A-Z]+\d+ \S+", slots[0])
            assert row.lags[0] is None
            assert all(isinstance(lag, int) and lag >= 0 for lag in row.lags[1:])

    def test_llm_variant_triplicates_and_hashes_cache(self, tmp_path, home_a):
        cache_path = tmp_path / "cache.jsonl"
        from tdost.augment import load_cache

        cache = load_cache("")
        augment(
            home_a.log.events, home_a.layout, cache,
            offline=False, client=FakeChatClient(seed=3),
        )
        cache_path.write_text(serialize_cache(cache), encoding="utf-8")
        config = synthetic_config(tmp_path, variant="llm", cache=str(cache_path))
        plain = run_preprocess(synthetic_config(tmp_path), "synth-a")
        result = run_preprocess(config, "synth-a")
        assert result.manifest["counts"]["windows"] == 3 * plain.manifest["counts"]["windows"]
        assert result.manifest["counts"]["groups"] == plain.manifest["counts"]["windows"]
        assert result.manifest["inputs"]["cache"] == sha256_text(
            cache_path.read_text(encoding="utf-8")
        )

    def test_skip_unknown_sensors(self, tmp_path, home_a):
        log_path = tmp_path / "a.txt"
        lines = serialize_log(home_a.log).splitlines(keepends=True)
        foreign = lines[50].split(" ")
        foreign[2] = "ZZ999"
        lines.insert(51, " ".join(foreign))
        log_path.write_text("".join(lines), encoding="utf-8")
        layout_path = tmp_path / "a.layout.json"
        layout_path.write_text(serialize_layout(home_a.layout), encoding="utf-8")
        map_path = tmp_path / "a.map.json"
        map_path.write_text(serialize_activity_map(home_a.activity_map), encoding="utf-8")
        homes = {
            "synth-a": {
                "log": str(log_path),
                "layout": str(layout_path),
                "activity_map": str(map_path),
            }
        }
        strict = synthetic_config(tmp_path, homes=homes)
        with pytest.raises(DataError):
            run_preprocess(strict, "synth-a")
        tolerant = synthetic_config(tmp_path, homes=homes, skip_unknown_sensors=True)
        result = run_preprocess(tolerant, "synth-a")
        assert result.manifest["counts"]["dropped_unknown_sensors"] == 1
        assert result.manifest["counts"]["events"] == len(home_a.log.events)


@pytest.fixture(scope="module")
def rows(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("vecs")
    config = synthetic_config(tmp)
    result = run_preprocess(config, "synth-a")
    return load_dataset(result.dataset_path.read_text(encoding="utf-8"))[:40]


class TestWindowVectors:
    def test_hash_vectors_are_unit_norm(self, rows):
        spec = EmbeddingSpec(dimension=128, seed=4)
        vectors = window_vectors(rows, spec)
        assert vectors.shape == (len(rows), 128)
        assert np.allclose(np.linalg.norm(vectors, axis=1), 1.0, atol=1e-9)

    def test_external_matrix_matches_hash_path(self, rows, tmp_path):
        """A matrix holding the same per-trigger embeddings pools identically."""
        spec = EmbeddingSpec(dimension=64, seed=4)
        stacked = np.stack(
            [embed_hash(s[0], 64, 4) for row in rows for s in row.sentences]
        )
        matrix_path = tmp_path / "vectors.tdem"
        write_matrix(matrix_path, stacked)
        external = EmbeddingSpec(kind="external", dimension=64, matrix_path=str(matrix_path))
        got = window_vectors(rows, external)
        want = window_vectors(rows, spec)
        assert np.allclose(got, want, atol=1e-6)

    def test_external_matrix_row_count_checked(self, rows, tmp_path):
        matrix_path = tmp_path / "short.tdem"
        write_matrix(matrix_path, np.ones((3, 64), dtype=np.float32))
        spec = EmbeddingSpec(kind="external", dimension=64, matrix_path=str(matrix_path))
        with pytest.raises(DataError, match="rows"):
            window_vectors(rows, spec)

    def test_external_matrix_dimension_checked(self, rows, tmp_path):
        total = sum(len(r.sentences) for r in rows)
        matrix_path = tmp_path / "thin.tdem"
        write_matrix(matrix_path, np.ones((total, 32), dtype=np.float32))
        spec = EmbeddingSpec(kind="external", dimension=64, matrix_path=str(matrix_path))
        with pytest.raises(DataError, match="dimension"):
            window_vectors(rows, spec)


class TestNearestCentroidTransfer:
    def test_paired_homes_smoke(self, tmp_path):
        config = synthetic_config(tmp_path)
        source = run_preprocess(config, "synth-a")
        target = run_preprocess(config, "synth-b")
        source_rows = load_dataset(source.dataset_path.read_text(encoding="utf-8"))
        target_rows = load_dataset(target.dataset_path.read_text(encoding="utf-8"))
        labels = tuple(sorted({r.label for r in source_rows} & {r.label for r in target_rows}))
        metrics = nearest_centroid_transfer(source_rows, target_rows, labels, config.embedding)
        assert len(metrics) == 3
        for fold in metrics:
            assert 0.0 <= fold.acc <= 1.0
            assert 0.0 <= fold.wf1 <= 1.0

    def test_empty_label_intersection_rejected(self, tmp_path):
        config = synthetic_config(tmp_path)
        source = run_preprocess(config, "synth-a")
        rows = load_dataset(source.dataset_path.read_text(encoding="utf-8"))
        with pytest.raises(DataError, match="shared labels"):
            nearest_centroid_transfer(rows, rows, ("NoSuchLabel",), config.embedding)


def write_stub_trainer(tmp_path, body: str):
    """A tiny trainer executable: argv is (source, target, metrics, classifier, seed)."""
    script = tmp_path / "stub_trainer.py"
    script.write_text(
        "import json, sys\n"
        "source, target, metrics, classifier, seed = sys.argv[1:6]\n"
        + body,
        encoding="utf-8",
    )
    return (
        sys.executable, str(script),
        "{source}", "{target}", "{metrics}", "{classifier}", "{seed}",
    )


class TestRunTrainer:
    def test_success_substitutes_placeholders(self, tmp_path):
        command = write_stub_trainer(
            tmp_path,
            "json.dump({'folds': [{'acc': 0.5, 'wf1': 0.4}],\n"
            "           'argv': sys.argv[1:6]}, open(metrics, 'w'))\n",
        )
        metrics_path = tmp_path / "metrics.json"
        doc = run_trainer(
            command,
            source_dataset=tmp_path / "s.jsonl",
            target_dataset=tmp_path / "t.jsonl",
            metrics_path=metrics_path,
            classifier="bilstm",
            seed=42,
        )
        assert doc["folds"] == [{"acc": 0.5, "wf1": 0.4}]
        assert doc["argv"] == [
            str(tmp_path / "s.jsonl"),
            str(tmp_path / "t.jsonl"),
            str(metrics_path),
            "bilstm",
            "42",
        ]

    def test_nonzero_exit_raises(self, tmp_path):
        command = write_stub_trainer(
            tmp_path, "print('cuda out of memory', file=sys.stderr)\nsys.exit(3)\n"
        )
        with pytest.raises(ServiceError, match="exited with 3: cuda out of memory"):
            run_trainer(command, tmp_path / "s", tmp_path / "t",
                        tmp_path / "m.json", "bilstm", 0)

    def test_missing_metrics_file_raises(self, tmp_path):
        command = write_stub_trainer(tmp_path, "pass\n")
        with pytest.raises(ServiceError, match="wrote no metrics file"):
            run_trainer(command, tmp_path / "s", tmp_path / "t",
                        tmp_path / "m.json", "bilstm", 0)

    @pytest.mark.parametrize(
        "payload",
        [
            "{'folds': []}",
            "{'folds': [{'acc': 0.5}]}",
            "{'acc': 0.5}",
        ],
    )
    def test_off_shape_metrics_raise(self, tmp_path, payload):
        command = write_stub_trainer(
            tmp_path, f"json.dump({payload}, open(metrics, 'w'))\n"
        )
        with pytest.raises(ServiceError, match="folds with acc and wf1"):
            run_trainer(command, tmp_path / "s", tmp_path / "t",
                        tmp_path / "m.json", "bilstm", 0)

    def test_unlaunchable_command_raises(self, tmp_path):
        with pytest.raises(ServiceError, match="could not launch"):
            run_trainer(
                (str(tmp_path / "no_such_binary"),),
                tmp_path / "s", tmp_path / "t", tmp_path / "m.json", "bilstm", 0,
            )


class TestRunTransfer:
    def test_features_only_report(self, tmp_path):
        config = synthetic_config(tmp_path)
        report = run_transfer(config)
        assert len(report.runs) == 1
        run = report.runs[0]
        assert run.source == "synth-a" and run.target == "synth-b"
        assert run.classifier == "nearest_centroid"
        assert run.variant == "basic"
        assert len(run.folds) == 3
        assert run.n_train > 0 and run.n_test > 0
        assert run.target_optimizer_steps == 0
        assert set(report.manifests) == {"synth-a", "synth-b"}
        doc = json.loads(report.to_json())
        assert {"config", "runs", "manifests"} <= doc.keys()
        summary = doc["runs"][0]
        for key in ("acc_mean", "acc_std", "wf1_mean", "wf1_std", "labels"):
            assert key in summary

    def test_within_home_run(self, tmp_path):
        config = synthetic_config(tmp_path, targets=["synth-a"])
        report = run_transfer(config, allow_within_home=True)
        assert report.runs[0].target == "synth-a"
        assert report.runs[0].n_test > 0

    def test_within_home_rejected_when_not_allowed(self, tmp_path):
        config = synthetic_config(tmp_path, targets=["synth-a"])
        with pytest.raises(ConfigError, match="also a target"):
            run_transfer(config, allow_within_home=False)

    def test_baseline_ids_variant_recorded(self, tmp_path):
        config = synthetic_config(tmp_path, classifier="baseline_ids")
        report = run_transfer(config)
        assert report.runs[0].variant == "raw_ids"
        assert report.runs[0].classifier == "baseline_ids"

    def test_trainer_backed_run(self, tmp_path):
        command = write_stub_trainer(
            tmp_path,
            "json.dump({'folds': [{'acc': 0.7, 'wf1': 0.6}] * 3,\n"
            "           'target_optimizer_steps': 0}, open(metrics, 'w'))\n",
        )
        config = synthetic_config(
            tmp_path, classifier="bilstm", trainer_command=list(command)
        )
        report = run_transfer(config)
        run = report.runs[0]
        assert run.classifier == "bilstm"
        assert [f.acc for f in run.folds] == [0.7, 0.7, 0.7]
        metrics_file = tmp_path / "out" / "trainer_synth-a_to_synth-b_bilstm.json"
        assert metrics_file.exists()

    def test_trainer_failure_propagates(self, tmp_path):
        command = write_stub_trainer(tmp_path, "sys.exit(1)\n")
        config = synthetic_config(
            tmp_path, classifier="bilstm", trainer_command=list(command)
        )
        with pytest.raises(ServiceError, match="exited with 1"):
            run_transfer(config)
