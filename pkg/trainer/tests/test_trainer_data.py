import json

import pytest

from tdost_trainer.data import (
    DatasetError,
    Window,
    label_order,
    load_manifest,
    load_windows,
    manifest_path_for,
    shared_labels,
    split_fold,
)
from trainer_helpers import make_windows, window_doc


def write_dataset(path, windows):
    path.write_text(
        "".join(json.dumps(window_doc(w)) + "\n" for w in windows),
        encoding="utf-8",
    )


class TestLoadWindows:
    def test_round_trip(self, tmp_path):
        windows = make_windows("a", 7)
        path = tmp_path / "a.jsonl"
        write_dataset(path, windows)
        loaded = load_windows(path)
        assert loaded == windows

    def test_texts_takes_first_slot(self, tmp_path):
        doc = window_doc(make_windows("a", 1)[0])
        doc["sentences"] = [["first", "second", "third"], ["only"]]
        doc["lags"] = [None, 3]
        path = tmp_path / "a.jsonl"
        path.write_text(json.dumps(doc) + "\n", encoding="utf-8")
        assert load_windows(path)[0].texts == ("first", "only")

    def test_blank_lines_are_skipped(self, tmp_path):
        windows = make_windows("a", 2)
        path = tmp_path / "a.jsonl"
        docs = [json.dumps(window_doc(w)) for w in windows]
        path.write_text(docs[0] + "\n\n" + docs[1] + "\n", encoding="utf-8")
        assert len(load_windows(path)) == 2

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetError, match="does not exist"):
            load_windows(tmp_path / "nope.jsonl")

    def test_bad_json_names_line(self, tmp_path):
        path = tmp_path / "a.jsonl"
        write_dataset(path, make_windows("a", 1))
        with path.open("a", encoding="utf-8") as handle:
            handle.write("{not json\n")
        with pytest.raises(DatasetError, match=r"a\.jsonl:2 is not valid JSON"):
            load_windows(path)

    def test_missing_key_is_malformed(self, tmp_path):
        doc = window_doc(make_windows("a", 1)[0])
        del doc["label"]
        path = tmp_path / "a.jsonl"
        path.write_text(json.dumps(doc) + "\n", encoding="utf-8")
        with pytest.raises(DatasetError, match=r"a\.jsonl:1 is malformed"):
            load_windows(path)

    def test_empty_sentences_rejected(self, tmp_path):
        doc = window_doc(make_windows("a", 1)[0])
        doc["sentences"] = []
        doc["lags"] = []
        path = tmp_path / "a.jsonl"
        path.write_text(json.dumps(doc) + "\n", encoding="utf-8")
        with pytest.raises(DatasetError, match="malformed"):
            load_windows(path)

    def test_empty_dataset_rejected(self, tmp_path):
        path = tmp_path / "a.jsonl"
        path.write_text("\n", encoding="utf-8")
        with pytest.raises(DatasetError, match="holds no windows"):
            load_windows(path)


class TestManifest:
    def test_path_swaps_suffix(self):
        assert str(manifest_path_for("out/x_basic_seed1.jsonl")).endswith(
            "x_basic_seed1.manifest.json"
        )

    def test_missing_manifest_is_none(self, tmp_path):
        assert load_manifest(tmp_path / "a.jsonl") is None

    def test_loads_object(self, tmp_path):
        (tmp_path / "a.manifest.json").write_text('{"labels": ["X"]}')
        assert load_manifest(tmp_path / "a.jsonl") == {"labels": ["X"]}

    def test_bad_json(self, tmp_path):
        (tmp_path / "a.manifest.json").write_text("{", encoding="utf-8")
        with pytest.raises(DatasetError, match="not valid JSON"):
            load_manifest(tmp_path / "a.jsonl")

    def test_non_object(self, tmp_path):
        (tmp_path / "a.manifest.json").write_text("[1]", encoding="utf-8")
        with pytest.raises(DatasetError, match="must be an object"):
            load_manifest(tmp_path / "a.jsonl")


class TestLabelOrder:
    def test_manifest_order_wins(self):
        windows = make_windows("a", 6, labels=("Sleep", "Work"))
        manifest = {"labels": ["Work", "Cook", "Sleep"]}
        assert label_order(windows, manifest) == ("Work", "Sleep")

    def test_sorted_without_manifest(self):
        windows = make_windows("a", 6, labels=("Work", "Sleep"))
        assert label_order(windows, None) == ("Sleep", "Work")

    def test_dataset_label_missing_from_manifest(self):
        windows = make_windows("a", 6, labels=("Sleep", "Work"))
        with pytest.raises(DatasetError, match=r"\['Work'\] appear in the dataset"):
            label_order(windows, {"labels": ["Sleep"]})


class TestSharedLabels:
    def test_source_order_kept(self):
        assert shared_labels(("C", "A", "B"), ("B", "C")) == ("C", "B")

    def test_disjoint(self):
        with pytest.raises(DatasetError, match="share no labels"):
            shared_labels(("A",), ("B",))


class TestSplitFold:
    def test_partition(self):
        windows = make_windows("a", 30)
        split = split_fold(windows, 1, ("Sleep", "Work"))
        assert all(w.fold == 1 for w in split.test)
        assert all(w.fold != 1 and w.split == "train" for w in split.train)
        assert all(w.fold != 1 and w.split == "val" for w in split.val)
        ids = {w.window_id for w in split.train + split.val + split.test}
        assert len(ids) == 30

    def test_restricts_to_labels(self):
        windows = make_windows("a", 30, labels=("Sleep", "Work", "Cook"))
        split = split_fold(windows, 0, ("Sleep", "Work"))
        seen = {w.label for w in split.train + split.val + split.test}
        assert seen == {"Sleep", "Work"}

    def test_val_falls_back_to_train(self):
        windows = [w for w in make_windows("a", 30) if w.split == "train"]
        split = split_fold(windows, 0, ("Sleep", "Work"))
        assert split.val == split.train

    def test_absent_class_aborts(self):
        windows = make_windows("a", 30)
        only_fold0_sleep = [
            w for w in windows if w.label != "Sleep" or w.fold == 0
        ]
        with pytest.raises(
            DatasetError,
            match=r"class 'Sleep' is absent from the train split of fold 0",
        ):
            split_fold(only_fold0_sleep, 0, ("Sleep", "Work"))

    def test_empty_test_fold_aborts(self):
        windows = [w for w in make_windows("a", 30) if w.fold != 2]
        with pytest.raises(DatasetError, match="fold 2 has no test windows"):
            split_fold(windows, 2, ("Sleep", "Work"))


class TestExportedShape:
    """The real exporter's files satisfy the same contract."""

    def test_loads_and_orders(self, exported_pair):
        windows = load_windows(exported_pair["source"])
        assert len(windows) > 50
        assert all(w.home == "synth-a" for w in windows)
        manifest = load_manifest(exported_pair["source"])
        order = label_order(windows, manifest)
        assert set(order) == {w.label for w in windows}
        assert list(order) == [l for l in manifest["labels"] if l in set(order)]

    def test_folds_cover_all_three(self, exported_pair):
        windows = load_windows(exported_pair["target"])
        assert {w.fold for w in windows} == {0, 1, 2}
