import json

import pytest

from tdost.activities import (
    COMMON_ACTIVITIES,
    ActivityMap,
    common_label_set,
    load_activity_map,
    serialize_activity_map,
)
from tdost.errors import ConfigError, DataError, UnmappedLabelError
from tdost.resources import builtin_activity_map

MAP_NAMES = ("aruba", "milan", "kyoto7", "cairo")


class TestVocabulary:
    def test_twelve_labels_in_fixed_order(self):
        assert COMMON_ACTIVITIES == (
            "Relax", "Cook", "Leave Home", "Enter Home", "Sleep", "Eat",
            "Work", "Bed to Toilet", "Bathing", "Take Medicine",
            "Personal Hygiene", "Other",
        )


class TestBuiltinMaps:
    @pytest.mark.parametrize("name", MAP_NAMES)
    def test_loads(self, name):
        amap = builtin_activity_map(name)
        assert amap.home_id == name
        assert set(amap.image()) <= set(COMMON_ACTIVITIES)

    def test_entry_counts(self):
        counts = {name: len(builtin_activity_map(name).entries) for name in MAP_NAMES}
        assert counts == {"aruba": 12, "milan": 16, "kyoto7": 14, "cairo": 14}

    @pytest.mark.parametrize(
        "home, raw, common",
        [
            ("aruba", "Wash Dishes", "Work"),
            ("aruba", "Resperate", "Other"),
            ("aruba", "Sleeping", "Sleep"),
            ("milan", "Dining Room Activity", "Eat"),
            ("milan", "Watch TV", "Relax"),
            ("milan", "Guest Bathroom", "Bathing"),
            ("milan", "Morning Meds", "Take Medicine"),
            ("kyoto7", "R2 Bed to Toilet", "Bed to Toilet"),
            ("kyoto7", "Wash Bathtub", "Other"),
            ("cairo", "Night Wandering", "Other"),
            ("cairo", "R1 Work in Office", "Work"),
            ("cairo", "Lunch", "Eat"),
        ],
    )
    def test_translation_goldens(self, home, raw, common):
        assert builtin_activity_map(home).translate(raw) == common

    def test_translate_strips_whitespace(self):
        assert builtin_activity_map("aruba").translate(" Sleeping ") == "Sleep"

    def test_unknown_label(self):
        with pytest.raises(UnmappedLabelError, match="Jogging"):
            builtin_activity_map("aruba").translate("Jogging")

    def test_images(self):
        assert builtin_activity_map("aruba").image() == (
            "Relax", "Cook", "Leave Home", "Enter Home", "Sleep", "Eat",
            "Work", "Bed to Toilet", "Other",
        )
        assert builtin_activity_map("cairo").image() == (
            "Leave Home", "Sleep", "Eat", "Work", "Bed to Toilet",
            "Take Medicine", "Other",
        )


class TestCommonLabelSet:
    def test_cairo_kyoto7(self):
        got = common_label_set(
            builtin_activity_map("cairo"), builtin_activity_map("kyoto7")
        )
        assert got == ("Sleep", "Work", "Bed to Toilet", "Other")

    def test_aruba_milan(self):
        got = common_label_set(
            builtin_activity_map("aruba"), builtin_activity_map("milan")
        )
        assert got == (
            "Relax", "Cook", "Leave Home", "Sleep", "Eat", "Work",
            "Bed to Toilet", "Other",
        )

    def test_matches_set_arithmetic_oracle(self):
        maps = [builtin_activity_map(name) for name in MAP_NAMES]
        got = common_label_set(*maps)
        want = set(maps[0].entries.values())
        for amap in maps[1:]:
            want &= set(amap.entries.values())
        assert set(got) == want
        assert list(got) == [l for l in COMMON_ACTIVITIES if l in want]

    def test_single_map_is_its_own_image(self):
        amap = builtin_activity_map("milan")
        assert common_label_set(amap) == amap.image()

    def test_disjoint_images_raise(self):
        a = ActivityMap("a", {"x": "Relax"})
        b = ActivityMap("b", {"y": "Cook"})
        with pytest.raises(ConfigError, match="no shared"):
            common_label_set(a, b)

    def test_no_maps_raise(self):
        with pytest.raises(ConfigError):
            common_label_set()


class TestLoadAndSerialize:
    def test_round_trip(self):
        amap = builtin_activity_map("kyoto7")
        assert load_activity_map(serialize_activity_map(amap)) == amap

    @pytest.mark.parametrize(
        "doc, match",
        [
            ("{bad", "not valid JSON"),
            (json.dumps([1]), "must be an object"),
            (json.dumps({"home_id": "x"}), "must be an object"),
            (json.dumps({"home_id": "", "entries": {"a": "Other"}}), "non-empty string"),
            (json.dumps({"home_id": "x", "entries": {}}), "non-empty object"),
            (json.dumps({"home_id": "x", "entries": {"a": "Jogging"}}), "unknown common label"),
            (json.dumps({"home_id": "x", "entries": {" ": "Other"}}), "bad raw label"),
        ],
    )
    def test_rejects_bad_documents(self, doc, match):
        with pytest.raises(DataError, match=match):
            load_activity_map(doc)
