"""Access to data files shipped inside the package."""

from __future__ import annotations

from importlib import resources

from .activities import ActivityMap, load_activity_map
from .errors import ConfigError
from .layouts import HomeLayout, load_layout

LAYOUT_NAMES = ("aruba", "milan", "cairo", "kyoto7")
TEMPLATE_NAMES = ("home_a", "home_b")


def _read(*parts: str) -> str:
    node = resources.files("tdost").joinpath("data")
    for part in parts:
        node = node.joinpath(part)
    try:
        return node.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise ConfigError(f"no packaged data file {'/'.join(parts)!r}") from exc


def builtin_layout(name: str) -> HomeLayout:
    return load_layout(_read("layouts", f"{name}.json"))


def builtin_activity_map(name: str) -> ActivityMap:
    return load_activity_map(_read("activity_maps", f"{name}.json"))


def builtin_template_text(name: str) -> str:
    return _read("templates", f"{name}.json")


def builtin_cache_text(name: str) -> str:
    return _read("caches", f"{name}.jsonl")
