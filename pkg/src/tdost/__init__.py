"""Textual descriptions of sensor triggers for layout-agnostic activity
recognition: verbalize raw smart-home event logs, window and split them,
and evaluate how well classifiers trained on one home transfer to another.
"""

__version__ = "0.1.0"

from .activities import COMMON_ACTIVITIES, ActivityMap, common_label_set
from .events import EventLog, SensorEvent, parse_line, parse_log
from .layouts import HomeLayout, SensorType, load_layout
from .render import Variant, render_window
from .verbalize import clock_to_words, lag_phrase, number_to_words, period_of_day

__all__ = [
    "__version__",
    "COMMON_ACTIVITIES",
    "ActivityMap",
    "common_label_set",
    "EventLog",
    "SensorEvent",
    "parse_line",
    "parse_log",
    "HomeLayout",
    "SensorType",
    "load_layout",
    "Variant",
    "render_window",
    "clock_to_words",
    "lag_phrase",
    "number_to_words",
    "period_of_day",
]
