"""Turn numbers, clock times and lags into the English used in trigger sentences."""

from __future__ import annotations

import datetime as dt
import math

MAX_INTEGER = 10**6

_UNITS = (
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
    "nine", "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
    "sixteen", "seventeen", "eighteen", "nineteen",
)
_TENS = (
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy",
    "eighty", "ninety",
)

_WEEKDAYS = (
    "Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday",
    "Sunday",
)

# Half-open [start, end) hour bins covering the whole day.
PERIOD_BINS = (
    ("Night", 0, 5),
    ("Early Morning", 5, 8),
    ("Morning", 8, 12),
    ("Afternoon", 12, 17),
    ("Evening", 17, 21),
    ("Late Night", 21, 24),
)

PERIOD_NAMES = tuple(name for name, _, _ in PERIOD_BINS)

LAG_PREFIX = "prefix"
LAG_SUFFIX = "suffix"


def _small_words(n: int) -> str:
    """Words for 0..99, hyphenating tens-units compounds."""
    if n < 20:
        return _UNITS[n]
    tens, units = divmod(n, 10)
    if units == 0:
        return _TENS[tens]
    return f"{_TENS[tens]}-{_UNITS[units]}"


def _integer_words(n: int) -> str:
    if n < 100:
        return _small_words(n)
    if n < 1000:
        hundreds, rest = divmod(n, 100)
        head = f"{_UNITS[hundreds]} hundred"
        return head if rest == 0 else f"{head} and {_small_words(rest)}"
    if n < MAX_INTEGER:
        thousands, rest = divmod(n, 1000)
        head = f"{_integer_words(thousands)} thousand"
        if rest == 0:
            return head
        # "and" joins only a sub-hundred remainder: "one thousand and five"
        # but "one thousand two hundred".
        joiner = " and " if rest < 100 else " "
        return f"{head}{joiner}{_integer_words(rest)}"
    return "one million"


def number_to_words(value: int | float | str) -> str:
    """English words for a non-negative number.

    Integers are supported up to one million; anything with a fractional
    part is read digit-wise after "point". String input preserves the
    source digits of the fractional part (minus trailing zeros).
    """
    text = _canonical_number_text(value)
    if "." in text:
        int_part, frac = text.split(".", 1)
        frac = frac.rstrip("0")
    else:
        int_part, frac = text, ""
    n = int(int_part) if int_part else 0
    if n > MAX_INTEGER:
        raise ValueError(f"integer out of range: {n}")
    words = _integer_words(n)
    if frac:
        digits = " ".join(_UNITS[int(d)] for d in frac)
        words = f"{words} point {digits}"
    return words


def _canonical_number_text(value: int | float | str) -> str:
    if isinstance(value, bool):
        raise TypeError("bool is not a number value")
    if isinstance(value, int):
        if value < 0:
            raise ValueError(f"negative number: {value}")
        return str(value)
    if isinstance(value, float):
        if value < 0:
            raise ValueError(f"negative number: {value}")
        return repr(value)
    text = value.strip()
    if text.startswith("+"):
        text = text[1:]
    if not text or text.startswith("-"):
        raise ValueError(f"not a non-negative number: {value!r}")
    int_part, _, frac = text.partition(".")
    if not (int_part + frac).isdigit() or (not int_part and not frac):
        raise ValueError(f"not a number: {value!r}")
    return text


def _unit_word(n: int, singular: str) -> str:
    return singular if n == 1 else f"{singular}s"


def clock_to_words(t: dt.time) -> str:
    """12-hour clock phrase: "at seven hours thirty minutes AM".

    Minutes are omitted when zero; exactly noon reads "at twelve hours"
    with no meridiem. Seconds never appear.
    """
    hour24, minute = t.hour, t.minute
    if hour24 == 12 and minute == 0:
        return "at twelve hours"
    meridiem = "AM" if hour24 < 12 else "PM"
    hour12 = hour24 % 12
    if hour12 == 0:
        hour12 = 12
    phrase = f"at {_integer_words(hour12)} {_unit_word(hour12, 'hour')}"
    if minute:
        phrase += f" {_integer_words(minute)} {_unit_word(minute, 'minute')}"
    return f"{phrase} {meridiem}"


def lag_phrase(seconds: int | float, position: str = LAG_PREFIX) -> str:
    """Relative-time clause for a non-head trigger.

    Prefix form leads the sentence ("After seven seconds, "); suffix form
    trails it (" seven seconds later"). Fractional lags are floored,
    negative ones clamped to zero.
    """
    n = max(0, math.floor(seconds))
    words = _integer_words(n)
    unit = _unit_word(n, "second")
    if position == LAG_PREFIX:
        return f"After {words} {unit}, "
    if position == LAG_SUFFIX:
        return f" {words} {unit} later"
    raise ValueError(f"unknown lag position: {position!r}")


def period_of_day(t: dt.time) -> str:
    """Day-period name for a clock time, from fixed half-open hour bins."""
    for name, start, end in PERIOD_BINS:
        if start <= t.hour < end:
            return name
    raise ValueError(f"hour out of range: {t.hour}")  # pragma: no cover


def weekday_name(d: dt.date) -> str:
    return _WEEKDAYS[d.weekday()]
