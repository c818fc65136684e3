# utils.py - Shared errors, number formatting and timing helpers
import re
import time
from contextlib import contextmanager
from datetime import timedelta
from typing import Any, Dict, Iterator

import humanize

from logging_system import log_performance


class ToolkitError(Exception):
    """Base error; `reason` is the machine-readable tag printed by the CLI"""

    exit_code = 1

    def __init__(self, message: str = "", reason: str = None):
        super().__init__(message)
        self.reason = reason or type(self).__name__


class ValidationError(ToolkitError):
    """Bad input: arguments, parameters or preconditions"""

    exit_code = 2


class NumericalError(ToolkitError):
    """A computation could not meet its accuracy contract"""

    exit_code = 1


_COMPLEX_RE = re.compile(r'^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?([+-](\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?[ij])?$')


def parse_complex(text: str) -> complex:
    """Parse `a`, `a+bi`, `a-bj` or `bi` into a complex number."""
    cleaned = str(text).strip().replace(" ", "")
    if not cleaned:
        raise ValueError("empty complex literal")
    if cleaned[-1] in "ij" and _COMPLEX_RE.match(cleaned) is None:
        # Pure imaginary literal such as "2i"
        return complex(0.0, float(cleaned[:-1] or "1"))
    if _COMPLEX_RE.match(cleaned) is None:
        raise ValueError(f"not a complex literal: {text!r}")
    return complex(cleaned.replace("i", "j"))


def format_float(value: float) -> str:
    """17 significant digits, enough for a lossless round trip."""
    return f"{float(value):.17g}"


def format_complex(value: complex) -> str:
    value = complex(value)
    sign = "-" if value.imag < 0 else "+"
    return f"{format_float(value.real)}{sign}{format_float(abs(value.imag))}i"


def complex_to_json(value: complex) -> Dict[str, float]:
    value = complex(value)
    return {"re": float(value.real), "im": float(value.imag)}


def complex_from_json(data: Any) -> complex:
    if isinstance(data, dict):
        return complex(float(data["re"]), float(data.get("im", 0.0)))
    return complex(data)


def format_duration(seconds: float) -> str:
    """Human readable wall time for text output."""
    if seconds < 1:
        return f"{seconds * 1000:.0f} ms"
    return humanize.precisedelta(timedelta(seconds=seconds), minimum_unit="milliseconds", format="%0.1f")


def format_count(count: int) -> str:
    return humanize.intcomma(int(count))


@contextmanager
def timed(operation: str, **details) -> Iterator[Dict[str, Any]]:
    """Time a block and send the duration to the performance log.

    The yielded dict can be filled with extra details; `duration` is set on exit.
    """
    info: Dict[str, Any] = dict(details)
    start_time = time.perf_counter()
    try:
        yield info
    finally:
        info["duration"] = time.perf_counter() - start_time
        log_performance(operation, info["duration"], {k: v for k, v in info.items() if k != "duration"})
