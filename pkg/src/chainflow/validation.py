"""Input validation helpers used at every public entry point."""
from __future__ import annotations

import os
from pathlib import Path

from .instance import Instance, instance_from_dict, load_instance


def check_instance(obj):
    """Coerce ``obj`` to an :class:`Instance`.

    Accepts an Instance, a parsed JSON document (dict), JSON text, or a path to
    an instance file.
    """
    if isinstance(obj, Instance):
        return obj
    if isinstance(obj, dict):
        return instance_from_dict(obj)
    if isinstance(obj, bytes):
        obj = obj.decode()
    if isinstance(obj, str) and obj.lstrip().startswith("{"):
        return load_instance(obj)
    if isinstance(obj, (str, os.PathLike)):
        return load_instance(Path(obj).read_text())
    raise TypeError(f"cannot interpret {type(obj).__name__} as an instance")


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return value


def is_power_of_two(x):
    return isinstance(x, int) and x > 0 and x & (x - 1) == 0

