"""Canonical JSON: sorted keys, 17 significant digits, trailing newline."""
from __future__ import annotations

import json
import math
from importlib import resources
from typing import Any

import numpy as np

from . import __version__


def _scalar(x: Any) -> str:
    if x is None:
        return "null"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        v = float(x)
        if math.isnan(v):
            return '"nan"'
        if math.isinf(v):
            return '"inf"' if v > 0 else '"-inf"'
        return "%.17g" % v
    if isinstance(x, str):
        return json.dumps(x, ensure_ascii=True)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _emit(obj: Any, out: list[str]) -> None:
    if isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj, key=str)):
            if i:
                out.append(",")
            out.append(json.dumps(str(key)))
            out.append(":")
            _emit(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _emit(item, out)
        out.append("]")
    else:
        out.append(_scalar(obj))


def dumps(obj: Any) -> str:
    out: list[str] = []
    _emit(obj, out)
    return "".join(out) + "\n"


def plain(obj: Any) -> Any:
    """The object as parsed back from its canonical text (for schema checks)."""
    return json.loads(dumps(obj))


def manifest(subcommand: str, params: dict, seed: int | None = None, wall_time: float | None = None) -> dict:
    m = {"tool": "negembed", "version": __version__, "subcommand": subcommand, "params": params, "seed": seed}
    if wall_time is not None:
        m["wall_time"] = wall_time
    return m


def load_schema(name: str) -> dict:
    text = resources.files("negembed.schemas").joinpath(f"{name}.schema.json").read_text("utf-8")
    return json.loads(text)


def validate(obj: Any, name: str) -> None:
    import jsonschema

    jsonschema.validate(plain(obj), load_schema(name))
