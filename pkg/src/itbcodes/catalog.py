"""Bundled code definitions and reference curves, plus code-record loading."""

from __future__ import annotations

import csv
import json
from importlib import resources
from pathlib import Path
from typing import Any

from .code import CodeError, CssCode, code_from_strings

_DATA = resources.files("itbcodes") / "data"

ALIASES = {
    "bb72": "bb_72_12_6",
    "bb144": "bb_144_12_12",
}


def list_codes() -> list[str]:
    return sorted(p.name[:-5] for p in (_DATA / "codes").iterdir() if p.name.endswith(".json"))


def _bundled_name(ref: str) -> str:
    stem = Path(ref).name
    if stem.endswith(".json"):
        stem = stem[:-5]
    stem = ALIASES.get(stem.lower(), stem)
    return stem


def load_record(ref: str | Path) -> dict[str, Any]:
    """A code record from a file path, or a bundled code by name.

    ``table1/84_6_10.json``, ``84_6_10.json`` and ``84_6_10`` all resolve to
    the bundled [[84,6,10]] record when no such file exists.
    """
    path = Path(ref)
    if path.is_file():
        with open(path) as fh:
            rec = json.load(fh)
        # construct --out writes {"code": record, ...}
        return rec.get("code", rec)
    name = _bundled_name(str(ref))
    res = _DATA / "codes" / f"{name}.json"
    if not res.is_file():
        raise CodeError(f"no code file or bundled code named {ref!r} (bundled: {', '.join(list_codes())})")
    return json.loads(res.read_text())


def code_from_record(rec: dict[str, Any]) -> CssCode:
    for key in ("torus", "a"):
        if key not in rec:
            raise CodeError(f"code record lacks {key!r}")
    torus = ",".join(str(x) for x in rec["torus"])
    b = None if rec.get("self_dual") and not rec.get("b") else rec.get("b")
    return code_from_strings(torus, rec["a"], b, name=rec.get("name"))


def load_code(ref: str | Path) -> CssCode:
    rec = load_record(ref)
    code = code_from_record(rec)
    for key in ("n", "k"):
        if key in rec and rec[key] != getattr(code, key):
            raise CodeError(f"record says {key}={rec[key]} but construction gives {getattr(code, key)}")
    return code


def reference_curve(name: str, kind: str = "curve") -> list[tuple[float, ...]]:
    """Published curve samples (``kind='curve'``: p, p_L) or markers (p, p_L, err)."""
    res = _DATA / "reference_curves" / f"{_bundled_name(name)}_{kind}.csv"
    if not res.is_file():
        raise KeyError(f"no reference {kind} for {name!r}")
    with res.open() as fh:
        rows = list(csv.reader(fh))
    return [tuple(float(x) for x in row) for row in rows[1:]]


def reference_curve_path(name: str, kind: str = "curve") -> Path:
    return Path(str(_DATA / "reference_curves" / f"{_bundled_name(name)}_{kind}.csv"))


def schema(name: str) -> dict[str, Any]:
    return json.loads((_DATA / "schemas" / f"{name}.schema.json").read_text())


__all__ = [
    "code_from_record",
    "list_codes",
    "load_code",
    "load_record",
    "reference_curve",
    "reference_curve_path",
    "schema",
]
