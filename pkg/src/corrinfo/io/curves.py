"""Curve export: CSV and JSON, lossless at full float64 precision."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from ..metrics import Curve

CSV_COLUMNS = ("shell", "freq_abs", "freq_frac_nyquist", "value", "flags")


@dataclass(frozen=True)
class CurveFile:
    curves: dict[str, Curve]
    dims: tuple[int, ...] | None = None
    step: float | None = None
    params: dict = field(default_factory=dict)

    def __getitem__(self, name: str) -> Curve:
        return self.curves[name]

    @property
    def single(self) -> Curve:
        if len(self.curves) != 1:
            raise ValueError(f"file holds {len(self.curves)} curves")
        return next(iter(self.curves.values()))


def _as_named(curves) -> dict[str, Curve]:
    if isinstance(curves, Curve):
        return {curves.kind: curves}
    if isinstance(curves, Mapping):
        return dict(curves)
    if isinstance(curves, Sequence):
        out = {}
        for i, c in enumerate(curves):
            name = c.kind if c.kind not in out else f"{c.kind}_{i}"
            out[name] = c
        return out
    raise TypeError(f"cannot interpret {type(curves).__name__} as a curve set")


def check_common_axis(named: dict[str, Curve]) -> None:
    if not named:
        raise ValueError("empty curve set")
    items = list(named.items())
    ref_name, ref = items[0]
    for name, c in items[1:]:
        if not ref.same_axis(c) or not math.isclose(ref.nyquist, c.nyquist, rel_tol=1e-9):
            raise ValueError(f"axis mismatch: curve {name!r} is not on the axis of {ref_name!r}")


def _fmt(x: float) -> str:
    # repr of a Python float is the shortest string that round-trips exactly
    return repr(float(x))


def _to_json_number(x: float):
    return float(x) if math.isfinite(x) else repr(float(x))


def _from_json_number(x) -> float:
    return float(x)


def _infer_format(path: Path, fmt: str | None) -> str:
    fmt = fmt or path.suffix.lstrip(".").lower()
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown curve format {fmt!r}; use csv or json")
    return fmt


def write_curves(
    curves,
    path: str | os.PathLike,
    format: str | None = None,
    dims: Sequence[int] | None = None,
    step: float | None = None,
    params: dict | None = None,
) -> Path:
    """Write one curve or a named set sharing a common shell axis.

    A single curve uses the columns ``shell,freq_abs,freq_frac_nyquist,value,flags``;
    several curves get a leading ``curve`` column.  Nothing is written when
    the set is empty or the axes differ.
    """
    named = _as_named(curves)
    check_common_axis(named)
    path = Path(path)
    fmt = _infer_format(path, format)
    ref = next(iter(named.values()))
    meta = {
        "kinds": {name: c.kind for name, c in named.items()},
        "nyquist": float(ref.nyquist),
        "dims": list(dims) if dims is not None else None,
        "step": float(step) if step is not None else None,
        "params": params or {},
    }
    if fmt == "json":
        doc = dict(meta)
        doc["curves"] = {
            name: {
                "kind": c.kind,
                "shell": list(range(c.n_shells)),
                "freq_abs": [float(f) for f in c.freq],
                "freq_frac_nyquist": [float(f) for f in c.freq_frac],
                "value": [_to_json_number(v) for v in c.values],
                "flags": list(c.flags),
            }
            for name, c in named.items()
        }
        path.write_text(json.dumps(doc, indent=1, default=_json_default) + "\n")
        return path

    multi = len(named) > 1
    with open(path, "w", newline="") as fh:
        for key in ("kinds", "nyquist", "dims", "step", "params"):
            fh.write(f"# {key}={json.dumps(meta[key], default=_json_default)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow((("curve",) if multi else ()) + CSV_COLUMNS)
        for name, c in named.items():
            frac = c.freq_frac
            for i in range(c.n_shells):
                row = [i, _fmt(c.freq[i]), _fmt(frac[i]), _fmt(c.values[i]), c.flags[i]]
                w.writerow(([name] if multi else []) + row)
    return path


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def _build(meta: dict, rows: dict[str, dict]) -> CurveFile:
    curves = {}
    for name, r in rows.items():
        shells = r["shell"]
        if list(shells) != sorted(shells) or list(shells) != list(range(len(shells))):
            raise ValueError(f"curve {name!r}: shells must run 0..n-1 in order")
        curves[name] = Curve(
            r.get("kind") or meta["kinds"][name],
            np.array([_from_json_number(v) for v in r["value"]], dtype=np.float64),
            np.array(r["freq_abs"], dtype=np.float64),
            float(meta["nyquist"]),
            tuple(r["flags"]),
        )
    dims = tuple(meta["dims"]) if meta.get("dims") is not None else None
    return CurveFile(curves, dims, meta.get("step"), meta.get("params") or {})


def read_curves(path: str | os.PathLike, format: str | None = None) -> CurveFile:
    path = Path(path)
    fmt = _infer_format(path, format)
    if fmt == "json":
        doc = json.loads(path.read_text())
        return _build(doc, doc["curves"])

    meta: dict = {}
    body: list[str] = []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key.strip()] = json.loads(value)
            else:
                body.append(line)
    reader = csv.DictReader(body)
    multi = reader.fieldnames and reader.fieldnames[0] == "curve"
    expected = (("curve",) if multi else ()) + CSV_COLUMNS
    if tuple(reader.fieldnames or ()) != expected:
        raise ValueError(f"unexpected columns {reader.fieldnames}")
    kinds = meta.get("kinds") or {}
    default_name = next(iter(kinds), "curve")
    rows: dict[str, dict] = {}
    for rec in reader:
        name = rec["curve"] if multi else default_name
        r = rows.setdefault(name, {"shell": [], "freq_abs": [], "value": [], "flags": []})
        r["shell"].append(int(rec["shell"]))
        r["freq_abs"].append(float(rec["freq_abs"]))
        r["value"].append(float(rec["value"]))
        r["flags"].append(rec["flags"])
    meta.setdefault("kinds", {name: "other" for name in rows})
    return _build(meta, rows)
