"""MRC2014 map reading and writing."""

from __future__ import annotations

import os
import re
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from ..grid import Volume

HEADER_SIZE = 1024
MAP_ID = b"MAP "
STAMP_LITTLE = b"\x44\x44\x00\x00"
STAMP_LITTLE_ALT = b"\x44\x41\x00\x00"
STAMP_BIG = b"\x11\x11\x00\x00"

MODE_DTYPES = {0: "i1", 1: "i2", 2: "f4", 6: "u2"}

FILL_LABEL = "fill_value="
STEP_LABEL = "step="

_FIELDS = [
    ("nx", "i4"), ("ny", "i4"), ("nz", "i4"), ("mode", "i4"),
    ("nxstart", "i4"), ("nystart", "i4"), ("nzstart", "i4"),
    ("mx", "i4"), ("my", "i4"), ("mz", "i4"),
    ("cella", "f4", (3,)), ("cellb", "f4", (3,)),
    ("mapc", "i4"), ("mapr", "i4"), ("maps", "i4"),
    ("dmin", "f4"), ("dmax", "f4"), ("dmean", "f4"),
    ("ispg", "i4"), ("nsymbt", "i4"),
    ("extra1", "V8"), ("exttyp", "S4"), ("nversion", "i4"), ("extra2", "V84"),
    ("origin", "f4", (3,)), ("map", "S4"), ("machst", "V4"),
    ("rms", "f4"), ("nlabl", "i4"), ("label", "S80", (10,)),
]


def header_dtype(byteorder: str = "<") -> np.dtype:
    fields = []
    for f in _FIELDS:
        kind = f[1]
        if kind[0] in "if":
            kind = byteorder + kind
        fields.append((f[0], kind) + tuple(f[2:]))
    dt = np.dtype(fields)
    assert dt.itemsize == HEADER_SIZE
    return dt


class MrcError(ValueError):
    """Base class for malformed MRC input."""


class BadMagicError(MrcError):
    pass


class UnsupportedModeError(MrcError):
    pass


class TruncatedError(MrcError):
    pass


@dataclass(frozen=True)
class MrcHeader:
    nx: int
    ny: int
    nz: int
    mode: int
    cell: tuple[float, float, float]
    axis_order: tuple[int, int, int]
    origin: tuple[float, float, float]
    byteorder: str
    nsymbt: int
    labels: tuple[str, ...]

    @property
    def fill_value(self) -> float | None:
        for lab in self.labels:
            m = re.search(re.escape(FILL_LABEL) + r"(\S+)", lab)
            if m:
                return float(m.group(1))
        return None


def _byteorder_from(raw: bytes) -> str:
    stamp = raw[212:216]
    if stamp[:1] == STAMP_BIG[:1]:
        return ">"
    if stamp[:1] == STAMP_LITTLE[:1]:
        return "<"
    # no usable stamp: fall back to whichever order gives a sane mode word
    mode_le = int.from_bytes(raw[12:16], "little")
    return "<" if 0 <= mode_le < 256 else ">"


def read_mrc_with_header(path: str | os.PathLike) -> tuple[Volume, MrcHeader]:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < HEADER_SIZE:
        raise TruncatedError(f"{path}: truncated header ({len(raw)} bytes)")
    if raw[208:212] != MAP_ID:
        raise BadMagicError(f"{path}: bad map id {raw[208:212]!r}, expected {MAP_ID!r}")
    order = _byteorder_from(raw)
    h = np.frombuffer(raw[:HEADER_SIZE], dtype=header_dtype(order))[0]
    mode = int(h["mode"])
    if mode not in MODE_DTYPES:
        raise UnsupportedModeError(f"{path}: unsupported mode {mode}")
    nc, nr, ns = int(h["nx"]), int(h["ny"]), int(h["nz"])
    if min(nc, nr, ns) < 1:
        raise MrcError(f"{path}: invalid extents {(nc, nr, ns)}")
    dtype = np.dtype(MODE_DTYPES[mode]).newbyteorder(order)
    start = HEADER_SIZE + max(int(h["nsymbt"]), 0)
    count = nc * nr * ns
    need = start + count * dtype.itemsize
    if len(raw) < need:
        raise TruncatedError(f"{path}: truncated data ({len(raw)} of {need} bytes)")
    data = np.frombuffer(raw, dtype=dtype, count=count, offset=start).reshape(ns, nr, nc)

    # file axes (columns, rows, sections) -> x, y, z
    mapcrs = (int(h["mapc"]), int(h["mapr"]), int(h["maps"]))
    if sorted(mapcrs) != [1, 2, 3]:
        mapcrs = (1, 2, 3)
    # data[s, r, c]; numpy axis for file axis: c -> 2, r -> 1, s -> 0
    file_axis_of = {mapcrs[0]: 2, mapcrs[1]: 1, mapcrs[2]: 0}
    # target layout data[z, y, x]: z is spatial axis 3, y 2, x 1
    data = np.transpose(data, (file_axis_of[3], file_axis_of[2], file_axis_of[1]))
    data = np.ascontiguousarray(data, dtype=np.float64)

    nz_, ny_, nx_ = data.shape
    m = [int(h["mx"]), int(h["my"]), int(h["mz"])]
    ext = [nx_, ny_, nz_]
    cell = tuple(float(c) for c in h["cella"])
    steps = [
        cell[i] / (m[i] if m[i] > 0 else ext[i]) if cell[i] > 0 else 1.0 for i in range(3)
    ]
    labels = tuple(
        lab.decode("ascii", "replace").rstrip("\x00 ") for lab in h["label"][: max(int(h["nlabl"]), 0)]
    )
    active = [s for s, n in zip(steps, ext) if n > 1]
    step = active[0] if active else steps[0]
    if any(abs(s - step) > 1e-3 * step for s in active):
        warnings.warn(f"{path}: anisotropic voxel steps {steps}; using x step {step}", stacklevel=2)
    exact = _exact_step(labels)
    if exact is not None and abs(exact - step) <= 1e-6 * step:
        step = exact
    if nz_ == 1:
        data = data[0]
    header = MrcHeader(
        nx=nx_, ny=ny_, nz=nz_, mode=mode, cell=cell, axis_order=mapcrs,
        origin=tuple(float(o) for o in h["origin"]), byteorder=order,
        nsymbt=int(h["nsymbt"]), labels=labels,
    )
    return Volume(data, step), header


def _exact_step(labels) -> float | None:
    for lab in labels:
        m = re.search(re.escape(STEP_LABEL) + r"(\S+)", lab)
        if m:
            try:
                return float(m.group(1))
            except ValueError:
                return None
    return None


def read_mrc(path: str | os.PathLike) -> Volume:
    """Read a map as a Volume with ``data[z, y, x]`` (2D maps come back 2D)."""
    return read_mrc_with_header(path)[0]


def write_mrc(
    obj,
    path: str | os.PathLike,
    fill_value: float = -1.0e30,
    byteorder: str | None = None,
    labels: tuple[str, ...] = (),
) -> None:
    """Write a Volume or InfoMap as a mode-2 MRC2014 file.

    Unevaluated InfoMap voxels (NaN) are written as ``fill_value``, declared
    in a header label.  The exact float64 step is also kept in a label so a
    round trip restores it bit for bit.
    """
    data = np.asarray(obj.values if hasattr(obj, "values") else obj.data, dtype=np.float64)
    step = float(obj.step)
    labels = list(labels)
    if np.isnan(data).any():
        data = np.where(np.isnan(data), fill_value, data)
        labels.append(f"corrinfo {FILL_LABEL}{fill_value!r}")
    labels.append(f"corrinfo {STEP_LABEL}{step!r}")
    if data.ndim == 1:
        raise ValueError("MRC maps must be 2D or 3D")
    if data.ndim == 2:
        data = data[None]
    order = byteorder or ("<" if sys.byteorder == "little" else ">")
    nz, ny, nx = data.shape
    h = np.zeros((), dtype=header_dtype(order))
    h["nx"], h["ny"], h["nz"] = nx, ny, nz
    h["mode"] = 2
    h["mx"], h["my"], h["mz"] = nx, ny, nz
    h["cella"] = (nx * step, ny * step, nz * step)
    h["cellb"] = (90.0, 90.0, 90.0)
    h["mapc"], h["mapr"], h["maps"] = 1, 2, 3
    f32 = data.astype(np.float32)
    h["dmin"], h["dmax"], h["dmean"] = f32.min(), f32.max(), f32.mean(dtype=np.float64)
    h["rms"] = f32.std(dtype=np.float64)
    h["exttyp"] = b"    "
    h["nversion"] = 20140
    h["map"] = MAP_ID
    h["machst"] = np.frombuffer(STAMP_LITTLE if order == "<" else STAMP_BIG, dtype="V4")[0]
    if len(labels) > 10:
        raise ValueError("at most 10 labels fit in an MRC header")
    h["nlabl"] = len(labels)
    for i, lab in enumerate(labels):
        h["label"][i] = lab.encode("ascii")[:80]
    body = f32.astype(np.dtype("f4").newbyteorder(order)).tobytes()
    try:
        with open(path, "wb") as fh:
            fh.write(h.tobytes())
            fh.write(body)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
