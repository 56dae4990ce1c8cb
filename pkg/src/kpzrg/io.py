"""Run manifests, CSV/JSON emission, flat binary snapshots, config parsing."""

from __future__ import annotations

import hashlib
import json
import os
import platform
import struct
import subprocess
import time
from typing import Dict, List, Optional

import numpy as np

from . import __version__


def parse_config(text: str) -> dict:
    """Flat `a.b = value` key/value text; values are ints, floats, strings
    or comma-separated lists thereof.  Lines starting with # are comments."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key] = _parse_value(val)
    return out


def _parse_value(val: str):
    if "," in val:
        return [_parse_value(v.strip()) for v in val.split(",") if v.strip()]
    for conv in (int, float):
        try:
            return conv(val)
        except ValueError:
            pass
    if val.lower() in ("true", "false"):
        return val.lower() == "true"
    return val.strip("\"'")


def load_config(path: str) -> dict:
    with open(path) as fh:
        return parse_config(fh.read())


def write_manifest(out_dir: str, command: str, config: dict, seeds, outputs: List[str],
                   started: float) -> str:
    manifest = {
        "command": command,
        "config": config,
        "seeds": seeds,
        "versions": {
            "package": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "git": _git_describe(),
        },
        "elapsed_seconds": round(time.time() - started, 3),
        "outputs": outputs,
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _git_describe() -> Optional[str]:
    try:
        return subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True, text=True, timeout=5,
            cwd=os.path.dirname(os.path.abspath(__file__)),
        ).stdout.strip() or None
    except Exception:
        return None


def write_csv(path: str, header: List[str], rows: List[dict]) -> str:
    """Byte-stable CSV: fixed column order, repr-style float formatting."""
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row.get(col, "")) for col in header) + "\n")
    return path


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def write_json(path: str, obj) -> str:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    return path


_MAGIC = b"KPZRGB01"


def save_field(path: str, arr: np.ndarray) -> str:
    """Flat binary snapshot: magic, ndim, dims (int64), dtype string, payload."""
    arr = np.ascontiguousarray(arr)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<q", arr.ndim))
        for d in arr.shape:
            fh.write(struct.pack("<q", d))
        dt = arr.dtype.str.encode()
        fh.write(struct.pack("<q", len(dt)))
        fh.write(dt)
        fh.write(arr.tobytes(order="C"))
    return path


def load_field(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        if fh.read(8) != _MAGIC:
            raise ValueError("not a field snapshot")
        (ndim,) = struct.unpack("<q", fh.read(8))
        shape = tuple(struct.unpack("<q", fh.read(8))[0] for _ in range(ndim))
        (dlen,) = struct.unpack("<q", fh.read(8))
        dtype = np.dtype(fh.read(dlen).decode())
        data = np.frombuffer(fh.read(), dtype=dtype)
    return data.reshape(shape)
