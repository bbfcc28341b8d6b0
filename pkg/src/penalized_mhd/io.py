"""Output files: snapshots, CSV tables and JSON summaries.

Snapshot layout: a UTF-8 text header of ``key: value`` lines that starts
with the format tag and ends with a line ``END``, followed by the raw
little-endian float64 arrays ``rho``, ``m``, ``B`` in C order.  The
header lists each array's shape and embeds the effective configuration.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

SNAPSHOT_TAG = "PMHD-SNAPSHOT v1"
CSV_TAG = "PMHD-CSV v1"
JSON_TAG = "PMHD-JSON v1"

_ARRAYS = ("rho", "m", "B")


class FormatError(ValueError):
    pass


def snapshot_name(t: float) -> str:
    return f"snapshot_{t:.6f}.bin"


def write_snapshot(path, state, config_echo: dict | None = None) -> Path:
    path = Path(path)
    g = state.grid
    header = [
        SNAPSHOT_TAG,
        f"t: {state.t!r}",
        f"step: {state.step_count}",
        f"d: {g.d}",
        f"n: {g.n}",
        f"L: {g.L!r}",
        "dtype: <f8",
    ]
    for name in _ARRAYS:
        shape = getattr(state, name).shape
        header.append(f"shape_{name}: {' '.join(str(s) for s in shape)}")
    header.append(f"config: {json.dumps(config_echo or {}, sort_keys=True)}")
    header.append("END")
    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode())
        for name in _ARRAYS:
            fh.write(np.ascontiguousarray(getattr(state, name), dtype="<f8").tobytes())
    return path


def read_snapshot(path) -> dict:
    """Return the header fields plus the arrays ``rho``, ``m`` and ``B``."""
    raw = Path(path).read_bytes()
    end = raw.find(b"\nEND\n")
    if end < 0:
        raise FormatError(f"{path}: missing header terminator")
    lines = raw[:end].decode().split("\n")
    if lines[0] != SNAPSHOT_TAG:
        raise FormatError(f"{path}: unknown format tag {lines[0]!r}")
    head = {}
    for line in lines[1:]:
        key, _, value = line.partition(": ")
        head[key] = value
    out = {
        "t": float(head["t"]), "step": int(head["step"]), "d": int(head["d"]),
        "n": int(head["n"]), "L": float(head["L"]), "config": json.loads(head["config"]),
    }
    offset = end + len(b"\nEND\n")
    for name in _ARRAYS:
        shape = tuple(int(s) for s in head[f"shape_{name}"].split())
        count = int(np.prod(shape))
        arr = np.frombuffer(raw, dtype="<f8", count=count, offset=offset).reshape(shape)
        out[name] = arr.copy()
        offset += 8 * count
    if offset != len(raw):
        raise FormatError(f"{path}: {len(raw) - offset} trailing bytes")
    return out


def load_state(path, model):
    from .solver.model import State

    snap = read_snapshot(path)
    if snap["n"] != model.grid.n or snap["d"] != model.grid.d:
        raise FormatError(f"{path}: grid {snap['d']}D n={snap['n']} does not match the model")
    return State(model, snap["rho"], snap["m"], snap["B"], snap["t"], snap["step"])


def list_snapshots(directory) -> list[Path]:
    paths = list(Path(directory).glob("snapshot_*.bin"))
    return sorted(paths, key=lambda p: read_snapshot_time(p))


def read_snapshot_time(path) -> float:
    with open(path, "rb") as fh:
        fh.readline()
        line = fh.readline().decode().strip()
    if not line.startswith("t: "):
        raise FormatError(f"{path}: malformed header")
    return float(line[3:])


def _cell(v):
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return v


def write_csv(path, rows: list[dict], config_echo: dict | None = None, columns=None) -> Path:
    """CSV with ``#`` comment lines carrying the format tag and the config echo."""
    path = Path(path)
    if columns is None:
        columns = list(rows[0]) if rows else []
    with open(path, "w", newline="") as fh:
        fh.write(f"# {CSV_TAG}\n")
        fh.write(f"# config: {json.dumps(config_echo or {}, sort_keys=True)}\n")
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow({k: _cell(r.get(k, "")) for k in columns})
    return path


def read_csv(path) -> tuple[list[dict], dict]:
    with open(path) as fh:
        tag = fh.readline().strip()
        if tag != f"# {CSV_TAG}":
            raise FormatError(f"{path}: unknown format tag {tag!r}")
        cfg = json.loads(fh.readline().strip()[len("# config: "):])
        rows = list(csv.DictReader(fh))
    return rows, cfg


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if not math.isfinite(v) else v
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, payload: dict, config_echo: dict | None = None) -> Path:
    path = Path(path)
    doc = {"format": JSON_TAG, "config": config_echo or {}}
    doc.update(payload)
    path.write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
    return path


def write_report(path, lines: list[str], config_echo: dict | None = None) -> Path:
    path = Path(path)
    body = list(lines) + ["", "effective configuration:", json.dumps(config_echo or {}, indent=2, sort_keys=True)]
    path.write_text("\n".join(body) + "\n")
    return path
