"""Plain-text persistence for traces, trajectories and JSON reports.

Every file carries ``format_version`` and ends with a SHA-256 checksum of
the payload that precedes it:

* trace CSV: ``# format_version=1`` line, the column header, one row per
  sample, then ``# sha256=<hex>``;
* trajectory text: ``#`` header lines (``format_version``, ``K``, ``dt``,
  equation parameters, status), one line per snapshot holding ``t`` then
  ``Re c_k, Im c_k`` for ``k = 0..K``, then ``# sha256=<hex>``;
* JSON report: a sorted, indented object whose last key is
  ``"checksum": "sha256:<hex>"``, computed over the same object without
  that key.

Floats are written with ``repr`` so reads reproduce them exactly.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import is_dataclass, asdict
from pathlib import Path

import jsonschema
import numpy as np

from .dynamics import EquationParams, Trajectory
from .experiments import TRACE_COLUMNS, EnergyTrace
from .spectral import SpectralField

FORMAT_VERSION = 1

SUMMARY_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "experiment summary",
    "type": "object",
    "required": ["format_version", "experiment", "checks"],
    "properties": {
        "format_version": {"type": "integer", "minimum": 1},
        "experiment": {"type": "string"},
        "checks": {"type": "object", "additionalProperties": {"type": "boolean"}},
        "checksum": {"type": "string", "pattern": "^sha256:[0-9a-f]{64}$"},
    },
}


class ChecksumError(ValueError):
    pass


def _sha(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _num(x: float) -> str:
    return repr(float(x))


def _write(path, text: str):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _read(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _split_checksum(text: str, path) -> str:
    body, sep, last = text.rstrip("\n").rpartition("\n")
    if not last.startswith("# sha256="):
        raise ChecksumError(f"{path}: missing checksum line")
    payload = body + sep
    if _sha(payload) != last[len("# sha256="):]:
        raise ChecksumError(f"{path}: checksum mismatch")
    return payload


# ---------------------------------------------------------------------------
# traces


def trace_text(trace: EnergyTrace) -> str:
    lines = [f"# format_version={FORMAT_VERSION}", ",".join(TRACE_COLUMNS)]
    cols = list(trace.columns().values())
    for row in zip(*cols):
        lines.append(",".join(_num(x) for x in row))
    payload = "\n".join(lines) + "\n"
    return payload + f"# sha256={_sha(payload)}\n"


def write_trace(trace: EnergyTrace, path) -> Path:
    return _write(path, trace_text(trace))


def read_trace(path) -> dict[str, np.ndarray]:
    """Columns of a trace CSV, after verifying its checksum."""
    payload = _split_checksum(_read(path), path)
    lines = payload.splitlines()
    if not lines or not lines[0].startswith("# format_version="):
        raise ValueError(f"{path}: missing format_version")
    header = lines[1].split(",")
    rows = [[float(x) for x in ln.split(",")] for ln in lines[2:]]
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return {name: data[:, j] for j, name in enumerate(header)}


# ---------------------------------------------------------------------------
# trajectories


def trajectory_text(traj: Trajectory) -> str:
    K = traj.snapshots[0].max_mode if traj.snapshots else (traj.config.max_mode if traj.config else 0)
    p = traj.params or EquationParams()
    cfg = traj.config
    lines = [
        f"# format_version={FORMAT_VERSION}",
        f"# K={K}",
        f"# dt={_num(cfg.dt) if cfg else 'nan'}",
        f"# stepper={cfg.stepper if cfg else 'unknown'}",
        f"# c1={_num(p.c1)} c2={_num(p.c2)} gamma={_num(p.gamma)} "
        f"time_direction={p.time_direction} cubic={str(p.cubic).lower()}",
        f"# status={traj.status} stop_time={'none' if traj.stop_time is None else _num(traj.stop_time)}",
        "# columns: t Re(c_0) Im(c_0) ... Re(c_K) Im(c_K)",
    ]
    for t, u in zip(traj.times, traj.snapshots):
        c = u.resize(K).coeffs
        inter = np.empty(2 * c.size)
        inter[0::2], inter[1::2] = c.real, c.imag
        lines.append(" ".join([_num(t)] + [_num(x) for x in inter]))
    payload = "\n".join(lines) + "\n"
    return payload + f"# sha256={_sha(payload)}\n"


def write_trajectory(traj: Trajectory, path) -> Path:
    return _write(path, trajectory_text(traj))


def read_trajectory(path) -> Trajectory:
    payload = _split_checksum(_read(path), path)
    header, rows = {}, []
    for ln in payload.splitlines():
        if ln.startswith("#"):
            for item in ln[1:].split():
                if "=" in item:
                    k, v = item.split("=", 1)
                    header[k] = v
        elif ln.strip():
            rows.append([float(x) for x in ln.split()])
    K = int(header["K"])
    times, snaps = [], []
    for r in rows:
        times.append(r[0])
        a = np.array(r[1:])
        snaps.append(SpectralField(a[0::2] + 1j * a[1::2]))
    p = EquationParams(float(header["c1"]), float(header["c2"]), float(header["gamma"]),
                       header["time_direction"], header["cubic"] == "true")
    stop = None if header.get("stop_time", "none") == "none" else float(header["stop_time"])
    info = {"format_version": int(header["format_version"]), "K": K, "dt": float(header["dt"])}
    return Trajectory(np.array(times), snaps, header.get("status", "completed"), stop, p, None, info)


# ---------------------------------------------------------------------------
# JSON reports


def jsonable(obj):
    """Convert numpy scalars/arrays, dataclasses and tuples to JSON types."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def report_text(report: dict) -> str:
    doc = jsonable({"format_version": FORMAT_VERSION, **report})
    doc.pop("checksum", None)
    payload = json.dumps(doc, indent=2, sort_keys=True)
    ordered = json.loads(payload)
    ordered["checksum"] = "sha256:" + _sha(payload)
    return json.dumps(ordered, indent=2) + "\n"


def validate_report(doc: dict) -> None:
    jsonschema.validate(doc, SUMMARY_SCHEMA)


def write_report(report: dict, path) -> Path:
    text = report_text(report)
    validate_report(json.loads(text))
    return _write(path, text)


def read_report(path) -> dict:
    doc = json.loads(_read(path))
    check = doc.pop("checksum", None)
    if check is None:
        raise ChecksumError(f"{path}: missing checksum")
    if check != "sha256:" + _sha(json.dumps(doc, indent=2, sort_keys=True)):
        raise ChecksumError(f"{path}: checksum mismatch")
    return doc


def emit(obj, path) -> Path:
    """Write a trace (CSV), a trajectory (text) or a report (JSON) to ``path``."""
    if isinstance(obj, EnergyTrace):
        return write_trace(obj, path)
    if isinstance(obj, Trajectory):
        return write_trajectory(obj, path)
    if isinstance(obj, dict):
        return write_report(obj, path)
    raise TypeError(f"cannot emit {type(obj).__name__}")
