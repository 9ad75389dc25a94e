"""Trace CSV, JSON summaries and binary checkpoints."""

from __future__ import annotations

import csv
import json
import math
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .mhd import ElsasserState, LimitState, PrimitiveState
from .spectral import ScalarField, TorusGrid, VectorField

TRACE_COLUMNS = (
    "t", "energy", "cross_helicity", "bkm_integral", "entropy", "dissipation",
    "J1", "J2", "J3", "J4", "J5", "J6", "residual",
)
STATE_TYPES = {cls.__name__: cls for cls in (PrimitiveState, LimitState, ElsasserState)}
CHECKPOINT_MAGIC = "qhmhd-checkpoint"


def fmt(x) -> str:
    x = float(x)
    return "nan" if math.isnan(x) else f"{x:.17g}"


def trace_rows(trace, records=None) -> list[dict]:
    """Rows of the trace CSV; entropy columns are nan without paired records."""
    rows = []
    for i, t in enumerate(trace.times):
        d = trace.diagnostics[i] if trace.diagnostics else {}
        row = dict.fromkeys(TRACE_COLUMNS, math.nan)
        row.update(
            t=t,
            energy=d.get("energy", math.nan),
            cross_helicity=d.get("cross_helicity", math.nan),
            bkm_integral=trace.bkm_integral[i],
        )
        if records is not None:
            rec = records[i]
            row.update(entropy=rec.entropy, dissipation=rec.dissipation, residual=rec.residual)
            row.update(dict(zip(("J1", "J2", "J3", "J4", "J5", "J6"), rec.jterms.as_tuple())))
        rows.append(row)
    return rows


def write_trace_csv(path, rows) -> None:
    path = Path(path)
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    with path.open("w", newline="") as fh:
        fh.write(f"# generated {stamp}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for row in rows:
            w.writerow([fmt(row[c]) for c in TRACE_COLUMNS])


def read_trace_csv(path) -> list[dict]:
    with Path(path).open() as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return [{k: float(v) for k, v in r.items()} for r in csv.DictReader(lines)]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return None if not math.isfinite(float(obj)) else float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, payload) -> None:
    Path(path).write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def save_checkpoint(path, state, system: str, t: float, seed=None) -> None:
    """One JSON header line, then each member's complex128 coefficients as
    interleaved little-endian float64 in C order."""
    names = [f for f in state.__dataclass_fields__]
    arrays = [np.ascontiguousarray(getattr(state, f).coeffs, dtype=np.complex128) for f in names]
    header = {
        "format": CHECKPOINT_MAGIC,
        "version": 1,
        "n": state.grid.n,
        "system": system,
        "state_type": type(state).__name__,
        "time": float(t),
        "seed": seed,
        "fields": names,
        "shapes": [list(a.shape) for a in arrays],
        "dtype": "complex128 stored as interleaved little-endian float64 (re, im)",
        "order": "C",
    }
    with Path(path).open("wb") as fh:
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode())
        for a in arrays:
            fh.write(a.view(np.float64).astype("<f8", copy=False).tobytes())


def load_checkpoint(path):
    """Inverse of save_checkpoint; returns (state, header)."""
    raw = Path(path).read_bytes()
    nl = raw.index(b"\n")
    header = json.loads(raw[:nl].decode())
    if header.get("format") != CHECKPOINT_MAGIC:
        raise ValueError(f"{path} is not a checkpoint file")
    grid = TorusGrid(header["n"])
    offset = nl + 1
    parts = []
    for shape in header["shapes"]:
        count = 2 * int(np.prod(shape))
        flat = np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
        offset += 8 * count
        coeffs = flat.astype(np.float64).view(np.complex128).reshape(shape).copy()
        parts.append(VectorField(grid, coeffs) if len(shape) == 3 else ScalarField(grid, coeffs))
    state = STATE_TYPES[header["state_type"]](*parts)
    return state, header
