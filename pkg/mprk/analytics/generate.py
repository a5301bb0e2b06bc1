"""
Output writers: conservation history CSV, run summary JSON, field snapshots.

Snapshot layout: an ASCII header ending in `end_header\n`, then the raw
little-endian float64 bytes of the (5, nz, ny, nx) conserved array.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Tuple

import numpy as np
import pandas as pd

from mprk.analytics.metrics import ConservationHistory
from mprk.solver.domain import ConservedField, StructuredGrid
from mprk.solver.physics import VARIABLES

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
SNAPSHOT_DTYPE = "<f8"


def write_table(frame: pd.DataFrame, path: Path) -> Path:
    """CSV with full double precision."""
    path = Path(path)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"  Generated {path.name}")
    return path


def write_history_csv(history: ConservationHistory, output_dir: Path) -> Path:
    return write_table(history.to_frame(), Path(output_dir) / "history.csv")


def write_json(data: Dict[str, Any], path: Path) -> Path:
    path = Path(path)
    with open(path, "w") as f:
        json.dump(data, f, indent=2, default=str)
    logger.info(f"  Generated {path.name}")
    return path


def write_run_summary(summary: Dict[str, Any], output_dir: Path) -> Path:
    return write_json(summary, Path(output_dir) / "run.json")


def snapshot_name(domain: int, index: int) -> str:
    return f"snapshot_d{domain}_{index:06d}.dat"


def write_snapshot(field: ConservedField, domain: int, t: float, index: int,
                   output_dir: Path) -> Path:
    grid = field.grid
    header = "\n".join([
        "mprk-snapshot 1",
        f"domain {domain}",
        f"time {t!r}",
        f"dimensions {grid.nx} {grid.ny} {grid.nz}",
        f"origin {grid.origin[0]!r} {grid.origin[1]!r} {grid.origin[2]!r}",
        f"spacing {grid.dx!r} {grid.dy!r} {grid.dz!r}",
        f"variables {' '.join(VARIABLES)}",
        "order variable,z,y,x (x fastest)",
        f"dtype {SNAPSHOT_DTYPE}",
        "end_header",
    ]) + "\n"
    path = Path(output_dir) / snapshot_name(domain, index)
    with open(path, "wb") as f:
        f.write(header.encode("ascii"))
        f.write(np.ascontiguousarray(field.data, dtype=SNAPSHOT_DTYPE).tobytes())
    return path


def read_snapshot(path: Path) -> Tuple[Dict[str, str], ConservedField]:
    """Parse a snapshot back into (header fields, field)."""
    raw = Path(path).read_bytes()
    marker = b"end_header\n"
    cut = raw.index(marker) + len(marker)
    header = {}
    for line in raw[:cut].decode("ascii").splitlines():
        key, _, value = line.partition(" ")
        header[key] = value
    nx, ny, nz = (int(v) for v in header["dimensions"].split())
    origin = tuple(float(v) for v in header["origin"].split())
    dx, dy, dz = (float(v) for v in header["spacing"].split())
    grid = StructuredGrid(nx, ny, nz, dx, dy, dz, origin)
    data = np.frombuffer(raw[cut:], dtype=SNAPSHOT_DTYPE).reshape((5, nz, ny, nx)).copy()
    return header, ConservedField(grid, data)
