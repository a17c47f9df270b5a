"""Deterministic CSV and JSON emission.

Numbers are serialized with exactly 12 significant digits so identical runs
produce byte-identical files; docs/formats.md documents every schema.
"""

from __future__ import annotations

import json
import os
from typing import Iterable, Optional

import numpy as np

from .basin import BasinMap, label_name
from .lotka import SeparatrixTrace
from .solver import Trajectory

SCHEMA_VERSION = 1


def fmt(x: float) -> str:
    """Fixed 12-significant-digit scientific notation."""
    return f"{float(x):.11e}"


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def write_trajectory_csv(path: str, traj: Trajectory, columns: Optional[list] = None) -> None:
    """Columns t,y1,y2[,...]; one row per step."""
    d = traj.states.shape[1]
    names = columns or ["t"] + [f"y{i+1}" for i in range(d)]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(names) + "\n")
        for t, row in zip(traj.times, traj.states):
            fh.write(",".join([fmt(t)] + [fmt(v) for v in row]) + "\n")


def write_basin_csv(path: str, basin: BasinMap) -> None:
    """Leading '# key = value' metadata block, then i1,i2,y1,y2,label rows."""
    g = basin.grid
    y1s, y2s = g.y1_nodes, g.y2_nodes
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema = basin/{SCHEMA_VERSION}\n")
        for key in sorted(basin.metadata):
            fh.write(f"# {key} = {basin.metadata[key]}\n")
        fh.write("i1,i2,y1,y2,label\n")
        for i in range(g.n1):
            for j in range(g.n2):
                fh.write(
                    f"{i},{j},{fmt(y1s[i])},{fmt(y2s[j])},{label_name(int(basin.labels[i, j]))}\n"
                )


def read_basin_csv(path: str):
    """Parse a basin CSV back into (metadata, rows); used by tests and tools."""
    meta = {}
    rows = []
    with open(path) as fh:
        header = None
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, val = line[1:].partition("=")
                meta[key.strip()] = val.strip()
                continue
            if header is None:
                header = line.split(",")
                continue
            i1, i2, y1, y2, label = line.split(",")
            rows.append((int(i1), int(i2), float(y1), float(y2), label))
    return meta, rows


def write_boundary_csv(path: str, midpoints: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("y1,y2\n")
        for x, y in midpoints:
            fh.write(f"{fmt(x)},{fmt(y)}\n")


def write_separatrix_csv(path: str, trace: SeparatrixTrace, residuals: Iterable[float]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("y1,y2,residual\n")
        for (x, y), r in zip(trace.points, residuals):
            fh.write(f"{fmt(x)},{fmt(y)},{fmt(r)}\n")


def write_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
