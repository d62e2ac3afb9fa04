"""CSV outputs for trajectories and per-episode rewards.

Floats are written with ``repr`` so values read back bit-for-bit. A file
ends with the footer line ``# complete`` only when the run closed cleanly.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np

TRAJECTORY_HEADER = ("time", "id", "type", "x", "y", "z", "dx", "dy", "dz", "action_index")
REWARD_HEADER = ("episode", "species", "mean_reward", "cum_reward", "actor_loss", "critic_loss", "entropy")
FOOTER = "# complete"


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return "nan"
    return repr(float(value))


class CsvLog:
    """Append-only CSV file with a fixed header."""

    def __init__(self, path, header: Sequence[str]):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.header = tuple(header)
        self._fh = open(self.path, "w", newline="")
        self._fh.write(",".join(self.header) + "\n")
        self.n_rows = 0

    def write(self, rows: Iterable[Sequence]) -> None:
        lines = [",".join(_fmt(v) for v in row) for row in rows]
        if lines:
            self._fh.write("\n".join(lines) + "\n")
            self.n_rows += len(lines)

    def flush(self) -> None:
        self._fh.flush()

    def close(self, complete: bool = True) -> None:
        if self._fh.closed:
            return
        if complete:
            self._fh.write(FOOTER + "\n")
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, *_):
        self.close(complete=exc_type is None)


def trajectory_rows(colloids, action_indices: Optional[dict] = None, time: float = 0.0) -> List[tuple]:
    """One row per colloid; ``action_indices`` maps colloid id to action index."""
    rows = []
    for c in colloids:
        a = -1 if action_indices is None else int(action_indices.get(c.id, -1))
        rows.append((float(time), c.id, c.type, *map(float, c.pos), *map(float, c.director), a))
    return rows


def read_csv(path) -> dict:
    """Columns of a persisted CSV as numpy arrays, plus the completion flag."""
    lines = Path(path).read_text().splitlines()
    complete = bool(lines) and lines[-1] == FOOTER
    body = [ln for ln in lines if not ln.startswith("#")]
    reader = csv.reader(body)
    header = next(reader)
    rows = list(reader)
    out = {"complete": complete, "n_rows": len(rows)}
    for k, name in enumerate(header):
        col = [r[k] for r in rows]
        try:
            out[name] = np.array([int(v) for v in col], dtype=np.int64)
        except ValueError:
            out[name] = np.array([float(v) for v in col], dtype=np.float64)
    return out


def trajectory_stats(path) -> dict:
    """Summary numbers for ``replay --stats``."""
    data = read_csv(path)
    times = np.unique(data["time"]) if data["n_rows"] else np.zeros(0)
    ids = np.unique(data["id"]) if data["n_rows"] else np.zeros(0)
    stats = {
        "rows": data["n_rows"],
        "particles": int(ids.size),
        "snapshots": int(data["n_rows"] // max(ids.size, 1)),
        "t_min": float(times.min()) if times.size else 0.0,
        "t_max": float(times.max()) if times.size else 0.0,
        "complete": data["complete"],
    }
    if data["n_rows"]:
        for ax in "xyz":
            stats[f"mean_{ax}"] = float(data[ax].mean())
        acted = data["action_index"][data["action_index"] >= 0]
        stats["decisions"] = int(acted.size)
    return stats
