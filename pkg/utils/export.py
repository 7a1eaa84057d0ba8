# file: utils/export.py
"""Plain-text writers and readers for datasets, trajectories and summaries"""

import csv
import json
import logging
import math
import os
from typing import Dict, Iterable, List, Sequence

logger = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = ("step", "y", "u", "eps_eff", "log10_capital",
                      "loss_base", "loss_enh", "loss_oracle", "median_enh")


def format_float(x: float) -> str:
    """17 significant digits, enough to round-trip a double"""
    if isinstance(x, int) and not isinstance(x, bool):
        return str(x)
    return format(float(x), ".17g")


def _ensure_parent(path: str):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def write_dataset(path: str, values: Sequence[float], header: str = "") -> str:
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"# {header}\n")
        for v in values:
            f.write(format_float(v) + "\n")
    logger.info("Dataset written: %s (%d values)", path, len(values))
    return path


def read_dataset(path: str) -> List[float]:
    values = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            values.append(float(line))
    return values


def read_dataset_header(path: str) -> str:
    with open(path, "r", encoding="utf-8") as f:
        first = f.readline().strip()
    return first[1:].strip() if first.startswith("#") else ""


def write_trajectory_csv(path: str, rows: Iterable) -> str:
    """One CSV line per TrajectoryRow"""
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TRAJECTORY_COLUMNS)
        for r in rows:
            writer.writerow([
                str(r.step), format_float(r.y), format_float(r.u), format_float(r.eps_eff),
                format_float(r.log10_capital), format_float(r.loss_base),
                format_float(r.loss_enhanced), format_float(r.loss_oracle),
                format_float(r.median_enhanced),
            ])
    logger.info("Trajectory written: %s", path)
    return path


def read_trajectory_csv(path: str) -> List[Dict[str, float]]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(f)]


def write_grid_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[float]]) -> str:
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for r in rows:
            writer.writerow([format_float(v) for v in r])
    logger.info("Grid written: %s", path)
    return path


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def write_summary_json(path: str, summary: Dict) -> str:
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(_json_safe(summary), f, indent=2, ensure_ascii=False)
    logger.info("Summary written: %s", path)
    return path
