"""CSV tables and run metadata.

Every table has a header row and a trailing ``seed`` column; floats are
written with 12 significant digits so that reruns are byte-identical.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

SCHEMAS = {
    "saddles.csv": ("start_id", "end_id", "hol_x", "hol_y", "length"),
    "cylinders.csv": ("direction", "circumference", "height", "n_bottom", "n_top"),
    "counts.csv": ("R", "N"),
    "entropy.csv": ("e_hat", "R_lo", "R_hi", "slope_half", "slope_quarter", "gap"),
    "shadows.csv": ("sing_id", "dist", "nu_hat", "r_hat"),
    "freq.csv": ("arc_id", "l", "l_ext", "passes", "total_len", "lambda_hat", "ci_half"),
    "regression.csv": ("slope", "intercept", "r2", "n_arcs"),
    "typicality.csv": ("T", "f_T", "n_eligible"),
}


def fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        s = f"{v:.12g}"
        return "0" if s == "-0" else s
    return str(v)


def write_table(out_dir: Path, name: str, rows, seed: int) -> Path:
    header = SCHEMAS[name]
    path = Path(out_dir) / name
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header + ("seed",))
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"{name}: row has {len(row)} fields, expected {len(header)}")
            w.writerow([fmt(_py(v)) for v in row] + [str(seed)])
    return path


def _py(v):
    # numpy scalars -> python scalars
    return v.item() if hasattr(v, "item") else v


def read_table(path: Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def write_meta(out_dir: Path, meta: dict) -> Path:
    path = Path(out_dir) / "meta.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=_py)
        fh.write("\n")
    return path


def read_meta(out_dir: Path) -> dict:
    with open(Path(out_dir) / "meta.json", encoding="utf-8") as fh:
        return json.load(fh)
