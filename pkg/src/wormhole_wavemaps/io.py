"""CSV/JSON persistence for states, trajectories and reduced-model runs.

Floats are written with ``repr`` so they round-trip exactly.
"""

from __future__ import annotations

import csv
import json
import math
import platform
from importlib import metadata
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .ode_models import ChainState, effective_energy
from .diagnostics import DiagnosticsRecord
from .wavemap_core import FieldState, ModelParams, Parity

TRAJECTORY_COLUMNS = ("s", "bondi", "b_plus", "c1_x", "t_inferred")


def _fmt(x) -> str:
    return repr(float(x))


def _num(text: str) -> float:
    return float(text) if text not in ("", "nan") else math.nan


def package_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def manifest(**entries) -> dict:
    """Run manifest with versions of the interpreter and numeric libraries."""
    import scipy

    return {"package_version": package_version(), "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__, **entries}


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "value"):
        return obj.value
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())


# -- field states ----------------------------------------------------------------------

def save_field_state(state: FieldState, nodes, csv_path, json_path=None) -> None:
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with csv_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["y", "u", "v"])
        for y, u, v in zip(nodes, state.u, state.v):
            w.writerow([_fmt(y), _fmt(u), _fmt(v)])
    if json_path is not None:
        write_json(json_path, {"s": state.s, "parity": state.parity.value,
                               "params": {"k": state.params.k, "a": state.params.a},
                               "n": len(state.u)})


def load_field_state(csv_path, json_path) -> tuple[FieldState, np.ndarray]:
    meta = read_json(json_path)
    with Path(csv_path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    y = np.array([float(r["y"]) for r in rows])
    u = np.array([float(r["u"]) for r in rows])
    v = np.array([float(r["v"]) for r in rows])
    params = ModelParams(**meta.get("params", {}))
    return FieldState(float(meta["s"]), u, v, Parity.parse(meta["parity"]), params), y


# -- trajectories --------------------------------------------------------------------------

def write_trajectory_csv(path, records: Iterable[DiagnosticsRecord]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRAJECTORY_COLUMNS)
        for rec in records:
            row = rec.to_row()
            w.writerow([_fmt(row[c]) for c in TRAJECTORY_COLUMNS])
    return path


def read_trajectory_csv(path) -> list[DiagnosticsRecord]:
    """Records from a trajectory CSV.  Only c1 survives of the position list."""
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(TRAJECTORY_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        out = []
        for row in reader:
            c1 = _num(row["c1_x"])
            pos = () if math.isnan(c1) else (c1,)
            out.append(DiagnosticsRecord(_num(row["s"]), _num(row["bondi"]), _num(row["b_plus"]),
                                         math.nan, pos, _num(row["t_inferred"])))
    return out


# -- reduced models ----------------------------------------------------------------------------

def ode_columns(J: int) -> list[str]:
    return (["t"] + [f"r_{j}" for j in range(1, J + 1)]
            + [f"rdot_{j}" for j in range(1, J + 1)] + ["E_eff"])


def write_ode_csv(path, states: Sequence[ChainState]) -> Path:
    if not states:
        raise ValueError("no states to write")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    J = states[0].J
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ode_columns(J))
        for st in states:
            w.writerow([_fmt(st.t), *map(_fmt, st.r), *map(_fmt, st.rdot), _fmt(effective_energy(st))])
    return path


def read_ode_csv(path) -> dict[str, np.ndarray]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(x) for x in row] for row in reader])
    return {name: data[:, i] for i, name in enumerate(header)}
