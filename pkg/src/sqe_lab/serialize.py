"""JSON snapshots of ensemble states and coupling fields.

Schema (version 1): an ensemble snapshot carries ``kind``,
``schema_version``, ``n_sqe``, ``grid_size``, the optional equilibrium tag
as ``{"alpha_index": j, "m": 1}``, the hidden-phase list, and optionally
the full value table. A coupling snapshot carries ``kind``,
``schema_version``, ``grid_size``, ``values`` and ``peak_index``. Floats
round-trip exactly through Python's JSON encoder.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .coupling import CouplingField
from .ensemble import EnsembleState
from .grid import AlphaGrid

SCHEMA_VERSION = 1


def ensemble_to_dict(state: EnsembleState, include_values: bool = True) -> dict:
    doc = {
        "kind": "ensemble_state",
        "schema_version": SCHEMA_VERSION,
        "n_sqe": state.n_sqe,
        "grid_size": state.grid.size,
        "equilibrium": (
            None
            if state.equilibrium is None
            else {"alpha_index": int(state.equilibrium[0]), "m": int(state.equilibrium[1])}
        ),
        "microstates": state.microstates.tolist(),
        "values": state.values.tolist() if include_values else None,
    }
    return doc


def ensemble_from_dict(doc: dict) -> EnsembleState:
    if doc.get("kind") != "ensemble_state":
        raise ValueError(f"not an ensemble snapshot: kind={doc.get('kind')!r}")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {doc.get('schema_version')!r}")
    if doc.get("values") is None:
        raise ValueError("snapshot holds no value table; cannot rebuild a state")
    eq = doc.get("equilibrium")
    return EnsembleState(
        grid=AlphaGrid(doc["grid_size"]),
        microstates=np.asarray(doc["microstates"], dtype=float),
        values=np.asarray(doc["values"], dtype=float),
        equilibrium=None if eq is None else (int(eq["alpha_index"]), int(eq["m"])),
    )


def coupling_to_dict(g: CouplingField) -> dict:
    return {
        "kind": "coupling_field",
        "schema_version": SCHEMA_VERSION,
        "grid_size": g.grid.size,
        "values": g.values.tolist(),
        "peak_index": int(g.peak_index),
    }


def coupling_from_dict(doc: dict) -> CouplingField:
    if doc.get("kind") != "coupling_field":
        raise ValueError(f"not a coupling snapshot: kind={doc.get('kind')!r}")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {doc.get('schema_version')!r}")
    return CouplingField(
        grid=AlphaGrid(doc["grid_size"]),
        values=np.asarray(doc["values"], dtype=float),
        peak_index=int(doc["peak_index"]),
    )


def save_json(doc: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def load_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())
