"""Snapshot schema round trips."""

import numpy as np
import pytest

from sqe_lab.coupling import coupling_for_eigenstate
from sqe_lab.ensemble import init_eigenstate
from sqe_lab.grid import AlphaGrid
from sqe_lab.seeding import derive_seed
from sqe_lab.serialize import (
    coupling_from_dict,
    coupling_to_dict,
    ensemble_from_dict,
    ensemble_to_dict,
    load_json,
    save_json,
)


def test_ensemble_round_trip(tmp_path):
    state = init_eigenstate(40, AlphaGrid(8), 0.0, 1, seed=derive_seed(3, ("ser",)))
    doc = ensemble_to_dict(state)
    assert doc["kind"] == "ensemble_state"
    assert doc["schema_version"] == 1
    assert doc["n_sqe"] == 40
    assert doc["equilibrium"] == {"alpha_index": 0, "m": 1}

    path = tmp_path / "state.json"
    save_json(doc, path)
    back = ensemble_from_dict(load_json(path))
    assert np.array_equal(back.values, state.values)
    assert np.array_equal(back.microstates, state.microstates)
    assert back.equilibrium == state.equilibrium


def test_ensemble_snapshot_without_tag_or_values(tmp_path):
    state = init_eigenstate(10, AlphaGrid(8), 0.0, 1, seed=1)
    state.equilibrium = None
    doc = ensemble_to_dict(state, include_values=False)
    assert doc["values"] is None
    assert doc["equilibrium"] is None
    with pytest.raises(ValueError):
        ensemble_from_dict(doc)


def test_coupling_round_trip(tmp_path):
    g = coupling_for_eigenstate(AlphaGrid(16), np.pi / 2)
    doc = coupling_to_dict(g)
    path = tmp_path / "coupling.json"
    save_json(doc, path)
    back = coupling_from_dict(load_json(path))
    assert np.array_equal(back.values, g.values)
    assert back.peak_index == g.peak_index


def test_kind_and_version_checked():
    state = init_eigenstate(10, AlphaGrid(8), 0.0, 1, seed=1)
    doc = ensemble_to_dict(state)
    with pytest.raises(ValueError):
        coupling_from_dict(doc)
    doc2 = dict(doc, schema_version=99)
    with pytest.raises(ValueError):
        ensemble_from_dict(doc2)
