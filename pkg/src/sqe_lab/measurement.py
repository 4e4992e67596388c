"""Ideal measurement: a deterministic map of (apparatus, system, space)
hidden states that swaps the coupling field and relaxes the system into an
eigenstate of the measured observable.

All apparent randomness is routed through ``hidden_uniform``, a pure
function of the apparatus seed, the space seed, and the trial index; the
system contributes through its persistent hidden phases, which set the
fractional volume the hidden variate is compared against. Identical hidden
states therefore always reproduce the identical outcome.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coupling import coupling_for_eigenstate, weight_table
from .ensemble import (
    EnsembleState,
    canonical_index,
    fractional_volume_index,
    is_equilibrium,
)
from .grid import AlphaGrid
from .relaxation import RelaxationParams, relax_step, relax_to_equilibrium
from .seeding import hidden_key, uniform_window, uniform_windows

_U64 = 1 << 64


class StateNotPureError(ValueError):
    """Measurement attempted on a state with no equilibrium tag."""


@dataclass(frozen=True)
class HiddenSeeds:
    """Hidden complete states of apparatus and space for one trial."""

    lambda_m: int
    lambda_sp: int
    trial_index: int = 0

    def __post_init__(self) -> None:
        for name in ("lambda_m", "lambda_sp"):
            v = getattr(self, name)
            if not (0 <= v < _U64):
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {v}")
        if self.trial_index < 0:
            raise ValueError(f"trial_index must be >= 0, got {self.trial_index}")


@dataclass(frozen=True)
class MeasurementRecord:
    setting: float               # measured grid angle
    outcome: int                 # +1 or -1
    seeds: HiddenSeeds
    pre_equilibrium: tuple[int, int] | None
    sweeps_used: int
    converged: bool = True


def hidden_uniform(seeds: HiddenSeeds) -> float:
    """Deterministic uniform variate in [0, 1) from the hidden states.

    The two 64-bit seeds form the 128-bit Philox key and the trial index is
    the counter window, so consecutive trials read consecutive windows of
    one fixed keyed stream.
    """
    key = hidden_key(seeds.lambda_m, seeds.lambda_sp)
    return float(uniform_window(key, seeds.trial_index, 1)[0])


def hidden_uniform_batch(lambda_m: int, lambda_sp: int, first_trial: int, count: int) -> np.ndarray:
    """hidden_uniform for ``count`` consecutive trial indices, bit-equal."""
    key = hidden_key(lambda_m, lambda_sp)
    return uniform_windows(key, first_trial, count, 1)[:, 0]


def ideal_measure(
    state: EnsembleState,
    alpha_meas: float,
    seeds: HiddenSeeds,
    params: RelaxationParams | None = None,
) -> tuple[MeasurementRecord, EnsembleState]:
    """Measure the observable at ``alpha_meas`` on a pure (tagged) state.

    The outcome is +1 exactly when the hidden variate falls below the
    state's fractional volume at the setting; the coupling field is then
    swapped to the one peaked at the outcome's eigenstate and the ensemble
    relaxes there, reusing its persistent hidden phases. Deterministic in
    (state, seeds). Non-convergence within the sweep budget is recorded on
    the returned record rather than raised.
    """
    if state.equilibrium is None:
        raise StateNotPureError(
            "state carries no equilibrium tag; run evolution.detect_improper "
            "to classify it before measuring"
        )
    if params is None:
        params = RelaxationParams()
    meas_idx = state.grid.index_of(alpha_meas)
    volume = fractional_volume_index(state, meas_idx)
    outcome = 1 if hidden_uniform(seeds) < volume else -1

    peak = canonical_index(state.grid, meas_idx, outcome)
    g = coupling_for_eigenstate(state.grid, state.grid.angle(peak))
    relaxed = relax_to_equilibrium(state, g, params)
    record = MeasurementRecord(
        setting=state.grid.angle(meas_idx),
        outcome=outcome,
        seeds=seeds,
        pre_equilibrium=state.equilibrium,
        sweeps_used=relaxed.sweeps_used,
        converged=relaxed.converged,
    )
    return record, relaxed.state


def pointer_reading(
    state: EnsembleState,
    alpha: float,
    window: int,
    params: RelaxationParams | None = None,
) -> float:
    """Time average of the ensemble mean at ``alpha`` over extra sweeps.

    The state must be in equilibrium at ``alpha``; at the relaxation fixed
    point the time average equals the instantaneous ensemble average, which
    is what the apparatus output displays.
    """
    if params is None:
        params = RelaxationParams()
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if not is_equilibrium(state, alpha, params.eps_eq):
        raise StateNotPureError(f"state is not in equilibrium at alpha={alpha!r}")
    if state.equilibrium is None:
        raise StateNotPureError("state carries no equilibrium tag")
    g = coupling_for_eigenstate(state.grid, state.grid.angle(state.equilibrium[0]))
    idx = state.grid.index_of(alpha)
    total = 0.0
    current = state
    for _ in range(window):
        current = relax_step(current, g, params)
        total += float(current.values[:, idx].mean())
    return total / window


def born_outcomes(
    u_key: int,
    lambda_m: int,
    lambda_sp: int,
    grid: AlphaGrid,
    alpha0_index: int,
    meas_index: int,
    n_sqe: int,
    first_trial: int,
    count: int,
) -> np.ndarray:
    """First-measurement outcomes on ``count`` fresh eigenstate ensembles.

    Trial t draws its hidden phases from window ``first_trial + t`` of the
    stream keyed by ``u_key`` and its hidden variate from trial index
    ``first_trial + t``; this is bit-equal to ``init_eigenstate`` followed
    by ``ideal_measure`` for each trial (the outcome is fixed before any
    relaxation happens), but runs as two vectorized comparisons.
    """
    w = float(weight_table(grid, alpha0_index)[meas_index])
    u = uniform_windows(u_key, first_trial, count, n_sqe)
    volumes = (u < w).mean(axis=1)
    r = hidden_uniform_batch(lambda_m, lambda_sp, first_trial, count)
    return np.where(r < volumes, 1, -1).astype(np.int8)
