"""Singlet pairs: anti-correlated ensembles, instantaneous space-mediated
collapse, correlation and CHSH experiments, and no-signaling checks.

A singlet is two halves whose entity values cancel pairwise at every grid
angle (pair sum identically zero), built by giving each pair a random
orientation. Neither half has any observable in equilibrium, yet the
pair-sum family does. Measuring one half collapses it locally and emits a
space event that prepares the far half in the opposite eigenstate with
zero simulated delay, so equal-setting outcomes anticorrelate exactly and
the two-point correlation converges to -cos(angle difference). Remote
*settings* leave each side's marginal at 1/2; only conditioning on the
remote *outcome* shifts local statistics.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .coupling import coupling_for_eigenstate, weight_table
from .ensemble import EnsembleState, canonical_index, fractional_volume_index
from .grid import AlphaGrid
from .measurement import (
    HiddenSeeds,
    MeasurementRecord,
    hidden_uniform,
    hidden_uniform_batch,
)
from .relaxation import RelaxationParams, relax_to_equilibrium
from .seeding import derive_seed, uniform_windows


class DoubleMeasurementError(ValueError):
    """A side of a pair was measured twice within one trial."""


@dataclass(frozen=True)
class SpaceEvent:
    source_side: int
    setting: float
    outcome: int
    sequence: int


@dataclass
class PairedEnsemble:
    half_1: EnsembleState
    half_2: EnsembleState
    pairing: np.ndarray              # entity i of half 1 <-> pairing[i] of half 2
    pair_sum: float = 0.0
    measured: frozenset = frozenset()
    events: tuple = ()

    def __post_init__(self) -> None:
        if self.half_1.grid.size != self.half_2.grid.size:
            raise ValueError("halves must share a grid")
        if self.half_1.n_sqe != self.half_2.n_sqe:
            raise ValueError("halves must have equal entity counts")
        self.pairing = np.asarray(self.pairing, dtype=int)
        if sorted(self.pairing.tolist()) != list(range(self.half_1.n_sqe)):
            raise ValueError("pairing must be a bijection between the halves")

    @property
    def n_pairs(self) -> int:
        return self.half_1.n_sqe

    @property
    def entangled(self) -> bool:
        return len(self.measured) == 0


class SingletKeys(NamedTuple):
    theta: int
    u1: int
    u2: int
    lambda_m_1: int
    lambda_sp_1: int
    lambda_m_2: int
    lambda_sp_2: int


def singlet_keys(seed: int) -> SingletKeys:
    """Stream keys for singlet preparation and both measurement channels."""
    return SingletKeys(
        theta=derive_seed(seed, ("singlet", "theta")),
        u1=derive_seed(seed, ("singlet", "u1")),
        u2=derive_seed(seed, ("singlet", "u2")),
        lambda_m_1=derive_seed(seed, ("singlet", "apparatus", 1)),
        lambda_sp_1=derive_seed(seed, ("singlet", "space", 1)),
        lambda_m_2=derive_seed(seed, ("singlet", "apparatus", 2)),
        lambda_sp_2=derive_seed(seed, ("singlet", "space", 2)),
    )


def _pair_orientations(keys: SingletKeys, grid: AlphaGrid, n_pairs: int,
                       first_window: int, count: int) -> np.ndarray:
    raw = uniform_windows(keys.theta, first_window, count, n_pairs)
    return np.floor(raw * grid.size).astype(np.int64)


def prepare_singlet_from_keys(
    grid: AlphaGrid,
    n_pairs: int,
    keys: SingletKeys,
    window: int = 0,
) -> PairedEnsemble:
    if n_pairs < 2:
        raise ValueError(f"n_pairs must be >= 2, got {n_pairs}")
    theta = _pair_orientations(keys, grid, n_pairs, window, 1)[0]
    u1 = uniform_windows(keys.u1, window, 1, n_pairs)[0]
    u2 = uniform_windows(keys.u2, window, 1, n_pairs)[0]
    wtab = weight_table(grid, 0)
    col_idx = (np.arange(grid.size)[None, :] - theta[:, None]) % grid.size
    values_1 = np.where(u1[:, None] < wtab[col_idx], 1.0, -1.0)
    half_1 = EnsembleState(grid=grid, microstates=u1, values=values_1)
    half_2 = EnsembleState(grid=grid, microstates=u2, values=-values_1)
    return PairedEnsemble(half_1=half_1, half_2=half_2, pairing=np.arange(n_pairs))


def prepare_singlet(n_pairs: int, grid: AlphaGrid, seed: int) -> PairedEnsemble:
    """Fresh singlet: per-pair random orientations, values cancelling exactly.

    Each pair i gets a uniformly random grid orientation theta_i; entity i of
    half 1 holds the eigenstate table of theta_i keyed to its own hidden
    phase, and its partner holds the exact negation. Each half's fractional
    volume is 1/2 in expectation at every angle and no observable of either
    half is in equilibrium.
    """
    return prepare_singlet_from_keys(grid, n_pairs, singlet_keys(seed))


def measure_side(
    pair: PairedEnsemble,
    side: int,
    alpha: float,
    seeds: HiddenSeeds,
    params: RelaxationParams | None = None,
) -> tuple[MeasurementRecord, PairedEnsemble]:
    """Measure one side; while the pair is entangled, the companion space
    event prepares the far half in the opposite eigenstate immediately.

    The far preparation reuses the ordinary relaxation pipeline at the
    flipped outcome (an ideal preparation at a distance, not a bespoke
    collapse rule). Measuring an already-measured side raises.
    """
    if side not in (1, 2):
        raise ValueError(f"side must be 1 or 2, got {side}")
    if side in pair.measured:
        raise DoubleMeasurementError(f"side {side} was already measured in this trial")
    if params is None:
        params = RelaxationParams()
    grid = pair.half_1.grid
    own = pair.half_1 if side == 1 else pair.half_2
    other = pair.half_2 if side == 1 else pair.half_1
    meas_idx = grid.index_of(alpha)

    volume = fractional_volume_index(own, meas_idx)
    outcome = 1 if hidden_uniform(seeds) < volume else -1

    own_peak = canonical_index(grid, meas_idx, outcome)
    own_relaxed = relax_to_equilibrium(
        own, coupling_for_eigenstate(grid, grid.angle(own_peak)), params
    )
    event = SpaceEvent(
        source_side=side,
        setting=grid.angle(meas_idx),
        outcome=outcome,
        sequence=len(pair.events),
    )
    if pair.entangled:
        remote_peak = canonical_index(grid, meas_idx, -outcome)
        other_new = relax_to_equilibrium(
            other, coupling_for_eigenstate(grid, grid.angle(remote_peak)), params
        ).state
    else:
        other_new = other

    record = MeasurementRecord(
        setting=grid.angle(meas_idx),
        outcome=outcome,
        seeds=seeds,
        pre_equilibrium=own.equilibrium,
        sweeps_used=own_relaxed.sweeps_used,
        converged=own_relaxed.converged,
    )
    new_pair = replace(
        pair,
        half_1=own_relaxed.state if side == 1 else other_new,
        half_2=own_relaxed.state if side == 2 else other_new,
        measured=pair.measured | {side},
        events=pair.events + (event,),
    )
    return record, new_pair


def singlet_trials(
    keys: SingletKeys,
    grid: AlphaGrid,
    n_pairs: int,
    first_side: int,
    first_index: int,
    second_index: int,
    first_trial: int,
    count: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Batched two-sided singlet measurements, one fresh pair per trial.

    Trial t of the batch draws its pair from window ``first_trial + t`` of
    the preparation streams and its hidden variates from the side channels
    at the same trial index; outcomes are bit-equal to
    ``prepare_singlet_from_keys`` + two ``measure_side`` calls per trial
    (cross-checked by tests). Returns (first outcomes, second outcomes).
    """
    if first_side not in (1, 2):
        raise ValueError(f"first_side must be 1 or 2, got {first_side}")
    m = grid.size
    wtab = weight_table(grid, 0)

    theta = _pair_orientations(keys, grid, n_pairs, first_trial, count)
    u1 = uniform_windows(keys.u1, first_trial, count, n_pairs)
    in_plus = u1 < wtab[(first_index - theta) % m]
    counts = in_plus.sum(axis=1)
    if first_side == 2:
        counts = n_pairs - counts  # half 2 holds the negated table
    # count/n, matching the object path's fractional volume bit for bit
    v_first = counts / n_pairs

    lm_f, sp_f = (
        (keys.lambda_m_1, keys.lambda_sp_1)
        if first_side == 1
        else (keys.lambda_m_2, keys.lambda_sp_2)
    )
    lm_s, sp_s = (
        (keys.lambda_m_2, keys.lambda_sp_2)
        if first_side == 1
        else (keys.lambda_m_1, keys.lambda_sp_1)
    )
    r_first = hidden_uniform_batch(lm_f, sp_f, first_trial, count)
    m_first = np.where(r_first < v_first, 1, -1).astype(np.int8)

    # far half is prepared at canonical(first_index, -m_first)
    remote_peak = (first_index + np.where(m_first == 1, m // 2, 0)) % m
    u_second_key = keys.u2 if first_side == 1 else keys.u1
    u_second = uniform_windows(u_second_key, first_trial, count, n_pairs)
    w_second = wtab[(second_index - remote_peak) % m]
    v_second = (u_second < w_second[:, None]).mean(axis=1)
    r_second = hidden_uniform_batch(lm_s, sp_s, first_trial, count)
    m_second = np.where(r_second < v_second, 1, -1).astype(np.int8)
    return m_first, m_second


_CHUNK = 4096


def correlation(
    alpha: float,
    beta: float,
    trials: int,
    seed: int,
    n_pairs: int = 1000,
    grid: AlphaGrid | None = None,
    first_side: int = 1,
) -> float:
    """Mean product of the two sides' outcomes over fresh singlets.

    Side ``first_side`` is measured at ``alpha`` first, the other side at
    ``beta``; converges to -cos(alpha - beta).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if grid is None:
        grid = AlphaGrid(360)
    keys = singlet_keys(seed)
    a_idx, b_idx = grid.index_of(alpha), grid.index_of(beta)
    total = 0
    done = 0
    while done < trials:
        count = min(_CHUNK, trials - done)
        m1, m2 = singlet_trials(keys, grid, n_pairs, first_side, a_idx, b_idx, done, count)
        total += int(np.sum(m1.astype(np.int64) * m2.astype(np.int64)))
        done += count
    return total / trials


def chsh(
    a: float,
    a_prime: float,
    b: float,
    b_prime: float,
    trials: int,
    seed: int,
    n_pairs: int = 1000,
    grid: AlphaGrid | None = None,
) -> dict:
    """CHSH combination S = |E(a,b) - E(a,b') + E(a',b) + E(a',b')|.

    Each term is an independent correlation run of ``trials`` fresh pairs.
    """
    settings = [(a, b), (a, b_prime), (a_prime, b), (a_prime, b_prime)]
    terms = [
        correlation(x, y, trials, derive_seed(seed, ("chsh", i)), n_pairs=n_pairs, grid=grid)
        for i, (x, y) in enumerate(settings)
    ]
    s = abs(terms[0] - terms[1] + terms[2] + terms[3])
    return {"S": s, "terms": terms}


def marginal_check(
    own_alpha: float,
    remote_beta: float,
    trials: int,
    seed: int,
    n_pairs: int = 1000,
    grid: AlphaGrid | None = None,
    side: int = 1,
) -> float:
    """Frequency of +1 on ``side`` at own_alpha with the far side measured first.

    Stays at 1/2 for every remote setting (parameter independence), even
    though conditioning on the remote outcome pins the local outcome.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if grid is None:
        grid = AlphaGrid(360)
    keys = singlet_keys(seed)
    own_idx, remote_idx = grid.index_of(own_alpha), grid.index_of(remote_beta)
    plus = 0
    done = 0
    remote_side = 2 if side == 1 else 1
    while done < trials:
        count = min(_CHUNK, trials - done)
        _, m_own = singlet_trials(
            keys, grid, n_pairs, remote_side, remote_idx, own_idx, done, count
        )
        plus += int(np.sum(m_own == 1))
        done += count
    return plus / trials
