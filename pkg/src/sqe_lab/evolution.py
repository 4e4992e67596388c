"""Smooth state evolution as a chain of measurement-like relaxations.

A step nudges the equilibrium angle by one small arc and re-equilibrates
there. In stochastic mode each step really is a measurement, so the branch
flips with probability sin^2(d_alpha/2); in adiabatic mode the branch is
transported deterministically, which is the exact infinite-subdivision
limit. The pure-state picture is valid only while each step's time budget
greatly exceeds the relaxation time; otherwise the interrupted state has
no observable in equilibrium at all (an improper mixture), which
``detect_improper`` diagnoses by scanning every grid column.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coupling import coupling_for_eigenstate, weight_table
from .ensemble import (
    EnsembleState,
    canonical_index,
    equilibrium_scan,
    fractional_volume_index,
)
from .grid import AlphaGrid
from .measurement import HiddenSeeds, StateNotPureError, hidden_uniform, hidden_uniform_batch
from .relaxation import RelaxationParams, relax_to_equilibrium, sweeps_to_converge
from .seeding import derive_seed, uniform_windows

DEFAULT_R_MIN = 10.0

_MODES = ("adiabatic", "stochastic")


@dataclass(frozen=True)
class EvolutionPlan:
    alpha_start: float
    alpha_end: float
    steps: int
    dt_sweeps: int
    mode: str = "stochastic"

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.dt_sweeps < 1:
            raise ValueError(f"dt_sweeps must be >= 1, got {self.dt_sweeps}")
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}, got {self.mode!r}")

    def step_arc(self, grid: AlphaGrid) -> int:
        """Signed per-step arc in grid units; the plan must divide evenly."""
        start = grid.index_of(self.alpha_start)
        end = grid.index_of(self.alpha_end)
        arc = grid.arc_steps(start, end)
        if arc == 0:
            raise ValueError("alpha_start and alpha_end coincide; nothing to evolve")
        if arc % self.steps:
            raise ValueError(
                f"steps={self.steps} does not divide the arc of {arc} grid units"
            )
        return arc // self.steps


@dataclass(frozen=True)
class RegimeReport:
    tau_relax: int
    dt_sweeps: int
    ratio: float
    pure_state_valid: bool


def detect_improper(state: EnsembleState, eps: float) -> bool:
    """True iff no grid observable is in equilibrium for this state."""
    return not bool(equilibrium_scan(state, eps).any())


def _relax_with_budget(
    state: EnsembleState,
    peak_index: int,
    dt_sweeps: int,
    params: RelaxationParams,
    r_min: float,
) -> tuple[EnsembleState, RegimeReport]:
    """Relax toward the field at ``peak_index`` within the step's budget.

    tau is the exact sweep count the peak column needs (the contraction is
    geometric, so it is known from the entry error); the step is valid when
    the budget exceeds r_min * tau. An interrupted relaxation is returned
    untagged.
    """
    g = coupling_for_eigenstate(state.grid, state.grid.angle(peak_index))
    err_plus = float(np.abs(state.values[:, peak_index] - 1.0).max())
    outcome = relax_to_equilibrium(state, g, params, max_sweeps=dt_sweeps)
    if outcome.converged:
        tau = outcome.sweeps_used
    else:
        # the peak column contracts by exactly (1 - eta) per sweep, so the
        # time it would have needed is known in closed form
        tau = sweeps_to_converge(err_plus, params.eps_eq, params.eta, 1.0)
    ratio = float("inf") if tau == 0 else dt_sweeps / tau
    valid = ratio >= r_min
    report = RegimeReport(tau_relax=tau, dt_sweeps=dt_sweeps, ratio=ratio,
                          pure_state_valid=valid and outcome.converged)
    return outcome.state, report


def unitary_step(
    state: EnsembleState,
    d_alpha: float,
    dt_sweeps: int,
    mode: str,
    seeds: HiddenSeeds,
    params: RelaxationParams | None = None,
    r_min: float = DEFAULT_R_MIN,
) -> tuple[EnsembleState, bool, RegimeReport]:
    """One evolution step of signed arc ``d_alpha`` from a tagged state."""
    if params is None:
        params = RelaxationParams()
    if mode not in _MODES:
        raise ValueError(f"mode must be one of {_MODES}, got {mode!r}")
    if state.equilibrium is None:
        raise StateNotPureError("unitary_step requires a state with an equilibrium tag")
    grid = state.grid
    steps = round(d_alpha / (2.0 * np.pi / grid.size))
    if steps == 0 or not np.isclose(steps * 2.0 * np.pi / grid.size, d_alpha, atol=1e-9):
        raise ValueError(f"d_alpha={d_alpha!r} is not a whole nonzero number of grid units")

    tag_index = state.equilibrium[0]
    meas_index = (tag_index + steps) % grid.size
    if mode == "adiabatic":
        flipped = False
        new_peak = meas_index
    else:
        volume = fractional_volume_index(state, meas_index)
        outcome = 1 if hidden_uniform(seeds) < volume else -1
        flipped = outcome == -1
        new_peak = canonical_index(grid, meas_index, outcome)

    new_state, report = _relax_with_budget(state, new_peak, dt_sweeps, params, r_min)
    return new_state, flipped, report


def evolve(
    state: EnsembleState,
    plan: EvolutionPlan,
    seed: int,
    params: RelaxationParams | None = None,
    r_min: float = DEFAULT_R_MIN,
) -> tuple[EnsembleState, int, RegimeReport]:
    """Apply the plan's chain of steps; aborts at the first regime violation.

    Per-step hidden seeds are derived from ``seed`` (apparatus and space
    channels) with the step number as trial index. In adiabatic mode the
    final state is exactly the transported eigenstate; in stochastic mode
    the branch performs a random walk with per-step flip probability
    sin^2(d_alpha/2).
    """
    if params is None:
        params = RelaxationParams()
    if state.equilibrium is None:
        raise StateNotPureError("evolve requires a pure (tagged) state")
    grid = state.grid
    start = grid.index_of(plan.alpha_start)
    if state.equilibrium[0] not in (start, grid.antipode(start)):
        raise ValueError("state's equilibrium does not sit at plan.alpha_start (either branch)")
    d_steps = plan.step_arc(grid)
    d_alpha = d_steps * 2.0 * np.pi / grid.size

    lam_m = derive_seed(seed, ("evolve", "apparatus"))
    lam_sp = derive_seed(seed, ("evolve", "space"))
    total_flips = 0
    report = RegimeReport(tau_relax=0, dt_sweeps=plan.dt_sweeps, ratio=float("inf"),
                          pure_state_valid=True)
    for j in range(plan.steps):
        seeds = HiddenSeeds(lambda_m=lam_m, lambda_sp=lam_sp, trial_index=j)
        state, flipped, report = unitary_step(
            state, d_alpha, plan.dt_sweeps, plan.mode, seeds, params, r_min
        )
        total_flips += int(flipped)
        if not report.pure_state_valid:
            break
    return state, total_flips, report


def chain_flip_counts(
    u_key: int,
    lambda_m: int,
    lambda_sp: int,
    grid: AlphaGrid,
    start_index: int,
    arc_steps: int,
    k: int,
    n_sqe: int,
    chains: int,
) -> np.ndarray:
    """Total stochastic-mode flips per chain, for ``chains`` seeded chains.

    Chain c draws its hidden phases from window c of the ``u_key`` stream
    and its per-step hidden variates from trial indices c*k + j, matching
    ``evolve`` run on an ``init_eigenstate`` ensemble with the same keys
    bit for bit (cross-checked by tests); the ensemble tables themselves
    are not materialized, since each step's fractional volume is a sorted
    count of the fixed hidden phases.
    """
    if arc_steps % k:
        raise ValueError(f"k={k} does not divide arc of {arc_steps} grid units")
    d = arc_steps // k
    u = uniform_windows(u_key, 0, chains, n_sqe)
    u.sort(axis=1)
    r = hidden_uniform_batch(lambda_m, lambda_sp, 0, chains * k).reshape(chains, k)
    wtab = weight_table(grid, 0)
    flips = np.zeros(chains, dtype=np.int64)
    m = grid.size
    for c in range(chains):
        peak = start_index
        uc = u[c]
        for j in range(k):
            meas = (peak + d) % m
            w = wtab[(meas - peak) % m]
            volume = np.searchsorted(uc, w, side="left") / n_sqe
            outcome = 1 if r[c, j] < volume else -1
            if outcome == -1:
                flips[c] += 1
                peak = (meas + m // 2) % m
            else:
                peak = meas
    return flips
