"""Contact-style equilibration dynamics driven by a coupling field.

One sweep pulls every entity value toward its hidden-phase target with a
per-column rate eta * g(alpha): columns never mix (couplings act only
within one observable family), values contract geometrically toward the
target table, and the relaxation time at the peak column scales as
1/(eta * g_peak). A weakly coupled observable therefore cannot reach
equilibrium within a short time budget, which is exactly the regime the
evolution module flags as an improper mixture.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coupling import ConstraintError, CouplingField, check_constraint, coupling_for_eigenstate
from .ensemble import EnsembleState, canonical_index, eigenstate_values
from .grid import AlphaGrid
from .seeding import derive_seed, uniform_window


@dataclass(frozen=True)
class RelaxationParams:
    eta: float = 0.1          # per-sweep contraction rate
    eps_eq: float = 1e-3      # equilibrium tolerance
    max_sweeps: int = 10_000

    def __post_init__(self) -> None:
        if not (0.0 < self.eta <= 1.0):
            raise ValueError(f"eta must lie in (0, 1], got {self.eta}")
        if not (0.0 < self.eps_eq < 1.0):
            raise ValueError(f"eps_eq must lie in (0, 1), got {self.eps_eq}")
        if self.max_sweeps < 1:
            raise ValueError(f"max_sweeps must be >= 1, got {self.max_sweeps}")


@dataclass
class RelaxationOutcome:
    state: EnsembleState
    sweeps_used: int
    converged: bool


def local_targets(microstates: np.ndarray, g: CouplingField) -> np.ndarray:
    """Per-entity target table: +1 where u_i < g(alpha)/g(peak), else -1."""
    w = g.values / g.values[g.peak_index]
    return np.where(microstates[:, None] < w[None, :], 1.0, -1.0)


def relax_step(state: EnsembleState, g: CouplingField, params: RelaxationParams) -> EnsembleState:
    """One sweep: a <- a + eta*g(alpha)*(target - a), column by column.

    Zero-coupling columns are untouched; the update is a convex combination
    so values stay in [-1, +1] without clipping. Microstates are never
    modified. The returned state carries no equilibrium tag.
    """
    if g.grid.size != state.grid.size:
        raise ValueError("state and coupling field must share a grid")
    t = local_targets(state.microstates, g)
    new_values = state.values + (params.eta * g.values)[None, :] * (t - state.values)
    return EnsembleState(grid=state.grid, microstates=state.microstates,
                         values=new_values, equilibrium=None)


def sweeps_to_converge(err0: float, eps: float, eta: float, g_peak: float) -> int:
    """Sweeps after which err0*(1 - eta*g_peak)^s <= eps (0 if already there)."""
    if err0 <= eps:
        return 0
    rate = 1.0 - eta * g_peak
    if rate <= 0.0:
        return 1
    return max(1, math.ceil(math.log(err0 / eps) / -math.log(rate)))


def _relax_until(
    state: EnsembleState,
    g: CouplingField,
    params: RelaxationParams,
    max_sweeps: int,
) -> tuple[EnsembleState, np.ndarray, int, int | None]:
    """Iterate sweeps until the peak observable settles on one eigenvalue.

    Entry shortcuts require the *whole table* to sit at the corresponding
    fixed point: a single fortuitously uniform column does not make the
    target observable's equilibrium (the local-equilibrium structure of
    every other observable comes with it). A state at the target eigenstate
    settles with sign +1 and zero sweeps; one at the antipodal eigenstate
    (the same observable family, eigenvalue -1) with sign -1 and zero
    sweeps. Otherwise the pull drives the peak column to +1 and the sweep
    count at which it lands within eps_eq is the relaxation time.

    Returns (state, target_table, sweeps_used, settled_sign_or_None).
    """
    targets = local_targets(state.microstates, g)
    peak = g.peak_index
    eps = params.eps_eq
    if np.abs(state.values - targets).max() <= eps:
        return state, targets, 0, 1
    col = state.values[:, peak]
    if np.abs(col + 1.0).max() <= eps:
        anti = eigenstate_values(state.microstates, state.grid, state.grid.antipode(peak))
        if np.abs(state.values - anti).max() <= eps:
            return state, targets, 0, -1

    rates = (params.eta * g.values)[None, :]
    values = state.values
    for sweep in range(1, max_sweeps + 1):
        values = values + rates * (targets - values)
        if np.abs(values[:, peak] - 1.0).max() <= eps:
            out = EnsembleState(grid=state.grid, microstates=state.microstates,
                                values=values, equilibrium=None)
            return out, targets, sweep, 1
    out = EnsembleState(grid=state.grid, microstates=state.microstates,
                        values=values, equilibrium=None)
    return out, targets, max_sweeps, None


def relax_to_equilibrium(
    state: EnsembleState,
    g: CouplingField,
    params: RelaxationParams,
    max_sweeps: int | None = None,
) -> RelaxationOutcome:
    """Relax until the peak observable is in equilibrium, then settle the table.

    The iteration count at the peak column is the relaxation time. On
    convergence after one or more sweeps the remaining columns are placed at
    their targets, which is the exact infinite-sweep limit of the geometric
    contraction for every positively coupled column; the single zero-coupling
    column (the peak's antipode) is pinned by the same table, as required by
    the antipodal identification of the observable family. A state already in
    equilibrium at entry is returned unchanged with sweeps_used = 0.
    Non-convergence within the budget is reported, not raised.
    """
    report = check_constraint(g)
    if not report.satisfied:
        raise ConstraintError(
            f"relax_to_equilibrium requires an admissible field (residual {report.residual:g})"
        )
    budget = params.max_sweeps if max_sweeps is None else max_sweeps
    out, targets, sweeps, sign = _relax_until(state, g, params, budget)
    if sign is None:
        return RelaxationOutcome(state=out, sweeps_used=sweeps, converged=False)
    tag = (canonical_index(state.grid, g.peak_index, sign), 1)
    settled = EnsembleState(
        grid=state.grid,
        microstates=state.microstates,
        values=targets if sweeps > 0 else state.values,
        equilibrium=tag,
    )
    return RelaxationOutcome(state=settled, sweeps_used=sweeps, converged=True)


def relax_time_samples(
    g_peak_value: float,
    params: RelaxationParams,
    trials: int,
    seed: int,
    n_sqe: int = 256,
    grid_size: int = 16,
) -> np.ndarray:
    """Relaxation times from seeded random initial states, one per trial.

    The coupling is the admissible family scaled to ``g_peak_value``; initial
    values are i.i.d. uniform in [-1, 1] and hidden phases i.i.d. uniform in
    [0, 1), both from per-trial counter streams.
    """
    if not (0.0 < g_peak_value <= 1.0):
        raise ValueError(f"g_peak_value must lie in (0, 1], got {g_peak_value}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    grid = AlphaGrid(grid_size)
    base = coupling_for_eigenstate(grid, 0.0)
    g = CouplingField(grid=grid, values=g_peak_value * base.values, peak_index=0)
    times = np.empty(trials, dtype=int)
    for t in range(trials):
        u = uniform_window(derive_seed(seed, ("relax-time", t, "u")), 0, n_sqe)
        v = 2.0 * uniform_window(derive_seed(seed, ("relax-time", t, "values")),
                                 0, n_sqe * grid_size).reshape(n_sqe, grid_size) - 1.0
        state = EnsembleState(grid=grid, microstates=u, values=v)
        _, _, sweeps, sign = _relax_until(state, g, params, params.max_sweeps)
        if sign is None:
            raise RuntimeError(
                f"relax-time trial {t} failed to converge in {params.max_sweeps} sweeps"
            )
        times[t] = sweeps
    return times


def measure_relax_time(
    g_peak_value: float,
    params: RelaxationParams,
    trials: int,
    seed: int,
    n_sqe: int = 256,
    grid_size: int = 16,
) -> float:
    """Mean relaxation time (sweeps) over seeded random initial states."""
    return float(relax_time_samples(g_peak_value, params, trials, seed,
                                    n_sqe=n_sqe, grid_size=grid_size).mean())
