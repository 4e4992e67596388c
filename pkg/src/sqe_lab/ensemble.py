"""Ensemble state: N entities, each with a persistent hidden phase and a
definite value in [-1, +1] for every observable on the grid.

The hidden phase u_i is drawn once at creation and never mutated. An
equilibrium (eigenstate) table is nested-threshold structured: entity i
holds +1 for observable alpha exactly when u_i < w(alpha), where w is the
weight table of the equilibrium's peak. One entity therefore carries
definite values for all observables at once, with the population fraction
at +1 equal to w(alpha) in expectation for every alpha.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .coupling import weight_table
from .grid import AlphaGrid
from .seeding import uniform_window


@dataclass(frozen=True)
class SqeMicrostate:
    """Persistent hidden phase of one entity (fixed at ensemble creation)."""

    u: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.u < 1.0):
            raise ValueError(f"u must lie in [0, 1), got {self.u}")


@dataclass
class EnsembleState:
    grid: AlphaGrid
    microstates: np.ndarray  # (N,) floats in [0, 1), read-only
    values: np.ndarray       # (N, M) floats in [-1, +1]
    equilibrium: tuple[int, int] | None = None  # (alpha_index, m), stored with m=+1

    def __post_init__(self) -> None:
        self.microstates = np.asarray(self.microstates, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        n = self.microstates.shape[0]
        if n < 1 or self.microstates.ndim != 1:
            raise ValueError("microstates must be a non-empty 1-d array")
        if self.values.shape != (n, self.grid.size):
            raise ValueError(
                f"values shape {self.values.shape} != (n_sqe, grid size) "
                f"({n}, {self.grid.size})"
            )
        self.microstates.flags.writeable = False

    @property
    def n_sqe(self) -> int:
        return self.microstates.shape[0]

    def copy(self) -> "EnsembleState":
        return replace(self, values=self.values.copy())


def canonicalize(grid: AlphaGrid, alpha0: float, m: int) -> tuple[float, int]:
    """Normalize an eigenstate label: (alpha0, -1) is (alpha0 + pi, +1)."""
    idx = canonical_index(grid, grid.index_of(alpha0), m)
    return grid.angle(idx), 1


def canonical_index(grid: AlphaGrid, index: int, m: int) -> int:
    if m == 1:
        return index % grid.size
    if m == -1:
        return grid.antipode(index)
    raise ValueError(f"eigenvalue must be +1 or -1, got {m}")


def eigenstate_values(microstates: np.ndarray, grid: AlphaGrid, peak_index: int) -> np.ndarray:
    """The nested-threshold value table of the eigenstate peaked at peak_index."""
    w = weight_table(grid, peak_index)
    return np.where(microstates[:, None] < w[None, :], 1.0, -1.0)


def init_eigenstate(
    n_sqe: int,
    grid: AlphaGrid,
    alpha0: float,
    m: int,
    seed: int,
    window: int = 0,
) -> EnsembleState:
    """Fresh equilibrium ensemble for the eigenstate (alpha0, m).

    Hidden phases come from stream window ``window`` of the Philox stream
    keyed by ``seed`` (window 0 by default), so batch experiments can
    address per-trial ensembles inside one keyed stream.
    """
    if n_sqe < 2:
        raise ValueError(f"n_sqe must be >= 2, got {n_sqe}")
    peak = canonical_index(grid, grid.index_of(alpha0), m)
    u = uniform_window(seed, window, n_sqe)
    return EnsembleState(
        grid=grid,
        microstates=u,
        values=eigenstate_values(u, grid, peak),
        equilibrium=(peak, 1),
    )


def ensemble_average(state: EnsembleState, alpha: float) -> float:
    """Mean of all entity values for the observable at ``alpha``."""
    return float(state.values[:, state.grid.index_of(alpha)].mean())


def fractional_volume(state: EnsembleState, alpha: float) -> float:
    """Fraction of entities holding a positive value at ``alpha``."""
    return float((state.values[:, state.grid.index_of(alpha)] > 0).mean())


def fractional_volume_index(state: EnsembleState, index: int) -> float:
    return float((state.values[:, index] > 0).mean())


def is_equilibrium(state: EnsembleState, alpha: float, eps: float) -> bool:
    """True iff every value at ``alpha`` sits within eps of one eigenvalue."""
    return is_equilibrium_index(state, state.grid.index_of(alpha), eps)


def is_equilibrium_index(state: EnsembleState, index: int, eps: float) -> bool:
    col = state.values[:, index]
    return bool(np.abs(col - 1.0).max() <= eps or np.abs(col + 1.0).max() <= eps)


def equilibrium_scan(state: EnsembleState, eps: float) -> np.ndarray:
    """Boolean mask over grid indices where the column is in equilibrium."""
    dev_plus = np.abs(state.values - 1.0).max(axis=0)
    dev_minus = np.abs(state.values + 1.0).max(axis=0)
    return (dev_plus <= eps) | (dev_minus <= eps)
