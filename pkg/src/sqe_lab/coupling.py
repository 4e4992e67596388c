"""Coupling fields over the grid, the admissibility constraint, and the
transition-weight functional with its independent two-state oracle.

The admissible couplings form a one-parameter family: for a peak angle
alpha0, g(alpha) = cos^2((alpha - alpha0)/2). A field in the family has a
unique unit-height peak and vanishes exactly at the peak's antipode, so at
most one observable (plus its sign-flipped antipode) can fully equilibrate.
The transition weight from an equilibrium at the peak to an outcome at
alpha is then just F(g(peak), g(alpha)) = g(alpha)/g(peak), a functional
that never inspects alpha itself. It reproduces the squared overlap of
two-component spin states, which ``qm_oracle`` computes independently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import TWO_PI, AlphaGrid

CONSTRAINT_TOL = 1e-9


class ConstraintError(ValueError):
    """A coupling field violates the admissibility constraint."""


def weight_table(grid: AlphaGrid, peak_index: int) -> np.ndarray:
    """cos^2((alpha - alpha_peak)/2) at every grid point.

    Evaluated as (1 + cos(theta))/2 on index differences so that the peak
    is exactly 1.0 and the antipode exactly 0.0 in floating point.
    """
    d = (np.arange(grid.size) - peak_index) % grid.size
    out = 0.5 * (1.0 + np.cos(d * (TWO_PI / grid.size)))
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class CouplingField:
    grid: AlphaGrid
    values: np.ndarray
    peak_index: int

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.size,):
            raise ValueError(f"values shape {v.shape} != grid size ({self.grid.size},)")
        if v.min() < 0.0 or v.max() > 1.0:
            raise ValueError("coupling values must lie in [0, 1]")
        if not (0 <= self.peak_index < self.grid.size):
            raise ValueError(f"peak_index {self.peak_index} out of range")
        if v[self.peak_index] != v.max() or v.max() <= 0.0:
            raise ValueError("peak_index must locate a positive maximum")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def value_at(self, alpha: float) -> float:
        return float(self.values[self.grid.index_of(alpha)])


@dataclass(frozen=True)
class ConstraintReport:
    satisfied: bool
    residual: float


def coupling_for_eigenstate(grid: AlphaGrid, alpha0: float) -> CouplingField:
    """The admissible field peaked at grid angle alpha0."""
    peak = grid.index_of(alpha0)
    return CouplingField(grid=grid, values=weight_table(grid, peak), peak_index=peak)


def check_constraint(g: CouplingField) -> ConstraintReport:
    """Max deviation of g from the admissible family keyed at its peak.

    A satisfied field (residual <= 1e-9) is guaranteed a unique peak, hence
    exactly one fully equilibrating observable family.
    """
    canonical = weight_table(g.grid, g.peak_index)
    residual = float(np.max(np.abs(g.values - canonical)))
    unique_peak = int(np.count_nonzero(g.values == g.values.max())) == 1
    return ConstraintReport(satisfied=residual <= CONSTRAINT_TOL and unique_peak,
                            residual=residual)


def born_functional(g: CouplingField, alpha: float) -> float:
    """Transition probability F(g(peak), g(alpha)) = g(alpha)/g(peak).

    Probability that a measurement at ``alpha`` on an equilibrium state at
    the field's peak yields +1. Requires an admissible field.
    """
    report = check_constraint(g)
    if not report.satisfied:
        raise ConstraintError(f"coupling field violates constraint (residual {report.residual:g})")
    j = g.grid.index_of(alpha)
    return float(g.values[j] / g.values[g.peak_index])


def qm_oracle(alpha0: float, alpha: float) -> float:
    """|<alpha,+|alpha0,+>|^2 from explicit two-component states.

    The +1 state at angle a has components (cos(a/2), sin(a/2)). Works for
    arbitrary angles, not just grid points; serves as the independent check
    on ``born_functional``.
    """
    overlap = (
        np.cos(alpha / 2.0) * np.cos(alpha0 / 2.0)
        + np.sin(alpha / 2.0) * np.sin(alpha0 / 2.0)
    )
    return float(overlap * overlap)
