"""Discretized circular parameter manifold for the observable family.

Observables are indexed by an angle alpha on a circle; the grid holds M
evenly spaced angles 2*pi*j/M with M even, so every angle has its antipode
on the grid (the same observable with flipped sign).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

TWO_PI = 2.0 * np.pi


class OffGridError(ValueError):
    """An angle does not coincide with any grid point."""


@dataclass(frozen=True)
class AlphaGrid:
    size: int

    def __post_init__(self) -> None:
        if self.size < 4:
            raise ValueError(f"grid size must be >= 4, got {self.size}")
        if self.size % 2:
            raise ValueError(f"grid size must be even, got {self.size}")

    @cached_property
    def angles(self) -> np.ndarray:
        out = np.arange(self.size) * (TWO_PI / self.size)
        out.flags.writeable = False
        return out

    def angle(self, index: int) -> float:
        return float(self.angles[index % self.size])

    def index_of(self, alpha: float, tol: float = 1e-9) -> int:
        """Grid index of an angle; raises OffGridError beyond ``tol``."""
        step = TWO_PI / self.size
        j = int(round(alpha / step)) % self.size
        resid = (alpha - j * step) % TWO_PI
        if min(resid, TWO_PI - resid) > tol:
            raise OffGridError(f"angle {alpha!r} is not a grid point (M={self.size})")
        return j

    def antipode(self, index: int) -> int:
        return (index + self.size // 2) % self.size

    def arc_steps(self, start_index: int, end_index: int) -> int:
        """Signed shortest arc from start to end, in grid units (ties go positive)."""
        d = (end_index - start_index) % self.size
        return d if d <= self.size // 2 else d - self.size
