"""Fixed-budget two-species ensemble model.

A system is composed of a fixed total of N discrete constituents split
between two species. Each species carries an intensive parameter whose
sharpness scales as 1/sqrt(count), so sharpening one variable (growing its
species) necessarily blurs the other. The product of the two relative
spreads obeys a Heisenberg-like lower bound, with equality exactly at the
even split, and the bound's overall scale plays the role of an emergent
action quantum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .seeding import derive_seed, generator_for


@dataclass(frozen=True)
class ModelASpecies:
    """One species: count, spread constant k, linearization l, values a/A.

    ``j = l * k`` is derived. All real parameters must be positive.
    """

    count: int
    k: float
    l: float
    intensive_value: float
    extensive_value: float

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError(f"count must be >= 1, got {self.count}")
        for name in ("k", "l", "intensive_value", "extensive_value"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be a positive finite real, got {v}")

    @property
    def j(self) -> float:
        return self.l * self.k


@dataclass(frozen=True)
class ModelAConfig:
    """Two species sharing a fixed total count, plus a target action scale."""

    total_n: int
    species_a: ModelASpecies
    species_b: ModelASpecies
    hbar: float = 1.0

    def __post_init__(self) -> None:
        if self.species_a.count + self.species_b.count != self.total_n:
            raise ValueError(
                f"species counts {self.species_a.count}+{self.species_b.count} "
                f"!= total_n {self.total_n}"
            )
        if not (self.hbar > 0 and math.isfinite(self.hbar)):
            raise ValueError(f"hbar must be positive, got {self.hbar}")


def relative_spread(species: ModelASpecies) -> float:
    """Relative spread k*a/sqrt(count) of the species' extensive variable."""
    return species.k * species.intensive_value / math.sqrt(species.count)


def _product_pair(config: ModelAConfig, scale: float) -> dict:
    # lhs = scale/sqrt(Na*Nb), bound = scale/(N/2); writing the bound this way
    # makes lhs == bound bitwise at the even split, where sqrt(Na*Nb) == N/2.
    na, nb = config.species_a.count, config.species_b.count
    lhs = scale / math.sqrt(na * nb)
    bound = scale / (config.total_n / 2.0)
    return {"lhs": lhs, "bound": bound, "holds": lhs >= bound}


def uncertainty_product(config: ModelAConfig) -> dict:
    """Spread product k_a k_b a b / sqrt(Na Nb) against its (2/N) lower bound."""
    a, b = config.species_a, config.species_b
    return _product_pair(config, a.k * b.k * a.intensive_value * b.intensive_value)


def intensive_product_bound(config: ModelAConfig) -> dict:
    """Intensive-variable spread product against the (2/N) j_a j_b A B bound."""
    a, b = config.species_a, config.species_b
    return _product_pair(config, a.j * b.j * a.extensive_value * b.extensive_value)


def effective_hbar(config: ModelAConfig) -> float:
    """The emergent action scale (4/N) a b j_a j_b A B."""
    a, b = config.species_a, config.species_b
    return (
        4.0
        * a.intensive_value
        * b.intensive_value
        * a.j
        * b.j
        * a.extensive_value
        * b.extensive_value
        / config.total_n
    )


def estimate_n(
    hbar: float,
    *,
    a: float,
    b: float,
    j_a: float,
    j_b: float,
    ext_a: float,
    ext_b: float,
) -> float:
    """Invert the action scale for N: the constituent count a given hbar implies."""
    if not (hbar > 0 and math.isfinite(hbar)):
        raise ValueError(f"hbar must be positive, got {hbar}")
    return 4.0 * a * b * j_a * j_b * ext_a * ext_b / hbar


def estimate_n_for(config: ModelAConfig) -> float:
    """estimate_n with factors taken from a config (its total_n is ignored)."""
    sa, sb = config.species_a, config.species_b
    return estimate_n(
        config.hbar,
        a=sa.intensive_value,
        b=sb.intensive_value,
        j_a=sa.j,
        j_b=sb.j,
        ext_a=sa.extensive_value,
        ext_b=sb.extensive_value,
    )


def simulate_species_spread(
    count: int,
    per_entity_mean: float,
    per_entity_sd: float,
    trials: int,
    seed: int,
    sampler: Callable[[np.random.Generator, int], np.ndarray] | None = None,
) -> float:
    """Empirical relative spread of a sum of ``count`` i.i.d. contributions.

    Each trial draws ``count`` per-entity contributions (Gaussian by default,
    pluggable via ``sampler``) from its own counter-derived substream and sums
    them; returns sample_sd(sums) / sample_mean(sums). Deterministic in
    ``seed`` and independent of trial evaluation order.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if trials < 2:
        raise ValueError("trials must be >= 2")
    if per_entity_mean == 0:
        raise ValueError("per_entity_mean must be nonzero (relative spread undefined)")
    if per_entity_sd < 0:
        raise ValueError("per_entity_sd must be >= 0")

    if sampler is None:
        def sampler(rng: np.random.Generator, n: int) -> np.ndarray:
            return rng.normal(per_entity_mean, per_entity_sd, size=n)

    sums = np.empty(trials)
    for t in range(trials):
        rng = generator_for(derive_seed(seed, ("species-spread", t)))
        sums[t] = sampler(rng, count).sum()
    mean = sums.mean()
    if mean == 0:
        raise ValueError("trial sums averaged to zero; relative spread undefined")
    return float(sums.std(ddof=1) / mean)


def sweep_splits(total_n: int, k_a=1.0, k_b=1.0, a=1.0, b=1.0) -> list[dict]:
    """uncertainty_product over every split N_a = 1..N-1 (unit l and values A,B)."""
    rows = []
    for na in range(1, total_n):
        cfg = ModelAConfig(
            total_n=total_n,
            species_a=ModelASpecies(na, k_a, 1.0, a, 1.0),
            species_b=ModelASpecies(total_n - na, k_b, 1.0, b, 1.0),
        )
        res = uncertainty_product(cfg)
        rows.append({"n_a": na, "n_b": total_n - na, **res})
    return rows
