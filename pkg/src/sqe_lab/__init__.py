"""sqe-lab: a deterministic Monte Carlo lab where quantum statistics
(Born weights, collapse, smooth evolution, singlet correlations) emerge
from ensembles of classical entities with definite properties."""

__version__ = "0.1.0"

from .coupling import (
    ConstraintError,
    ConstraintReport,
    CouplingField,
    born_functional,
    check_constraint,
    coupling_for_eigenstate,
    qm_oracle,
    weight_table,
)
from .ensemble import (
    EnsembleState,
    SqeMicrostate,
    canonicalize,
    ensemble_average,
    fractional_volume,
    init_eigenstate,
    is_equilibrium,
)
from .entanglement import (
    DoubleMeasurementError,
    PairedEnsemble,
    SpaceEvent,
    chsh,
    correlation,
    marginal_check,
    measure_side,
    prepare_singlet,
)
from .evolution import (
    EvolutionPlan,
    RegimeReport,
    detect_improper,
    evolve,
    unitary_step,
)
from .grid import AlphaGrid, OffGridError
from .measurement import (
    HiddenSeeds,
    MeasurementRecord,
    StateNotPureError,
    hidden_uniform,
    ideal_measure,
    pointer_reading,
)
from .model_a import (
    ModelAConfig,
    ModelASpecies,
    effective_hbar,
    estimate_n,
    intensive_product_bound,
    relative_spread,
    simulate_species_spread,
    uncertainty_product,
)
from .relaxation import (
    RelaxationOutcome,
    RelaxationParams,
    measure_relax_time,
    relax_step,
    relax_to_equilibrium,
)
from .seeding import derive_seed
