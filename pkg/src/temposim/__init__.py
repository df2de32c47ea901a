"""Time-evolving matrix product operators for non-Markovian open dynamics.

The package propagates an open quantum system coupled to a harmonic bath
by representing the history-augmented state as an MPS and the discretised
influence-functional propagator as an MPO, compressing with truncated
SVDs after every step.
"""

__version__ = "0.1.0"

from .analysis import (
    DecayFit,
    ExtrapolationResult,
    estimate_alpha_c,
    extrapolate_gamma,
    fit_exponential,
)
from .bath import (
    BathConfig,
    EtaTable,
    PowerExpDensity,
    SpectralDensity,
    TabulatedDensity,
    TwoSpinEffectiveDensity,
    correlation,
    effective_spectral_density,
    eta,
    eta_table,
    ohmic_density,
    power_exp_density,
    tabulated_density_from_file,
)
from .engine import (
    RunStats,
    SimulationConfig,
    Trajectory,
    extract_density,
    run_brute_force,
    run_tempo,
)
from .errors import (
    ClassConsistencyError,
    ConfigError,
    ContractShapeError,
    ExtrapolationError,
    FitWindowError,
    NumericalBlowupError,
    QuadratureError,
    SvdConvergenceError,
    TempoSimError,
)
from .liouville import (
    InfluenceTable,
    LiouvilleBasis,
    SystemPropagator,
    SystemSpec,
    free_propagator,
    influence_table,
    liouville_basis,
    reduce_classes,
)
from .models import (
    ModelParts,
    SpinBosonSpec,
    TwoSpinSpec,
    build_spin_boson,
    build_two_spin,
    spin_matrices,
)
from .propnet import (
    BSite,
    apply_grow,
    apply_step,
    build_bsite,
    build_grow_mpo,
    build_step_mpo,
)
from .tensornet import (
    MatrixProductOperator,
    MatrixProductState,
    SvdResult,
    TruncationPolicy,
    mps_apply_mpo,
    mps_compress,
    mps_contract_weighted,
    mps_from_tensor,
    svd_truncate,
)
