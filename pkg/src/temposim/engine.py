"""Propagation engine: grow and fixed-memory phases, readout, statistics.

`run_tempo` advances the MPS-compressed augmented state; `run_brute_force`
runs the identical contract on the densely stored history tensor (no
truncation) and serves as the exactness reference for small memory
lengths.  Both record per-step statistics (total stored elements, maximum
bond dimension, cumulative truncation weight, wall time) and extract the
physical density matrix after every step.
"""

import time
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .bath import BathConfig, SpectralDensity, eta_table
from .errors import NumericalBlowupError
from .liouville import (
    LiouvilleBasis,
    SystemSpec,
    free_propagator,
    influence_table,
    liouville_basis,
    reduce_classes,
)
from .propnet import apply_grow, apply_step, build_grow_mpo, build_step_mpo
from .tensornet import (
    MatrixProductState,
    TruncationPolicy,
    mps_contract_weighted,
)

__all__ = [
    "SimulationConfig",
    "RunStats",
    "Trajectory",
    "run_tempo",
    "run_brute_force",
    "extract_density",
]

DEFAULT_BLOWUP = 1e12
DEFAULT_DENSE_LIMIT = 4 ** 8


@dataclass
class SimulationConfig:
    """Everything needed for one propagation run.

    ``memory >= steps`` means no memory cutoff: the state keeps growing
    and stale legs are never summed away.
    """

    system: SystemSpec
    density: SpectralDensity
    bath: BathConfig
    delta: float
    steps: int
    memory: int
    policy: TruncationPolicy = field(default_factory=TruncationPolicy)
    mode: str = "symmetrized"
    observables: Dict[str, np.ndarray] = field(default_factory=dict)
    reduce: bool = False
    blowup_threshold: float = DEFAULT_BLOWUP
    dense_limit: int = DEFAULT_DENSE_LIMIT

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError(f"delta must be > 0, got {self.delta}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.memory < 1:
            raise ValueError(f"memory must be >= 1, got {self.memory}")
        if self.mode not in ("first_order", "symmetrized"):
            raise ValueError(f"unknown Trotter mode {self.mode!r}")

    @property
    def effective_memory(self) -> int:
        return min(self.memory, self.steps)


@dataclass
class RunStats:
    """Per-step resource statistics (index 0 is the initial state)."""

    n_tot: np.ndarray
    bond_max: np.ndarray
    wall_time: np.ndarray
    discarded_weight: np.ndarray  # cumulative

    @classmethod
    def empty(cls, steps: int) -> "RunStats":
        return cls(n_tot=np.zeros(steps + 1, dtype=int),
                   bond_max=np.zeros(steps + 1, dtype=int),
                   wall_time=np.zeros(steps + 1),
                   discarded_weight=np.zeros(steps + 1))


@dataclass
class Trajectory:
    """Time series produced by one run."""

    times: np.ndarray
    rho: np.ndarray            # (steps + 1, d, d), computational basis
    observables: Dict[str, np.ndarray]
    trace_error: np.ndarray
    stats: RunStats


class _Readout:
    """Shared extraction of rho(t) and observables from either backend."""

    def __init__(self, cfg: SimulationConfig, basis: LiouvilleBasis,
                 half: np.ndarray):
        self.cfg = cfg
        self.basis = basis
        self.half = half if cfg.mode == "symmetrized" else None
        self.n = cfg.steps
        d = basis.dim
        self.traj = Trajectory(
            times=cfg.delta * np.arange(cfg.steps + 1),
            rho=np.zeros((cfg.steps + 1, d, d), dtype=complex),
            observables={name: np.zeros(cfg.steps + 1)
                         for name in cfg.observables},
            trace_error=np.zeros(cfg.steps + 1),
            stats=RunStats.empty(cfg.steps),
        )

    def record_vec(self, step: int, vec: np.ndarray, *, n_tot: int,
                   bond_max: int, wall: float, discarded: float):
        if self.half is not None and step > 0:
            vec = self.half @ vec
        rho = self.basis.unvectorize(vec)
        self.traj.rho[step] = rho
        self.traj.trace_error[step] = abs(np.trace(rho) - 1.0)
        for name, op in self.cfg.observables.items():
            self.traj.observables[name][step] = np.trace(rho @ op).real
        st = self.traj.stats
        st.n_tot[step] = n_tot
        st.bond_max[step] = bond_max
        st.wall_time[step] = wall
        st.discarded_weight[step] = discarded


def _prepare(cfg: SimulationConfig):
    basis = liouville_basis(cfg.system.coupling)
    prop = free_propagator(cfg.system, cfg.delta, basis)
    table_memory = cfg.effective_memory
    etas = eta_table(cfg.density, cfg.bath, cfg.delta, table_memory)
    with np.errstate(over="ignore"):
        table = influence_table(basis, etas, prop, cfg.mode)
    table_max = max(float(np.max(np.abs(m))) for m in table.matrices)
    if not np.isfinite(table_max):
        raise NumericalBlowupError(
            "influence amplitudes overflow before step 1 "
            f"(relative_cutoff={cfg.policy.relative_cutoff:g})",
            step=1, relative_cutoff=cfg.policy.relative_cutoff)
    classes = reduce_classes(basis) if cfg.reduce else None
    return basis, prop, table, classes


def _first_step_vector(cfg, basis, prop, table) -> np.ndarray:
    """One free step applied to the initial state, then the I_0 weight.

    Symmetrized mode opens with a half free step (the closing half step
    is applied at readout), first order with a full step.
    """
    vec = basis.vectorize(cfg.system.initial_state)
    step_matrix = prop.half if cfg.mode == "symmetrized" else prop.full
    vec = step_matrix @ vec
    return np.diag(table[0]) * vec


def _guard(state_max: float, step: int, cfg: SimulationConfig):
    if not np.isfinite(state_max) or state_max > cfg.blowup_threshold:
        raise NumericalBlowupError(
            f"state amplitude {state_max:.3e} exceeded the divergence guard "
            f"at step {step} (relative_cutoff={cfg.policy.relative_cutoff:g})",
            step=step, relative_cutoff=cfg.policy.relative_cutoff)


def extract_density(adt: MatrixProductState,
                    basis: Optional[LiouvilleBasis] = None):
    """Marginal density of the newest leg: sum over all history legs.

    Returns the Liouville vector in the O-eigenbasis indexing, or the
    rotated d x d density matrix when a basis is supplied.
    """
    weights = ["open"] + [np.ones(d) for d in adt.physical_dims[1:]]
    vec = np.asarray(mps_contract_weighted(adt, weights))
    if basis is None:
        return vec
    return basis.unvectorize(vec)


def run_tempo(cfg: SimulationConfig) -> Trajectory:
    """Propagate with the MPS-compressed augmented state.

    Steps 2..K grow the state by one leg each (building the staircase
    MPOs once per size); steps beyond K reuse a single fixed-memory MPO.
    """
    basis, prop, table, classes = _prepare(cfg)
    readout = _Readout(cfg, basis, prop.half)
    memory = cfg.effective_memory

    readout.record_vec(0, basis.vectorize(cfg.system.initial_state),
                       n_tot=basis.liouville_dim, bond_max=1, wall=0.0,
                       discarded=0.0)
    t0 = time.perf_counter()
    state = MatrixProductState(
        [_first_step_vector(cfg, basis, prop, table).reshape(1, -1, 1)])
    _guard(state.max_abs(), 1, cfg)
    readout.record_vec(1, extract_density(state),
                       n_tot=state.total_size, bond_max=state.max_bond,
                       wall=time.perf_counter() - t0,
                       discarded=state.discarded_weight)

    step_mpo = None
    if cfg.steps > memory:
        step_mpo = build_step_mpo(memory, table, classes)
    for n in range(2, cfg.steps + 1):
        t0 = time.perf_counter()
        if n <= memory:
            state = apply_grow(state, build_grow_mpo(n, table, classes),
                               cfg.policy)
        else:
            state = apply_step(state, step_mpo, cfg.policy)
        _guard(state.max_abs(), n, cfg)
        readout.record_vec(n, extract_density(state),
                           n_tot=state.total_size, bond_max=state.max_bond,
                           wall=time.perf_counter() - t0,
                           discarded=state.discarded_weight)
    return readout.traj


def _dense_influence_factor(matrix: np.ndarray, ndim: int,
                            axis: int) -> np.ndarray:
    """View of I[j_new, j_axis] broadcastable against a dense state."""
    d2 = matrix.shape[0]
    shape = (d2,) + (1,) * (axis - 1) + (d2,) + (1,) * (ndim - axis - 1)
    return matrix.reshape(shape)


def run_brute_force(cfg: SimulationConfig) -> Trajectory:
    """Identical contract to `run_tempo` with the dense history tensor.

    No truncation is performed; storage is (d^2)^K, so the configured
    dense limit caps the reachable memory length.
    """
    basis, prop, table, _ = _prepare(cfg)
    memory = cfg.effective_memory
    d2 = basis.liouville_dim
    if d2 ** memory > cfg.dense_limit:
        raise ValueError(
            f"dense history of size {d2}^{memory} exceeds the limit "
            f"{cfg.dense_limit}")
    readout = _Readout(cfg, basis, prop.half)
    readout.record_vec(0, basis.vectorize(cfg.system.initial_state),
                       n_tot=d2, bond_max=0, wall=0.0, discarded=0.0)

    t0 = time.perf_counter()
    state = _first_step_vector(cfg, basis, prop, table)
    i0_diag = np.diag(table[0])

    def record(step, arr, t_start):
        axes = tuple(range(1, arr.ndim))
        vec = arr.sum(axis=axes) if axes else arr
        readout.record_vec(step, vec, n_tot=arr.size, bond_max=0,
                           wall=time.perf_counter() - t_start, discarded=0.0)

    record(1, state, t0)
    for n in range(2, cfg.steps + 1):
        t0 = time.perf_counter()
        if n <= memory:
            state = state[None, ...] * i0_diag.reshape(
                (d2,) + (1,) * state.ndim)
            for k in range(1, n):
                state = state * _dense_influence_factor(table[k], n, k)
        else:
            state = np.tensordot(table[memory], state,
                                 axes=([1], [memory - 1]))
            state *= i0_diag.reshape((d2,) + (1,) * (memory - 1))
            for k in range(1, memory):
                state = state * _dense_influence_factor(table[k], memory, k)
        m = float(np.max(np.abs(state)))
        _guard(m, n, cfg)
        record(n, state, t0)
    return readout.traj
