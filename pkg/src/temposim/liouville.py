"""System-side Liouville machinery: basis, free propagator, influence tables.

Density operators are flattened row-major over the eigenbasis of the
coupling operator O, sorted by descending eigenvalue: the Liouville index
j corresponds to the ordered pair (s, s') with j = s * d + s'.  The
difference and sum vectors

    Ominus_j = o_s - o_s',      Oplus_j = o_s + o_s'

index the influence functions

    I_k(j, j') = exp(-Ominus_j (Ominus_j' Re eta_k + i Oplus_j' Im eta_k))

for every lag except k = 1, which additionally carries the free
propagator exp(delta L0) elementwise (the short-time splitting applies
free evolution between consecutive influence dressings).
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .bath import EtaTable
from .errors import ClassConsistencyError

__all__ = [
    "SystemSpec",
    "LiouvilleBasis",
    "SystemPropagator",
    "InfluenceTable",
    "IndexClasses",
    "liouville_basis",
    "free_propagator",
    "influence_table",
    "reduce_classes",
    "MODES",
]

HERMITICITY_TOL = 1e-12
MODES = ("first_order", "symmetrized")


def _check_hermitian(name: str, m: np.ndarray):
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got {m.shape}")
    if np.max(np.abs(m - m.conj().T)) > HERMITICITY_TOL * max(1.0, np.max(np.abs(m))):
        raise ValueError(f"{name} is not Hermitian")


@dataclass
class SystemSpec:
    """Free Hamiltonian, bath-coupling operator and initial density matrix."""

    hamiltonian: np.ndarray
    coupling: np.ndarray
    initial_state: np.ndarray

    def __post_init__(self):
        self.hamiltonian = np.asarray(self.hamiltonian, dtype=complex)
        self.coupling = np.asarray(self.coupling, dtype=complex)
        self.initial_state = np.asarray(self.initial_state, dtype=complex)
        _check_hermitian("hamiltonian", self.hamiltonian)
        _check_hermitian("coupling", self.coupling)
        _check_hermitian("initial_state", self.initial_state)
        if self.coupling.shape != self.hamiltonian.shape or \
                self.initial_state.shape != self.hamiltonian.shape:
            raise ValueError("hamiltonian, coupling and initial_state must "
                             "share one dimension")
        trace = np.trace(self.initial_state)
        if abs(trace - 1.0) > 1e-10:
            raise ValueError(f"initial state must have unit trace, got {trace}")
        if np.min(np.linalg.eigvalsh(self.initial_state)) < -1e-10:
            raise ValueError("initial state must be positive semidefinite")

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


@dataclass
class LiouvilleBasis:
    """Eigen-decomposition of O and the derived Liouville index data."""

    eigenvalues: np.ndarray   # descending
    eigenvectors: np.ndarray  # columns, deterministic phases
    o_minus: np.ndarray       # length d^2
    o_plus: np.ndarray        # length d^2

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    @property
    def liouville_dim(self) -> int:
        return self.dim ** 2

    def vectorize(self, rho: np.ndarray) -> np.ndarray:
        """Density matrix (computational basis) -> Liouville vector."""
        w = self.eigenvectors
        return (w.conj().T @ rho @ w).reshape(-1)

    def unvectorize(self, vec: np.ndarray) -> np.ndarray:
        """Liouville vector -> density matrix in the computational basis."""
        d = self.dim
        w = self.eigenvectors
        return w @ vec.reshape(d, d) @ w.conj().T

    @property
    def trace_vector(self) -> np.ndarray:
        """Left fixed point of trace-preserving Liouville maps."""
        return np.eye(self.dim, dtype=complex).reshape(-1)


def liouville_basis(coupling: np.ndarray) -> LiouvilleBasis:
    """Diagonalise O with a deterministic ordering and phase convention.

    Eigenvalues are sorted descending; each eigenvector is rotated so its
    first non-negligible component is real and positive (lexicographic
    phase convention), making the Liouville indexing reproducible.
    """
    coupling = np.asarray(coupling, dtype=complex)
    _check_hermitian("coupling", coupling)
    evals, evecs = np.linalg.eigh(coupling)
    order = np.argsort(-evals, kind="stable")
    evals = evals[order].real
    evecs = evecs[:, order]
    for i in range(evecs.shape[1]):
        col = evecs[:, i]
        idx = np.argmax(np.abs(col) > 1e-12 * np.max(np.abs(col)))
        phase = col[idx] / abs(col[idx])
        evecs[:, i] = col / phase
    o_minus = (evals[:, None] - evals[None, :]).reshape(-1)
    o_plus = (evals[:, None] + evals[None, :]).reshape(-1)
    return LiouvilleBasis(eigenvalues=evals, eigenvectors=evecs,
                          o_minus=o_minus, o_plus=o_plus)


@dataclass
class SystemPropagator:
    """exp(delta L0) and exp(delta L0 / 2) in the O-eigenbasis indexing."""

    full: np.ndarray
    half: np.ndarray
    delta: float


def free_propagator(spec: SystemSpec, delta: float,
                    basis: Optional[LiouvilleBasis] = None) -> SystemPropagator:
    """Exact unitary Liouville propagators for the free Hamiltonian.

    L0 rho = -i [H0, rho]; in the row-major convention exp(delta L0) is
    the Kronecker product U (x) conj(U) with U = exp(-i delta H0), here
    built from the eigendecomposition of H0 (machine-precision exact).
    """
    if delta <= 0:
        raise ValueError("delta must be > 0")
    if basis is None:
        basis = liouville_basis(spec.coupling)
    w = basis.eigenvectors
    h_eig = w.conj().T @ spec.hamiltonian @ w

    def unitary(dt):
        evals, evecs = np.linalg.eigh(h_eig)
        return (evecs * np.exp(-1j * dt * evals)) @ evecs.conj().T

    u_full = unitary(delta)
    u_half = unitary(delta / 2)
    return SystemPropagator(full=np.kron(u_full, u_full.conj()),
                            half=np.kron(u_half, u_half.conj()),
                            delta=delta)


@dataclass
class InfluenceTable:
    """Per-lag influence matrices I_k, k = 0..K.

    ``matrices[1]`` already carries the full free-step propagator
    elementwise; in symmetrized mode the engine additionally applies half
    free-steps to the initial state and before each readout.
    """

    matrices: List[np.ndarray]
    mode: str
    basis: LiouvilleBasis
    propagator: SystemPropagator

    @property
    def memory(self) -> int:
        return len(self.matrices) - 1

    def __getitem__(self, k: int) -> np.ndarray:
        if k >= len(self.matrices):
            raise KeyError(f"influence table covers lags 0..{self.memory}, "
                           f"got {k}")
        return self.matrices[k]


def influence_table(basis: LiouvilleBasis, etas: EtaTable,
                    propagator: SystemPropagator,
                    mode: str = "symmetrized") -> InfluenceTable:
    """Build all influence matrices from the memory-kernel table."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if abs(propagator.delta - etas.delta) > 1e-14 * etas.delta:
        raise ValueError("propagator and eta table use different timesteps")
    om, op = basis.o_minus, basis.o_plus
    matrices = []
    for k in range(etas.memory + 1):
        e = etas[k]
        phi = -np.outer(om, om * e.real + 1j * op * e.imag)
        mat = np.exp(phi)
        if k == 1:
            mat = propagator.full * mat
        matrices.append(mat)
    return InfluenceTable(matrices=matrices, mode=mode, basis=basis,
                          propagator=propagator)


@dataclass
class IndexClasses:
    """Partition of Liouville indices by the value of Ominus.

    Classes are ordered by descending Ominus; ``labels[j]`` is the class
    of index j and ``representatives[c]`` one member of class c.
    """

    labels: np.ndarray
    representatives: np.ndarray
    values: np.ndarray

    @property
    def count(self) -> int:
        return len(self.representatives)

    def members(self, c: int) -> np.ndarray:
        return np.nonzero(self.labels == c)[0]


def reduce_classes(basis: LiouvilleBasis,
                   tol: Optional[float] = None) -> IndexClasses:
    """Group Liouville indices with equal Ominus (within tol).

    Generic spectra give d^2 - d + 1 classes; evenly spaced spectra (spin
    operators) give 2d - 1.
    """
    om = basis.o_minus
    if tol is None:
        scale = np.max(np.abs(om))
        tol = 1e-10 * scale if scale > 0 else 1e-10
    order = np.argsort(-om, kind="stable")
    labels = np.empty(len(om), dtype=int)
    reps = []
    values = []
    current = None
    for j in order:
        if current is None or abs(om[j] - current) > tol:
            current = om[j]
            reps.append(j)
            values.append(om[j])
        labels[j] = len(reps) - 1
    return IndexClasses(labels=labels,
                        representatives=np.asarray(reps, dtype=int),
                        values=np.asarray(values))


def check_class_rows(matrix: np.ndarray, classes: IndexClasses,
                     lag: int, tol: float = 1e-12):
    """Verify an influence matrix is constant across each row class.

    Raises ClassConsistencyError when two members of one class have rows
    differing beyond tol (relative to the largest magnitude present).
    """
    scale = max(float(np.max(np.abs(matrix))), 1.0)
    for c in range(classes.count):
        members = classes.members(c)
        ref = matrix[members[0]]
        for j in members[1:]:
            if np.max(np.abs(matrix[j] - ref)) > tol * scale:
                raise ClassConsistencyError(
                    f"influence rows {members[0]} and {j} differ within "
                    f"one Ominus class at lag {lag}")
