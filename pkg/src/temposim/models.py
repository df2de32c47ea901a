"""Concrete model builders: spin-boson (spin-1/2 and spin-1) and the
two-spin common-environment model projected onto its anti-aligned subspace.
"""

from dataclasses import dataclass
from typing import Dict, Union

import numpy as np

from .bath import (
    SpectralDensity,
    effective_spectral_density,
    ohmic_density,
    power_exp_density,
)
from .liouville import SystemSpec

__all__ = [
    "SpinBosonSpec",
    "TwoSpinSpec",
    "ModelParts",
    "spin_matrices",
    "build_spin_boson",
    "build_two_spin",
]


def spin_matrices(spin: str):
    """Sx, Sy, Sz for spin one-half or one."""
    if spin == "half":
        sx = 0.5 * np.array([[0, 1], [1, 0]], dtype=complex)
        sy = 0.5 * np.array([[0, -1j], [1j, 0]], dtype=complex)
        sz = 0.5 * np.array([[1, 0], [0, -1]], dtype=complex)
    elif spin == "one":
        s2 = 1.0 / np.sqrt(2.0)
        sx = s2 * np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex)
        sy = s2 * np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]],
                           dtype=complex)
        sz = np.diag([1.0, 0.0, -1.0]).astype(complex)
    else:
        raise ValueError(f"spin must be 'half' or 'one', got {spin!r}")
    return sx, sy, sz


@dataclass
class ModelParts:
    """System spec, spectral density and default observables for a model."""

    system: SystemSpec
    density: SpectralDensity
    observables: Dict[str, np.ndarray]


@dataclass
class SpinBosonSpec:
    """Unbiased spin-boson model: H0 = omega Sx, coupling O = Sz, Ohmic bath."""

    spin: str = "half"
    omega: float = 1.0
    alpha: float = 0.0
    omega_c: float = 5.0
    temperature: float = 0.0
    initial: Union[str, np.ndarray] = "sz_max"

    def __post_init__(self):
        if self.spin not in ("half", "one"):
            raise ValueError(f"spin must be 'half' or 'one', got {self.spin!r}")
        if self.alpha < 0 or self.omega_c <= 0 or self.temperature < 0:
            raise ValueError("require alpha >= 0, omega_c > 0, T >= 0")


def build_spin_boson(sbs: SpinBosonSpec) -> ModelParts:
    """System and bath for the unbiased SBM; initial 'sz_max' is the
    highest-Sz eigenstate."""
    sx, _, sz = spin_matrices(sbs.spin)
    d = sz.shape[0]
    if isinstance(sbs.initial, str):
        if sbs.initial != "sz_max":
            raise ValueError(f"unknown initial state {sbs.initial!r}")
        rho0 = np.zeros((d, d), dtype=complex)
        rho0[0, 0] = 1.0
    else:
        rho0 = np.asarray(sbs.initial, dtype=complex)
    system = SystemSpec(hamiltonian=sbs.omega * sx, coupling=sz,
                        initial_state=rho0)
    density = ohmic_density(sbs.alpha, sbs.omega_c)
    return ModelParts(system=system, density=density,
                      observables={"sz": sz, "sx": sx})


@dataclass
class TwoSpinSpec:
    """Two spins-1/2 a distance R apart in one common D-dimensional bath,
    coupled by an isotropic Heisenberg exchange of strength omega.

    The speed of sound is fixed to 1, so R is measured in the same units
    as inverse frequency.
    """

    omega: float = 1.0
    alpha: float = 1.0
    omega_c: float = 0.5
    temperature: float = 0.5
    separation: float = 10.0
    dim: int = 1

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"environment dimension must be 1, 2 or 3, "
                             f"got {self.dim}")
        if self.separation < 0:
            raise ValueError("separation must be >= 0")
        if self.alpha < 0 or self.omega_c <= 0 or self.temperature < 0:
            raise ValueError("require alpha >= 0, omega_c > 0, T >= 0")


def build_two_spin(ts: TwoSpinSpec) -> ModelParts:
    """Project onto the conserved anti-aligned subspace {up-down, down-up}.

    The Heisenberg exchange restricts to off-diagonal omega/2 (constant
    diagonal offsets -omega/4 are dropped: they commute with everything);
    the bath couples through (Sz_a - Sz_b)/2 = diag(1/2, -1/2), and the
    separation enters only through the effective spectral density
    2 J_p(w) (1 - F_D(w R)).  Initial state up-down; observable P is its
    population.
    """
    hamiltonian = 0.5 * ts.omega * np.array([[0, 1], [1, 0]], dtype=complex)
    coupling = np.diag([0.5, -0.5]).astype(complex)
    rho0 = np.diag([1.0, 0.0]).astype(complex)
    base = power_exp_density(ts.alpha, ts.omega_c, ts.dim)
    density = effective_spectral_density(base, ts.separation, ts.dim)
    projector = np.diag([1.0, 0.0]).astype(complex)
    system = SystemSpec(hamiltonian=hamiltonian, coupling=coupling,
                        initial_state=rho0)
    return ModelParts(system=system, density=density,
                      observables={"P": projector})
