"""Bath spectral densities, autocorrelation function and memory kernels.

The bath enters the dynamics only through its spectral density J(w).  Two
quantities are derived from it: the autocorrelation function

    C(t) = \\int_0^inf dw J(w) [coth(w / 2T) cos(wt) - i sin(wt)]

(with coth -> 1 at T = 0) and the complex memory-kernel coefficients
eta_k, double time integrals of C over timestep windows at lag k.  The two
time integrals act only on cos/sin of w(t' - t'') and are carried out
analytically, reducing every eta_k to a single frequency quadrature:

    k = 0:   \\int dw J(w)/w^2 [coth(w/2T)(1 - cos(w D))
                                - i (w D - sin(w D))]
    k >= 1:  \\int dw J(w)/w^2 * 4 sin^2(w D / 2)
                 * [coth(w/2T) cos(k D w) - i sin(k D w)]

with D the timestep.  Frequency integrals use composite Gauss-Legendre
panels sized to resolve the fastest oscillation present, doubled until the
result is stable to the requested relative tolerance.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import j0 as bessel_j0

from .errors import QuadratureError

__all__ = [
    "SpectralDensity",
    "PowerExpDensity",
    "TwoSpinEffectiveDensity",
    "TabulatedDensity",
    "ohmic_density",
    "power_exp_density",
    "effective_spectral_density",
    "tabulated_density_from_file",
    "BathConfig",
    "EtaTable",
    "correlation",
    "eta",
    "eta_table",
]

_GL_ORDER = 16
_MAX_REFINEMENTS = 9
_MAX_PANELS = 300_000


class SpectralDensity:
    """Base class: a vectorised map w >= 0 -> J(w) >= 0.

    ``cutoff_scale`` sets the frequency scale over which J varies (used to
    size quadrature panels); ``osc_time`` is the slowest additional
    oscillation timescale present in J itself (0 if none).
    """

    cutoff_scale: float = 1.0
    osc_time: float = 0.0

    def __call__(self, omega: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass
class PowerExpDensity(SpectralDensity):
    """Power law with exponential cutoff: J(w) = a * w^p * exp(-w / wc)."""

    amplitude: float
    power: float
    omega_c: float

    def __post_init__(self):
        if self.amplitude < 0 or self.omega_c <= 0 or self.power < 1:
            raise ValueError(
                "require amplitude >= 0, omega_c > 0 and power >= 1")
        self.cutoff_scale = self.omega_c

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=float)
        return self.amplitude * omega ** self.power * np.exp(-omega / self.omega_c)


def ohmic_density(alpha: float, omega_c: float) -> PowerExpDensity:
    """Ohmic density J(w) = 2 alpha w exp(-w / wc)."""
    return PowerExpDensity(amplitude=2.0 * alpha, power=1.0, omega_c=omega_c)


def power_exp_density(alpha: float, omega_c: float, dim: int) -> PowerExpDensity:
    """Continuum density of a dim-dimensional environment with g ~ sqrt(w):

    J_p(w) = (alpha / 2) * w^dim / wc^(dim-1) * exp(-w / wc).
    """
    if dim < 1:
        raise ValueError(f"dimension must be >= 1, got {dim}")
    return PowerExpDensity(
        amplitude=0.5 * alpha / omega_c ** (dim - 1),
        power=float(dim),
        omega_c=omega_c,
    )


def _angular_average(dim: int, x: np.ndarray) -> np.ndarray:
    """F_D(x): cos (1d), Bessel J0 (2d), sinc = sin(x)/x (3d)."""
    if dim == 1:
        return np.cos(x)
    if dim == 2:
        return bessel_j0(x)
    if dim == 3:
        # unnormalised sinc; np.sinc is sin(pi x)/(pi x)
        return np.sinc(np.asarray(x) / np.pi)
    raise ValueError(f"unsupported environment dimension {dim}")


@dataclass
class TwoSpinEffectiveDensity(SpectralDensity):
    """Effective density seen by the anti-aligned two-spin subspace.

    J(w) = 2 J_p(w) (1 - F_D(w R)): the relative phase between the two
    coupling points suppresses J at w R -> 0 and doubles it on average at
    large separation.
    """

    base: PowerExpDensity
    separation: float
    dim: int

    def __post_init__(self):
        if self.separation < 0:
            raise ValueError("separation must be >= 0")
        if self.dim not in (1, 2, 3):
            raise ValueError(f"unsupported environment dimension {self.dim}")
        self.cutoff_scale = self.base.cutoff_scale
        self.osc_time = float(self.separation)

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=float)
        return 2.0 * self.base(omega) * (
            1.0 - _angular_average(self.dim, omega * self.separation))


def effective_spectral_density(base: PowerExpDensity, separation: float,
                               dim: int) -> TwoSpinEffectiveDensity:
    return TwoSpinEffectiveDensity(base=base, separation=separation, dim=dim)


class TabulatedDensity(SpectralDensity):
    """Spectral density interpolated linearly from a (w, J) table.

    The grid must be sorted, non-negative and dense enough that linear
    interpolation resolves J; outside the grid J is 0.
    """

    def __init__(self, omega_grid, j_grid):
        omega_grid = np.asarray(omega_grid, dtype=float)
        j_grid = np.asarray(j_grid, dtype=float)
        if omega_grid.ndim != 1 or omega_grid.shape != j_grid.shape:
            raise ValueError("grids must be matching 1d arrays")
        if np.any(np.diff(omega_grid) <= 0):
            raise ValueError("frequency grid must be strictly increasing")
        if np.any(omega_grid < 0) or np.any(j_grid < 0):
            raise ValueError("tabulated density must satisfy w >= 0, J >= 0")
        self.omega_grid = omega_grid
        self.j_grid = j_grid
        self.cutoff_scale = float(omega_grid[-1]) / 10.0
        self.osc_time = 0.0

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=float)
        return np.interp(omega, self.omega_grid, self.j_grid, left=0.0, right=0.0)


def tabulated_density_from_file(path) -> TabulatedDensity:
    """Load a two-column text file (w, J(w)); '#' comments allowed."""
    data = np.loadtxt(path, comments="#")
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns (omega, J)")
    return TabulatedDensity(data[:, 0], data[:, 1])


@dataclass
class BathConfig:
    """Temperature and quadrature settings.

    Temperature is measured in frequency units; T = 0 replaces the coth
    factor by 1 exactly.  ``omega_max`` defaults to 50 cutoff scales of
    the density, beyond which an exponential cutoff leaves no weight.
    """

    temperature: float = 0.0
    omega_max: Optional[float] = None
    quad_tol: float = 1e-10

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.omega_max is not None and self.omega_max <= 0:
            raise ValueError("omega_max must be > 0")
        if not 0 < self.quad_tol < 1:
            raise ValueError("quad_tol must lie in (0, 1)")

    def resolve_omega_max(self, density: SpectralDensity) -> float:
        if self.omega_max is not None:
            return self.omega_max
        return 50.0 * density.cutoff_scale


def _coth_factor(omega: np.ndarray, temperature: float) -> np.ndarray:
    if temperature == 0.0:
        return np.ones_like(omega)
    return 1.0 / np.tanh(omega / (2.0 * temperature))


def _nodes(omega_max: float, time_scale: float, cutoff_scale: float,
           refinement: int):
    """Gauss-Legendre nodes/weights on panels resolving the oscillations."""
    width = min(cutoff_scale, omega_max)
    if time_scale > 0:
        width = min(width, 2.0 * math.pi / time_scale)
    n_panels = max(int(math.ceil(omega_max / width)), 4) * 2 ** refinement
    if n_panels > _MAX_PANELS:
        raise QuadratureError(
            f"resolving oscillations of timescale {time_scale:g} over "
            f"[0, {omega_max:g}] needs {n_panels} panels "
            f"(cap {_MAX_PANELS}); reduce omega_max or the timescale")
    edges = np.linspace(0.0, omega_max, n_panels + 1)
    x, w = leggauss(_GL_ORDER)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _adaptive(value_fn, omega_max, time_scale, cutoff_scale, quad_tol):
    """Refine the panel grid until ``value_fn`` output is stable.

    ``value_fn(nodes, weights)`` must return an ndarray; convergence is
    relative to the largest magnitude in the result.
    """
    prev = None
    for refinement in range(_MAX_REFINEMENTS):
        nodes, weights = _nodes(omega_max, time_scale, cutoff_scale, refinement)
        cur = value_fn(nodes, weights)
        if prev is not None:
            scale = max(float(np.max(np.abs(cur))), 1e-300)
            err = float(np.max(np.abs(cur - prev)))
            if err <= quad_tol * scale + 1e-30:
                return cur
        prev = cur
    raise QuadratureError(
        f"quadrature did not converge to {quad_tol:g} within "
        f"{_MAX_REFINEMENTS} refinements (achieved {err:g} relative "
        f"{err / scale:g})", achieved=err)


def correlation(density: SpectralDensity, cfg: BathConfig, t: float) -> complex:
    """Bath autocorrelation C(t) by adaptive frequency quadrature."""
    omega_max = cfg.resolve_omega_max(density)
    t = float(t)
    time_scale = max(abs(t), density.osc_time)

    def value(nodes, weights):
        j = density(nodes)
        re = j * _coth_factor(nodes, cfg.temperature) * np.cos(nodes * t)
        im = -j * np.sin(nodes * t)
        return np.array([np.dot(weights, re), np.dot(weights, im)])

    re, im = _adaptive(value, omega_max, time_scale, density.cutoff_scale,
                       cfg.quad_tol)
    return complex(re, im)


def _sin_half_sq(x: np.ndarray) -> np.ndarray:
    """(2 - 2 cos x) evaluated without cancellation as 4 sin^2(x/2)."""
    return 4.0 * np.sin(0.5 * x) ** 2


def _x_minus_sin(x: np.ndarray) -> np.ndarray:
    """x - sin(x), series for small arguments to avoid cancellation."""
    small = np.abs(x) < 1e-3
    series = x ** 3 / 6.0 - x ** 5 / 120.0
    return np.where(small, series, x - np.sin(x))


def _eta_kernels(density, temperature, delta, lags, nodes, weights):
    """Memory-kernel coefficients for all requested lags on one node set."""
    j = density(nodes)
    inv_w2 = 1.0 / nodes ** 2
    coth = _coth_factor(nodes, temperature)
    out = np.empty(len(lags), dtype=complex)
    base_re = j * coth * inv_w2
    base_im = j * inv_w2
    window = _sin_half_sq(nodes * delta)
    for idx, k in enumerate(lags):
        if k == 0:
            re = base_re * (0.5 * window)  # 1 - cos(w D) = 2 sin^2(w D / 2)
            im = -base_im * _x_minus_sin(nodes * delta)
        else:
            phase = nodes * (k * delta)
            re = base_re * window * np.cos(phase)
            im = -base_im * window * np.sin(phase)
        out[idx] = complex(np.dot(weights, re), np.dot(weights, im))
    return out


@dataclass
class EtaTable:
    """Memoised eta_k for k = 0..K at fixed timestep."""

    delta: float
    memory: int
    values: np.ndarray  # complex, length memory + 1

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be > 0")
        if len(self.values) != self.memory + 1:
            raise ValueError("values must have length memory + 1")

    def __getitem__(self, k: int) -> complex:
        return complex(self.values[k])


def eta(density: SpectralDensity, cfg: BathConfig, delta: float,
        k: int) -> complex:
    """Memory-kernel coefficient at lag k.

    k = 0 integrates C over the ordered triangle of one timestep window;
    k >= 1 over the square of two windows separated by k steps.  The
    result depends only on the lag (stationarity).
    """
    if delta <= 0:
        raise ValueError("delta must be > 0")
    if k < 0:
        raise ValueError("lag must be >= 0")
    omega_max = cfg.resolve_omega_max(density)
    time_scale = max((k + 1) * delta, density.osc_time)

    def value(nodes, weights):
        return _eta_kernels(density, cfg.temperature, delta, [k],
                            nodes, weights)

    return complex(_adaptive(value, omega_max, time_scale,
                             density.cutoff_scale, cfg.quad_tol)[0])


def eta_table(density: SpectralDensity, cfg: BathConfig, delta: float,
              memory: int) -> EtaTable:
    """All eta_k for k = 0..memory, evaluated on one shared node set."""
    if delta <= 0:
        raise ValueError("delta must be > 0")
    if memory < 0:
        raise ValueError("memory must be >= 0")
    omega_max = cfg.resolve_omega_max(density)
    time_scale = max((memory + 1) * delta, density.osc_time)
    lags = list(range(memory + 1))

    def value(nodes, weights):
        return _eta_kernels(density, cfg.temperature, delta, lags,
                            nodes, weights)

    values = _adaptive(value, omega_max, time_scale, density.cutoff_scale,
                       cfg.quad_tol)
    return EtaTable(delta=delta, memory=memory, values=values)
