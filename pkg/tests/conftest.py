"""Shared fixtures and independent numerical oracles.

The oracles here deliberately avoid the library's own quadrature and
tensor machinery: correlation functions go through scipy.integrate.quad,
double time integrals through explicit 2d Gauss-Legendre product rules,
and dense tensor references through direct einsum loops.
"""

import os

# small-matrix SVDs dominate the workload; threaded BLAS is slower there
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")

import functools

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad


def _coth(x):
    return 1.0 / np.tanh(x)


def correlation_oracle(density, temperature, t, omega_max, epsabs=1e-12):
    """C(t) by scipy adaptive quadrature (independent of temposim.bath)."""

    def integrand_re(w):
        factor = 1.0 if temperature == 0 else _coth(w / (2 * temperature))
        return density(w) * factor * np.cos(w * t)

    def integrand_im(w):
        return -density(w) * np.sin(w * t)

    re, _ = quad(integrand_re, 0, omega_max, limit=400, epsabs=epsabs)
    im, _ = quad(integrand_im, 0, omega_max, limit=400, epsabs=epsabs)
    return complex(re, im)


def eta_oracle_windows(density, temperature, delta, n, nprime, omega_max,
                       nodes=48):
    """Brute-force 2d quadrature of C(t' - t'') over absolute windows.

    Window n covers [(n-1) delta, n delta].  For n == nprime the domain is
    the ordered triangle t'' <= t'.
    """
    x, w = leggauss(nodes)
    a = (n - 1) * delta
    b = (nprime - 1) * delta

    @functools.lru_cache(maxsize=None)
    def c_at(tau):
        return correlation_oracle(density, temperature, tau, omega_max)

    total = 0.0 + 0.0j
    if n != nprime:
        tp = a + 0.5 * delta * (x + 1)
        wp = 0.5 * delta * w
        ts = b + 0.5 * delta * (x + 1)
        ws = 0.5 * delta * w
        for i in range(nodes):
            for j in range(nodes):
                total += wp[i] * ws[j] * c_at(round(tp[i] - ts[j], 14))
    else:
        tp = a + 0.5 * delta * (x + 1)
        wp = 0.5 * delta * w
        for i in range(nodes):
            # inner integral over [a, tp[i]]
            half = 0.5 * (tp[i] - a)
            ts = a + half * (x + 1)
            ws = half * w
            for j in range(nodes):
                total += wp[i] * ws[j] * c_at(round(tp[i] - ts[j], 14))
    return total


def eta_oracle(density, temperature, delta, k, omega_max, nodes=48):
    """eta_k via the absolute-window oracle at (n, n') = (k + 1, 1)."""
    return eta_oracle_windows(density, temperature, delta, k + 1, 1,
                              omega_max, nodes)


def dephasing_gamma_oracle(density, temperature, t, omega_max):
    """Real decoherence exponent of the independent boson model:

    Gamma(t) = \\int dw J(w) coth(w/2T) (1 - cos wt) / w^2.
    """

    def integrand(w):
        factor = 1.0 if temperature == 0 else _coth(w / (2 * temperature))
        return density(w) * factor * (1 - np.cos(w * t)) / w ** 2

    val, _ = quad(integrand, 0, omega_max, limit=400, epsabs=1e-12)
    return val


def dephasing_phase_oracle(density, t, omega_max):
    """Imaginary decoherence exponent (bath-induced phase):

    gamma_I(t) = \\int dw J(w) (wt - sin wt) / w^2.
    """

    def integrand(w):
        return density(w) * (w * t - np.sin(w * t)) / w ** 2

    val, _ = quad(integrand, 0, omega_max, limit=400, epsabs=1e-12)
    return val
