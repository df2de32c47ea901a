"""Decay-rate analysis: exponential tail fits, memory-length extrapolation
and the coupling at which the extrapolated rate reaches zero.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import ExtrapolationError, FitWindowError

__all__ = [
    "DecayFit",
    "ExtrapolationResult",
    "fit_exponential",
    "extrapolate_gamma",
    "estimate_alpha_c",
]


@dataclass
class DecayFit:
    """Least-squares fit of y ~ amplitude * exp(-gamma t) over a window."""

    gamma: float
    amplitude: float
    window: Tuple[float, float]
    residual_rms: float


def _auto_window(times, values):
    """Last third of the data, skipping to the final monotone stretch.

    Oscillatory transients (sign changes or non-monotone magnitude) are
    excluded by starting after the last local extremum of |y|.
    """
    n = len(times)
    start = (2 * n) // 3
    mags = np.abs(values)
    diffs = np.diff(mags)
    signs = np.sign(diffs)
    lo = start
    for i in range(n - 2, start - 1, -1):
        if signs[i] != 0 and signs[i] != signs[-1]:
            lo = i + 1
            break
    return float(times[lo]), float(times[-1])


def fit_exponential(times: np.ndarray, values: np.ndarray,
                    window: Optional[Tuple[float, float]] = None) -> DecayFit:
    """Fit ln|y| against t by least squares over the window.

    Without an explicit window the last third of the trajectory is used,
    skipping until the first monotone stretch of |y|.  An explicit window
    containing sign changes is rejected: fitting through an oscillatory
    tail is meaningless.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.shape != values.shape or times.ndim != 1:
        raise ValueError("times and values must be matching 1d arrays")
    explicit = window is not None
    if window is None:
        window = _auto_window(times, values)
    t_lo, t_hi = window
    mask = (times >= t_lo) & (times <= t_hi)
    t = times[mask]
    y = values[mask]
    if len(t) < 8:
        raise FitWindowError(
            f"need at least 8 points in the fit window, got {len(t)} in "
            f"[{t_lo:g}, {t_hi:g}]")
    if explicit and (np.any(y > 0) and np.any(y < 0)):
        first_flip = t[np.nonzero(np.diff(np.sign(y)))[0][0] + 1]
        raise FitWindowError(
            f"signal changes sign inside [{t_lo:g}, {t_hi:g}]; "
            f"try t_lo > {first_flip:g}")
    mags = np.abs(y)
    if np.any(mags == 0):
        raise FitWindowError("signal touches zero inside the fit window")
    slope, intercept = np.polyfit(t, np.log(mags), 1)
    residuals = np.log(mags) - (slope * t + intercept)
    return DecayFit(gamma=float(-slope), amplitude=float(np.exp(intercept)),
                    window=(float(t_lo), float(t_hi)),
                    residual_rms=float(np.sqrt(np.mean(residuals ** 2))))


@dataclass
class ExtrapolationResult:
    """Cubic-in-1/K extrapolation of decay rates to infinite memory.

    ``gamma_inf`` is the constant coefficient clamped to be non-negative.
    ``sensitivity`` (when refined-cutoff rates are supplied) is the shift
    of gamma_inf under that refinement and serves as the error proxy.
    """

    gamma_inf: float
    coefficients: np.ndarray      # ascending powers of 1/K
    points: np.ndarray            # (K, gamma) pairs as given
    sensitivity: Optional[float] = None


def _cubic_constant(points) -> Tuple[float, np.ndarray]:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be (K, gamma) pairs")
    ks = pts[:, 0]
    if len(np.unique(ks)) < 5:
        raise ExtrapolationError(
            f"cubic extrapolation needs >= 5 distinct memory lengths, "
            f"got {len(np.unique(ks))}")
    x = 1.0 / ks
    design = np.vander(x, 4, increasing=True)
    coeffs, _, rank, _ = np.linalg.lstsq(design, pts[:, 1], rcond=None)
    if rank < 4:
        raise ExtrapolationError("rank-deficient design matrix")
    return float(coeffs[0]), coeffs


def extrapolate_gamma(points: Sequence[Tuple[float, float]],
                      refined_points: Optional[
                          Sequence[Tuple[float, float]]] = None
                      ) -> ExtrapolationResult:
    """Extrapolate gamma(K) to K -> infinity with a least-squares cubic
    in 1/K; the extracted rate cannot be negative, so the constant term is
    clamped at zero.

    ``refined_points`` are rates recomputed at a tighter truncation
    cutoff; when given, |change of gamma_inf| is reported as sensitivity.
    """
    c0, coeffs = _cubic_constant(points)
    gamma_inf = max(c0, 0.0)
    sensitivity = None
    if refined_points is not None:
        c0_ref, _ = _cubic_constant(refined_points)
        sensitivity = abs(gamma_inf - max(c0_ref, 0.0))
    return ExtrapolationResult(gamma_inf=gamma_inf, coefficients=coeffs,
                               points=np.asarray(points, dtype=float),
                               sensitivity=sensitivity)


def estimate_alpha_c(curve: Sequence[Tuple[float, float]],
                     sensitivity: float = 0.0) -> Tuple[float, float]:
    """Bracket the coupling where the extrapolated rate reaches zero.

    Returns the interval between the last grid point with gamma_inf above
    threshold and the first consistent with zero, where the threshold is
    max(sensitivity, 1e-4).
    """
    pts = sorted((float(a), float(g)) for a, g in curve)
    if len(pts) < 4:
        raise ExtrapolationError("need at least 4 (alpha, gamma_inf) points")
    threshold = max(sensitivity, 1e-4)
    if pts[0][1] <= threshold:
        raise ExtrapolationError(
            "gamma_inf already consistent with zero at the smallest alpha")
    for (a_lo, g_lo), (a_hi, g_hi) in zip(pts, pts[1:]):
        if g_lo > threshold >= g_hi:
            return (a_lo, a_hi)
    raise ExtrapolationError("no zero crossing of gamma_inf in range")
