"""Classical power spectrum of the piston collision train and its closed forms.

The force exerted on the piston is a train of impulses
q_j = 2*m*vE*cos(theta_j) at the collision times t_j.  Its power spectrum
C(omega) has a flat high-frequency plateau C_inf set by the impulse
self-correlation, ballistic comb peaks at multiples of pi*vE/Lx, and a
zero-frequency peak whose height reflects the long bouncing correlations
of the weakly deformed billiard.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .billiard import CollisionSequence
from .scales import BilliardParams, derive_scales


@dataclass(frozen=True)
class SpectrumEstimate:
    omega_grid: np.ndarray
    values: np.ndarray
    t_total: float
    n_segments: int = 1

    def __post_init__(self):
        if np.any(np.diff(self.omega_grid) <= 0):
            raise ValueError("omega grid must be strictly increasing")
        if np.any(self.values < -0.0):
            raise ValueError("spectral values must be nonnegative")


def analytic_moments(p: BilliardParams) -> dict:
    """Uniform-angle impulse averages of the undeformed billiard.

    C_inf = <q^2/tau>, c0 = <(q/tau)^2>, c_inf = <q/tau>^2 and their
    difference, with q = 2*m*v*cos(theta) and tau = 2*Lx/(v*cos(theta)).
    """
    v = derive_scales(p).vE
    m = p.mass
    return {
        "C_inf": (8.0 / (3.0 * math.pi)) * m ** 2 * v ** 3 / p.Lx,
        "c0": (3.0 / 8.0) * m ** 2 * v ** 4 / p.Lx ** 2,
        "c_inf": 0.25 * m ** 2 * v ** 4 / p.Lx ** 2,
        "variance": 0.125 * m ** 2 * v ** 4 / p.Lx ** 2,
    }


@njit(cache=True, parallel=True)
def _segment_psd(times, weights, omegas, seg_edges, out):
    n_seg = len(seg_edges) - 1
    for iw in prange(len(omegas)):
        w = omegas[iw]
        acc = 0.0
        for s in range(n_seg):
            t0, t1 = seg_edges[s], seg_edges[s + 1]
            t_len = t1 - t0
            re = 0.0
            im = 0.0
            total_q = 0.0
            for j in range(len(times)):
                t = times[j]
                if t0 <= t < t1:
                    ph = w * (t - t0)
                    re += weights[j] * math.cos(ph)
                    im -= weights[j] * math.sin(ph)
                    total_q += weights[j]
            rate = total_q / t_len
            if w == 0.0:
                re -= rate * t_len
            else:
                re -= rate * math.sin(w * t_len) / w
                im -= rate * (math.cos(w * t_len) - 1.0) / w
            acc += (re * re + im * im) / t_len
        out[iw] = acc / n_seg


def spike_spectrum(c: CollisionSequence, omega_grid: np.ndarray,
                   n_segments: int = 16, d_f=None) -> SpectrumEstimate:
    """Power spectrum estimate of the impulse train.

    values(omega) = mean over segments of |sum_j q_j exp(i omega t_j)|^2 / T,
    with the mean-rate (DC) component subtracted per segment, which removes
    the delta contribution of <F>^2 at omega = 0.  Averaging over
    independent segments tames the estimator variance.
    """
    if len(c) < 2:
        raise ValueError("need at least 2 collisions for a spectrum estimate")
    omega_grid = np.asarray(omega_grid, dtype=float)
    q = c.impulses(d_f)
    n_segments = max(1, min(n_segments, len(c) // 2))
    seg_edges = np.linspace(0.0, c.t_total * (1.0 + 1e-12), n_segments + 1)
    out = np.empty_like(omega_grid)
    _segment_psd(c.t, q, omega_grid, seg_edges, out)
    out = np.maximum(out, 0.0)
    return SpectrumEstimate(omega_grid=omega_grid, values=out,
                            t_total=c.t_total, n_segments=n_segments)


def comb_spectrum(omega: float, p: BilliardParams, rel_tol: float = 1e-12) -> float:
    """Ballistic-comb value of the undeformed-billiard spectrum at omega > 0.

    Sum over the comb peaks omega_n = (pi*vE/Lx)*n above omega of
    C_inf * (3/2n) * (omega/omega_n)^4 / sqrt(1 - (omega/omega_n)^2),
    truncated when terms drop below ``rel_tol`` of the running sum.  The
    peaks are integrable singularities: evaluation exactly at a peak is
    refused; evaluate one grid step away.
    """
    if omega < 0:
        raise ValueError("omega must be nonnegative")
    if omega == 0.0:
        return 0.0
    s = derive_scales(p)
    omega1 = math.pi * s.vE / p.Lx
    ratio = omega / omega1
    nearest = round(ratio)
    if nearest >= 1 and abs(ratio - nearest) < 1e-9:
        raise ValueError(f"omega sits on the comb peak n={nearest}; evaluate off-peak")
    c_inf = analytic_moments(p)["C_inf"]
    total = 0.0
    n = int(math.floor(ratio)) + 1
    while True:
        x = ratio / n
        term = (1.5 / n) * x ** 4 / math.sqrt(1.0 - x * x)
        total += term
        n += 1
        if term < rel_tol * total and n > ratio + 2:
            break
    return c_inf * total


def low_frequency_spectrum(omega: float, p: BilliardParams, mode: str,
                           gamma: float | None = None) -> float:
    """Low-frequency closed forms for the broadened zero-frequency peak.

    mode "lorentzian": single-rate broadening, Var * (2/gamma)/(1+(omega/gamma)^2).
    mode "bouncing":   full angle-averaged form for the arc-deformed wall,
                       diverging logarithmically as omega -> 0.
    mode "bouncing_small_omega": its small-omega logarithm, with the
                       background rate gamma0 as lower cutoff when omega < gamma0.
    """
    if omega < 0:
        raise ValueError("omega must be nonnegative")
    mom = analytic_moments(p)
    if mode == "lorentzian":
        if gamma is None or gamma <= 0:
            raise ValueError("lorentzian mode needs gamma > 0")
        return mom["variance"] * (2.0 / gamma) / (1.0 + (omega / gamma) ** 2)
    s = derive_scales(p)
    if s.integrable:
        raise ValueError("bouncing forms need a finite radius of curvature")
    w = omega * s.tR
    if mode == "bouncing":
        if omega == 0.0:
            raise ValueError("bouncing form diverges at omega=0 (no gamma0 cutoff)")
        root = math.sqrt(1.0 + w * w)
        pref = p.mass ** 2 * s.vE ** 4 / (4.0 * p.Lx ** 2)
        return pref * (s.tR / root) * math.log(1.0 + (2.0 + 2.0 * root) / (w * w))
    if mode == "bouncing_small_omega":
        w_eff = max(w, p.gamma0 * s.tR)
        if w_eff == 0.0:
            raise ValueError("omega=0 with gamma0=0: logarithm diverges")
        return p.mass ** 2 * s.vE ** 3 * (p.R / (2.0 * p.Lx ** 2)) * math.log(2.0 / w_eff)
    raise ValueError(f"unknown mode {mode!r}")


def gc_classical(p: BilliardParams) -> float:
    """Classical enhancement factor g_c = ln(2*DeltaR/gamma0)/u for slow driving."""
    s = derive_scales(p)
    if s.u == 0.0:
        raise ValueError("g_c undefined for the undeformed billiard (u=0)")
    if p.gamma0 == 0.0:
        raise ValueError("g_c diverges for gamma0=0")
    if p.gamma0 >= 2.0 * s.DeltaR:
        warnings.warn("gamma0 >= 2*DeltaR: enhancement washed out, returning 0", stacklevel=2)
        return 0.0
    return math.log(2.0 * s.DeltaR / p.gamma0) / s.u


def counting_variance_rate(times: np.ndarray, t_total: float, t_window: float,
                           weights: np.ndarray | None = None,
                           min_windows: int = 100) -> float:
    """Var(windowed sum)/t_window over sliding windows of length t_window.

    With unit weights this is the counting-variance rate of the point
    process; with impulse weights it estimates the zero-frequency spectral
    density directly.
    """
    times = np.asarray(times, dtype=float)
    stride = t_window / 4.0
    n_win = int(math.floor((t_total - t_window) / stride)) + 1
    if n_win < min_windows:
        raise ValueError(f"only {n_win} windows fit; need >= {min_windows}")
    starts = np.arange(n_win) * stride
    if weights is None:
        lo = np.searchsorted(times, starts, side="left")
        hi = np.searchsorted(times, starts + t_window, side="left")
        counts = (hi - lo).astype(float)
    else:
        cum = np.concatenate(([0.0], np.cumsum(weights)))
        lo = np.searchsorted(times, starts, side="left")
        hi = np.searchsorted(times, starts + t_window, side="left")
        counts = cum[hi] - cum[lo]
    return float(np.var(counts)) / t_window


def number_variance_c0(c: CollisionSequence, t_window: float,
                       weighted: bool = True) -> float:
    """Zero-frequency spectral density from windowed collision statistics.

    The windowed sums use the physical impulses q_j by default, which makes
    the variance rate a direct estimator of C(omega -> 0); ``weighted=False``
    gives the plain counting variance of the unit-spike train.
    """
    weights = c.impulses() if weighted else None
    return counting_variance_rate(c.t, c.t_total, t_window, weights)


def instability_exponent(theta: float, p: BilliardParams) -> float:
    """Angle-resolved ergodization rate gamma_theta = gamma0 + (vE/R)cos(theta)."""
    if abs(theta) >= 0.5 * math.pi:
        raise ValueError("theta must lie in (-pi/2, pi/2)")
    if p.integrable:
        return p.gamma0
    return p.gamma0 + (derive_scales(p).vE / p.R) * math.cos(theta)
