"""Energy absorption rate: driving spectrum, Kubo diffusion, LRT vs SLRT.

For noisy low-frequency driving of RMS wall velocity fdot, the heating is
Edot = G * fdot^2.  The kinetic (wall-formula) coefficient G0 gets a
classical correlation factor g_c in linear response and an additional
sparsity/connectivity suppression g_s in semi-linear response:
G_SLRT = g_s * g_c * G0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .classical import analytic_moments
from .scales import BilliardParams, derive_scales


@dataclass(frozen=True)
class DrivingSpec:
    """Noisy driving: RMS wall velocity, spectral support, amplitude."""

    fdot_rms: float
    omega_c: float
    amplitude: float

    def __post_init__(self):
        for name in ("fdot_rms", "omega_c", "amplitude"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        ratio = self.fdot_rms / (self.omega_c * self.amplitude)
        if not (1.0 / 3.0) <= ratio <= 3.0:
            warnings.warn(
                f"fdot_rms is {ratio:.2g} x omega_c*amplitude; expected ~1", stacklevel=2)


def driving_spectrum(omega, d: DrivingSpec):
    """Two-sided driving power spectrum fdot^2 * exp(-|omega|/omega_c)/(2*omega_c)."""
    return d.fdot_rms ** 2 * np.exp(-np.abs(omega) / d.omega_c) / (2.0 * d.omega_c)


def tabulated_spectrum(omega_grid: np.ndarray, values: np.ndarray):
    """Linear-interpolation handoff for a sampled C(omega); flat beyond the grid."""
    og = np.asarray(omega_grid, dtype=float)
    vals = np.asarray(values, dtype=float)
    return lambda w: np.interp(w, og, vals, left=vals[0], right=vals[-1])


def diffusion_coefficient(ctilde, d: DrivingSpec) -> float:
    """Energy-space diffusion D = integral_0^inf C(omega)*S(omega) d omega."""
    val, _ = quad(lambda w: ctilde(w) * driving_spectrum(w, d), 0.0, np.inf,
                  epsabs=0.0, epsrel=1e-8, limit=400)
    if not math.isfinite(val):
        raise ValueError("divergent driving integral")
    return val


def wall_formula_G0(p: BilliardParams, T: float) -> float:
    """Uncorrelated-collision absorption coefficient G0 = C_inf/(2T)."""
    if not T > 0:
        raise ValueError("temperature scale T must be positive")
    return analytic_moments(p)["C_inf"] / (2.0 * T)


def fgr_check(d_coeff: float, delta0: float, omega_c: float, power: int) -> dict:
    """Golden-rule validity: D/delta0^3 < (omega_c/delta0)^power, power in {2,3}.

    ``margin`` is the fractional headroom 1 - lhs/rhs (negative on failure).
    """
    if power not in (2, 3):
        raise ValueError("power must be 2 or 3")
    lhs = d_coeff / delta0 ** 3
    rhs = (omega_c / delta0) ** power
    return {"ok": lhs < rhs, "margin": 1.0 - lhs / rhs}


def slrt_amplitude_window(b: float, min_bounces: float = 1000.0) -> tuple[float, float]:
    """Admissible squared-amplitude window (a^2 bounds) for seeing the SLRT anomaly.

    Measurable heating over ~min_bounces ballistic periods needs
    a^2 > 1/min_bounces; staying inside the golden-rule regime needs
    b^5 * a^2 < b^3, i.e. a^2 < 1/b^2.  Empty when b^2 >= min_bounces.
    """
    return 1.0 / min_bounces, 1.0 / b ** 2


@dataclass(frozen=True)
class EarReport:
    """Absorption coefficients and golden-rule diagnostics for one setup."""

    G0: float
    G_lrt: float
    G_slrt: float
    D: float
    Edot: float
    dimensionless_ear: float
    D_over_delta0_cubed: float
    fgr_power2: dict
    fgr_power3: dict
    g_c: float
    g_s: float

    def __post_init__(self):
        if self.g_s <= 1.0 and self.G_slrt > self.G_lrt * (1.0 + 1e-12):
            raise ValueError("G_slrt must not exceed G_lrt when g_s <= 1")

    def to_dict(self) -> dict:
        return {
            "G0": self.G0, "G_lrt": self.G_lrt, "G_slrt": self.G_slrt,
            "D": self.D, "Edot": self.Edot,
            "dimensionless_ear": self.dimensionless_ear,
            "D_over_delta0_cubed": self.D_over_delta0_cubed,
            "fgr_power2": dict(self.fgr_power2), "fgr_power3": dict(self.fgr_power3),
            "g_c": self.g_c, "g_s": self.g_s,
        }


def ear_report(p: BilliardParams, T: float, d: DrivingSpec, measures: dict) -> EarReport:
    """Assemble LRT and SLRT absorption coefficients from measured g factors.

    T is the energy scale of the preparation (default choice elsewhere:
    T = E, a monoenergetic cloud).  The diffusion coefficient uses the
    band-matched closed form, D/delta0^3 =
    (8/3 pi^2) (DeltaL/delta0)^3 (omega_c/delta0)^2 (A/Lx)^2.
    """
    g_c, g_s = measures["g_c"], measures["g_s"]
    s = derive_scales(p)
    g0 = wall_formula_G0(p, T)
    g_lrt = g_c * g0
    g_slrt = g_s * g_lrt
    a_over_l = d.amplitude / p.Lx
    pref = 8.0 / (3.0 * math.pi ** 2)
    dless = pref * (d.omega_c / s.DeltaL) ** 2 * a_over_l ** 2
    d_scaled = pref * (s.DeltaL / s.Delta0) ** 3 * (d.omega_c / s.Delta0) ** 2 * a_over_l ** 2
    d_coeff = d_scaled * s.Delta0 ** 3
    return EarReport(
        G0=g0, G_lrt=g_lrt, G_slrt=g_slrt, D=d_coeff,
        Edot=g_slrt * d.fdot_rms ** 2,
        dimensionless_ear=dless, D_over_delta0_cubed=d_scaled,
        fgr_power2=fgr_check(d_coeff, s.Delta0, d.omega_c, 2),
        fgr_power3=fgr_check(d_coeff, s.Delta0, d.omega_c, 3),
        g_c=g_c, g_s=g_s)
