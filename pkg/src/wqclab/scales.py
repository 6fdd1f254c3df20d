"""Billiard parameters, derived time/frequency scales and regime classification.

Internal units fix hbar = 1 (Planck's constant enters only through the
dimensionless ratio of the de Broglie wavelength to the box size); the one
exception is :func:`experimental_scales`, which works in SI for cold-atom
estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

# SI constants, used only by experimental_scales
K_BOLTZMANN = 1.380649e-23     # J/K
H_PLANCK = 6.62607015e-34      # J s
HBAR_PLANCK = H_PLANCK / (2.0 * math.pi)

REGIME_FOPT = "FOPT"
REGIME_WIGNER = "WIGNER"
REGIME_WQC = "WQC"
REGIME_HQC = "HQC"


@dataclass(frozen=True)
class BilliardParams:
    """Geometry and physical constants of one billiard instance.

    The billiard is a rectangle Lx x Ly whose left wall is replaced by a
    circular arc of radius R (R = inf recovers the straight wall); the arc
    center sits a height ``eps`` above the bottom wall, which breaks the
    mirror symmetry.  The movable flat wall ("piston") is the right wall
    x = Lx.  ``energy`` is the kinetic energy at the center of the window
    of interest and ``gamma0`` an optional background ergodization rate.
    """

    Lx: float = 1.5
    Ly: float = 1.0
    R: float = 8.0
    eps: float = 0.1
    mass: float = 0.5
    energy: float = 13618.0
    gamma0: float = 0.0

    def __post_init__(self):
        if not self.Lx > 0: raise ValueError(f"Lx must be positive, got {self.Lx}")
        if not self.Ly > 0: raise ValueError(f"Ly must be positive, got {self.Ly}")
        if not self.R > self.Ly:
            raise ValueError(f"R must exceed Ly so the arc spans the wall (R={self.R}, Ly={self.Ly})")
        if not 0.0 <= self.eps < self.Ly:
            raise ValueError(f"eps must lie in [0, Ly), got {self.eps}")
        if not self.mass > 0: raise ValueError(f"mass must be positive, got {self.mass}")
        if not self.energy > 0: raise ValueError(f"energy must be positive, got {self.energy}")
        if self.gamma0 < 0: raise ValueError(f"gamma0 must be nonnegative, got {self.gamma0}")

    @property
    def integrable(self) -> bool:
        """True for the undeformed (straight left wall) billiard."""
        return math.isinf(self.R)

    def with_energy(self, energy: float) -> "BilliardParams":
        return BilliardParams(self.Lx, self.Ly, self.R, self.eps, self.mass, energy, self.gamma0)


@dataclass(frozen=True)
class ScaleSet:
    """Derived velocity/length/time/frequency scales for one parameter point.

    ``u`` is the dimensionless deformation Ly/R, ``hbar_eff`` the scaled
    Planck constant (de Broglie wavelength over the reference box length)
    and ``b = u/hbar_eff`` the dimensionless bandwidth.
    """

    vE: float
    kE: float
    lambdaE: float
    u: float
    hbar_eff: float
    tL: float
    tR: float
    DeltaL: float
    DeltaR: float
    Delta0: float
    b: float
    integrable: bool = field(default=False)

    def as_dict(self) -> dict:
        return {
            "vE": self.vE, "kE": self.kE, "lambdaE": self.lambdaE,
            "u": self.u, "hbar_eff": self.hbar_eff, "tL": self.tL, "tR": self.tR,
            "DeltaL": self.DeltaL, "DeltaR": self.DeltaR, "Delta0": self.Delta0,
            "b": self.b, "integrable": self.integrable,
        }


@dataclass(frozen=True)
class AtomParams:
    """Cold-atom inputs (SI) for experimental scale estimates."""

    atom_mass: float      # kg
    temperature: float    # K
    box_size: float       # m

    def __post_init__(self):
        for name in ("atom_mass", "temperature", "box_size"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


def derive_scales(p: BilliardParams, hbar_length: float | None = None) -> ScaleSet:
    """Derive all dynamical scales from billiard parameters.

    ``hbar_length`` is the reference length L in hbar_eff = lambda_E / L;
    it defaults to Lx, which reproduces the usual quoted values of 1/hbar
    for the canonical aspect ratio.  The mean level spacing Delta0 uses the
    exact 2D box density of states, 2*pi/(mass*Lx*Ly).

    For R = inf the deformation vanishes: u = 0, tR = inf, DeltaR = 0 and
    the result is flagged integrable.
    """
    vE = math.sqrt(2.0 * p.energy / p.mass)
    kE = p.mass * vE
    lambdaE = 2.0 * math.pi / kE
    L = p.Lx if hbar_length is None else hbar_length
    hbar_eff = lambdaE / L
    tL = p.Lx / vE
    DeltaL = 2.0 * math.pi / tL
    if p.integrable:
        u, tR, DeltaR = 0.0, math.inf, 0.0
    else:
        u = p.Ly / p.R
        tR = p.R / vE
        DeltaR = u * DeltaL
    Delta0 = 2.0 * math.pi / (p.mass * p.Lx * p.Ly)
    b = u / hbar_eff
    return ScaleSet(vE=vE, kE=kE, lambdaE=lambdaE, u=u, hbar_eff=hbar_eff,
                    tL=tL, tR=tR, DeltaL=DeltaL, DeltaR=DeltaR, Delta0=Delta0,
                    b=b, integrable=p.integrable)


def box_level(nx: int, ny: int, p: BilliardParams) -> float:
    """Energy of the (nx, ny) mode of the undeformed rectangular box."""
    if nx < 1 or ny < 1:
        raise ValueError("mode indices must be >= 1")
    return ((math.pi * nx / p.Lx) ** 2 + (math.pi * ny / p.Ly) ** 2) / (2.0 * p.mass)


def classify_regime(u: float, hbar_eff: float) -> str:
    """Classify the (u, hbar) point into FOPT / WIGNER / WQC / HQC.

    Border scales are the strict power laws u_c = hbar^2, u_b = hbar and
    u_s = hbar^(1/2); each border belongs to the upper regime.
    """
    if u < 0:
        raise ValueError("u must be nonnegative")
    if not 0.0 < hbar_eff < 1.0:
        raise ValueError("hbar_eff must lie in (0, 1)")
    if u < hbar_eff ** 2:
        return REGIME_FOPT
    if u < hbar_eff:
        return REGIME_WIGNER
    if u < math.sqrt(hbar_eff):
        return REGIME_WQC
    return REGIME_HQC


def experimental_scales(a: AtomParams) -> dict:
    """Ballistic frequency, level-spacing frequency and scaled Planck for one atom species.

    The thermal energy maps to kinetic energy as E = k_B*T, so the thermal
    velocity is v = sqrt(2*k_B*T/m).  Frequencies are plain Hz (no 2*pi).
    """
    vE = math.sqrt(2.0 * K_BOLTZMANN * a.temperature / a.atom_mass)
    L = a.box_size
    omegaL = vE / (2.0 * L)
    omega0 = HBAR_PLANCK / (a.atom_mass * L ** 2)
    lambda_dB = H_PLANCK / (a.atom_mass * vE)
    return {"omegaL": omegaL, "omega0": omega0, "hbar_eff": lambda_dB / L}
