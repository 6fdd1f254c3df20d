"""Bandprofiles, sparsity and resistor-network averages of intensity matrices.

The central object is a nonnegative symmetric matrix X_nm = |F_nm|^2 on an
energy window.  Transitions n -> m act as conductors G_nm proportional to
the golden-rule rates 2*F(n-m)*X_nm/(n-m)^2, and the inverse resistivity of
the resulting strip network is a connectivity-aware average <<X>>_s.  Its
ratio to the plain band average <<X>>_a defines the sparsity/texture factor
g_s; referencing the band average to the unrestricted average X_inf defines
the classical-correlation factor g_c, with g = g_s*g_c.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.sparse.linalg import splu


@dataclass(frozen=True)
class BandWeight:
    """Spectral weight F(r) selecting the band of level offsets.

    ``kind`` is "exponential" (F ~ exp(-|r|/b_c), truncated at |r|<=10*b_c)
    or "rectangular" (flat over 1<=|r|<=b_c).  The diagonal r=0 carries no
    weight (no self-transitions) and the discrete normalization is
    sum_{r != 0} F(r) = 1 over the truncation range.
    """

    kind: str = "exponential"
    b_c: float = 5.0

    def __post_init__(self):
        if self.kind not in ("exponential", "rectangular"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if not self.b_c > 0:
            raise ValueError("b_c must be positive")

    @property
    def r_max(self) -> int:
        if self.kind == "rectangular":
            return max(1, int(round(self.b_c)))
        return max(1, int(math.ceil(10.0 * self.b_c)))

    def weights(self) -> tuple[np.ndarray, np.ndarray]:
        """Offsets r = 1..r_max and weights F(r), with 2*sum(F) = 1."""
        r = np.arange(1, self.r_max + 1)
        if self.kind == "rectangular":
            f = np.ones_like(r, dtype=float)
        else:
            f = np.exp(-r / self.b_c)
        f /= 2.0 * f.sum()
        return r, f


@dataclass(frozen=True)
class BandProfile:
    """Mean and median of X along the diagonals n-m = r, r >= 1."""

    r: np.ndarray
    mean_values: np.ndarray
    median_values: np.ndarray


@dataclass(frozen=True)
class IntensityMatrix:
    """Intensity matrix X = |F_nm|^2 with its energy metadata."""

    values: np.ndarray
    delta0: float
    e_center: float

    def __post_init__(self):
        x = self.values
        if x.ndim != 2 or x.shape[0] != x.shape[1]:
            raise ValueError("intensity matrix must be square")
        if np.any(x < 0):
            raise ValueError("intensity matrix must be nonnegative")


def band_profiles(x: np.ndarray) -> BandProfile:
    """Per-offset mean and median of the matrix elements."""
    n = x.shape[0]
    if n < 3:
        raise ValueError("matrix dimension must be >= 3")
    rs = np.arange(1, n)
    means = np.array([np.diagonal(x, r).mean() for r in rs])
    medians = np.array([np.median(np.diagonal(x, r)) for r in rs])
    return BandProfile(r=rs, mean_values=means, median_values=medians)


def uniformize(x: np.ndarray) -> np.ndarray:
    """Replace every diagonal by its average; bandprofile is preserved exactly."""
    n = x.shape[0]
    out = np.empty_like(x, dtype=float)
    for r in range(n):
        idx = np.arange(n - r)
        mean = np.diagonal(x, r).mean()
        out[idx, idx + r] = mean
        out[idx + r, idx] = mean
    return out


def untexture(x: np.ndarray, seed: int) -> np.ndarray:
    """Randomly permute each diagonal (symmetrically); multisets preserved."""
    rng = np.random.default_rng(seed)
    n = x.shape[0]
    out = np.empty_like(x, dtype=float)
    for r in range(n):
        idx = np.arange(n - r)
        d = np.diagonal(x, r)[rng.permutation(n - r)]
        out[idx, idx + r] = d
        out[idx + r, idx] = d
    return out


def matrix_pn(x: np.ndarray) -> float:
    """Participation number of the element multiset: (sum X)^2 / sum X^2."""
    s2 = float(np.sum(np.asarray(x, dtype=float) ** 2))
    if s2 == 0.0:
        raise ValueError("all-zero matrix has no participation number")
    return float(np.sum(x)) ** 2 / s2


def sparsity_s(x: np.ndarray) -> float:
    """PN ratio of X to its uniformized counterpart; 1 for a uniform matrix."""
    return matrix_pn(x) / matrix_pn(uniformize(x))


def band_average(x: np.ndarray, w: BandWeight) -> float:
    """Algebraic band average: weighted mean of the per-diagonal means.

    Weighting diagonal means (rather than raw elements) removes the finite
    matrix multiplicity bias, so a Toeplitz matrix averages to the same
    value the infinite-strip network solve converges to.
    """
    rs, fs = w.weights()
    n = x.shape[0]
    rs_in = rs[rs < n]
    fs_in = fs[: len(rs_in)]
    means = np.array([np.diagonal(x, r).mean() for r in rs_in])
    return float(np.sum(2.0 * fs_in * means) / np.sum(2.0 * fs_in))


def chain_conductance(g: sparse.spmatrix | np.ndarray, margin: int | None = None,
                      _solver_cache: dict | None = None) -> float:
    """Inverse resistivity of a conductance network on a chain of nodes.

    Injects unit current at node 0, extracts it at node N-1, grounds the
    output node and solves the Kirchhoff equations L*V = I with the network
    Laplacian L (singular before grounding).  The inverse resistivity is
    the reciprocal bulk voltage slope, measured across the section
    [margin, N-1-margin] to keep contact regions out of the estimate;
    margin=0 measures across the full chain (exact for nearest-neighbor
    chains, where every link carries the terminal current).

    Returns 0 (with a diagnostic warning) when the terminals are not in the
    same connected component.
    """
    g = sparse.csr_matrix(g)
    n = g.shape[0]
    if n < 2:
        raise ValueError("network needs at least 2 nodes")
    n_comp, labels = csgraph.connected_components(g, directed=False)
    if labels[0] != labels[n - 1]:
        warnings.warn("network disconnected between terminals; conductance 0", stacklevel=2)
        return 0.0
    if margin is None:
        coo = g.tocoo()
        r_span = int(np.max(np.abs(coo.row - coo.col))) if coo.nnz else 1
        margin = min(max(2 * r_span, 16), (n - 1) // 3)
    a, b = margin, n - 1 - margin
    if b <= a:
        a, b = 0, n - 1

    degree = np.asarray(g.sum(axis=1)).ravel()
    lap = sparse.diags(degree) - g
    lap_red = lap[:-1, :-1].tocsc()
    current = np.zeros(n)
    current[0], current[-1] = 1.0, -1.0
    lu = splu(lap_red)
    v = np.append(lu.solve(current[:-1]), 0.0)
    # one refinement pass if the residual is not already at solver precision
    resid = lap @ v - current
    if np.max(np.abs(resid)) > 1e-10:
        v[:-1] -= lu.solve(resid[:-1])
        resid = lap @ v - current
        if np.max(np.abs(resid)) > 1e-8:
            raise RuntimeError("Kirchhoff solve did not converge (ill-conditioned network)")
    drop = v[a] - v[b]
    if drop <= 0:
        warnings.warn("nonpositive voltage drop; conductance treated as 0", stacklevel=2)
        return 0.0
    return (b - a) / drop


def _band_conductances(x_diagonals: list[np.ndarray], rs: np.ndarray,
                       fs: np.ndarray, n: int) -> sparse.spmatrix:
    data, offsets = [], []
    for r, f, d in zip(rs, fs, x_diagonals):
        g_r = 2.0 * f * d / r ** 2
        data.extend([g_r, g_r])
        offsets.extend([r, -r])
    return sparse.diags(data, offsets, shape=(n, n), format="csr")


def network_average(x: np.ndarray, w: BandWeight, margin: int | None = None) -> float:
    """Resistor-network average <<X>>_s: inverse resistivity of the FGR network.

    Conductors are G_nm = 2*F(n-m)*X_nm/(n-m)^2 on the in-band offsets.
    The result is normalized against the identical network built from an
    all-ones matrix, so a uniform X returns its constant value exactly and
    a Toeplitz X coincides with the algebraic band average.
    """
    n = x.shape[0]
    rs, fs = w.weights()
    keep = rs < n
    rs, fs = rs[keep], fs[keep]
    diags = [np.asarray(np.diagonal(x, r), dtype=float) for r in rs]
    g_x = _band_conductances(diags, rs, fs, n)
    g_ref = _band_conductances([np.ones(n - r) for r in rs], rs, fs, n)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ref = chain_conductance(g_ref, margin)
    val = chain_conductance(g_x, margin)
    return val / ref


def band_bounds(x: np.ndarray, w: BandWeight) -> dict:
    """Harmonic/geometric/median lower references for the network average."""
    rs, fs = w.weights()
    n = x.shape[0]
    keep = rs < n
    rs, fs = rs[keep], fs[keep]
    norm = np.sum(2.0 * fs)
    inv_means, log_means, elems = [], [], []
    with np.errstate(divide="ignore"):
        for r in rs:
            d = np.diagonal(x, r)
            elems.append(d)
            inv_means.append(np.mean(1.0 / d) if np.all(d > 0) else np.inf)
            log_means.append(np.mean(np.log(d)) if np.all(d > 0) else -np.inf)
    inv_avg = float(np.sum(2.0 * fs * np.asarray(inv_means)) / norm)
    log_avg = float(np.sum(2.0 * fs * np.asarray(log_means)) / norm)
    return {
        "harmonic": 0.0 if not np.isfinite(inv_avg) else 1.0 / inv_avg,
        "geometric": 0.0 if not np.isfinite(log_avg) else math.exp(log_avg),
        "median": float(np.median(np.concatenate(elems))),
    }


def g_report(x: np.ndarray, w: BandWeight, x_avg_inf: float,
             margin: int | None = None) -> dict:
    """Dimensionless absorption factors g_c, g_s and g = g_s*g_c."""
    if not x_avg_inf > 0:
        raise ValueError("x_avg_inf must be positive")
    avg_a = band_average(x, w)
    if avg_a == 0.0:
        raise ValueError("zero band average; g factors undefined")
    avg_s = network_average(x, w, margin)
    g_s = avg_s / avg_a
    g_c = avg_a / x_avg_inf
    return {"g_c": g_c, "g_s": g_s, "g": g_s * g_c,
            "avg_a": avg_a, "avg_s": avg_s}


def vrh_correct(g: float, b: float) -> dict:
    """Variable-range-hopping lift of a typical-value g estimate.

    Returns the raw resummed value g*exp(sqrt(ln(b)*ln(1/g))) and its
    capped version min(1, raw).  The cap direction follows the reading in
    which the correction remains a suppression factor; the raw value is
    exposed so the other reading stays available.
    """
    if b < 1:
        raise ValueError("bandwidth b must be >= 1")
    if g > 1.0:
        warnings.warn("g > 1 passed to VRH correction; identity pass-through", stacklevel=2)
        return {"corrected": g, "raw": g}
    if not g > 0:
        raise ValueError("g must be positive")
    raw = g * math.exp(math.sqrt(math.log(b) * math.log(1.0 / g)))
    return {"corrected": min(1.0, raw), "raw": raw}


def gc_weak_localization(gc_classical: float, delta0_over_deltaR: float) -> float:
    """Finite level-spacing correction to the classical g_c."""
    ratio = delta0_over_deltaR
    if not 0.0 < ratio < 1.0:
        raise ValueError("delta0/deltaR must lie in (0, 1)")
    factor = 1.0 - ratio * math.log(2.0 / ratio)
    if factor < 0.0:
        warnings.warn("weak-localization bracket negative; clamped to 0", stacklevel=2)
        factor = 0.0
    return factor * gc_classical


def gs_theory(u: float, hbar_eff: float, alpha: float = 1.25) -> float:
    """Perturbative estimate g_s ~ (1/hbar)^(6-4*alpha) * u^2."""
    if hbar_eff <= 0:
        raise ValueError("hbar_eff must be positive")
    if u < 0:
        raise ValueError("u must be nonnegative")
    return (1.0 / hbar_eff) ** (6.0 - 4.0 * alpha) * u ** 2


def first_minimum_bc(profile: BandProfile) -> int:
    """Band-matching cutoff: first minimum of the 3-point-smoothed mean profile."""
    m = profile.mean_values
    if len(m) < 3:
        return 1
    sm = m.copy()
    sm[1:-1] = (m[:-2] + m[1:-1] + m[2:]) / 3.0
    for i in range(1, len(sm) - 1):
        if sm[i - 1] > sm[i] < sm[i + 1]:
            return int(profile.r[i])
    return int(profile.r[np.argmin(sm)])


@dataclass(frozen=True)
class MeasureReport:
    """Sparsity and absorption measures for one intensity matrix."""

    b_c: float
    weight_kind: str
    s: float
    g_c: float
    g_s: float
    g: float
    g_vrh: float
    g_vrh_raw: float
    avg_a: float
    avg_s: float
    x_avg_inf: float
    bounds: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "b_c": self.b_c, "weight_kind": self.weight_kind, "s": self.s,
            "g_c": self.g_c, "g_s": self.g_s, "g": self.g,
            "g_vrh": self.g_vrh, "g_vrh_raw": self.g_vrh_raw,
            "avg_a": self.avg_a, "avg_s": self.avg_s,
            "x_avg_inf": self.x_avg_inf, "bounds": dict(self.bounds),
        }


def measure_matrix(x: np.ndarray, x_avg_inf: float, weight_kind: str = "exponential",
                   b_c: float | None = None, margin: int | None = None) -> MeasureReport:
    """Full measurement pipeline: cutoff detection, s, band/network averages, VRH."""
    if b_c is None:
        b_c = float(first_minimum_bc(band_profiles(x)))
    w = BandWeight(weight_kind, b_c)
    gr = g_report(x, w, x_avg_inf, margin)
    g = gr["g"]
    vrh = vrh_correct(g, max(1.0, b_c)) if 0 < g <= 1 else {"corrected": g, "raw": g}
    return MeasureReport(b_c=b_c, weight_kind=weight_kind, s=sparsity_s(x),
                         g_c=gr["g_c"], g_s=gr["g_s"], g=g,
                         g_vrh=vrh["corrected"], g_vrh_raw=vrh["raw"],
                         avg_a=gr["avg_a"], avg_s=gr["avg_s"],
                         x_avg_inf=x_avg_inf, bounds=band_bounds(x, w))
