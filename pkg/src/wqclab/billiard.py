"""Event-driven dynamics in the deformed rectangular billiard.

The domain is the rectangle [0,Lx] x [0,Ly] whose left wall is replaced by
a circular arc bulging into the box: the wall sits at
x(y) = sqrt(R^2 - (y-eps)^2) - x_c with x_c = sqrt(R^2 - (Ly-eps)^2), so it
meets the corner (0, Ly) exactly and protrudes by the deformation profile
D(y) >= 0.  The arc's center (-x_c, eps) lies outside the domain, making
the wall dispersing: the billiard is fully chaotic with no stable islands
(an outward bulge would instead form a stable flat/concave two-mirror
cavity with the piston).  The piston is the right wall x = Lx.  Walls
reflect specularly; propagation is exact ray geometry (no time step).
Directions are unit vectors, so kernel time equals path length; wrappers
convert to physical time with the particle speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .scales import BilliardParams, derive_scales

WALL_PISTON = 0
WALL_TOP = 1
WALL_BOTTOM = 2
WALL_ARC = 3
WALL_LABELS = {WALL_PISTON: "piston", WALL_TOP: "top", WALL_BOTTOM: "bottom", WALL_ARC: "arc"}

_T_EPS = 1e-12       # minimum advance between events
_NUDGE = 1e-13       # inward nudge after an arc reflection


def arc_center_x(p: BilliardParams) -> float:
    """x coordinate of the arc circle center, -sqrt(R^2-(Ly-eps)^2) (y coordinate eps)."""
    if p.integrable:
        return -math.inf
    return -math.sqrt(p.R ** 2 - (p.Ly - p.eps) ** 2)


def wall_x(y, p: BilliardParams):
    """Position of the deformed left wall at height y: the bulge depth D(y) >= 0."""
    if p.integrable:
        return np.zeros_like(np.asarray(y, dtype=float)) if np.ndim(y) else 0.0
    return np.sqrt(p.R ** 2 - (np.asarray(y, dtype=float) - p.eps) ** 2) + arc_center_x(p)


@dataclass(frozen=True)
class ParticleState:
    position: tuple[float, float]
    direction: tuple[float, float]
    time: float = 0.0

    def __post_init__(self):
        dx, dy = self.direction
        norm = math.hypot(dx, dy)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"direction must be a unit vector, |d| = {norm}")


@dataclass(frozen=True)
class PistonCollision:
    t: float
    y: float
    theta: float


@dataclass(frozen=True)
class CollisionSequence:
    """Ordered piston-collision records of one trajectory.

    ``t`` are physical collision times, ``y`` impact heights on the piston
    and ``theta`` incidence angles from the wall normal, in (-pi/2, pi/2).
    """

    t: np.ndarray
    y: np.ndarray
    theta: np.ndarray
    t_total: float
    params: BilliardParams
    seed: int | None = None

    def __post_init__(self):
        if len(self.t) and np.any(np.diff(self.t) < 0):
            raise ValueError("collision times must be nondecreasing")
        if len(self.t) and self.t_total < self.t[-1]:
            raise ValueError("t_total precedes the last collision")
        if np.any(np.abs(self.theta) >= 0.5 * math.pi):
            raise ValueError("incidence angles must lie in (-pi/2, pi/2)")

    def __len__(self) -> int:
        return len(self.t)

    def impulses(self, d_f=None) -> np.ndarray:
        """Impulse weights q_j = 2*m*vE*cos(theta_j)*D_f(y_j)."""
        v = derive_scales(self.params).vE
        q = 2.0 * self.params.mass * v * np.cos(self.theta)
        if d_f is not None:
            q = q * d_f(self.y)
        return q


@njit(cache=True)
def _step(x, y, vx, vy, lx, ly, finite_r, xc, eps, r2):
    """Advance to the next wall event and reflect. Returns (dt, state, wall id).

    Wall ids: 0 piston, 1 top, 2 bottom, 3 arc/left.  dt < 0 flags a
    geometry failure (no forward intersection or escaped domain).
    """
    inf = 1e300
    if x < -lx or x > 2.0 * lx or y < -ly or y > 2.0 * ly:
        return -1.0, x, y, vx, vy, -1
    t_p = (lx - x) / vx if vx > 0.0 else inf
    t_t = (ly - y) / vy if vy > 0.0 else inf
    t_b = -y / vy if vy < 0.0 else inf
    t_l = inf
    if finite_r:
        # entry crossing of the circle centered at (xc, eps); domain is outside
        px = x - xc
        py = y - eps
        a = vx * vx + vy * vy
        beta = px * vx + py * vy
        disc = beta * beta - a * (px * px + py * py - r2)
        if disc > 0.0 and beta < 0.0:
            t_cand = (-beta - math.sqrt(disc)) / a
            if t_cand > _T_EPS:
                hx = x + t_cand * vx
                hy = y + t_cand * vy
                if -1e-10 <= hy <= ly + 1e-10 and hx >= xc:
                    t_l = t_cand
    else:
        t_l = -x / vx if vx < 0.0 else inf

    tm = t_p
    wall = 0
    if t_t < tm:
        tm, wall = t_t, 1
    if t_b < tm:
        tm, wall = t_b, 2
    if t_l < tm:
        tm, wall = t_l, 3
    if tm >= inf:
        return -1.0, x, y, vx, vy, -1

    x += tm * vx
    y += tm * vy
    # corner: reflect every wall reached within the advance guard
    if t_p <= tm + _T_EPS:
        vx = -vx
        x = lx
    if t_t <= tm + _T_EPS:
        vy = -vy
        y = ly
    if t_b <= tm + _T_EPS:
        vy = -vy
        y = 0.0
    if t_l <= tm + _T_EPS:
        if finite_r:
            # outward-of-circle radial direction points into the domain
            nxr = x - xc
            nyr = y - eps
            nn = math.sqrt(nxr * nxr + nyr * nyr)
            nxr /= nn
            nyr /= nn
            dot = vx * nxr + vy * nyr
            vx -= 2.0 * dot * nxr
            vy -= 2.0 * dot * nyr
            vn = math.sqrt(vx * vx + vy * vy)
            vx /= vn
            vy /= vn
            x += _NUDGE * nxr
            y += _NUDGE * nyr
        else:
            vx = -vx
            x = 0.0
    return tm, x, y, vx, vy, wall


@njit(cache=True)
def _run(x, y, vx, vy, lx, ly, finite_r, xc, eps, r2, n_hits, max_events,
         ts, ys, thetas, k_start):
    """Collect piston collisions. Returns (flag, k, t, x, y, vx, vy, events).

    flag 0: done; 1: event budget exhausted; 2: geometry failure.
    """
    t = 0.0
    k = k_start
    events = 0
    while k < n_hits:
        dt, x, y, vx, vy, wall = _step(x, y, vx, vy, lx, ly, finite_r, xc, eps, r2)
        if wall < 0:
            return 2, k, t, x, y, vx, vy, events
        t += dt
        events += 1
        if wall == 0:
            ts[k] = t
            ys[k] = y
            # arrival velocity had +vx; the reflected state has -vx
            thetas[k] = math.atan2(vy, -vx)
            k += 1
        if events >= max_events:
            return 1, k, t, x, y, vx, vy, events
    return 0, k, t, x, y, vx, vy, events


def _kernel_args(p: BilliardParams):
    if p.integrable:
        return False, 0.0, p.eps, 0.0
    return True, arc_center_x(p), p.eps, p.R ** 2


def propagate_to_next_collision(s: ParticleState, p: BilliardParams):
    """Propagate to the next specular reflection; returns (new state, wall label).

    The returned state is the post-reflection state at the physical time of
    the collision (speed set by the window-center energy of ``p``).
    """
    finite_r, xc, eps, r2 = _kernel_args(p)
    x, y = s.position
    dx, dy = s.direction
    dt, x2, y2, dx2, dy2, wall = _step(x, y, dx, dy, p.Lx, p.Ly, finite_r, xc, eps, r2)
    if wall < 0:
        raise RuntimeError("no forward wall intersection: invalid state or geometry bug")
    v = derive_scales(p).vE
    return ParticleState((x2, y2), (dx2, dy2), s.time + dt / v), WALL_LABELS[wall]


def sample_initial_state(p: BilliardParams, rng: np.random.Generator) -> ParticleState:
    """Uniform position inside the domain, isotropic direction."""
    while True:
        x = rng.uniform(0.0, p.Lx)
        y = rng.uniform(0.0, p.Ly)
        if x >= wall_x(y, p) + 1e-12:
            break
    phi = rng.uniform(0.0, 2.0 * math.pi)
    return ParticleState((x, y), (math.cos(phi), math.sin(phi)))


def simulate_trajectory(p: BilliardParams, n_piston_hits: int, seed: int = 0,
                        initial_state: ParticleState | None = None,
                        max_events: int | None = None) -> CollisionSequence:
    """Run one trajectory until ``n_piston_hits`` piston collisions are recorded.

    Deterministic given the seed.  If the initial state sits on the piston
    moving inward, that touch is recorded as the collision at t = 0.  When
    the piston is not reached within the event budget (the integrable
    near-bouncing trap), a RuntimeError is raised.
    """
    if n_piston_hits < 1:
        raise ValueError("n_piston_hits must be >= 1")
    if max_events is None:
        max_events = 200 * n_piston_hits + 1_000_000
    rng = np.random.default_rng(seed)
    state = initial_state if initial_state is not None else sample_initial_state(p, rng)
    x, y = state.position
    dx, dy = state.direction

    ts = np.empty(n_piston_hits)
    ys = np.empty(n_piston_hits)
    thetas = np.empty(n_piston_hits)
    k0 = 0
    if abs(x - p.Lx) <= 1e-12 * p.Lx and dx < 0.0:
        ts[0], ys[0], thetas[0] = 0.0, y, math.atan2(dy, -dx)
        k0 = 1

    finite_r, xc, eps, r2 = _kernel_args(p)
    flag, k, t_len, *_ = _run(x, y, dx, dy, p.Lx, p.Ly, finite_r, xc, eps, r2,
                              n_piston_hits, max_events, ts, ys, thetas, k0)
    if flag == 2:
        raise RuntimeError("geometry failure: no forward wall intersection")
    if flag == 1:
        raise RuntimeError(
            f"event budget exhausted after {max_events} events with "
            f"{k}/{n_piston_hits} piston hits (near-bouncing trap?)")
    v = derive_scales(p).vE
    return CollisionSequence(t=ts / v, y=ys, theta=thetas, t_total=ts[-1] / v,
                             params=p, seed=seed)
