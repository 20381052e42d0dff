"""Ground states of the frozen-potential matter equation.

The inner problem of the coupled iteration is

    -u'' - (2/r) u' + W(r) u = u^{p-1},   u'(0) = 0,  u -> 0,

for a frozen nonnegative potential W.  Ground states are found by amplitude
shooting: trajectories from u(0) = a either cross zero (a too large) or stay
positive (too small), and the decaying profile sits on the boundary.  The
shooting parameter is resolved by a batched bisection sweep; beyond the
amplitude where the unstable mode of the linearization would contaminate the
trajectory, the profile is continued with the WKB decaying asymptotics
u ~ (r_s/r) exp(-integral sqrt(W)).  An independent Nehari-projected descent
solver cross-checks the result.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded, solveh_banded

from .errors import NoBracketError, NonconvergenceError
from .radial import ModelParams, RadialField, RadialGrid, integrate3d

DIVERGE_FACTOR = 10.0       # "diverged" = exceeds this multiple of a after a minimum
BLOWUP_CAP = 1e8            # treat as numerically blown up past this
AMPLITUDE_TOL = 1e-12
TAIL_SWITCH_RATIO = 1e-4    # hand over to the WKB tail at u <= ratio * u(0)
SWEEP_WIDTH = 64


@dataclass(frozen=True)
class FrozenPotential:
    """Nodal samples of W(r) = eps + e(2 omega - e phi) phi for the current phi."""

    W: RadialField
    floor: float

    @classmethod
    def from_field(cls, W: RadialField) -> "FrozenPotential":
        return cls(W=W, floor=float(W.values.min()))

    @classmethod
    def from_phi(cls, phi: RadialField, params: ModelParams) -> "FrozenPotential":
        e, w = params.e, params.omega
        vals = params.epsilon + e * (2 * w - e * phi.values) * phi.values
        return cls.from_field(phi.with_values(vals))

    @classmethod
    def constant(cls, grid: RadialGrid, value: float) -> "FrozenPotential":
        return cls.from_field(RadialField(grid, np.full(grid.nodes.size, float(value))))

    @property
    def grid(self) -> RadialGrid:
        return self.W.grid


@dataclass(frozen=True)
class ShotOutcome:
    """Classification of a single outward shot."""

    kind: str                 # crossed_zero | diverged | decayed
    radius: float | None      # crossing or blow-up radius, None for decayed
    final_amplitude: float


def _midpoint_potential(W: FrozenPotential) -> np.ndarray:
    r = W.grid.nodes
    return np.interp(0.5 * (r[:-1] + r[1:]), r, W.W.values)


def _rhs(r: float, u, v, W, p: float):
    """Right side of the first-order system (u, v) at radius r."""
    g = W * u - np.sign(u) * np.abs(u) ** (p - 1)
    if r == 0.0:
        return v, g / 3.0
    return v, g - 2.0 * v / r


def _shoot_batch(W: FrozenPotential, p: float, amps: np.ndarray,
                 record: bool = False):
    """Integrate a batch of shots with classic RK4 along the grid.

    Returns (kinds, radii, finals) and, when ``record`` is set (single shot),
    the full trajectory array as fourth element.
    """
    r = W.grid.nodes
    Wn = W.W.values
    Wm = _midpoint_potential(W)
    n = r.size - 1
    amps = np.asarray(amps, dtype=float)
    b = amps.size
    # small-amplitude lanes legitimately rise to the largest equilibrium
    # u* = (max W)^{1/(p-2)} and oscillate around it; only regrowth well
    # beyond both the start and u* signals divergence
    u_star = float(np.max(Wn)) ** (1.0 / (p - 2.0))
    diverge_at = DIVERGE_FACTOR * np.maximum(amps, u_star)

    u = amps.copy()
    v = np.zeros(b)
    active = np.ones(b, dtype=bool)
    seen_min = np.zeros(b, dtype=bool)
    kinds = np.full(b, "decayed", dtype=object)
    radii = np.full(b, np.nan)
    finals = amps.copy()
    traj = np.zeros(r.size) if record else None
    if record:
        traj[0] = u[0]

    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(n):
            h = r[i + 1] - r[i]
            rm = r[i] + 0.5 * h
            k1u, k1v = _rhs(r[i], u, v, Wn[i], p)
            k2u, k2v = _rhs(rm, u + 0.5 * h * k1u, v + 0.5 * h * k1v, Wm[i], p)
            k3u, k3v = _rhs(rm, u + 0.5 * h * k2u, v + 0.5 * h * k2v, Wm[i], p)
            k4u, k4v = _rhs(r[i + 1], u + h * k3u, v + h * k3v, Wn[i + 1], p)
            un = u + h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u)
            vn = v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)

            un = np.where(active, un, u)
            vn = np.where(active, vn, v)

            bad = active & ~(np.isfinite(un) & np.isfinite(vn))
            blow = active & np.isfinite(un) & (np.abs(un) > BLOWUP_CAP)
            crossed = active & ~bad & (un <= 0.0)
            seen_min |= active & (v < 0.0) & (vn >= 0.0)
            grew = active & ~bad & seen_min & (un > diverge_at)

            for mask, kind in ((crossed, "crossed_zero"),
                               (bad | blow | grew, "diverged")):
                hit = mask & active
                if hit.any():
                    kinds[hit] = kind
                    radii[hit] = r[i + 1]
                    finals[hit] = np.where(np.isfinite(un[hit]), un[hit], np.inf)
                    active &= ~hit

            u, v = np.where(active, un, u), np.where(active, vn, v)
            if record:
                traj[i + 1] = un[0]
            if not active.any():
                if record:
                    traj[i + 2:] = traj[i + 1]
                break

    finals = np.where(active, u, finals)
    if record:
        return kinds, radii, finals, traj
    return kinds, radii, finals


def shoot(W: FrozenPotential, p: float, a: float) -> ShotOutcome:
    """Classify a single outward shot from amplitude a.

    crossed_zero: u reached 0; diverged: u exceeded 10a after a local minimum
    (or blew up); decayed: neither happened on the grid.
    """
    if not (a > 0):
        raise ValueError(f"initial amplitude must be positive, got {a}")
    if not (p > 2):
        raise ValueError(f"shooting needs p > 2, got {p}")
    kinds, radii, finals = _shoot_batch(W, p, np.array([a]))
    radius = None if np.isnan(radii[0]) else float(radii[0])
    return ShotOutcome(kind=str(kinds[0]), radius=radius,
                       final_amplitude=float(finals[0]))


def _wkb_tail(W: FrozenPotential, i0: int, u0: float) -> np.ndarray:
    """Decaying asymptotics (r0/r) exp(-integral sqrt(W)) from node i0 on."""
    r = W.grid.nodes[i0:]
    q = np.sqrt(np.clip(W.W.values[i0:], 0.0, None))
    phase = np.concatenate(([0.0], np.cumsum(0.5 * (q[1:] + q[:-1]) * np.diff(r))))
    return u0 * (r[0] / r) * np.exp(-phase)


def find_ground_state(W: FrozenPotential, p: float,
                      bracket: tuple[float, float]) -> RadialField:
    """Positive radially decreasing ground state by batched amplitude bisection.

    ``bracket`` = (a_lo, a_hi) must satisfy: the a_hi shot crosses zero, the
    a_lo shot does not.  The amplitude is refined to 1e-12; past the radius
    where the shot can no longer be trusted (u below 1e-4 of the peak, or a
    premature local minimum) the profile is continued with the WKB decaying
    tail of the linearized equation.
    """
    lo, hi = bracket
    if not (0 < lo < hi):
        raise ValueError(f"need 0 < a_lo < a_hi, got {bracket}")
    k_lo = shoot(W, p, lo).kind
    k_hi = shoot(W, p, hi).kind
    if k_hi != "crossed_zero" or k_lo == "crossed_zero":
        raise NoBracketError(
            f"bracket {bracket} gives ({k_lo}, {k_hi}); "
            "need (non-crossing, crossed_zero)")

    while hi - lo > AMPLITUDE_TOL * max(1.0, hi):
        amps = np.linspace(lo, hi, SWEEP_WIDTH + 2)[1:-1]
        kinds, _, _ = _shoot_batch(W, p, amps)
        crossed = np.flatnonzero(kinds == "crossed_zero")
        if crossed.size:
            j = crossed[0]
            hi = amps[j]
            lo = amps[j - 1] if j > 0 else lo
        else:
            lo = amps[-1]

    a = 0.5 * (lo + hi)
    _, _, _, traj = _shoot_batch(W, p, np.array([a]), record=True)

    # hand over to the WKB tail at the first unusable sample
    vals = traj.copy()
    dec = np.diff(vals) < 0.0
    switch = None
    for i in range(1, vals.size - 1):
        if vals[i] <= 0.0 or not dec[i - 1] and vals[i - 1] < a:
            switch = i - 1
            break
        if vals[i] <= TAIL_SWITCH_RATIO * a:
            switch = i
            break
    if switch is not None:
        if vals[switch] > 1e-3 * a:
            warnings.warn("shooting trajectory lost accuracy early; "
                          "tail patched above 1e-3 of the peak", stacklevel=2)
        vals[switch:] = _wkb_tail(W, switch, vals[switch])
    elif vals[-1] > 1e-10 * a:
        warnings.warn("ground-state tail not resolved at r_max "
                      f"(u(R)/u(0) = {vals[-1] / a:.2e})", stacklevel=2)
    return RadialField(W.grid, vals)


def nehari_scale(u: RadialField, W: FrozenPotential, p: float) -> float:
    """Unique t > 0 placing t*u on the Nehari manifold of the frozen problem."""
    denom = integrate3d(u.with_values(np.abs(u.values) ** p))
    if denom <= 0.0:
        raise ValueError("cannot project the zero field onto the Nehari manifold")
    num = _quadratic_form(u, W)
    return (num / denom) ** (1.0 / (p - 2.0))


def _quadratic_form(u: RadialField, W: FrozenPotential) -> float:
    from .radial import dirichlet_energy
    return dirichlet_energy(u) + integrate3d(
        u.with_values(W.W.values * u.values**2))


def _stiffness_banded(grid: RadialGrid, W_vals: np.ndarray):
    """FV matrix of -(r^2 u')' + r^2 W u in solveh_banded layout, plus cell moments."""
    r = grid.nodes
    h = np.diff(r)
    rmid = 0.5 * (r[:-1] + r[1:])
    beta = rmid**2 / h
    faces = np.concatenate(([0.0], rmid, [r[-1]]))
    vol = np.diff(faces**3) / 3.0
    diag = np.empty_like(r)
    diag[0] = beta[0]
    diag[1:-1] = beta[:-1] + beta[1:]
    diag[-1] = beta[-1] + r[-1]          # Robin outer edge, matches solve_phi
    ab = np.zeros((2, r.size))
    ab[0, 1:] = -beta
    ab[1, :] = diag + W_vals * vol
    return ab, vol


def nehari_descent(u0: RadialField, W: FrozenPotential, p: float,
                   steps: int = 400) -> RadialField:
    """Cross-check solver: preconditioned descent on the frozen action

        E(u) = 1/2 integral (|grad u|^2 + W u^2) dx - (1/p) integral |u|^p dx

    alternated with projection onto the Nehari manifold.  The descent
    direction is the gradient in the (-Laplace + W) inner product, so each
    step costs one tridiagonal solve.  Close to a critical point the line
    search can no longer resolve energy differences, so a short Newton
    polish on the stationarity equation finishes the job.
    """
    if not np.any(u0.values != 0.0):
        raise ValueError("descent needs a nonzero starting profile")
    grid = u0.grid
    ab, vol = _stiffness_banded(grid, W.W.values)

    def apply_A(x):
        y = ab[1] * x
        y[:-1] += ab[0, 1:] * x[1:]
        y[1:] += ab[0, 1:] * x[:-1]
        return y

    def energy(x):
        return 0.5 * float(x @ apply_A(x)) - float(vol @ np.abs(x) ** p) / p

    def residual(x):
        g = apply_A(x) - vol * np.sign(x) * np.abs(x) ** (p - 1)
        scale = float(np.linalg.norm(vol * np.abs(x) ** (p - 1)))
        return g, float(np.linalg.norm(g)) / max(scale, 1e-300)

    def polish(x):
        ab3 = np.zeros((3, x.size))
        ab3[0, 1:] = ab[0, 1:]
        ab3[2, :-1] = ab[0, 1:]
        for _ in range(20):
            g, res = residual(x)
            if res < 1e-10:
                break
            ab3[1, :] = ab[1] - (p - 1.0) * vol * np.abs(x) ** (p - 2.0)
            x = x - solve_banded((1, 1), ab3, g)
        return x, residual(x)[1]

    u = u0.values.copy()
    u *= nehari_scale(u0, W, p)
    step = 1.0
    for _ in range(steps):
        g, res = residual(u)
        if res < 1e-4:
            break
        d = solveh_banded(ab, g, lower=False)
        e0 = energy(u)
        while step > 1e-14:
            cand = u - step * d
            if np.any(cand > 0.0):
                cand *= nehari_scale(RadialField(grid, cand), W, p)
                if energy(cand) < e0:
                    break
            step *= 0.5
        else:
            break            # energy-resolution floor; hand over to Newton
        u = cand
        step = min(step * 2.0, 1.0)
    else:
        g, res = residual(u)
        if res > 1e-2:
            raise NonconvergenceError(
                f"descent residual {res:.2e} after {steps} steps",
                last=RadialField(grid, u))
    u, res = polish(u)
    if res < 1e-8:
        return RadialField(grid, u)
    raise NonconvergenceError(
        f"stationarity residual {res:.2e} after Newton polish",
        last=RadialField(grid, u))
