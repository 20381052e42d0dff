"""Coupled fixed-point solver, epsilon-continuation and parameter sweeps.

One outer iteration freezes the potential term: solve the gauge equation for
phi, damp the frozen coefficient W = eps + e(2 omega - e phi) phi, and re-solve
the matter equation for its ground state.  The limit problem eps = 0 is only
reachable by warm-starting from the eps > 0 family, mirroring the way the
limit solution exists as a limit of approximating problems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics as diag
from .errors import NoBracketError, NonconvergenceError
from .matter import FrozenPotential, find_ground_state
from .poisson import solve_phi
from .radial import (ModelParams, RadialField, RadialGrid, default_grid,
                     integrate3d, lp_norm)


@dataclass(frozen=True)
class SolveSettings:
    """Knobs of the outer fixed-point loop."""

    damping: float = 0.5          # theta applied to the frozen potential W
    outer_tol: float = 1e-9       # relative L2 change of u between iterations
    max_outer: int = 80
    bracket: tuple[float, float] = (1e-2, 50.0)   # cold-start amplitude bracket
    bracket_widen: float = 4.0

    def __post_init__(self):
        if not (0.0 < self.damping <= 1.0):
            raise ValueError(f"damping must lie in (0, 1], got {self.damping}")
        if not (self.outer_tol > 0):
            raise ValueError("outer_tol must be positive")


@dataclass(frozen=True)
class SolutionRecord:
    """One converged (u, phi) pair with its full diagnostic report."""

    params: ModelParams
    u: RadialField
    phi: RadialField
    diagnostics: "diag.DiagnosticsReport"
    converged: bool
    outer_iterations: int


@dataclass(frozen=True)
class BranchRecord:
    """Solutions along a decreasing epsilon schedule plus per-epsilon trends."""

    schedule: tuple[float, ...]
    records: tuple[SolutionRecord, ...]
    trends: dict[str, list[float]] = field(repr=False)
    truncated: bool = False


TREND_KEYS = ("l2_norm", "lp_norm", "grad_norm", "phi_u2", "energy", "charge",
              "tail_constant", "decay_exp_rate", "decay_sqrt_rate")


def _ground_state_bracketed(W: FrozenPotential, p: float, guess: float | None,
                            settings: SolveSettings) -> RadialField:
    """Shooting solve with a warm amplitude guess, widening on failure."""
    attempts = []
    if guess is not None:
        attempts.append((0.8 * guess, 1.25 * guess))
        attempts.append((0.4 * guess, 2.5 * guess))
    lo, hi = settings.bracket
    while lo >= 1e-10:
        attempts.append((lo, hi))
        lo /= settings.bracket_widen
        hi *= settings.bracket_widen
    last = None
    for bracket in attempts:
        try:
            return find_ground_state(W, p, bracket)
        except NoBracketError as exc:
            last = exc
    raise last


def solve_coupled(params: ModelParams, settings: SolveSettings = SolveSettings(),
                  warm_start: RadialField | None = None,
                  grid: RadialGrid | None = None) -> SolutionRecord:
    """Damped alternation phi <- phi_u, u <- ground state of the frozen problem.

    Stops when the relative L2 change of u drops below ``outer_tol``; phi is
    slaved to u through the linear solve and inherits convergence.
    """
    if params.epsilon == 0.0 and warm_start is None:
        raise ValueError("the limit problem eps = 0 needs a warm start")
    if grid is None:
        grid = warm_start.grid if warm_start is not None else default_grid()

    if warm_start is not None:
        u = warm_start
        W_vals = None
    else:
        u = None
        W_vals = np.full(grid.nodes.size, params.epsilon)

    amp = None if u is None else float(u.values[0])
    converged = False
    iterations = 0
    for iterations in range(1, settings.max_outer + 1):
        if u is not None:
            phi = solve_phi(u, params).phi
            e, w = params.e, params.omega
            W_new = params.epsilon + e * (2 * w - e * phi.values) * phi.values
            if W_vals is None:
                W_vals = W_new
            else:
                th = settings.damping
                W_vals = (1 - th) * W_vals + th * W_new
        W = FrozenPotential.from_field(RadialField(grid, W_vals))
        u_new = _ground_state_bracketed(W, params.p, amp, settings)
        amp = float(u_new.values[0])
        if u is not None:
            dv = u_new.values - u.values
            change = math.sqrt(integrate3d(u_new.with_values(dv * dv)))
            scale = math.sqrt(integrate3d(u_new.with_values(u_new.values**2)))
            u = u_new
            if change <= settings.outer_tol * scale:
                converged = True
                break
        else:
            u = u_new

    phi = solve_phi(u, params).phi
    if not converged:
        report = diag.diagnose(u, phi, params)
        record = SolutionRecord(params, u, phi, report, False, iterations)
        raise NonconvergenceError(
            f"coupled loop not converged after {iterations} iterations",
            last=record)
    report = diag.diagnose(u, phi, params)
    return SolutionRecord(params, u, phi, report, True, iterations)


def default_schedule(start: float = 1.0, stop: float = 1e-3,
                     ratio: float = 0.5) -> list[float]:
    """Geometric schedule from ``start`` down to the first value <= stop, then 0."""
    out = [start]
    while out[-1] > stop:
        out.append(out[-1] * ratio)
    out.append(0.0)
    return out


def continue_in_epsilon(params: ModelParams, eps_schedule,
                        settings: SolveSettings = SolveSettings(),
                        grid: RadialGrid | None = None) -> BranchRecord:
    """Warm-started branch of solutions along a strictly decreasing schedule."""
    schedule = [float(s) for s in eps_schedule]
    if not schedule:
        raise ValueError("empty epsilon schedule")
    if any(b >= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("epsilon schedule must decrease strictly")
    if schedule[-1] < 0:
        raise ValueError("epsilon must stay >= 0")

    records: list[SolutionRecord] = []
    warm = None
    truncated = False
    for k, eps in enumerate(schedule):
        pk = params.with_epsilon(eps)
        try:
            rec = solve_coupled(pk, settings, warm_start=warm, grid=grid)
        except (NonconvergenceError, NoBracketError):
            if k == 0:
                raise
            truncated = True
            break
        records.append(rec)
        warm = rec.u

    trends = {key: [getattr(r.diagnostics, key) for r in records]
              for key in TREND_KEYS}
    return BranchRecord(schedule=tuple(schedule[:len(records)]),
                        records=tuple(records), trends=trends,
                        truncated=truncated)


def g_threshold(p: float) -> float:
    """Existence threshold g(p) for 0 < omega < m g(p)."""
    if not (2.0 < p < 6.0):
        raise ValueError(f"g(p) is defined for p in (2, 6), got {p}")
    if p < 3.0:
        return math.sqrt((p - 2.0) * (4.0 - p))
    return 1.0


@dataclass(frozen=True)
class SweepEntry:
    p: float
    omega_over_m: float
    epsilon: float
    converged: bool
    in_known_region: bool       # omega/m < g(p), the classical existence strip
    lp_norm: float | None
    message: str = ""


@dataclass(frozen=True)
class SweepResult:
    entries: tuple[SweepEntry, ...]

    def table(self) -> str:
        lines = [f"{'p':>6} {'w/m':>6} {'eps':>10} {'g(p)':>7} "
                 f"{'known':>5} {'conv':>5} {'|u|_p':>10}"]
        for s in self.entries:
            lp = "-" if s.lp_norm is None else f"{s.lp_norm:10.4g}"
            lines.append(f"{s.p:6.2f} {s.omega_over_m:6.3f} {s.epsilon:10.4g} "
                         f"{g_threshold(s.p):7.4f} {str(s.in_known_region):>5} "
                         f"{str(s.converged):>5} {lp:>10}")
        return "\n".join(lines)


def sweep(p_values, omega_over_m_values, e: float,
          settings: SolveSettings = SolveSettings(),
          grid: RadialGrid | None = None, m: float = 1.0) -> SweepResult:
    """Solve over a (p, omega/m) table with eps = m^2 - omega^2.

    For each p the ratios are visited with decreasing epsilon and consecutive
    solves are warm-started, so the critical ratio omega/m = 1 (eps = 0) is
    reached as the endpoint of a mini-branch.  Individual failures are
    recorded, not fatal.
    """
    p_values = list(p_values)
    ratios = sorted(set(float(x) for x in omega_over_m_values))
    if not p_values or not ratios:
        raise ValueError("sweep needs nonempty p and omega/m lists")
    if any(not (0 < x <= 1) for x in ratios):
        raise ValueError("omega/m ratios must lie in (0, 1]")

    entries = []
    for p in p_values:
        warm = None
        for ratio in ratios:
            omega = ratio * m
            eps = m * m - omega * omega
            params = ModelParams(e=e, omega=omega, p=p, epsilon=eps)
            known = ratio < g_threshold(p)
            try:
                rec = solve_coupled(params, settings, warm_start=warm, grid=grid)
                warm = rec.u
                entries.append(SweepEntry(p, ratio, eps, True, known,
                                          rec.diagnostics.lp_norm))
            except (NonconvergenceError, NoBracketError, ValueError) as exc:
                entries.append(SweepEntry(p, ratio, eps, False, known, None,
                                          message=str(exc)))
    return SweepResult(entries=tuple(entries))
