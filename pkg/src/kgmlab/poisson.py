"""Reduction map u -> phi_u: the electrostatic (gauge) equation solver.

For a given matter profile u the potential solves the linear two-point
problem

    -(r^2 phi')' + e^2 r^2 u^2 phi = e omega r^2 u^2,

discretized by a conservative finite-volume scheme on the radial grid with
phi'(0) = 0 (regularity) and the Robin condition phi'(R) + phi(R)/R = 0,
which is exact for a pure Coulomb 1/r tail.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solveh_banded

from .radial import (ModelParams, RadialField, dirichlet_energy, integrate3d)

# Radial-lemma constant: phi_u(r) <= C r^{-1/2} ||grad phi_u||_2 with
# C = (4 pi)^{-1/2} from the Cauchy-Schwarz proof, making the threshold
# radius C1 ||grad phi_u||_2^2 explicit.
RADIAL_LEMMA_C = (4.0 * np.pi) ** -0.5


def threshold_c1(params: ModelParams) -> float:
    """C1 = 4 e^2 C^2 / omega^2 = e^2 / (pi omega^2)."""
    return 4.0 * params.e**2 * RADIAL_LEMMA_C**2 / params.omega**2


@dataclass(frozen=True)
class PhiSolveReport:
    """Converged potential plus the scalars every caller wants."""

    phi: RadialField
    energy_identity_residual: float
    gradient_norm: float
    tail_constant: float


def solve_radial_poisson(grid, mass: np.ndarray, source: np.ndarray) -> np.ndarray:
    """Solve -(r^2 phi')' + mass(r) r^2 phi = source(r) r^2 on the grid.

    ``mass`` and ``source`` are nodal samples; mass must be >= 0 so the
    system is symmetric positive definite.  Kept separate from solve_phi so
    manufactured-solution tests can drive it with an arbitrary right side.
    """
    r = grid.nodes
    h = np.diff(r)
    rmid = 0.5 * (r[:-1] + r[1:])
    beta = rmid**2 / h                       # face conductances
    # exact cell moments integral r^2 dr over each control volume
    faces = np.concatenate(([0.0], rmid, [r[-1]]))
    vol = np.diff(faces**3) / 3.0

    diag = np.empty_like(r)
    diag[0] = beta[0]
    diag[1:-1] = beta[:-1] + beta[1:]
    diag[-1] = beta[-1] + r[-1]              # Robin: outward flux = R * phi_N
    diag = diag + mass * vol
    off = -beta

    ab = np.zeros((2, r.size))
    ab[0, 1:] = off
    ab[1, :] = diag
    rhs = source * vol
    try:
        return solveh_banded(ab, rhs, lower=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - SPD by construction
        raise RuntimeError("tridiagonal gauge solve is singular") from exc


def tail_constant(phi: RadialField) -> float:
    """Average of r * phi(r) over the last decade [R/10, R] of the grid."""
    r = phi.grid.nodes
    sel = r >= phi.grid.r_max / 10.0
    return float(np.mean(r[sel] * phi.values[sel]))


def solve_phi(u: RadialField, params: ModelParams) -> PhiSolveReport:
    """Unique finite-energy potential generated by the matter profile u."""
    u2 = u.values**2
    phi_vals = solve_radial_poisson(u.grid, params.e**2 * u2,
                                    params.e * params.omega * u2)
    phi = u.with_values(phi_vals)
    return PhiSolveReport(
        phi=phi,
        energy_identity_residual=energy_identity_residual(u, phi, params),
        gradient_norm=(dirichlet_energy(phi)
                       + 4.0 * np.pi * u.grid.r_max * phi_vals[-1] ** 2) ** 0.5,
        tail_constant=tail_constant(phi),
    )


def energy_identity_residual(u: RadialField, phi: RadialField,
                             params: ModelParams) -> float:
    """Relative defect of the identity

        integral |grad phi|^2 + e^2 integral phi^2 u^2 = e omega integral phi u^2,

    obtained by pairing the gauge equation with phi itself.  The integrals
    run over all of R^3: the grid covers [0, R_max] and the exterior
    gradient energy of the Coulomb tail phi ~ K/r contributes exactly
    4 pi R phi(R)^2, the same closure the Robin condition encodes.
    """
    r_max = phi.grid.r_max
    grad = dirichlet_energy(phi) + 4.0 * np.pi * r_max * phi.values[-1] ** 2
    quad = integrate3d(u.with_values(phi.values**2 * u.values**2))
    lin = integrate3d(u.with_values(phi.values * u.values**2))
    e, w = params.e, params.omega
    return abs(grad + e**2 * quad - e * w * lin) / max(1.0, e * w * lin)


@dataclass(frozen=True)
class PhiLowerBoundReport:
    radii: np.ndarray
    slack: np.ndarray
    min_slack: float


def phi_lower_bound_check(u: RadialField, phi: RadialField,
                          params: ModelParams, r1: float) -> PhiLowerBoundReport:
    """Check phi(r) >= (e omega / 2) integral_{r1}^inf s^2/max(r,s) u^2(s) ds
    for all grid radii r > r1.

    Valid only beyond the threshold max(1, C1 ||grad phi_u||_2^2); violations
    beyond it flag a solver bug when phi really is phi_u.
    """
    thr = max(1.0, threshold_c1(params) * dirichlet_energy(phi))
    if r1 < thr:
        raise ValueError(f"r1 = {r1} is below the threshold {thr}")
    r = u.grid.nodes
    w = u.grid.weights
    su2 = np.where(r >= r1, u.values**2, 0.0) * w
    outer = r > r1
    radii = r[outer]
    # integral s^2/max(r,s) u^2 ds = (1/r) integral_{s<=r} s^2 u^2 + integral_{s>r} s u^2
    lo = np.cumsum(su2 * r**2)
    hi_total = np.sum(su2 * r)
    hi = hi_total - np.cumsum(su2 * r)
    rhs = 0.5 * params.e * params.omega * (lo[outer] / radii + hi[outer])
    slack = phi.values[outer] - rhs
    min_slack = float(slack.min()) if slack.size else 0.0
    return PhiLowerBoundReport(radii=radii, slack=slack, min_slack=min_slack)
