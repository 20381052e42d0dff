"""Identities, functionals, coefficient formulas and asymptotics on a (u, phi) pair.

Everything here is a pure quadrature evaluation; nothing mutates the fields.
The dilation (Pohozaev-type) identity is fixed as the derivative of the
action along u(x) -> u(x/lambda) at lambda = 1, with scaling degree 1 for the
gradient terms and 3 for everything else, and is cross-validated against a
numerical rescaling of the fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .radial import (ModelParams, RadialField, dirichlet_energy, integrate3d,
                     lp_norm)
from .poisson import tail_constant as phi_tail_constant


@dataclass(frozen=True)
class DiagnosticsReport:
    nehari_residual: float
    pohozaev_residual: float
    energy: float
    charge: float
    I_value: float
    J_paper_value: float
    J_standard_value: float
    functional_gap: float
    decay_exp_rate: float
    decay_sqrt_rate: float
    decay_fit_preference: str
    tail_constant: float
    tail_envelope: tuple[float, float]
    l2_norm: float
    lp_norm: float
    grad_norm: float
    phi_grad_norm: float
    phi_u2: float
    matter_residual: float
    gauge_residual: float


def _integrals(u: RadialField, phi: RadialField, params: ModelParams) -> dict:
    e, w, p = params.e, params.omega, params.p
    uv, pv = u.values, phi.values
    # the potential carries a Coulomb tail K/r past the grid; its exterior
    # gradient energy 4 pi R phi(R)^2 belongs to every whole-space integral
    tail_energy = 4.0 * math.pi * phi.grid.r_max * pv[-1] ** 2
    return {
        "grad_u": dirichlet_energy(u),
        "grad_phi": dirichlet_energy(phi) + tail_energy,
        "u2": integrate3d(u.with_values(uv**2)),
        "phi_u2": integrate3d(u.with_values(pv * uv**2)),
        "phi2_u2": integrate3d(u.with_values(pv**2 * uv**2)),
        "up": integrate3d(u.with_values(np.abs(uv)**p)),
    }


def nehari_residual(u: RadialField, phi: RadialField, params: ModelParams) -> float:
    """Relative defect of the Nehari identity of the coupled matter equation."""
    q = _integrals(u, phi, params)
    if q["up"] <= 0.0:
        raise ValueError("Nehari residual undefined for the zero field")
    e, w = params.e, params.omega
    lhs = (q["grad_u"] + params.epsilon * q["u2"]
           + 2 * e * w * q["phi_u2"] - e**2 * q["phi2_u2"])
    return abs(lhs - q["up"]) / q["up"]


def action_value(u: RadialField, phi: RadialField, params: ModelParams) -> float:
    """Two-field action I_eps(u, phi) whose dilation derivative is the identity."""
    q = _integrals(u, phi, params)
    return _action_from_integrals(q, params)


def _action_from_integrals(q: dict, params: ModelParams) -> float:
    e, w, p = params.e, params.omega, params.p
    return (0.5 * (q["grad_u"] - q["grad_phi"] + params.epsilon * q["u2"]
                   + 2 * e * w * q["phi_u2"] - e**2 * q["phi2_u2"])
            - q["up"] / p)


def pohozaev_residual(u: RadialField, phi: RadialField, params: ModelParams) -> float:
    """Normalized dilation identity

        1/2 (|grad u|^2 - |grad phi|^2)
        + 3/2 integral (eps u^2 + 2 e w phi u^2 - e^2 phi^2 u^2)
        - (3/p) integral u^p  =  0  at solutions.
    """
    q = _integrals(u, phi, params)
    if q["up"] <= 0.0:
        raise ValueError("Pohozaev residual undefined for the zero field")
    e, w, p = params.e, params.omega, params.p
    val = (0.5 * (q["grad_u"] - q["grad_phi"])
           + 1.5 * (params.epsilon * q["u2"] + 2 * e * w * q["phi_u2"]
                    - e**2 * q["phi2_u2"])
           - 3.0 / p * q["up"])
    return abs(val) / (3.0 / p * q["up"])


def dilation_derivative(u: RadialField, phi: RadialField, params: ModelParams,
                        dl: float = 1e-3) -> float:
    """Central difference of I_eps under x -> x/lambda field rescaling.

    Independent oracle for the Pohozaev combination: the fields are re-sampled
    with cubic splines at r/lambda, no scaling algebra is reused.
    """
    def rescaled_action(lam: float) -> float:
        r = u.grid.nodes
        su = CubicSpline(r, u.values)
        sp = CubicSpline(r, phi.values)
        rin = np.minimum(r / lam, r[-1])
        ul = u.with_values(su(rin))
        pl = phi.with_values(sp(rin))
        return action_value(ul, pl, params)

    return (rescaled_action(1 + dl) - rescaled_action(1 - dl)) / (2 * dl)


def energy_and_charge(u: RadialField, phi: RadialField,
                      params: ModelParams) -> tuple[float, float]:
    """Total field energy and conserved charge of the standing wave."""
    q = _integrals(u, phi, params)
    e, w, p = params.e, params.omega, params.p
    m2 = params.m**2
    energy = 0.5 * (q["grad_u"] + q["grad_phi"] + (m2 + w**2) * q["u2"]
                    - 2 * e * w * q["phi_u2"] + e**2 * q["phi2_u2"]
                    - 2.0 / p * q["up"])
    charge = e * (e * q["phi_u2"] - w * q["u2"])
    return energy, charge


def functional_values(u: RadialField, phi: RadialField, params: ModelParams):
    """(I_value, J_paper, J_standard, gap).

    J_paper carries the coefficient e(2w - e phi) phi; J_standard the reduced
    e w phi_u coefficient.  When phi = phi_u the gauge energy identity makes
    I equal J_standard, and gap = J_paper - I - 1/2 |grad phi|^2 vanishes.
    """
    q = _integrals(u, phi, params)
    e, w, p = params.e, params.omega, params.p
    I_value = _action_from_integrals(q, params)
    J_paper = (0.5 * (q["grad_u"] + params.epsilon * q["u2"]
                      + 2 * e * w * q["phi_u2"] - e**2 * q["phi2_u2"])
               - q["up"] / p)
    J_standard = (0.5 * (q["grad_u"] + params.epsilon * q["u2"]
                         + e * w * q["phi_u2"])
                  - q["up"] / p)
    gap = J_paper - I_value - 0.5 * q["grad_phi"]
    return I_value, J_paper, J_standard, gap


def decay_fit(u: RadialField, window: tuple[float, float]):
    """Fit log(r u) against r (pure exponential) and sqrt(r) (stretched).

    Returns (exp_rate, sqrt_rate, preference); preference is the model with
    the smaller RMS residual on the window.  The 1/r prefactor of radial
    asymptotics is divided out before fitting.
    """
    r = u.grid.nodes
    lo, hi = window
    sel = (r >= lo) & (r <= hi) & (u.values > 0)
    if np.count_nonzero(sel) < 4:
        raise ValueError(f"decay window {window} holds too few usable nodes")
    rr = r[sel]
    y = np.log(rr * u.values[sel])

    def fit(x):
        coef, res = np.polyfit(x, y, 1), None
        resid = y - np.polyval(coef, x)
        return -coef[0], math.sqrt(float(np.mean(resid**2)))

    a, res_exp = fit(rr)
    b, res_sqrt = fit(np.sqrt(rr))
    return a, b, ("exp" if res_exp <= res_sqrt else "sqrt")


def default_decay_window(u: RadialField) -> tuple[float, float]:
    """Tail window where u is below 1e-3 of the peak but well above underflow."""
    r = u.grid.nodes
    peak = float(np.max(np.abs(u.values)))
    ok = (u.values > 1e-250) & (u.values < 1e-3 * peak) & (r > 0)
    idx = np.flatnonzero(ok)
    if idx.size < 4:
        raise ValueError("profile has no usable decay window")
    return float(r[idx[0]]), float(r[idx[-1]])


def coulomb_tail(phi: RadialField, window: tuple[float, float]):
    """(K_estimate, K1, K2): mean / min / max of r phi(r) over the window."""
    r = phi.grid.nodes
    lo, hi = window
    if lo < 1.0 or hi > phi.grid.r_max:
        raise ValueError(f"tail window {window} must lie in [1, r_max]")
    sel = (r >= lo) & (r <= hi)
    rphi = r[sel] * phi.values[sel]
    if rphi.size == 0:
        raise ValueError(f"tail window {window} contains no nodes")
    return float(np.mean(rphi)), float(np.min(rphi)), float(np.max(rphi))


def pohozaev_coefficients(p: float, gamma: float):
    """The four dilation-combination coefficients (A, B, C, D)."""
    A = (1 + 2 * gamma * (p - 3)) / p
    B = (p - 10 * gamma * p - 4 + 24 * gamma) / (2 * p)
    C = (p - 2) * (1 - 6 * gamma) / (2 * p)
    D = (p - 2 * p * gamma - 2 + 12 * gamma) / (2 * p)
    return A, B, C, D


def gamma_interval(p: float) -> tuple[float, float]:
    """Open gamma interval on which all four coefficients are positive (p in (3, 4])."""
    if not (3.0 < p <= 4.0):
        raise ValueError(f"the coefficient interval applies for p in (3, 4], got {p}")
    lo = (2.0 - p) / (2.0 * (6.0 - p))
    hi = (4.0 - p) / (24.0 - 10.0 * p)
    if not lo < hi:
        raise AssertionError(f"degenerate gamma interval at p = {p}")
    return lo, hi


def strauss_bound_check(u: RadialField, q: float):
    """Max over r > 1 of |u(r)| r^{(6-q)/(2q)} / (|grad u|_2 + |u|_q) in R^3."""
    if not (2.0 <= q < 6.0):
        raise ValueError(f"the radial bound needs q in [2, 6), got {q}")
    denom = math.sqrt(dirichlet_energy(u)) + lp_norm(u, q)
    if denom == 0.0:
        return 0.0
    r = u.grid.nodes
    sel = r > 1.0
    ratio = np.abs(u.values[sel]) * r[sel] ** ((6.0 - q) / (2.0 * q)) / denom
    return float(np.max(ratio))


def equation_residuals(u: RadialField, phi: RadialField,
                       params: ModelParams) -> tuple[float, float]:
    """Relative sup of the pointwise residuals of both equations on the interior.

    The Laplacian is formed as f'' + 2f'/r with the same second-order
    stencils used everywhere; the conservative form (r^2 f')'/r^2 amplifies
    round-off by 1/r^2 near the origin, this form does not.  The first and
    last few nodes are excluded.
    """
    from .radial import derivative
    e, w, p = params.e, params.omega, params.p

    def radial_laplacian(f: RadialField) -> np.ndarray:
        r = f.grid.nodes
        df = derivative(f)
        d2f = derivative(df).values
        lap = np.zeros_like(r)
        lap[1:] = d2f[1:] + 2.0 * df.values[1:] / r[1:]
        return lap

    interior = slice(2, -2)
    uv, pv = u.values, phi.values
    W = params.epsilon + e * (2 * w - e * pv) * pv
    res_u = -radial_laplacian(u) + W * uv - np.abs(uv)**(p - 1) * np.sign(uv)
    scale_u = float(np.max(np.abs(uv)**(p - 1)))
    matter = float(np.max(np.abs(res_u[interior]))) / max(scale_u, 1e-300)

    res_phi = -radial_laplacian(phi) - e * (w - e * pv) * uv**2
    scale_phi = float(np.max(np.abs(e * w * uv**2)))
    gauge = float(np.max(np.abs(res_phi[interior]))) / max(scale_phi, 1e-300)
    return matter, gauge


def diagnose(u: RadialField, phi: RadialField, params: ModelParams) -> DiagnosticsReport:
    """Full report for a computed pair; used by every converged record."""
    energy, charge = energy_and_charge(u, phi, params)
    I_value, J_paper, J_standard, gap = functional_values(u, phi, params)
    try:
        a, b, pref = decay_fit(u, default_decay_window(u))
    except ValueError:
        a, b, pref = math.nan, math.nan, "none"
    r_max = u.grid.r_max
    K, K1, K2 = coulomb_tail(phi, (r_max / 4.0, r_max))
    matter, gauge = equation_residuals(u, phi, params)
    return DiagnosticsReport(
        nehari_residual=nehari_residual(u, phi, params),
        pohozaev_residual=pohozaev_residual(u, phi, params),
        energy=energy,
        charge=charge,
        I_value=I_value,
        J_paper_value=J_paper,
        J_standard_value=J_standard,
        functional_gap=gap,
        decay_exp_rate=a,
        decay_sqrt_rate=b,
        decay_fit_preference=pref,
        tail_constant=phi_tail_constant(phi),
        tail_envelope=(K1, K2),
        l2_norm=lp_norm(u, 2),
        lp_norm=lp_norm(u, params.p),
        grad_norm=math.sqrt(dirichlet_energy(u)),
        phi_grad_norm=math.sqrt(
            dirichlet_energy(phi)
            + 4.0 * math.pi * phi.grid.r_max * phi.values[-1] ** 2),
        phi_u2=integrate3d(u.with_values(phi.values * u.values**2)),
        matter_residual=matter,
        gauge_residual=gauge,
    )
