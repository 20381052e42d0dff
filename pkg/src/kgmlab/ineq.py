"""Numerical stress-testing of the weighted-norm inequalities.

Each check evaluates the two sides of a printed inequality by quadrature over
families of seeded radial test functions and reports the ratio statistics.
Empirical sup constants are reported, never asserted as sharp; only the
constants that are explicitly derivable (the 2/(e w) factor of the
min-kernel bound, the 1/2 factor of the M/N implication) are checked as
bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import NotInClassError
from .poisson import solve_phi, threshold_c1
from .radial import (ModelParams, RadialField, RadialGrid, dirichlet_energy,
                     integrate3d, lp_norm, weighted_l2)

FAMILY_KINDS = ("gaussian-mixture", "truncated-power-tail", "dyadic-comb",
                "random-spline")


@dataclass(frozen=True)
class TestFunctionFamily:
    """Seeded generator of radial test profiles with finite Dirichlet energy.

    Members are smooth, vanish beyond 0.9 r_max (so tail quadrature stays
    honest) and are reproducible byte-for-byte from the seed.
    """

    kind: str
    seed: int
    count: int
    beta: float = 1.2       # tail exponent of truncated-power-tail members
    depth: int = 6          # number of dyadic blocks of comb members

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.count < 1:
            raise ValueError("count must be positive")
        if self.kind == "truncated-power-tail" and self.beta <= 0.5:
            raise ValueError("power tail needs beta > 1/2 for finite energy")

    def callables(self, r_cut: float):
        """Analytic member profiles; sampling happens at the caller's grid."""
        rng = np.random.default_rng(self.seed)
        members = []
        for _ in range(self.count):
            if self.kind == "gaussian-mixture":
                k = int(rng.integers(1, 5))
                amps = rng.uniform(0.2, 2.0, k)
                centers = rng.uniform(0.0, min(20.0, 0.5 * r_cut), k)
                widths = rng.uniform(0.4, 5.0, k)
                members.append(_taper(_gaussians(amps, centers, widths), r_cut))
            elif self.kind == "truncated-power-tail":
                amp = float(rng.uniform(0.5, 2.0))
                beta = self.beta
                members.append(_taper(lambda r, a=amp, b=beta:
                                      a / (1.0 + r) ** b, r_cut))
            elif self.kind == "dyadic-comb":
                amps = rng.uniform(0.5, 1.0, self.depth) * \
                    2.0 ** (-0.5 * np.arange(1, self.depth + 1))
                centers = 2.0 ** np.arange(1, self.depth + 1)
                widths = centers / 8.0
                members.append(_taper(_gaussians(amps, centers, widths), r_cut))
            else:  # random-spline
                knots = np.sort(rng.uniform(0.0, min(30.0, 0.8 * r_cut), 8))
                knots = np.concatenate(([0.0], knots, [r_cut, 1.05 * r_cut]))
                vals = np.concatenate((rng.uniform(0.0, 1.5, knots.size - 2),
                                       [0.0, 0.0]))
                spline = CubicSpline(knots, vals)
                members.append(_taper(
                    lambda r, s=spline, rc=r_cut:
                    np.where(r <= rc, s(np.minimum(r, rc)), 0.0), r_cut))
        return members

    def sample(self, grid: RadialGrid, dilation: float = 1.0,
               support: float | None = None):
        """Fields u_t(r) = t^2 u(t r) for every member, sampled on ``grid``.

        ``support`` fixes the analytic cutoff radius so that the same members
        can be re-sampled at several dilations; it defaults to 0.9 r_max and
        must satisfy support <= 0.9 r_max * dilation to keep the dilated
        member inside the grid.
        """
        t = float(dilation)
        if support is None:
            support = 0.9 * grid.r_max
        if support > 0.9 * grid.r_max * t + 1e-12:
            raise ValueError(f"support {support} leaves the grid at dilation {t}")
        out = []
        for f in self.callables(support):
            out.append(RadialField(grid, t * t * np.asarray(f(t * grid.nodes))))
        return out


def _gaussians(amps, centers, widths):
    def f(r):
        r = np.asarray(r, dtype=float)
        acc = np.zeros_like(r)
        for a, c, s in zip(amps, centers, widths):
            acc += a * np.exp(-((r - c) / s) ** 2)
        return acc
    return f


def _taper(f, r_cut: float):
    """Smooth cos^2 cutoff bringing profiles to zero at r_cut."""
    r0 = 8.0 / 9.0 * r_cut   # ramp over the last ninth

    def g(r):
        r = np.asarray(r, dtype=float)
        ramp = np.clip((r - r0) / (r_cut - r0), 0.0, 1.0)
        # cos(pi/2) is only zero to round-off; clamp past the cutoff
        return np.where(r < r_cut, f(r) * np.cos(0.5 * math.pi * ramp) ** 2,
                        0.0)
    return g


@dataclass(frozen=True)
class RatioReport:
    """Per-member LHS/RHS of one inequality plus summary statistics."""

    label: str
    lhs: tuple[float, ...]
    rhs: tuple[float, ...]
    ratio: tuple[float, ...]
    empirical_sup_constant: float
    trend_slope: float = math.nan

    @classmethod
    def build(cls, label, lhs, rhs, scale=None):
        lhs = [float(x) for x in lhs]
        rhs = [float(x) for x in rhs]
        ratio = [l / r if r > 0 else 0.0 for l, r in zip(lhs, rhs)]
        if any(not math.isfinite(x) or x < 0 for x in ratio):
            raise AssertionError(f"{label}: non-finite or negative ratio")
        sup = max(ratio) if ratio else 0.0
        slope = math.nan
        if scale is not None and len(ratio) > 1:
            slope = float(np.polyfit(np.asarray(scale, float), ratio, 1)[0])
        return cls(label, tuple(lhs), tuple(rhs), tuple(ratio), sup, slope)


def _cum_line_integral(vals: np.ndarray, r: np.ndarray) -> np.ndarray:
    out = np.zeros_like(vals)
    out[1:] = np.cumsum(0.5 * (vals[1:] + vals[:-1]) * np.diff(r))
    return out


def dyadic_check(h: RadialField, alpha: float, R: float) -> RatioReport:
    """Dyadic-block inequality:

        (integral_{3R}^inf h)^2
            <= C_a integral_R^inf (1+log r)^a h(r)
                     integral_{r/2}^{2r} (1+log s)^a h(s) ds dr.
    """
    if alpha <= 0.5:
        raise ValueError(f"needs alpha > 1/2, got {alpha}")
    if R <= 1.0:
        raise ValueError(f"needs R > 1, got {R}")
    r = h.grid.nodes
    hv = np.clip(h.values, 0.0, None)
    cum_h = _cum_line_integral(hv, r)
    lhs = (cum_h[-1] - np.interp(3 * R, r, cum_h)) ** 2

    # the strip s in [r/2, 2r] with r > R > 1 never looks below s = 1/2,
    # where 1 + log s is still positive
    g = np.zeros_like(r)
    sel = r >= 0.5
    g[sel] = (1 + np.log(r[sel])) ** alpha * hv[sel]
    cum_g = _cum_line_integral(g, r)
    inner = np.interp(np.minimum(2 * r, r[-1]), r, cum_g) - \
        np.interp(r / 2, r, cum_g)
    integrand = np.where(r >= R, g * inner, 0.0)
    rhs = float(np.dot(h.grid.weights, integrand))
    return RatioReport.build("dyadic-block", [lhs], [rhs])


def min_kernel_double_integral(u: RadialField, R0: float) -> float:
    """integral_{R0}^inf integral_{R0}^inf u^2(r) r u^2(s) s min(r,s) ds dr.

    Evaluated O(N) by splitting the min(r, s) kernel: with f(r) = u^2(r) r,
    the inner integral is integral_{R0}^r s f(s) ds + r integral_r^inf f(s) ds,
    accumulated with trapezoid cumulatives.
    """
    if R0 < 1.0:
        raise ValueError(f"needs R0 >= 1, got {R0}")
    r = u.grid.nodes
    f = np.where(r >= R0, u.values**2 * r, 0.0)
    cum_sf = _cum_line_integral(f * r, r)       # integral s f(s) ds
    cum_f = _cum_line_integral(f, r)            # integral f(s) ds
    total_f = cum_f[-1]
    # min(r,s) = s for s < r, r for s >= r
    inner = cum_sf + r * (total_f - cum_f)
    return float(np.dot(u.grid.weights, f * inner))


def lemma_due_check(u: RadialField, params: ModelParams) -> RatioReport:
    """Min-kernel double integral against integral phi_u u^2 dx.

    The threshold is max(1, C1 |grad phi_u|_2^2) with C1 = e^2/(pi w^2); the
    derivable constant 2/(e w) bounds the ratio.
    """
    rep = solve_phi(u, params)
    R0 = max(1.0, threshold_c1(params) * rep.gradient_norm**2)
    lhs = min_kernel_double_integral(u, R0)
    rhs = integrate3d(u.with_values(rep.phi.values * u.values**2))
    return RatioReport.build("min-kernel vs phi_u u^2", [lhs], [rhs])


def weight_lemma_check(u: RadialField, alpha: float, R0: float) -> RatioReport:
    """Log-weighted line integral against the bracketed square root:

        integral u^2 r^{3/2} (1+|log r|)^{-a} dr
            <= C [ (integral |grad u|^2 dx)^2 + D(R0) ]^{1/2}.
    """
    if alpha <= 0.5:
        raise ValueError(f"needs alpha > 1/2, got {alpha}")
    if R0 <= 1.0:
        raise ValueError(f"needs R0 > 1, got {R0}")
    r = u.grid.nodes
    vals = np.zeros_like(r)
    rp = r[1:]
    vals[1:] = u.values[1:]**2 * rp**1.5 / (1 + np.abs(np.log(rp)))**alpha
    lhs = float(np.dot(u.grid.weights, vals))
    rhs = math.sqrt(dirichlet_energy(u)**2
                    + min_kernel_double_integral(u, R0))
    return RatioReport.build("log-weight lemma", [lhs], [rhs])


DEFAULT_PARAMS = ModelParams(e=1.0, omega=1.0, p=4.0, epsilon=0.0)


def prop_est_check(u: RadialField, alpha: float, M: float,
                   params: ModelParams = DEFAULT_PARAMS) -> RatioReport:
    """Weighted L2 mass against ((|grad u|^2)^2 + integral phi_u u^2)^{1/2}.

    Requires membership |grad phi_u|_2 <= M; a miss raises NotInClassError
    (hypothesis failure, not a bug).
    """
    rep = solve_phi(u, params)
    if rep.gradient_norm > M:
        raise NotInClassError(
            f"|grad phi_u| = {rep.gradient_norm:.3g} exceeds M = {M}")
    lhs = weighted_l2(u, alpha)
    rhs = math.sqrt(dirichlet_energy(u)**2
                    + integrate3d(u.with_values(rep.phi.values * u.values**2)))
    return RatioReport.build("weighted-L2 estimate", [lhs], [rhs])


def MN_functionals(u: RadialField, R0: float) -> tuple[float, float]:
    """(M[u], N[u]) of the scaling argument: M uses the double integral, N its root."""
    if R0 <= 1.0:
        raise ValueError(f"needs R0 > 1, got {R0}")
    grad = dirichlet_energy(u)
    dbl = min_kernel_double_integral(u, R0)
    return grad + dbl, math.sqrt(grad + math.sqrt(dbl))


def lp_embedding_check(u: RadialField, q: float, R0: float) -> RatioReport:
    """L^q norm against N[u], the square-root embedding bound."""
    if not (18.0 / 7.0 < q <= 6.0):
        raise ValueError(f"needs q in (18/7, 6], got {q}")
    _, N_val = MN_functionals(u, R0)
    return RatioReport.build(f"L^{q} embedding", [lp_norm(u, q)], [N_val])


def lp_upper_bound_check(u: RadialField, p: float, R0: float) -> RatioReport:
    """integral |u|^p against (M[u])^{(2p-3)/3}, the uniform power bound."""
    if not (3.0 < p < 6.0):
        raise ValueError(f"needs p in (3, 6), got {p}")
    M_val, _ = MN_functionals(u, R0)
    lhs = integrate3d(u.with_values(np.abs(u.values)**p))
    return RatioReport.build("L^p power bound", [lhs],
                             [M_val ** ((2 * p - 3) / 3.0)])


def family_report(op, fields, label: str, scale=None) -> RatioReport:
    """Aggregate a single-member check over a family of fields."""
    lhs, rhs = [], []
    for f in fields:
        rep = op(f)
        lhs.extend(rep.lhs)
        rhs.extend(rep.rhs)
    return RatioReport.build(label, lhs, rhs, scale=scale)
