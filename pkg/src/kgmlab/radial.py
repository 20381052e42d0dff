"""Radial grids, sampled fields, derivatives and the quadratures used everywhere.

All volume integrals are over R^3 restricted to radial integrands,
    integral f dx = 4 pi * integral_0^Rmax f(r) r^2 dr,
evaluated by trapezoid weights on a (possibly nonuniform) node set.  The
default grid stretches geometrically so that both the origin and the Coulomb
tail near Rmax are resolved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_R_MAX = 200.0
DEFAULT_N = 4000
DEFAULT_RATIO = 1.002


@dataclass(frozen=True)
class RadialGrid:
    """Strictly increasing nodes r_0 = 0 < ... < r_N = r_max with trapezoid weights.

    ``weights`` integrate exactly any function that is linear between nodes:
    w_0 = h_0/2, w_i = (h_{i-1}+h_i)/2, w_N = h_{N-1}/2, so sum(w) = r_max.
    """

    nodes: np.ndarray
    scheme: str
    ratio: float | None = None
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 17:
            raise ValueError("grid needs at least 17 nodes (N >= 16)")
        if nodes[0] != 0.0 or np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must start at 0 and increase strictly")
        object.__setattr__(self, "nodes", nodes)
        h = np.diff(nodes)
        w = np.empty_like(nodes)
        w[0] = h[0] / 2
        w[-1] = h[-1] / 2
        w[1:-1] = (h[:-1] + h[1:]) / 2
        w.setflags(write=False)
        nodes.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.nodes.size - 1

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.nodes)

    def refine(self) -> "RadialGrid":
        """Grid with twice the intervals and the same node distribution."""
        if self.scheme == "uniform":
            return make_grid(self.r_max, 2 * self.n, "uniform")
        return make_grid(self.r_max, 2 * self.n, "geometric",
                         ratio=math.sqrt(self.ratio))

    def window(self, r_lo: float, r_hi: float) -> np.ndarray:
        """Boolean mask of nodes with r_lo <= r <= r_hi."""
        return (self.nodes >= r_lo) & (self.nodes <= r_hi)

    def __eq__(self, other):
        return (isinstance(other, RadialGrid)
                and self.scheme == other.scheme
                and self.nodes.shape == other.nodes.shape
                and bool(np.all(self.nodes == other.nodes)))

    def __hash__(self):
        return hash((self.scheme, self.n, self.r_max))


def make_grid(r_max: float, n: int, scheme: str = "geometric",
              ratio: float = DEFAULT_RATIO) -> RadialGrid:
    """Build a grid on [0, r_max] with n intervals.

    ``scheme`` is "uniform" or "geometric"; the geometric scheme uses gap
    ratio ``ratio`` > 1 so nodes cluster near the origin.
    """
    if not (r_max > 0):
        raise ValueError(f"r_max must be positive, got {r_max}")
    if n < 16:
        raise ValueError(f"need n >= 16 intervals, got {n}")
    if scheme == "uniform":
        nodes = np.linspace(0.0, r_max, n + 1)
        return RadialGrid(nodes, "uniform")
    if scheme == "geometric":
        if not (ratio > 1.0):
            raise ValueError(f"geometric stretch needs ratio > 1, got {ratio}")
        # gaps d0 * ratio**i summing to r_max
        i = np.arange(n + 1, dtype=float)
        nodes = r_max * np.expm1(i * math.log(ratio)) / math.expm1(n * math.log(ratio))
        nodes[0] = 0.0
        nodes[-1] = r_max
        return RadialGrid(nodes, "geometric", ratio=ratio)
    raise ValueError(f"unknown grid scheme {scheme!r}")


def default_grid() -> RadialGrid:
    return make_grid(DEFAULT_R_MAX, DEFAULT_N, "geometric", DEFAULT_RATIO)


@dataclass(frozen=True)
class RadialField:
    """A real radial profile sampled on a grid."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.nodes.shape:
            raise ValueError("field length does not match its grid")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, grid: RadialGrid, f) -> "RadialField":
        return cls(grid, np.asarray(f(grid.nodes), dtype=float))

    @classmethod
    def zero(cls, grid: RadialGrid) -> "RadialField":
        return cls(grid, np.zeros_like(grid.nodes))

    def with_values(self, values: np.ndarray) -> "RadialField":
        return RadialField(self.grid, values)

    def __eq__(self, other):
        return (isinstance(other, RadialField) and self.grid == other.grid
                and bool(np.all(self.values == other.values)))

    def __hash__(self):
        return hash((self.grid, self.values.tobytes()))


@dataclass(frozen=True)
class ModelParams:
    """Physical and continuation parameters of the coupled system.

    ``epsilon = m**2 - omega**2`` is the perturbation shift; the limit case
    m = omega corresponds to epsilon = 0.  Supply either ``epsilon`` or ``m``;
    the other is derived.
    """

    e: float
    omega: float
    p: float
    epsilon: float | None = None
    m: float | None = None

    def __post_init__(self):
        # e = 0 is the decoupled limit (phi vanishes identically); useful
        # as an oracle configuration, so it is allowed.
        if not (self.e >= 0):
            raise ValueError(f"coupling e must be nonnegative, got {self.e}")
        if not (self.omega > 0):
            raise ValueError(f"phase omega must be positive, got {self.omega}")
        if not (1.0 < self.p < 6.0):
            raise ValueError(f"exponent p must lie in (1, 6), got {self.p}")
        if self.epsilon is None and self.m is None:
            raise ValueError("supply epsilon or m")
        if self.m is not None:
            eps = self.m**2 - self.omega**2
            if eps < -1e-15 * self.omega**2:
                raise ValueError(f"m = {self.m} < omega gives epsilon < 0")
            eps = max(eps, 0.0)
            if self.epsilon is not None and not math.isclose(
                    self.epsilon, eps, rel_tol=1e-12, abs_tol=1e-14):
                raise ValueError("epsilon and m are inconsistent")
            object.__setattr__(self, "epsilon", eps)
        else:
            if self.epsilon < 0:
                raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
            object.__setattr__(self, "m", math.sqrt(self.omega**2 + self.epsilon))

    def with_epsilon(self, epsilon: float) -> "ModelParams":
        return ModelParams(e=self.e, omega=self.omega, p=self.p, epsilon=epsilon)


def derivative(f: RadialField) -> RadialField:
    """Second-order d/dr on the (possibly nonuniform) grid.

    Radial regularity imposes f'(0) = 0; the outer end uses a one-sided
    three-point stencil.
    """
    r = f.grid.nodes
    u = f.values
    d = np.empty_like(u)
    hm = r[1:-1] - r[:-2]
    hp = r[2:] - r[1:-1]
    d[1:-1] = (-hp / (hm * (hm + hp)) * u[:-2]
               + (hp - hm) / (hm * hp) * u[1:-1]
               + hm / (hp * (hm + hp)) * u[2:])
    d[0] = 0.0
    h1 = r[-1] - r[-2]
    h2 = r[-2] - r[-3]
    d[-1] = (u[-3] * h1 / (h2 * (h1 + h2))
             - u[-2] * (h1 + h2) / (h1 * h2)
             + u[-1] * (2 * h1 + h2) / (h1 * (h1 + h2)))
    return f.with_values(d)


def integrate3d(f: RadialField) -> float:
    """4 pi * integral f(r) r^2 dr by trapezoid on the grid."""
    g = f.grid
    return 4.0 * math.pi * float(np.dot(g.weights, f.values * g.nodes**2))


def integrate_radial(values: np.ndarray, grid: RadialGrid) -> float:
    """Plain one-dimensional integral_0^Rmax v(r) dr."""
    return float(np.dot(grid.weights, values))


def dirichlet_energy(u: RadialField) -> float:
    """integral |grad u|^2 dx, the squared D^{1,2} seminorm."""
    du = derivative(u)
    return integrate3d(du.with_values(du.values**2))


def lp_norm(u: RadialField, q: float) -> float:
    """L^q(R^3) norm of a radial field."""
    if q < 1:
        raise ValueError(f"L^q norm needs q >= 1, got {q}")
    return integrate3d(u.with_values(np.abs(u.values)**q)) ** (1.0 / q)


def weighted_l2(u: RadialField, alpha: float) -> float:
    """integral u^2 / (sqrt(r) (1 + |log r|)^alpha) dx.

    The r = 0 node contributes nothing: the integrand times the r^2 Jacobian
    vanishes there, so no regularization of |log r| is needed.
    """
    if alpha <= 0.5:
        raise ValueError(f"weight exponent alpha must exceed 1/2, got {alpha}")
    r = u.grid.nodes
    w = np.zeros_like(r)
    rpos = r[1:]
    w[1:] = u.values[1:]**2 / (np.sqrt(rpos) * (1 + np.abs(np.log(rpos)))**alpha)
    return integrate3d(u.with_values(w))
