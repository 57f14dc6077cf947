"""Statistics bounded by the regularity theorems, evaluated on discrete fields.

Essential sup/inf are exact discrete max/min over the cells of a region. Power
means are computed in the log domain, so large exponents and small values
neither overflow nor underflow. Energy-type ratios reuse the scheme's own
gradient (faces for fv_tpfa, simplices for fem_p1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import logsumexp

from .grid import BallGrid, CutoffSpec, DiscreteField, Region, full_region, make_cutoff, subball
from .kernels import moser_exponents
from .solver import DiscreteOperator, gradient

HOLDER_MAX_CELLS = 10_000
EPS_SCALE = 1e-8


def _split(u, region: Region | None) -> tuple[np.ndarray, Region]:
    if not isinstance(u, DiscreteField):
        raise TypeError("expected a DiscreteField")
    region = full_region(u.grid) if region is None else region
    if region.grid is not u.grid:
        raise ValueError("region and field live on different grids")
    if region.size == 0:
        raise ValueError("region is empty")
    return u.values[region.cells], region


def default_eps(u: DiscreteField) -> float:
    """Scale-aware regularisation used wherever u appears in a log or negative power."""
    return EPS_SCALE * (float(np.max(np.abs(u.values))) + 1.0)


@dataclass(frozen=True)
class RangeStats:
    sup: float
    inf: float

    @property
    def osc(self) -> float:
        return self.sup - self.inf


def range_stats(u: DiscreteField, region: Region | None = None) -> RangeStats:
    vals, _ = _split(u, region)
    return RangeStats(float(vals.max()), float(vals.min()))


def _log_power_mean(vals: np.ndarray, p: float) -> float:
    """log of (mean vals**p)**(1/p) for vals >= 0."""
    with np.errstate(divide="ignore"):
        logs = np.log(vals)
    return float((logsumexp(p * logs) - math.log(vals.size)) / p)


def lp_mean(u: DiscreteField, region: Region | None = None, p: float = 2.0, eps: float = 0.0) -> float:
    """Normalised power mean ``(avg (|u| + eps)**p)**(1/p)`` over the region."""
    if p == 0:
        raise ValueError("p = 0 is not a power mean")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    vals, _ = _split(u, region)
    vals = np.abs(vals) + eps
    if p < 0 and vals.min() <= 0:
        raise ValueError("negative moments need positive values; pass eps > 0")
    return math.exp(_log_power_mean(vals, p))


def _holder_cells(region: Region) -> np.ndarray:
    cells = region.cells
    if cells.size > HOLDER_MAX_CELLS:
        stride = -(-cells.size // HOLDER_MAX_CELLS)
        cells = cells[::stride]
    return cells


def holder_seminorm(u: DiscreteField, region: Region | None = None, alpha: float = 1.0, chunk: int = 512) -> float:
    """max |u(x)-u(y)| / |x-y|**alpha over distinct pairs of cell centres.

    Regions above 10**4 cells are subsampled with stride ceil(size / 10**4) over
    the sorted cell list, which keeps the result deterministic.
    """
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    _, region = _split(u, region)
    if region.size < 2:
        raise ValueError("Hölder seminorm needs at least two cells")
    cells = _holder_cells(region)
    pts = u.grid.centers[cells]
    vals = u.values[cells]
    best = 0.0
    for start in range(0, cells.size - 1, chunk):
        stop = min(start + chunk, cells.size)
        # only pairs (i, j) with j > i
        dist = cdist(pts[start:stop], pts[start + 1 :])
        diff = np.abs(vals[start:stop, None] - vals[None, start + 1 :])
        rows = np.arange(stop - start)[:, None]
        cols = np.arange(cells.size - start - 1)[None, :]
        upper = cols >= rows
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(upper, diff / dist**alpha, 0.0)
        best = max(best, float(q.max()))
    return best


@dataclass(frozen=True)
class BmoReport:
    norm: float
    family: list[tuple[tuple[float, ...], float]]
    argmax: int
    oscillations: np.ndarray


def dyadic_family(grid: BallGrid, center, r: float, levels: int) -> list[tuple[np.ndarray, float]]:
    """Balls of radius r 2**-l on lattices of the same spacing, contained in B(center, r)."""
    center = np.asarray(center, dtype=float)
    family = []
    for level in range(levels + 1):
        rho = r * 2.0**-level
        m = 2**level
        ks = np.stack(np.meshgrid(*[np.arange(-m, m + 1)] * grid.dim, indexing="ij"), -1)
        ks = ks.reshape(-1, grid.dim)
        offsets = ks * rho
        keep = np.linalg.norm(offsets, axis=1) + rho <= r * (1 + 1e-12)
        for off in offsets[keep]:
            family.append((center + off, rho))
    return family


def bmo_norm(v: DiscreteField, ball: Region, levels: int = 3) -> BmoReport:
    """Dyadic-surrogate BMO norm: max mean oscillation over the dyadic family in ``ball``."""
    if ball.center is None or ball.radius is None:
        raise ValueError("bmo_norm needs a subball region with centre and radius")
    if levels < 0:
        raise ValueError("levels must be nonnegative")
    family, oscs = [], []
    for c, rho in dyadic_family(v.grid, ball.center, ball.radius, levels):
        cells = v.grid.ball_cells(c, rho)
        if cells.size == 0:
            continue
        vals = v.values[cells]
        family.append((tuple(float(x) for x in c), float(rho)))
        oscs.append(float(np.mean(np.abs(vals - vals.mean()))))
    oscs = np.array(oscs)
    k = int(np.argmax(oscs))
    return BmoReport(float(oscs[k]), family, k, oscs)


@dataclass(frozen=True)
class EnergyRatio:
    lhs: float
    rhs: float

    @property
    def applicable(self) -> bool:
        return self.rhs > 0

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else math.nan


def _ellipticity(a):
    return a.ellipticity


def _cutoff_field(grid: BallGrid, cutoff) -> DiscreteField:
    if isinstance(cutoff, DiscreteField):
        return cutoff
    if isinstance(cutoff, CutoffSpec):
        return make_cutoff(grid, cutoff)
    raise TypeError("cutoff must be a CutoffSpec or a DiscreteField")


def _scheme_of(a, scheme: str | None) -> str:
    if scheme is not None:
        return scheme
    return a.scheme if isinstance(a, DiscreteOperator) else "fv_tpfa"


def caccioppoli_ratio(a, u: DiscreteField, k: float, cutoff, scheme: str | None = None) -> EnergyRatio:
    """∫η²|∇(u-k)₊|² against (4Λ/λ)∫|∇η|²(u-k)₊².

    The gradient of the truncation is ∇u times the indicator of {u > k}, taken
    upwind on each face/simplex (the indicator is on if any endpoint exceeds k).
    """
    scheme = _scheme_of(a, scheme)
    grid = u.grid
    eta = _cutoff_field(grid, cutoff).values
    gu = gradient(grid, u, scheme)
    ge = gradient(grid, eta, scheme)
    w = np.maximum(u.values - k, 0.0)
    sup = gu.support
    on = u.values[sup].max(axis=1) > k
    eta2 = np.mean(eta[sup] ** 2, axis=1)
    w2 = np.mean(w[sup] ** 2, axis=1)
    lhs = np.sum(gu.weights * on * eta2 * np.sum(gu.values**2, axis=1))
    pair = _ellipticity(a)
    rhs = 4.0 * pair.ratio * np.sum(ge.weights * w2 * np.sum(ge.values**2, axis=1))
    return EnergyRatio(float(lhs), float(rhs))


def log_caccioppoli_ratio(a, u: DiscreteField, cutoff, eps: float | None = None, scheme: str | None = None) -> EnergyRatio:
    """∫φ²|∇u|²/(u+ε)² against (4Λ/λ)∫|∇φ|², u+ε taken as the face/simplex mean."""
    scheme = _scheme_of(a, scheme)
    grid = u.grid
    eps = default_eps(u) if eps is None else float(eps)
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    phi = _cutoff_field(grid, cutoff).values
    gu = gradient(grid, u, scheme)
    gp = gradient(grid, phi, scheme)
    sup = gu.support
    touched = np.unique(sup[np.any(phi[sup] > 0, axis=1)])
    if touched.size and (u.values[touched] + eps).min() <= 0:
        raise ValueError("u + eps must be positive on the cutoff support; raise eps")
    ubar = np.mean(u.values[sup], axis=1) + eps
    phi2 = np.mean(phi[sup] ** 2, axis=1)
    active = phi2 > 0
    lhs = np.sum(gu.weights[active] * phi2[active] * np.sum(gu.values[active] ** 2, axis=1) / ubar[active] ** 2)
    rhs = 4.0 * _ellipticity(a).ratio * np.sum(gp.weights * np.sum(gp.values**2, axis=1))
    return EnergyRatio(float(lhs), float(rhs))


@dataclass(frozen=True)
class CrossoverStat:
    c: float
    eps: float
    positive_mean: float
    negative_mean: float

    @property
    def product(self) -> float:
        return self.positive_mean * self.negative_mean


def crossover_product(u: DiscreteField, region: Region | None, c: float, eps: float = 0.0) -> CrossoverStat:
    """(avg (u+ε)^c)·(avg (u+ε)^-c) over the region."""
    if not c > 0:
        raise ValueError("crossover exponent must be positive")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    vals, _ = _split(u, region)
    vals = np.abs(vals) + eps
    if vals.min() <= 0:
        raise ValueError("crossover needs positive values; pass eps > 0")
    logs = np.log(vals)
    lognorm = math.log(vals.size)
    plus = math.exp(logsumexp(c * logs) - lognorm)
    minus = math.exp(logsumexp(-c * logs) - lognorm)
    return CrossoverStat(float(c), float(eps), plus, minus)


def jn_tail_profile(v: DiscreteField, ball: Region | None, thresholds) -> list[tuple[float, float]]:
    """Volume fraction of cells with |v - avg v| > t for each threshold t."""
    t = np.asarray(thresholds, dtype=float).reshape(-1)
    if t.size and (np.any(t <= 0) or np.any(np.diff(t) <= 0)):
        raise ValueError("thresholds must be positive and strictly increasing")
    vals, _ = _split(v, ball)
    dev = np.sort(np.abs(vals - vals.mean()))
    above = dev.size - np.searchsorted(dev, t, side="right")
    return [(float(ti), float(a) / dev.size) for ti, a in zip(t, above)]


@dataclass(frozen=True)
class DeGiorgiSchedule:
    """Radii r_m = 1/2 + 2**(-m-1) and levels k_m = k (1 - 2**-m), m = 0..N-1."""

    k: float
    N: int

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("schedule needs at least one entry")

    @property
    def radii(self) -> np.ndarray:
        m = np.arange(self.N)
        return 0.5 + 2.0 ** (-m - 1)

    @property
    def levels(self) -> np.ndarray:
        m = np.arange(self.N)
        return self.k * (1.0 - 2.0 ** (-m))


def degiorgi_sequence(u: DiscreteField, schedule: DeGiorgiSchedule, radii=None, levels=None) -> np.ndarray:
    """Truncation energies Y_m = ∫_{B_{r_m}} (u - k_m)₊² (custom radii/levels optional)."""
    radii = schedule.radii if radii is None else np.asarray(radii, dtype=float)
    levels = schedule.levels if levels is None else np.asarray(levels, dtype=float)
    if radii.shape != levels.shape:
        raise ValueError("radii and levels must have the same length")
    grid = u.grid
    origin = np.zeros(grid.dim)
    out = np.empty(radii.size)
    for m, (r, k) in enumerate(zip(radii, levels)):
        cells = grid.ball_cells(origin, r * grid.R)
        out[m] = np.sum(np.maximum(u.values[cells] - k, 0.0) ** 2) * grid.weight
    return out


def moser_ladder_norms(u: DiscreteField, p0: float, steps: int, radii) -> list[tuple[float, float]]:
    """Normalised L^{p_m} means of u₊ on B_{radii[m]} along the Sobolev exponent ladder."""
    d = u.grid.dim
    if d < 3:
        raise ValueError("the Moser ladder needs d >= 3")
    if not p0 > 1:
        raise ValueError("p0 must exceed 1")
    radii = np.asarray(radii, dtype=float).reshape(-1)
    if radii.size != steps + 1:
        raise ValueError(f"need {steps + 1} radii, got {radii.size}")
    if np.any(np.diff(radii) >= 0):
        raise ValueError("radii must be strictly decreasing")
    plus = u.with_values(np.maximum(u.values, 0.0))
    out = []
    for p, r in zip(moser_exponents(d, p0, steps), radii):
        region = subball(u.grid, np.zeros(d), r)
        out.append((float(p), lp_mean(plus, region, p, 0.0)))
    return out


def harnack_ratio(u: DiscreteField, region: Region | None = None) -> float:
    s = range_stats(u, region)
    if s.inf <= 0:
        raise ValueError("Harnack ratio needs a positive infimum")
    return s.sup / s.inf


def weak_harnack_exponent(q: float, d: int) -> float:
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    if d < 3:
        raise ValueError("weak Harnack exponent needs d >= 3")
    return q * d / (d - 2)


def weak_harnack_stat(u: DiscreteField, q: float, radius: float = 0.25) -> float:
    """L^{q*} mean of u over B_{1/4} divided by its infimum there, q* = qd/(d-2)."""
    qs = weak_harnack_exponent(q, u.grid.dim)
    region = subball(u.grid, np.zeros(u.grid.dim), radius * u.grid.R)
    s = range_stats(u, region)
    if s.inf <= 0:
        raise ValueError("weak Harnack statistic needs positive u")
    return lp_mean(u, region, qs, 0.0) / s.inf
