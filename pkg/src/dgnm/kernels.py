"""Grid-free kernels: recurrence closeout, exponent ladders, chain covers and
conversion of oscillation decay into Hölder exponents.

The recurrence ``Y_{n+1} = C B**n Y_n**(1+alpha)`` is iterated in the log domain
so that overflow is detected instead of silently producing ``inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

CONVERGED_FRACTION = 1e-12
LOG_OVERFLOW = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class RecurrenceParams:
    C_rec: float
    B: float
    alpha: float
    Y0: float = 0.0

    def __post_init__(self):
        if not self.C_rec > 0:
            raise ValueError(f"C_rec must be positive, got {self.C_rec}")
        if not self.B >= 1:
            raise ValueError(f"B must be at least 1, got {self.B}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.Y0 >= 0:
            raise ValueError(f"Y0 must be nonnegative, got {self.Y0}")


@dataclass(frozen=True)
class Trajectory:
    values: np.ndarray
    converged: bool
    overflow_index: int | None = None
    log_values: np.ndarray = field(default=None, repr=False)

    @property
    def diverged(self) -> bool:
        return self.overflow_index is not None or not self.converged


def degiorgi_threshold(p: RecurrenceParams) -> float:
    """Initial energy below which ``Y_n <= Y0 * B**(-n/alpha)`` for all n."""
    return p.C_rec ** (-1.0 / p.alpha) * p.B ** (-1.0 / p.alpha**2)


def degiorgi_iterate(p: RecurrenceParams, N: int) -> Trajectory:
    """Iterate the equality recurrence N times starting from ``p.Y0``."""
    if N < 1:
        raise ValueError("need at least one step")
    logs = np.full(N + 1, -np.inf)
    if p.Y0 == 0:
        return Trajectory(np.zeros(N + 1), True, None, logs)
    logC, logB = math.log(p.C_rec), math.log(p.B)
    logs[0] = math.log(p.Y0)
    overflow = None
    for n in range(N):
        nxt = logC + n * logB + (1.0 + p.alpha) * logs[n]
        if nxt > LOG_OVERFLOW:
            overflow = n + 1
            logs[n + 1 :] = np.inf
            break
        logs[n + 1] = nxt
    with np.errstate(over="ignore"):
        values = np.exp(logs)
    if overflow is not None:
        return Trajectory(values, False, overflow, logs)
    last = values[-1]
    converged = bool(last == 0.0 or logs[-1] <= logs[0] + math.log(CONVERGED_FRACTION))
    return Trajectory(values, converged, None, logs)


def moser_exponents(d: int, p0: float, N: int) -> np.ndarray:
    """Exponents ``p_m = p0 * (d/(d-2))**m`` for m = 0..N, built by repeated p* steps."""
    if d < 3:
        raise ValueError(f"the Sobolev ladder needs d >= 3, got {d}")
    if not p0 > 0:
        raise ValueError("p0 must be positive")
    if N < 0:
        raise ValueError("N must be nonnegative")
    out = [float(p0)]
    for _ in range(N):
        out.append(out[-1] * d / (d - 2))
    return np.array(out)


# 17-centre path maximising the covered volume of B_{1/2} under the chain
# constraints (norms <= 1/2, consecutive steps <= 1/4), found by smoothed
# constrained optimisation. A quarter-ball meets the sphere |x| = 1/2 in a cap of
# angular radius at most 30 degrees, while covering a sphere with 17 caps needs
# at least about 31.1 degrees, so a thin shell below |x| = 1/2 stays uncovered
# for every layout.
_CHAIN_CENTERS = (
    (0.156857, -0.337533, 0.019569),
    (0.163751, -0.208299, -0.194311),
    (0.059990, -0.016398, -0.316382),
    (-0.055263, 0.196807, -0.255110),
    (-0.205278, -0.000400, -0.221963),
    (-0.159863, -0.237535, -0.157168),
    (-0.144880, -0.259967, 0.091360),
    (-0.021547, -0.158332, 0.283591),
    (0.204537, -0.056084, 0.253178),
    (0.287875, -0.030785, 0.018852),
    (0.256083, 0.140244, -0.160682),
    (0.239307, 0.222296, 0.074860),
    (0.013451, 0.322295, 0.036351),
    (-0.000994, 0.213114, 0.260772),
    (-0.199870, 0.063957, 0.234430),
    (-0.265381, 0.196836, 0.033072),
    (-0.366138, -0.031900, 0.028450),
)


def ball_samples(count: int, radius: float = 0.5, d: int = 3) -> np.ndarray:
    """The first ``count`` points of the unscrambled Sobol sequence that fall in B(0, radius)."""
    sobol = qmc.Sobol(d, scramble=False)
    m = max(1, math.ceil(math.log2(1.05 * count / ball_fraction(d))))
    while True:
        pts = (sobol.random_base2(m) - 0.5) * (2 * radius)
        inside = pts[np.sum(pts**2, axis=1) < radius**2]
        if inside.shape[0] >= count:
            return inside[:count]
        sobol.reset()
        m += 1


def ball_fraction(d: int) -> float:
    """Volume fraction of the cube [-1, 1]^d occupied by the unit ball."""
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) / 2**d


@dataclass(frozen=True, eq=False)
class ChainCover:
    centers: np.ndarray
    radius: float = 0.25

    @property
    def count(self) -> int:
        return int(self.centers.shape[0])

    def steps(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.centers, axis=0), axis=1)

    def covered(self, points) -> np.ndarray:
        """Boolean mask of points lying in at least one closed ball of the chain."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros(pts.shape[0], dtype=bool)
        r2 = self.radius**2
        for c in self.centers:
            out |= np.sum((pts - c) ** 2, axis=1) <= r2
        return out

    def covering_radius(self, points) -> float:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        best = np.full(pts.shape[0], np.inf)
        for c in self.centers:
            best = np.minimum(best, np.sum((pts - c) ** 2, axis=1))
        return float(np.sqrt(best.max()))


def chain_cover(d: int = 3) -> ChainCover:
    if d != 3:
        raise ValueError(f"the 17-ball chain is defined for d = 3, got {d}")
    return ChainCover(np.array(_CHAIN_CENTERS, dtype=float), 0.25)


def chain_multiply(local_ratios) -> float:
    r = np.asarray(local_ratios, dtype=float).reshape(-1)
    if np.any(r < 1):
        raise ValueError("local Harnack ratios must be at least 1")
    return float(np.prod(r))


@dataclass(frozen=True)
class HolderRate:
    theta: float
    alpha: float
    constant: bool = False


def osc_to_holder(H: float, two_sided: bool = True) -> HolderRate:
    """Per-halving decay factor and Hölder exponent implied by a Harnack constant H.

    Two-sided: ``theta = (H-1)/(H+1)``; one-sided: ``theta = 1 - 1/H``. H = 1
    makes theta vanish and is reported as the constant-function sentinel.
    """
    if not H >= 1:
        raise ValueError(f"Harnack constant must be at least 1, got {H}")
    theta = (H - 1.0) / (H + 1.0) if two_sided else 1.0 - 1.0 / H
    if theta == 0.0:
        return HolderRate(0.0, math.inf, True)
    return HolderRate(theta, math.log2(1.0 / theta), False)


@dataclass(frozen=True)
class ConstantsConfig:
    """User-supplied dimensional constants; placeholders, never fitted truths."""

    C_H: float = 1.0
    C_Hol: float = 1.0
    c_cross: float = 0.5
    Ccap_cross: float = 1.0
    C_DG: float = 1.0
    C_wH: float = 1.0
    gamma_d: float = 1.0
    dim: int = 3

    def __post_init__(self):
        # exponents of exp(.) may vanish (Lambda-independent bounds); the rest scale things
        for name in ("C_H", "C_Hol"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be nonnegative")
        for name in ("c_cross", "Ccap_cross", "C_DG", "C_wH", "gamma_d"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.dim < 2:
            raise ValueError("dim must be at least 2")


@dataclass(frozen=True)
class TheoryBounds:
    harnack_bound: float
    holder_exponent_lb: float
    crossover_exponent: float
    crossover_cap: float


def theory_bounds(cfg: ConstantsConfig, Lambda: float, d: int | None = None) -> TheoryBounds:
    if not Lambda >= 1:
        raise ValueError(f"normalized ellipticity needs Lambda >= 1, got {Lambda}")
    if d is not None and d != cfg.dim:
        raise ValueError(f"constants are configured for d = {cfg.dim}, not {d}")
    s = math.sqrt(Lambda)
    return TheoryBounds(
        harnack_bound=math.exp(cfg.C_H * s),
        holder_exponent_lb=math.exp(-cfg.C_Hol * s),
        crossover_exponent=cfg.c_cross / s,
        crossover_cap=cfg.Ccap_cross,
    )
