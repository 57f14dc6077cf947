"""Sphere-inversion extension from B_R to B_{2R} with a linear radial cutoff.

For a target cell centre x:

* |x| < R: multilinear interpolation of u at x;
* R <= |x| < 2R: eta(|x|) * u(R**2 x / |x|**2) with eta = 2 - |x|/R;
* target boundary-layer cells: 0, so the result is compactly supported.

Interpolation uses the source's cell-centred lattice. If any of the 2**d
corners falls outside the source staircase, the value of the nearest active
source cell is used instead.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .grid import BallGrid, DiscreteField, build_ball_grid


@dataclass(frozen=True, eq=False)
class ExtensionResult:
    extended: DiscreteField
    source_norm: float
    target_norm: float

    @property
    def norm_ratio(self) -> float:
        if self.source_norm == 0.0:
            return math.nan
        return self.target_norm / self.source_norm


def interpolate(u: DiscreteField, points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of cell-centre values; nearest-cell fallback near the rim."""
    grid = u.grid
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    s = (pts + grid.R) / grid.h - 0.5
    base = np.floor(s).astype(np.int64)
    frac = s - base
    out = np.zeros(pts.shape[0])
    ok = np.ones(pts.shape[0], dtype=bool)
    for corner in itertools.product((0, 1), repeat=grid.dim):
        idx = base + np.array(corner)
        inside = np.all((idx >= 0) & (idx < grid.n), axis=1)
        ids = np.full(pts.shape[0], -1, dtype=np.int64)
        ids[inside] = grid.lookup[tuple(idx[inside].T)]
        ok &= ids >= 0
        w = np.prod(np.where(np.array(corner, dtype=bool), frac, 1.0 - frac), axis=1)
        out += np.where(ids >= 0, w * u.values[np.maximum(ids, 0)], 0.0)
    if not ok.all():
        _, nearest = cKDTree(grid.centers).query(pts[~ok])
        out[~ok] = u.values[nearest]
    return out


def p1_energy(grid: BallGrid, values: np.ndarray) -> float:
    """Identity-coefficient P1 energy on the Kuhn simplices with all vertices active.

    Equivalent to ``gradient(grid, u, "fem_p1").energy()`` but works on box arrays
    one permutation at a time, so it stays cheap on large grids.
    """
    box = grid.to_box(values)
    d, n = grid.dim, grid.n
    total = 0.0
    for perm in itertools.permutations(range(d)):
        offsets = [np.zeros(d, dtype=int)]
        for ax in perm:
            nxt = offsets[-1].copy()
            nxt[ax] = 1
            offsets.append(nxt)
        views = [box[tuple(slice(o, n - 1 + o) for o in off)] for off in offsets]
        keep = np.ones(views[0].shape, dtype=bool)
        for v in views:
            keep &= np.isfinite(v)
        sq = np.zeros(views[0].shape)
        for k in range(d):
            diff = np.where(keep, views[k + 1] - views[k], 0.0)
            sq += diff * diff
        total += float(sq.sum())
    return total * grid.h ** (d - 2) / math.factorial(d)


def sobolev_norm(u: DiscreteField) -> float:
    """sqrt(∫u² + ∫|∇u|²) with cell quadrature and the P1 gradient."""
    grid = u.grid
    l2 = float(np.sum(u.values**2)) * grid.weight
    return math.sqrt(l2 + p1_energy(grid, u.values))


def _check_pair(source: BallGrid, target: BallGrid) -> None:
    if source.dim != target.dim:
        raise ValueError(f"dimension mismatch: source d={source.dim}, target d={target.dim}")
    if not math.isclose(target.R, 2.0 * source.R):
        raise ValueError("target ball must have twice the source radius")
    if target.h > source.h * (1 + 1e-12):
        raise ValueError("target grid is coarser than the source grid")


def extension_values(u: DiscreteField, target: BallGrid) -> np.ndarray:
    R = u.grid.R
    x = target.centers
    r = target.radii
    out = np.zeros(target.n_active)
    inner = r < R
    out[inner] = interpolate(u, x[inner])
    shell = ~inner & (r < 2 * R)
    inverted = x[shell] * (R * R / r[shell] ** 2)[:, None]
    eta = 2.0 - r[shell] / R
    out[shell] = eta * interpolate(u, inverted)
    out[target.boundary_layer] = 0.0
    return out


def extend(u: DiscreteField, target: BallGrid) -> ExtensionResult:
    _check_pair(u.grid, target)
    ext = DiscreteField(target, extension_values(u, target))
    return ExtensionResult(ext, sobolev_norm(u), sobolev_norm(ext))


def default_family(d: int) -> dict[str, callable]:
    """Smooth inputs used by the norm-ratio sweep."""
    return {
        "one": lambda x: np.ones(x.shape[0]),
        "x1": lambda x: x[:, 0],
        "bump": lambda x: np.exp(-np.sum((x - 0.3) ** 2, axis=1) / (2 * 0.3**2)),
    }


def extension_norm_ratio_sweep(u_family, resolutions, d: int = 3) -> list[dict]:
    """Norm ratio of the extension for each (function, source resolution).

    ``u_family`` maps names to functions of position (or is a list of such
    functions); the target grid for source resolution n has 2n cells per axis
    on B_2, so both grids share one spacing.
    """
    if isinstance(u_family, dict):
        items = list(u_family.items())
    else:
        items = [(f"u{i}", f) for i, f in enumerate(u_family)]
    if not items:
        raise ValueError("empty function family")
    rows = []
    for n in resolutions:
        source = build_ball_grid(d, n, 1.0)
        target = build_ball_grid(d, 2 * n, 2.0)
        for name, func in items:
            res = extend(DiscreteField.from_function(source, func), target)
            rows.append({"function": name, "n": int(n), "ratio": res.norm_ratio,
                         "source_norm": res.source_norm, "target_norm": res.target_norm})
    return rows
