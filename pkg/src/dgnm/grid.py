"""Cell-centred cubic discretisation of balls, quadrature, regions and cutoffs.

The ball B_R is approximated by the staircase of cubic cells (side ``h = 2R/n``)
whose centres lie strictly inside the ball. Every such cell carries the
quadrature weight ``h**d``. The boundary layer consists of active cells having
at least one of their ``3**d - 1`` neighbours outside the staircase; it is
where Dirichlet data is imposed.
"""

from __future__ import annotations

import itertools
import math
import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist

FIELD_MAGIC = b"DGNU"
FIELD_VERSION = 1


@dataclass(frozen=True, eq=False)
class BallGrid:
    dim: int
    n: int
    R: float
    h: float
    mask: np.ndarray
    index: np.ndarray
    centers: np.ndarray
    boundary_layer: np.ndarray
    lookup: np.ndarray

    @property
    def weight(self) -> float:
        """Quadrature weight (cell volume) of every active cell."""
        return self.h**self.dim

    @property
    def n_active(self) -> int:
        return self.centers.shape[0]

    @property
    def interior(self) -> np.ndarray:
        return ~self.boundary_layer

    @cached_property
    def radii(self) -> np.ndarray:
        return np.linalg.norm(self.centers, axis=1)

    @cached_property
    def flat_index(self) -> np.ndarray:
        """Position of each active cell in the C-ordered box of n**d cells."""
        return np.ravel_multi_index(tuple(self.index.T), (self.n,) * self.dim)

    def axis_coords(self) -> np.ndarray:
        return -self.R + (np.arange(self.n) + 0.5) * self.h

    def to_box(self, values: np.ndarray, fill: float = np.nan) -> np.ndarray:
        """Scatter active-cell values into an (n,)*d array."""
        box = np.full((self.n,) * self.dim, fill, dtype=float)
        box[tuple(self.index.T)] = values
        return box

    @cached_property
    def faces(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Faces between face-adjacent active cells as (left, right, axis)."""
        left, right, axes = [], [], []
        for axis in range(self.dim):
            lo = [slice(None)] * self.dim
            hi = [slice(None)] * self.dim
            lo[axis] = slice(0, self.n - 1)
            hi[axis] = slice(1, self.n)
            a = self.lookup[tuple(lo)].ravel()
            b = self.lookup[tuple(hi)].ravel()
            keep = (a >= 0) & (b >= 0)
            left.append(a[keep])
            right.append(b[keep])
            axes.append(np.full(int(keep.sum()), axis, dtype=np.int64))
        return np.concatenate(left), np.concatenate(right), np.concatenate(axes)

    @cached_property
    def simplices(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Kuhn simplices of the dual lattice whose vertices are all active.

        Returns ``(vertices, perm_id, sample_cell)``: vertex k of a simplex is
        the previous vertex shifted along axis ``perm[k-1]``; ``sample_cell`` is
        the active cell containing the simplex centroid (ties on a cell face go
        to the upper cell).
        """
        d, n = self.dim, self.n
        perms = list(itertools.permutations(range(d)))
        corner = np.stack(
            np.meshgrid(*[np.arange(n - 1)] * d, indexing="ij"), axis=-1
        ).reshape(-1, d)
        # vertex v_k has offset 1 along perm[0..k-1]; centroid fraction along
        # perm[k-1] is (d+1-k)/(d+1), i.e. >= 1/2 iff k <= (d+1)/2
        upper_count = sum(1 for k in range(1, d + 1) if 2 * (d + 1 - k) >= d + 1)
        verts, pid, sample = [], [], []
        for p, perm in enumerate(perms):
            pts = [corner.copy()]
            for k in range(d):
                nxt = pts[-1].copy()
                nxt[:, perm[k]] += 1
                pts.append(nxt)
            ids = np.stack([self.lookup[tuple(q.T)] for q in pts], axis=1)
            keep = np.all(ids >= 0, axis=1)
            verts.append(ids[keep])
            pid.append(np.full(int(keep.sum()), p, dtype=np.int64))
            sample.append(ids[keep, upper_count])
        return np.concatenate(verts), np.concatenate(pid), np.concatenate(sample)

    @cached_property
    def permutations(self) -> list[tuple[int, ...]]:
        return list(itertools.permutations(range(self.dim)))

    def ball_cells(self, center, r: float) -> np.ndarray:
        """Sorted indices of active cells with centre in the open ball B(center, r)."""
        center = np.asarray(center, dtype=float).reshape(self.dim)
        lo = np.floor((center - r + self.R) / self.h - 0.5).astype(int)
        hi = np.ceil((center + r + self.R) / self.h - 0.5).astype(int) + 1
        lo = np.clip(lo, 0, self.n)
        hi = np.clip(hi, 0, self.n)
        window = tuple(slice(a, b) for a, b in zip(lo, hi))
        ids = self.lookup[window].ravel()
        ids = ids[ids >= 0]
        if ids.size == 0:
            return ids
        dist = np.linalg.norm(self.centers[ids] - center, axis=1)
        return np.sort(ids[dist < r])


def build_ball_grid(d: int, n: int, R: float = 1.0) -> BallGrid:
    if d not in (2, 3):
        raise ValueError(f"dimension must be 2 or 3, got {d}")
    if n < 4:
        raise ValueError(f"need at least 4 cells per axis, got {n}")
    if not R > 0:
        raise ValueError(f"radius must be positive, got {R}")
    h = 2.0 * R / n
    coords = -R + (np.arange(n) + 0.5) * h
    mesh = np.meshgrid(*[coords] * d, indexing="ij")
    mask = sum(m**2 for m in mesh) < R * R
    index = np.argwhere(mask)
    centers = coords[index]
    lookup = np.full(mask.shape, -1, dtype=np.int64)
    lookup[tuple(index.T)] = np.arange(index.shape[0])

    padded = np.pad(mask, 1, constant_values=False)
    all_in = np.ones_like(mask)
    for shift in itertools.product((0, 1, 2), repeat=d):
        window = tuple(slice(s, s + n) for s in shift)
        all_in &= padded[window]
    boundary = (mask & ~all_in)[tuple(index.T)]
    return BallGrid(d, n, float(R), h, mask, index, centers, boundary, lookup)


def ball_volume(d: int, R: float) -> float:
    return math.pi ** (d / 2) * R**d / math.gamma(d / 2 + 1)


@dataclass(frozen=True, eq=False)
class DiscreteField:
    """One real value per active cell of a grid."""

    grid: BallGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if values.shape[0] != self.grid.n_active:
            raise ValueError(
                f"field has {values.shape[0]} values, grid has {self.grid.n_active} cells"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: BallGrid, func) -> "DiscreteField":
        return cls(grid, np.asarray(func(grid.centers), dtype=float))

    @classmethod
    def constant(cls, grid: BallGrid, c: float) -> "DiscreteField":
        return cls(grid, np.full(grid.n_active, float(c)))

    def with_values(self, values) -> "DiscreteField":
        return DiscreteField(self.grid, values)


def as_values(u, grid: BallGrid | None = None) -> np.ndarray:
    if isinstance(u, DiscreteField):
        if grid is not None and u.grid is not grid:
            raise ValueError("field lives on a different grid")
        return u.values
    return np.asarray(u, dtype=float)


@dataclass(frozen=True, eq=False)
class Region:
    grid: BallGrid
    cells: np.ndarray
    center: np.ndarray | None = None
    radius: float | None = None

    @property
    def size(self) -> int:
        return int(self.cells.size)

    @property
    def volume(self) -> float:
        return self.size * self.grid.weight

    def diameter(self) -> float:
        pts = self.grid.centers[self.cells]
        if pts.shape[0] < 2:
            return 0.0
        if pts.shape[0] > pts.shape[1] + 1:
            try:
                pts = pts[ConvexHull(pts).vertices]
            except QhullError:
                pass
        return float(pdist(pts).max())


def full_region(grid: BallGrid) -> Region:
    return Region(grid, np.arange(grid.n_active), np.zeros(grid.dim), grid.R)


def subball(grid: BallGrid, center, r: float) -> Region:
    """Active cells whose centres lie in the open ball B(center, r)."""
    center = np.asarray(center, dtype=float).reshape(grid.dim)
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    if np.linalg.norm(center) + r > grid.R + grid.h * (1 + 1e-12):
        raise ValueError("subball leaves the grid ball by more than one cell width")
    cells = grid.ball_cells(center, r)
    if cells.size == 0:
        raise ValueError(f"subball B({center.tolist()}, {r}) contains no cell centres")
    return Region(grid, cells, center, float(r))


def integrate(grid: BallGrid, f, region: Region | None = None, mean: bool = False) -> float:
    values = as_values(f, grid)
    cells = np.arange(grid.n_active) if region is None else region.cells
    if cells.size == 0:
        raise ValueError("cannot integrate over an empty region")
    total = float(np.sum(values[cells])) * grid.weight
    if mean:
        return total / (cells.size * grid.weight)
    return total


@dataclass(frozen=True)
class CutoffSpec:
    r_inner: float
    r_outer: float
    center: tuple[float, ...] | None = None

    def __post_init__(self):
        if not 0 < self.r_inner < self.r_outer:
            raise ValueError(
                f"cutoff radii must satisfy 0 < r_inner < r_outer, got {self.r_inner}, {self.r_outer}"
            )


def make_cutoff(grid: BallGrid, spec: CutoffSpec) -> DiscreteField:
    """Piecewise-linear radial cutoff: 1 inside r_inner, 0 beyond r_outer."""
    if spec.r_outer > grid.R * (1 + 1e-12):
        raise ValueError(f"cutoff outer radius {spec.r_outer} exceeds grid radius {grid.R}")
    center = np.zeros(grid.dim) if spec.center is None else np.asarray(spec.center, float)
    dist = np.linalg.norm(grid.centers - center, axis=1)
    eta = np.clip((spec.r_outer - dist) / (spec.r_outer - spec.r_inner), 0.0, 1.0)
    return DiscreteField(grid, eta)


def save_discrete_field(path, u: DiscreteField) -> None:
    """Write a field as DGNU: header then n**d little-endian doubles, NaN outside."""
    grid = u.grid
    header = FIELD_MAGIC + struct.pack("<HHId", FIELD_VERSION, grid.dim, grid.n, grid.R)
    body = grid.to_box(u.values).astype("<f8").tobytes(order="C")
    Path(path).write_bytes(header + body)


def load_discrete_field(path, grid: BallGrid | None = None) -> DiscreteField:
    raw = Path(path).read_bytes()
    if raw[:4] != FIELD_MAGIC:
        raise ValueError(f"{path}: not a DGNU field file")
    version, d, n, R = struct.unpack_from("<HHId", raw, 4)
    if version != FIELD_VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    if grid is None:
        grid = build_ball_grid(d, n, R)
    elif (grid.dim, grid.n, grid.R) != (d, n, R):
        raise ValueError(f"{path}: grid mismatch (d={d}, n={n}, R={R})")
    offset = 4 + struct.calcsize("<HHId")
    box = np.frombuffer(raw, dtype="<f8", count=n**d, offset=offset).reshape((n,) * d)
    return DiscreteField(grid, box[tuple(grid.index.T)].astype(float))
