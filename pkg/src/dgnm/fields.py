"""Generation, measurement and normalisation of elliptic coefficient fields.

A field stores one symmetric d x d matrix per box cell in packed upper-triangle
row order ((0,0), (0,1), ..., (1,1), ...). Ellipticity is measured over the
active (in-ball) cells only.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import rng
from .grid import BallGrid

KINDS = ("identity", "scalar_checkerboard", "layered", "rotated_anisotropic", "iid_random")
FILE_MAGIC = b"DGNF"
FILE_VERSION = 1
EIG_TOL = 1e-12


class EllipticityError(ValueError):
    """A coefficient matrix is not positive definite."""


@dataclass(frozen=True)
class EllipticityPair:
    lam: float
    Lam: float

    def __post_init__(self):
        if not 0 < self.lam <= self.Lam:
            raise ValueError(f"need 0 < lam <= Lam, got ({self.lam}, {self.Lam})")

    @property
    def ratio(self) -> float:
        return self.Lam / self.lam


@dataclass(frozen=True)
class FieldSpec:
    kind: str
    contrast: float = 1.0
    period: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown field kind {self.kind!r}; expected one of {KINDS}")
        if not self.contrast >= 1:
            raise ValueError(f"contrast must be >= 1, got {self.contrast}")
        if int(self.period) != self.period or self.period < 1:
            raise ValueError(f"period must be a positive integer, got {self.period}")


def packed_pairs(d: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(d) for j in range(i, d)]


def pack(mats: np.ndarray) -> np.ndarray:
    d = mats.shape[-1]
    return np.stack([mats[..., i, j] for i, j in packed_pairs(d)], axis=-1)


def unpack(packed: np.ndarray, d: int) -> np.ndarray:
    mats = np.empty(packed.shape[:-1] + (d, d))
    for k, (i, j) in enumerate(packed_pairs(d)):
        mats[..., i, j] = packed[..., k]
        mats[..., j, i] = packed[..., k]
    return mats


def _eig2(p: np.ndarray) -> np.ndarray:
    a, b, c = p[:, 0], p[:, 1], p[:, 2]
    mid = 0.5 * (a + c)
    rad = np.hypot(0.5 * (a - c), b)
    return np.stack([mid - rad, mid + rad], axis=1)


def _eig3(p: np.ndarray) -> np.ndarray:
    """Trigonometric (Smith) eigenvalues with deflation for the clustered pair.

    The isolated eigenvalue sits at a stationary point of the cosine and is
    accurate; the remaining two come from the 2x2 compression of the matrix
    onto the orthogonal complement of its eigenvector, which avoids the
    square-root loss of accuracy for (nearly) repeated eigenvalues.
    """
    a11, a12, a13, a22, a23, a33 = p.T
    m = p.shape[0]
    out = np.empty((m, 3))
    off = a12**2 + a13**2 + a23**2
    q = (a11 + a22 + a33) / 3.0
    b11, b22, b33 = a11 - q, a22 - q, a33 - q
    p2 = b11**2 + b22**2 + b33**2 + 2.0 * off
    scale = np.sqrt(p2 / 6.0)

    diag = off == 0.0
    iso = ~diag & (scale <= 1e-15 * np.maximum(np.abs(q), 1e-300))
    gen = ~diag & ~iso

    if np.any(diag):
        out[diag] = np.sort(np.stack([a11[diag], a22[diag], a33[diag]], axis=1), axis=1)
    if np.any(iso):
        out[iso] = q[iso, None]
    if not np.any(gen):
        return out

    g = gen
    s = scale[g]
    c11, c22, c33 = b11[g] / s, b22[g] / s, b33[g] / s
    c12, c13, c23 = a12[g] / s, a13[g] / s, a23[g] / s
    det = (
        c11 * (c22 * c33 - c23 * c23)
        - c12 * (c12 * c33 - c23 * c13)
        + c13 * (c12 * c23 - c22 * c13)
    )
    r = np.clip(det / 2.0, -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    top = q[g] + 2.0 * s * np.cos(phi)
    bottom = q[g] + 2.0 * s * np.cos(phi + 2.0 * np.pi / 3.0)
    isolated = np.where(r >= 0.0, top, bottom)

    mats = unpack(p[g], 3)
    shifted = mats - isolated[:, None, None] * np.eye(3)
    rows = shifted
    crosses = np.stack(
        [
            np.cross(rows[:, 0], rows[:, 1]),
            np.cross(rows[:, 0], rows[:, 2]),
            np.cross(rows[:, 1], rows[:, 2]),
        ],
        axis=1,
    )
    norms = np.linalg.norm(crosses, axis=2)
    pick = np.argmax(norms, axis=1)
    vec = crosses[np.arange(pick.size), pick]
    vec /= norms[np.arange(pick.size), pick][:, None]

    # orthonormal complement of vec
    helper = np.zeros_like(vec)
    helper[np.arange(vec.shape[0]), np.argmin(np.abs(vec), axis=1)] = 1.0
    e1 = np.cross(vec, helper)
    e1 /= np.linalg.norm(e1, axis=1)[:, None]
    e2 = np.cross(vec, e1)
    m11 = np.einsum("ki,kij,kj->k", e1, mats, e1)
    m22 = np.einsum("ki,kij,kj->k", e2, mats, e2)
    m12 = np.einsum("ki,kij,kj->k", e1, mats, e2)
    pair = _eig2(np.stack([m11, m12, m22], axis=1))
    out[g] = np.sort(np.column_stack([isolated, pair]), axis=1)
    return out


def sym_eigvals(packed: np.ndarray, d: int) -> np.ndarray:
    """Ascending eigenvalues of packed symmetric 2x2 or 3x3 matrices."""
    packed = np.atleast_2d(np.asarray(packed, dtype=float))
    if d == 2:
        return _eig2(packed)
    if d == 3:
        return _eig3(packed)
    raise ValueError(f"closed-form eigenvalues only for d in (2, 3), got {d}")


def _measure(grid: BallGrid, packed: np.ndarray) -> tuple[EllipticityPair, int, int]:
    eig = sym_eigvals(packed[grid.flat_index], grid.dim)
    lo, hi = eig[:, 0], eig[:, -1]
    if not np.all(np.isfinite(eig)):
        raise EllipticityError("coefficient field contains non-finite entries")
    worst = int(np.argmin(lo))
    if lo[worst] <= 0:
        raise EllipticityError(
            f"cell {grid.index[worst].tolist()} is not positive definite "
            f"(smallest eigenvalue {lo[worst]:.3e})"
        )
    best = int(np.argmax(hi))
    return EllipticityPair(float(lo[worst]), float(hi[best])), worst, best


class CoefficientField:
    """Per-cell symmetric positive definite matrices on a ball grid."""

    def __init__(self, grid: BallGrid, packed: np.ndarray):
        d = grid.dim
        npack = d * (d + 1) // 2
        packed = np.array(packed, dtype=float).reshape(grid.n**d, npack)
        packed.setflags(write=False)
        self.grid = grid
        self.dim = d
        self.packed = packed
        self.ellipticity, self.argmin_cell, self.argmax_cell = _measure(grid, packed)

    def matrices(self, cells: np.ndarray | None = None) -> np.ndarray:
        """Full matrices of active cells (all active cells if ``cells`` is None)."""
        rows = self.grid.flat_index if cells is None else self.grid.flat_index[cells]
        return unpack(self.packed[rows], self.dim)

    def is_diagonal(self) -> bool:
        offdiag = [k for k, (i, j) in enumerate(packed_pairs(self.dim)) if i != j]
        return bool(np.all(self.packed[self.grid.flat_index][:, offdiag] == 0.0))

    def diagonal(self) -> np.ndarray:
        """(n_active, d) diagonal entries of the active cells."""
        diag = [k for k, (i, j) in enumerate(packed_pairs(self.dim)) if i == j]
        return self.packed[self.grid.flat_index][:, diag]

    def __eq__(self, other):
        if not isinstance(other, CoefficientField):
            return NotImplemented
        return self.grid is other.grid and np.array_equal(self.packed, other.packed)

    def __repr__(self):
        e = self.ellipticity
        return f"CoefficientField(d={self.dim}, n={self.grid.n}, lam={e.lam:g}, Lam={e.Lam:g})"


def measure_ellipticity(a: CoefficientField) -> EllipticityPair:
    return _measure(a.grid, a.packed)[0]


def normalize_field(a: CoefficientField) -> CoefficientField:
    """Divide every cell matrix by the measured lower ellipticity bound."""
    lam = measure_ellipticity(a).lam
    if abs(lam - 1.0) <= EIG_TOL:
        # already normalised to the accuracy of the eigenvalue solver
        return a
    return CoefficientField(a.grid, a.packed / lam)


def _tile_index(grid: BallGrid, period: int) -> tuple[np.ndarray, np.ndarray]:
    """Unique tiles (m, d) and, for each box cell, its tile row."""
    shape = (grid.n,) * grid.dim
    cells = np.indices(shape).reshape(grid.dim, -1).T
    tiles = cells // period
    ntile = -(-grid.n // period)
    tile_rows = np.ravel_multi_index(tuple(tiles.T), (ntile,) * grid.dim)
    unique = np.indices((ntile,) * grid.dim).reshape(grid.dim, -1).T
    return unique, tile_rows


def _random_rotations(keys: np.ndarray, d: int) -> np.ndarray:
    """Gram-Schmidt on Gaussian columns, one rotation per key."""
    g = rng.normals(keys, d * d).reshape(-1, d, d)
    q = np.empty_like(g)
    for col in range(d):
        v = g[:, :, col].copy()
        for _ in range(2):  # second pass restores orthogonality to rounding level
            for prev in range(col):
                v -= np.sum(v * q[:, :, prev], axis=1)[:, None] * q[:, :, prev]
        q[:, :, col] = v / np.linalg.norm(v, axis=1)[:, None]
    return q


def make_field(spec: FieldSpec, grid: BallGrid) -> CoefficientField:
    """Deterministic coefficient field for ``spec`` on every box cell of ``grid``."""
    if spec.period > grid.n:
        raise ValueError(f"period {spec.period} exceeds grid resolution {grid.n}")
    d = grid.dim
    ncell = grid.n**d
    eye = np.eye(d)
    period = int(spec.period)

    if spec.kind == "identity":
        mats = np.broadcast_to(eye, (ncell, d, d))
        return CoefficientField(grid, pack(mats))

    unique, tile_rows = _tile_index(grid, period)
    if spec.kind == "scalar_checkerboard":
        scalar = np.where(unique.sum(axis=1) % 2 == 1, spec.contrast, 1.0)
    elif spec.kind == "layered":
        scalar = np.where(unique[:, 0] % 2 == 1, spec.contrast, 1.0)
    elif spec.kind == "iid_random":
        u = rng.uniforms(rng.stream_keys(spec.seed, unique), 1)[:, 0]
        scalar = np.exp(u * np.log(spec.contrast))
    else:
        rot = _random_rotations(rng.stream_keys(spec.seed, unique), d)
        spectrum = np.full(d, float(spec.contrast))
        spectrum[0] = 1.0
        tile_mats = np.einsum("kij,j,klj->kil", rot, spectrum, rot)
        tile_mats = 0.5 * (tile_mats + np.swapaxes(tile_mats, 1, 2))
        return CoefficientField(grid, pack(tile_mats)[tile_rows])

    mats = scalar[tile_rows, None, None] * eye
    return CoefficientField(grid, pack(mats))


def save_field(path, a: CoefficientField) -> None:
    """Write DGNF: magic, u16 version, u16 d, d x u32 n, u64 count, LE doubles."""
    d = a.dim
    data = np.ascontiguousarray(a.packed, dtype="<f8")
    header = FILE_MAGIC + struct.pack("<HH", FILE_VERSION, d)
    header += struct.pack("<" + "I" * d, *([a.grid.n] * d))
    header += struct.pack("<Q", data.size)
    Path(path).write_bytes(header + data.tobytes(order="C"))


def load_field(path, grid: BallGrid) -> CoefficientField:
    raw = Path(path).read_bytes()
    if raw[:4] != FILE_MAGIC:
        raise ValueError(f"{path}: not a DGNF coefficient file")
    version, d = struct.unpack_from("<HH", raw, 4)
    if version != FILE_VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    offset = 8
    sizes = struct.unpack_from("<" + "I" * d, raw, offset)
    offset += 4 * d
    (count,) = struct.unpack_from("<Q", raw, offset)
    offset += 8
    if d != grid.dim or any(s != grid.n for s in sizes):
        raise ValueError(f"{path}: field shape {sizes} does not match grid n={grid.n}, d={grid.dim}")
    expected = grid.n**d * d * (d + 1) // 2
    if count != expected:
        raise ValueError(f"{path}: entry count {count}, expected {expected}")
    data = np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
    return CoefficientField(grid, data.astype(float))
