import math

import numpy as np
import pytest
from scipy.integrate import quad

from dgnm.extension import (
    default_family,
    extend,
    extension_norm_ratio_sweep,
    interpolate,
    p1_energy,
    sobolev_norm,
)
from dgnm.grid import DiscreteField, build_ball_grid
from dgnm.solver import gradient

SRC = build_ball_grid(3, 16, 1.0)
TGT = build_ball_grid(3, 32, 2.0)


def _continuum_ratio_of_one():
    # u = 1 on B_1 extends to (2 - r) on 1 < r < 2 with unit radial gradient
    shell, _ = quad(lambda r: ((2 - r) ** 2 + 1) * 4 * math.pi * r**2, 1, 2)
    inner = 4 * math.pi / 3
    return math.sqrt((inner + shell) / inner)


def test_continuum_oracle_value():
    assert _continuum_ratio_of_one() == pytest.approx(3.0984, abs=1e-4)


def test_interpolation_reproduces_linear_functions():
    u = DiscreteField.from_function(SRC, lambda x: 1 + 2 * x[:, 0] - x[:, 2])
    pts = np.random.default_rng(0).uniform(-0.5, 0.5, size=(200, 3))
    assert np.allclose(interpolate(u, pts), 1 + 2 * pts[:, 0] - pts[:, 2], atol=1e-13)


def test_extension_of_one():
    ext = extend(DiscreteField.constant(SRC, 1.0), TGT).extended.values
    r = TGT.radii
    live = ~TGT.boundary_layer
    assert np.allclose(ext[(r < 1) & live], 1.0)
    shell = (r >= 1) & live
    assert np.allclose(ext[shell], 2 - r[shell])
    assert np.all(ext[TGT.boundary_layer] == 0)


def test_extension_of_coordinate_on_outer_shell():
    ext = extend(DiscreteField.from_function(SRC, lambda x: x[:, 0]), TGT).extended.values
    r = TGT.radii
    sel = (r >= 1.25) & ~TGT.boundary_layer
    expected = (2 - r[sel]) * TGT.centers[sel, 0] / r[sel] ** 2
    assert np.allclose(ext[sel], expected, atol=1e-13)


def test_extension_is_linear():
    rng = np.random.default_rng(1)
    u, v = (DiscreteField(SRC, rng.normal(size=SRC.n_active)) for _ in range(2))
    combo = extend(u.with_values(2 * u.values - 3 * v.values), TGT).extended.values
    parts = 2 * extend(u, TGT).extended.values - 3 * extend(v, TGT).extended.values
    assert np.allclose(combo, parts, atol=1e-12)


def test_zero_function_ratio_is_nan():
    res = extend(DiscreteField.constant(SRC, 0.0), TGT)
    assert res.source_norm == 0 and math.isnan(res.norm_ratio)


@pytest.mark.parametrize("target", [
    build_ball_grid(2, 32, 2.0),
    build_ball_grid(3, 32, 3.0),
    build_ball_grid(3, 8, 2.0),
], ids=["dimension", "radius", "coarser"])
def test_extension_rejects_bad_targets(target):
    with pytest.raises(ValueError):
        extend(DiscreteField.constant(SRC, 1.0), target)


@pytest.mark.parametrize("d", [2, 3])
def test_p1_energy_matches_scheme_gradient(d):
    g = build_ball_grid(d, 12)
    vals = np.sin(3 * g.centers[:, 0]) + g.centers[:, -1] ** 2
    assert p1_energy(g, vals) == pytest.approx(gradient(g, vals, "fem_p1").energy(), rel=1e-13)


def test_sobolev_norm_of_constant():
    u = DiscreteField.constant(SRC, 2.0)
    assert sobolev_norm(u) == pytest.approx(2 * math.sqrt(SRC.n_active * SRC.weight), rel=1e-14)


def test_norm_ratio_approaches_continuum():
    rows = extension_norm_ratio_sweep({"one": default_family(3)["one"]}, [16, 32])
    exact = _continuum_ratio_of_one()
    errs = [abs(r["ratio"] - exact) for r in rows]
    assert errs[1] < errs[0]
    assert errs[1] < 0.15 * exact


def test_sweep_rows():
    rows = extension_norm_ratio_sweep(default_family(3), [8])
    assert [r["function"] for r in rows] == ["one", "x1", "bump"]
    assert all(r["n"] == 8 and r["ratio"] > 1 for r in rows)
    rows = extension_norm_ratio_sweep([lambda x: x[:, 1]], [8], d=2)
    assert rows[0]["function"] == "u0"
    with pytest.raises(ValueError):
        extension_norm_ratio_sweep({}, [8])
