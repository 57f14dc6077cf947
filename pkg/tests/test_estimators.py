import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import bump
from dgnm.estimators import (
    DeGiorgiSchedule,
    bmo_norm,
    caccioppoli_ratio,
    crossover_product,
    degiorgi_sequence,
    dyadic_family,
    harnack_ratio,
    holder_seminorm,
    jn_tail_profile,
    log_caccioppoli_ratio,
    lp_mean,
    moser_ladder_norms,
    range_stats,
    weak_harnack_exponent,
    weak_harnack_stat,
)
from dgnm.fields import FieldSpec, make_field
from dgnm.grid import CutoffSpec, DiscreteField, Region, build_ball_grid, full_region, subball
from dgnm.solver import assemble, solve_dirichlet

G2 = build_ball_grid(2, 16)
G3 = build_ball_grid(3, 16)


def _two_valued(grid, low, high):
    return DiscreteField(grid, np.where(grid.centers[:, 0] > 0, high, low))


def test_range_stats():
    u = DiscreteField.from_function(G3, lambda x: x[:, 0] + 2 * x[:, 1])
    s = range_stats(u)
    assert s.sup == u.values.max() and s.inf == u.values.min()
    assert s.osc == pytest.approx(s.sup - s.inf)


def test_harmonic_mean_of_one_and_four():
    u = _two_valued(G2, 1.0, 4.0)
    assert lp_mean(u, None, -1.0) == pytest.approx(1.6, rel=1e-13)
    assert lp_mean(u, None, 1.0) == pytest.approx(2.5, rel=1e-13)


def test_lp_mean_extreme_magnitudes():
    u = DiscreteField.constant(G2, 1e300)
    assert lp_mean(u, None, 10.0) == pytest.approx(1e300, rel=1e-12)
    assert lp_mean(u.with_values(np.full(G2.n_active, 1e-300)), None, -10.0) == pytest.approx(1e-300, rel=1e-12)
    with pytest.raises(ValueError):
        lp_mean(u.with_values(np.zeros(G2.n_active)), None, -1.0)
    with pytest.raises(ValueError):
        lp_mean(u, None, 0.0)


@given(seed=st.integers(0, 10_000), p=st.floats(-8, 8).filter(lambda x: abs(x) > 1e-3), dp=st.floats(0.01, 4))
def test_power_mean_monotone_in_p(seed, p, dp):
    vals = np.random.default_rng(seed).lognormal(size=G2.n_active)
    u = DiscreteField(G2, vals)
    q = p + dp if abs(p + dp) > 1e-3 else p + dp + 0.01
    assert lp_mean(u, None, p) <= lp_mean(u, None, q) * (1 + 1e-12)


def test_lp_mean_tends_to_sup():
    u = DiscreteField.from_function(G2, lambda x: 2 + x[:, 0])
    top = u.values.max()
    assert lp_mean(u, None, 2000.0) == pytest.approx(top, rel=5e-3)
    assert lp_mean(u, None, -2000.0) == pytest.approx(u.values.min(), rel=5e-3)


def test_crossover_two_values():
    u = _two_valued(G2, 1.0, math.e)
    half = np.count_nonzero(G2.centers[:, 0] > 0) == G2.n_active // 2
    assert half
    stat = crossover_product(u, None, c=1.0)
    assert stat.product == pytest.approx((1 + math.e) * (1 + 1 / math.e) / 4, rel=1e-13)


@given(seed=st.integers(0, 10_000), c=st.floats(0.01, 3))
def test_crossover_at_least_one(seed, c):
    u = DiscreteField(G2, np.random.default_rng(seed).lognormal(size=G2.n_active))
    assert crossover_product(u, None, c).product >= 1 - 1e-12


def test_crossover_scale_invariant():
    u = DiscreteField.from_function(G3, lambda x: 1.5 + x[:, 2])
    a = crossover_product(u, None, 0.7).product
    b = crossover_product(u.with_values(40 * u.values), None, 0.7).product
    assert a == pytest.approx(b, rel=1e-12)
    with pytest.raises(ValueError):
        crossover_product(u.with_values(np.zeros(G3.n_active)), None, 0.7)
    assert crossover_product(u.with_values(np.zeros(G3.n_active)), None, 0.7, eps=1.0).product == pytest.approx(1.0)


@pytest.mark.parametrize("alpha", [0.5, 1.0])
def test_holder_of_indicator(alpha):
    u = _two_valued(G3, 0.0, 1.0)
    assert holder_seminorm(u, None, alpha) == pytest.approx(G3.h**-alpha, rel=1e-12)


def test_holder_of_linear_function():
    u = DiscreteField.from_function(G3, lambda x: 3 * x[:, 1])
    assert holder_seminorm(u, None, 1.0) == pytest.approx(3.0, rel=1e-12)
    assert holder_seminorm(u, None, 1.0, chunk=7) == holder_seminorm(u, None, 1.0)


def test_holder_subsampling_large_regions():
    g = build_ball_grid(3, 40)
    assert g.n_active > 10_000
    u = DiscreteField.from_function(g, lambda x: x[:, 0])
    assert holder_seminorm(u, None, 1.0) == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ValueError):
        holder_seminorm(u, None, 1.5)


def test_dyadic_family_contained():
    fam = dyadic_family(G3, np.zeros(3), 0.5, 3)
    assert fam[0][1] == 0.5 and np.allclose(fam[0][0], 0)
    for c, rho in fam:
        assert np.linalg.norm(c) + rho <= 0.5 + 1e-12
    radii = sorted({rho for _, rho in fam}, reverse=True)
    assert radii == [0.5, 0.25, 0.125, 0.0625]


def test_bmo_level_zero_is_mean_oscillation():
    ball = subball(G3, np.zeros(3), 0.5)
    u = DiscreteField.from_function(G3, lambda x: x[:, 0])
    vals = u.values[ball.cells]
    assert bmo_norm(u, ball, 0).norm == pytest.approx(np.mean(np.abs(vals - vals.mean())), rel=1e-13)


def test_bmo_invariances():
    ball = subball(G3, np.zeros(3), 0.6)
    u = DiscreteField.from_function(G3, lambda x: np.log(1.1 + x[:, 0]))
    base = bmo_norm(u, ball).norm
    assert bmo_norm(u.with_values(u.values + 7), ball).norm == pytest.approx(base, rel=1e-12)
    assert bmo_norm(u.with_values(-3 * u.values), ball).norm == pytest.approx(3 * base, rel=1e-12)
    assert bmo_norm(DiscreteField.constant(G3, 2.0), ball).norm == 0
    assert bmo_norm(u, ball, 3).norm >= bmo_norm(u, ball, 0).norm
    with pytest.raises(ValueError):
        bmo_norm(u, Region(G3, ball.cells), 2)


@given(seed=st.integers(0, 10_000))
def test_jn_profile_monotone(seed):
    v = DiscreteField(G2, np.random.default_rng(seed).standard_cauchy(G2.n_active))
    prof = jn_tail_profile(v, None, np.geomspace(0.01, 100, 15))
    fracs = [f for _, f in prof]
    assert all(0 <= f <= 1 for f in fracs)
    assert all(b <= a for a, b in zip(fracs, fracs[1:]))


def test_jn_profile_two_values():
    v = _two_valued(G2, -1.0, 1.0)
    assert jn_tail_profile(v, None, [0.5, 1.0, 2.0]) == [(0.5, 1.0), (1.0, 0.0), (2.0, 0.0)]
    with pytest.raises(ValueError):
        jn_tail_profile(v, None, [1.0, 0.5])


def test_degiorgi_schedule():
    s = DeGiorgiSchedule(k=2.0, N=4)
    assert np.allclose(s.radii, [1.0, 0.75, 0.625, 0.5625])
    assert np.allclose(s.levels, [0.0, 1.0, 1.5, 1.75])


def test_degiorgi_sequence_of_constant():
    s = DeGiorgiSchedule(k=1.0, N=5)
    c = 1.5
    y = degiorgi_sequence(DiscreteField.constant(G3, c), s)
    origin = np.zeros(3)
    expected = [max(c - k, 0) ** 2 * G3.ball_cells(origin, r).size * G3.weight for r, k in zip(s.radii, s.levels)]
    assert np.allclose(y, expected, rtol=1e-14)


@given(seed=st.integers(0, 10_000), k=st.floats(0.1, 3))
def test_degiorgi_sequence_nonincreasing(seed, k):
    u = DiscreteField(G3, np.random.default_rng(seed).normal(size=G3.n_active))
    y = degiorgi_sequence(u, DeGiorgiSchedule(k, 6))
    assert np.all(np.diff(y) <= 1e-15)
    assert np.all(y >= 0)


def test_moser_ladder():
    u = DiscreteField.constant(G3, 0.7)
    out = moser_ladder_norms(u, 2.0, 2, [0.9, 0.7, 0.5])
    assert [p for p, _ in out] == [2.0, 6.0, 18.0]
    assert np.allclose([m for _, m in out], 0.7)
    with pytest.raises(ValueError):
        moser_ladder_norms(DiscreteField.constant(G2, 1.0), 2.0, 1, [0.9, 0.5])
    with pytest.raises(ValueError):
        moser_ladder_norms(u, 2.0, 1, [0.5, 0.9])


def test_harnack_ratio():
    assert harnack_ratio(DiscreteField.constant(G3, 3.0)) == 1.0
    assert harnack_ratio(_two_valued(G3, 1.0, 5.0)) == 5.0
    with pytest.raises(ValueError):
        harnack_ratio(_two_valued(G3, 0.0, 5.0))


def test_weak_harnack():
    assert weak_harnack_exponent(0.5, 3) == 1.5
    assert weak_harnack_exponent(0.25, 4) == 0.5
    with pytest.raises(ValueError):
        weak_harnack_exponent(1.0, 3)
    assert weak_harnack_stat(DiscreteField.constant(G3, 2.0), 0.5) == pytest.approx(1.0)
    u = DiscreteField.from_function(G3, lambda x: 1 + x[:, 0] ** 2)
    assert weak_harnack_stat(u, 0.5) >= 1.0


def _solution(grid, g_offset=1.0):
    a = make_field(FieldSpec("scalar_checkerboard", 16.0, 2), grid)
    op = assemble(a)
    return op, solve_dirichlet(op, g=bump([0, 0, 1], offset=g_offset))


def test_caccioppoli_holds_on_solutions():
    op, u = _solution(G3)
    cut = CutoffSpec(0.4, 0.8)
    for k in np.quantile(u.values, [0.1, 0.5, 0.9]):
        r = caccioppoli_ratio(op, u, float(k), cut)
        assert r.applicable and 0 <= r.ratio <= 1


def test_caccioppoli_not_applicable_above_max():
    op, u = _solution(G3)
    r = caccioppoli_ratio(op, u, float(u.values.max()) + 1, CutoffSpec(0.4, 0.8))
    assert not r.applicable and math.isnan(r.ratio) and r.lhs == 0


def test_caccioppoli_accepts_field_or_operator():
    op, u = _solution(G3)
    a = make_field(FieldSpec("scalar_checkerboard", 16.0, 2), G3)
    k = float(np.median(u.values))
    assert caccioppoli_ratio(a, u, k, CutoffSpec(0.4, 0.8)) == caccioppoli_ratio(op, u, k, CutoffSpec(0.4, 0.8))


def test_log_caccioppoli_scale_invariant():
    op, u = _solution(G3)
    cut = CutoffSpec(0.3, 0.7)
    r1 = log_caccioppoli_ratio(op, u, cut, eps=0.0)
    r2 = log_caccioppoli_ratio(op, u.with_values(25 * u.values), cut, eps=0.0)
    assert r1.ratio == pytest.approx(r2.ratio, rel=1e-12)
    assert 0 <= r1.ratio <= 1
    with pytest.raises(ValueError):
        log_caccioppoli_ratio(op, u.with_values(u.values - 5), cut, eps=0.0)
