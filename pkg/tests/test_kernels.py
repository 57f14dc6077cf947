import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dgnm.kernels import (
    ChainCover,
    ConstantsConfig,
    RecurrenceParams,
    ball_fraction,
    ball_samples,
    chain_cover,
    chain_multiply,
    degiorgi_iterate,
    degiorgi_threshold,
    moser_exponents,
    osc_to_holder,
    theory_bounds,
)


@pytest.mark.parametrize("C, B, alpha, expected", [
    (2.0, 4.0, 1.0, 0.125),
    (1.0, 1.0, 0.5, 1.0),
    (8.0, 1.0, 3.0, 0.5),
    (1.0, 16.0, 2.0, 0.5),
])
def test_threshold_examples(C, B, alpha, expected):
    assert degiorgi_threshold(RecurrenceParams(C, B, alpha)) == pytest.approx(expected, rel=1e-14)


def test_threshold_brute_force():
    # scan initial values on a grid; the largest one whose trajectory decays is the threshold
    p = RecurrenceParams(2.0, 4.0, 1.0)
    grid = np.linspace(0.05, 0.2, 301)
    decays = [degiorgi_iterate(RecurrenceParams(2.0, 4.0, 1.0, y), 60).converged for y in grid]
    assert max(y for y, ok in zip(grid, decays) if ok) == pytest.approx(degiorgi_threshold(p), abs=5e-4)


def test_trajectory_at_threshold_is_geometric():
    p = RecurrenceParams(2.0, 4.0, 1.0, 0.125)
    traj = degiorgi_iterate(p, 25)
    assert np.allclose(traj.values, 0.125 * 4.0 ** -np.arange(26), rtol=1e-12)
    assert traj.converged and not traj.diverged


def test_trajectory_above_threshold_overflows():
    traj = degiorgi_iterate(RecurrenceParams(2.0, 4.0, 1.0, 0.2), 200)
    assert traj.diverged and traj.overflow_index is not None
    assert np.isinf(traj.values[-1])
    assert np.all(np.isfinite(traj.log_values[: traj.overflow_index]))


def test_zero_start():
    traj = degiorgi_iterate(RecurrenceParams(3.0, 2.0, 0.5, 0.0), 5)
    assert traj.converged and np.all(traj.values == 0)


@given(C=st.floats(0.1, 100), B=st.floats(1, 50), alpha=st.floats(0.1, 3), frac=st.floats(0.01, 1.0))
def test_below_threshold_obeys_geometric_bound(C, B, alpha, frac):
    p = RecurrenceParams(C, B, alpha)
    y0 = frac * degiorgi_threshold(p)
    traj = degiorgi_iterate(RecurrenceParams(C, B, alpha, y0), 40)
    bound = math.log(y0) - np.arange(41) * math.log(B) / alpha
    assert np.all(traj.log_values <= bound + 1e-9 * (1 + np.abs(bound)))


@pytest.mark.parametrize("kwargs", [
    dict(C_rec=0, B=2, alpha=1), dict(C_rec=1, B=0.5, alpha=1),
    dict(C_rec=1, B=2, alpha=0), dict(C_rec=1, B=2, alpha=1, Y0=-1),
])
def test_recurrence_params_validated(kwargs):
    with pytest.raises(ValueError):
        RecurrenceParams(**kwargs)


def test_moser_exponents():
    assert moser_exponents(3, 2.0, 3).tolist() == [2.0, 6.0, 18.0, 54.0]
    assert moser_exponents(4, 1.5, 2).tolist() == [1.5, 3.0, 6.0]
    assert moser_exponents(5, 1.0, 4) == pytest.approx((5 / 3) ** np.arange(5))
    with pytest.raises(ValueError):
        moser_exponents(2, 2.0, 3)


def test_ball_samples():
    pts = ball_samples(5000)
    assert pts.shape == (5000, 3)
    assert np.all(np.linalg.norm(pts, axis=1) < 0.5)
    assert np.array_equal(pts, ball_samples(5000))
    assert ball_fraction(3) == pytest.approx(math.pi / 6)
    assert ball_fraction(2) == pytest.approx(math.pi / 4)


def test_chain_constraints():
    chain = chain_cover()
    assert chain.count == 17 and chain.radius == 0.25
    assert np.all(chain.steps() <= 0.25 + 1e-12)
    assert np.all(np.linalg.norm(chain.centers, axis=1) <= 0.5)
    assert chain.covered(chain.centers).all()
    with pytest.raises(ValueError):
        chain_cover(2)


def test_chain_covers_most_of_the_ball():
    chain = chain_cover()
    pts = ball_samples(100_000)
    frac = chain.covered(pts).mean()
    assert frac > 0.95
    # 17 quarter-balls cannot reach the whole sphere of radius 1/2
    assert chain.covering_radius(pts) > 0.25


def test_covering_radius_two_points():
    cover = ChainCover(np.array([[0.0, 0.0, 0.0], [0.2, 0.0, 0.0]]))
    assert cover.covering_radius([[0.5, 0.0, 0.0]]) == pytest.approx(0.3)
    assert cover.covered([[0.45, 0, 0], [0.46, 0, 0]]).tolist() == [True, False]


def test_chain_multiply():
    assert chain_multiply([2.0, 3.0, 1.5]) == pytest.approx(9.0)
    H = 1.37
    assert math.log(chain_multiply([H] * 17)) == pytest.approx(17 * math.log(H), rel=1e-14)
    with pytest.raises(ValueError):
        chain_multiply([2.0, 0.9])


@pytest.mark.parametrize("H, two_sided, theta, alpha", [
    (3.0, True, 0.5, 1.0),
    (2.0, False, 0.5, 1.0),
    (5.0, True, 2 / 3, math.log2(1.5)),
    (4.0, False, 0.75, math.log2(4 / 3)),
])
def test_osc_to_holder(H, two_sided, theta, alpha):
    rate = osc_to_holder(H, two_sided)
    assert rate.theta == pytest.approx(theta) and rate.alpha == pytest.approx(alpha)
    assert not rate.constant


def test_osc_to_holder_edge_cases():
    rate = osc_to_holder(1.0)
    assert rate.constant and rate.theta == 0 and math.isinf(rate.alpha)
    with pytest.raises(ValueError):
        osc_to_holder(0.5)


@given(H=st.floats(1.001, 1e6))
def test_holder_exponent_decreases_with_H(H):
    assert osc_to_holder(H).alpha > osc_to_holder(2 * H).alpha > 0


def test_theory_bounds():
    b = theory_bounds(ConstantsConfig(), 4.0)
    assert b.harnack_bound == pytest.approx(math.exp(2))
    assert b.holder_exponent_lb == pytest.approx(math.exp(-2))
    assert b.crossover_exponent == pytest.approx(0.25)
    assert b.crossover_cap == 1.0
    flat = theory_bounds(ConstantsConfig(C_H=0.0), 100.0)
    assert flat.harnack_bound == 1.0
    with pytest.raises(ValueError):
        theory_bounds(ConstantsConfig(), 0.5)
    with pytest.raises(ValueError):
        theory_bounds(ConstantsConfig(), 2.0, d=2)


@pytest.mark.parametrize("kwargs", [dict(C_H=-1), dict(c_cross=0), dict(gamma_d=-2), dict(dim=1)])
def test_constants_validated(kwargs):
    with pytest.raises(ValueError):
        ConstantsConfig(**kwargs)
