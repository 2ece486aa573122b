import math
import warnings

import mpmath as mp
import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import PLANE_CONES, PLANE_RAYS, SQUARE_CONES, SQUARE_RAYS, make
from toric_liouville.errors import EpsilonOutOfRange, NegativeInput, PreconditionFailed, ToricError
from toric_liouville.kahler import TorusPoint, invert_moment_map
from toric_liouville.smoothing import (
    active_rays,
    bump,
    bump_d1,
    bump_d2,
    bump_params,
    classify_stratum,
    in_domain,
    inflection_point,
    min_slope,
    polyhedral_H,
    polyhedral_H_grad,
    quasi_uniform_directions,
    radial_level_solve,
    sample_level_set,
    smoothing_h,
    smoothing_h_grad,
)


_x, _e = sympy.symbols("x e", positive=True)
_q = sympy.exp(-_x**2 / (_e**2 * (_e**2 - _x**2)))
Q0, Q1, Q2 = (sympy.lambdify((_e, _x), sympy.diff(_q, _x, k), "mpmath") for k in range(3))


def q_mp(eps, x, order=0):
    """Oracle: symbolic derivatives of the closed form, evaluated at 40 digits."""
    mp.mp.dps = 40
    eps, x = mp.mpf(eps), mp.mpf(x)
    return (Q0, Q1, Q2)[order](eps, x) if x < eps else mp.mpf(0)


# -- bump function --------------------------------------------------------------

def test_bump_examples():
    for eps in (0.3, 0.5, 1.0, 2.0):
        assert bump(eps, 0.0) == 1.0
        assert bump(eps, eps) == 0.0
        assert bump(eps, eps + 1.0) == 0.0
    assert bump(1.0, 0.5) == pytest.approx(math.exp(-1 / 3), rel=1e-15)
    assert bump(1.0, 0.5) == pytest.approx(0.716531, abs=1e-6)


def test_bump_rejects_negative():
    for f in (bump, bump_d1, bump_d2):
        with pytest.raises(NegativeInput):
            f(0.5, -0.1)


@settings(max_examples=80, deadline=None)
@given(st.floats(0.1, 2.0), st.floats(0.0, 0.98))
def test_bump_derivatives_match_mpmath(eps, frac):
    x = frac * eps
    assert bump(eps, x) == pytest.approx(float(q_mp(eps, x)), rel=1e-12, abs=1e-300)
    assert bump_d1(eps, x) == pytest.approx(float(q_mp(eps, x, 1)), rel=1e-9, abs=1e-300)
    assert bump_d2(eps, x) == pytest.approx(float(q_mp(eps, x, 2)), rel=1e-8, abs=1e-300)


def test_bump_derivatives_finite_differences():
    x = np.linspace(0.01, 0.45, 40)
    h = 1e-6
    assert np.allclose(bump_d1(0.5, x), (bump(0.5, x + h) - bump(0.5, x - h)) / (2 * h), rtol=1e-6, atol=1e-8)
    assert np.allclose(bump_d2(0.5, x), (bump_d1(0.5, x + h) - bump_d1(0.5, x - h)) / (2 * h), rtol=1e-5, atol=1e-6)


def test_bump_vectorised_and_smooth_at_eps():
    x = np.linspace(0, 1.2, 50)
    assert bump(0.5, x).shape == x.shape
    near = 0.5 - 1e-6
    assert bump(0.5, near) == 0.0 or bump(0.5, near) < 1e-300
    assert bump_d1(0.5, near) == pytest.approx(0.0, abs=1e-300)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_bump_monotone_and_bounded(eps, a, b):
    lo, hi = sorted((a * eps * 1.2, b * eps * 1.2))
    assert 0.0 <= bump(eps, hi) <= bump(eps, lo) <= 1.0


# -- inflection point ---------------------------------------------------------

def test_inflection_examples():
    assert inflection_point(0.5) == pytest.approx(0.196660, abs=1e-6)
    assert inflection_point(0.5) ** 2 == pytest.approx((-1.5 + math.sqrt(3.0)) / 6, rel=1e-14)
    with pytest.warns(EpsilonOutOfRange):
        x1 = inflection_point(1.0)
    assert x1 == pytest.approx(3 ** -0.25, abs=1e-12)
    with pytest.raises(ToricError):
        inflection_point(0.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 0.99))
def test_inflection_point_is_argmin_of_slope(eps):
    """Oracle: dense scan of q' on [0, eps), then compare argmin and the sign change of q''."""
    x = inflection_point(eps)
    grid = np.linspace(0, eps, 20001)[:-1]
    i = int(np.argmin(bump_d1(eps, grid)))
    assert abs(grid[i] - x) <= 2 * (grid[1] - grid[0])
    assert bump_d2(eps, x * (1 - 1e-6)) < 0 < bump_d2(eps, x * (1 + 1e-6))
    grid_max = -bump_d1(eps, grid).min()
    assert grid_max <= min_slope(eps) * (1 + 1e-12)
    assert min_slope(eps) == pytest.approx(grid_max, rel=1e-6)


def test_min_slope_value():
    assert min_slope(0.5) == pytest.approx(4.235640, abs=1e-6)
    assert min_slope(1.0) == pytest.approx(2.17036, abs=1e-5)


# -- smoothing function ---------------------------------------------------------

def test_bump_params(square):
    e = bump_params(square, 0.5)
    assert e.epsilon == (0.5,) * 4 and e.contact_admissible
    assert not bump_params(square, 1.2).contact_admissible
    assert bump_params(square, [0.1, 0.2, 0.3, 0.4]).epsilon == (0.1, 0.2, 0.3, 0.4)
    with pytest.raises(ToricError):
        bump_params(square, [0.1, 0.2])
    with pytest.raises(ToricError):
        bump_params(square, -1)


def test_h_examples(square, plane):
    e = bump_params(square, 0.5)
    assert smoothing_h(square, e, [0.0, 0.0]) == 0.0
    assert smoothing_h(square, e, [0.75, 0.0]) == pytest.approx(math.exp(-4 / 3), rel=1e-14)
    assert smoothing_h(square, e, [0.75, 0.0]) == pytest.approx(0.263597, abs=1e-6)
    ep = bump_params(plane, 0.5)
    for v in plane.vertices:
        assert smoothing_h(plane, ep, v) >= 2.0
    with pytest.raises(NegativeInput):
        smoothing_h(square, e, [1.5, 0.0])


def test_h_gradient_matches_finite_differences(polytopes, rng):
    for P in polytopes.values():
        e = bump_params(P, 0.7)
        for _ in range(20):
            m = rng.uniform(-1, 1, P.dim)
            if not np.all(P.radial_coordinates(m) > 1e-3):
                continue
            g = smoothing_h_grad(P, e, m)
            fd = np.array(
                [(smoothing_h(P, e, m + 1e-6 * d) - smoothing_h(P, e, m - 1e-6 * d)) / 2e-6 for d in np.eye(P.dim)]
            )
            assert np.allclose(g, fd, atol=1e-5)


# -- level sets -------------------------------------------------------------------

def test_radial_solve_closed_form(square):
    e = bump_params(square, 0.5)
    t = radial_level_solve(square, e, [1, 0], 0.5)
    # q_0.5(x) = 1/2  <=>  x^2 / (0.25 (0.25 - x^2)) = ln 2
    x = math.sqrt((math.log(2) / 16) / (1 + math.log(2) / 4))
    assert t == pytest.approx(1 - x, abs=1e-11)
    assert smoothing_h(square, e, [t, 0]) == pytest.approx(0.5, abs=1e-9)


def test_radial_solve_near_one_and_absent(square, plane):
    e = bump_params(square, 0.5)
    for v in quasi_uniform_directions(2, 24):
        t = radial_level_solve(square, e, v, 0.999)
        assert t is not None and t < square.exit_radius(v)
    v = np.array([1.0, 0.0])
    assert radial_level_solve(square, e, v, 1.5) is None
    ts = np.linspace(0, square.exit_radius(v), 2001)
    assert max(smoothing_h(square, e, t * v) for t in ts) < 1.5
    with pytest.raises(ToricError):
        radial_level_solve(square, e, v, 0.0)
    with pytest.raises(PreconditionFailed):
        radial_level_solve(square, bump_params(square, 1.5), v, 0.5)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_level_radius_monotone_in_delta(angle, d1, d2):
    P = make(2, PLANE_RAYS, PLANE_CONES, [-1] * 3)
    e = bump_params(P, 0.5)
    v = np.array([math.cos(angle), math.sin(angle)])
    lo, hi = sorted((d1, d2))
    t_lo = radial_level_solve(P, e, v, lo)
    t_hi = radial_level_solve(P, e, v, hi)
    assert t_lo <= t_hi + 1e-12


def test_sample_level_set_symmetry(square):
    e = bump_params(square, 0.5)
    S = sample_level_set(square, e, 0.5, 360)
    assert S.present.all()
    r = S.radii
    for k in (90, 180, 270):
        assert np.allclose(r, np.roll(r, k), atol=1e-10)
    assert np.allclose(r, r[(-np.arange(360)) % 360], atol=1e-10)  # mirror symmetry
    assert len(sample_level_set(square, e, 0.5, 0).radii) == 0


def test_dashed_level_one_reaches_boundary(plane):
    e = bump_params(plane, 0.5)
    S = sample_level_set(plane, e, 1.0, 90)
    assert S.present.all()
    h = smoothing_h(plane, e, S.points)
    assert np.all(np.abs(h - 1.0) < 1e-6)
    # along facet-interior directions the level-one curve lies at the boundary
    gap = np.array([plane.exit_radius(v) - t for v, t in zip(S.directions, S.radii)])
    assert gap.min() < 1e-6


def test_quasi_uniform_directions():
    for n, c in [(1, 2), (2, 12), (3, 50), (4, 33)]:
        D = quasi_uniform_directions(n, c)
        assert D.shape == (c, n)
        assert np.allclose(np.linalg.norm(D, axis=1), 1)
        assert np.array_equal(D, quasi_uniform_directions(n, c))
    D = quasi_uniform_directions(3, 400)
    assert np.abs(D.mean(axis=0)).max() < 0.01


# -- strata and H ---------------------------------------------------------------------

def test_classify_examples(square):
    e = bump_params(square, 0.5)
    assert classify_stratum(square, e, [0, 0]).cone.dim == 0
    lab = classify_stratum(square, e, [0.75, 0])
    assert lab.cone.rays == frozenset({2}) and square.normals[2] == (-1, 0)
    lab = classify_stratum(square, e, [0.75, -0.8])
    assert lab.cone.rays == frozenset({1, 2})  # u = (0, 1) and u = (-1, 0)
    big = bump_params(square, 1.9)
    with pytest.warns(RuntimeWarning):
        lab = classify_stratum(square, big, [0.5, 0.5])
    assert not lab.is_stratum and lab.active == frozenset({0, 1, 2, 3})


@settings(max_examples=60, deadline=None)
@given(st.floats(-0.99, 0.99), st.floats(-0.99, 0.99))
def test_strata_partition_for_admissible_eps(a, b):
    """For eps <= half the width every point of the square lies on exactly one stratum."""
    P = make(2, SQUARE_RAYS, SQUARE_CONES, [-1] * 4)
    e = bump_params(P, 0.5)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        lab = classify_stratum(P, e, [a, b])
    assert lab.cone.rays == active_rays(P, e, [a, b])


def test_polyhedral_H(square):
    e = bump_params(square, 0.5)
    assert polyhedral_H(square, e, TorusPoint([0, 0])) == 0.0
    s = invert_moment_map(square, [0.75, 0])
    assert polyhedral_H(square, e, TorusPoint(s, [1.0, 2.0])) == pytest.approx(0.263597, abs=1e-6)
    assert in_domain(square, e, 0.3, TorusPoint(s))
    assert not in_domain(square, e, 0.2, TorusPoint(s))


def test_polyhedral_H_grad_fd(plane, rng):
    e = bump_params(plane, 0.5)
    for s in rng.uniform(-1.5, 1.5, size=(20, 2)):
        g = polyhedral_H_grad(plane, e, s)
        fd = np.array([(polyhedral_H(plane, e, s + 1e-6 * d) - polyhedral_H(plane, e, s - 1e-6 * d)) / 2e-6 for d in np.eye(2)])
        assert np.allclose(g, fd, atol=1e-6)
