import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import SQUARE_CONES, SQUARE_RAYS, make
from toric_liouville.errors import DegenerateLattice, NonpositiveModulus, NotInterior
from toric_liouville.kahler import (
    TangentVector,
    TorusPoint,
    TwoFormMatrix,
    circle_action_complex,
    covariance,
    hamiltonian_field,
    infinitesimal_action,
    invert_moment_map,
    liouville_field,
    moment_map,
    moment_map_complex,
    omega_at,
    omega_complex,
    one_param_point,
    pair_complex,
    potential,
    tangent_to_complex,
    theta_at,
    theta_complex,
)

coord = st.floats(-2.0, 2.0)


def naive_moments(P, s):
    """Oracle: plain loops over lattice points in extended precision."""
    mp.mp.dps = 40
    w = [mp.e ** (2 * sum(mp.mpf(a) * b for a, b in zip(m, s))) for m in P.lattice_points]
    Z = sum(w)
    mu = [sum(wi * m[k] for wi, m in zip(w, P.lattice_points)) / Z for k in range(P.dim)]
    return float(mp.log(Z)), np.array([float(x) for x in mu])


def test_square_at_origin(square):
    assert potential(square, [0, 0]) == pytest.approx(math.log(9), abs=1e-14)
    assert np.allclose(moment_map(square, [0, 0]), 0, atol=1e-15)
    assert np.allclose(covariance(square, [0, 0]), np.diag([2 / 3, 2 / 3]), atol=1e-15)


def test_line_values(line):
    assert potential(line, [0.0]) == pytest.approx(math.log(3), abs=1e-15)
    mp.mp.dps = 30
    ref = mp.log(mp.e + 1 + 1 / mp.e)
    assert potential(line, [0.5]) == pytest.approx(float(ref), abs=1e-14)
    assert moment_map(line, [0.5])[0] == pytest.approx(float(2 * mp.sinh(1) / (2 * mp.cosh(1) + 1)), abs=1e-14)
    assert moment_map(line, [40.0])[0] == pytest.approx(1.0, abs=1e-14)
    assert covariance(line, [0.0])[0, 0] == pytest.approx(2 / 3, abs=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.lists(coord, min_size=2, max_size=2))
def test_potential_and_moment_match_naive(s):
    P = make(2, SQUARE_RAYS, SQUARE_CONES, [-1, -1, -2, -1])
    F, mu = naive_moments(P, s)
    assert potential(P, s) == pytest.approx(F, abs=1e-12)
    assert np.allclose(moment_map(P, s), mu, atol=1e-12)


def test_covariance_is_quarter_hessian(polytopes, rng):
    h = 1e-4
    for P in polytopes.values():
        n = P.dim
        for s in rng.uniform(-1.5, 1.5, size=(5, n)):
            H = np.zeros((n, n))
            E = np.eye(n) * h
            for i in range(n):
                for j in range(n):
                    H[i, j] = (
                        potential(P, s + E[i] + E[j])
                        - potential(P, s + E[i] - E[j])
                        - potential(P, s - E[i] + E[j])
                        + potential(P, s - E[i] - E[j])
                    ) / (4 * h * h)
            assert np.allclose(covariance(P, s), H / 4, atol=1e-6)


def test_moment_map_in_interior(polytopes, rng):
    for P in polytopes.values():
        for s in rng.uniform(-6, 6, size=(20, P.dim)):
            r = P.radial_coordinates(moment_map(P, s))
            assert np.all(r > 0)


def test_batch_evaluation_matches_pointwise(plane, rng):
    S = rng.normal(size=(7, 2))
    assert np.allclose(moment_map(plane, S), [moment_map(plane, s) for s in S])
    assert np.allclose(potential(plane, S), [potential(plane, s) for s in S])
    assert np.allclose(covariance(plane, S), [covariance(plane, s) for s in S])
    z = np.exp(S + 1j * rng.uniform(0, 6, size=S.shape))
    assert np.allclose(moment_map_complex(plane, z), moment_map(plane, S), atol=1e-13)


def test_theta_and_omega_examples(square, line):
    assert np.all(theta_at(square, TorusPoint([0, 0])).as_array() == 0)
    th = theta_at(line, TorusPoint([0.5]))
    assert th.dalpha_components[0] == pytest.approx(0.5752103826, abs=1e-9)
    om = omega_at(square, TorusPoint([0, 0]))
    X = TangentVector(np.array([1.0, 0]), np.zeros(2))
    Y = TangentVector(np.zeros(2), np.array([1.0, 0]))
    assert om(X, Y) == pytest.approx(4 / 3, abs=1e-14)
    assert om(Y, X) == pytest.approx(-4 / 3, abs=1e-14)


def test_omega_complex_matches_log_polar(polytopes, rng):
    for P in polytopes.values():
        for _ in range(5):
            p = TorusPoint(rng.uniform(-1, 1, P.dim), rng.uniform(0, 6, P.dim))
            assert np.allclose(omega_complex(P, p.to_complex()), omega_at(P, p).matrix(), atol=1e-13)


def test_theta_complex_matches_log_polar(plane, rng):
    for _ in range(10):
        p = TorusPoint(rng.uniform(-1, 1, 2), rng.uniform(0, 6, 2))
        X = TangentVector(rng.normal(size=2), rng.normal(size=2))
        lhs = pair_complex(theta_complex(plane, p.to_complex()), tangent_to_complex(p, X))
        assert abs(lhs.imag) < 1e-13
        assert lhs.real == pytest.approx(theta_at(plane, p)(X), abs=1e-12)


def test_circle_action_complex_agrees(rng):
    u = np.array([2.0, -1.0])
    p = TorusPoint(rng.normal(size=2), rng.uniform(0, 6, 2))
    X = infinitesimal_action(u, p)
    assert np.allclose(X.dalpha, u) and np.all(X.ds == 0)
    assert np.allclose(circle_action_complex(u, p.to_complex()), tangent_to_complex(p, X), atol=1e-13)


def test_hamiltonian_field_examples(square):
    p = TorusPoint([0, 0])
    X = hamiltonian_field(square, p, [4 / 3, 0])
    assert np.allclose(X.dalpha, [1, 0], atol=1e-14) and np.all(X.ds == 0)
    assert np.all(hamiltonian_field(square, p, [0, 0]).as_array() == 0)


def test_hamiltonian_field_satisfies_defining_equation(plane, rng):
    p = TorusPoint(rng.normal(size=2), rng.uniform(0, 6, 2))
    g = rng.normal(size=2)
    X = hamiltonian_field(plane, p, g)
    om = omega_at(plane, p)
    for k in range(4):
        e = np.eye(4)[k]
        Y = TangentVector(e[:2], e[2:])
        assert om(X, Y) == pytest.approx(-(g @ Y.ds), abs=1e-12)


def test_liouville_field_is_theta_dual(plane, rng):
    p = TorusPoint(rng.normal(size=2), rng.uniform(0, 6, 2))
    X = liouville_field(plane, p)
    om, th = omega_at(plane, p), theta_at(plane, p)
    for k in range(4):
        e = np.eye(4)[k]
        Y = TangentVector(e[:2], e[2:])
        assert om(X, Y) == pytest.approx(th(Y), abs=1e-12)


def test_one_param_point():
    p = one_param_point((1, 0), 1.0, 0.0)
    assert np.all(p.s == 0) and np.all(p.alpha == 0)
    assert np.allclose(one_param_point((1, 2), math.e, 0.0).s, [1, 2])
    assert np.allclose(one_param_point((1, 0), 1.0, math.pi).alpha, [math.pi, 0])
    with pytest.raises(NonpositiveModulus):
        one_param_point((1, 0), 0.0, 0.0)


def test_torus_point_complex_roundtrip(rng):
    z = rng.normal(size=3) + 1j * rng.normal(size=3)
    assert np.allclose(TorusPoint.from_complex(z).to_complex(), z)


def test_invert_examples(square, line):
    assert np.allclose(invert_moment_map(square, [0, 0]), 0, atol=1e-12)
    assert invert_moment_map(line, [moment_map(line, [0.5])[0]])[0] == pytest.approx(0.5, abs=1e-9)
    with pytest.raises(NotInterior):
        invert_moment_map(square, [1, 0])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-0.97, 0.97), min_size=2, max_size=2))
def test_invert_roundtrip(m):
    P = make(2, SQUARE_RAYS, SQUARE_CONES, [-1] * 4)
    s = invert_moment_map(P, m)
    assert np.allclose(moment_map(P, s), m, atol=1e-10)


def test_degenerate_lattice_rejected(square):
    from dataclasses import replace

    flat = replace(square, lattice_points=((0, 0), (1, 0)))
    with pytest.raises(DegenerateLattice):
        covariance(flat, [0, 0])
