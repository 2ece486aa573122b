"""Numerical checks of the wrapping, distortion, contact and exact-torus identities.

Every check returns a report with a ``to_dict`` method.  With ``strict=True``
(the default) a failed check raises; with ``strict=False`` the failure is only
recorded in the report, which is what the command line uses to aggregate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import HypothesisUnmet, InadmissibleEpsilon, NonPositive, NotInterior, ToleranceExceeded, ToricError
from .kahler import (
    TWO_PI,
    TorusPoint,
    circle_action_complex,
    invert_moment_map,
    liouville_field,
    moment_map,
    one_param_point,
    pair_complex,
    theta_at,
    theta_complex,
    infinitesimal_action,
)
from .lattice_fan import SectionPolytope
from .smoothing import BumpParams, bump_d1, polyhedral_H, sample_level_set

IDENTITY_TOL = 1e-8
LIMIT_TOL = 1e-2
BOUNDARY_R = 1e-6  # radial samples this close to a facet lie on the boundary of P, outside mu's image


# ---------------------------------------------------------------------------
# Wrapping and lattice averages
# ---------------------------------------------------------------------------

def wrapping_numeric(P: SectionPolytope, rho: int, a: float, n_quad: int = 128) -> float:
    """Trapezoid rule for the integral of theta over beta -> lambda_u(a e^{i beta}).

    theta is evaluated from its complex-coordinate formula and paired with
    the curve's velocity dz_k/dbeta = i u_k z_k.
    """
    if not a > 0:
        raise ToricError("radius must be positive")
    if n_quad < 16:
        raise ToricError("use at least 16 quadrature nodes")
    u = np.asarray(P.normals[rho], dtype=float)
    beta = TWO_PI * np.arange(n_quad) / n_quad
    z = np.stack([one_param_point(u, a, b).to_complex() for b in beta])
    velocity = 1j * u * z
    vals = pair_complex(theta_complex(P, z), velocity)
    return float(np.real(vals).sum() * TWO_PI / n_quad)


def lattice_average(P: SectionPolytope, rho: int, a: float) -> np.ndarray:
    """Average lattice point with weights a^(2 <m, u_rho>), computed in log space."""
    if not a > 0:
        raise ToricError("radius must be positive")
    u = np.asarray(P.normals[rho], dtype=float)
    e = 2.0 * math.log(a) * (P.lattice @ u)
    w = np.exp(e - e.max())
    return (w @ P.lattice) / w.sum()


def wrapping_closed_form(P: SectionPolytope, rho: int, a: float) -> float:
    return TWO_PI * float(lattice_average(P, rho, a) @ np.asarray(P.normals[rho], dtype=float))


@dataclass(frozen=True)
class WrappingReport:
    ray: int
    radii: tuple
    numeric: tuple
    closed_form: tuple
    gaps: tuple
    tol: float
    n_quad: int

    @property
    def passed(self) -> bool:
        return max(self.gaps) < self.tol

    def to_dict(self):
        return {
            "ray": self.ray,
            "radii": list(self.radii),
            "numeric": list(self.numeric),
            "closed_form": list(self.closed_form),
            "gaps": list(self.gaps),
            "tol": self.tol,
            "n_quad": self.n_quad,
            "passed": self.passed,
        }


def check_wrapping_average(
    P: SectionPolytope, rho: int, radii, tol: float = IDENTITY_TOL, n_quad: int = 128, strict: bool = True
) -> WrappingReport:
    radii = tuple(float(a) for a in radii)
    if any(not a > 0 for a in radii):
        raise ToricError("radii must be positive")
    num = tuple(wrapping_numeric(P, rho, a, n_quad) for a in radii)
    cf = tuple(wrapping_closed_form(P, rho, a) for a in radii)
    gaps = tuple(abs(x - y) for x, y in zip(num, cf))
    rep = WrappingReport(rho, radii, num, cf, gaps, tol, n_quad)
    if strict and not rep.passed:
        i = int(np.argmax(gaps))
        raise ToleranceExceeded(f"wrapping gap {gaps[i]:.3e} at a={radii[i]}", worst=(radii[i], gaps[i]))
    return rep


@dataclass(frozen=True)
class InfinitesimalReport:
    ray: int
    a_small: float
    numeric: float
    target: float  # 2 pi r phi(u_rho)
    gap: float
    tol: float
    lattice_minimum: int
    offset: int  # r phi(u_rho), exact

    @property
    def exact_identity(self) -> bool:
        return self.lattice_minimum == self.offset

    @property
    def passed(self) -> bool:
        return self.exact_identity and self.gap < self.tol

    def to_dict(self):
        return {
            "ray": self.ray,
            "a_small": self.a_small,
            "numeric": self.numeric,
            "target": self.target,
            "gap": self.gap,
            "tol": self.tol,
            "lattice_minimum": self.lattice_minimum,
            "r_phi_u": self.offset,
            "exact_identity": self.exact_identity,
            "passed": self.passed,
        }


def lattice_minimum(P: SectionPolytope, rho: int) -> int:
    """min over lattice points of <m, u_rho>, in integer arithmetic."""
    u = P.normals[rho]
    return min(sum(a * b for a, b in zip(m, u)) for m in P.lattice_points)


def infinitesimal_wrapping(
    P: SectionPolytope, rho: int, a_small: float = 1e-3, tol: float = LIMIT_TOL, n_quad: int = 128, strict: bool = True
) -> InfinitesimalReport:
    if not 0 < a_small <= 1e-2:
        raise ToricError("a_small must lie in (0, 1e-2]")
    offset = int(P.offsets[rho])
    num = wrapping_numeric(P, rho, a_small, n_quad)
    target = TWO_PI * offset
    rep = InfinitesimalReport(rho, a_small, num, target, abs(num - target), tol, lattice_minimum(P, rho), offset)
    if strict and not rep.passed:
        raise ToleranceExceeded(
            f"infinitesimal wrapping failed on ray {rho}: gap {rep.gap:.3e}, "
            f"lattice minimum {rep.lattice_minimum} vs r phi(u) = {offset}",
            worst=(a_small, rep.gap),
        )
    return rep


# ---------------------------------------------------------------------------
# Distortion constant
# ---------------------------------------------------------------------------

def _random_points(P: SectionPolytope, rng: np.random.Generator, count: int, spread: float = 1.5):
    s = rng.uniform(-spread, spread, size=(count, P.dim))
    alpha = rng.uniform(0.0, TWO_PI, size=(count, P.dim))
    return s, alpha


@dataclass(frozen=True)
class DistortionReport:
    ray: int
    n_samples: int
    seed: int
    mean: float
    max_abs: float
    std: float
    tol: float

    @property
    def passed(self) -> bool:
        return abs(self.mean) < self.tol and self.max_abs < self.tol

    def to_dict(self):
        return {
            "ray": self.ray,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "mean": self.mean,
            "max_abs": self.max_abs,
            "std": self.std,
            "tol": self.tol,
            "passed": self.passed,
        }


def distortion_constant(
    P: SectionPolytope, rho: int, n_samples: int = 100, seed: int = 0, tol: float = 1e-9, strict: bool = True
) -> DistortionReport:
    """theta(X_u) - <mu, u> at random points, theta taken from the complex formula.

    X_u is built from the real-coordinate expression of the circle action and
    mu from the log-polar moment map, so the two sides share no code.
    """
    if n_samples < 1:
        raise ToricError("need at least one sample")
    u = np.asarray(P.normals[rho], dtype=float)
    rng = np.random.default_rng(seed)
    s, alpha = _random_points(P, rng, n_samples)
    z = np.exp(s + 1j * alpha)
    lhs = np.real(pair_complex(theta_complex(P, z), circle_action_complex(u, z)))
    rhs = moment_map(P, s) @ u
    dev = lhs - rhs
    rep = DistortionReport(rho, n_samples, seed, float(dev.mean()), float(np.abs(dev).max()), float(dev.std()), tol)
    if strict and not rep.passed:
        raise ToleranceExceeded(f"distortion {rep.max_abs:.3e} on ray {rho}", worst=(rho, rep.max_abs))
    return rep


# ---------------------------------------------------------------------------
# Contact positivity
# ---------------------------------------------------------------------------

def check_hypotheses(P: SectionPolytope, eps: BumpParams) -> None:
    """phi(u_rho) < 0 and eps_rho < -r phi(u_rho) for every ray."""
    bad = [i for i, b in enumerate(P.offsets) if not b < 0]
    if bad:
        raise HypothesisUnmet(f"phi(u_rho) must be negative for every ray; fails on rays {bad}")
    bad = [i for i, (e, b) in enumerate(zip(eps.epsilon, P.offsets)) if not e < -b]
    if bad:
        raise InadmissibleEpsilon(f"need eps_rho < -r phi(u_rho); fails on rays {bad}")


def theta_of_XH(P: SectionPolytope, eps: BumpParams, p: TorusPoint) -> float:
    """theta(X_H) = sum_rho q'(r_rho(mu)) theta(X_{u_rho})."""
    th = theta_at(P, p)
    r = P.radial_coordinates(moment_map(P, p.s))
    q1 = bump_d1(eps.array, np.maximum(r, 0.0))
    return float(sum(c * th(infinitesimal_action(u)) for c, u in zip(q1, P.normals_array) if c != 0.0))


def dH_of_Xtheta(P: SectionPolytope, eps: BumpParams, p: TorusPoint, step: float = 1e-3) -> float:
    """dH(X_theta) by a five-point difference of H along the omega-dual of theta."""
    X = liouville_field(P, p).ds
    norm = float(np.linalg.norm(X))
    if norm == 0.0:
        return 0.0
    e = X / norm
    h = step

    def H(t):
        return polyhedral_H(P, eps, p.s + t * e)

    deriv = (-H(2 * h) + 8 * H(h) - 8 * H(-h) + H(-2 * h)) / (12 * h)
    return float(deriv * norm)


@dataclass(frozen=True)
class ContactLevel:
    delta: float
    count: int
    minimum: float
    route_gap: float  # max |theta(X_H) - dH(X_theta)|
    worst_point: tuple
    boundary_skipped: int = 0

    def to_dict(self):
        return {
            "delta": self.delta,
            "samples": self.count,
            "boundary_skipped": self.boundary_skipped,
            "min_theta_XH": self.minimum,
            "max_route_gap": self.route_gap,
            "argmin_m": list(self.worst_point),
        }


@dataclass(frozen=True)
class ContactReport:
    levels: tuple
    admissible: bool
    seed: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.admissible and all(lv.minimum > 0 and lv.route_gap < self.tol for lv in self.levels)

    def to_dict(self):
        return {
            "admissible": self.admissible,
            "seed": self.seed,
            "route_tol": self.tol,
            "levels": [lv.to_dict() for lv in self.levels],
            "passed": self.passed,
        }


def contact_check(
    P: SectionPolytope,
    eps: BumpParams,
    deltas,
    n_samples: int = 300,
    seed: int = 0,
    tol: float = IDENTITY_TOL,
    strict: bool = True,
) -> ContactReport:
    """Sample H^{-1}(delta) and check theta(X_H) > 0 by two independent routes.

    For delta >= 1 the radial solver can return points of the boundary of P
    (facet interiors carry h = 1); those are not in the image of the moment
    map and are skipped and counted.
    """
    check_hypotheses(P, eps)
    rng = np.random.default_rng(seed)
    levels = []
    for delta in deltas:
        delta = float(delta)
        if not delta > 0:
            raise ToricError("levels must be positive")
        sample = sample_level_set(P, eps, delta, n_samples)
        found = sample.points[sample.present]
        interior = P.radial_coordinates(found).min(axis=1) > BOUNDARY_R
        vals, gaps, pts = [], [], []
        for m in found[interior]:
            s = invert_moment_map(P, m)
            p = TorusPoint(s, rng.uniform(0.0, TWO_PI, P.dim))
            a = theta_of_XH(P, eps, p)
            b = dH_of_Xtheta(P, eps, p)
            vals.append(a)
            gaps.append(abs(a - b) / max(1.0, abs(a)))
            pts.append(m)
        if not vals:
            raise ToricError(f"no level-set points found for delta={delta}")
        i = int(np.argmin(vals))
        lv = ContactLevel(
            delta, len(vals), float(vals[i]), float(max(gaps)), tuple(float(x) for x in pts[i]), int((~interior).sum())
        )
        levels.append(lv)
        if strict and not lv.minimum > 0:
            raise NonPositive(f"theta(X_H) = {lv.minimum:.3e} at delta={delta}", point=lv.worst_point)
        if strict and not lv.route_gap < tol:
            raise ToleranceExceeded(f"route gap {lv.route_gap:.3e} at delta={delta}", worst=(delta, lv.route_gap))
    return ContactReport(tuple(levels), True, seed, tol)


# ---------------------------------------------------------------------------
# Exact central torus
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TorusReport:
    s_star: tuple
    max_log_polar: float  # max |theta(d/d alpha_k)| from mu(s*)
    max_complex: float  # same components from the complex formula
    n_angles: int
    tol: float

    @property
    def passed(self) -> bool:
        return max(self.max_log_polar, self.max_complex) < self.tol

    def to_dict(self):
        return {
            "s_star": list(self.s_star),
            "max_dalpha_component_log_polar": self.max_log_polar,
            "max_dalpha_component_complex": self.max_complex,
            "n_angles": self.n_angles,
            "tol": self.tol,
            "passed": self.passed,
        }


def exact_torus_check(
    P: SectionPolytope, tol: float = 1e-10, n_angles: int = 16, seed: int = 0, strict: bool = True
) -> TorusReport:
    """theta vanishes on mu^{-1}(0) when 0 is an interior point of P."""
    zero = [Fraction(0)] * P.dim
    if not P.contains(zero, strict=True):
        raise NotInterior("0 is not an interior point of P; origin normalisation failed")
    s = invert_moment_map(P, np.zeros(P.dim))
    rng = np.random.default_rng(seed)
    lp, cx = 0.0, 0.0
    n = P.dim
    for _ in range(n_angles):
        p = TorusPoint(s, rng.uniform(0.0, TWO_PI, n))
        lp = max(lp, float(np.abs(theta_at(P, p).dalpha_components).max()))
        z = p.to_complex()
        coeffs = theta_complex(P, z)
        for k in range(n):
            dz = np.zeros(n, dtype=complex)
            dz[k] = 1j * z[k]
            cx = max(cx, abs(pair_complex(coeffs, dz)))
    rep = TorusReport(tuple(float(x) for x in s), lp, cx, n_angles, tol)
    if strict and not rep.passed:
        raise ToleranceExceeded(f"theta on mu^-1(0) is {max(lp, cx):.3e}", worst=(0.0, max(lp, cx)))
    return rep
