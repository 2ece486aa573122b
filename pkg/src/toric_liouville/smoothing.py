"""Bump functions, the smoothing function h and the polyhedral Hamiltonian H = h o mu."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import EpsilonOutOfRange, NegativeInput, PreconditionFailed, ToricError
from .kahler import TorusPoint, covariance, moment_map
from .lattice_fan import Cone, SectionPolytope

LEVEL_TOL = 1e-12
LEVEL_MAX_ITER = 200


@dataclass(frozen=True)
class BumpParams:
    """Per-ray smoothing parameters epsilon_rho > 0."""

    epsilon: tuple
    contact_admissible: bool

    @property
    def array(self) -> np.ndarray:
        return np.array(self.epsilon, dtype=float)


def bump_params(P: SectionPolytope, epsilon) -> BumpParams:
    """Broadcast a scalar or per-ray list; records eps_rho < -r phi(u_rho) for all rho."""
    nr = len(P.facets)
    if np.ndim(epsilon) == 0:
        eps = (float(epsilon),) * nr
    else:
        eps = tuple(float(e) for e in epsilon)
        if len(eps) == 1:
            eps = eps * nr
    if len(eps) != nr:
        raise ToricError(f"expected {nr} smoothing parameters, got {len(eps)}")
    if any(not (e > 0 and math.isfinite(e)) for e in eps):
        raise ToricError("smoothing parameters must be positive and finite")
    admissible = all(e < -float(b) for e, b in zip(eps, P.offsets))
    return BumpParams(eps, admissible)


# ---------------------------------------------------------------------------
# The bump function q_eps and its derivatives
# ---------------------------------------------------------------------------

def _check_nonneg(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise NegativeInput("bump functions are defined on [0, inf)")
    return x


def _exponent(eps, x, inside):
    d = (eps - x) * (eps + x)
    return np.where(inside, -x * x / (eps * eps * np.where(inside, d, 1.0)), -np.inf), d


def bump(eps, x):
    """q_eps(x) = exp(-x^2 / (eps^2 (eps^2 - x^2))) on [0, eps), 0 beyond."""
    x = _check_nonneg(x)
    inside = x < eps
    E, _ = _exponent(eps, x, inside)
    out = np.where(inside, np.exp(E), 0.0)
    return float(out) if out.ndim == 0 else out


def bump_d1(eps, x):
    """q'(x) = -q(x) 2x / (eps^2 - x^2)^2, evaluated in log space."""
    x = _check_nonneg(x)
    inside = (x < eps) & (x > 0)
    E, d = _exponent(eps, x, inside)
    safe_x = np.where(inside, x, 1.0)
    safe_d = np.where(inside, d, 1.0)
    val = -np.exp(E + np.log(2.0 * safe_x) - 2.0 * np.log(safe_d))
    out = np.where(inside, val, 0.0)
    return float(out) if out.ndim == 0 else out


def _g(eps, x):
    return 3.0 * x**4 + (2.0 - 2.0 * eps**2) * x**2 - eps**4


def bump_d2(eps, x):
    """q''(x) = 2 q(x) g(x) / (eps^2 - x^2)^4 with g = 3x^4 + (2 - 2eps^2)x^2 - eps^4."""
    x = _check_nonneg(x)
    inside = x < eps
    E, d = _exponent(eps, x, inside)
    g = _g(eps, x)
    safe_d = np.where(inside, d, 1.0)
    mag = np.exp(E + np.log(np.maximum(np.abs(g), 1e-300)) - 4.0 * np.log(safe_d))
    out = np.where(inside, 2.0 * np.sign(g) * mag, 0.0)
    return float(out) if out.ndim == 0 else out


def _bisect(f, lo, hi, tol=1e-15, max_iter=200):
    flo = f(lo)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol * max(1.0, abs(mid)):
            break
        fm = f(mid)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def inflection_point(eps: float) -> float:
    """The x in (0, eps) where q'' changes sign and q' is minimal.

    The biquadratic g gives x^2 = (2eps^2 - 2 + sqrt(16eps^4 - 8eps^2 + 4)) / 6.
    For eps >= 1 the monotonicity argument behind that closed form no longer
    applies; we warn and bisect on the sign of g instead.
    """
    eps = float(eps)
    if not eps > 0:
        raise ToricError("epsilon must be positive")
    if eps >= 1.0:
        warnings.warn(f"epsilon={eps} >= 1: inflection point found by bisection", EpsilonOutOfRange, stacklevel=2)
        return _bisect(lambda x: _g(eps, x), 0.0, eps)
    x2 = (2.0 * eps**2 - 2.0 + math.sqrt(16.0 * eps**4 - 8.0 * eps**2 + 4.0)) / 6.0
    return math.sqrt(x2)


def min_slope(eps: float) -> float:
    """-q'(x_eps): the largest slope |q'| attains on [0, eps)."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EpsilonOutOfRange)
        return -bump_d1(eps, inflection_point(eps))


# ---------------------------------------------------------------------------
# Smoothing function on the polytope
# ---------------------------------------------------------------------------

def _radial(P: SectionPolytope, m, weak_tol=1e-9):
    r = P.radial_coordinates(m)
    if np.any(r < -weak_tol):
        raise NegativeInput("point lies outside the section polytope")
    return np.maximum(r, 0.0)


def smoothing_h(P: SectionPolytope, eps: BumpParams, m):
    """h(m) = sum_rho q_eps_rho(r_rho(m)); accepts (..., n)."""
    r = _radial(P, m)
    e = eps.array
    return bump(e, r).sum(axis=-1)


def smoothing_h_grad(P: SectionPolytope, eps: BumpParams, m) -> np.ndarray:
    """grad h(m) = sum_rho q'(r_rho(m)) u_rho."""
    r = _radial(P, m)
    return bump_d1(eps.array, r) @ P.normals_array


def radial_level_solve(P: SectionPolytope, eps: BumpParams, v, delta: float,
                       tol: float = LEVEL_TOL, max_iter: int = LEVEL_MAX_ITER) -> float | None:
    """Radius t with h(t v) = delta along the unit direction v, or None (absent).

    h is nondecreasing along rays from the origin, so bisection on [0, L_v]
    is unconditionally convergent.
    """
    if not delta > 0:
        raise ToricError("level must be positive")
    _require_origin_in_zero_set(P, eps)
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    L = P.exit_radius(v)
    if smoothing_h(P, eps, L * v) < delta:
        return None
    lo, hi = 0.0, L
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if smoothing_h(P, eps, mid * v) < delta:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _require_origin_in_zero_set(P, eps):
    if np.any(-P.offsets_array < eps.array):
        raise PreconditionFailed("origin is not in the zero set of h (need eps_rho <= -r phi(u_rho))")


def quasi_uniform_directions(n: int, count: int) -> np.ndarray:
    """Deterministic, evenly spread unit vectors in R^n."""
    if count <= 0:
        return np.zeros((0, n))
    if n == 1:
        return np.array([[1.0], [-1.0]][: min(count, 2)])
    if n == 2:
        ang = 2.0 * math.pi * np.arange(count) / count
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    if n == 3:
        i = np.arange(count) + 0.5
        zc = 1.0 - 2.0 * i / count
        phi = math.pi * (3.0 - math.sqrt(5.0)) * i
        rr = np.sqrt(1.0 - zc * zc)
        return np.stack([rr * np.cos(phi), rr * np.sin(phi), zc], axis=1)
    from scipy.stats import norm, qmc

    pts = qmc.Halton(d=n, scramble=False).random(count + 1)[1:]
    g = norm.ppf(pts)
    return g / np.linalg.norm(g, axis=1, keepdims=True)


@dataclass(frozen=True)
class LevelSetSample:
    delta: float
    directions: np.ndarray
    radii: np.ndarray  # nan where the level is absent along that direction
    points: np.ndarray  # nan rows where absent

    @property
    def present(self) -> np.ndarray:
        return np.isfinite(self.radii)


def sample_level_set(P: SectionPolytope, eps: BumpParams, delta: float, n_dirs: int) -> LevelSetSample:
    dirs = quasi_uniform_directions(P.dim, n_dirs)
    radii = np.full(len(dirs), np.nan)
    for i, v in enumerate(dirs):
        t = radial_level_solve(P, eps, v, delta)
        if t is not None:
            radii[i] = t
    return LevelSetSample(float(delta), dirs, radii, dirs * radii[:, None])


# ---------------------------------------------------------------------------
# Strata and the polyhedral Hamiltonian
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StratumLabel:
    """Either a cone of the fan, or ``cone=None`` when the active rays span no cone."""

    cone: Cone | None
    active: frozenset

    @property
    def is_stratum(self) -> bool:
        return self.cone is not None


def active_rays(P: SectionPolytope, eps: BumpParams, m) -> frozenset:
    r = P.radial_coordinates(m)
    e = eps.array
    return frozenset(int(i) for i in np.nonzero((r > 0) & (r < e))[0])


def classify_stratum(P: SectionPolytope, eps: BumpParams, m) -> StratumLabel:
    """Cone sigma with sigma(1) = {rho : 0 < r_rho(m) < eps_rho}, if it exists."""
    act = active_rays(P, eps, m)
    cone = P.fan.cone(act)
    if cone is None:
        warnings.warn(
            f"active rays {sorted(act)} span no cone: epsilon outside the partition regime",
            RuntimeWarning,
            stacklevel=2,
        )
    return StratumLabel(cone, act)


def polyhedral_H(P: SectionPolytope, eps: BumpParams, p) -> float:
    """H = h o mu; depends on the point only through s."""
    s = p.s if isinstance(p, TorusPoint) else np.asarray(p, dtype=float)
    return smoothing_h(P, eps, moment_map(P, s))


def polyhedral_H_grad(P: SectionPolytope, eps: BumpParams, p) -> np.ndarray:
    """s-gradient of H by the chain rule: 2 C(s) grad h(mu(s))."""
    s = p.s if isinstance(p, TorusPoint) else np.asarray(p, dtype=float)
    return 2.0 * covariance(P, s) @ smoothing_h_grad(P, eps, moment_map(P, s))


def in_domain(P: SectionPolytope, eps: BumpParams, delta: float, p) -> bool:
    """Membership in the sublevel set {H <= delta}."""
    return bool(polyhedral_H(P, eps, p) <= delta)
