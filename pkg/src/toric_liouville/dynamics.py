"""Hamiltonian dynamics of H = h o mu: strata fields, orbit families, supports and periods.

Angles are in radians, so the circle action generated by a lattice vector u
has period 2pi.  Periods of orbits are reported in turns (units of 2pi) to
match the usual (R/Z)^n convention, alongside the physical flow time.
"""
from __future__ import annotations

import functools
import itertools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq, least_squares, linprog, minimize_scalar

from ._exact import frac_str, linprog_exact, nullspace, primitive, rref, solve_affine, to_fraction
from .errors import NoStratumPoint, NotOnFamily, ToricError
from .kahler import TWO_PI, TorusPoint, covariance, moment_map, moment_map_complex
from .lattice_fan import Cone, SectionPolytope, period_of_lattice_point, period_of_rational_slope
from .smoothing import (
    BumpParams,
    bump_d1,
    classify_stratum,
    inflection_point,
    min_slope,
    smoothing_h,
    smoothing_h_grad,
)

FAMILY_TOL = 1e-8  # |q'(r_rho(mu)) + d_rho| threshold for membership
FEASIBILITY_MARGIN = 1e-9  # open inequalities must hold with this slack


def _stratum(P: SectionPolytope, eps: BumpParams, s) -> Cone:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        label = classify_stratum(P, eps, moment_map(P, s))
    if label.cone is None:
        raise NoStratumPoint(f"active rays {sorted(label.active)} span no cone")
    return label.cone


def field_analytic(P: SectionPolytope, eps: BumpParams, p: TorusPoint) -> np.ndarray:
    """Angular velocity of X_H on its stratum: sum_{rho in sigma(1)} q'(r_rho(mu)) u_rho.

    The s-component of X_H vanishes identically, so only alpha-dot is returned.
    """
    sigma = _stratum(P, eps, p.s)
    rate = np.zeros(P.dim)
    if not sigma.rays:
        return rate
    idx = sorted(sigma.rays)
    r = P.radial_coordinates(moment_map(P, p.s))[idx]
    q1 = bump_d1(eps.array[idx], r)
    return q1 @ P.normals_array[idx]


def field_omega(P: SectionPolytope, eps: BumpParams, p: TorusPoint, dH=None) -> np.ndarray:
    """(s-dot, alpha-dot) solving omega(X, .) = -dH with the full 2n x 2n form.

    ``dH`` is the differential in (s, alpha) coordinates; by default the
    s-part is the chain-rule gradient 2 C grad h(mu) and the alpha-part is zero.
    """
    n = P.dim
    C = covariance(P, p.s)
    if dH is None:
        dH = np.concatenate([2.0 * C @ smoothing_h_grad(P, eps, moment_map(P, p.s)), np.zeros(n)])
    Om = np.zeros((2 * n, 2 * n))
    Om[:n, n:] = 2.0 * C
    Om[n:, :n] = -2.0 * C
    return np.linalg.solve(Om.T, -np.asarray(dH, dtype=float))


def dH_complex_fd(P: SectionPolytope, eps: BumpParams, p: TorusPoint, step: float = 1e-6) -> np.ndarray:
    """Central-difference differential of H in (s, alpha), evaluating H through |z|."""
    n = P.dim
    base = np.concatenate([p.s, p.alpha])

    E = step * np.eye(2 * n)
    x = np.concatenate([base + E, base - E])
    vals = smoothing_h(P, eps, moment_map_complex(P, np.exp(x[:, :n] + 1j * x[:, n:])))
    return (vals[: 2 * n] - vals[2 * n :]) / (2.0 * step)


# ---------------------------------------------------------------------------
# Slope pairs and orbit families
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=64)
def _extremum(eps: float) -> tuple[float, float]:
    """(x_eps, -q'(x_eps))."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        x = inflection_point(eps)
    return x, -bump_d1(eps, x)


def slope_pair_arrays(eps: float, d) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised solutions a(d) <= x_eps <= b(d) of q'_eps(x) = -d (nan when absent).

    -q' increases on [0, x_eps] and decreases on [x_eps, eps), so both roots
    are found by simultaneous bisection on the two monotone branches.
    """
    eps = float(eps)
    d = np.atleast_1d(np.asarray(d, dtype=float))
    x, D = _extremum(eps)
    e2 = eps * eps

    def slope(t):  # -q'(t) for 0 < t < eps, no input checks
        w = e2 - t * t
        return np.exp(-t * t / (e2 * w)) * 2.0 * t / (w * w)

    def slope_d(t):  # -q''(t)
        w = e2 - t * t
        g = 3.0 * t**4 + (2.0 - 2.0 * e2) * t * t - e2 * e2
        return -2.0 * np.exp(-t * t / (e2 * w)) * g / w**4

    a_lo, a_hi = np.zeros_like(d), np.full_like(d, x)
    b_lo, b_hi = np.full_like(d, x), np.full_like(d, eps)
    for _ in range(30):
        am = 0.5 * (a_lo + a_hi)
        up = slope(am) < d
        a_lo = np.where(up, am, a_lo)
        a_hi = np.where(up, a_hi, am)
        bm = 0.5 * (b_lo + b_hi)
        up = slope(bm) > d
        b_lo = np.where(up, bm, b_lo)
        b_hi = np.where(up, b_hi, bm)
    # safeguarded Newton inside the brackets
    with np.errstate(divide="ignore", invalid="ignore"):
        a, b = 0.5 * (a_lo + a_hi), 0.5 * (b_lo + b_hi)
        for _ in range(4):
            a = np.clip(a - (slope(a) - d) / slope_d(a), a_lo, a_hi)
            b = np.clip(b - (slope(b) - d) / slope_d(b), b_lo, b_hi)
        a = np.where(np.isfinite(a), a, 0.5 * (a_lo + a_hi))
        b = np.where(np.isfinite(b), b, 0.5 * (b_lo + b_hi))
    double = (d >= D * (1.0 - 1e-12)) & (d <= D * (1.0 + 1e-12))
    a = np.where(double, x, a)
    b = np.where(double, x, b)
    absent = (d > D * (1.0 + 1e-12)) | ~(d > 0)
    return np.where(absent, np.nan, a), np.where(absent, np.nan, b)


def _branch_root(eps, d, lo, hi, increasing):
    """Scalar root of -q'(t) = d on a monotone branch; bisection then guarded Newton."""
    e2 = eps * eps

    def slope(t):
        w = e2 - t * t
        return math.exp(-t * t / (e2 * w)) * 2.0 * t / (w * w)

    for _ in range(30):
        mid = 0.5 * (lo + hi)
        if (slope(mid) < d) == increasing:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    for _ in range(4):
        w = e2 - t * t
        g = 3.0 * t**4 + (2.0 - 2.0 * e2) * t * t - e2 * e2
        der = -2.0 * math.exp(-t * t / (e2 * w)) * g / w**4
        if der == 0.0:
            break
        t = min(max(t - (slope(t) - d) / der, lo), hi)
    return t


def solve_slope_pair(eps: float, d: float):
    """Both solutions a <= x_eps <= b of q'_eps(x) = -d, or None when d > -q'(x_eps)."""
    eps, d = float(eps), float(d)
    if not d > 0:
        raise ToricError("slopes must be positive")
    x, D = _extremum(eps)
    if d > D * (1.0 + 1e-12):
        return None
    if d >= D * (1.0 - 1e-12):
        return x, x
    return _branch_root(eps, d, 0.0, x, True), _branch_root(eps, d, x, eps, False)


@dataclass(frozen=True)
class FamilyComponent:
    choice: tuple  # "a" or "b" per ray of sigma, in ray order
    radial_values: tuple
    witness: tuple  # a point m of the component (floats)
    margin: float  # min over outside rays of r_rho(witness) - eps_rho

    def to_dict(self):
        return {
            "choice": "".join(self.choice),
            "radial_values": list(self.radial_values),
            "witness": list(self.witness),
            "margin": self.margin,
        }


@dataclass(frozen=True)
class OrbitFamily:
    cone: Cone
    ray_order: tuple
    d: tuple
    exact: bool  # d prescribed as rationals
    pairs: tuple  # per ray (a, b) or None
    components: tuple
    lattice_image: tuple | None  # integers when c_sigma(d) is integral
    period: Fraction | None  # in turns

    @property
    def is_empty(self) -> bool:
        return not self.components

    def to_dict(self):
        return {
            "cone": list(self.ray_order),
            "d": [frac_str(x) if self.exact else float(x) for x in self.d],
            "d_exact": self.exact,
            "pairs": [None if p is None else list(p) for p in self.pairs],
            "components": [c.to_dict() for c in self.components],
            "lattice_image": None if self.lattice_image is None else list(self.lattice_image),
            "period": None if self.period is None else frac_str(self.period),
            "empty": self.is_empty,
        }


def _independent_rows(U):
    """Indices of a maximal independent subset of the rows of the integer matrix U."""
    if not U:
        return []
    _, piv = rref([list(col) for col in zip(*U)], len(U))
    return piv


def component_feasible(P: SectionPolytope, eps: BumpParams, rays, values, margin: float = FEASIBILITY_MARGIN):
    """Decide {m : r_rho(m) = values_rho (rho in rays), r_rho(m) > eps_rho otherwise} != empty.

    The float data is converted to exact rationals; equalities on dependent
    rows are accepted within ``margin``; the open inequalities are decided by an
    exact LP maximising the common slack.  Returns (feasible, witness, slack).
    """
    n = P.dim
    rays = list(rays)
    U = [list(P.normals[i]) for i in rays]
    beta = [to_fraction(float(v)) + P.offsets[i] for v, i in zip(values, rays)]
    indep = _independent_rows(U)
    sol = solve_affine([U[i] for i in indep], [beta[i] for i in indep], n)
    if sol is None:  # pragma: no cover - independent rows are always consistent
        return False, None, -math.inf
    m0, kernel = sol
    for i, (u, b) in enumerate(zip(U, beta)):
        if i not in indep and abs(float(sum(x * y for x, y in zip(u, m0)) - b)) > margin:
            return False, None, -math.inf
    outside = [i for i in range(len(P.facets)) if i not in rays]
    e = [to_fraction(x) for x in eps.epsilon]
    k = len(kernel)
    A_ub, b_ub = [], []
    for i in outside:
        u, off = P.facets[i]
        uN = [sum(Fraction(u[j]) * K[j] for j in range(n)) for K in kernel]
        A_ub.append([-x for x in uN] + [1])
        b_ub.append(sum(Fraction(u[j]) * m0[j] for j in range(n)) - off - e[i])
    A_ub.append([0] * k + [1])
    b_ub.append(1)
    res = linprog_exact([0] * k + [1], A_ub, b_ub, free=list(range(k + 1)))
    if res.status != "optimal":
        return False, None, -math.inf
    y, t = res.x[:k], res.x[k]
    m = [m0[j] + sum((yi * K[j] for yi, K in zip(y, kernel)), Fraction(0)) for j in range(n)]
    return float(t) > margin, tuple(float(x) for x in m), float(t)


def _lattice_image(d, gens, exact):
    n = len(gens[0])
    if exact:
        c = [sum((di * u[k] for di, u in zip(d, gens)), Fraction(0)) for k in range(n)]
        if all(x.denominator == 1 for x in c):
            return tuple(int(x) for x in c)
        return None
    c = np.asarray(d, dtype=float) @ np.asarray(gens, dtype=float)
    rc = np.rint(c)
    if np.all(np.abs(c - rc) < FAMILY_TOL):
        return tuple(int(x) for x in rc)
    return None


def family(P: SectionPolytope, eps: BumpParams, sigma: Cone, d) -> OrbitFamily:
    """The orbit family B_sigma(d) described by its nonempty affine components."""
    order = tuple(sorted(sigma.rays))
    if not order:
        return OrbitFamily(sigma, (), (), True, (), (FamilyComponent((), (), (0.0,) * P.dim, math.inf),), None, None)
    d = tuple(d)
    if len(d) != len(order):
        raise ToricError(f"expected {len(order)} slopes, got {len(d)}")
    exact = all(isinstance(x, (int, Fraction, str)) for x in d)
    if exact:
        d = tuple(to_fraction(x) for x in d)
    else:
        d = tuple(float(x) for x in d)
    if any(x <= 0 for x in d):
        raise ToricError("slopes must be positive")
    pairs = tuple(solve_slope_pair(eps.epsilon[i], float(x)) for i, x in zip(order, d))
    gens = [P.normals[i] for i in order]
    image = _lattice_image(d, gens, exact)
    period = period_of_lattice_point(image) if image is not None and any(image) else None
    comps = []
    if all(p is not None for p in pairs):
        for choice in itertools.product("ab", repeat=len(order)):
            values = tuple(p[0] if c == "a" else p[1] for p, c in zip(pairs, choice))
            ok, witness, slack = component_feasible(P, eps, order, values)
            if ok:
                comps.append(FamilyComponent(choice, values, witness, slack))
            if all(p[0] == p[1] for p in pairs):
                break  # all double roots: the choice functions coincide
    return OrbitFamily(sigma, order, d, exact, pairs, tuple(comps), image, period)


# ---------------------------------------------------------------------------
# Dynamical support
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DynamicalSupport:
    cone: Cone
    points: tuple  # sorted lattice vectors in int(sigma)
    bound: float
    witnesses: dict = field(default_factory=dict)  # v -> OrbitFamily realizing it
    cap: float | None = None

    def to_dict(self):
        return {
            "cone": sorted(self.cone.rays),
            "bound": self.bound,
            "cap": self.cap,
            "points": [list(v) for v in self.points],
            "families": [self.witnesses[v].to_dict() for v in self.points],
        }


def support_bound(P: SectionPolytope, eps: BumpParams, sigma: Cone) -> float:
    """-sum_{rho in sigma(1)} q'(x_eps_rho) |u_rho|."""
    return float(sum(min_slope(eps.epsilon[i]) * np.linalg.norm(P.normals_array[i]) for i in sigma.rays))


def _relint_candidates(P: SectionPolytope, sigma: Cone, bound: float):
    fan = P.fan
    geom = fan.geometry(sigma)
    n = P.dim
    B = int(math.floor(bound))
    axes = [np.arange(-B, B + 1)] * n
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    grid = grid[np.einsum("ij,ij->i", grid, grid) <= bound * bound + 1e-9]
    keep = np.ones(len(grid), dtype=bool)
    for normal, _ in geom.facets:
        keep &= grid @ np.array(normal, dtype=float) > 0
    for eq in geom.span_equations:
        keep &= grid @ np.array(eq, dtype=float) == 0
    keep &= np.any(grid != 0, axis=1)
    return [tuple(int(x) for x in v) for v in grid[keep]]


def _fiber_roots(Dmax, d_part, K, offs, eps_vals, n_scan=400):
    """Roots of the consistency map on a one-dimensional fiber, for every choice function.

    Fiber: d(lambda) = d_part + lambda K with 0 < d <= Dmax.  A choice
    function picks a or b for every ray; the chosen radial values c(d) must
    satisfy <K, c(d) + offsets> = 0 for some m to realise them.  Returns a
    list of (choice, lambda).
    """
    lo, hi = _fiber_interval(Dmax, d_part, K)
    if not lo < hi:
        return []

    def pairs(lams):
        d = d_part[:, None] + np.outer(K, np.atleast_1d(lams))
        return [slope_pair_arrays(e, d[i]) for i, e in enumerate(eps_vals)]

    def F(pr, choice):
        return sum(K[i] * ((pr[i][0] if c == "a" else pr[i][1]) + offs[i]) for i, c in enumerate(choice))

    def F_scalar(lam, choice):
        total = 0.0
        for i, (e, c) in enumerate(zip(eps_vals, choice)):
            pr = solve_slope_pair(e, d_part[i] + lam * K[i])
            if pr is None:
                return math.nan
            total += K[i] * ((pr[0] if c == "a" else pr[1]) + offs[i])
        return total

    grid = np.linspace(lo, hi, n_scan)
    pr_grid = pairs(grid)
    out = []
    for choice in itertools.product("ab", repeat=len(eps_vals)):
        vals = F(pr_grid, choice)
        for i in range(n_scan - 1):
            f0, f1 = vals[i], vals[i + 1]
            if not (np.isfinite(f0) and np.isfinite(f1)):
                continue
            if f0 == 0.0:
                out.append((choice, grid[i]))
            elif f0 * f1 < 0:
                lam = brentq(F_scalar, grid[i], grid[i + 1], args=(choice,), xtol=1e-15, rtol=1e-15)
                out.append((choice, lam))
    return out


def _fiber_interval(Dmax, d_part, K):
    lo, hi = -math.inf, math.inf
    for dp, k, D in zip(d_part, K, Dmax):
        if k > 0:
            lo = max(lo, -dp / k)
            hi = min(hi, (D - dp) / k)
        elif k < 0:
            lo = max(lo, (D - dp) / k)
            hi = min(hi, -dp / k)
    pad = 1e-13 * max(1.0, hi - lo) if math.isfinite(hi - lo) else 0.0
    return lo + pad, hi - pad


def _general_fiber_search(Dmax, d_part, Kmat, offs, eps_vals, choice, rng, n_starts=32):
    """Fibers of dimension >= 2: multistart least squares on the consistency map."""
    j = Kmat.shape[1]
    A_ub = np.vstack([-Kmat, Kmat])
    b_ub = np.concatenate([d_part - 1e-9, Dmax - d_part])
    found = []
    for _ in range(n_starts):
        c = rng.normal(size=j)
        res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * j)
        if res.status != 0:
            return []
        found.append(res.x)
    center = np.mean(found, axis=0)
    sols = []

    def resid(lam):
        d = np.clip(d_part + Kmat @ lam, 1e-300, Dmax)
        vals = []
        for e, x, ch in zip(eps_vals, d, choice):
            a, b = slope_pair_arrays(e, [x])
            vals.append(a[0] if ch == "a" else b[0])
        return Kmat.T @ (np.array(vals) + offs)

    for x0 in found:
        start = center + 0.9 * (x0 - center)
        r = least_squares(resid, start, xtol=1e-15, ftol=1e-15, gtol=1e-15)
        d = d_part + Kmat @ r.x
        if np.max(np.abs(r.fun)) < 1e-11 and np.all(d > 0) and np.all(d <= Dmax):
            sols.append(r.x)
    return sols


def dynamical_support(
    P: SectionPolytope, eps: BumpParams, sigma: Cone, seed: int = 0, cap: float | None = None
) -> DynamicalSupport:
    """Lattice points of int(sigma) realised by nonempty orbit families.

    Candidates are the lattice points of int(sigma) within the proof bound
    (optionally lowered to ``cap``, in which case the result is only the part
    of the support inside that ball).
    """
    order = tuple(sorted(sigma.rays))
    if not order:
        raise ToricError("dynamical support is defined for nontrivial cones")
    bound = support_bound(P, eps, sigma)
    gens = [P.normals[i] for i in order]
    n = P.dim
    G = [[g[row] for g in gens] for row in range(n)]
    Dmax = np.array([min_slope(eps.epsilon[i]) for i in order])
    offs = np.array([float(P.offsets[i]) for i in order])
    eps_vals = [eps.epsilon[i] for i in order]
    kernel = [primitive(w) for w in nullspace(G, len(order))]
    rng = np.random.default_rng(seed)
    points, witnesses = [], {}
    radius = bound if cap is None else min(bound, float(cap))
    for v in _relint_candidates(P, sigma, radius):
        sol = solve_affine(G, list(v), len(order))
        if sol is None:
            continue
        d_exact = sol[0]
        if not kernel:
            if any(x <= 0 for x in d_exact) or any(float(x) > D for x, D in zip(d_exact, Dmax)):
                continue
            fam = family(P, eps, sigma, d_exact)
            if not fam.is_empty:
                points.append(v)
                witnesses[v] = fam
            continue
        d_part = np.array([float(x) for x in d_exact])
        Kmat = np.array(kernel, dtype=float).T
        if len(kernel) == 1:
            roots = [(ch, np.array([lam])) for ch, lam in _fiber_roots(Dmax, d_part, Kmat[:, 0], offs, eps_vals)]
        else:
            roots = [
                (ch, lam)
                for ch in itertools.product("ab", repeat=len(order))
                for lam in _general_fiber_search(Dmax, d_part, Kmat, offs, eps_vals, ch, rng)
            ]
        for choice, lam in roots:
            d = d_part + Kmat @ lam
            prs = [solve_slope_pair(e, x) if x > 0 else None for e, x in zip(eps_vals, d)]
            if any(pr is None for pr in prs):
                continue
            values = [pr[0] if c == "a" else pr[1] for pr, c in zip(prs, choice)]
            if component_feasible(P, eps, order, values)[0]:
                points.append(v)
                witnesses[v] = family(P, eps, sigma, tuple(float(x) for x in d))
                break
    points.sort()
    return DynamicalSupport(sigma, tuple(points), bound, witnesses, cap)


# ---------------------------------------------------------------------------
# Flows and periods
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FlowPoint:
    point: TorusPoint
    alpha_unwrapped: np.ndarray


def flow(P: SectionPolytope, eps: BumpParams, p: TorusPoint, t: float) -> FlowPoint:
    """Closed-form flow of X_H: s is constant, alpha moves linearly."""
    rate = field_analytic(P, eps, p)
    alpha = p.alpha + t * rate
    return FlowPoint(TorusPoint(p.s, alpha), alpha)


def rk4_flow(P: SectionPolytope, eps: BumpParams, p: TorusPoint, t: float, step: float = 1e-4, vector_field=None):
    """Classical RK4 on the (s, alpha) system of a vector field (default: omega-defined X_H)."""
    n = P.dim
    if vector_field is None:
        vector_field = lambda q: field_omega(P, eps, q, dH_complex_fd(P, eps, q))  # noqa: E731
    x = np.concatenate([p.s, p.alpha])
    steps = max(1, int(round(abs(t) / step)))
    h = t / steps

    def f(x):
        return vector_field(TorusPoint(x[:n], x[n:]))

    for _ in range(steps):
        k1 = f(x)
        k2 = f(x + 0.5 * h * k1)
        k3 = f(x + 0.5 * h * k2)
        k4 = f(x + h * k3)
        x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return x[:n], x[n:]


def _torus_gap(x) -> np.ndarray:
    """Distance of each angle to 0 on the circle of length 2pi."""
    return np.abs(np.mod(np.asarray(x) + math.pi, TWO_PI) - math.pi)


def first_return_time(rate, t_max: float, tol: float = 1e-8) -> tuple[float, float] | None:
    """First t in (0, t_max] with t * rate = 0 on (R / 2piZ)^n, measured numerically.

    Scans the sup-distance to the start on a grid fine enough that each
    return dip is sampled, then refines each dip by bounded scalar minimisation.
    Returns (time, residual) or None.
    """
    rate = np.asarray(rate, dtype=float)
    speed = float(np.max(np.abs(rate)))
    if speed == 0:
        return None
    h = math.pi / (8.0 * speed)
    grid = np.arange(h, t_max + 2 * h, h)
    dist = _torus_gap(np.outer(grid, rate)).max(axis=1)
    for i in range(1, len(grid) - 1):
        if dist[i] <= dist[i - 1] and dist[i] <= dist[i + 1] and dist[i] < 2.0 * speed * h:
            res = minimize_scalar(
                lambda t: float(_torus_gap(t * rate).max()),
                bounds=(grid[i - 1], grid[i + 1]),
                method="bounded",
                options={"xatol": 1e-14},
            )
            if res.fun < tol and res.x <= t_max * (1 + 1e-12):
                return float(res.x), float(res.fun)
    return None


@dataclass(frozen=True)
class PeriodReport:
    lattice_image: tuple
    period: Fraction  # in turns, from the gcd formula
    flow_time: float  # 2pi * period
    measured_time: float | None  # numeric first return
    residual: float  # |alpha(flow_time) - alpha(0)| on the circle

    def to_dict(self):
        return {
            "lattice_image": list(self.lattice_image),
            "period": frac_str(self.period),
            "flow_time": self.flow_time,
            "measured_time": self.measured_time,
            "residual": self.residual,
        }


def measure_period(P: SectionPolytope, eps: BumpParams, p: TorusPoint, d) -> PeriodReport:
    """Period of the orbit through p, which must lie on B_sigma(d) with integral c_sigma(d)."""
    sigma = _stratum(P, eps, p.s)
    order = sorted(sigma.rays)
    if len(order) != len(d) or not order:
        raise NotOnFamily("slope tuple does not match the stratum of p")
    r = P.radial_coordinates(moment_map(P, p.s))[order]
    q1 = bump_d1(eps.array[order], r)
    gap = np.max(np.abs(q1 + np.array([float(x) for x in d])))
    if gap >= FAMILY_TOL:
        raise NotOnFamily(f"|q'(r) + d| = {gap:.3e} exceeds {FAMILY_TOL}")
    exact = all(isinstance(x, (int, Fraction, str)) for x in d)
    image = _lattice_image(
        tuple(to_fraction(x) for x in d) if exact else tuple(float(x) for x in d), [P.normals[i] for i in order], exact
    )
    if image is None:
        raise NotOnFamily("c_sigma(d) is not integral")
    T = period_of_lattice_point(image)
    phys = TWO_PI * float(T)
    moved = flow(P, eps, p, phys).alpha_unwrapped - p.alpha
    residual = float(_torus_gap(moved).max())
    measured = first_return_time(field_analytic(P, eps, p), 1.5 * phys)
    return PeriodReport(image, T, phys, None if measured is None else measured[0], residual)


def measure_linear_period(v, tol: float = 1e-8) -> tuple[float, float] | None:
    """Measured first return of gamma'(t) = v on (R/Z)^n (time in turns)."""
    rate = TWO_PI * np.array([float(to_fraction(x)) for x in v])
    horizon = 1.5 * float(period_of_rational_slope(v))
    return first_return_time(rate, horizon, tol)
