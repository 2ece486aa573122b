"""Complete fans, strictly concave PL functions and their section polytopes.

All combinatorics here is exact: coordinates are Python ints, values are
:class:`fractions.Fraction`.  Floating point is only used to expose cached
``numpy`` views of finished objects to the numerical modules.
"""
from __future__ import annotations

import itertools
import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from ._exact import (
    dot,
    lcm_all,
    linprog_exact,
    nullspace,
    primitive,
    rank,
    solve_affine,
    to_fraction,
)
from .errors import (
    EmptyInterior,
    IncompleteFan,
    InconsistentConeData,
    NonPrimitiveRayWarning,
    NotInteriorPoint,
    NotStrictlyConcave,
    NotStronglyConvex,
    OverlappingCones,
    ToricError,
    ZeroSlope,
)

LatticeVector = tuple  # tuple[int, ...]
RationalVector = tuple  # tuple[Fraction, ...]


@dataclass(frozen=True)
class Cone:
    """A cone of a fan, identified by the indices of its rays."""

    rays: frozenset
    dim: int

    @property
    def key(self) -> tuple:
        return tuple(sorted(self.rays))

    def __repr__(self):
        return f"Cone({list(self.key)}, dim={self.dim})"


ZERO_CONE = Cone(frozenset(), 0)


@dataclass(frozen=True)
class _ConeGeometry:
    rays: tuple  # ray indices, sorted
    dim: int
    facets: tuple  # ((normal, tight ray-index frozenset), ...)
    span_equations: tuple  # integer vectors orthogonal to the span
    faces: frozenset  # frozensets of ray indices, including the empty face

    def contains(self, x: Sequence) -> bool:
        if any(dot(e, x) != 0 for e in self.span_equations):
            return False
        return all(dot(l, x) >= 0 for l, _ in self.facets)


def _cone_geometry(indices: Sequence[int], all_rays: Sequence[tuple], n: int) -> _ConeGeometry:
    idx = tuple(sorted(indices))
    rays = [all_rays[i] for i in idx]
    k = rank(rays)
    span_eqs = tuple(primitive(v) for v in nullspace(rays, n)) if k < n else ()
    if k == 0:
        return _ConeGeometry(idx, 0, (), span_eqs, frozenset({frozenset()}))
    basis = []
    for u in rays:
        if rank(basis + [u]) > len(basis):
            basis.append(u)
    facets = {}
    for sub in itertools.combinations(range(len(rays)), k - 1):
        if rank([rays[i] for i in sub]) != k - 1:
            continue
        rows = [[dot(b, rays[i]) for b in basis] for i in sub]
        coeffs = nullspace(rows, k)[0]
        normal = [sum((c * b[j] for c, b in zip(coeffs, basis)), Fraction(0)) for j in range(n)]
        vals = [dot(normal, u) for u in rays]
        if all(v >= 0 for v in vals):
            pass
        elif all(v <= 0 for v in vals):
            normal = [-x for x in normal]
            vals = [-v for v in vals]
        else:
            continue
        tight = frozenset(idx[i] for i, v in enumerate(vals) if v == 0)
        facets.setdefault(tight, primitive(normal))
    if rank(list(facets.values())) != k:
        raise NotStronglyConvex(f"cone on rays {list(idx)} contains a line")
    faces = set(facets)
    frontier = list(faces)
    while frontier:
        new = []
        for a in frontier:
            for b in list(faces):
                c = a & b
                if c not in faces:
                    faces.add(c)
                    new.append(c)
        frontier = new
    faces.add(frozenset(idx))
    faces.add(frozenset())
    for i in idx:
        if frozenset({i}) not in faces:
            raise ToricError(f"ray {i} is not an extremal ray of cone {list(idx)}")
    return _ConeGeometry(
        idx, k, tuple((normal, tight) for tight, normal in facets.items()), span_eqs, frozenset(faces)
    )


@dataclass(frozen=True)
class Fan:
    dim: int
    rays: tuple  # primitive integer generators
    maximal_cones: tuple  # tuple[Cone, ...]
    cones: frozenset  # every cone, closed under faces, including the zero cone
    complete: bool
    witness: tuple | None = None  # uncovered rational direction when not complete
    _geometry: dict = field(default_factory=dict, repr=False, compare=False)

    def cone(self, ray_indices: Iterable[int]) -> Cone | None:
        """The cone with exactly these rays, or ``None``."""
        key = frozenset(ray_indices)
        for c in self.cones:
            if c.rays == key:
                return c
        return None

    def ray_cone(self, i: int) -> Cone:
        return self.cone([i])

    def cones_of_dim(self, k: int) -> list[Cone]:
        return sorted((c for c in self.cones if c.dim == k), key=lambda c: c.key)

    def geometry(self, cone: Cone) -> _ConeGeometry:
        if cone not in self._geometry:
            self._geometry[cone] = _cone_geometry(cone.rays, self.rays, self.dim)
        return self._geometry[cone]

    def contains(self, cone: Cone, x: Sequence) -> bool:
        return self.geometry(cone).contains([to_fraction(v) for v in x])

    def is_simplicial(self, cone: Cone) -> bool:
        return len(cone.rays) == cone.dim

    def generators(self, cone: Cone) -> list[tuple]:
        return [self.rays[i] for i in sorted(cone.rays)]


def _separated(g1: _ConeGeometry, g2: _ConeGeometry, rays, n) -> bool:
    shared = set(g1.rays) & set(g2.rays)
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for i in shared:
        A_eq.append(rays[i])
        b_eq.append(0)
    for i in set(g1.rays) - shared:
        A_ub.append([-x for x in rays[i]])
        b_ub.append(-1)
    for i in set(g2.rays) - shared:
        A_ub.append(list(rays[i]))
        b_ub.append(-1)
    res = linprog_exact([0] * n, A_ub, b_ub, A_eq, b_eq, free=range(n))
    return res.status == "optimal"


def build_fan(dim: int, rays: Sequence[Sequence[int]], maximal_cones: Sequence[Iterable[int]]) -> Fan:
    """Validate and close a fan given by rays and maximal cones.

    Non-primitive rays are divided by their gcd (with a warning).  Raises
    :class:`NotStronglyConvex` or :class:`OverlappingCones` for invalid input.
    """
    if dim < 1:
        raise ToricError("fan dimension must be positive")
    prim = []
    for i, r in enumerate(rays):
        r = tuple(int(x) for x in r)
        if len(r) != dim:
            raise ToricError(f"ray {i} has {len(r)} coordinates, expected {dim}")
        if not any(r):
            raise ToricError(f"ray {i} is zero")
        p = primitive(r)
        if p != r:
            warnings.warn(f"ray {i} = {list(r)} replaced by primitive {list(p)}", NonPrimitiveRayWarning, stacklevel=2)
        prim.append(p)
    if len(set(prim)) != len(prim):
        raise ToricError("duplicate rays after primitive normalisation")
    prim = tuple(prim)
    maxcones = []
    used = set()
    for c in maximal_cones:
        idx = frozenset(int(i) for i in c)
        if not idx or any(i < 0 or i >= len(prim) for i in idx):
            raise ToricError(f"cone {sorted(idx)} has an out-of-range or empty index set")
        used |= idx
        maxcones.append(idx)
    if used != set(range(len(prim))):
        raise ToricError(f"rays {sorted(set(range(len(prim))) - used)} belong to no cone")
    geoms = {}
    for idx in maxcones:
        geoms[idx] = _cone_geometry(idx, prim, dim)
    for a, b in itertools.combinations(maxcones, 2):
        if a <= b or b <= a:
            raise OverlappingCones(f"cone {sorted(a)} and {sorted(b)} are nested")
        if not _separated(geoms[a], geoms[b], prim, dim):
            raise OverlappingCones(f"cones {sorted(a)} and {sorted(b)} do not meet in a common face")
    cones = set()
    geometry = {}
    max_objs = []
    for idx in maxcones:
        g = geoms[idx]
        for face in g.faces:
            cones.add(Cone(face, rank([prim[i] for i in face])))
        mc = Cone(idx, g.dim)
        geometry[mc] = g
        max_objs.append(mc)
    fan = Fan(dim, prim, tuple(max_objs), frozenset(cones), False, None, geometry)
    ok, witness = check_complete(fan)
    return Fan(dim, prim, tuple(max_objs), frozenset(cones), ok, witness, geometry)


def _covered(fan: Fan, x) -> bool:
    return any(fan.geometry(c).contains(x) for c in fan.maximal_cones)


def check_complete(fan: Fan) -> tuple[bool, tuple | None]:
    """Decide whether the maximal cones cover R^n.

    Every wall (facet of a full-dimensional maximal cone) must be shared by
    exactly two maximal cones and the wall-adjacency graph must be connected.
    On failure an uncovered primitive direction is returned as witness.
    """
    n = fan.dim
    full = [c for c in fan.maximal_cones if c.dim == n]
    walls: dict = {}
    for c in full:
        for normal, tight in fan.geometry(c).facets:
            walls.setdefault(tight, []).append((c, normal))
    lonely = [(tight, owners[0]) for tight, owners in walls.items() if len(owners) == 1]
    if len(full) == len(fan.maximal_cones) and full and not lonely:
        adj = {c: set() for c in full}
        for owners in walls.values():
            if len(owners) == 2:
                a, b = owners[0][0], owners[1][0]
                adj[a].add(b)
                adj[b].add(a)
        seen = {full[0]}
        queue = deque([full[0]])
        while queue:
            for nb in adj[queue.popleft()]:
                if nb not in seen:
                    seen.add(nb)
                    queue.append(nb)
        if len(seen) == len(full):
            return True, None
    # find an uncovered direction
    for tight, (cone, normal) in sorted(lonely, key=lambda t: sorted(t[0])):
        w = [Fraction(0)] * n
        for i in tight:
            w = [a + b for a, b in zip(w, fan.rays[i])]
        t = Fraction(1)
        for _ in range(64):
            x = [a - t * b for a, b in zip(w, normal)]
            if any(x) and not _covered(fan, x):
                return False, primitive(x)
            t /= 2
    for radius in range(1, 6):
        pts = sorted(itertools.product(range(-radius, radius + 1), repeat=n), key=lambda p: (sum(a * a for a in p), p))
        for p in pts:
            if any(p) and not _covered(fan, p):
                return False, primitive(p)
    return False, None


# ---------------------------------------------------------------------------
# PL functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PLData:
    """A strictly concave rational PL function on a complete fan, with scale r."""

    fan: Fan
    ray_values: tuple  # Fraction per ray
    cone_linear: tuple  # RationalVector per maximal cone (same order as fan.maximal_cones)
    r: int
    minimal_r: int

    def linear_part(self, cone: Cone) -> tuple:
        return self.cone_linear[self.fan.maximal_cones.index(cone)]

    def value(self, x: Sequence) -> Fraction:
        """phi(x) = min over maximal cones of <m_sigma, x> (concavity)."""
        x = [to_fraction(v) for v in x]
        return min(dot(m, x) for m in self.cone_linear)

    @property
    def scaled_ray_values(self) -> tuple:
        return tuple(self.r * v for v in self.ray_values)


def pl_from_ray_values(fan: Fan, values: Sequence, r: int | None = None) -> PLData:
    """Recover the linear pieces m_sigma from values on ray generators."""
    if not fan.complete:
        raise IncompleteFan("PL data requires a complete fan", fan.witness)
    vals = tuple(to_fraction(v) for v in values)
    if len(vals) != len(fan.rays):
        raise ToricError(f"expected {len(fan.rays)} ray values, got {len(vals)}")
    n = fan.dim
    linear = []
    for cone in fan.maximal_cones:
        idx = sorted(cone.rays)
        chosen = []
        for i in idx:
            if rank([fan.rays[j] for j in chosen + [i]]) > len(chosen):
                chosen.append(i)
            if len(chosen) == n:
                break
        sol = solve_affine([fan.rays[i] for i in chosen], [vals[i] for i in chosen], n)
        m = tuple(sol[0])
        for i in idx:
            if dot(m, fan.rays[i]) != vals[i]:
                raise InconsistentConeData(
                    f"values on cone {idx} admit no common linear function (ray {i})"
                )
        linear.append(m)
    for cone, m in zip(fan.maximal_cones, linear):
        for i, u in enumerate(fan.rays):
            if i in cone.rays:
                continue
            if dot(m, u) <= vals[i]:
                raise NotStrictlyConcave(
                    f"<m_sigma, u_{i}> = {dot(m, u)} <= phi(u_{i}) = {vals[i]} on cone {cone.key}",
                    cone=cone,
                    ray=i,
                )
    minimal = lcm_all(q.denominator for m in linear for q in m)
    if r is None:
        r = minimal
    else:
        r = int(r)
        if r <= 0:
            raise ToricError("scale r must be a positive integer")
        if any((r * q).denominator != 1 for m in linear for q in m):
            raise ToricError(f"r={r} does not make r*phi integral (minimal r is {minimal})")
    return PLData(fan, vals, tuple(linear), r, minimal)


# ---------------------------------------------------------------------------
# Section polytope
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SectionPolytope:
    """P = {m : <m, u_rho> >= r phi(u_rho)} with its lattice points."""

    pl: PLData
    facets: tuple  # ((u_rho, offset), ...) offsets are integers r*phi(u_rho)
    vertices: tuple  # integer vertex r*m_sigma per maximal cone
    lattice_points: tuple  # lexicographically sorted
    shift: tuple  # total lattice translation applied to the original data

    @property
    def fan(self) -> Fan:
        return self.pl.fan

    @property
    def dim(self) -> int:
        return self.pl.fan.dim

    @property
    def normals(self) -> tuple:
        return tuple(u for u, _ in self.facets)

    @property
    def offsets(self) -> tuple:
        return tuple(b for _, b in self.facets)

    @property
    def origin_normalized(self) -> bool:
        return tuple([0] * self.dim) in self._lattice_set

    @cached_property
    def _lattice_set(self):
        return frozenset(self.lattice_points)

    @cached_property
    def lattice(self) -> np.ndarray:
        return np.array(self.lattice_points, dtype=float).reshape(-1, self.dim)

    @cached_property
    def normals_array(self) -> np.ndarray:
        return np.array(self.normals, dtype=float).reshape(-1, self.dim)

    @cached_property
    def offsets_array(self) -> np.ndarray:
        return np.array([float(b) for b in self.offsets])

    @cached_property
    def full_dimensional_lattice(self) -> bool:
        pts = self.lattice_points
        return rank([[a - b for a, b in zip(p, pts[0])] for p in pts[1:]]) == self.dim if len(pts) > 1 else self.dim == 0

    @cached_property
    def average_lattice_point(self) -> tuple:
        N = len(self.lattice_points)
        return tuple(Fraction(sum(p[k] for p in self.lattice_points), N) for k in range(self.dim))

    def contains(self, m: Sequence, strict: bool = False) -> bool:
        m = [to_fraction(x) for x in m]
        if strict:
            return all(dot(m, u) - b > 0 for u, b in self.facets)
        return all(dot(m, u) - b >= 0 for u, b in self.facets)

    def radial_coordinates(self, m) -> np.ndarray:
        """Floating radial coordinates for an array of points (..., n)."""
        m = np.asarray(m, dtype=float)
        return m @ self.normals_array.T - self.offsets_array

    def exit_radius(self, v) -> float:
        """Largest t with t*v in P, for a direction v from the origin (origin inside P)."""
        v = np.asarray(v, dtype=float)
        dots = self.normals_array @ v
        neg = dots < 0
        if not np.any(neg):
            return math.inf
        return float(np.min(self.offsets_array[neg] / dots[neg]))


def section_polytope(pl: PLData) -> SectionPolytope:
    """Facets, vertices and lattice points of the section polytope of r*phi."""
    fan = pl.fan
    n = fan.dim
    facets = tuple((u, int(pl.r * v)) for u, v in zip(fan.rays, pl.ray_values))
    vertices = tuple(tuple(int(pl.r * q) for q in m) for m in pl.cone_linear)
    if rank([[a - b for a, b in zip(v, vertices[0])] for v in vertices[1:]]) != n:
        raise EmptyInterior("section polytope is not full-dimensional")
    V = np.array(vertices, dtype=np.int64)
    lo, hi = V.min(axis=0), V.max(axis=0)
    grids = np.meshgrid(*[np.arange(a, b + 1, dtype=np.int64) for a, b in zip(lo, hi)], indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    U = np.array(fan.rays, dtype=np.int64)
    off = np.array([b for _, b in facets], dtype=np.int64)
    inside = np.all(pts @ U.T >= off, axis=1)
    lattice = tuple(tuple(int(x) for x in p) for p in pts[inside])
    return SectionPolytope(pl, facets, vertices, tuple(sorted(lattice)), tuple([0] * n))


def translate(P: SectionPolytope, t: Sequence[int]) -> SectionPolytope:
    """Translate P by the lattice vector -t (so that t becomes the origin)."""
    t = tuple(int(x) for x in t)
    pl = P.pl
    r = pl.r
    vals = tuple(v - Fraction(dot(t, u), r) for v, u in zip(pl.ray_values, pl.fan.rays))
    lin = tuple(tuple(q - Fraction(ti, r) for q, ti in zip(m, t)) for m in pl.cone_linear)
    new_pl = PLData(pl.fan, vals, lin, r, lcm_all(q.denominator for m in lin for q in m))
    Q = section_polytope(new_pl)
    return SectionPolytope(
        new_pl, Q.facets, Q.vertices, Q.lattice_points, tuple(a + b for a, b in zip(P.shift, t))
    )


def normalize_origin(P: SectionPolytope, point: Sequence[int] | None = None) -> SectionPolytope:
    """Translate so that a lattice point (default: the interior lattice point
    closest to the average lattice point, ties broken lexicographically) is 0."""
    if point is None:
        mbar = P.average_lattice_point
        interior = [p for p in P.lattice_points if P.contains(p, strict=True)] or list(P.lattice_points)
        point = min(interior, key=lambda p: (sum((Fraction(a) - b) ** 2 for a, b in zip(p, mbar)), p))
    point = tuple(int(x) for x in point)
    if point not in P._lattice_set:
        raise ToricError(f"{list(point)} is not a lattice point of P")
    if not any(point):
        return P
    return translate(P, point)


def radial_coordinate(P: SectionPolytope, rho: int, m: Sequence) -> Fraction:
    """<m, u_rho> - r phi(u_rho), exactly."""
    u, b = P.facets[rho]
    return dot([to_fraction(x) for x in m], u) - b


def polytope_from_hrep(normals: Sequence[Sequence[int]], offsets: Sequence, r: int | None = None) -> SectionPolytope:
    """Rebuild (fan, phi) from an H-representation {m : <m, u> >= b}.

    Vertices are found by exhaustive n-subsets of facets; each vertex's
    active facets form a maximal cone of the normal fan.
    """
    U = [tuple(int(x) for x in u) for u in normals]
    b = [to_fraction(x) for x in offsets]
    if len(U) != len(b) or not U:
        raise ToricError("normals and offsets must be nonempty and of equal length")
    n = len(U[0])
    for u in U:
        if primitive(u) != u:
            raise ToricError(f"facet normal {list(u)} is not primitive")
    verts = {}
    for sub in itertools.combinations(range(len(U)), n):
        sol = solve_affine([U[i] for i in sub], [b[i] for i in sub], n)
        if sol is None or sol[1]:
            continue
        m = tuple(sol[0])
        if m in verts:
            continue
        vals = [dot(m, u) - bi for u, bi in zip(U, b)]
        if all(v >= 0 for v in vals):
            verts[m] = frozenset(i for i, v in enumerate(vals) if v == 0)
    if not verts:
        raise EmptyInterior("H-representation has no vertices")
    for i in range(len(U)):
        on = [m for m, act in verts.items() if i in act]
        if len(on) < n or rank([[a - c for a, c in zip(m, on[0])] for m in on[1:]]) != n - 1:
            raise ToricError(f"inequality {i} is redundant (does not define a facet)")
    fan = build_fan(n, U, [sorted(act) for act in verts.values()])
    return section_polytope(pl_from_ray_values(fan, b, r))


# ---------------------------------------------------------------------------
# Slope semigroup
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SlopeSolutionSet:
    """{d > 0 : sum_rho d_rho u_rho = v} as particular solution + kernel."""

    cone: Cone
    target: tuple
    ray_order: tuple  # ray indices matching the components of d
    generators: tuple
    particular: tuple  # Fractions, strictly positive
    kernel: tuple  # primitive integer vectors spanning ker of the ray matrix

    @property
    def simplicial(self) -> bool:
        return not self.kernel

    def c_sigma(self, d: Sequence) -> tuple:
        d = [to_fraction(x) for x in d]
        n = len(self.target)
        return tuple(sum((di * u[k] for di, u in zip(d, self.generators)), Fraction(0)) for k in range(n))

    def contains(self, d: Sequence) -> bool:
        d = [to_fraction(x) for x in d]
        return all(x > 0 for x in d) and self.c_sigma(d) == tuple(Fraction(x) for x in self.target)

    def sample(self, rng: np.random.Generator, count: int = 1) -> list[tuple]:
        """Exact rational members of the set."""
        out = []
        for _ in range(count):
            if self.simplicial:
                out.append(self.particular)
                continue
            y = [Fraction(int(rng.integers(-16, 17)), int(rng.integers(1, 17))) for _ in self.kernel]
            scale = Fraction(1)
            while True:
                d = tuple(
                    p + scale * sum((yj * K[i] for yj, K in zip(y, self.kernel)), Fraction(0))
                    for i, p in enumerate(self.particular)
                )
                if all(x > 0 for x in d):
                    break
                scale /= 2
            out.append(d)
        return out


def slope_solutions(fan: Fan, sigma: Cone, v: Sequence[int]) -> SlopeSolutionSet:
    """Decide v in relint(sigma) exactly and describe c_sigma^{-1}(v).

    The particular solution maximises min_rho d_rho (an exact LP), so it is
    the "most central" positive representation.
    """
    v = tuple(int(x) for x in v)
    idx = tuple(sorted(sigma.rays))
    if not idx:
        raise NotInteriorPoint("the zero cone has no interior lattice points")
    gens = tuple(fan.rays[i] for i in idx)
    k, n = len(gens), fan.dim
    # variables (e_1..e_k, t): d = e + t, maximise t
    A_eq = [[g[row] for g in gens] + [sum(g[row] for g in gens)] for row in range(n)]
    A_ub = [[0] * k + [1]]
    b_ub = [max(1, sum(abs(x) for x in v))]
    res = linprog_exact([0] * k + [1], A_ub, b_ub, A_eq, list(v), free=[k])
    if res.status != "optimal" or res.value <= 0:
        raise NotInteriorPoint(f"{list(v)} is not in the relative interior of cone {list(idx)}")
    t = res.x[k]
    d0 = tuple(e + t for e in res.x[:k])
    kernel = tuple(primitive(w) for w in nullspace([[g[row] for g in gens] for row in range(n)], k))
    return SlopeSolutionSet(sigma, v, idx, gens, d0, kernel)


def relative_interior_contains(fan: Fan, sigma: Cone, v: Sequence[int]) -> bool:
    try:
        slope_solutions(fan, sigma, v)
    except NotInteriorPoint:
        return False
    return True


# ---------------------------------------------------------------------------
# Periods of linear flows
# ---------------------------------------------------------------------------

def period_of_rational_slope(v: Sequence) -> Fraction:
    """lcm of denominators over gcd of numerators (zero entries skipped)."""
    q = [to_fraction(x) for x in v]
    if not any(q):
        raise ZeroSlope("slope vector is zero")
    nums = [x.numerator for x in q if x != 0]
    dens = [x.denominator for x in q if x != 0]
    g = 0
    for a in nums:
        g = math.gcd(g, a)
    return Fraction(lcm_all(dens), abs(g))


def period_of_lattice_point(v: Sequence[int]) -> Fraction:
    """1 / |gcd(v_1, ..., v_n)|; equals 1 iff v is primitive."""
    g = 0
    for a in v:
        if int(a) != a:
            raise ToricError(f"{list(v)} is not integral")
        g = math.gcd(g, int(a))
    if g == 0:
        raise ZeroSlope("slope vector is zero")
    return Fraction(1, g)
