"""Small exact-rational linear algebra kit.

Everything here works on lists of :class:`fractions.Fraction` (ints are
accepted and promoted).  Sizes are desk scale: a handful of rows, at most a
few dozen columns.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import NamedTuple, Sequence

Vec = list  # list[Fraction]


def to_fraction(x) -> Fraction:
    """Parse ``int``, ``Fraction``, ``"p/q"`` strings or floats (exactly)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(x)
    # numpy scalars
    if hasattr(x, "item"):
        return to_fraction(x.item())
    raise TypeError(f"cannot interpret {x!r} as a rational")


def frac_str(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def dot(a: Sequence, b: Sequence):
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def rref(rows: Sequence[Sequence], ncols: int | None = None):
    """Reduced row echelon form. Returns ``(matrix, pivot_columns)``."""
    M = [[Fraction(x) for x in r] for r in rows]
    if not M:
        return [], []
    ncols = len(M[0]) if ncols is None else ncols
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M, pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1]) if rows else 0


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[Vec]:
    """Basis of ``{x : rows @ x = 0}``."""
    if not rows:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    M, piv = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for i, pc in enumerate(piv):
            x[pc] = -M[i][f]
        basis.append(x)
    return basis


def solve_affine(A: Sequence[Sequence], b: Sequence, ncols: int | None = None):
    """All solutions of ``A x = b`` as ``(particular, kernel_basis)``.

    Returns ``None`` when the system is inconsistent.
    """
    ncols = len(A[0]) if ncols is None else ncols
    if not A:
        return [Fraction(0)] * ncols, nullspace([], ncols)
    aug = [list(r) + [bi] for r, bi in zip(A, b)]
    M, piv = rref(aug, ncols + 1)
    if ncols in piv:
        return None
    x = [Fraction(0)] * ncols
    for i, pc in enumerate(piv):
        x[pc] = M[i][ncols]
    return x, nullspace(A, ncols)


def primitive(vec: Sequence) -> tuple[int, ...]:
    """Scale a nonzero rational vector to the primitive integer vector on its ray."""
    fr = [Fraction(x) for x in vec]
    den = 1
    for q in fr:
        den = den * q.denominator // math.gcd(den, q.denominator)
    ints = [int(q * den) for q in fr]
    g = 0
    for a in ints:
        g = math.gcd(g, a)
    if g == 0:
        raise ValueError("zero vector has no primitive representative")
    return tuple(a // g for a in ints)


def lcm_all(values) -> int:
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out


# ---------------------------------------------------------------------------
# Exact linear programming (two-phase tableau simplex, Bland's rule)
# ---------------------------------------------------------------------------

class LPResult(NamedTuple):
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: list | None
    value: Fraction | None


def _pivot(T, r, c):
    inv = 1 / T[r][c]
    T[r] = [x * inv for x in T[r]]
    row = T[r]
    for i in range(len(T)):
        if i != r and T[i][c] != 0:
            f = T[i][c]
            T[i] = [a - f * b for a, b in zip(T[i], row)]


def _run_simplex(T, basis, cost, allowed):
    """Maximise ``cost @ x`` on the tableau in place. False if unbounded."""
    rhs = len(T[0]) - 1
    while True:
        enter = None
        for j in allowed:
            if j in basis:
                continue
            red = cost[j] - sum((cost[basis[i]] * T[i][j] for i in range(len(T))), Fraction(0))
            if red > 0:
                enter = j
                break
        if enter is None:
            return True
        leave, best = None, None
        for i in range(len(T)):
            if T[i][enter] > 0:
                ratio = T[i][rhs] / T[i][enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    leave, best = i, ratio
        if leave is None:
            return False
        _pivot(T, leave, enter)
        basis[leave] = enter


def linprog_exact(c, A_ub=(), b_ub=(), A_eq=(), b_eq=(), free=()) -> LPResult:
    """Maximise ``c @ x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``.

    Variables are nonnegative except those listed in ``free``.
    """
    nv = len(c)
    free = sorted(set(free))
    # column map: each original variable -> (plus column, minus column or None)
    cols = []
    ncol = 0
    for j in range(nv):
        if j in free:
            cols.append((ncol, ncol + 1))
            ncol += 2
        else:
            cols.append((ncol, None))
            ncol += 1

    def expand(row):
        out = [Fraction(0)] * ncol
        for j, a in enumerate(row):
            a = Fraction(a)
            p, m = cols[j]
            out[p] += a
            if m is not None:
                out[m] -= a
        return out

    rows, rhs = [], []
    n_slack = len(A_ub)
    for k, (r, b) in enumerate(zip(A_ub, b_ub)):
        e = expand(r) + [Fraction(int(i == k)) for i in range(n_slack)]
        rows.append(e)
        rhs.append(Fraction(b))
    for r, b in zip(A_eq, b_eq):
        rows.append(expand(r) + [Fraction(0)] * n_slack)
        rhs.append(Fraction(b))
    nstd = ncol + n_slack
    cost = expand(c) + [Fraction(0)] * n_slack

    if not rows:
        if any(x > 0 for x in cost):
            return LPResult("unbounded", None, None)
        return LPResult("optimal", [Fraction(0)] * nv, Fraction(0))

    m = len(rows)
    for i in range(m):
        if rhs[i] < 0:
            rows[i] = [-a for a in rows[i]]
            rhs[i] = -rhs[i]
    # artificials on every row
    T = [rows[i] + [Fraction(int(i == k)) for k in range(m)] + [rhs[i]] for i in range(m)]
    basis = [nstd + i for i in range(m)]
    phase1 = [Fraction(0)] * nstd + [Fraction(-1)] * m
    _run_simplex(T, basis, phase1, list(range(nstd + m)))
    if sum((T[i][-1] for i in range(m) if basis[i] >= nstd), Fraction(0)) > 0:
        return LPResult("infeasible", None, None)
    # drive remaining (zero-level) artificials out of the basis
    i = 0
    while i < len(T):
        if basis[i] >= nstd:
            j = next((j for j in range(nstd) if T[i][j] != 0), None)
            if j is None:
                del T[i]
                del basis[i]
                continue
            _pivot(T, i, j)
            basis[i] = j
        i += 1
    T = [row[:nstd] + [row[-1]] for row in T]
    if not T:
        if any(x > 0 for x in cost):
            return LPResult("unbounded", None, None)
        return LPResult("optimal", [Fraction(0)] * nv, Fraction(0))
    if not _run_simplex(T, basis, cost, list(range(nstd))):
        return LPResult("unbounded", None, None)
    xs = [Fraction(0)] * nstd
    for i, bcol in enumerate(basis):
        xs[bcol] = T[i][-1]
    x = []
    for p, mcol in cols:
        x.append(xs[p] - (xs[mcol] if mcol is not None else 0))
    value = sum((Fraction(ci) * xi for ci, xi in zip(c, x)), Fraction(0))
    return LPResult("optimal", x, value)
