"""Character-sum potential, moment map and the exact symplectic form.

Canonical chart: log-polar coordinates ``z_k = exp(s_k + i alpha_k)``.  In it

    theta = sum_k mu_k(s) d alpha_k,     omega = d theta = 2 sum_{h,k} C_hk(s) ds_h ^ d alpha_k,

with ``mu`` the weighted average of lattice points under weights
``exp(2 <m, s>)`` and ``C`` their weighted covariance.  Weights are always
computed with the largest exponent subtracted.

The functions ending in ``_complex`` evaluate the same objects from the
formulas written in the complex coordinate ``z``; they exist to cross-check
the log-polar path and deliberately share no code with it beyond the lattice.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import DegenerateLattice, NoConvergence, NonpositiveModulus, NotInterior
from .lattice_fan import SectionPolytope

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TorusPoint:
    """A point of (C^*)^n in log-polar coordinates; angles kept in [0, 2pi)."""

    s: np.ndarray
    alpha: np.ndarray

    def __init__(self, s, alpha=None):
        s = np.array(s, dtype=float).reshape(-1)
        alpha = np.zeros_like(s) if alpha is None else np.array(alpha, dtype=float).reshape(-1)
        if s.shape != alpha.shape:
            raise ValueError("s and alpha must have the same length")
        if not (np.all(np.isfinite(s)) and np.all(np.isfinite(alpha))):
            raise ValueError("torus point coordinates must be finite")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "alpha", np.mod(alpha, TWO_PI))

    @classmethod
    def from_complex(cls, z) -> "TorusPoint":
        z = np.asarray(z, dtype=complex)
        if np.any(z == 0):
            raise ValueError("torus points have nonzero coordinates")
        return cls(np.log(np.abs(z)), np.angle(z))

    def to_complex(self) -> np.ndarray:
        return np.exp(self.s + 1j * self.alpha)


@dataclass(frozen=True)
class TangentVector:
    ds: np.ndarray
    dalpha: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.ds, self.dalpha])


@dataclass(frozen=True)
class Covector:
    ds_components: np.ndarray
    dalpha_components: np.ndarray

    def __call__(self, X: TangentVector) -> float:
        return float(self.ds_components @ X.ds + self.dalpha_components @ X.dalpha)

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.ds_components, self.dalpha_components])


@dataclass(frozen=True)
class TwoFormMatrix:
    """omega = 2 sum C_hk ds_h ^ d alpha_k."""

    C: np.ndarray

    def __call__(self, X: TangentVector, Y: TangentVector) -> float:
        return float(2.0 * (X.ds @ self.C @ Y.dalpha - Y.ds @ self.C @ X.dalpha))

    def matrix(self) -> np.ndarray:
        """Antisymmetric 2n x 2n matrix Omega with omega(X, Y) = X^T Omega Y."""
        n = self.C.shape[0]
        Om = np.zeros((2 * n, 2 * n))
        Om[:n, n:] = 2.0 * self.C
        Om[n:, :n] = -2.0 * self.C.T
        return Om


def _s_of(p) -> np.ndarray:
    return p.s if isinstance(p, TorusPoint) else np.asarray(p, dtype=float)


def _weights(P: SectionPolytope, s):
    """Normalised weights exp(2<m,s>) / sum, plus the log normaliser."""
    e = 2.0 * (np.asarray(s, dtype=float) @ P.lattice.T)
    top = e.max(axis=-1, keepdims=True)
    w = np.exp(e - top)
    Z = w.sum(axis=-1, keepdims=True)
    return w / Z, top[..., 0] + np.log(Z[..., 0])


def potential(P: SectionPolytope, s) -> float | np.ndarray:
    """F(s) = log sum_m exp(2 <m, s>); accepts a point or a batch (..., n)."""
    return _weights(P, _s_of(s))[1]


def moment_map(P: SectionPolytope, s) -> np.ndarray:
    w, _ = _weights(P, _s_of(s))
    return w @ P.lattice


def _check_full(P: SectionPolytope):
    if not P.full_dimensional_lattice:
        raise DegenerateLattice("lattice points lie in a proper affine subspace")


def covariance(P: SectionPolytope, s) -> np.ndarray:
    """Weighted covariance C(s) of lattice points; equals Hess F / 4."""
    _check_full(P)
    w, _ = _weights(P, _s_of(s))
    mu = w @ P.lattice
    centred = P.lattice - mu[..., None, :]
    return np.einsum("...i,...ij,...ik->...jk", w, centred, centred)


def theta_at(P: SectionPolytope, p: TorusPoint) -> Covector:
    mu = moment_map(P, p.s)
    return Covector(np.zeros_like(mu), mu)


def omega_at(P: SectionPolytope, p: TorusPoint) -> TwoFormMatrix:
    return TwoFormMatrix(covariance(P, p.s))


def infinitesimal_action(u, p: TorusPoint | None = None) -> TangentVector:
    """Generator of the circle subgroup lambda_u: rotates angles at rate u."""
    u = np.asarray(u, dtype=float)
    return TangentVector(np.zeros_like(u), u.copy())


def hamiltonian_field(P: SectionPolytope, p: TorusPoint, grad_s) -> TangentVector:
    """X with omega(X, .) = -dH for an alpha-independent H with s-gradient grad_s."""
    C = covariance(P, p.s)
    grad_s = np.asarray(grad_s, dtype=float)
    rate = 0.5 * cho_solve(cho_factor(C), grad_s)
    return TangentVector(np.zeros_like(rate), rate)


def liouville_field(P: SectionPolytope, p: TorusPoint) -> TangentVector:
    """X_theta with omega(X_theta, .) = theta."""
    C = covariance(P, p.s)
    mu = moment_map(P, p.s)
    return TangentVector(0.5 * cho_solve(cho_factor(C), mu), np.zeros_like(mu))


def one_param_point(u, t_modulus: float, t_angle: float) -> TorusPoint:
    """lambda_u(t) for t = t_modulus * exp(i t_angle)."""
    if not t_modulus > 0:
        raise NonpositiveModulus(f"modulus must be positive, got {t_modulus}")
    u = np.asarray(u, dtype=float)
    return TorusPoint(math.log(t_modulus) * u, t_angle * u)


def invert_moment_map(
    P: SectionPolytope, m_target, tol: float = 1e-10, max_iter: int = 200
) -> np.ndarray:
    """Find s with mu(s) = m_target by damped Newton on F(s)/2 - <m_target, s>."""
    m_target = np.asarray(m_target, dtype=float)
    exact = [Fraction(float(x)) for x in m_target]
    if not P.contains(exact, strict=True):
        raise NotInterior(f"{m_target.tolist()} is not in the interior of P")
    _check_full(P)

    def objective(s):
        return 0.5 * potential(P, s) - m_target @ s

    s = np.zeros(P.dim)
    g = moment_map(P, s) - m_target
    f = objective(s)
    polished = 0
    for _ in range(max_iter):
        if np.max(np.abs(g)) < tol:
            # two extra steps push the residual to roundoff
            polished += 1
            if polished > 2:
                return s
        step = -0.5 * cho_solve(cho_factor(covariance(P, s)), g)
        lam = 1.0
        gnorm = np.max(np.abs(g))
        while True:
            trial = s + lam * step
            ft = objective(trial)
            gt = moment_map(P, trial) - m_target
            # near the root the objective is flat to roundoff; the residual still decides
            if ft <= f + 1e-4 * lam * (g @ step) or np.max(np.abs(gt)) < gnorm or lam < 1e-12:
                break
            lam *= 0.5
        s, f, g = trial, ft, gt
    if np.max(np.abs(g)) < tol:
        return s
    raise NoConvergence(f"moment map inversion stalled at residual {np.max(np.abs(g)):.3e}")


# ---------------------------------------------------------------------------
# Complex-coordinate evaluators (cross-checks)
# ---------------------------------------------------------------------------

def _char_moduli_sq(P: SectionPolytope, z) -> np.ndarray:
    """|chi^m(z)|^2 = prod_k |z_k|^(2 m_k), evaluated literally."""
    absz = np.abs(np.asarray(z, dtype=complex))
    return np.prod(absz[..., None, :] ** (2.0 * P.lattice), axis=-1)


def moment_map_complex(P: SectionPolytope, z) -> np.ndarray:
    """Accepts a point or a batch (..., n) of complex coordinates."""
    w = _char_moduli_sq(P, z)
    return (w @ P.lattice) / w.sum(axis=-1, keepdims=True)


def theta_complex(P: SectionPolytope, z) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients (a_k, b_k) of theta = sum a_k dz_k + b_k d zbar_k.

    theta = -(i/2) sum_k mu_k (dz_k / z_k - d zbar_k / zbar_k).
    """
    z = np.asarray(z, dtype=complex)
    mu = moment_map_complex(P, z)
    return -0.5j * mu / z, 0.5j * mu / np.conj(z)


def pair_complex(coeffs: tuple[np.ndarray, np.ndarray], dz):
    """Evaluate sum a_k dz_k + b_k d zbar_k on a real tangent vector given by dz (batches allowed)."""
    a, b = coeffs
    dz = np.asarray(dz, dtype=complex)
    out = np.sum(a * dz + b * np.conj(dz), axis=-1)
    return complex(out) if out.ndim == 0 else out


def tangent_to_complex(p: TorusPoint, X: TangentVector) -> np.ndarray:
    """dz_k(X) for a log-polar tangent vector: z_k (ds_k + i dalpha_k)."""
    return p.to_complex() * (X.ds + 1j * X.dalpha)


def circle_action_complex(u, z) -> np.ndarray:
    """dz(X_u) from the real form sum_l u_l (x_l d/dy_l - y_l d/dx_l)."""
    z = np.asarray(z, dtype=complex)
    u = np.asarray(u, dtype=float)
    x, y = z.real, z.imag
    return u * (-y + 1j * x)


def omega_complex(P: SectionPolytope, z) -> np.ndarray:
    """2n x 2n matrix of omega in the log-polar basis, from the z-coordinate formula.

    omega = i sum_{h,k} c_hk (dz_h/z_h) ^ (d zbar_k / zbar_k) with c_hk the
    raw second moment minus the product of first moments.
    """
    z = np.asarray(z, dtype=complex)
    n = z.shape[0]
    w = _char_moduli_sq(P, z)
    Z = w.sum()
    L = P.lattice
    first = (w @ L) / Z
    c = (L.T * w) @ L / Z - np.outer(first, first)
    # basis tangent vectors d/ds_j and d/dalpha_j expressed as dz / z
    basis = np.concatenate([np.eye(n), 1j * np.eye(n)], axis=0)  # rows: zeta(e_j)
    Om = np.zeros((2 * n, 2 * n))
    for a in range(2 * n):
        for b in range(2 * n):
            za, zb = basis[a], basis[b]
            val = 1j * (za @ c @ np.conj(zb) - zb @ c @ np.conj(za))
            Om[a, b] = val.real
    return Om
