"""Independent reference computations shared by the test modules."""
import numpy as np


def slope_oracle(eps, x):
    """-q'_eps(x) written out directly (no shared code with the package)."""
    x = np.asarray(x, dtype=float)
    inside = (x > 0) & (x < eps)
    xs = np.where(inside, x, 0.5 * eps)
    w = eps * eps - xs * xs
    val = np.exp(-xs * xs / (eps * eps * w)) * 2 * xs / (w * w)
    return np.where(inside, val, 0.0)


def ds_grid_oracle(P, eps, h=1e-3, tol=0.08):
    """Dense-grid brute force for 2D dynamical supports.

    Scans interior points m on a grid of spacing h, groups them by active
    ray set, forms c(m) = sum_active -q'(r_rho(m)) u_rho and records integer
    vectors within ``tol`` of some c(m).  Returns {frozenset(rays): set(v)}.
    """
    U = np.array(P.normals, dtype=float)
    off = np.array([float(b) for b in P.offsets])
    V = np.array(P.vertices, dtype=float)
    lo, hi = V.min(axis=0), V.max(axis=0)
    xs = np.arange(lo[0] + h / 2, hi[0], h)
    ys = np.arange(lo[1] + h / 2, hi[1], h)
    out = {}
    for x in np.array_split(xs, max(1, len(xs) // 200)):
        m = np.stack(np.meshgrid(x, ys, indexing="ij"), axis=-1).reshape(-1, 2)
        r = m @ U.T - off
        m, r = m[np.all(r > 0, axis=1)], r[np.all(r > 0, axis=1)]
        act = (r > 0) & (r < eps)
        c = slope_oracle(eps, r) @ U
        near = np.rint(c)
        hit = np.all(np.abs(c - near) < tol, axis=1) & np.any(near != 0, axis=1)
        rows = np.unique(np.concatenate([act[hit].astype(int), near[hit].astype(int)], axis=1), axis=0)
        k = U.shape[0]
        for row in rows:
            idx = np.nonzero(row[:k])[0]
            v = row[k:]
            if idx.size and _in_relint(U[idx], v):
                out.setdefault(frozenset(idx.tolist()), set()).add(tuple(v.tolist()))
    return out


def _in_relint(gens, v):
    """v = sum d_i g_i with every d_i > 0 (gens linearly independent)."""
    d, *_ = np.linalg.lstsq(gens.T, v.astype(float), rcond=None)
    return np.allclose(gens.T @ d, v) and np.all(d > 1e-9)


def d_theta_fd(P, s, alpha, step=1e-5):
    """Exterior derivative of theta by central differences of its coefficients.

    theta = sum_k a_k dx_k in coordinates x = (s, alpha); (d theta)_{ij} =
    d_i a_j - d_j a_i.  The coefficients a come from the complex formula.
    """
    from toric_liouville.kahler import pair_complex, theta_complex

    n = P.dim
    x0 = np.concatenate([s, alpha])

    def coeffs(x):
        z = np.exp(x[:n] + 1j * x[n:])
        basis = np.concatenate([z * np.eye(n), 1j * z * np.eye(n)])  # dz of d/ds_j, d/dalpha_j
        return np.array([pair_complex(theta_complex(P, z), b).real for b in basis])

    J = np.zeros((2 * n, 2 * n))
    for i in range(2 * n):
        e = np.zeros(2 * n)
        e[i] = step
        J[i] = (coeffs(x0 + e) - coeffs(x0 - e)) / (2 * step)
    return J - J.T


def collar_points(P, eps, count, rng, min_r=0.02, min_field=1e-3):
    """Stratum points with a non-negligible Hamiltonian field.

    m is drawn uniformly from P (bounding-box rejection), kept if every
    radial coordinate is at least ``min_r`` and the active rays span a cone,
    then pulled back by moment-map inversion with random angles.
    """
    import warnings

    from toric_liouville.dynamics import field_analytic
    from toric_liouville.kahler import TorusPoint, invert_moment_map
    from toric_liouville.smoothing import classify_stratum

    V = np.array(P.vertices, dtype=float)
    lo, hi = V.min(axis=0), V.max(axis=0)
    out = []
    while len(out) < count:
        m = rng.uniform(lo, hi)
        if P.radial_coordinates(m).min() < min_r:
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            if not classify_stratum(P, eps, m).is_stratum:
                continue
        p = TorusPoint(invert_moment_map(P, m), rng.uniform(0, 2 * np.pi, P.dim))
        if np.abs(field_analytic(P, eps, p)).max() >= min_field:
            out.append(p)
    return out
