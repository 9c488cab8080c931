"""Helmholtz and Navier fundamental solutions, traction kernels, layer potentials.

In two dimensions the Navier fundamental solution is written as

    Phi(x, y) = a(r) I + b(r) rhat rhat^T,   r = |x - y|,  rhat = (x - y)/r,

and the traction (in y, row by row, normal nu at y) as

    T_y Phi = -mu*alpha*(c I + nu rhat^T) - beta*rhat nu^T + gamma*c*rhat rhat^T

with c = rhat.nu, alpha = a' + b/r, beta = 2 mu b/r + lam (a' + b' + b/r),
gamma = 2 mu (2 b/r - b').  The 1/r^2 poles of the individual wave
contributions to a and b cancel; they are removed analytically through
H1reg = H1 + 2i/(pi z) so that the full kernel is evaluated without
cancellation near the diagonal.
"""

import numpy as np
from scipy.spatial import cKDTree

from .errors import NearSingularError, SingularityError
from .media import wavenumbers
from .special import hankel01

FULL, P_PART, S_PART = "full", "p", "s"


def _as_points(x):
    return np.asarray(x, dtype=float)


def _separation(x, y):
    x = _as_points(x)
    y = _as_points(y)
    d = x - y
    r = np.sqrt(np.sum(d * d, axis=-1))
    if np.any(r == 0.0):
        raise SingularityError("kernel evaluated at coincident points x = y")
    return d, r


def helmholtz_phi(k, x, y, N=2):
    """Outgoing fundamental solution of the Helmholtz equation with wave number k."""
    _, r = _separation(x, y)
    if N == 2:
        return 0.25j * hankel01(k * r)[0]
    if N == 3:
        return np.exp(1j * k * r) / (4.0 * np.pi * r)
    raise ValueError(f"N must be 2 or 3, got {N}")


def _wave_terms(k, r, h0, h1, h1reg):
    z = k * r
    f = h1reg / z
    g = h0 - 2.0 * f
    return z, f, g


def radial_coefficients(medium, r, part=FULL, log_part=False):
    """Return ``(a, a', b, b')`` for the 2-D Navier fundamental solution.

    ``part`` selects the longitudinal (``"p"``) or transversal (``"s"``)
    contribution, or their sum.  With ``log_part=True`` every Hankel
    function is replaced by ``(2i/pi) J``, which yields the coefficient of
    ``log r`` in the small-r expansion (used by the Nystrom splitting).
    """
    if part not in (FULL, P_PART, S_PART):
        raise ValueError(f"unknown part {part!r}")
    r = np.asarray(r, dtype=float)
    wn = wavenumbers(medium)
    hs = hankel01(wn.omega_s * r) if part != P_PART else None
    hp = hankel01(wn.omega_p * r) if part != S_PART else None
    if log_part:
        return coefficients_from_hankel(medium, r, log_hankel(hs), log_hankel(hp), part, True)
    return coefficients_from_hankel(medium, r, hs, hp, part)


def log_hankel(h):
    """Replace (H0, H1, H1reg) by their log r coefficients (2i/pi)(J0, J1, J1)."""
    if h is None:
        return None
    scale = 2j / np.pi
    return scale * h[0].real, scale * h[1].real, scale * h[1].real


def coefficients_from_hankel(medium, r, hs, hp, part=FULL, log_part=False):
    """``(a, a', b, b')`` from precomputed ``hankel01`` triples at k_s r and k_p r."""
    wn = wavenumbers(medium)
    ks, kp = wn.omega_s, wn.omega_p
    q = (kp / ks) ** 2
    c = 0.25j / medium.mu
    a = np.zeros(r.shape, dtype=complex)
    da = np.zeros_like(a)
    b = np.zeros_like(a)
    db = np.zeros_like(a)
    if part in (FULL, S_PART):
        h0, h1, h1reg = hs
        z, f, g = _wave_terms(ks, r, h0, h1, h1reg)
        a += c * (h0 - f)
        da += c * ks * (-h1 - g / z)
        b += -c * g
        db += -c * ks * (-h1 - 2.0 * g / z)
    if part in (FULL, P_PART):
        h0, h1, h1reg = hp
        z, f, g = _wave_terms(kp, r, h0, h1, h1reg)
        a += c * q * f
        da += c * q * kp * g / z
        b += c * q * g
        db += c * q * kp * (-h1 - 2.0 * g / z)
    if part != FULL and not log_part:
        # restore the pole each wave carries on its own
        rw2 = medium.rho * medium.omega ** 2
        sign = 1.0 if part == S_PART else -1.0
        a += sign * (-1.0 / (2.0 * np.pi * rw2 * r ** 2))
        da += sign * (1.0 / (np.pi * rw2 * r ** 3))
        b += sign * (1.0 / (np.pi * rw2 * r ** 2))
        db += sign * (-2.0 / (np.pi * rw2 * r ** 3))
    return a, da, b, db


def phi_from_coefficients(a, b, rhat):
    """Assemble a I + b rhat rhat^T with shape (..., 2, 2)."""
    out = b[..., None, None] * rhat[..., :, None] * rhat[..., None, :]
    out[..., 0, 0] += a
    out[..., 1, 1] += a
    return out


def traction_from_coefficients(medium, a, da, b, db, rhat, r, nu, N=2):
    lam, mu = medium.lam, medium.mu
    c = np.sum(rhat * nu, axis=-1)
    alpha = da + b / r
    beta = 2.0 * mu * b / r + lam * (da + db + (N - 1) * b / r)
    gam = 2.0 * mu * (2.0 * b / r - db)
    out = (-mu * alpha)[..., None, None] * nu[..., :, None] * rhat[..., None, :]
    out -= beta[..., None, None] * rhat[..., :, None] * nu[..., None, :]
    out += (gam * c)[..., None, None] * rhat[..., :, None] * rhat[..., None, :]
    diag = -mu * alpha * c
    out[..., 0, 0] += diag
    out[..., 1, 1] += diag
    return out


def _navier_phi_3d(medium, d, r):
    wn = wavenumbers(medium)
    rw2 = medium.rho * medium.omega ** 2

    def derivs(k):
        f = np.exp(1j * k * r) / (4.0 * np.pi * r)
        f1 = f * (1j * k - 1.0 / r)
        f2 = f * (-k * k - 2j * k / r + 2.0 / r ** 2)
        return f, f1, f2

    fs, fs1, fs2 = derivs(wn.omega_s)
    fp, fp1, fp2 = derivs(wn.omega_p)
    a = fs / medium.mu + (fs1 - fp1) / (r * rw2)
    b = ((fs2 - fs1 / r) - (fp2 - fp1 / r)) / rw2
    rhat = d / r[..., None]
    out = b[..., None, None] * rhat[..., :, None] * rhat[..., None, :]
    for i in range(3):
        out[..., i, i] += a
    return out


def navier_Phi(medium, x, y, N=2, part=FULL):
    """Fundamental solution of the Navier equation, shape (..., N, N)."""
    d, r = _separation(x, y)
    if N == 3:
        if part != FULL:
            raise ValueError("wave splitting is only provided for N = 2")
        return _navier_phi_3d(medium, d, r)
    if N != 2:
        raise ValueError(f"N must be 2 or 3, got {N}")
    a, _, b, _ = radial_coefficients(medium, r, part)
    return phi_from_coefficients(a, b, d / r[..., None])


def traction_kernel(medium, y, nu, x, part=FULL):
    """Row-wise traction T_y Phi(x, y) for the normal ``nu`` at ``y`` (N = 2)."""
    d, r = _separation(x, y)
    nu = np.broadcast_to(np.asarray(nu, dtype=float), d.shape)
    a, da, b, db = radial_coefficients(medium, r, part)
    return traction_from_coefficients(medium, a, da, b, db, d / r[..., None], r, nu)


SINGLE, DOUBLE, COMBINED = "single", "double", "combined"
_CHUNK = 200_000


def layer_kernel_matrix(kind, medium, targets, nodes, normals, weights, part=FULL, eta=0.0):
    """Dense matrix mapping node densities (2n, component-major) to target values.

    ``kind="combined"`` gives the kernel of D - i eta S in one pass.
    """
    targets = np.atleast_2d(_as_points(targets))
    m, n = targets.shape[0], nodes.shape[0]
    out = np.empty((m, 2, 2, n), dtype=complex)
    step = max(1, _CHUNK // max(n, 1))
    for s in range(0, m, step):
        t = targets[s:s + step, None, :]
        d, r = _separation(t, nodes[None, :, :])
        a, da, b, db = radial_coefficients(medium, r, part)
        rhat = d / r[..., None]
        if kind == SINGLE:
            ker = phi_from_coefficients(a, b, rhat)
        elif kind in (DOUBLE, COMBINED):
            nu = np.broadcast_to(normals[None, :, :], d.shape)
            ker = traction_from_coefficients(medium, a, da, b, db, rhat, r, nu)
            if kind == COMBINED:
                ker -= 1j * eta * phi_from_coefficients(a, b, rhat)
        else:
            raise ValueError(f"unknown layer kind {kind!r}")
        ker = ker * weights[None, :, None, None]
        out[s:s + step] = np.transpose(ker, (0, 2, 3, 1))
    return out.reshape(m, 2, 2 * n)


def check_target_distance(targets, nodes, spacing):
    """Refuse targets closer to the node set than ``spacing``."""
    targets = np.atleast_2d(_as_points(targets))
    dist, _ = cKDTree(nodes).query(targets)
    if np.any(dist < spacing):
        raise NearSingularError(
            f"target within {dist.min():.3g} of the boundary (node spacing {spacing:.3g});"
            " use the solver's boundary evaluation instead"
        )


def layer_potential_eval(kind, medium, curve, density, x, part=FULL):
    """Trapezoidal evaluation of the single or double layer potential at ``x``.

    ``density`` has shape (n, 2) and is sampled at the equispaced parameter
    nodes of ``curve``.  Returns complex values of shape (..., 2).
    """
    density = np.asarray(density, dtype=complex)
    n = density.shape[0]
    smp = curve.sample(n)
    x = _as_points(x)
    flat = x.reshape(-1, 2)
    check_target_distance(flat, smp.points, smp.spacing)
    w = smp.speed * (2.0 * np.pi / n)
    mat = layer_kernel_matrix(kind, medium, flat, smp.points, smp.normals, w, part)
    vals = mat @ density.T.reshape(-1)
    return vals.reshape(x.shape[:-1] + (2,))
