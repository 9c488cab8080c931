"""Nystrom solver for the rigid-obstacle (Dirichlet) exterior Navier problem in 2-D.

The scattered field is sought as u_scat = D(phi) - i eta S(phi) with the
traction double layer D and single layer S.  The exterior trace gives

    (1/2 I + K - i eta S) phi = -u_inc   on the boundary.

Each parametrised kernel is split as

    k(t, tau) = k_L ln(4 sin^2((t - tau)/2)) + k_C cot((tau - t)/2) + k_R,

with k_L, k_R smooth and k_C a constant matrix (the Cauchy part of the
elastic double layer).  The log and cot parts are integrated exactly against
trigonometric interpolants of the density; k_R uses the trapezoidal rule.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack
from scipy.spatial import cKDTree

from .errors import AccuracyError, DomainError, NearSingularError, SolverError
from .geometry import BoundaryCurve, inside_polygon
from .kernels import (
    COMBINED,
    check_target_distance,
    coefficients_from_hankel,
    layer_kernel_matrix,
    log_hankel,
    phi_from_coefficients,
    traction_from_coefficients,
)
from .media import evaluate_incident, wavenumbers
from .special import hankel01

EULER_GAMMA = 0.57721566490153286061
MIN_NODES = 32
SINGULAR_CONDITION = 1e14
_J = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass(frozen=True)
class NystromGrid:
    """Equispaced parameter nodes on a curve with the derived boundary data."""

    curve: BoundaryCurve
    n: int

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n:
            raise DomainError(f"node count must be an integer, got {self.n!r}")
        if self.n < MIN_NODES or self.n % 2:
            raise DomainError(f"node count must be even and >= {MIN_NODES}, got {self.n}")

    @property
    def sample(self):
        return self.curve.sample(self.n)

    @property
    def nodes(self):
        return 2.0 * np.pi * np.arange(self.n) / self.n

    @property
    def points(self):
        return self.sample.points

    @property
    def normals(self):
        return self.sample.normals

    @property
    def jacobians(self):
        return self.sample.speed


def log_weights(n):
    """R(theta_j): exact weights for the log(4 sin^2) kernel at theta_j = 2 pi j / n."""
    theta = 2.0 * np.pi * np.arange(n) / n
    m = np.arange(1, n // 2)
    s = np.cos(np.outer(theta, m)) @ (1.0 / m)
    return -(4.0 * np.pi / n) * s - (4.0 * np.pi / n ** 2) * np.cos(0.5 * n * theta)


def cot_weights(n):
    """Weights T_j with (1/2pi) PV int cot((tau - t)/2) f(tau) dtau = sum_j T_j f(t + theta_j)."""
    j = np.arange(1, n)
    w = np.zeros(n)
    w[1:] = (1.0 - (-1.0) ** j) * (1.0 / np.tan(np.pi * j / n)) / n
    return w


def _static_constants(medium):
    lam, mu = medium.lam, medium.mu
    c0 = mu / (2.0 * np.pi * (lam + 2.0 * mu))
    b0 = (lam + mu) / (4.0 * np.pi * mu * (lam + 2.0 * mu))
    a0 = (lam + 3.0 * mu) / (4.0 * np.pi * mu * (lam + 2.0 * mu))
    return a0, b0, c0


def single_layer_constant(medium):
    """Limit of a(r) + A0 ln r as r -> 0 (a0 the log coefficient of a)."""
    wn = wavenumbers(medium)
    ks, kp = wn.omega_s, wn.omega_p
    q = (kp / ks) ** 2
    g = EULER_GAMMA

    def f0(k):
        # limit of H1reg(z)/z - (2i/pi)(1/2) ln(z) ... collected per wave
        return 0.5 + 1j * (math.log(k / 2.0) / np.pi - (1.0 - 2.0 * g) / (2.0 * np.pi))

    h0 = 1.0 + (2j / np.pi) * (g + math.log(ks / 2.0))
    return (0.25j / medium.mu) * (h0 - f0(ks) + q * f0(kp))


def _diagonal_blocks(medium, smp, idx, eta):
    """Smooth-part limits k_R(t, t) of the combined kernel at the nodes ``idx``."""
    a0, b0, c0 = _static_constants(medium)
    sp = smp.speed[idx]
    tau = smp.d1[idx] / sp[:, None]
    kap = smp.curvature[idx]
    dd = np.sum(smp.d1[idx] * smp.d2[idx], -1) / sp ** 2
    tt = tau[:, :, None] * tau[:, None, :]
    eye = np.eye(2)[None]
    dbl = sp[:, None, None] * (
        c0 * (-0.5 * kap)[:, None, None] * eye
        + 4.0 * medium.mu * b0 * (-0.5 * kap)[:, None, None] * tt
    )
    dbl = dbl - (c0 * 0.5 * dd)[:, None, None] * _J[None]
    an = single_layer_constant(medium)
    sgl = sp[:, None, None] * (
        (an - a0 * np.log(sp))[:, None, None] * eye + b0 * tt
    )
    return dbl - 1j * eta * sgl, -0.5 * sp[:, None, None] * a0 * eye * (-1j * eta)


def _shifted_rows(medium, curve, tt, n, eta):
    """Rows of (1/2 I + K - i eta S) for targets at parameters ``tt``.

    Column j of the result acts on the density value at parameter
    ``tt + 2 pi j / n``.  Shape (P, 2, 2, n).
    """
    tt = np.atleast_1d(np.asarray(tt, dtype=float))
    P = tt.size
    theta = 2.0 * np.pi * np.arange(n) / n
    R = log_weights(n)
    T = cot_weights(n)
    _, _, c0 = _static_constants(medium)
    kc = -0.5 * c0 * _J
    wn = wavenumbers(medium)
    out = np.empty((P, 2, 2, n), dtype=complex)
    step = max(1, 120_000 // n)
    for s in range(0, P, step):
        tk = tt[s:s + step]
        x, _, _ = curve.derivatives(tk)
        src = tk[:, None] + theta[None, 1:]
        y, dy, _ = curve.derivatives(src)
        sp = np.linalg.norm(dy, axis=-1)
        nu = np.stack([dy[..., 1], -dy[..., 0]], -1) / sp[..., None]
        d = x[:, None, :] - y
        r = np.linalg.norm(d, axis=-1)
        rhat = d / r[..., None]
        hs, hp = hankel01(wn.omega_s * r), hankel01(wn.omega_p * r)
        a, da, b, db = coefficients_from_hankel(medium, r, hs, hp)
        al, dal, bl, dbl_ = coefficients_from_hankel(
            medium, r, log_hankel(hs), log_hankel(hp), log_part=True)
        kd = traction_from_coefficients(medium, a, da, b, db, rhat, r, nu)
        kdl = 0.5 * traction_from_coefficients(medium, al, dal, bl, dbl_, rhat, r, nu)
        ks = phi_from_coefficients(a, b, rhat)
        ksl = 0.5 * phi_from_coefficients(al, bl, rhat)
        kfull = (kd - 1j * eta * ks) * sp[..., None, None]
        klog = (kdl - 1j * eta * ksl) * sp[..., None, None]
        lg = np.log(4.0 * np.sin(0.5 * theta[1:]) ** 2)
        ct = 1.0 / np.tan(0.5 * theta[1:])
        kr = kfull - klog * lg[None, :, None, None] - kc[None, None] * ct[None, :, None, None]
        blk = R[None, 1:, None, None] * klog + (2.0 * np.pi / n) * kr
        blk = blk + (2.0 * np.pi) * T[None, 1:, None, None] * kc[None, None]
        # diagonal column
        dsmp = _PointSample(curve, tk)
        kr0, kl0 = _diagonal_blocks(medium, dsmp, slice(None), eta)
        diag = R[0] * kl0 + (2.0 * np.pi / n) * kr0 + 0.5 * np.eye(2)[None]
        out[s:s + step, :, :, 0] = diag
        out[s:s + step, :, :, 1:] = np.transpose(blk, (0, 2, 3, 1))
    return out


class _PointSample:
    """Curve data at arbitrary parameters, in the layout of CurveSample."""

    def __init__(self, curve, t):
        x, dx, ddx = curve.derivatives(t)
        self.points, self.d1, self.d2 = x, dx, ddx
        self.speed = np.linalg.norm(dx, axis=-1)
        self.curvature = (dx[:, 0] * ddx[:, 1] - dx[:, 1] * ddx[:, 0]) / self.speed ** 3


def assemble(medium, curve, n, eta=None):
    """Dense 2n x 2n matrix of 1/2 I + K - i eta S (component-major ordering)."""
    grid = NystromGrid(curve, n)
    if eta is None:
        eta = wavenumbers(medium).omega_s
    if not (math.isfinite(eta) and eta > 0):
        raise DomainError(f"eta must be positive, got {eta}")
    rows = _shifted_rows(medium, curve, grid.nodes, n, eta)
    i = np.arange(n)
    cols = (i[:, None] + i[None, :]) % n
    full = np.empty((n, 2, 2, n), dtype=complex)
    full[i[:, None], :, :, cols] = np.transpose(rows, (0, 3, 1, 2))
    return np.transpose(full, (1, 0, 2, 3)).reshape(2 * n, 2 * n)


def shift_density(density, s):
    """Trigonometric interpolant of nodal values ``density`` (n, 2) on the grid shifted by ``s``.

    ``s`` may be an array; the result has shape (len(s), n, 2).
    """
    density = np.asarray(density, dtype=complex)
    n = density.shape[0]
    s = np.atleast_1d(np.asarray(s, dtype=float))
    c = np.fft.fft(density, axis=0)
    k = np.fft.fftfreq(n, 1.0 / n)
    ph = np.exp(1j * np.outer(s, k))
    # Nyquist mode taken as cos(n t / 2) so that real data stays real
    ph[:, n // 2] = np.cos(0.5 * n * s)
    return np.fft.ifft(ph[:, :, None] * c[None], axis=1)


def upsample_density(density, factor):
    """Zero-padded trigonometric interpolation onto ``factor`` times more nodes."""
    density = np.asarray(density, dtype=complex)
    n = density.shape[0]
    if factor == 1:
        return density
    c = np.fft.fft(density, axis=0)
    m = n * factor
    out = np.zeros((m, 2), dtype=complex)
    h = n // 2
    out[:h] = c[:h]
    out[-h + 1:] = c[-h + 1:]
    out[h] = 0.5 * c[h]
    out[-h] = 0.5 * c[h]
    return np.fft.ifft(out, axis=0) * factor


@dataclass(frozen=True)
class ScatteringSolution:
    medium: object
    curve: BoundaryCurve
    grid: NystromGrid
    density: np.ndarray
    incident: object
    eta: float
    condition: float
    residual: float
    tolerance: float

    @property
    def n(self):
        return self.grid.n


def boundary_residual(medium, curve, incident, density, eta, probes=None):
    """max over off-node boundary points of |u_inc + u_scat| (exterior trace)."""
    n = density.shape[0]
    if probes is None:
        probes = 4 * n
    s = 2.0 * np.pi * (np.arange(probes) + 0.5) / probes
    worst = 0.0
    step = max(1, 120_000 // n)
    for a in range(0, probes, step):
        sk = s[a:a + step]
        rows = _shifted_rows(medium, curve, sk, n, eta)
        dens = shift_density(density, sk)
        us = np.einsum("pijn,pnj->pi", rows, dens)
        ui = evaluate_incident(incident, medium, curve.point(sk))
        worst = max(worst, float(np.linalg.norm(ui + us, axis=-1).max()))
    return worst


def _condition_number(a, lu):
    anorm = np.abs(a).sum(axis=0).max()
    rcond, info = lapack.zgecon(lu, anorm, norm="1")
    if info != 0 or rcond <= 0:
        return math.inf
    return 1.0 / rcond


def solve_dirichlet(medium, curve, incident, n, eta=None, tol=None, n_max=None):
    """Solve the rigid-obstacle problem on ``n`` nodes.

    If ``tol`` is given and the boundary residual exceeds it, ``n`` is
    doubled up to ``n_max``; failing that an AccuracyError is raised.
    """
    if eta is None:
        eta = wavenumbers(medium).omega_s
    while True:
        a = assemble(medium, curve, n, eta)
        lu, piv, info = lapack.zgetrf(a)
        cond = math.inf if info > 0 else _condition_number(a, lu)
        if cond > SINGULAR_CONDITION:
            raise SolverError(f"system numerically singular (condition ~ {cond:.3g})", cond)
        grid = NystromGrid(curve, n)
        rhs = -evaluate_incident(incident, medium, grid.points)
        x = sla.lu_solve((lu, piv), rhs.T.reshape(-1))
        density = x.reshape(2, n).T.copy()
        res = boundary_residual(medium, curve, incident, density, eta)
        if tol is None or res <= tol:
            break
        if n_max is None or 2 * n > n_max:
            raise AccuracyError(f"boundary residual {res:.3g} > {tol:.3g} at n = {n}", res)
        n *= 2
    density.setflags(write=False)
    return ScatteringSolution(
        medium, curve, grid, density, incident, float(eta), float(cond), res,
        float("nan") if tol is None else float(tol),
    )


def scattered_field(sol, x, part="full"):
    """u_scat = (D - i eta S) phi at exterior points ``x`` (..., 2)."""
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1, 2)
    smp = sol.grid.sample
    check_target_distance(flat, smp.points, smp.spacing)
    if inside_polygon(flat, sol.curve.points(4096)).any():
        raise NearSingularError("evaluation point inside the scatterer")
    out = np.empty((flat.shape[0], 2), dtype=complex)
    dist = _node_distance(flat, smp.points)
    factor = np.clip(np.ceil(8.0 * smp.spacing / dist), 1, 16).astype(int)
    factor = 2 ** np.ceil(np.log2(factor)).astype(int)
    for f in np.unique(factor):
        sel = factor == f
        m = sol.n * f
        fs = sol.curve.sample(m)
        dens = upsample_density(sol.density, f)
        w = fs.speed * (2.0 * np.pi / m)
        mat = layer_kernel_matrix(COMBINED, sol.medium, flat[sel], fs.points, fs.normals, w,
                                  part, sol.eta)
        out[sel] = mat @ dens.T.reshape(-1)
    return out.reshape(x.shape[:-1] + (2,))


def _node_distance(targets, nodes):
    return cKDTree(nodes).query(targets)[0]


def evaluate_field(sol, x):
    """Total field u_inc + u_scat at exterior points."""
    x = np.asarray(x, dtype=float)
    return evaluate_incident(sol.incident, sol.medium, x) + scattered_field(sol, x)
