"""Helmholtz decomposition, far-field patterns, radiation diagnostics, error norms."""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import distance_to_polyline
from .media import Q, wavenumbers
from .solver import ScatteringSolution, evaluate_field, scattered_field

MIN_DIRECTIONS = 64
CSV_COLUMNS = ("theta", "re_up", "im_up", "re_us", "im_us")


@dataclass(frozen=True)
class FarFieldPattern:
    """Scalar far-field amplitudes on M equispaced directions.

    ``u_inf_p`` multiplies x_hat and ``u_inf_s`` multiplies Q x_hat.
    """

    theta: np.ndarray
    u_inf_p: np.ndarray
    u_inf_s: np.ndarray

    def __post_init__(self):
        if self.theta.size < MIN_DIRECTIONS:
            raise DomainError(f"at least {MIN_DIRECTIONS} directions required")
        if not (self.theta.shape == self.u_inf_p.shape == self.u_inf_s.shape):
            raise DomainError("pattern arrays must share one shape")

    @property
    def M(self):
        return self.theta.size

    @property
    def directions(self):
        return np.stack([np.cos(self.theta), np.sin(self.theta)], -1)

    @property
    def U_p(self):
        return self.u_inf_p[:, None] * self.directions

    @property
    def U_s(self):
        return self.u_inf_s[:, None] * (self.directions @ Q.T)


def equispaced_angles(M):
    return 2.0 * np.pi * np.arange(M) / M


def far_field(sol, M=360):
    """Far-field pattern of the layer representation by the trapezoidal rule."""
    if M < MIN_DIRECTIONS:
        raise DomainError(f"at least {MIN_DIRECTIONS} directions required, got {M}")
    med = sol.medium
    wn = wavenumbers(med)
    kp, ks = wn.omega_p, wn.omega_s
    lam, mu, eta = med.lam, med.mu, sol.eta
    smp = sol.grid.sample
    y, nu, phi = smp.points, smp.normals, sol.density
    w = smp.speed * (2.0 * np.pi / sol.n)
    theta = equispaced_angles(M)
    xh = np.stack([np.cos(theta), np.sin(theta)], -1)
    xp = xh @ Q.T
    xn, pn = xh @ nu.T, xh @ phi.T
    qn, qp = xp @ nu.T, xp @ phi.T
    nphi = np.sum(nu * phi, -1)[None, :]
    gp = np.exp(0.25j * np.pi) / math.sqrt(8.0 * np.pi * kp)
    gs = np.exp(0.25j * np.pi) / math.sqrt(8.0 * np.pi * ks)
    ep = np.exp(-1j * kp * (xh @ y.T))
    es = np.exp(-1j * ks * (xh @ y.T))
    fp = -1j * kp * (2.0 * mu * xn * pn + lam * nphi) - 1j * eta * pn
    fs = -1j * ks * mu * (xn * qp + qn * pn) - 1j * eta * qp
    up = gp / (lam + 2.0 * mu) * ((ep * fp) @ w)
    us = gs / mu * ((es * fs) @ w)
    return FarFieldPattern(theta, up, us)


def zero_pattern(M=360):
    z = np.zeros(M, dtype=complex)
    return FarFieldPattern(equispaced_angles(M), z, z.copy())


def farfield_error(U, U2):
    """Trapezoidal L2(S^1) norm of (U_p - U2_p, U_s - U2_s)."""
    if U.theta.shape != U2.theta.shape or not np.array_equal(U.theta, U2.theta):
        raise DomainError("far-field patterns are sampled on different direction grids")
    dp = U.u_inf_p - U2.u_inf_p
    ds = U.u_inf_s - U2.u_inf_s
    return float(math.sqrt(2.0 * np.pi / U.M * np.sum(np.abs(dp) ** 2 + np.abs(ds) ** 2)))


def pattern_norm(U):
    return farfield_error(U, FarFieldPattern(U.theta, 0 * U.u_inf_p, 0 * U.u_inf_s))


def write_farfield_csv(U, path, header=()):
    """Write the pattern with 17 significant digits; ``header`` lines are prefixed by '# '."""
    with open(path, "w", newline="") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        wr = csv.writer(fh)
        wr.writerow(CSV_COLUMNS)
        for t, p, s in zip(U.theta, U.u_inf_p, U.u_inf_s):
            wr.writerow([f"{v:.17g}" for v in (t, p.real, p.imag, s.real, s.imag)])


def read_farfield_csv(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    if tuple(rows[0]) != CSV_COLUMNS:
        raise DomainError(f"unexpected far-field CSV header {rows[0]}")
    a = np.array([[float(v) for v in r] for r in rows[1:]])
    return FarFieldPattern(a[:, 0], a[:, 1] + 1j * a[:, 2], a[:, 3] + 1j * a[:, 4])


@dataclass(frozen=True)
class DecomposedField:
    u: np.ndarray
    u_p: np.ndarray
    u_s: np.ndarray
    h: float

    @property
    def defect(self):
        return float(np.linalg.norm(self.u - self.u_p - self.u_s))


def default_step(medium, fraction=1e-4):
    """FD step as a fraction of the shorter (transversal) wavelength."""
    return fraction * 2.0 * np.pi / wavenumbers(medium).omega_s


def _sampler(field):
    if isinstance(field, ScatteringSolution):
        return lambda x: evaluate_field(field, x)
    return field


def _second_derivatives(f, x, h):
    """Central-difference Hessian of a vector field; returns (H11, H12, H22), each (2,)."""
    e1, e2 = np.array([h, 0.0]), np.array([0.0, h])
    pts = np.array([x, x + e1, x - e1, x + e2, x - e2,
                    x + e1 + e2, x + e1 - e2, x - e1 + e2, x - e1 - e2])
    v = np.asarray(f(pts))
    c = v[0]
    h11 = (v[1] - 2 * c + v[2]) / h ** 2
    h22 = (v[3] - 2 * c + v[4]) / h ** 2
    h12 = (v[5] - v[6] - v[7] + v[8]) / (4 * h ** 2)
    return c, h11, h12, h22


def helmholtz_decompose(field, medium, x, h=None):
    """u_p = -grad div u / k_p^2 and u_s = (grad div u - lap u) / k_s^2 by central differences.

    ``field`` is a callable mapping (m, 2) points to (m, 2) values, or a
    ScatteringSolution (then the total field is used and x must keep a
    distance > 4h from the boundary).
    """
    x = np.asarray(x, dtype=float)
    if h is None:
        h = default_step(medium)
    if not h > 0:
        raise DomainError("FD step must be positive")
    if isinstance(field, ScatteringSolution):
        dist = distance_to_polyline(x[None], field.curve.points(4096))[0]
        if dist <= 4 * h:
            raise DomainError(f"FD step {h:.3g} too large at distance {dist:.3g} from the boundary")
    f = _sampler(field)
    c, h11, h12, h22 = _second_derivatives(f, x, h)
    graddiv = np.array([h11[0] + h12[1], h12[0] + h22[1]])
    lap = h11 + h22
    wn = wavenumbers(medium)
    up = -graddiv / wn.omega_p ** 2
    us = (graddiv - lap) / wn.omega_s ** 2
    return DecomposedField(c, up, us, h)


def fd_div_curl(sampler, x, h):
    """Central-difference divergence and scalar curl (d1 v2 - d2 v1) of a vector field."""
    x = np.asarray(x, dtype=float)
    pts = np.array([x + [h, 0], x - [h, 0], x + [0, h], x - [0, h]])
    v = np.asarray(sampler(pts))
    d1 = (v[0] - v[1]) / (2 * h)
    d2 = (v[2] - v[3]) / (2 * h)
    return d1[0] + d2[1], d1[1] - d2[0]


def part_sampler(field, medium, part, h):
    """Pointwise sampler of u_p or u_s obtained from ``helmholtz_decompose``."""
    def f(pts):
        out = []
        for p in np.atleast_2d(pts):
            dec = helmholtz_decompose(field, medium, p, h)
            out.append(dec.u_p if part == "p" else dec.u_s)
        return np.array(out)
    return f


def _radial_residual(sample_p, sample_s, kp, ks, r, M, h):
    theta = equispaced_angles(M)
    xh = np.stack([np.cos(theta), np.sin(theta)], -1)
    out = []
    for smp, k in ((sample_p, kp), (sample_s, ks)):
        u0 = smp(r * xh)
        du = (smp((r + h) * xh) - smp((r - h) * xh)) / (2 * h)
        res = math.sqrt(r) * np.linalg.norm(du - 1j * k * u0, axis=-1)
        out.append(float(res.max()))
    return tuple(out)


def radiation_residual(sol, r, M=64, h=None):
    """max over directions of r^(1/2) |(d_r - i k_a) u_scat_a(r x_hat)| for a = p, s.

    The two wave parts come from the split kernels, so no FD Helmholtz
    decomposition is needed; the radial derivative is a central difference.
    """
    wn = wavenumbers(sol.medium)
    rmax = sol.curve.max_radius()
    if r <= rmax + 1:
        raise DomainError(f"radius {r} must exceed {rmax + 1:.6g}")
    if h is None:
        h = default_step(sol.medium, 1e-3)
    return _radial_residual(
        lambda x: scattered_field(sol, x, part="p"),
        lambda x: scattered_field(sol, x, part="s"),
        wn.omega_p, wn.omega_s, r, M, h,
    )


def radiation_residual_of_fields(sample_p, sample_s, medium, r, M=64, h=None):
    """Same diagnostic for arbitrary samplers of the two wave parts."""
    wn = wavenumbers(medium)
    if h is None:
        h = default_step(medium, 1e-3)
    return _radial_residual(sample_p, sample_s, wn.omega_p, wn.omega_s, r, M, h)


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def probes(self, count, seed=None):
        c = np.asarray(self.center, dtype=float)
        nr = max(2, int(round(math.sqrt(count / 4.0))))
        nt = max(8, count // nr)
        if seed is None:
            rr = self.radius * np.arange(1, nr + 1) / nr
            tt = 2.0 * np.pi * np.arange(nt) / nt
            pts = np.stack(np.meshgrid(rr, tt, indexing="ij"), -1).reshape(-1, 2)
            pts = np.vstack([[0.0, 0.0], np.stack([pts[:, 0] * np.cos(pts[:, 1]),
                                                   pts[:, 0] * np.sin(pts[:, 1])], -1)])
            return c + pts
        rng = np.random.default_rng(np.uint64(seed))
        rr = self.radius * np.sqrt(rng.random(count))
        tt = 2.0 * np.pi * rng.random(count)
        return c + np.stack([rr * np.cos(tt), rr * np.sin(tt)], -1)

    def inner_radius(self):
        return float(np.linalg.norm(self.center)) - self.radius


@dataclass(frozen=True)
class Annulus:
    inner: float
    outer: float

    @classmethod
    def around(cls, ball):
        c = float(np.linalg.norm(ball.center))
        return cls(c - ball.radius, c + ball.radius)

    def probes(self, count, seed=None):
        if seed is None:
            nr = max(2, int(round(math.sqrt(count / 16.0))))
            nt = max(16, count // nr)
            rr = self.inner + (self.outer - self.inner) * np.arange(nr) / (nr - 1)
            tt = 2.0 * np.pi * np.arange(nt) / nt
            r, t = np.meshgrid(rr, tt, indexing="ij")
        else:
            rng = np.random.default_rng(np.uint64(seed))
            r = np.sqrt(self.inner ** 2 + (self.outer ** 2 - self.inner ** 2) * rng.random(count))
            t = 2.0 * np.pi * rng.random(count)
        return np.stack([r * np.cos(t), r * np.sin(t)], -1).reshape(-1, 2)

    def inner_radius(self):
        return self.inner


def near_field_error(solA, solB, region, probes=400, seed=None, extra_points=None):
    """sup over probe points of |u_A - u_B| on a ball or annulus outside both scatterers.

    ``extra_points`` are added to the probe set (used to make the annulus
    sup dominate the sup over a ball it contains).
    """
    for sol in (solA, solB):
        if region.inner_radius() <= sol.curve.max_radius():
            raise DomainError("probe region intersects a scatterer")
    pts = region.probes(probes, seed)
    if extra_points is not None:
        pts = np.vstack([pts, extra_points])
    diff = evaluate_field(solA, pts) - evaluate_field(solB, pts)
    return float(np.linalg.norm(diff, axis=-1).max())
