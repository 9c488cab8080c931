"""Quadrature checks of the Friedrichs, Maz'ya and Korn inequalities and
sampled three-spheres / chain-of-balls diagnostics for Helmholtz solutions."""

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import special as sp

from .errors import DomainError, InvalidGeometryError, QuadratureError
from .geometry import distance_to_polyline, inside_polygon
from .media import isoperimetric_constant

SLACK = 1e-8
CONVERGENCE_TOL = 1e-6
# |u| and |grad u| have kinks on zero sets, so L1 norms converge only algebraically
L1_CONVERGENCE_TOL = 1e-3
SHAPES = ("disc", "square", "annulus", "perturbed_disc")


def _gl(n, a, b):
    x, w = leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


@dataclass(frozen=True)
class TestDomain:
    """Bounded planar domain with tensor-product Gauss/trapezoid quadrature.

    disc(radius), square(side), annulus(inner, outer),
    perturbed_disc(radius, delta, m): r(theta) = radius (1 + delta cos(m theta)).
    All shapes are centred at the origin.
    """

    __test__ = False

    shape: str
    radius: float = 1.0
    side: float = 2.0
    inner: float = 0.5
    delta: float = 0.1
    m: int = 3

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise DomainError(f"unknown test domain {self.shape!r}")
        if self.shape == "annulus" and not 0 < self.inner < self.radius:
            raise DomainError("annulus needs 0 < inner < radius")
        if self.shape == "perturbed_disc" and abs(self.delta) >= 1.0 / (1 + self.m ** 2):
            raise DomainError("perturbed disc: |delta| < 1/(1+m^2) required")

    def _rho(self, t):
        return self.radius * (1 + self.delta * np.cos(self.m * t))

    def _drho(self, t):
        return -self.radius * self.delta * self.m * np.sin(self.m * t)

    def interior_quadrature(self, res=48):
        """Nodes (k, 2) and weights (k,) for integrals over the domain."""
        nt = 4 * res
        t = 2 * np.pi * np.arange(nt) / nt
        wt = np.full(nt, 2 * np.pi / nt)
        if self.shape == "square":
            x, w = _gl(res, -self.side / 2, self.side / 2)
            X, Y = np.meshgrid(x, x, indexing="ij")
            return np.stack([X.ravel(), Y.ravel()], -1), np.outer(w, w).ravel()
        if self.shape in ("disc", "annulus"):
            lo = 0.0 if self.shape == "disc" else self.inner
            r, wr = _gl(res, lo, self.radius)
            R, T = np.meshgrid(r, t, indexing="ij")
            W = np.outer(wr * r, wt)
        else:
            s, ws = _gl(res, 0.0, 1.0)
            rho = self._rho(t)
            R = np.outer(s, rho)
            T = np.broadcast_to(t, R.shape)
            W = np.outer(ws * s, wt * rho ** 2)
        pts = np.stack([(R * np.cos(T)).ravel(), (R * np.sin(T)).ravel()], -1)
        return pts, W.ravel()

    def boundary_quadrature(self, res=48):
        nt = 4 * res
        t = 2 * np.pi * np.arange(nt) / nt
        circ = np.stack([np.cos(t), np.sin(t)], -1)
        if self.shape == "square":
            h = self.side / 2
            x, w = _gl(res, -h, h)
            one = np.full_like(x, h)
            pts = np.vstack([np.stack([x, -one], -1), np.stack([one, x], -1),
                             np.stack([x, one], -1), np.stack([-one, x], -1)])
            return pts, np.tile(w, 4)
        if self.shape == "disc":
            return self.radius * circ, np.full(nt, 2 * np.pi * self.radius / nt)
        if self.shape == "annulus":
            pts = np.vstack([self.radius * circ, self.inner * circ])
            w = np.concatenate([np.full(nt, 2 * np.pi * self.radius / nt),
                                np.full(nt, 2 * np.pi * self.inner / nt)])
            return pts, w
        rho, drho = self._rho(t), self._drho(t)
        return rho[:, None] * circ, np.sqrt(rho ** 2 + drho ** 2) * 2 * np.pi / nt

    @property
    def area(self):
        if self.shape == "square":
            return self.side ** 2
        if self.shape == "disc":
            return math.pi * self.radius ** 2
        if self.shape == "annulus":
            return math.pi * (self.radius ** 2 - self.inner ** 2)
        return math.pi * self.radius ** 2 * (1 + 0.5 * self.delta ** 2)

    @property
    def boundary_measure(self):
        return float(self.boundary_quadrature(128)[1].sum())

    def contains(self, pts):
        pts = np.atleast_2d(pts)
        if self.shape == "square":
            return np.all(np.abs(pts) < self.side / 2, axis=-1)
        r = np.linalg.norm(pts, axis=-1)
        if self.shape == "disc":
            return r < self.radius
        if self.shape == "annulus":
            return (r > self.inner) & (r < self.radius)
        return r < self._rho(np.arctan2(pts[:, 1], pts[:, 0]))


def _check_converged(a, b, tol=CONVERGENCE_TOL):
    if abs(a - b) > tol * max(abs(b), 1e-300) and abs(a - b) > 1e-14:
        raise QuadratureError(f"quadrature not converged: {a!r} vs {b!r}")
    return b


def _norms(domain, u, res):
    """L2, L1 norms of u and grad u on the domain and of u on the boundary."""
    pts, w = domain.interior_quadrature(res)
    val, grad = u(pts)
    g = np.sqrt(np.sum(np.abs(grad) ** 2, -1))
    bpts, bw = domain.boundary_quadrature(res)
    bval, _ = u(bpts)
    return {
        "u_l2": math.sqrt(np.sum(w * np.abs(val) ** 2)),
        "g_l2": math.sqrt(np.sum(w * g ** 2)),
        "g_l1": float(np.sum(w * g)),
        "b_l2": math.sqrt(np.sum(bw * np.abs(bval) ** 2)),
        "b_l1": float(np.sum(bw * np.abs(bval))),
    }


def _norm_values(domain, u, res):
    lo, hi = _norms(domain, u, res), _norms(domain, u, 2 * res)
    out = {}
    for key in lo:
        tol = L1_CONVERGENCE_TOL if key.endswith("l1") else CONVERGENCE_TOL
        out[key] = _check_converged(lo[key], hi[key], tol)
    return out


def friedrichs_check(domain, u, N=2, res=48):
    """(||u||_2, 4C(N)|O|^(1/2N) [|O|^(1/2N) ||grad u||_2 + ||u||_L2(bdry)], holds)."""
    if N != 2:
        raise DomainError("test domains are planar (N = 2)")
    nv = _norm_values(domain, u, res)
    c = isoperimetric_constant(N)
    a = domain.area ** (1.0 / (2 * N))
    lhs = nv["u_l2"]
    rhs = 4 * c * a * (a * nv["g_l2"] + nv["b_l2"])
    return lhs, rhs, bool(lhs <= rhs * (1 + SLACK))


def mazya_check(domain, u, N=2, res=48):
    """(||u||_{N/(N-1)}, C(N)[||grad u||_1 + ||u||_L1(bdry)], holds); N = 2 gives the L2 norm."""
    if N != 2:
        raise DomainError("test domains are planar (N = 2)")
    nv = _norm_values(domain, u, res)
    c = isoperimetric_constant(N)
    lhs = nv["u_l2"]
    rhs = c * (nv["g_l1"] + nv["b_l1"])
    return lhs, rhs, bool(lhs <= rhs * (1 + SLACK))


# scalar test families: callables pts -> (values, gradients)

def constant_function(c=1.0):
    def u(p):
        return np.full(len(p), c, dtype=complex), np.zeros((len(p), 2), dtype=complex)
    return u


def polynomial_function(coeffs):
    """sum c_ij x^i y^j for a dict {(i, j): c}."""
    def u(p):
        x, y = p[:, 0], p[:, 1]
        v = np.zeros(len(p), dtype=complex)
        g = np.zeros((len(p), 2), dtype=complex)
        for (i, j), c in coeffs.items():
            v += c * x ** i * y ** j
            if i:
                g[:, 0] += c * i * x ** (i - 1) * y ** j
            if j:
                g[:, 1] += c * j * x ** i * y ** (j - 1)
        return v, g
    return u


def trig_product(a, b, phase=0.0):
    """sin(a x + phase) cos(b y)."""
    def u(p):
        x, y = p[:, 0], p[:, 1]
        sx, cx = np.sin(a * x + phase), np.cos(a * x + phase)
        cy, sy = np.cos(b * y), np.sin(b * y)
        return (sx * cy).astype(complex), np.stack([a * cx * cy, -b * sx * sy], -1).astype(complex)
    return u


def random_trig_polynomial(seed, degree=3):
    """Seeded sum of c_jk exp(i (j x + k y)), |j|, |k| <= degree."""
    rng = np.random.default_rng(np.uint64(seed))
    ks = [(j, k) for j in range(-degree, degree + 1) for k in range(-degree, degree + 1)]
    c = rng.normal(size=len(ks)) + 1j * rng.normal(size=len(ks))

    def u(p):
        v = np.zeros(len(p), dtype=complex)
        g = np.zeros((len(p), 2), dtype=complex)
        for cc, (j, k) in zip(c, ks):
            e = cc * np.exp(1j * (j * p[:, 0] + k * p[:, 1]))
            v += e
            g[:, 0] += 1j * j * e
            g[:, 1] += 1j * k * e
        return v, g
    return u


def fourier_bessel(m, k, center=(0.0, 0.0)):
    """J_m(k r) e^{i m theta} about ``center``, a Helmholtz solution; returns (values, gradients)."""
    c = np.asarray(center, dtype=float)

    def u(p):
        d = np.atleast_2d(p) - c
        r = np.hypot(d[:, 0], d[:, 1])
        th = np.arctan2(d[:, 1], d[:, 0])
        e = np.exp(1j * m * th)
        jm = sp.jv(m, k * r)
        djm = k * sp.jvp(m, k * r)
        with np.errstate(invalid="ignore", divide="ignore"):
            jr = np.where(r > 0, jm / np.where(r > 0, r, 1.0), 0.5 * k * (m == 1))
        gr, gt = djm * e, 1j * m * jr * e
        cs, sn = np.cos(th), np.sin(th)
        g = np.stack([gr * cs - gt * sn, gr * sn + gt * cs], -1)
        return jm * e, g
    return u


def plane_wave_sum(k, seed, count=5):
    """Seeded superposition of plane waves exp(i k d.x) with random directions."""
    rng = np.random.default_rng(np.uint64(seed))
    ang = 2 * np.pi * rng.random(count)
    amp = rng.normal(size=count) + 1j * rng.normal(size=count)
    d = np.stack([np.cos(ang), np.sin(ang)], -1)

    def u(p):
        e = np.exp(1j * k * (np.atleast_2d(p) @ d.T)) * amp
        return e.sum(-1), 1j * k * (e @ d)
    return u


def values_only(u):
    return lambda p: u(p)[0]


# Korn

def _bump(p, center, radius):
    d = (p - center) / radius
    s = np.sum(d * d, -1)
    inside = s < 1
    q = np.where(inside, 1 - s, 1.0)
    b = np.where(inside, np.exp(-1.0 / q), 0.0)
    db = np.where(inside, b * (-2.0 / q ** 2), 0.0)[:, None] * d / radius
    return b, db


@dataclass(frozen=True)
class BumpField:
    """bump(x) * v(x) with v affine (v = A x + c), or grad of a bump when ``gradient`` is set."""

    center: tuple
    radius: float
    A: tuple = ((0.0, -1.0), (1.0, 0.0))
    c: tuple = (0.0, 0.0)
    gradient: bool = False

    def __call__(self, p):
        p = np.atleast_2d(p)
        ctr = np.asarray(self.center, dtype=float)
        if self.gradient:
            return self._bump_gradient(p, ctr)
        b, db = _bump(p, ctr, self.radius)
        A = np.asarray(self.A, dtype=float)
        v = p @ A.T + np.asarray(self.c, dtype=float)
        val = b[:, None] * v
        jac = v[:, :, None] * db[:, None, :] + b[:, None, None] * A[None]
        return val, jac

    def _bump_gradient(self, p, ctr):
        # u = grad psi with psi = exp(-1/(1-s)), s = |x - c|^2 / rho^2
        d = (p - ctr) / self.radius
        s = np.sum(d * d, -1)
        inside = s < 1
        q = np.where(inside, 1 - s, 1.0)
        psi = np.where(inside, np.exp(-1.0 / q), 0.0)
        f1 = -psi / q ** 2  # dpsi/ds
        f2 = psi * (1.0 / q ** 4 - 2.0 / q ** 3)  # d2psi/ds2
        gs = 2 * d / self.radius  # ds/dx
        val = f1[:, None] * gs
        hess = f2[:, None, None] * gs[:, :, None] * gs[:, None, :] \
            + (2 * f1 / self.radius ** 2)[:, None, None] * np.eye(2)[None]
        return val, np.where(inside[:, None, None], hess, 0.0)


def random_bump_field(seed, domain):
    """Seeded bump-modulated affine field whose support lies inside ``domain``."""
    rng = np.random.default_rng(np.uint64(seed))
    for _ in range(1000):
        c = rng.uniform(-1, 1, 2) * 0.8 * domain.radius if domain.shape != "square" \
            else rng.uniform(-0.4, 0.4, 2) * domain.side
        rad = rng.uniform(0.1, 0.3)
        f = BumpField(tuple(c), rad, tuple(map(tuple, rng.normal(size=(2, 2)))),
                      tuple(rng.normal(size=2)))
        if _support_inside(f, domain):
            return f
    raise DomainError("could not place a bump inside the domain")


def _support_inside(f, domain, n=256):
    t = 2 * np.pi * np.arange(n) / n
    ring = np.asarray(f.center) + f.radius * np.stack([np.cos(t), np.sin(t)], -1)
    inner = np.asarray(f.center)[None] + np.array([[0, 0]])
    return bool(domain.contains(ring).all() and domain.contains(inner).all()
                 and (domain.shape != "annulus"
                      or np.linalg.norm(f.center) - f.radius > domain.inner))


def korn_check(u, domain, res=160):
    """(||grad u||^2, ||E u||^2, holds) with holds = grad_sq <= 2 sym_sq (1 + 1e-8)."""
    if not _support_inside(u, domain):
        raise DomainError("field support touches the domain boundary")
    ctr = np.asarray(u.center, dtype=float)

    def sums(n):
        x, w = _gl(n, ctr[0] - u.radius, ctr[0] + u.radius)
        y, wy = _gl(n, ctr[1] - u.radius, ctr[1] + u.radius)
        X, Y = np.meshgrid(x, y, indexing="ij")
        W = np.outer(w, wy).ravel()
        _, J = u(np.stack([X.ravel(), Y.ravel()], -1))
        E = 0.5 * (J + np.transpose(J, (0, 2, 1)))
        return float(np.sum(W * np.sum(J * J, (1, 2)))), float(np.sum(W * np.sum(E * E, (1, 2))))

    g1, s1 = sums(res)
    g2, s2 = sums(2 * res)
    _check_converged(g1, g2)
    _check_converged(s1, s2)
    return g2, s2, bool(g2 <= 2 * s2 * (1 + SLACK))


# three spheres and chains

@dataclass(frozen=True)
class ThreeSpheresProbe:
    center: tuple
    s1: float
    s: float
    s2: float
    norms: tuple = (math.nan, math.nan, math.nan)
    beta: float = math.nan
    degenerate: bool = False
    samples: int = 128

    def __post_init__(self):
        if not 0 < self.s1 < self.s < self.s2:
            raise DomainError("three-spheres radii must satisfy 0 < s1 < s < s2")


def ball_samples(center, radius, samples=128):
    """Polar grid with ``samples`` radii (including 0 and ``radius``) and ``samples`` angles."""
    r = radius * np.arange(samples) / (samples - 1)
    t = 2 * np.pi * np.arange(samples) / samples
    R, T = np.meshgrid(r, t, indexing="ij")
    return np.asarray(center, dtype=float) + np.stack([(R * np.cos(T)).ravel(), (R * np.sin(T)).ravel()], -1)


def three_spheres_exponent(u, k, probe, samples=128, tol=1e-9):
    """Sampled sup-norms on the three balls and the exponent beta* with
    ||u||_s = ||u||_s2^(1 - beta*) ||u||_s1^beta*.

    ``u`` maps points (m, 2) to complex values.  The sup over a ball also
    includes the samples of the smaller balls, so the norms are monotone.
    ``k`` is recorded only through the sampler's own wave number.
    """
    c = probe.center
    raw = [float(np.abs(u(ball_samples(c, rad, samples))).max()) for rad in (probe.s1, probe.s, probe.s2)]
    n1 = raw[0]
    n = max(n1, raw[1])
    n2 = max(n, raw[2])
    kw = dict(center=c, s1=probe.s1, s=probe.s, s2=probe.s2, norms=(n1, n, n2), samples=samples)
    if n2 <= 0 or n2 - n1 <= tol * n2:
        return ThreeSpheresProbe(degenerate=True, **kw)
    if n1 == 0:
        return ThreeSpheresProbe(beta=0.0, **kw)
    beta = math.log(n2 / n) / math.log(n2 / n1)
    return ThreeSpheresProbe(beta=min(max(beta, 0.0), 1.0), **kw)


@dataclass(frozen=True)
class ChainResult:
    centers: np.ndarray
    radius: float
    sup_norms: np.ndarray
    exponents: tuple
    expected_count: int

    @property
    def count(self):
        return len(self.centers)


def straight_chain(start, end, s):
    """Balls of radius s on the segment [start, end], centres at most s/2 apart."""
    start, end = np.asarray(start, dtype=float), np.asarray(end, dtype=float)
    length = float(np.linalg.norm(end - start))
    count = chain_count(length, s)
    f = np.arange(count) / (count - 1)
    return start + f[:, None] * (end - start)


def chain_count(length, s):
    return int(math.ceil(2.0 * length / s - 1e-12)) + 1


def propagate_smallness(u, centers, s, k=None, scatterers=(), samples=64):
    """Sup-norms of ``u`` along a chain of balls B(c_i, s) and per-step exponents.

    Each ball must stay at distance >= s from every scatterer boundary.  The
    exponent of step i is the three-spheres exponent at c_{i+1} with radii
    (s/4, s/2, s).
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    for curve in scatterers:
        poly = curve.points(2048)
        dist = distance_to_polyline(centers, poly)
        if np.any(dist < 2 * s) or inside_polygon(centers, poly).any():
            raise InvalidGeometryError("chain ball too close to or inside a scatterer")
    steps = np.linalg.norm(np.diff(centers, axis=0), axis=-1)
    if np.any(steps > 0.5 * s * (1 + 1e-12)):
        raise DomainError("consecutive chain centres must be within s/2")
    norms = np.array([float(np.abs(u(ball_samples(c, s, samples))).max()) for c in centers])
    exps = []
    for c in centers[1:]:
        pr = three_spheres_exponent(u, k, ThreeSpheresProbe(tuple(c), s / 4, s / 2, s), samples)
        exps.append(None if pr.degenerate else pr.beta)
    length = float(steps.sum())
    return ChainResult(centers, s, norms, tuple(exps), chain_count(length, s))


# verification suite

@dataclass(frozen=True)
class CheckRow:
    check_name: str
    lhs: float
    rhs: float
    holds: bool


def default_domains():
    return [
        TestDomain("disc", radius=1.0),
        TestDomain("square", side=2.0),
        TestDomain("annulus", radius=1.0, inner=0.4),
        TestDomain("perturbed_disc", radius=1.0, delta=0.08, m=3),
    ]


def default_functions(k=1.0):
    fam = {
        "const": constant_function(1.0),
        "poly_x": polynomial_function({(1, 0): 1.0}),
        "poly_quad": polynomial_function({(2, 0): 1.0, (1, 1): -0.5, (0, 2): 0.25, (0, 0): 0.3}),
        "trig_1_2": trig_product(1.0, 2.0, 0.3),
        "trig_3_1": trig_product(3.0, 1.0),
    }
    for m in (0, 1, 3):
        fam[f"fb_{m}"] = fourier_bessel(m, k)
    return fam


def run_verify_suite(k=1.0, random_draws=50, korn_draws=100, seed=0):
    """Friedrichs, Maz'ya and Korn checks over the built-in families and domains."""
    rows = []
    for dom in default_domains():
        for name, u in default_functions(k).items():
            lhs, rhs, ok = friedrichs_check(dom, u)
            rows.append(CheckRow(f"friedrichs/{dom.shape}/{name}", lhs, rhs, ok))
            lhs, rhs, ok = mazya_check(dom, u)
            rows.append(CheckRow(f"mazya/{dom.shape}/{name}", lhs, rhs, ok))
    for a in (0.5, 1.0, 2.0):
        lhs, rhs, ok = mazya_check(TestDomain("disc", radius=a), constant_function(1.0))
        rows.append(CheckRow(f"mazya_equality/disc_r{a:g}", lhs, rhs, ok and abs(lhs - rhs) <= SLACK * rhs))
    sq = TestDomain("square", side=2.0)
    for i in range(random_draws):
        u = random_trig_polynomial(seed + i)
        for nm, fn in (("friedrichs", friedrichs_check), ("mazya", mazya_check)):
            lhs, rhs, ok = fn(sq, u, res=32)
            rows.append(CheckRow(f"{nm}/square/random_trig_{seed + i}", lhs, rhs, ok))
    disc = TestDomain("disc", radius=1.0)
    special = {
        "grad_bump": BumpField((0.1, -0.2), 0.5, gradient=True),
        "rotation_bump": BumpField((0.2, 0.1), 0.5),
    }
    for name, f in special.items():
        g, s, ok = korn_check(f, disc)
        rows.append(CheckRow(f"korn/disc/{name}", g, 2 * s, ok))
    doms = default_domains()
    for i in range(korn_draws):
        dom = doms[i % len(doms)]
        f = random_bump_field(seed + i, dom)
        g, s, ok = korn_check(f, dom, res=64)
        rows.append(CheckRow(f"korn/{dom.shape}/random_{seed + i}", g, 2 * s, ok))
    return rows
