"""Boundary curves, regularity data, distances and areas between scatterers."""

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.spatial import cKDTree

from .errors import (
    DomainError,
    InvalidAprioriDataError,
    InvalidGeometryError,
    UndersamplingError,
)
from .media import closeness_constant

FAMILIES = ("disc", "ellipse", "kite", "radial_perturbation")
MIN_DISTANCE_SAMPLES = 256


@dataclass(frozen=True)
class CurveSample:
    """Curve data at the equispaced nodes t_j = 2 pi j / n."""

    t: np.ndarray
    points: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    speed: np.ndarray
    normals: np.ndarray
    curvature: np.ndarray

    @property
    def n(self):
        return self.t.size

    @property
    def spacing(self):
        """Largest arc length between neighbouring nodes (approximately)."""
        return float(self.speed.max() * 2.0 * np.pi / self.n)


def _rot(v, c, s):
    return np.stack([c * v[..., 0] - s * v[..., 1], s * v[..., 0] + c * v[..., 1]], axis=-1)


@dataclass(frozen=True)
class BoundaryCurve:
    """Smooth closed parametrised curve, counterclockwise, t in [0, 2 pi).

    ``params`` is stored as a sorted tuple of (name, value) pairs so that
    curves are hashable and compare by value.
    """

    family: str
    params: tuple = field(default=())

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidGeometryError(f"unknown curve family {self.family!r}")
        _validate(self.family, dict(self.params))

    @property
    def p(self):
        return dict(self.params)

    @property
    def center(self):
        return np.array(self.p.get("center", (0.0, 0.0)), dtype=float)

    def derivatives(self, t):
        """Return (gamma, gamma', gamma'') with shape (..., 2) each."""
        t = np.asarray(t, dtype=float)
        p = self.p
        c, s = np.cos(t), np.sin(t)
        if self.family == "disc":
            r0 = p["radius"]
            x = r0 * np.stack([c, s], -1)
            dx = r0 * np.stack([-s, c], -1)
            ddx = -x
        elif self.family == "ellipse":
            a, b = p["a"], p["b"]
            x = np.stack([a * c, b * s], -1)
            dx = np.stack([-a * s, b * c], -1)
            ddx = -x
            th = p.get("rotation", 0.0)
            if th:
                cr, sr = math.cos(th), math.sin(th)
                x, dx, ddx = (_rot(v, cr, sr) for v in (x, dx, ddx))
        elif self.family == "kite":
            sc = p.get("scale", 1.0)
            c2, s2 = np.cos(2 * t), np.sin(2 * t)
            x = sc * np.stack([c + 0.65 * c2 - 0.65, 1.5 * s], -1)
            dx = sc * np.stack([-s - 1.3 * s2, 1.5 * c], -1)
            ddx = sc * np.stack([-c - 2.6 * c2, -1.5 * s], -1)
        else:
            r0, dl, m = p["radius"], p["delta"], p["m"]
            ph = p.get("phase", 0.0)
            cm, sm = np.cos(m * t + ph), np.sin(m * t + ph)
            rr = r0 * (1.0 + dl * cm)
            r1 = -r0 * dl * m * sm
            r2 = -r0 * dl * m * m * cm
            e = np.stack([c, s], -1)
            et = np.stack([-s, c], -1)
            x = rr[..., None] * e
            dx = r1[..., None] * e + rr[..., None] * et
            ddx = (r2 - rr)[..., None] * e + 2.0 * r1[..., None] * et
        return x + self.center, dx, ddx

    def point(self, t):
        return self.derivatives(t)[0]

    def normal(self, t):
        _, dx, _ = self.derivatives(t)
        sp = np.linalg.norm(dx, axis=-1)
        return np.stack([dx[..., 1], -dx[..., 0]], -1) / sp[..., None]

    def curvature(self, t):
        _, dx, ddx = self.derivatives(t)
        cross = dx[..., 0] * ddx[..., 1] - dx[..., 1] * ddx[..., 0]
        return cross / np.linalg.norm(dx, axis=-1) ** 3

    def sample(self, n):
        t = 2.0 * np.pi * np.arange(n) / n
        x, dx, ddx = self.derivatives(t)
        sp = np.linalg.norm(dx, axis=-1)
        nu = np.stack([dx[:, 1], -dx[:, 0]], -1) / sp[:, None]
        kap = (dx[:, 0] * ddx[:, 1] - dx[:, 1] * ddx[:, 0]) / sp ** 3
        return CurveSample(t, x, dx, ddx, sp, nu, kap)

    def points(self, m):
        return self.point(2.0 * np.pi * np.arange(m) / m)

    def perimeter(self, n=512):
        return float(self.sample(n).speed.sum() * 2.0 * np.pi / n)

    def area(self, n=512):
        s = self.sample(n)
        x, dx = s.points, s.d1
        return float(0.5 * np.sum(x[:, 0] * dx[:, 1] - x[:, 1] * dx[:, 0]) * 2.0 * np.pi / n)

    def max_radius(self, n=4096):
        return float(np.linalg.norm(self.points(n), axis=-1).max())

    def diameter(self, n=1024):
        pts = self.points(n)
        lo, hi = pts.min(0), pts.max(0)
        return float(np.linalg.norm(hi - lo))

    def translated(self, v):
        p = self.p
        c = self.center + np.asarray(v, dtype=float)
        p["center"] = (float(c[0]), float(c[1]))
        return BoundaryCurve(self.family, tuple(sorted(p.items())))

    def as_dict(self):
        d = {"family": self.family}
        for k, v in self.params:
            d[k] = list(v) if isinstance(v, tuple) else v
        return d


def _validate(family, p):
    required = {
        "disc": ("radius",),
        "ellipse": ("a", "b"),
        "kite": (),
        "radial_perturbation": ("radius", "delta", "m"),
    }[family]
    allowed = set(required) | {"center"} | {
        "disc": set(),
        "ellipse": {"rotation"},
        "kite": {"scale"},
        "radial_perturbation": {"phase"},
    }[family]
    missing = [k for k in required if k not in p]
    if missing:
        raise InvalidGeometryError(f"{family}: missing parameters {missing}")
    extra = sorted(set(p) - allowed)
    if extra:
        raise InvalidGeometryError(f"{family}: unknown parameters {extra}")
    for k, v in p.items():
        vals = v if k == "center" else (v,)
        if k == "center" and len(vals) != 2:
            raise InvalidGeometryError("center must have two coordinates")
        if not all(isinstance(x, (int, float)) and math.isfinite(x) for x in vals):
            raise InvalidGeometryError(f"{family}: parameter {k} must be finite")
    for k in ("radius", "a", "b", "scale"):
        if k in p and p[k] <= 0:
            raise InvalidGeometryError(f"{family}: {k} must be > 0")
    if family == "radial_perturbation":
        m = p["m"]
        if int(m) != m or m < 1:
            raise InvalidGeometryError("radial_perturbation: m must be a positive integer")
        if abs(p["delta"]) >= 1.0 / (1.0 + m * m):
            raise InvalidGeometryError(
                f"radial_perturbation: |delta| must be < 1/(1+m^2) = {1.0 / (1 + m * m):.6g}"
            )


def make_curve(family, **params):
    """Build a curve of the given family.

    Families and parameters::

        disc(radius, center)
        ellipse(a, b, rotation, center)
        kite(scale, center)            x = (cos t + 0.65 cos 2t - 0.65, 1.5 sin t)
        radial_perturbation(radius, delta, m, phase, center)
                                       r(t) = radius (1 + delta cos(m t + phase))
    """
    p = {}
    for k, v in params.items():
        if k == "center":
            v = tuple(float(c) for c in v)
        elif k == "m":
            if int(v) != v:
                raise InvalidGeometryError("radial_perturbation: m must be an integer")
            v = int(v)
        else:
            v = float(v)
        p[k] = v
    return BoundaryCurve(family, tuple(sorted(p.items())))


def check_contained(curve, R):
    """Raise InvalidGeometryError unless the curve lies inside B_R(0)."""
    rmax = curve.max_radius()
    if rmax >= R:
        raise InvalidGeometryError(f"curve reaches radius {rmax:.6g} >= R = {R}")


@dataclass(frozen=True)
class RegularityParams:
    """A-priori data: regularity constants r, L, alpha, bounding radius R, H0."""

    r: float
    L: float
    R: float
    alpha: float
    H0: float

    def __post_init__(self):
        for k in ("r", "L", "R", "H0"):
            v = getattr(self, k)
            if not (math.isfinite(v) and v > 0):
                raise InvalidAprioriDataError(f"{k} must be a positive real, got {v}")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidAprioriDataError(f"alpha must lie in (0, 1), got {self.alpha}")


@dataclass(frozen=True)
class DistanceTriple:
    d: float
    d_hat: float
    d_tilde: float


def inside_polygon(points, poly):
    """Crossing-number containment of ``points`` (m, 2) in the closed polygon ``poly``."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[0] * poly.shape[0] > 4_000_000:
        return _inside_sorted(points, poly)
    px, py = points[:, 0][:, None], points[:, 1][:, None]
    ax, ay = poly[:, 0][None, :], poly[:, 1][None, :]
    bx, by = np.roll(poly[:, 0], -1)[None, :], np.roll(poly[:, 1], -1)[None, :]
    straddle = (ay > py) != (by > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xc = ax + (py - ay) * (bx - ax) / (by - ay)
    hits = straddle & (px < xc)
    return (np.count_nonzero(hits, axis=1) % 2) == 1


def _inside_sorted(points, poly):
    # each edge only meets the points whose y lies in its y-range: a slice
    # of the points sorted by y
    order = np.argsort(points[:, 1], kind="stable")
    xs, ys = points[order, 0], points[order, 1]
    a, b = poly, np.roll(poly, -1, axis=0)
    lo = np.searchsorted(ys, np.minimum(a[:, 1], b[:, 1]), side="left")
    hi = np.searchsorted(ys, np.maximum(a[:, 1], b[:, 1]), side="left")
    count = np.zeros(points.shape[0], dtype=np.int64)
    for e in np.nonzero(hi > lo)[0]:
        sl = slice(lo[e], hi[e])
        (ax, ay), (bx, by) = a[e], b[e]
        q = ys[sl]
        # half-open rule (ay > q) != (by > q) on the slice
        straddle = (ay > q) != (by > q)
        xc = ax + (q - ay) * (bx - ax) / (by - ay)
        count[sl] += straddle & (xs[sl] < xc)
    out = np.empty(points.shape[0], dtype=bool)
    out[order] = (count % 2) == 1
    return out


def distance_to_polyline(points, poly, k=8):
    """Distance from points to the closed polygon through the vertices ``poly``."""
    points = np.atleast_2d(points)
    m = poly.shape[0]
    k = min(k, m)
    _, idx = cKDTree(poly).query(points, k=k)
    idx = np.atleast_2d(idx).reshape(points.shape[0], k)
    best = np.full(points.shape[0], np.inf)
    for off in (0, -1):
        i0 = (idx + off) % m
        a = poly[i0]
        b = poly[(i0 + 1) % m]
        ab = b - a
        ap = points[:, None, :] - a
        tt = np.clip(np.sum(ap * ab, -1) / np.sum(ab * ab, -1), 0.0, 1.0)
        proj = a + tt[..., None] * ab
        dist = np.linalg.norm(points[:, None, :] - proj, axis=-1).min(1)
        best = np.minimum(best, dist)
    return best


def _interior_grid(curve, m):
    pts = curve.points(m)
    lo, hi = pts.min(0), pts.max(0)
    g = max(16, int(math.sqrt(m)) * 2)
    xs = lo[0] + (hi[0] - lo[0]) * (np.arange(g) + 0.5) / g
    ys = lo[1] + (hi[1] - lo[1]) * (np.arange(g) + 0.5) / g
    grid = np.stack(np.meshgrid(xs, ys, indexing="ij"), -1).reshape(-1, 2)
    return grid[inside_polygon(grid, pts)]


def _filled_excess(curve, other, m, poly_self, poly_other):
    """sup over the region of ``curve`` of dist(., region of ``other``)."""
    cand = np.vstack([poly_self, _interior_grid(curve, m)])
    outside = ~inside_polygon(cand, poly_other)
    if not outside.any():
        return 0.0
    return float(distance_to_polyline(cand[outside], poly_other).max())


def distances(K, K2, m=1024):
    """Distances between two scatterers from ``m`` boundary samples each.

    d       sup over dK outside K2 of dist(x, dK2)
    d_hat   Hausdorff distance of the boundaries
    d_tilde Hausdorff distance of the filled regions
    """
    if m < MIN_DISTANCE_SAMPLES:
        raise UndersamplingError(f"m = {m} < {MIN_DISTANCE_SAMPLES} boundary samples")
    P = K.points(m)
    P2 = K2.points(m)
    d12 = distance_to_polyline(P, P2)
    d21 = distance_to_polyline(P2, P)
    out1 = ~inside_polygon(P, P2)
    d = float(d12[out1].max()) if out1.any() else 0.0
    d_hat = float(max(d12.max(), d21.max()))
    d_tilde = max(_filled_excess(K, K2, m, P, P2), _filled_excess(K2, K, m, P2, P))
    d = min(d, d_hat)
    return DistanceTriple(d, d_hat, d_tilde)


def _same_curve(K, K2, m=512):
    if K == K2:
        return True
    return bool(np.abs(K.points(m) - K2.points(m)).max() < 1e-14)


def _intersection_area(A, B, m, panels=16):
    """|A ∩ B| from the Green formula on the parts of each boundary inside the other."""
    gx, gw = leggauss(panels)
    total = 0.0
    for cur, oth in ((A, B), (B, A)):
        poly = oth.points(m)
        t = 2.0 * np.pi * np.arange(m + 1) / m
        flag = inside_polygon(cur.point(t[:-1]), poly)
        flag = np.append(flag, flag[0])
        j = np.nonzero(flag[:-1] != flag[1:])[0]
        lo, hi, flo = t[j], t[j + 1], flag[j]
        for _ in range(30 if j.size else 0):
            mid = 0.5 * (lo + hi)
            same = inside_polygon(cur.point(mid), poly) == flo
            lo = np.where(same, mid, lo)
            hi = np.where(same, hi, mid)
        tc = _refine_crossings(cur, oth, 0.5 * (lo + hi), poly)
        brk = [0.0] + list(np.sort(tc))
        brk.append(2.0 * np.pi)
        brk = np.array(brk)
        for a, b in zip(brk[:-1], brk[1:]):
            if b <= a:
                continue
            mid = 0.5 * (a + b)
            if not inside_polygon(cur.point(mid)[None], poly)[0]:
                continue
            npan = max(1, int(math.ceil((b - a) / (2.0 * np.pi / 64))))
            edges = np.linspace(a, b, npan + 1)
            h = 0.5 * np.diff(edges)
            tq = (0.5 * (edges[:-1] + edges[1:]))[:, None] + h[:, None] * gx[None, :]
            x, dx, _ = cur.derivatives(tq)
            f = 0.5 * (x[..., 0] * dx[..., 1] - x[..., 1] * dx[..., 0])
            total += float(np.sum(h[:, None] * gw[None, :] * f))
    return total


def _refine_crossings(cur, oth, t, poly, iters=8):
    """Newton on cur(t) = oth(s), started from polygon-accurate crossings.

    The polygon only locates crossings to O(h^2); solving the curve equation
    restores full accuracy.  A step that leaves the local bracket (tangential
    contact) keeps the polygon estimate.
    """
    if t.size == 0:
        return t
    m = poly.shape[0]
    s = 2.0 * np.pi * cKDTree(poly).query(cur.point(t))[1] / m
    t0 = t.copy()
    tt, ss = t.copy(), s
    for _ in range(iters):
        x, dx, _ = cur.derivatives(tt)
        y, dy, _ = oth.derivatives(ss)
        f = x - y
        det = -dx[:, 0] * dy[:, 1] + dx[:, 1] * dy[:, 0]
        ok = np.abs(det) > 1e-12
        det = np.where(ok, det, 1.0)
        # [dx, -dy] [dt, ds]^T = -f
        dt = (f[:, 0] * dy[:, 1] - f[:, 1] * dy[:, 0]) / det
        ds = (f[:, 0] * dx[:, 1] - f[:, 1] * dx[:, 0]) / det
        tt = np.where(ok, tt + dt, tt)
        ss = np.where(ok, ss + ds, ss)
    resid = np.linalg.norm(cur.point(tt) - oth.point(ss), axis=-1)
    good = (resid < 1e-12) & (np.abs(tt - t0) < 4.0 * np.pi / m)
    return np.where(good, tt, t0)


def monte_carlo_symmetric_difference(K, K2, seed, samples=200_000, m=2048):
    """Seeded Monte Carlo estimate of |K Δ K2|; returns (area, standard error)."""
    P, P2 = K.points(m), K2.points(m)
    allp = np.vstack([P, P2])
    lo, hi = allp.min(0), allp.max(0)
    box = float(np.prod(hi - lo))
    rng = np.random.default_rng(np.uint64(seed))
    pts = lo + (hi - lo) * rng.random((samples, 2))
    hit = inside_polygon(pts, P) ^ inside_polygon(pts, P2)
    frac = hit.mean()
    return box * frac, box * math.sqrt(frac * (1.0 - frac) / samples)


def area_symmetric_difference(K, K2, method="quadrature", seed=0, samples=200_000, m=8192):
    """|K Δ K2| by boundary quadrature or by seeded Monte Carlo."""
    if method == "monte_carlo":
        return monte_carlo_symmetric_difference(K, K2, seed, samples)[0]
    if method != "quadrature":
        raise DomainError(f"unknown area method {method!r}")
    if _same_curve(K, K2):
        return 0.0
    inter = _intersection_area(K, K2, m)
    return max(0.0, K.area() + K2.area() - 2.0 * inter)


def closeness_check(area, params, medium, N=2):
    """True iff ``area <= H0``; the a-priori data must satisfy H0 < H1."""
    if not math.isfinite(area) or area < 0:
        raise DomainError(f"area must be a nonnegative real, got {area}")
    h1 = closeness_constant(medium, N)
    if params.H0 >= h1:
        raise InvalidAprioriDataError(f"H0 = {params.H0} must be < H1 = {h1}")
    return area <= params.H0
