"""Bessel and Hankel functions of integer order for real positive arguments.

Evaluation strategy for orders 0 and 1:

* ``x <= SERIES_MAX``: ascending power series (Neumann-type logarithmic
  series for Y).
* ``SERIES_MAX < x < ASYMPTOTIC_MIN``: Miller backward recurrence for J
  normalised by ``J0 + 2 sum J_2k = 1``; Y0 and Y1 from the Neumann
  expansions in even/odd J.
* ``x >= ASYMPTOTIC_MIN``: Hankel's asymptotic expansion.

Higher orders use upward recurrence for Y (always stable) and for J when
``n <= x``; otherwise a Miller sweep normalised against J0 or J1.
"""

import math

import numpy as np

from .errors import DomainError, UnsupportedOrderError

EULER_GAMMA = 0.57721566490153286061
SERIES_MAX = 4.0
ASYMPTOTIC_MIN = 25.0
MAX_ORDER = 200

_MILLER_START = 80
_SERIES_TERMS = 26
_ASYMPTOTIC_TERMS = 26
_RESCALE = 1e200


def _series01(x):
    q = 0.25 * x * x
    j0 = np.zeros_like(x)
    j1s = np.zeros_like(x)
    y0s = np.zeros_like(x)
    y1s = np.zeros_like(x)
    t = np.ones_like(x)  # (-q)^k / (k!)^2
    h_k = 0.0
    for k in range(_SERIES_TERMS):
        if k > 0:
            t = t * (-q) / (k * k)
            h_k += 1.0 / k
        u = t / (k + 1)  # (-q)^k / (k!(k+1)!)
        j0 += t
        j1s += u
        y0s += h_k * t
        y1s += (-2.0 * EULER_GAMMA + 2.0 * h_k + 1.0 / (k + 1)) * u
    half = 0.5 * x
    j1 = half * j1s
    lg = np.log(half)
    y0 = (2.0 / np.pi) * (lg + EULER_GAMMA) * j0 - (2.0 / np.pi) * y0s
    # Y1 + 2/(pi x), free of the pole
    y1reg = (2.0 / np.pi) * lg * j1 - (half / np.pi) * y1s
    return j0, j1, y0, y1reg


def _miller01(x):
    jp1 = np.zeros_like(x)
    j = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    s0 = np.zeros_like(x)
    s1 = np.zeros_like(x)
    j1 = None
    # j holds J_m (unnormalised) at the top of each pass
    for m in range(_MILLER_START, -1, -1):
        if m % 2 == 0:
            if m >= 2:
                half = m // 2
                norm += 2.0 * j
                s0 += (-1.0) ** half * j / half
        else:
            kp = (m + 1) // 2
            s1 += (-1.0) ** kp * j / kp
            km = (m - 1) // 2
            if km >= 1:
                s1 -= (-1.0) ** km * j / km
        if m == 1:
            j1 = j.copy()
        if m == 0:
            break
        jm1 = (2.0 * m / x) * j - jp1
        jp1, j = j, jm1
    j0 = j
    norm += j0
    j0 = j0 / norm
    j1 = j1 / norm
    s0 = s0 / norm
    s1 = s1 / norm
    lg = np.log(0.5 * x) + EULER_GAMMA
    y0 = (2.0 / np.pi) * lg * j0 - (4.0 / np.pi) * s0
    y1 = (2.0 / np.pi) * lg * j1 - (2.0 / np.pi) * j0 / x + (2.0 / np.pi) * s1
    return j0, j1, y0, y1


def _asymptotic_hankel(nu, x):
    mu = 4.0 * nu * nu
    a = 1.0
    total = np.ones(x.shape, dtype=complex)
    w = 1j / x
    p = np.ones(x.shape, dtype=complex)
    for k in range(1, _ASYMPTOTIC_TERMS):
        a *= (mu - (2 * k - 1) ** 2) / (8.0 * k)
        p = p * w
        total += a * p
    # phase split keeps x - nu pi/2 - pi/4 from losing digits at large x
    phase = np.exp(1j * x) * np.exp(-1j * (0.5 * nu * np.pi + 0.25 * np.pi))
    return np.sqrt(2.0 / (np.pi * x)) * phase * total


def jy01(x):
    """Return ``(J0, J1, Y0, Y1)`` as float arrays for positive ``x``."""
    x = np.asarray(x, dtype=float)
    j0, j1, y0, y1, _ = _jy01_reg(x)
    return j0, j1, y0, y1


def _jy01_reg(x):
    if not np.all(np.isfinite(x) & (x > 0)):
        raise DomainError("Bessel argument must be finite and > 0")
    shape = x.shape
    xf = x.ravel()
    j0 = np.empty_like(xf)
    j1 = np.empty_like(xf)
    y0 = np.empty_like(xf)
    y1 = np.empty_like(xf)
    y1reg = np.empty_like(xf)
    small = xf <= SERIES_MAX
    large = xf >= ASYMPTOTIC_MIN
    mid = ~(small | large)
    if small.any():
        xs = xf[small]
        a, b, c, d = _series01(xs)
        j0[small], j1[small], y0[small], y1reg[small] = a, b, c, d
        y1[small] = d - 2.0 / (np.pi * xs)
    if mid.any():
        xm = xf[mid]
        a, b, c, d = _miller01(xm)
        j0[mid], j1[mid], y0[mid], y1[mid] = a, b, c, d
        y1reg[mid] = d + 2.0 / (np.pi * xm)
    if large.any():
        xl = xf[large]
        h0 = _asymptotic_hankel(0.0, xl)
        h1 = _asymptotic_hankel(1.0, xl)
        j0[large], y0[large] = h0.real, h0.imag
        j1[large], y1[large] = h1.real, h1.imag
        y1reg[large] = h1.imag + 2.0 / (np.pi * xl)
    out = (j0, j1, y0, y1, y1reg)
    return tuple(v.reshape(shape) for v in out)


def hankel01(x):
    """First-kind Hankel functions of orders 0 and 1, vectorised.

    Returns ``(H0, H1, H1reg)`` where ``H1reg = H1 + 2i/(pi x)`` is the
    pole-free part of H1, needed by kernels that cancel the pole
    analytically.
    """
    x = np.asarray(x, dtype=float)
    j0, j1, y0, y1, y1reg = _jy01_reg(x)
    return j0 + 1j * y0, j1 + 1j * y1, j1 + 1j * y1reg


def _check_args(order, x):
    if isinstance(order, bool) or int(order) != order:
        raise UnsupportedOrderError(f"order must be an integer, got {order!r}")
    order = int(order)
    if order < 0 or order > MAX_ORDER:
        raise UnsupportedOrderError(f"order {order} outside [0, {MAX_ORDER}]")
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(x <= 0.0):
        raise DomainError("Bessel argument must be finite and > 0")
    return order, x


def _miller_j(n, x, j0, j1):
    start = n + int(math.sqrt(60.0 * n)) + 30
    start += start % 2
    jp1 = np.zeros_like(x)
    j = np.full_like(x, 1e-30)
    jn = np.zeros_like(x)
    jr1 = np.zeros_like(x)
    for m in range(start, 0, -1):
        jm1 = (2.0 * m / x) * j - jp1
        jp1, j = j, jm1
        if m - 1 == n:
            jn = j.copy()
        if m - 1 == 1:
            jr1 = j.copy()
        big = np.abs(j) > _RESCALE
        if big.any():
            j = np.where(big, j / _RESCALE, j)
            jp1 = np.where(big, jp1 / _RESCALE, jp1)
            jn = np.where(big, jn / _RESCALE, jn)
            jr1 = np.where(big, jr1 / _RESCALE, jr1)
    jr0 = j
    use0 = np.abs(j0) >= np.abs(j1)
    scale = np.where(use0, j0 / np.where(use0, jr0, 1.0), j1 / np.where(use0, 1.0, jr1))
    return jn * scale


def bessel_jy(order, x):
    """Return ``(J_order(x), Y_order(x))``.

    Works elementwise when ``x`` is an array. Raises ``DomainError`` for
    non-positive ``x`` and ``UnsupportedOrderError`` when the order is out
    of range or Y overflows.
    """
    scalar = np.ndim(x) == 0
    n, x = _check_args(order, x)
    x = np.atleast_1d(x)
    j0, j1, y0, y1 = jy01(x)
    if n == 0:
        jn, yn = j0, y0
    elif n == 1:
        jn, yn = j1, y1
    else:
        with np.errstate(over="ignore", invalid="ignore"):
            ym1, yk = y0, y1
            for k in range(1, n):
                ym1, yk = yk, (2.0 * k / x) * yk - ym1
        yn = yk
        if not np.all(np.isfinite(yn)):
            raise UnsupportedOrderError(f"Y_{n}(x) overflows for the given x")
        jn = np.empty_like(x)
        up = x >= n
        if up.any():
            xu = x[up]
            jm1, jk = j0[up], j1[up]
            for k in range(1, n):
                jm1, jk = jk, (2.0 * k / xu) * jk - jm1
            jn[up] = jk
        if (~up).any():
            jn[~up] = _miller_j(n, x[~up], j0[~up], j1[~up])
    if scalar:
        return float(jn[0]), float(yn[0])
    return jn, yn


def besselj(order, x):
    return bessel_jy(order, x)[0]


def bessely(order, x):
    return bessel_jy(order, x)[1]


def hankel1(order, x):
    """H^(1)_order(x) = J_order(x) + i Y_order(x)."""
    jn, yn = bessel_jy(order, x)
    if np.ndim(jn) == 0:
        return complex(jn, yn)
    return jn + 1j * yn
