"""Separation-of-variables solution for a rigid disc, used as a reference.

The field is written as u = grad psi_p + curl psi_s with curl psi = (d2 psi, -d1 psi);
each Fourier mode e^{i m theta} gives a 2x2 system from u = 0 on r = a.
Bessel functions come from scipy.special so that the reference does not
share code with the package's own implementation.
"""

import math

import numpy as np
from scipy import special as sp

from .media import LONGITUDINAL, wavenumbers


def _mode_count(ka):
    return int(math.ceil(ka + 12.0 * ka ** (1.0 / 3.0) + 25))


def disc_coefficients(medium, radius, incident, m_max=None):
    """Scattered potential coefficients (m, A_m, B_m) for a disc centred at the origin."""
    wn = wavenumbers(medium)
    kp, ks = wn.omega_p, wn.omega_s
    a = radius
    if m_max is None:
        m_max = _mode_count(ks * a)
    m = np.arange(-m_max, m_max + 1)
    th = incident.angle
    c = incident.constant
    if incident.kind == LONGITUDINAL:
        alpha = c / (1j * kp) * (1j ** m) * np.exp(-1j * m * th)
        ur = alpha * kp * sp.jvp(m, kp * a)
        ut = 1j * m / a * alpha * sp.jv(m, kp * a)
    else:
        beta = c / (1j * ks) * (1j ** m) * np.exp(-1j * m * th)
        ur = 1j * m / a * beta * sp.jv(m, ks * a)
        ut = -beta * ks * sp.jvp(m, ks * a)
    hp, hs = sp.hankel1(m, kp * a), sp.hankel1(m, ks * a)
    dhp, dhs = sp.h1vp(m, kp * a), sp.h1vp(m, ks * a)
    m11, m12 = kp * dhp, 1j * m / a * hs
    m21, m22 = 1j * m / a * hp, -ks * dhs
    det = m11 * m22 - m12 * m21
    A = (-ur * m22 + ut * m12) / det
    B = (-ut * m11 + ur * m21) / det
    return m, A, B


def disc_far_field(medium, radius, incident, theta, m_max=None):
    """Reference far-field amplitudes (u_inf_p, u_inf_s) at angles ``theta``."""
    wn = wavenumbers(medium)
    kp, ks = wn.omega_p, wn.omega_s
    m, A, B = disc_coefficients(medium, radius, incident, m_max)
    e = np.exp(1j * np.outer(np.asarray(theta, dtype=float), m)) * (-1j) ** m
    fp = 1j * kp * math.sqrt(2.0 / (math.pi * kp)) * np.exp(-0.25j * math.pi)
    fs = -1j * ks * math.sqrt(2.0 / (math.pi * ks)) * np.exp(-0.25j * math.pi)
    return fp * (e @ A), fs * (e @ B)


def disc_scattered_field(medium, radius, incident, x, m_max=None):
    """Reference scattered displacement at points ``x`` (..., 2) outside the disc."""
    wn = wavenumbers(medium)
    kp, ks = wn.omega_p, wn.omega_s
    m, A, B = disc_coefficients(medium, radius, incident, m_max)
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)[..., None]
    th = np.arctan2(x[..., 1], x[..., 0])[..., None]
    e = np.exp(1j * m * th)
    hp, hs = sp.hankel1(m, kp * r), sp.hankel1(m, ks * r)
    ur = np.sum((A * kp * sp.h1vp(m, kp * r) + 1j * m / r * B * hs) * e, -1)
    ut = np.sum((1j * m / r * A * hp - B * ks * sp.h1vp(m, ks * r)) * e, -1)
    th = th[..., 0]
    c, s = np.cos(th), np.sin(th)
    return np.stack([ur * c - ut * s, ur * s + ut * c], -1)
