"""Elastic medium, wave numbers, a-priori constants and incident plane waves."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

# rotation by pi/2
Q = np.array([[0.0, -1.0], [1.0, 0.0]])


@dataclass(frozen=True)
class ElasticMedium:
    """Homogeneous isotropic medium: Lame constants, density, frequency."""

    lam: float
    mu: float
    rho: float
    omega: float

    def __post_init__(self):
        vals = (self.lam, self.mu, self.rho, self.omega)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError("medium parameters must be finite")
        if self.mu <= 0:
            raise DomainError(f"mu must be > 0, got {self.mu}")
        if self.lam + 2 * self.mu <= 0:
            raise DomainError("lambda + 2 mu must be > 0")
        if self.rho <= 0:
            raise DomainError(f"rho must be > 0, got {self.rho}")
        if self.omega <= 0:
            raise DomainError(f"omega must be > 0, got {self.omega}")

    @property
    def k_p(self):
        return wavenumbers(self).omega_p

    @property
    def k_s(self):
        return wavenumbers(self).omega_s

    def as_dict(self):
        return {"lambda": self.lam, "mu": self.mu, "rho": self.rho, "omega": self.omega}


@dataclass(frozen=True)
class Wavenumbers:
    omega_p: float
    omega_s: float


def wavenumbers(medium):
    """Longitudinal and transversal wave numbers of ``medium``."""
    rw2 = medium.rho * medium.omega ** 2
    return Wavenumbers(
        omega_p=math.sqrt(rw2 / (medium.lam + 2 * medium.mu)),
        omega_s=math.sqrt(rw2 / medium.mu),
    )


def isoperimetric_constant(N):
    """C(N) = |B_1|^((N-1)/N) / H^{N-1}(dB_1), from the closed-form ball formulas."""
    if int(N) != N or N < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {N}")
    vol = math.pi ** (N / 2) / math.gamma(N / 2 + 1)
    surf = N * vol
    return vol ** ((N - 1) / N) / surf


def closeness_constant(medium, N=2):
    """Volume threshold H1 below which the closeness condition may be imposed."""
    c = isoperimetric_constant(N)
    num = min(2 * medium.mu, 2 * medium.mu + medium.lam)
    return (num / (64 * c * c * medium.rho * medium.omega ** 2)) ** (N / 2)


def closeness_constant_from_wavenumbers(medium, N=2):
    """Same threshold written through the wave numbers; used as a cross-check."""
    wn = wavenumbers(medium)
    m = min(1.0 / wn.omega_p, math.sqrt(2.0) / wn.omega_s)
    return (m / (8 * isoperimetric_constant(N))) ** N


LONGITUDINAL = "longitudinal"
TRANSVERSAL = "transversal"


@dataclass(frozen=True)
class IncidentPlaneWave:
    """Plane wave travelling in direction ``(cos angle, sin angle)``.

    The unit-modulus constant is ``exp(i*phase)``: it multiplies ``d`` for
    longitudinal waves and the polarisation ``-Q d`` for transversal ones.
    ``amplitude`` is an extra nonnegative scale (1 gives the normalised wave).
    """

    kind: str = LONGITUDINAL
    angle: float = 0.0
    phase: float = 0.0
    amplitude: float = 1.0

    def __post_init__(self):
        if self.kind not in (LONGITUDINAL, TRANSVERSAL):
            raise DomainError(f"unknown incident kind {self.kind!r}")
        if not (math.isfinite(self.angle) and math.isfinite(self.phase)):
            raise DomainError("angle and phase must be finite")
        if not math.isfinite(self.amplitude) or self.amplitude < 0:
            raise DomainError("amplitude must be finite and >= 0")

    @property
    def direction(self):
        return np.array([math.cos(self.angle), math.sin(self.angle)])

    @property
    def constant(self):
        return self.amplitude * complex(math.cos(self.phase), math.sin(self.phase))

    @property
    def polarization(self):
        """Vector multiplying the exponential: c d or c (-Q d)."""
        d = self.direction
        if self.kind == LONGITUDINAL:
            return self.constant * d
        return self.constant * (-Q @ d)

    def wavenumber(self, medium):
        wn = wavenumbers(medium)
        return wn.omega_p if self.kind == LONGITUDINAL else wn.omega_s


def evaluate_incident(wave, medium, x):
    """Incident field at points ``x`` of shape (..., 2); returns complex (..., 2).

    ``wave`` is an IncidentPlaneWave or any callable mapping points to
    displacements (for instance a point source placed inside the obstacle).
    """
    x = np.asarray(x, dtype=float)
    if callable(wave):
        return np.asarray(wave(x), dtype=complex)
    k = wave.wavenumber(medium)
    ph = np.exp(1j * k * (x @ wave.direction))
    return ph[..., None] * wave.polarization
