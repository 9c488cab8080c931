"""Stability sweeps over perturbed scatterer pairs and the log-log fit."""

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, ElastoError, SweepAborted
from .farfield import Annulus, Ball, far_field, farfield_error, near_field_error
from .geometry import (
    RegularityParams,
    area_symmetric_difference,
    check_contained,
    closeness_check,
    distances,
    make_curve,
)
from .media import ElasticMedium, IncidentPlaneWave
from .solver import solve_dirichlet

# largest far-field error inside the domain of the double logarithm
EPS0_MAX = math.exp(-math.e) / 2.0

CSV_COLUMNS = (
    "amplitude", "d", "d_hat", "d_tilde", "eps0", "eps_near", "eps_annulus",
    "sym_diff_area", "closeness_ok", "n", "residual", "seed",
)


@dataclass(frozen=True)
class ExperimentRecord:
    family: dict
    amplitude: float
    d: float
    d_hat: float
    d_tilde: float
    eps0: float
    eps_near: float
    eps_annulus: float
    sym_diff_area: float
    closeness_ok: bool
    seed: int
    n: int
    residual: float

    def csv_row(self):
        out = []
        for k in CSV_COLUMNS:
            v = getattr(self, k)
            if isinstance(v, bool):
                out.append("true" if v else "false")
            elif isinstance(v, int):
                out.append(str(v))
            else:
                out.append(f"{v:.17g}")
        return out


class LogLogFit(NamedTuple):
    """Fit of d_tilde ~ C (log log(1/eps0))^(-beta).

    ``residual`` is the largest relative deviation |d_tilde/model - 1| over the
    fitted records.
    """

    C: float
    beta: float
    residual: float

    @property
    def degenerate(self):
        return abs(self.beta) < 1e-6

    def model(self, eps0):
        return self.C * np.log(np.log(1.0 / np.asarray(eps0, dtype=float))) ** (-self.beta)


@dataclass(frozen=True)
class SweepResult:
    records: tuple
    fit: LogLogFit = None
    fit_count: int = 0
    status: str = "ok"

    @property
    def beta_fit(self):
        return math.nan if self.fit is None else self.fit.beta

    @property
    def C_fit(self):
        return math.nan if self.fit is None else self.fit.C


def fit_domain(records):
    """Records usable by the fit: closeness holds, 0 < eps0 <= EPS0_MAX, d_tilde > 0."""
    return [
        r for r in records
        if getattr(r, "closeness_ok", True) and 0 < r.eps0 <= EPS0_MAX and r.d_tilde > 0
    ]


def loglog_fit(records):
    """Least-squares fit of log d_tilde against log(log log(1/eps0)).

    The stability estimate is an upper bound, so the fitted (C, beta) only
    probe consistency with the law; they do not estimate its constants.
    """
    use = fit_domain(records)
    if len(use) < 4:
        raise DomainError(f"log-log fit needs >= 4 usable records, got {len(use)}")
    eps = np.array([r.eps0 for r in use])
    dt = np.array([r.d_tilde for r in use])
    x = np.log(np.log(np.log(1.0 / eps)))
    A = np.stack([np.ones_like(x), -x], -1)
    (logc, beta), *_ = np.linalg.lstsq(A, np.log(dt), rcond=None)
    C = math.exp(logc)
    model = C * np.exp(-beta * x)
    return LogLogFit(C, float(beta), float(np.max(np.abs(dt / model - 1.0))))


@dataclass(frozen=True)
class SweepConfig:
    medium: ElasticMedium = ElasticMedium(2.0, 1.0, 1.0, 2.0)
    incident: IncidentPlaneWave = IncidentPlaneWave()
    radius: float = 1.0
    m: int = 3
    phase: float = 0.0
    amplitudes: tuple = tuple(0.0025 * i for i in range(8))
    params: RegularityParams = RegularityParams(r=0.1, L=10.0, R=2.0, alpha=0.5, H0=0.09)
    n: int = 128
    M: int = 360
    x0: tuple = (3.5, 0.0)
    s_tilde: float = 0.5
    probes: int = 400
    annulus_probes: int = 4000
    distance_samples: int = 1024
    area_method: str = "quadrature"
    seed: int = 0

    def curve(self, amplitude):
        return make_curve("radial_perturbation", radius=self.radius, delta=amplitude,
                          m=self.m, phase=self.phase)


def _validate(cfg):
    a = np.asarray(cfg.amplitudes, dtype=float)
    if a.size == 0 or a[0] < 0 or np.any(np.diff(a) <= 0):
        raise DomainError("amplitudes must be nonnegative and strictly ascending")
    if np.linalg.norm(cfg.x0) < cfg.params.R + 1 + cfg.s_tilde - 1e-12:
        raise DomainError("measurement ball centre must satisfy |x0| >= R + 1 + s_tilde")


def stability_sweep(cfg=SweepConfig()):
    """One record per amplitude comparing the base curve with its perturbation."""
    _validate(cfg)
    base = cfg.curve(0.0)
    check_contained(base, cfg.params.R)
    ball = Ball(tuple(cfg.x0), cfg.s_tilde)
    annulus = Annulus.around(ball)
    ball_pts = ball.probes(cfg.probes)
    records = []
    try:
        ref = solve_dirichlet(cfg.medium, base, cfg.incident, cfg.n)
        U_ref = far_field(ref, cfg.M)
        for amp in cfg.amplitudes:
            K2 = cfg.curve(amp)
            check_contained(K2, cfg.params.R)
            sol = ref if amp == 0 else solve_dirichlet(cfg.medium, K2, cfg.incident, cfg.n)
            eps0 = farfield_error(U_ref, far_field(sol, cfg.M))
            eps = near_field_error(ref, sol, ball, cfg.probes)
            eps1 = near_field_error(ref, sol, annulus, cfg.annulus_probes, extra_points=ball_pts)
            dist = distances(base, K2, cfg.distance_samples)
            area = area_symmetric_difference(base, K2, cfg.area_method, seed=cfg.seed)
            ok = closeness_check(area, cfg.params, cfg.medium)
            records.append(ExperimentRecord(
                family=K2.as_dict(), amplitude=float(amp), d=dist.d, d_hat=dist.d_hat,
                d_tilde=dist.d_tilde, eps0=eps0, eps_near=eps, eps_annulus=eps1,
                sym_diff_area=area, closeness_ok=bool(ok), seed=int(cfg.seed), n=int(cfg.n),
                residual=max(ref.residual, sol.residual),
            ))
    except ElastoError as exc:
        raise SweepAborted(f"sweep aborted: {exc}", SweepResult(tuple(records), status="aborted"), exc) from exc
    usable = fit_domain(records)
    if len(usable) < 4:
        return SweepResult(tuple(records), None, len(usable), "insufficient")
    fit = loglog_fit(records)
    return SweepResult(tuple(records), fit, len(usable), "degenerate" if fit.degenerate else "ok")


@dataclass(frozen=True)
class FarNearRow:
    eps0: float
    eps: float
    eps1: float

    @property
    def ordered(self):
        return self.eps <= self.eps1


def far_to_near_comparison(records):
    """(eps0, eps, eps1) per record and whether eps <= eps1 held on all of them."""
    rows = [FarNearRow(r.eps0, r.eps_near, r.eps_annulus) for r in records]
    return rows, all(r.ordered for r in rows)


def write_sweep_csv(result, path, header=()):
    with open(path, "w", newline="") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        wr = csv.writer(fh)
        wr.writerow(CSV_COLUMNS)
        for rec in result.records:
            wr.writerow(rec.csv_row())


def read_sweep_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(line for line in fh if not line.startswith("#")))
    if tuple(rows[0]) != CSV_COLUMNS:
        raise DomainError(f"unexpected sweep CSV header {rows[0]}")
    return [dict(zip(CSV_COLUMNS, r)) for r in rows[1:]]
