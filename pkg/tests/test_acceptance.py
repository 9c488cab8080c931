"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line (printed in the pytest terminal summary)
with the measured quantity and the tolerance, then asserts the criterion.
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest
from threadpoolctl import threadpool_limits

from elastolab.analysis import (
    ThreeSpheresProbe,
    fourier_bessel,
    plane_wave_sum,
    random_trig_polynomial,
    run_verify_suite,
    three_spheres_exponent,
    values_only,
)
from elastolab.experiments import (
    SweepConfig,
    far_to_near_comparison,
    loglog_fit,
    stability_sweep,
    write_sweep_csv,
)
from elastolab.farfield import (
    FarFieldPattern,
    equispaced_angles,
    far_field,
    farfield_error,
    fd_div_curl,
    helmholtz_decompose,
    part_sampler,
    pattern_norm,
    radiation_residual,
    radiation_residual_of_fields,
)
from elastolab.geometry import make_curve
from elastolab.media import (
    LONGITUDINAL,
    TRANSVERSAL,
    ElasticMedium,
    IncidentPlaneWave,
    closeness_constant,
    closeness_constant_from_wavenumbers,
    evaluate_incident,
)
from elastolab.modal import disc_far_field
from elastolab.solver import scattered_field, solve_dirichlet


@pytest.fixture(scope="module")
def kite_solution_r25(medium):
    # the kite reaches radius 2.07, so the bounding ball uses R = 2.5
    return solve_dirichlet(medium, make_curve("kite", scale=1.0), IncidentPlaneWave(TRANSVERSAL, 0.7), 256)


@pytest.fixture(scope="module")
def default_sweep():
    t0 = time.perf_counter()
    res = stability_sweep(SweepConfig())
    return res, time.perf_counter() - t0


def test_01_disc_oracle(acceptance, medium, unit_disc):
    # omega_s * r0 = 2 for the unit disc
    w = IncidentPlaneWave(LONGITUDINAL, angle=0.0)
    with threadpool_limits(limits=1):
        t0 = time.perf_counter()
        U = far_field(solve_dirichlet(medium, unit_disc, w, 256), 360)
        elapsed = time.perf_counter() - t0
    ref = FarFieldPattern(U.theta, *disc_far_field(medium, 1.0, w, U.theta))
    rel = farfield_error(U, ref) / pattern_norm(ref)
    ok = rel < 1e-6 and elapsed < 30.0
    acceptance(1, "disc far field vs mode matching", ok,
               f"rel L2 error {rel:.2e} (< 1e-6), {elapsed:.2f} s single-threaded (< 30 s)")
    assert ok


def test_02_boundary_condition(acceptance, medium, kite):
    sol = solve_dirichlet(medium, kite, IncidentPlaneWave(TRANSVERSAL, 0.7, 0.3), 512)
    ok = sol.residual < 1e-8
    acceptance(2, "kite boundary residual, n=512, 4n probes", ok, f"sup |u| = {sol.residual:.2e} (< 1e-8)")
    assert ok


def test_03_spectral_convergence(acceptance, medium):
    # a 20:1 ellipse: smooth, with a narrow analyticity strip, so that the
    # error stays above roundoff over the whole range of n
    K = make_curve("ellipse", a=1.5, b=0.075)
    w = IncidentPlaneWave(TRANSVERSAL, 0.7)
    ref = far_field(solve_dirichlet(medium, K, w, 1024), 360)
    errs = [farfield_error(far_field(solve_dirichlet(medium, K, w, n), 360), ref) / pattern_norm(ref)
            for n in (64, 128, 256, 512)]
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    ok = all(r >= 10.0 for r in ratios)
    acceptance(3, "spectral convergence vs n=1024, n=64..512", ok,
               "errors " + ", ".join(f"{e:.1e}" for e in errs)
               + "; ratios " + ", ".join(f"{r:.3g}" for r in ratios) + " (each >= 10)")
    assert ok


def test_04_far_field_structure(acceptance, medium, kite_solution_r25):
    U = far_field(kite_solution_r25, 360)
    xh = U.directions
    par = np.abs(U.U_p[:, 0] * xh[:, 1] - U.U_p[:, 1] * xh[:, 0]).max()
    tang = np.abs(np.sum(U.U_s * xh, -1)).max()
    r = 200.0
    u = scattered_field(kite_solution_r25, r * xh)
    a = (np.exp(1j * medium.k_p * r) * U.U_p + np.exp(1j * medium.k_s * r) * U.U_s) / math.sqrt(r)
    rel = np.linalg.norm(u - a, axis=-1).max() / np.linalg.norm(a, axis=-1).max()
    ok = par < 1e-14 and tang < 1e-14 and rel < 1e-2
    acceptance(4, "far-field structure and r=200 cross-check", ok,
               f"|U_p x xhat| {par:.1e}, |U_s . xhat| {tang:.1e}, relative misfit {rel:.2e} (< 1e-2)")
    assert ok


def test_05_decay(acceptance, kite_solution_r25):
    R = 2.5
    th = equispaced_angles(360)
    xh = np.stack([np.cos(th), np.sin(th)], -1)
    radii = np.linspace(R + 1, 50.0, 120)
    weighted = np.array([np.linalg.norm(scattered_field(kite_solution_r25, r * xh), axis=-1).max()
                         * math.sqrt(r) for r in radii])
    bound_25 = weighted[radii <= 25.0].max()
    bound_50 = weighted.max()
    var = bound_50 / bound_25 - 1.0
    ok = np.all(np.isfinite(weighted)) and var < 0.10
    acceptance(5, "r^(1/2) decay over [R+1, 50] x 360 directions", ok,
               f"bound {bound_25:.4f} up to r=25, {bound_50:.4f} up to r=50, variation {var:.2%} (< 10%)")
    assert ok


def test_06_helmholtz_decomposition(acceptance, medium, kite_solution_r25):
    rng = np.random.default_rng(6)
    th = rng.uniform(0, 2 * np.pi, 200)
    rr = rng.uniform(3.0, 8.0, 200)
    pts = np.stack([rr * np.cos(th), rr * np.sin(th)], -1)
    defect = max(helmholtz_decompose(kite_solution_r25, medium, p).defect for p in pts)
    # div u_s and curl u_p from the decomposed parts, outer steps h and h/2
    us = part_sampler(kite_solution_r25, medium, "s", None)
    up = part_sampler(kite_solution_r25, medium, "p", None)
    x = np.array([3.5, 1.0])
    hs = (0.04, 0.02)
    div = [abs(fd_div_curl(us, x, h)[0]) for h in hs]
    curl = [abs(fd_div_curl(up, x, h)[1]) for h in hs]
    p_div = math.log2(div[0] / div[1])
    p_curl = math.log2(curl[0] / curl[1])
    ok = defect < 1e-6 and abs(p_div - 2) < 0.2 and abs(p_curl - 2) < 0.2
    acceptance(6, "Helmholtz decomposition", ok,
               f"max defect {defect:.1e} (< 1e-6); observed orders div u_s {p_div:.2f}, "
               f"curl u_p {p_curl:.2f} (2 +- 0.2)")
    assert ok


def test_07_kupradze(acceptance, medium, kite_solution_r25):
    res = [radiation_residual(kite_solution_r25, r) for r in (25.0, 50.0, 100.0)]
    dec = all(res[0][k] > res[1][k] > res[2][k] for k in range(2))
    w = IncidentPlaneWave(LONGITUDINAL, 0.0)
    f = lambda x: evaluate_incident(w, medium, x)
    ctrl = [radiation_residual_of_fields(f, f, medium, r) for r in (25.0, 50.0, 100.0)]
    no_decay = ctrl[2][0] >= ctrl[0][0]
    ok = dec and no_decay
    acceptance(7, "Kupradze radiation residual", ok,
               "p " + ", ".join(f"{r[0]:.2e}" for r in res) + "; s " + ", ".join(f"{r[1]:.2e}" for r in res)
               + "; plane-wave control " + ", ".join(f"{r[0]:.2e}" for r in ctrl))
    assert ok


def test_08_constants(acceptance):
    rng = np.random.default_rng(8)
    worst_closed, worst_forms = 0.0, 0.0
    for _ in range(100):
        mu = rng.uniform(0.1, 10.0)
        lam = rng.uniform(1e-3, 20.0)
        med = ElasticMedium(lam, mu, rng.uniform(0.1, 10.0), rng.uniform(0.1, 20.0))
        h1 = closeness_constant(med)
        ref = math.pi * med.mu / (8 * med.rho * med.omega ** 2)
        worst_closed = max(worst_closed, abs(h1 / ref - 1))
        worst_forms = max(worst_forms, abs(closeness_constant_from_wavenumbers(med) / h1 - 1))
    ok = worst_closed < 1e-12 and worst_forms < 1e-12
    acceptance(8, "closeness constant", ok,
               f"vs pi mu/(8 rho w^2) {worst_closed:.1e}, two forms {worst_forms:.1e} (< 1e-12, 100 media)")
    assert ok


def test_09_inequality_suite(acceptance, medium):
    t0 = time.perf_counter()
    rows = run_verify_suite(k=medium.k_p)
    elapsed = time.perf_counter() - t0
    failed = [r.check_name for r in rows if not r.holds]
    ok = not failed and elapsed < 60.0
    acceptance(9, "Friedrichs / Maz'ya / Korn suite", ok,
               f"{len(rows)} checks, {len(failed)} failed, {elapsed:.1f} s (< 60 s)")
    assert ok, failed[:5]


def test_10_three_spheres(acceptance):
    betas = []
    probes = [ThreeSpheresProbe((0.0, 0.0), 0.25, 0.5, 1.0), ThreeSpheresProbe((0.3, -0.2), 0.1, 0.4, 1.2)]
    fams = [values_only(fourier_bessel(m, 2.0)) for m in (0, 1, 3, 5)]
    fams += [values_only(plane_wave_sum(2.0, s)) for s in range(4)]
    fams += [values_only(random_trig_polynomial(s)) for s in range(4)]
    for u in fams:
        for pr in probes:
            out = three_spheres_exponent(u, 2.0, pr)
            if not out.degenerate:
                betas.append(out.beta)
    in_range = all(0.0 <= b <= 1.0 for b in betas)
    fb = three_spheres_exponent(values_only(fourier_bessel(5, 2.0)), 2.0, probes[0])
    pw = three_spheres_exponent(values_only(plane_wave_sum(2.0, 0, count=1)), 2.0, probes[0])
    ok = in_range and not fb.degenerate and fb.beta >= 0.05 and pw.degenerate
    acceptance(10, "three-spheres exponent", ok,
               f"{len(betas)} defined exponents in [{min(betas):.3f}, {max(betas):.3f}]; "
               f"J5 beta* = {fb.beta:.4f} (>= 0.05); single plane wave degenerate = {pw.degenerate}")
    assert ok


def test_11_stability_sweep(acceptance, default_sweep):
    res, elapsed = default_sweep
    recs = res.records
    eps0 = np.array([r.eps0 for r in recs])
    dt = np.array([r.d_tilde for r in recs])
    inc = bool(np.all(np.diff(eps0) > 0) and np.all(np.diff(dt) > 0))
    fine = stability_sweep(replace(SweepConfig(), n=2 * SweepConfig().n))
    stable = bool(np.array_equal(np.argsort(eps0), np.argsort([r.eps0 for r in fine.records]))
                  and np.array_equal(np.argsort(dt), np.argsort([r.d_tilde for r in fine.records])))
    eps_syn = np.geomspace(1e-12, 1e-2, 8)
    syn = [type("R", (), dict(eps0=e, d_tilde=2.0 * math.log(math.log(1 / e)) ** -0.5))
           for e in eps_syn]
    fit = loglog_fit(syn)
    fit_err = max(abs(fit.C / 2.0 - 1), abs(fit.beta / 0.5 - 1))
    _, ordered = far_to_near_comparison(recs)
    ok = len(recs) == 8 and inc and stable and fit_err < 1e-6 and ordered and elapsed < 600
    acceptance(11, "stability sweep (8 amplitudes)", ok,
               f"eps0, d_tilde strictly increasing = {inc}; order stable n->2n = {stable}; "
               f"synthetic fit error {fit_err:.1e} (< 1e-6); eps <= eps1 on all = {ordered}; "
               f"{elapsed:.1f} s (< 600 s); fit C={res.C_fit:.3g} beta={res.beta_fit:.3g} "
               f"on {res.fit_count} records")
    assert ok


def test_12_determinism(acceptance, default_sweep, tmp_path):
    first, _ = default_sweep
    again = stability_sweep(SweepConfig())
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_sweep_csv(first, a)
    write_sweep_csv(again, b)
    ok = a.read_bytes() == b.read_bytes()
    acceptance(12, "determinism", ok, f"repeated sweep CSVs bit-identical = {ok}")
    assert ok
