"""Far-field patterns, Helmholtz decomposition, radiation residual and near-field errors."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from elastolab.errors import DomainError
from elastolab.farfield import (
    Annulus,
    Ball,
    FarFieldPattern,
    default_step,
    equispaced_angles,
    far_field,
    farfield_error,
    fd_div_curl,
    helmholtz_decompose,
    near_field_error,
    pattern_norm,
    radiation_residual,
    radiation_residual_of_fields,
    read_farfield_csv,
    write_farfield_csv,
    zero_pattern,
)
from elastolab.kernels import navier_Phi
from elastolab.media import LONGITUDINAL, TRANSVERSAL, IncidentPlaneWave, evaluate_incident
from elastolab.modal import disc_far_field
from elastolab.solver import scattered_field, solve_dirichlet


@pytest.fixture(scope="module")
def kite_pattern(kite_solution):
    return far_field(kite_solution, 360)


class TestPattern:
    @pytest.mark.parametrize("kind", [LONGITUDINAL, TRANSVERSAL])
    def test_disc_oracle(self, medium, unit_disc, kind):
        w = IncidentPlaneWave(kind, angle=0.4, phase=0.1)
        U = far_field(solve_dirichlet(medium, unit_disc, w, 256), 360)
        up, us = disc_far_field(medium, 1.0, w, U.theta)
        ref = FarFieldPattern(U.theta, up, us)
        assert farfield_error(U, ref) < 1e-10 * pattern_norm(ref)

    def test_point_source_pattern(self, medium, kite):
        # u = Phi(., z) q exactly; its pattern follows from the kernel at large r
        z, q = np.array([-0.2, 0.1]), np.array([1.0, -0.5j])
        sol = solve_dirichlet(medium, kite, lambda x: -(navier_Phi(medium, x, z) @ q), 256)
        U = far_field(sol, 128)
        r = 1e6
        u = navier_Phi(medium, r * U.directions, z) @ q
        approx = (np.exp(1j * medium.k_p * r) * U.U_p + np.exp(1j * medium.k_s * r) * U.U_s) / np.sqrt(r)
        assert np.abs(u - approx).max() < 1e-5 * np.abs(u).max()

    def test_structure(self, kite_pattern):
        xh = kite_pattern.directions
        U = kite_pattern.U_p
        assert_allclose(U[:, 0] * xh[:, 1] - U[:, 1] * xh[:, 0], 0.0, atol=1e-15)
        assert_allclose(np.sum(kite_pattern.U_s * xh, -1), 0.0, atol=1e-15)

    def test_large_radius(self, kite_solution, kite_pattern, medium):
        U, r = kite_pattern, 200.0
        u = scattered_field(kite_solution, r * U.directions)
        a = (np.exp(1j * medium.k_p * r) * U.U_p + np.exp(1j * medium.k_s * r) * U.U_s) / np.sqrt(r)
        assert np.linalg.norm(u - a, axis=-1).max() < 1e-2 * np.linalg.norm(a, axis=-1).max()

    def test_error_norm(self):
        th = equispaced_angles(64)
        U = FarFieldPattern(th, np.ones(64, dtype=complex), np.zeros(64, dtype=complex))
        assert_allclose(pattern_norm(U), np.sqrt(2 * np.pi), rtol=1e-15)
        assert farfield_error(U, U) == 0.0
        assert pattern_norm(zero_pattern(64)) == 0.0

    def test_mismatched_grids(self):
        with pytest.raises(DomainError):
            farfield_error(zero_pattern(64), zero_pattern(128))

    def test_too_few_directions(self, disc_solution):
        with pytest.raises(DomainError):
            far_field(disc_solution, 32)

    def test_csv_round_trip(self, kite_pattern, tmp_path):
        path = tmp_path / "ff.csv"
        write_farfield_csv(kite_pattern, path, header=("note: test",))
        back = read_farfield_csv(path)
        assert back.theta.tobytes() == kite_pattern.theta.tobytes()
        assert back.u_inf_p.tobytes() == kite_pattern.u_inf_p.tobytes()
        assert back.u_inf_s.tobytes() == kite_pattern.u_inf_s.tobytes()
        assert path.read_text().startswith("# note: test\n")


class TestDecomposition:
    @pytest.mark.parametrize("kind", [LONGITUDINAL, TRANSVERSAL])
    def test_plane_waves(self, medium, kind):
        w = IncidentPlaneWave(kind, angle=0.9, phase=0.4)
        f = lambda x: evaluate_incident(w, medium, x)
        dec = helmholtz_decompose(f, medium, np.array([0.3, -0.7]))
        zero = dec.u_s if kind == LONGITUDINAL else dec.u_p
        assert np.abs(zero).max() < 1e-6
        assert dec.defect < 1e-6

    def test_scattered_field(self, kite_solution, medium):
        rng = np.random.default_rng(2)
        th = rng.uniform(0, 2 * np.pi, 200)
        r = rng.uniform(2.5, 6.0, 200)
        pts = np.stack([r * np.cos(th), r * np.sin(th)], -1)
        worst = max(helmholtz_decompose(kite_solution, medium, p).defect for p in pts)
        assert worst < 1e-6

    def test_parts_match_split_kernels(self, kite_solution, medium):
        x = np.array([3.0, 1.5])
        f = lambda p: scattered_field(kite_solution, p)
        dec = helmholtz_decompose(f, medium, x, h=1e-3)
        assert_allclose(dec.u_p, scattered_field(kite_solution, x[None], "p")[0], atol=1e-5)
        assert_allclose(dec.u_s, scattered_field(kite_solution, x[None], "s")[0], atol=1e-5)

    def test_div_curl_second_order(self, kite_solution):
        # div u_s = 0 and curl u_p = 0; FD residuals shrink like h^2
        x = np.array([3.0, -1.0])
        us = lambda p: scattered_field(kite_solution, p, "s")
        up = lambda p: scattered_field(kite_solution, p, "p")
        hs = (0.04, 0.02)
        d = [abs(fd_div_curl(us, x, h)[0]) for h in hs]
        c = [abs(fd_div_curl(up, x, h)[1]) for h in hs]
        assert_allclose(d[0] / d[1], 4.0, rtol=0.05)
        assert_allclose(c[0] / c[1], 4.0, rtol=0.05)

    def test_step_too_large_near_boundary(self, kite_solution, medium):
        with pytest.raises(DomainError):
            x = kite_solution.curve.point(0.5) + 0.03 * kite_solution.curve.normal(0.5)
            helmholtz_decompose(kite_solution, medium, x, h=0.01)

    def test_default_step(self, medium):
        assert_allclose(default_step(medium), 1e-4 * np.pi, rtol=1e-15)


class TestRadiation:
    def test_decreasing(self, kite_solution):
        res = [radiation_residual(kite_solution, r) for r in (25.0, 50.0, 100.0)]
        for k in range(2):
            assert res[0][k] > res[1][k] > res[2][k]

    def test_plane_wave_does_not_decay(self, medium):
        w = IncidentPlaneWave(LONGITUDINAL, angle=0.0)
        f = lambda x: evaluate_incident(w, medium, x)
        res = [radiation_residual_of_fields(f, f, medium, r)[0] for r in (25.0, 50.0, 100.0)]
        assert res[2] > res[0]

    def test_radius_must_clear_scatterer(self, kite_solution):
        with pytest.raises(DomainError):
            radiation_residual(kite_solution, 2.5)


class TestRegions:
    def test_ball_probes(self):
        b = Ball((3.5, 0.0), 0.5)
        for seed in (None, 4):
            p = b.probes(400, seed)
            assert np.all(np.linalg.norm(p - [3.5, 0.0], axis=-1) <= 0.5 + 1e-12)

    def test_annulus_probes(self):
        a = Annulus.around(Ball((3.5, 0.0), 0.5))
        assert (a.inner, a.outer) == (3.0, 4.0)
        r = np.linalg.norm(a.probes(1000, 3), axis=-1)
        assert r.min() >= 3.0 - 1e-12 and r.max() <= 4.0 + 1e-12

    def test_near_field_identical(self, kite_solution):
        assert near_field_error(kite_solution, kite_solution, Ball((3.5, 0.0), 0.5)) == 0.0

    def test_near_field_reseeded(self, medium, kite_solution):
        other = solve_dirichlet(medium, kite_solution.curve.translated((0.02, 0.0)),
                                kite_solution.incident, 128)
        ball = Ball((3.5, 1.0), 0.5)
        grid = near_field_error(kite_solution, other, ball, 400)
        for seed in (1, 2, 3):
            assert_allclose(near_field_error(kite_solution, other, ball, 400, seed=seed), grid, rtol=0.05)

    def test_region_must_avoid_scatterer(self, kite_solution):
        with pytest.raises(DomainError):
            near_field_error(kite_solution, kite_solution, Ball((2.0, 0.0), 0.5))
