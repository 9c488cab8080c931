"""Stability sweeps, the log-log fit and sweep CSV output."""

import math
from dataclasses import replace
from types import SimpleNamespace

import numpy as np
import pytest
from numpy.testing import assert_allclose

from elastolab.errors import DomainError, SweepAborted
from elastolab.experiments import (
    CSV_COLUMNS,
    EPS0_MAX,
    SweepConfig,
    far_to_near_comparison,
    fit_domain,
    loglog_fit,
    read_sweep_csv,
    stability_sweep,
    write_sweep_csv,
)
from elastolab.geometry import RegularityParams

SMALL = SweepConfig(
    amplitudes=(0.0, 0.005, 0.01, 0.015, 0.02), n=64, M=128,
    probes=200, annulus_probes=800, distance_samples=512,
)


def synthetic(C, beta, eps):
    return [SimpleNamespace(eps0=e, d_tilde=C * math.log(math.log(1 / e)) ** (-beta)) for e in eps]


@pytest.fixture(scope="module")
def small_sweep():
    return stability_sweep(SMALL)


class TestLogLogFit:
    def test_recovers_synthetic(self):
        fit = loglog_fit(synthetic(2.0, 0.5, np.geomspace(1e-12, 1e-2, 8)))
        assert_allclose([fit.C, fit.beta], [2.0, 0.5], rtol=1e-6)
        assert fit.residual < 1e-10
        assert not fit.degenerate

    def test_model(self):
        fit = loglog_fit(synthetic(1.5, 2.0, np.geomspace(1e-9, 1e-3, 6)))
        e = np.array([1e-5, 1e-4])
        assert_allclose(fit.model(e), 1.5 * np.log(np.log(1 / e)) ** -2.0, rtol=1e-8)

    def test_constant_is_degenerate(self):
        recs = [SimpleNamespace(eps0=e, d_tilde=0.3) for e in np.geomspace(1e-8, 1e-2, 6)]
        fit = loglog_fit(recs)
        assert fit.degenerate
        assert_allclose(fit.C, 0.3, rtol=1e-12)

    def test_needs_four_records(self):
        with pytest.raises(DomainError):
            loglog_fit(synthetic(2.0, 0.5, [1e-6, 1e-4, 1e-3]))

    def test_domain_filter(self):
        recs = synthetic(2.0, 0.5, [1e-6, 1e-3, 0.03])
        recs.append(SimpleNamespace(eps0=0.0, d_tilde=0.0))
        recs.append(SimpleNamespace(eps0=1e-4, d_tilde=0.1, closeness_ok=False))
        kept = fit_domain(recs)
        assert len(kept) == 3
        assert all(0 < r.eps0 <= EPS0_MAX for r in kept)

    def test_eps0_max(self):
        # log(1 / EPS0_MAX) = e + log 2, so the outer log is well above 1
        assert_allclose(math.log(math.log(1 / EPS0_MAX)), math.log(math.e + math.log(2)), rtol=1e-15)


class TestSweep:
    def test_records(self, small_sweep):
        recs = small_sweep.records
        assert len(recs) == len(SMALL.amplitudes)
        first = recs[0]
        assert (first.eps0, first.d_tilde, first.sym_diff_area) == (0.0, 0.0, 0.0)
        assert all(r.n == SMALL.n and r.seed == SMALL.seed for r in recs)

    def test_monotone(self, small_sweep):
        eps0 = [r.eps0 for r in small_sweep.records]
        dt = [r.d_tilde for r in small_sweep.records]
        assert np.all(np.diff(eps0) > 0)
        assert np.all(np.diff(dt) > 0)

    def test_distance_equals_amplitude(self, small_sweep):
        # r = 1 against r = 1 + d cos 3t: the filled regions are d apart
        for r in small_sweep.records:
            assert_allclose(r.d_tilde, r.amplitude, atol=1e-4)
            assert_allclose(r.sym_diff_area, 4 * r.amplitude, rtol=1e-9, atol=1e-15)

    def test_ball_annulus_ordering(self, small_sweep):
        rows, ok = far_to_near_comparison(small_sweep.records)
        assert ok and all(r.ordered for r in rows)

    def test_fit(self, small_sweep):
        usable = [r for r in small_sweep.records if 0 < r.eps0 <= EPS0_MAX]
        assert small_sweep.fit_count == len(usable)
        if len(usable) < 4:
            assert small_sweep.status == "insufficient" and small_sweep.fit is None
        else:
            assert small_sweep.beta_fit == small_sweep.fit.beta

    def test_refinement_keeps_order(self, small_sweep):
        fine = stability_sweep(replace(SMALL, n=128))
        a = np.argsort([r.eps0 for r in small_sweep.records])
        b = np.argsort([r.eps0 for r in fine.records])
        assert np.array_equal(a, b)

    def test_insufficient(self):
        res = stability_sweep(replace(SMALL, amplitudes=(0.0, 0.01)))
        assert res.status == "insufficient" and res.fit is None and math.isnan(res.beta_fit)

    def test_aborted_keeps_partial(self):
        cfg = replace(SMALL, amplitudes=(0.0, 0.005, 0.08),
                      params=RegularityParams(r=0.1, L=10.0, R=1.05, alpha=0.5, H0=0.09))
        with pytest.raises(SweepAborted) as exc:
            stability_sweep(cfg)
        assert len(exc.value.partial.records) == 2
        assert exc.value.partial.status == "aborted"

    @pytest.mark.parametrize("amps", [(), (0.01, 0.005), (-0.01, 0.0)])
    def test_invalid_amplitudes(self, amps):
        with pytest.raises(DomainError):
            stability_sweep(replace(SMALL, amplitudes=amps))

    def test_ball_too_close(self):
        with pytest.raises(DomainError):
            stability_sweep(replace(SMALL, x0=(3.0, 0.0)))


class TestCsv:
    def test_round_trip(self, small_sweep, tmp_path):
        path = tmp_path / "sweep.csv"
        write_sweep_csv(small_sweep, path, header=("config: {}",))
        rows = read_sweep_csv(path)
        assert len(rows) == len(small_sweep.records)
        for row, rec in zip(rows, small_sweep.records):
            assert float(row["eps0"]) == rec.eps0
            assert float(row["d_tilde"]) == rec.d_tilde
            assert row["closeness_ok"] in ("true", "false")
        assert tuple(rows[0]) == CSV_COLUMNS

    def test_deterministic(self, small_sweep, tmp_path):
        again = stability_sweep(SMALL)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_sweep_csv(small_sweep, a)
        write_sweep_csv(again, b)
        assert a.read_bytes() == b.read_bytes()

    def test_bad_header(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(DomainError):
            read_sweep_csv(path)
