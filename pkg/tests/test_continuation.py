import math

import numpy as np
import pytest

from mnlab import continuation as cont
from mnlab.core import PI2, ProblemParams
from mnlab.errors import DomainError, NumericalError, ThresholdNotFoundError
from mnlab.solvers import find_all_positive


class TestWorkers:
    def test_env_caps(self, monkeypatch):
        monkeypatch.setenv("MNLAB_THREADS", "2")
        assert cont.worker_count(8) == 2
        assert cont.worker_count(1) == 1

    def test_env_unset(self, monkeypatch):
        monkeypatch.delenv("MNLAB_THREADS", raising=False)
        assert cont.worker_count(5) == 5
        assert cont.worker_count() >= 1

    @pytest.mark.parametrize("bad", ["zero", "0", "-3", "1.5"])
    def test_env_invalid(self, monkeypatch, bad):
        monkeypatch.setenv("MNLAB_THREADS", bad)
        with pytest.raises(DomainError):
            cont.worker_count(4)

    @pytest.mark.parametrize("workers", [1, 4])
    def test_parallel_map_order(self, workers):
        items = list(range(50))
        assert cont.parallel_map(lambda k: k * k, items, workers) == [k * k for k in items]

    def test_parallel_map_empty(self):
        assert cont.parallel_map(abs, [], 4) == []


@pytest.fixture(scope="module")
def sweep():
    grid = [9.0, -20.0, -10.0, -5.0, -1.0, 0.0, 3.0, 6.0, PI2 - 1e-4]
    return cont.sweep_lambda(3.0, 0.5, grid)


class TestSweep:
    def test_sorted(self, sweep):
        keys = [(b.lam, b.v0) for b in sweep]
        assert keys == sorted(keys)
        assert not sweep.failures

    def test_symmetric_everywhere_and_single_valued(self, sweep):
        lams = [b.lam for b in sweep.symmetric()]
        assert len(lams) == 9 and len(set(lams)) == 9

    def test_vanishes_near_pi2(self, sweep):
        sym = sweep.symmetric()
        assert sym[-1].r_max < sym[0].r_max
        assert sym[-1].r_max < 0.1

    def test_lower_bound_negative_lambda(self, sweep):
        for b in sweep:
            if b.lam < 0.0:
                assert b.r_max >= (-b.lam) ** (1.0 / (b.p - 1.0))

    def test_all_verified(self, sweep):
        assert all(b.verified for b in sweep)
        assert len(sweep) > len(sweep.symmetric())

    def test_asymmetric_found_where_scan_finds_them(self, sweep):
        n = len(find_all_positive(ProblemParams(-5.0, 3.0, 0.5)))
        assert sum(1 for b in sweep if b.lam == -5.0) == n == 3

    def test_v0_continuity(self):
        grid = np.linspace(-5.0, 9.0, 29)
        r = cont.sweep_lambda(3.0, 0.5, grid, asymmetric=False)
        v0 = np.array([b.v0 for b in r.symmetric()])
        d = np.abs(np.diff(v0))
        for i in range(len(d)):
            local = max(d[max(i - 1, 0)], d[min(i + 1, len(d) - 1)])
            assert d[i] <= 10.0 * local

    def test_failures_recorded(self, monkeypatch):
        real = cont.solve_symmetric

        def flaky(params, *a, **k):
            if params.lam == 1.0:
                raise NumericalError("injected")
            return real(params, *a, **k)

        monkeypatch.setattr(cont, "solve_symmetric", flaky)
        r = cont.sweep_lambda(3.0, 0.5, [0.0, 1.0, 2.0], asymmetric=False)
        assert [b.lam for b in r] == [0.0, 2.0]
        assert len(r.failures) == 1 and r.failures[0].lam == 1.0
        assert "injected" in r.failures[0].reason

    def test_domain(self):
        with pytest.raises(DomainError):
            cont.sweep_lambda(3.0, 0.5, [0.0, 10.0])
        with pytest.raises(DomainError):
            cont.sweep_lambda(3.0, 0.5, [])


class TestBlowup:
    @pytest.mark.parametrize("lam", [0.0, -5.0])
    def test_monotone_growth(self, lam):
        t = cont.blowup_study(lam, 3.0, [0.5, 0.9, 0.99, 0.999], [0.25, 0.5, 0.75])
        assert t.failure is None and t.values.shape == (4, 3)
        for x in t.x_probes:
            col = t.column(x)
            assert np.all(np.diff(col) > 0.0)
            assert col[-1] > 10.0 * col[0]
        assert np.all(np.diff(t.r_max) > 0.0)

    def test_domain(self):
        with pytest.raises(DomainError):
            cont.blowup_study(0.0, 3.0, [0.9, 0.5], [0.5])
        with pytest.raises(DomainError):
            cont.blowup_study(0.0, 3.0, [0.5], [1.0])
        with pytest.raises(DomainError):
            cont.blowup_study(PI2, 3.0, [0.5], [0.5])


@pytest.fixture(scope="module")
def rows():
    return cont.metasolution_sequence(1.0, 3.0, 5)


class TestSequence:
    def test_length(self, rows):
        assert [r.n for r in rows] == [1, 2, 3, 4, 5]

    def test_trends(self, rows):
        lam = [r.lam for r in rows]
        h = [r.h for r in rows]
        assert all(a < b for a, b in zip(lam, lam[1:])) and lam[-1] < PI2
        assert all(a < b for a, b in zip(h, h[1:])) and h[-1] < 1.0
        for r in rows:
            assert PI2 - 1.0 / r.n < r.lam < PI2
            assert 1.0 - 1.0 / r.n < r.h < 1.0 or r.n == 1

    def test_amplitude(self, rows):
        for r in rows:
            assert abs(r.r_max - 1.0) < 1e-8

    def test_sup_error_decreasing(self, rows):
        e = [r.sup_error for r in rows]
        assert all(a > b for a, b in zip(e, e[1:]))

    def test_domain(self):
        with pytest.raises(DomainError):
            cont.metasolution_sequence(0.0, 3.0, 2)
        with pytest.raises(DomainError):
            cont.metasolution_sequence(1.0, 3.0, 0)


@pytest.fixture(scope="module")
def estimates():
    return {h: cont.estimate_pitchfork(3.0, h, -20.0, 9.8, resolution=1e-3)
            for h in (0.2, 0.4, 0.6, 0.8, 0.9, 0.95)}


class TestPitchfork:
    def test_decreases_as_h_shrinks(self, estimates):
        assert estimates[0.2].value < estimates[0.4].value < estimates[0.6].value

    def test_increases_toward_pi2(self, estimates):
        e = [estimates[h].value for h in (0.8, 0.9, 0.95)]
        assert e[0] < e[1] < e[2] < PI2

    def test_resolution_and_label(self, estimates):
        for e in estimates.values():
            assert e.resolution <= 1e-3
            assert e.lower <= e.value <= e.upper
            assert "empirical" in e.kind
            assert float(e) == e.value

    @pytest.mark.parametrize("h", [0.4, 0.8])
    def test_consistency(self, estimates, h):
        e = estimates[h]
        below = find_all_positive(ProblemParams(e.lower - 0.01, 3.0, h))
        above = find_all_positive(ProblemParams(e.upper + 0.01, 3.0, h))
        assert len(below) == 3 and len(above) == 1

    def test_not_found(self):
        with pytest.raises(ThresholdNotFoundError):
            cont.estimate_pitchfork(3.0, 0.5, -10.0, -5.0)

    def test_domain(self):
        with pytest.raises(DomainError):
            cont.estimate_pitchfork(3.0, 0.5, 5.0, 1.0)


class TestMinR:
    def test_lambda6(self):
        e = cont.estimate_min_R(6.0, 3.0)
        assert e.value <= 300.0
        assert not e.notes

    def test_near_quarter_pi2_recorded(self):
        # comparison is recorded, not asserted
        e = cont.estimate_min_R(2.5, 3.0)
        assert e.lower < e.value and math.isfinite(e.value)

    def test_domain(self):
        with pytest.raises(DomainError):
            cont.estimate_min_R(2.0, 3.0)

    def test_not_found(self):
        with pytest.raises(ThresholdNotFoundError):
            cont.estimate_min_R(6.0, 3.0, R_start=10.0, R_cap=15.0)
