import numpy as np
import pytest

from nhdecay.dynamics import SimConfig, evolve_bare_continuum
from nhdecay.lattice import Dispersion, asymmetric_from_deltas, eval_group_velocity
from nhdecay.stability import (
    Regime,
    classify,
    drift_asymptote,
    find_saddle_points,
    max_im_on_axis,
    minimax_growth_rate,
)

import oracles


def _match(found, expected, tol=1e-9):
    """Every expected k has a partner in ``found`` (modulo 2 pi in Re k)."""
    for e in expected:
        d = np.array([s - e for s in found])
        d = (d.real + np.pi) % (2 * np.pi) - np.pi + 1j * d.imag
        assert np.min(np.abs(d)) < tol, (e, found)


class TestSaddles:
    def test_convective_pair(self):
        saddles = find_saddle_points(asymmetric_from_deltas(1, 0.7))
        assert len(saddles) == 2
        # both saddles sit at Im k = artanh(0.7), half a zone apart
        a = np.arctanh(0.7)
        _match([s.k_s for s in saddles], [1j * a, np.pi + 1j * a])
        energies = sorted(s.omega_s.real for s in saddles)
        assert energies == pytest.approx([-np.sqrt(0.51), np.sqrt(0.51)], abs=1e-10)
        assert all(s.omega_s.imag == 0 for s in saddles)
        assert all(s.order == 2 for s in saddles)

    def test_absolute_pair(self):
        saddles = find_saddle_points(asymmetric_from_deltas(1, 1.2))
        im = [s.omega_s.imag for s in saddles]
        assert im == pytest.approx([np.sqrt(0.44), -np.sqrt(0.44)], abs=1e-10)
        assert all(abs(s.omega_s.real) < 1e-12 for s in saddles)

    def test_unidirectional_has_none(self):
        d = asymmetric_from_deltas(1, 1)
        assert find_saddle_points(d) == []
        assert classify(d).boundary_flag

    @pytest.mark.parametrize("d1", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("d2", [0.0, 0.3, 0.7, 1.3, 2.5])
    def test_closed_form_energies(self, d1, d2):
        if d1 == d2:
            pytest.skip("unidirectional")
        saddles = find_saddle_points(asymmetric_from_deltas(d1, d2))
        expected = np.sqrt(complex(d1**2 - d2**2))
        got = sorted((s.omega_s for s in saddles), key=lambda w: (w.real, w.imag))
        want = sorted([expected, -expected], key=lambda w: (w.real, w.imag))
        np.testing.assert_allclose(got, want, atol=1e-10)

    @pytest.mark.parametrize("seed", range(6))
    def test_against_polynomial_roots(self, seed):
        rng = np.random.default_rng(seed)
        coeffs = {l: complex(*rng.normal(0, 1, 2)) for l in (-2, -1, 1, 2)}
        d = Dispersion(coeffs)
        for slope in (0.0, 0.4):
            want = oracles.saddles_polyroots(coeffs, slope)
            want = want[np.abs(want.imag) <= 5.0]
            found = find_saddle_points(d, slope)
            assert len(found) == len(want)
            _match([s.k_s for s in found], want, tol=1e-8)
            for s in found:
                assert abs(eval_group_velocity(d, s.k_s) - slope) < 1e-10

    def test_sorted_by_growth(self):
        d = Dispersion({1: 0.9 + 0.3j, -1: 0.2 - 0.4j, 2: 0.15j})
        im = [s.omega_s.imag for s in find_saddle_points(d)]
        assert im == sorted(im, reverse=True)


class TestClassify:
    @pytest.mark.parametrize(
        "d2,verdict",
        [(0.7, Regime.CONVECTIVE), (1.2, Regime.ABSOLUTE), (0.0, Regime.STABLE), (1.0, Regime.CONVECTIVE)],
    )
    def test_examples(self, d2, verdict):
        assert classify(asymmetric_from_deltas(1, d2)).verdict is verdict

    def test_critical_saddle_and_co_critical(self):
        rc = classify(asymmetric_from_deltas(1, 0.7))
        # ties at Im omega = 0 and |Re omega| broken by |Re k|, both are 0; the
        # two real saddles are reported together
        assert len(rc.co_critical) == 2
        assert rc.critical_saddle.omega_s == pytest.approx(np.sqrt(0.51))
        assert rc.max_im_on_axis == pytest.approx(0.7, abs=1e-12)
        assert not rc.boundary_flag

    def test_stable_iff_no_growth_on_axis(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            coeffs = {l: complex(*rng.normal(0, 0.5, 2)) for l in (-1, 1, 2)}
            coeffs[0] = -1j * rng.uniform(0, 2)
            rc = classify(Dispersion(coeffs))
            assert (rc.verdict is Regime.STABLE) == (rc.max_im_on_axis <= 1e-12)
            if rc.verdict is Regime.ABSOLUTE:
                assert rc.critical_saddle.omega_s.imag > 0


class TestDrift:
    def test_absolute_rest_frame(self):
        rate, power, omega_s = drift_asymptote(asymmetric_from_deltas(1, 1.2), 0.0)
        assert rate == pytest.approx(np.sqrt(0.44), abs=1e-9)
        assert power == -0.5
        assert omega_s.imag > 0

    def test_convective_rest_frame(self):
        rate, power, _ = drift_asymptote(asymmetric_from_deltas(1, 0.7), 0.0)
        assert abs(rate) < 1e-10
        assert power == -0.5

    def test_hermitian(self):
        rate, _, _ = drift_asymptote(asymmetric_from_deltas(1, 0), 0.0)
        assert abs(rate) < 1e-10

    def test_minimax_agrees_with_saddle(self):
        for d2, v in [(0.7, 0.0), (0.7, 0.3), (1.2, 0.0), (0.4, -0.2)]:
            d = asymmetric_from_deltas(1, d2)
            rate, _, _ = drift_asymptote(d, v)
            bound, _ = minimax_growth_rate(d, v)
            assert rate == pytest.approx(bound, abs=1e-8)

    @pytest.mark.parametrize("d2", [0.3, 0.7, -0.5])
    def test_moving_frame_grows(self, d2):
        # the fastest-growing real mode drifts with -Re omega'(k0); following it
        # the packet grows at Im omega(k0) > 0
        d = asymmetric_from_deltas(1, d2)
        top, k0 = max_im_on_axis(d)
        v = -float(np.real(d.derivative(k0, 1)))
        rate, _, _ = drift_asymptote(d, v)
        assert rate > 0
        assert rate == pytest.approx(top, abs=1e-8)

    def test_moving_frame_simulation(self):
        d = asymmetric_from_deltas(1, 0.7)
        top, k0 = max_im_on_axis(d)
        v = -float(np.real(d.derivative(k0, 1)))
        rec = evolve_bare_continuum(d, velocity=v, t_final=60.0)
        assert not rec.flags
        t, y = rec.times, np.log(rec.drift)
        sel = (t >= 30) & (t <= 60)
        # |c| ~ t^-1/2 exp(rate t): remove the algebraic factor before fitting
        slope = np.polyfit(t[sel], y[sel] + 0.5 * np.log(t[sel]), 1)[0]
        assert slope == pytest.approx(top, rel=0.02)


def test_bare_convective_example():
    rec = evolve_bare_continuum(asymmetric_from_deltas(1, 0.7), config=SimConfig(100.0))
    assert rec.at_origin[-1] < 0.2
    assert rec.maximum[-1] > 10 * rec.maximum[len(rec.times) // 2]
