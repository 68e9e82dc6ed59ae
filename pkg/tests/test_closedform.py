import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nhdecay.closedform import (
    AsymmetricModel,
    AsymmetricRegime,
    degenerate_solution,
    ellipse_location,
    exact_self_energy,
    gauge_transform,
    hermitize,
    pole_exact,
    pole_weak,
    rabi_frequencies,
    rabi_pair,
    rabi_solution,
    regime,
    sqrt_down,
)
from nhdecay.exceptions import OnLoopError, RegimeError

import oracles

PRESET = AsymmetricModel.from_deltas(1.0, 0.7)


class TestModel:
    def test_derived_quantities(self):
        m = AsymmetricModel(0.85, 0.15)
        assert (m.delta1, m.delta2) == pytest.approx((1.0, 0.7))
        assert m.gamma**2 == pytest.approx(m.delta1**2 - m.delta2**2, abs=1e-15)
        assert AsymmetricModel(1.1, -0.1).gamma.real == 0
        assert m.gauge_field == pytest.approx(0.5 * np.log(0.85 / 0.15))

    def test_kappa1_positive(self):
        with pytest.raises(ValueError):
            AsymmetricModel(0.0, 0.5)

    @pytest.mark.parametrize(
        "k1,k2,expected",
        [
            (0.85, 0.15, AsymmetricRegime.PSEUDO_HERMITIAN_CONVECTIVE),
            (1.0, 0.0, AsymmetricRegime.RABI_BOUNDARY),
            (1.1, -0.1, AsymmetricRegime.ABSOLUTE),
        ],
    )
    def test_regime(self, k1, k2, expected):
        m = AsymmetricModel(k1, k2)
        assert regime(m) is expected
        # the sign of kappa2 decides, consistently with Delta1 vs Delta2
        assert (m.delta1 > m.delta2) == (expected is AsymmetricRegime.PSEUDO_HERMITIAN_CONVECTIVE)


class TestSqrt:
    def test_principal_on_right_half_plane(self):
        z = np.array([4.0, 1 + 1j, 2 - 0.5j, 1j])
        np.testing.assert_allclose(sqrt_down(z), np.sqrt(z), atol=1e-15)

    def test_cut_below(self):
        above, below = sqrt_down(-1 + 1e-12j), sqrt_down(-1 - 1e-12j)
        assert above == pytest.approx(below, abs=1e-9)  # no cut on the negative real axis
        left, right = sqrt_down(-1e-12 - 1j), sqrt_down(1e-12 - 1j)
        assert abs(left - right) > 1.0
        assert sqrt_down(-1j) == pytest.approx(right, abs=1e-9)

    def test_squares_back(self):
        rng = np.random.default_rng(0)
        z = rng.normal(size=50) + 1j * rng.normal(size=50)
        np.testing.assert_allclose(sqrt_down(z) ** 2, z, atol=1e-14)


class TestSelfEnergy:
    def test_examples(self):
        assert exact_self_energy(PRESET, 2.0) == pytest.approx(0.04 / np.sqrt(3.49), abs=1e-15)
        assert exact_self_energy(PRESET, 0.3j) == 0
        assert exact_self_energy(PRESET, 0.0, "continued") == pytest.approx(-0.04j / np.sqrt(0.51), abs=1e-15)

    def test_denominator_vanishes_at_pole(self):
        for wa in (0.0, 0.4, 0.8):
            m = PRESET.replace(omega_a=wa)
            w = pole_exact(m).pole
            root = np.sqrt(complex(m.gamma**2 - w**2))
            # i|sigma|^2 + (w - wa) sqrt(Gamma^2 - w^2) = 0 up to the branch of the root
            assert min(abs(1j * 0.04 + (w - wa) * root), abs(1j * 0.04 - (w - wa) * root)) < 1e-12

    def test_ellipse_location(self):
        assert ellipse_location(PRESET, 0.8) == "inside"
        assert ellipse_location(PRESET, 0.7j) == "on-loop"
        assert ellipse_location(PRESET, 1.2) == "outside"
        flat = AsymmetricModel(0.5, 0.5)
        assert ellipse_location(flat, 0.3) == "on-loop"
        assert ellipse_location(flat, 0.3 + 0.1j) == "outside"
        with pytest.raises(OnLoopError):
            exact_self_energy(PRESET, 0.7j)

    def test_unknown_sheet(self):
        with pytest.raises(ValueError):
            exact_self_energy(PRESET, 2.0, "third")


class TestPoles:
    def test_weak_complete(self):
        # |Gamma| = 0.714 is within 5|sigma| = 1 of omega_a = 0, so even the
        # textbook case carries the warning
        with pytest.warns(RuntimeWarning):
            w = pole_weak(PRESET)
        assert w == pytest.approx(-0.04j / np.sqrt(0.51), abs=1e-15)
        assert w == pytest.approx(pole_exact(PRESET).pole, abs=5e-4)

    def test_weak_fractional(self):
        m = PRESET.replace(omega_a=0.8)
        with pytest.warns(RuntimeWarning):
            w = pole_weak(m)
        assert w == pytest.approx(0.8 + 0.04 / np.sqrt(0.13), abs=1e-12)

    def test_weak_decoupled_limit(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            for s in (1e-2, 1e-4, 1e-6):
                assert abs(pole_weak(PRESET.replace(sigma=s, omega_a=0.3)) - 0.3) < s

    def test_exact_fractional(self):
        sol = pole_exact(PRESET.replace(omega_a=0.8))
        assert sol.pole == pytest.approx(0.878248, abs=1e-6)
        assert sol.location == "inside"
        assert not sol.ambiguous

    def test_exact_complete(self):
        sol = pole_exact(PRESET)
        assert sol.pole.imag == pytest.approx(-0.0558408, abs=1e-7)
        # weakly bound states just outside the branch points satisfy the
        # pole equation too; they are kept as candidates
        extra = [w for w in sol.candidates if w != sol.pole]
        assert extra
        assert all(abs(w.imag) < 1e-9 and abs(w.real) > np.sqrt(0.51) for w in extra)

    def test_exact_decoupled(self):
        sol = pole_exact(PRESET.replace(sigma=0))
        assert sol.pole == 0 and sol.residue == 1

    def test_hermitian_outside_band(self):
        m = AsymmetricModel(0.5, 0.5, 0.2, 2.0)
        assert pole_exact(m).pole.real == pytest.approx(2 + 0.04 / np.sqrt(3), abs=1e-3)


class TestRabi:
    UNI = AsymmetricModel(1.0, 0.0, 0.2, 0.0)

    def test_frequencies(self):
        assert rabi_frequencies(self.UNI) == pytest.approx((0.2, -0.2))
        wp, wm = rabi_frequencies(self.UNI.replace(omega_a=1.0))
        assert wp > wm

    def test_resonant(self):
        t = np.linspace(0, 50, 501)
        np.testing.assert_allclose(np.abs(rabi_solution(self.UNI, t)) ** 2, np.cos(0.2 * t) ** 2, atol=1e-14)
        assert rabi_solution(self.UNI, 0.0) == pytest.approx(1.0)

    def test_detuned_incomplete(self):
        t = np.linspace(0, 60, 6001)
        p = np.abs(rabi_solution(self.UNI.replace(omega_a=1.0), t)) ** 2
        assert p.min() > 0.5

    def test_two_level_unitary(self):
        t = np.linspace(0, 80, 801)
        for wa in (0.0, 0.7):
            ca, c0 = rabi_pair(self.UNI.replace(omega_a=wa), t)
            np.testing.assert_allclose(np.abs(ca) ** 2 + np.abs(c0) ** 2, 1.0, atol=1e-14)
            np.testing.assert_allclose(degenerate_solution(self.UNI.replace(omega_a=wa), t, 0), c0)

    def test_requires_unidirectional(self):
        with pytest.raises(RegimeError):
            rabi_solution(PRESET, 1.0)


class TestDegenerate:
    UNI = AsymmetricModel(1.0, 0.0, 0.2, 0.3)

    def test_behind_is_empty(self):
        t = np.linspace(0, 10, 11)
        assert np.all(degenerate_solution(self.UNI, t, -3) == 0)

    def test_first_site_closed_form(self):
        t = np.linspace(0, 100, 20001)
        c1 = degenerate_solution(self.UNI, t, 1)
        exact = np.array([oracles.rabi_c1_exact(1.0, 0.2, 0.3, s) for s in t])
        assert np.max(np.abs(c1 - exact)) < 1e-10

    def test_needs_grid(self):
        with pytest.raises(ValueError):
            degenerate_solution(self.UNI, np.array([1.0, 2.0, 3.0]), 2)


class TestGauge:
    def test_identity_and_origin(self):
        c = np.array([1 + 1j, 2.0, -0.5j])
        sites = np.array([-1, 0, 1])
        np.testing.assert_array_equal(gauge_transform(c, sites, 0.0), c)
        assert gauge_transform(c, sites, 3.7)[1] == c[1]

    @settings(max_examples=40, deadline=None)
    @given(st.floats(-5, 5), st.integers(1, 60))
    def test_round_trip(self, h, n):
        rng = np.random.default_rng(n)
        sites = np.arange(-n, n + 1)
        c = rng.normal(size=sites.size) + 1j * rng.normal(size=sites.size)
        back = gauge_transform(gauge_transform(c, sites, h), sites, -h)
        np.testing.assert_allclose(back, c, rtol=1e-13)

    def test_overflow(self):
        with pytest.raises(OverflowError):
            gauge_transform(np.ones(3), np.array([-400, 0, 400]), 2.0)

    def test_hermitize(self):
        h = hermitize(AsymmetricModel(0.85, 0.15, 0.2, 0.4))
        assert h.kappa1 == h.kappa2 == pytest.approx(np.sqrt(4 * 0.1275) / 2)
        assert h.kappa1 == pytest.approx(0.3571, abs=1e-4)
        assert (h.sigma, h.omega_a) == (0.2, 0.4)
        same = AsymmetricModel(0.5, 0.5)
        assert hermitize(same) is same

    @pytest.mark.parametrize("k2", [-0.1, 0.0])
    def test_hermitize_refuses(self, k2):
        with pytest.raises(RegimeError, match="cannot be applied"):
            hermitize(AsymmetricModel(1.1, k2))

    def test_gauge_maps_hamiltonians(self):
        # conjugating the asymmetric hopping matrix by exp(-h n) symmetrises it
        m = AsymmetricModel(0.85, 0.15)
        n = np.arange(-6, 7)
        H = oracles.dense_hamiltonian(m.dispersion().coeffs, {}, 0.0, 6)[1:, 1:]
        S = np.diag(np.exp(-m.gauge_field * n))
        Hb = S @ H @ np.linalg.inv(S)
        np.testing.assert_allclose(Hb, Hb.T, atol=1e-14)
        assert Hb[0, 1] == pytest.approx(np.sqrt(0.85 * 0.15))
