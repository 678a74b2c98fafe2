import math

import numpy as np
import pytest
import scipy.special
from scipy.integrate import quad

from fpqmc import strong_coupling as sc


class TestDigamma:
    def test_special_value_at_one(self):
        assert sc.digamma(1.0) == pytest.approx(-sc.EULER_GAMMA, abs=1e-14)

    def test_recurrence_step(self):
        assert sc.digamma(2.0) == pytest.approx(1.0 - sc.EULER_GAMMA, abs=1e-13)

    def test_reference_value_at_ten(self):
        # frozen from an independent high-precision evaluation
        assert sc.digamma(10.0) == pytest.approx(2.2517525890667211, abs=1e-10)

    def test_against_scipy_grid(self):
        xs = np.concatenate([np.linspace(0.01, 3.0, 57), np.linspace(3.0, 60.0, 41)])
        for x in xs:
            assert sc.digamma(float(x)) == pytest.approx(
                float(scipy.special.digamma(x)), abs=1e-12)

    def test_recurrence_property(self):
        rng = np.random.default_rng(7)
        for x in rng.uniform(0.05, 20.0, size=50):
            assert sc.digamma(x + 1.0) == pytest.approx(
                sc.digamma(float(x)) + 1.0 / x, abs=1e-11)

    @pytest.mark.parametrize("x", [0.0, -1.0, -0.5])
    def test_domain_error(self, x):
        with pytest.raises(ValueError):
            sc.digamma(x)


class TestOddModeRoots:
    def test_first_root(self):
        assert sc.odd_mode_root(1) == pytest.approx(2.523, abs=1e-3)

    def test_third_mode_interval_and_residual(self):
        n = sc.odd_mode_root(3)
        assert 4.0 < n < 5.0
        assert abs(sc._odd_mode_equation(n)) < 1e-9

    def test_residuals_and_intervals_up_to_201(self):
        for j in range(1, 202, 2):
            n = sc.odd_mode_root(j)
            assert j + 1 < n < j + 2
            assert abs(sc._odd_mode_equation(n)) < 1e-9

    def test_large_j_approaches_even_branch(self):
        # root drifts toward the upper interval edge, matching n ~ j + 2
        gaps = [j + 2 - sc.odd_mode_root(j) for j in (51, 101, 201)]
        assert gaps[0] > gaps[1] > gaps[2] > 0

    @pytest.mark.parametrize("j", [0, 2, -1])
    def test_rejects_even_index(self, j):
        with pytest.raises(ValueError):
            sc.odd_mode_root(j)


class TestHessianSpectrum:
    def test_zero_mode(self):
        mode = sc.hessian_frequency(0)
        assert mode.frequency == 0.0
        assert mode.parity == "even"
        assert mode.legendre_order == 2.0

    def test_omega_one(self):
        assert sc.hessian_frequency(1).frequency == pytest.approx(0.647, abs=1e-3)

    def test_omega_two_closed_form(self):
        assert sc.hessian_frequency(2).frequency == pytest.approx(
            math.sqrt(7.0 / 9.0), abs=1e-12)

    def test_omega_four_closed_form(self):
        assert sc.hessian_frequency(4).frequency == pytest.approx(
            math.sqrt(0.9), abs=1e-12)

    def test_even_branch_exactness(self):
        for j in range(0, 40, 2):
            expected = math.sqrt(1.0 - 4.0 / ((j + 4) * (j + 1)))
            assert sc.hessian_frequency(j).frequency == pytest.approx(expected, abs=1e-14)

    def test_interlacing(self):
        freqs = [m.frequency for m in sc.hessian_spectrum(60)]
        assert all(b > a for a, b in zip(freqs, freqs[1:]))
        assert all(f < 1.0 for f in freqs)

    def test_parity_alternates(self):
        modes = sc.hessian_spectrum(10)
        assert [m.parity for m in modes] == ["even", "odd"] * 5

    def test_tail_law(self):
        # j^2 (1 - omega_j) approaches the analytic constant 2
        vals = {j: j * j * (1.0 - sc.hessian_frequency(j).frequency)
                for j in (50, 100, 200)}
        assert abs(vals[200] - 2.0) < 0.1
        assert abs(vals[200] - 2.0) < abs(vals[50] - 2.0)

    def test_single_excitations_only_below_continuum(self):
        assert all(sc.hessian_frequency(j).frequency > 0.5 for j in range(1, 51))


class TestZeroPointSum:
    def test_zero_mode_only(self):
        assert sc.zero_point_sum(0, tail=False) == pytest.approx(-0.5, abs=1e-15)

    def test_converged_value(self):
        assert sc.zero_point_sum(200, tail=True) == pytest.approx(-0.955, abs=0.005)

    def test_partial_sums_monotone_decreasing(self):
        partials = [sc.zero_point_sum(J, tail=False) for J in range(0, 60, 5)]
        assert all(b < a for a, b in zip(partials, partials[1:]))

    def test_tail_correction_stabilizes(self):
        assert abs(sc.zero_point_sum(400, tail=True)
                   - sc.zero_point_sum(200, tail=True)) < 5e-4


class TestEnergyExpansions:
    def test_weak_at_zero(self):
        assert sc.energy_weak(0.0) == 0.0

    def test_weak_polynomial_values(self):
        assert sc.energy_weak(1.0) == pytest.approx(-1.06910, abs=1e-10)
        assert sc.energy_weak(0.25) == pytest.approx(-0.253923125, abs=1e-12)

    def test_weak_rejects_negative(self):
        with pytest.raises(ValueError):
            sc.energy_weak(-1.0)

    def test_strong_ground_at_alpha_ten(self):
        assert sc.energy_strong(10.0, 0) == pytest.approx(-100.0 / 3.0 - 0.955, abs=0.005)

    def test_strong_excitation_is_alpha_independent(self):
        omega1 = sc.hessian_frequency(1).frequency
        for alpha in (2.0, 5.0, 20.0):
            gap = sc.energy_strong(alpha, 1) - sc.energy_strong(alpha, 0)
            assert gap == pytest.approx(omega1, abs=1e-12)

    def test_expansions_overlap_at_intermediate_coupling(self):
        assert abs(sc.energy_weak(2.0) - sc.energy_strong(2.0, 0)) < 0.15


class TestPekarSolution:
    def test_profile_normalization(self):
        for alpha in (0.5, 2.0, 7.0):
            sol = sc.PekarSolution(alpha)
            norm, _ = quad(lambda x: sol.electron_profile(x) ** 2, -np.inf, np.inf)
            assert norm == pytest.approx(1.0, abs=1e-8)

    def test_classical_energy(self):
        assert sc.PekarSolution(3.0).classical_energy == pytest.approx(-3.0, abs=1e-15)

    def test_field_tracks_density(self):
        sol = sc.PekarSolution(1.5)
        x = np.linspace(-3, 3, 11)
        np.testing.assert_allclose(
            sol.field_profile(x),
            np.sqrt(2 * 1.5) * sol.electron_profile(x) ** 2, rtol=1e-14)

    def test_rejects_nonpositive_alpha(self):
        with pytest.raises(ValueError):
            sc.PekarSolution(0.0)
