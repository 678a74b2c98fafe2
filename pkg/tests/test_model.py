import math

import numpy as np
import pytest

from fpqmc.model import (
    ModelParams,
    OccupancyOverflowError,
    continuum_threshold_state,
    diagonal_energy,
    mode_grid,
    offdiagonals,
    parity_reflect,
    single_phonon_state,
    state_from_text,
    state_to_text,
    vacuum_state,
)


def random_state(rng, num_modes, max_total=6):
    occ = bytearray(num_modes)
    for _ in range(rng.integers(0, max_total + 1)):
        occ[rng.integers(0, num_modes)] += 1
    return bytes(occ)


class TestModelParams:
    def test_paper_scale_grid(self):
        params = ModelParams.from_cutoff(2.0, 6.0, 12.0 * math.pi)
        assert params.num_modes == 73
        grid = mode_grid(params)
        assert len(grid) == 73
        assert grid[0] == pytest.approx(-12.0 * math.pi)
        assert grid[-1] == pytest.approx(12.0 * math.pi)
        np.testing.assert_allclose(np.diff(grid), math.pi / 3.0, rtol=1e-12)

    def test_cutoff_round_trip(self):
        params = ModelParams.from_cutoff(1.0, 6.0, 4.0 * math.pi)
        assert params.num_modes == 25
        assert params.cutoff == pytest.approx(4.0 * math.pi, rel=1e-14)
        # M = k_c L / pi + 1 exactly
        assert params.cutoff * params.box_length / math.pi + 1 == pytest.approx(25.0)

    def test_single_mode_grid(self):
        params = ModelParams(0.5, 3.7, 1)
        np.testing.assert_array_equal(mode_grid(params), [0.0])

    def test_coupling_amplitude(self):
        assert ModelParams(2.0, 6.0, 5).coupling == pytest.approx(math.sqrt(2.0 / 3.0))

    @pytest.mark.parametrize("num_modes", [0, -3, 2, 72])
    def test_rejects_bad_mode_count(self, num_modes):
        with pytest.raises(ValueError):
            ModelParams(1.0, 6.0, num_modes)

    def test_rejects_negative_alpha(self):
        with pytest.raises(ValueError):
            ModelParams(-0.1, 6.0, 5)

    def test_rejects_nonpositive_box(self):
        with pytest.raises(ValueError):
            ModelParams(1.0, 0.0, 5)

    def test_rejects_incommensurate_cutoff(self):
        with pytest.raises(ValueError):
            ModelParams.from_cutoff(1.0, 6.0, 4.1 * math.pi)


class TestDiagonalEnergy:
    def test_vacuum(self):
        params = ModelParams(2.0, 6.0, 5)
        assert diagonal_energy(vacuum_state(5), params) == 0.0

    def test_single_phonon(self):
        params = ModelParams(1.0, 6.0, 5)
        energy = diagonal_energy(single_phonon_state(5, 1), params)
        assert energy == pytest.approx(1.0 + (math.pi / 3.0) ** 2, abs=1e-12)
        assert energy == pytest.approx(2.09662, abs=1e-5)

    def test_opposite_pair_carries_no_momentum(self):
        params = ModelParams(1.0, 6.0, 5)
        occ = bytearray(5)
        occ[1] += 1  # j = -1
        occ[3] += 1  # j = +1
        assert diagonal_energy(bytes(occ), params) == pytest.approx(2.0, abs=1e-12)

    def test_nonzero_total_momentum(self):
        params = ModelParams(1.0, 6.0, 5, total_momentum=0.7)
        state = single_phonon_state(5, 1)
        expected = 1.0 + (0.7 - math.pi / 3.0) ** 2
        assert diagonal_energy(state, params) == pytest.approx(expected, abs=1e-12)

    def test_reflection_symmetry_at_zero_momentum(self):
        params = ModelParams(1.3, 5.0, 7)
        rng = np.random.default_rng(3)
        for _ in range(25):
            s = random_state(rng, 7)
            assert diagonal_energy(parity_reflect(s), params) == pytest.approx(
                diagonal_energy(s, params), abs=1e-12)

    def test_mode_count_mismatch(self):
        with pytest.raises(ValueError):
            diagonal_energy(vacuum_state(5), ModelParams(1.0, 6.0, 7))


class TestOffdiagonals:
    def test_vacuum_connections(self):
        params = ModelParams(2.0, 6.0, 25)
        conns = offdiagonals(vacuum_state(25), params)
        assert len(conns) == 25
        for target, amp in conns:
            assert sum(target) == 1
            assert amp == pytest.approx(-math.sqrt(2.0 / 3.0), abs=1e-12)

    def test_free_hamiltonian_has_zero_amplitudes(self):
        params = ModelParams(0.0, 6.0, 5)
        conns = offdiagonals(single_phonon_state(5), params)
        assert len(conns) == 5 + 1
        assert all(amp == 0.0 for _, amp in conns)

    def test_ladder_matrix_elements(self):
        params = ModelParams(1.0, 2.0, 1)
        g = params.coupling
        conns = offdiagonals(bytes([2]), params)
        assert len(conns) == 2
        assert conns[0] == (bytes([3]), pytest.approx(-g * math.sqrt(3.0)))
        assert conns[1] == (bytes([1]), pytest.approx(-g * math.sqrt(2.0)))

    def test_connectivity_count(self):
        params = ModelParams(0.7, 4.0, 9)
        rng = np.random.default_rng(11)
        for _ in range(30):
            s = random_state(rng, 9)
            occupied = sum(1 for n in s if n > 0)
            assert len(offdiagonals(s, params)) == 9 + occupied

    def test_stoquastic(self):
        params = ModelParams(1.9, 4.0, 9)
        rng = np.random.default_rng(12)
        for _ in range(30):
            for _, amp in offdiagonals(random_state(rng, 9), params):
                assert amp <= 0.0

    def test_hermiticity(self):
        params = ModelParams(1.1, 5.0, 7)
        rng = np.random.default_rng(13)
        for _ in range(20):
            source = random_state(rng, 7)
            for target, amp in offdiagonals(source, params):
                back = {t: a for t, a in offdiagonals(target, params)}
                assert source in back
                assert back[source] == pytest.approx(amp, abs=1e-14)

    def test_reflection_maps_connections(self):
        params = ModelParams(1.1, 5.0, 7)
        rng = np.random.default_rng(14)
        for _ in range(20):
            s = random_state(rng, 7)
            direct = {(t, round(a, 12)) for t, a in offdiagonals(s, params)}
            mirrored = {(parity_reflect(t), round(a, 12))
                        for t, a in offdiagonals(parity_reflect(s), params)}
            assert direct == mirrored

    def test_occupancy_overflow(self):
        params = ModelParams(1.0, 2.0, 1)
        with pytest.raises(OccupancyOverflowError):
            offdiagonals(bytes([255]), params)


class TestParityReflect:
    def test_vacuum_fixed_point(self):
        assert parity_reflect(vacuum_state(5)) == vacuum_state(5)

    def test_single_phonon_mirrored(self):
        assert parity_reflect(single_phonon_state(5, 1)) == single_phonon_state(5, -1)

    def test_involution(self):
        rng = np.random.default_rng(21)
        for _ in range(30):
            s = random_state(rng, 9)
            assert parity_reflect(parity_reflect(s)) == s


class TestTextForm:
    def test_render(self):
        assert state_to_text(single_phonon_state(5)) == "0,0,1,0,0"

    def test_round_trip(self):
        rng = np.random.default_rng(22)
        for _ in range(20):
            s = random_state(rng, 7)
            assert state_from_text(state_to_text(s)) == s

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            state_from_text("0,256,0")


class TestContinuumThresholdState:
    def test_free_limit_is_single_phonon(self):
        params = ModelParams(0.0, 6.0, 5)
        out = continuum_threshold_state({vacuum_state(5): 1.0}, params)
        assert out == {single_phonon_state(5): 1.0}

    def test_mixes_raised_and_scaled_terms(self):
        params = ModelParams(2.0, 6.0, 3)
        g = params.coupling
        out = continuum_threshold_state({vacuum_state(3): 2.0}, params)
        assert out[single_phonon_state(3)] == pytest.approx(2.0)
        assert out[vacuum_state(3)] == pytest.approx(-2.0 * g)

    def test_raising_uses_ladder_factor(self):
        params = ModelParams(2.0, 6.0, 3)
        one = single_phonon_state(3)
        out = continuum_threshold_state({one: 1.0}, params)
        two = bytes([0, 2, 0])
        assert out[two] == pytest.approx(math.sqrt(2.0))

    def test_overflow(self):
        params = ModelParams(1.0, 2.0, 1)
        with pytest.raises(OccupancyOverflowError):
            continuum_threshold_state({bytes([255]): 1.0}, params)
