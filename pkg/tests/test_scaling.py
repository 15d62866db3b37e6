import numpy as np
import pytest
from scipy.special import gamma as gamma_fn

from risnet import (
    FULLY_GAIN_LIMIT,
    draw_los_vector,
    draw_rayleigh_vector,
    element_reduction,
    expected_power_rayleigh,
    fully_connected_bound,
    group_connected_bound,
    group_gain_limit,
    power_gain,
    scattering_from_phases,
    single_connected_optimum,
    trial_rng,
)


def divisors(n):
    return [d for d in range(1, n + 1) if n % d == 0]


class TestSingleConnectedOptimum:
    def test_hand_example(self):
        phases, power = single_connected_optimum([1, 1j], [1, 1])
        assert power == pytest.approx(4.0)
        assert phases[0] == pytest.approx(0.0)
        assert phases[1] == pytest.approx(3 * np.pi / 2)

    def test_all_ones(self):
        for n in (2, 4, 8):
            _, power = single_connected_optimum(np.ones(n), np.ones(n))
            assert power == pytest.approx(n**2)

    def test_zero_channel(self):
        phases, power = single_connected_optimum(np.ones(3), np.zeros(3))
        assert power == 0.0
        assert np.all(phases == 0.0)  # arg(0) = 0 convention

    def test_phases_reproduce_power(self):
        rng = trial_rng(0)
        for _ in range(100):
            n = int(rng.integers(1, 9))
            h_ri = draw_rayleigh_vector(n, rng)
            h_it = draw_rayleigh_vector(n, rng)
            phases, power = single_connected_optimum(h_ri, h_it)
            achieved = abs(h_ri @ scattering_from_phases(phases) @ h_it) ** 2
            assert achieved == pytest.approx(power, rel=1e-10)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            single_connected_optimum(np.ones(2), np.ones(3))


class TestBounds:
    def test_fully_hand_example(self):
        assert fully_connected_bound([1, 2], [1, 1]) == pytest.approx(10.0)

    def test_fully_unit_modulus_is_squared_count(self):
        rng = trial_rng(1)
        for n in (2, 4, 8, 16):
            assert fully_connected_bound(
                draw_los_vector(n, rng), draw_los_vector(n, rng)) == pytest.approx(n**2)

    def test_fully_equality_iff_proportional_magnitudes(self):
        rng = trial_rng(2)
        mags = rng.uniform(0.2, 2.0, 6)
        h_ri = mags * np.exp(1j * rng.uniform(0, 2 * np.pi, 6))
        h_it = 3.0 * mags * np.exp(1j * rng.uniform(0, 2 * np.pi, 6))
        _, single = single_connected_optimum(h_ri, h_it)
        assert single == pytest.approx(fully_connected_bound(h_ri, h_it), rel=1e-12)

    def test_group_with_one_group_is_fully(self):
        rng = trial_rng(3)
        h_ri, h_it = draw_rayleigh_vector(6, rng), draw_rayleigh_vector(6, rng)
        assert group_connected_bound(h_ri, h_it, 6) == pytest.approx(
            fully_connected_bound(h_ri, h_it), rel=1e-12)

    def test_group_with_unit_groups_is_single(self):
        rng = trial_rng(4)
        h_ri, h_it = draw_rayleigh_vector(6, rng), draw_rayleigh_vector(6, rng)
        _, single = single_connected_optimum(h_ri, h_it)
        assert group_connected_bound(h_ri, h_it, 1) == pytest.approx(single, rel=1e-12)

    def test_sandwich_inequality(self):
        rng = trial_rng(5)
        for _ in range(10**4):
            n = int(rng.choice([2, 4, 8, 16]))
            h_ri = draw_rayleigh_vector(n, rng)
            h_it = draw_rayleigh_vector(n, rng)
            _, single = single_connected_optimum(h_ri, h_it)
            fully = fully_connected_bound(h_ri, h_it)
            previous = single
            for n_g in divisors(n):
                g = group_connected_bound(h_ri, h_it, n_g)
                assert g >= previous * (1 - 1e-12)
                assert g <= fully * (1 + 1e-12)
                previous = g

    def test_nondividing_group_rejected(self):
        with pytest.raises(ValueError, match="divide"):
            group_connected_bound(np.ones(6), np.ones(6), 4)


class TestExpectedPower:
    def test_fully_is_squared_count(self):
        assert expected_power_rayleigh(16, 16) == pytest.approx(256.0)

    def test_single_small(self):
        assert expected_power_rayleigh(2, 1) == pytest.approx(2 + 2 * np.pi**2 / 16)

    def test_group_gamma_ratio(self):
        expected = 8 + 2 * (gamma_fn(2.5) / gamma_fn(2.0)) ** 4
        assert expected_power_rayleigh(4, 2) == pytest.approx(expected, rel=1e-12)

    def test_single_closed_form(self):
        for n in (4, 16, 64):
            expected = n + n * (n - 1) * np.pi**2 / 16
            assert expected_power_rayleigh(n, 1) == pytest.approx(expected, rel=1e-12)

    def test_monotone_in_group_size(self):
        for n in (2, 4, 8, 16, 32, 64):
            values = [expected_power_rayleigh(n, d) for d in divisors(n)]
            assert np.all(np.diff(values) >= -1e-9)

    def test_matches_monte_carlo_of_bound(self):
        trials = 10**5
        rng = trial_rng(6)
        for n, n_g in ((4, 2), (8, 2), (8, 4)):
            h_ri = draw_rayleigh_vector(trials * n, rng).reshape(trials, -1, n_g)
            h_it = draw_rayleigh_vector(trials * n, rng).reshape(trials, -1, n_g)
            per_group = np.linalg.norm(h_ri, axis=2) * np.linalg.norm(h_it, axis=2)
            bounds = per_group.sum(axis=1) ** 2
            se = bounds.std(ddof=1) / np.sqrt(trials)
            assert abs(bounds.mean() - expected_power_rayleigh(n, n_g)) <= 3 * se

    def test_asymptotic_single_ratio(self):
        n = 10**6
        assert expected_power_rayleigh(n, 1) / n**2 == pytest.approx(np.pi**2 / 16, rel=1e-5)

    def test_large_group_sizes_do_not_overflow(self):
        value = expected_power_rayleigh(10**4, 10**4 // 2)
        assert np.isfinite(value)
        assert np.isfinite(group_gain_limit(10**4))


class TestPowerGain:
    def test_fully_limit_value(self):
        assert FULLY_GAIN_LIMIT == pytest.approx(1.6211, abs=5e-4)

    def test_fully_gain_at_large_count(self):
        assert power_gain(4096, 2).gain_fully == pytest.approx(1.62, abs=0.01)

    def test_group_gains_at_large_count(self):
        targets = {2: 1.26, 3: 1.37, 4: 1.43, 6: 1.49, 8: 1.52}
        for n_g, target in targets.items():
            assert power_gain(4096, n_g).gain_group == pytest.approx(target, abs=0.01)

    def test_gain_expression_matches_expectation_ratio(self):
        for n_i, n_g in ((8, 2), (16, 4), (64, 8), (96, 6)):
            report = power_gain(n_i, n_g)
            single = expected_power_rayleigh(n_i, 1)
            assert report.gain_group == pytest.approx(
                expected_power_rayleigh(n_i, n_g) / single, rel=1e-12)
            assert report.gain_fully == pytest.approx(
                expected_power_rayleigh(n_i, n_i) / single, rel=1e-12)

    def test_limits_match_finite_trend(self):
        for n_g in (2, 4, 8):
            finite = power_gain(2**16, n_g).gain_group
            assert finite == pytest.approx(group_gain_limit(n_g), rel=1e-3)

    def test_unit_element_gain_is_one(self):
        report = power_gain(1, 1)
        assert report.gain_group == pytest.approx(1.0)
        assert report.gain_fully == pytest.approx(1.0)


class TestElementReduction:
    def test_fully_limit(self):
        assert element_reduction(FULLY_GAIN_LIMIT) == pytest.approx(1 - np.pi / 4, rel=1e-12)
        assert element_reduction(FULLY_GAIN_LIMIT) == pytest.approx(0.21, abs=0.01)

    def test_group_limits(self):
        targets = {2: 0.11, 3: 0.14, 4: 0.16, 6: 0.18, 8: 0.19}
        for n_g, target in targets.items():
            assert element_reduction(group_gain_limit(n_g)) == pytest.approx(target, abs=0.01)

    def test_unit_gain(self):
        assert element_reduction(1.0) == 0.0

    def test_gain_below_one_rejected(self):
        with pytest.raises(ValueError):
            element_reduction(0.5)

    def test_range(self):
        for g in np.linspace(1.0, 50.0, 50):
            assert 0.0 <= element_reduction(g) < 1.0


class TestLosEquality:
    def test_all_architectures_equal_on_los(self):
        rng = trial_rng(7)
        for n in (2, 4, 8, 16):
            h_ri = draw_los_vector(n, rng)
            h_it = draw_los_vector(n, rng)
            _, single = single_connected_optimum(h_ri, h_it)
            fully = fully_connected_bound(h_ri, h_it)
            assert single == pytest.approx(n**2, rel=1e-9)
            assert fully == pytest.approx(n**2, rel=1e-9)
            for n_g in divisors(n):
                assert group_connected_bound(h_ri, h_it, n_g) == pytest.approx(n**2, rel=1e-9)
