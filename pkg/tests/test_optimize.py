import numpy as np
import pytest

from risnet import (
    ChannelRealization,
    Objective,
    ReactanceParams,
    SolverConfig,
    Topology,
    align_direct_phase,
    draw_los_vector,
    draw_rayleigh_vector,
    fully_connected_bound,
    group_connected_bound,
    objective_gradient,
    scattering_from_reactance,
    single_connected_optimum,
    solve,
    solve_group,
    solve_single,
    trial_rng,
    validate_scattering,
)
from risnet.optimize import REACTANCE_CAP, _finite_difference_gradient


def rayleigh_objective(n, n_g, seed, h_rt=0.0, include_direct=False):
    rng = trial_rng(seed)
    real = ChannelRealization(h_rt, draw_rayleigh_vector(n, rng), draw_rayleigh_vector(n, rng))
    return Objective(real, Topology(n, n_g), include_direct=include_direct)


class TestGradient:
    def test_matches_finite_differences(self):
        # oracle: central differences straight through the reflection map
        rng = trial_rng(0)
        for t in range(100):
            n, n_g = [(2, 2), (4, 2), (4, 4), (6, 3)][t % 4]
            h_ri = draw_rayleigh_vector(n, rng)
            h_it = draw_rayleigh_vector(n, rng)
            topology = Topology(n, n_g)
            params = ReactanceParams.from_vector(
                topology, rng.uniform(-150, 150, n * (n_g + 1) // 2))
            obj = Objective(ChannelRealization(0.0, h_it, h_ri), topology)
            grad = objective_gradient(obj, params)

            def cascade_power(x):
                theta = scattering_from_reactance(
                    ReactanceParams.from_vector(topology, x))
                return abs(h_ri @ theta @ h_it) ** 2

            fd = _finite_difference_gradient(cascade_power, params.as_vector(), step=1e-4)
            scale = max(np.max(np.abs(fd)), 1e-12)
            assert np.max(np.abs(grad - fd)) / scale <= 1e-5

    def test_scales_linearly_with_objective(self):
        obj = rayleigh_objective(4, 2, seed=1)
        params = ReactanceParams.from_vector(Topology(4, 2), trial_rng(2).uniform(-100, 100, 6))
        base = objective_gradient(obj, params)
        scaled_real = ChannelRealization(
            0.0, obj.realization.h_it, 2.0 * obj.realization.h_ri)
        scaled = objective_gradient(Objective(scaled_real, obj.topology), params)
        assert np.allclose(scaled, 4.0 * base, rtol=1e-10)

    def test_vanishes_at_converged_optimum(self):
        # the tolerance is stated for the scale-normalized objective
        cfg = SolverConfig(restarts=1, seed=0)
        obj = rayleigh_objective(4, 4, seed=3)
        res = solve_group(obj, cfg)
        assert res.converged
        grad = objective_gradient(obj, res.reactance)
        scale2 = (np.linalg.norm(obj.realization.h_ri)
                  * np.linalg.norm(obj.realization.h_it)) ** 2
        assert np.max(np.abs(grad)) / scale2 <= cfg.gradient_tolerance


class TestSolveSingle:
    def test_hand_example(self):
        real = ChannelRealization(0.0, np.array([1, 1]), np.array([1, 1j]))
        res = solve_single(Objective(real, Topology.single(2)))
        assert res.power == pytest.approx(4.0)
        assert res.gap == 0.0
        assert res.converged and res.iterations == 0
        assert res.reactance is None

    def test_los_power(self):
        rng = trial_rng(4)
        real = ChannelRealization(0.0, draw_los_vector(8, rng), draw_los_vector(8, rng))
        res = solve_single(Objective(real, Topology.single(8)))
        assert res.power == pytest.approx(64.0, rel=1e-9)

    def test_deterministic(self):
        obj = rayleigh_objective(6, 1, seed=5)
        a = solve_single(obj)
        b = solve_single(obj)
        assert a.power == b.power
        assert np.array_equal(a.theta, b.theta)

    def test_dispatcher_routes_single(self):
        obj = rayleigh_objective(6, 1, seed=6)
        assert solve(obj).power == solve_single(obj).power

    def test_matches_closed_form(self):
        obj = rayleigh_objective(5, 1, seed=7)
        _, expected = single_connected_optimum(obj.realization.h_ri, obj.realization.h_it)
        assert solve_single(obj).power == pytest.approx(expected, rel=1e-12)


class TestSolveGroup:
    def test_scalar_port_attains_bound(self):
        obj = rayleigh_objective(1, 1, seed=8)
        res = solve_group(obj, SolverConfig(restarts=1, seed=0))
        expected = abs(obj.realization.h_ri[0]) ** 2 * abs(obj.realization.h_it[0]) ** 2
        assert res.power == pytest.approx(expected, rel=1e-8)
        assert res.gap <= 1e-8

    def test_two_element_fully_vs_grid_oracle(self):
        # coarse exhaustive search over the three reactance degrees of
        # freedom, each swept through the full reflection phase range
        obj = rayleigh_objective(2, 2, seed=9)
        h_ri, h_it = obj.realization.h_ri, obj.realization.h_it
        res = solve_group(obj, SolverConfig(restarts=2, seed=0))
        assert res.gap <= 1e-4

        t = np.arange(-np.pi / 2 + 5e-3, np.pi / 2, 1e-2)
        x_grid = 50.0 * np.tan(t)
        best = 0.0
        z0 = 50.0
        for x01 in x_grid:
            a, b = np.meshgrid(x_grid, x_grid, indexing="ij")
            # closed-form 2x2 map: theta = I - 2 z0 (j X + z0 I)^-1
            m00 = 1j * a + z0
            m11 = 1j * b + z0
            m01 = 1j * x01
            det = m00 * m11 - m01 * m01
            t00 = 1.0 - 2 * z0 * m11 / det
            t11 = 1.0 - 2 * z0 * m00 / det
            t01 = 2 * z0 * m01 / det
            c = (h_ri[0] * (t00 * h_it[0] + t01 * h_it[1])
                 + h_ri[1] * (t01 * h_it[0] + t11 * h_it[1]))
            best = max(best, float(np.max(np.abs(c) ** 2)))
        assert res.power >= best - 1e-6
        assert best == pytest.approx(res.bound, rel=5e-3)

    def test_group_between_single_and_fully(self):
        obj = rayleigh_objective(4, 2, seed=10)
        res = solve_group(obj, SolverConfig(restarts=1, seed=0))
        _, single = single_connected_optimum(obj.realization.h_ri, obj.realization.h_it)
        fully = fully_connected_bound(obj.realization.h_ri, obj.realization.h_it)
        assert single - 1e-9 <= res.power <= fully + 1e-9
        assert res.bound == pytest.approx(
            group_connected_bound(obj.realization.h_ri, obj.realization.h_it, 2))

    def test_architecture_dominance_per_instance(self):
        rng = trial_rng(11)
        for _ in range(10):
            h_ri = draw_rayleigh_vector(4, rng)
            h_it = draw_rayleigh_vector(4, rng)
            real = ChannelRealization(0.0, h_it, h_ri)
            powers = [solve(Objective(real, Topology(4, n_g)),
                            SolverConfig(restarts=1, seed=0)).power
                      for n_g in (1, 2, 4)]
            assert powers[0] <= powers[1] + 1e-6
            assert powers[1] <= powers[2] + 1e-6

    def test_los_collapse_across_architectures(self):
        rng = trial_rng(12)
        h_ri = draw_los_vector(4, rng)
        h_it = draw_los_vector(4, rng)
        real = ChannelRealization(0.0, h_it, h_ri)
        for n_g in (1, 2, 4):
            res = solve(Objective(real, Topology(4, n_g)), SolverConfig(restarts=1, seed=0))
            assert res.power == pytest.approx(16.0, rel=1e-6)

    def test_feasibility_of_returned_scattering(self):
        for seed, (n, n_g) in enumerate(((4, 2), (6, 3), (6, 6), (8, 2))):
            res = solve_group(rayleigh_objective(n, n_g, seed=20 + seed),
                              SolverConfig(restarts=1, seed=0))
            assert validate_scattering(res.theta, Topology(n, n_g)).passes

    def test_monotone_history(self):
        res = solve_group(rayleigh_objective(6, 3, seed=13), SolverConfig(restarts=1, seed=0))
        history = np.asarray(res.history)
        assert np.all(np.diff(history) >= -1e-12)

    def test_never_below_single_connected(self):
        for seed in range(10):
            obj = rayleigh_objective(8, 2, seed=30 + seed)
            _, single = single_connected_optimum(obj.realization.h_ri, obj.realization.h_it)
            res = solve_group(obj, SolverConfig(restarts=0, seed=0))
            assert res.power >= single * (1 - 1e-9)

    def test_nonconvergence_returns_best_so_far(self):
        obj = rayleigh_objective(8, 8, seed=14)
        res = solve_group(obj, SolverConfig(max_iterations=1, restarts=0, seed=0))
        assert not res.converged
        assert res.power <= res.bound * (1 + 1e-9)
        assert res.power > 0

    def test_power_never_exceeds_bound(self):
        for seed in range(20):
            res = solve_group(rayleigh_objective(4, 4, seed=40 + seed),
                              SolverConfig(restarts=0, seed=0))
            assert res.power <= res.bound * (1 + 1e-9)
            assert res.gap >= -1e-9

    def test_bound_tightness_fully_connected(self):
        # mean relative gap over 100 draws stays below 0.1%
        gaps = []
        for t in range(100):
            rng = trial_rng(15, t)
            n = int(rng.choice([2, 4, 8, 16]))
            real = ChannelRealization(
                0.0, draw_rayleigh_vector(n, rng), draw_rayleigh_vector(n, rng))
            res = solve_group(Objective(real, Topology.fully(n)),
                              SolverConfig(restarts=1, seed=0))
            gaps.append(res.gap)
        assert np.mean(gaps) <= 1e-3

    def test_include_direct_reports_aligned_power(self):
        obj = rayleigh_objective(4, 4, seed=16, h_rt=0.3 + 0.4j, include_direct=True)
        res = solve_group(obj, SolverConfig(restarts=1, seed=0))
        cascade_only = solve_group(
            Objective(obj.realization, obj.topology), SolverConfig(restarts=1, seed=0))
        expected = (abs(obj.realization.h_rt) + np.sqrt(cascade_only.power)) ** 2
        assert res.power == pytest.approx(expected, rel=1e-9)
        assert res.power <= res.bound * (1 + 1e-9)

    def test_result_serialization(self):
        res = solve_group(rayleigh_objective(4, 2, seed=17), SolverConfig(restarts=0, seed=3))
        data = res.to_json()
        assert set(data) == {"power", "gap", "iterations", "converged", "topology", "seed"}
        assert data["topology"] == {"n_i": 4, "n_g": 2}
        assert data["seed"] == 3

    def test_reactance_stays_within_cap(self):
        res = solve_group(rayleigh_objective(6, 2, seed=18), SolverConfig(restarts=1, seed=0))
        assert np.max(np.abs(res.reactance.as_vector())) <= REACTANCE_CAP


class TestAlignDirectPhase:
    def test_no_direct(self):
        assert align_direct_phase(0.0, 2j) == pytest.approx(4.0)

    def test_no_cascade(self):
        assert align_direct_phase(1 + 1j, 0.0) == pytest.approx(2.0)

    def test_pythagorean_example(self):
        assert align_direct_phase(3.0, 4j) == pytest.approx(49.0)

    def test_transmit_power_scale(self):
        assert align_direct_phase(3.0, 4j, p_t=10.0) == pytest.approx(490.0)


class TestConfigValidation:
    def test_bad_tolerances_rejected(self):
        with pytest.raises(ValueError):
            SolverConfig(gradient_tolerance=0.0)
        with pytest.raises(ValueError):
            SolverConfig(max_iterations=0)
        with pytest.raises(ValueError):
            SolverConfig(restarts=-1)

    def test_objective_dimension_mismatch_rejected(self):
        real = ChannelRealization(0.0, np.ones(4), np.ones(4))
        with pytest.raises(ValueError):
            Objective(real, Topology.single(6))
