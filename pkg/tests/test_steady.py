import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orbtherm import ConvergenceError, HeatProfile, ThermalModel, balance_rhs, hot_cold_cases, solve_steady

from helpers import REFERENCE_MEANS, REFERENCE_TEMPS_C, random_model, single_node

KELVIN = 273.15


class TestBalanceRhs:
    def test_single_node_quartic_root(self):
        m = single_node(C=1.0, R=2e-9, T0=0.0)
        T = (10.0 / 2e-9) ** 0.25
        assert T == pytest.approx(265.9, abs=0.05)
        assert abs(balance_rhs(m, [T], [10.0])[0]) <= 1e-12 * 10.0

    def test_explicit_formula(self):
        rng = np.random.default_rng(5)
        m = random_model(rng, N=4, dense=False)
        T = rng.uniform(200, 350, 4)
        q = rng.uniform(0, 20, 4)
        expect = np.empty(4)
        for i in range(4):
            s = q[i] - m.env_radiation[i] * (T[i] ** 4 - m.env_temperature ** 4)
            for j in range(4):
                s -= m.conduction[i, j] * (T[i] - T[j]) + m.radiation[i, j] * (T[i] ** 4 - T[j] ** 4)
            expect[i] = s / m.capacitance[i]
        np.testing.assert_allclose(balance_rhs(m, T, q), expect, rtol=1e-12, atol=1e-18)

    def test_uniform_temperature_only_environment_terms(self, moon):
        T = np.full(10, 280.0)
        q = moon.env_radiation * (T ** 4 - moon.env_temperature ** 4)
        np.testing.assert_allclose(balance_rhs(moon, T, q), 0.0, atol=1e-15)

    def test_residual_at_solution(self, moon, moon_steady):
        r = balance_rhs(moon, moon_steady.temperatures, REFERENCE_MEANS)
        assert np.abs(r).max() < 1e-6

    def test_batched_rows(self, moon, moon_steady):
        T = np.vstack([moon_steady.temperatures, moon_steady.temperatures + 1.0])
        out = balance_rhs(moon, T, REFERENCE_MEANS)
        np.testing.assert_allclose(out[1], balance_rhs(moon, T[1], REFERENCE_MEANS))

    def test_dimension_mismatch(self, moon):
        with pytest.raises(ValueError):
            balance_rhs(moon, np.ones(3), np.ones(10))


class TestSolveSteady:
    def test_reference_temperatures(self, moon_steady):
        np.testing.assert_allclose(moon_steady.celsius, REFERENCE_TEMPS_C, atol=0.1)

    def test_residual_within_tolerance(self, moon_steady):
        assert moon_steady.residual_norm <= 1e-9
        assert np.all(moon_steady.temperatures > 0)

    def test_single_node(self):
        res = solve_steady(single_node(C=100.0, R=2e-9, T0=0.0), [10.0])
        assert res.temperatures[0] == pytest.approx((10.0 / 2e-9) ** 0.25, rel=1e-12)

    def test_two_identical_nodes(self):
        m = ThermalModel([50.0, 50.0], [[0, 0.3], [0.3, 0]], [[0, 1e-10], [1e-10, 0]], [1e-9, 1e-9])
        res = solve_steady(m, [7.0, 7.0])
        assert res.temperatures[0] == res.temperatures[1]

    @pytest.mark.parametrize("T_init", [100.0, 500.0])
    def test_unique_from_any_start(self, moon, moon_steady, T_init):
        res = solve_steady(moon, REFERENCE_MEANS, init=np.full(10, T_init))
        np.testing.assert_allclose(res.temperatures, moon_steady.temperatures, atol=1e-8)

    def test_monotone_in_inputs(self, moon, moon_steady):
        hotter = solve_steady(moon, 1.1 * REFERENCE_MEANS)
        assert np.all(hotter.temperatures > moon_steady.temperatures)

    def test_global_balance(self, moon, moon_steady):
        T = moon_steady.temperatures
        loss = np.sum(moon.env_radiation * (T ** 4 - moon.env_temperature ** 4))
        assert loss == pytest.approx(REFERENCE_MEANS.sum(), abs=1e-6)
        total = np.sum(moon.capacitance * balance_rhs(moon, T, REFERENCE_MEANS))
        assert abs(total) <= 1e-9 * moon.capacitance.sum()

    def test_iteration_budget(self, moon):
        with pytest.raises(ConvergenceError) as info:
            solve_steady(moon, REFERENCE_MEANS, max_iter=1)
        assert info.value.last_iterate is not None
        assert info.value.residual > 1e-9

    def test_cold_start_clamped(self, moon, moon_steady):
        res = solve_steady(moon, REFERENCE_MEANS, init=np.full(10, 1.0))
        np.testing.assert_allclose(res.temperatures, moon_steady.temperatures, atol=1e-8)

    def test_to_dict_keys(self, moon_steady):
        d = moon_steady.to_dict()
        assert set(d) == {"temperatures_K", "temperatures_C", "residual_norm", "iterations"}
        assert d["temperatures_C"][0] == pytest.approx(d["temperatures_K"][0] - KELVIN)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_random_models_balance(self, seed):
        rng = np.random.default_rng(seed)
        m = random_model(rng, N=5, dense=False)
        q = rng.uniform(0.0, 30.0, 5)
        res = solve_steady(m, q)
        assert res.residual_norm <= 1e-9
        loss = np.sum(m.env_radiation * (res.temperatures ** 4 - m.env_temperature ** 4))
        assert loss == pytest.approx(q.sum(), rel=1e-6, abs=1e-9)


class TestHotColdCases:
    def test_constant_profile(self, moon, moon_const, moon_steady):
        hot, cold = hot_cold_cases(moon, moon_const)
        np.testing.assert_allclose(hot.temperatures, moon_steady.temperatures, atol=1e-9)
        np.testing.assert_allclose(cold.temperatures, moon_steady.temperatures, atol=1e-9)

    def test_constant_profile_ties_go_first(self, moon, moon_const):
        cases = hot_cold_cases(moon, moon_const)
        assert cases.hot_position == 0 and cases.cold_position == 0

    def test_two_phase_profile(self, moon):
        w = REFERENCE_MEANS / REFERENCE_MEANS.sum()
        sun, shade = 80.0 * w, 20.0 * w
        rows = np.vstack([np.tile(sun, (6, 1)), np.tile(shade, (4, 1))])
        prof = HeatProfile(6660.0, rows, moon.capacitance)
        cases = hot_cold_cases(moon, prof)
        assert (cases.hot_position, cases.cold_position) == (0, 6)
        np.testing.assert_allclose(cases.hot.temperatures, solve_steady(moon, sun).temperatures, atol=1e-9)
        np.testing.assert_allclose(cases.cold.temperatures, solve_steady(moon, shade).temperatures, atol=1e-9)
        assert np.all(cases.hot.temperatures > cases.cold.temperatures)
