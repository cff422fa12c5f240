import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orbtherm import ThermalModel, balance_rhs, jacobian, jacobian_exact, jacobian_heuristic, structure_report
from orbtherm.linearization import VARIANTS, antisymmetry_ratio, radiation_conductances, similarity_transform

from helpers import REFERENCE_MEANS, random_model, single_node


def fd_jacobian(model, T, q, h=1e-3):
    N = T.size
    J = np.empty((N, N))
    for j in range(N):
        e = np.zeros(N)
        e[j] = h
        J[:, j] = (balance_rhs(model, T + e, q) - balance_rhs(model, T - e, q)) / (2 * h)
    return J


class TestJacobianExact:
    def test_reference_entries(self, moon_J):
        J = moon_J.matrix * 1e3
        assert J[0, 1] == pytest.approx(1.18, abs=0.01)
        assert J[0, 0] == pytest.approx(-6.99, abs=0.01)

    def test_matches_finite_differences(self, moon, moon_steady, moon_J):
        T = moon_steady.temperatures
        fd = fd_jacobian(moon, T, REFERENCE_MEANS)
        scale = np.abs(moon_J.matrix).max()
        np.testing.assert_allclose(moon_J.matrix, fd, rtol=1e-6, atol=1e-14 * scale)

    def test_explicit_entries(self):
        rng = np.random.default_rng(11)
        m = random_model(rng, N=4)
        T = rng.uniform(150, 350, 4)
        J = jacobian_exact(m, T).matrix
        C, K, R, Ri = m.capacitance, m.conduction, m.radiation, m.env_radiation
        for i in range(4):
            for j in range(4):
                if i != j:
                    assert J[i, j] == pytest.approx((K[i, j] + 4 * R[i, j] * T[j] ** 3) / C[i], rel=1e-13)
            d = -(np.sum(K[i] + 4 * R[i] * T[i] ** 3) + 4 * Ri[i] * T[i] ** 3) / C[i]
            assert J[i, i] == pytest.approx(d, rel=1e-13)

    def test_pure_conduction_independent_of_T(self):
        K = np.array([[0, 0.4, 0.1], [0.4, 0, 0.2], [0.1, 0.2, 0]])
        # a model with no escape at all is rejected, so add a negligible one
        m = ThermalModel([10.0, 20.0, 30.0], K, np.zeros((3, 3)), [1e-30, 0.0, 0.0])
        a = jacobian_exact(m, [100.0, 200.0, 300.0]).matrix
        b = jacobian_exact(m, [300.0, 250.0, 50.0]).matrix
        np.testing.assert_allclose(a, b, atol=1e-20)
        expect = (K - np.diag(K.sum(axis=1))) / m.capacitance[:, None]
        np.testing.assert_allclose(a, expect, atol=1e-20)

    def test_single_node(self):
        m = single_node(C=100.0, R=2e-9, T0=0.0)
        T = (10.0 / 2e-9) ** 0.25
        J = jacobian_exact(m, [T]).matrix
        assert J[0, 0] == pytest.approx(-4 * 2e-9 * T ** 3 / 100.0, rel=1e-14)
        assert J[0, 0] == pytest.approx(-1.50e-3, abs=0.005e-3)

    def test_dimension_mismatch(self, moon):
        with pytest.raises(ValueError):
            jacobian_exact(moon, np.ones(3))

    def test_variant_dispatch(self, moon, moon_steady, moon_J):
        np.testing.assert_array_equal(jacobian(moon, moon_steady.temperatures).matrix, moon_J.matrix)
        with pytest.raises(ValueError):
            jacobian(moon, moon_steady.temperatures, "bogus")


class TestJacobianHeuristic:
    def test_uniform_temperature_identity(self, moon):
        T = np.full(10, 273.0)
        ex = jacobian_exact(moon, T).matrix
        for sym in (False, True):
            h = jacobian_heuristic(moon, T, sym).matrix
            np.testing.assert_allclose(h, ex, rtol=1e-13, atol=1e-18)

    @pytest.mark.parametrize("sym", [False, True])
    def test_close_to_exact(self, moon, moon_steady, moon_J, sym):
        h = jacobian_heuristic(moon, moon_steady.temperatures, sym).matrix
        rel = np.linalg.norm(h - moon_J.matrix) / np.linalg.norm(moon_J.matrix)
        assert rel < 1e-2

    @pytest.mark.parametrize("sym", [False, True])
    def test_similarity_symmetric(self, moon, moon_steady, sym):
        A = similarity_transform(jacobian_heuristic(moon, moon_steady.temperatures, sym), moon.capacitance)
        assert np.abs(A - A.T).max() <= 1e-12 * np.abs(A).max()

    def test_conductance_formulas(self):
        rng = np.random.default_rng(2)
        m = random_model(rng, N=3)
        T = rng.uniform(200, 320, 3)
        one, env = radiation_conductances(m, T, symmetrized=False)
        sym, _ = radiation_conductances(m, T, symmetrized=True)
        i, j = 0, 2
        R = m.radiation[i, j]
        assert one[i, j] == pytest.approx(R * (T[i] + T[j]) * (T[i] ** 2 + T[j] ** 2), rel=1e-14)
        assert sym[i, j] == pytest.approx(2 * R * (T[i] ** 3 + T[j] ** 3), rel=1e-14)
        np.testing.assert_allclose(env, 4 * m.env_radiation * T ** 3, rtol=1e-14)

    def test_bundle_carries_conductances(self, moon, moon_steady):
        b = jacobian_heuristic(moon, moon_steady.temperatures, True)
        assert b.radiation_conductances is not None and b.env_conductances is not None
        assert b.variant == "heuristic_symmetrized"

    def test_single_node_matches_exact(self):
        m = single_node()
        for v in VARIANTS:
            assert jacobian(m, [250.0], v).matrix[0, 0] == pytest.approx(
                jacobian_exact(m, [250.0]).matrix[0, 0], rel=1e-15)


class TestStructureReport:
    def test_ten_node(self, moon, moon_J):
        rep = structure_report(moon_J, moon.capacitance)
        assert rep.z_matrix
        assert rep.all_rows_dominant
        assert rep.stable and rep.max_real_eigenvalue < 0
        assert rep.antisymmetry_ratio < 1e-3

    def test_symmetrized_antisymmetry_vanishes(self, moon, moon_steady):
        J = jacobian_heuristic(moon, moon_steady.temperatures, True)
        assert structure_report(J, moon.capacitance).antisymmetry_ratio < 1e-12

    def test_antisymmetry_ratio_definition(self, moon, moon_J):
        A = similarity_transform(moon_J, moon.capacitance)
        expect = np.linalg.norm((A - A.T) / 2) / np.linalg.norm(A)
        assert antisymmetry_ratio(moon_J, moon.capacitance) == pytest.approx(expect, rel=1e-12)

    def test_to_dict(self, moon, moon_J):
        d = structure_report(moon_J, moon.capacitance).to_dict()
        assert d["z_matrix"] is True and len(d["diagonal_dominance"]) == 10

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_random_models_are_stable_z_matrices(self, seed):
        rng = np.random.default_rng(seed)
        m = random_model(rng, N=5, dense=False)
        T = rng.uniform(20.0, 500.0, 5)
        for v in VARIANTS:
            J = jacobian(m, T, v)
            rep = structure_report(J, m.capacitance)
            assert rep.z_matrix
            assert rep.max_real_eigenvalue < -1e-15 * np.linalg.norm(J.matrix)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_random_fd_consistency(self, seed):
        rng = np.random.default_rng(seed)
        m = random_model(rng, N=4, dense=False)
        T = rng.uniform(150.0, 400.0, 4)
        q = rng.uniform(0, 10, 4)
        J = jacobian_exact(m, T).matrix
        np.testing.assert_allclose(J, fd_jacobian(m, T, q), rtol=1e-6, atol=1e-13 * np.abs(J).max())
