import numpy as np
import pytest

from h2sw import (
    EUCLIDEAN,
    LORENTZ,
    SPHERE,
    JointCloud,
    ResourceGuardError,
    SpaceSpec,
    ValidationError,
    great_circle_distance,
    joint_wasserstein,
    lorentz_distance,
    mixed_cost_matrix,
    solve_transport,
)
from conftest import R2S1, R3S2, perm_min_cost, random_cloud


class TestMixedCostMatrix:
    def test_zero_diagonal_for_identical_clouds(self, rng):
        mu = random_cloud(rng, 6, R3S2)
        C = mixed_cost_matrix(mu, mu, 2.0)
        assert np.abs(np.diag(C)).max() <= 1e-12

    def test_single_support_frozen_value(self):
        s = (SpaceSpec(EUCLIDEAN, 3), SpaceSpec(SPHERE, 3))
        e = np.array([[1.0, 0.0, 0.0]])
        mu = JointCloud((np.zeros((1, 3)), e), s)
        nu = JointCloud((np.array([[3.0, 4.0, 0.0]]), e.copy()), s)
        assert mixed_cost_matrix(mu, nu, 2.0)[0, 0] == pytest.approx(25.0, abs=1e-12)

    def test_entries_dominate_block_costs(self, rng):
        specs = (SpaceSpec(EUCLIDEAN, 3), SpaceSpec(SPHERE, 3), SpaceSpec(LORENTZ, 2))
        mu = random_cloud(rng, 5, specs)
        nu = random_cloud(rng, 4, specs)
        C = mixed_cost_matrix(mu, nu, 2.0)
        assert np.all(C >= -1e-15)
        pos = np.linalg.norm(mu.blocks[0][:, None, :] - nu.blocks[0][None, :, :], axis=2) ** 2
        assert np.all(C >= pos - 1e-12)

    def test_matches_scalar_metrics(self, rng):
        specs = (SpaceSpec(SPHERE, 3), SpaceSpec(LORENTZ, 2))
        mu = random_cloud(rng, 4, specs)
        nu = random_cloud(rng, 3, specs)
        C = mixed_cost_matrix(mu, nu, 2.0)
        for i in range(4):
            for j in range(3):
                want = (
                    great_circle_distance(mu.blocks[0][i], nu.blocks[0][j]) ** 2
                    + lorentz_distance(mu.blocks[1][i], nu.blocks[1][j]) ** 2
                )
                assert C[i, j] == pytest.approx(want, abs=1e-12)

    def test_spec_mismatch(self, rng):
        mu = random_cloud(rng, 3, R3S2)
        nu = random_cloud(rng, 3, R2S1)
        with pytest.raises(ValidationError):
            mixed_cost_matrix(mu, nu, 2.0)


class TestJointWasserstein:
    def test_single_supports(self, rng):
        mu = random_cloud(rng, 1, R3S2)
        nu = random_cloud(rng, 1, R3S2)
        cost, plan = joint_wasserstein(mu, nu, 2.0)
        assert cost == pytest.approx(mixed_cost_matrix(mu, nu, 2.0)[0, 0], abs=1e-12)
        assert plan.coupling.shape == (1, 1)

    def test_identity(self, rng):
        mu = random_cloud(rng, 7, R3S2)
        cost, plan = joint_wasserstein(mu, mu, 2.0)
        assert cost <= 1e-12
        assert np.abs(plan.coupling - np.eye(7) / 7).max() <= 1e-12

    def test_bruteforce_oracle(self, rng):
        for _ in range(20):
            mu = random_cloud(rng, 6, R2S1)
            nu = random_cloud(rng, 6, R2S1)
            cost, plan = joint_wasserstein(mu, nu, 2.0)
            C = mixed_cost_matrix(mu, nu, 2.0)
            assert cost == pytest.approx(perm_min_cost(C), abs=1e-9)
            plan.check(mu.weights, nu.weights, C)

    def test_assignment_agrees_with_lp(self, rng):
        for _ in range(10):
            mu = random_cloud(rng, 5, R2S1)
            nu = random_cloud(rng, 5, R2S1)
            C = mixed_cost_matrix(mu, nu, 2.0)
            fast = solve_transport(C, mu.weights, nu.weights)
            # nudge a weight by zero to force the LP route
            w = mu.weights.copy()
            lp = solve_transport(C, w + 1e-13, nu.weights)
            assert fast.cost == pytest.approx(lp.cost, abs=1e-8)

    def test_general_weights(self, rng):
        mu = random_cloud(rng, 4, R2S1, uniform=False)
        nu = random_cloud(rng, 6, R2S1, uniform=False)
        cost, plan = joint_wasserstein(mu, nu, 2.0)
        plan.check(mu.weights, nu.weights, mixed_cost_matrix(mu, nu, 2.0))
        assert cost >= 0

    def test_metric_axioms_small_clouds(self, rng):
        p = 2.0
        for _ in range(15):
            mu = random_cloud(rng, 5, R2S1)
            nu = random_cloud(rng, 5, R2S1)
            rho = random_cloud(rng, 5, R2S1)
            d = lambda a, b: joint_wasserstein(a, b, p)[0] ** (1 / p)
            assert d(mu, nu) == pytest.approx(d(nu, mu), abs=1e-12)
            # arccos turns last-ulp rounding into ~1e-8 distances, 1e-16 costs
            assert joint_wasserstein(mu, mu, p)[0] <= 1e-12
            assert d(mu, nu) <= d(mu, rho) + d(rho, nu) + 1e-8

    def test_size_guard(self, rng):
        mu = random_cloud(rng, 40, R2S1)
        with pytest.raises(ResourceGuardError):
            joint_wasserstein(mu, mu, 2.0, size_guard=100)


class TestSolveTransport:
    def test_monotonicity_under_constant_shift(self, rng):
        n = 6
        C = rng.random((n, n))
        w = np.full(n, 1.0 / n)
        base = solve_transport(C, w, w).cost
        shifted = solve_transport(C + 0.37, w, w).cost
        assert shifted == pytest.approx(base + 0.37, abs=1e-10)

    def test_lp_monotonicity_general_weights(self, rng):
        a = rng.random(4) + 0.1
        a /= a.sum()
        b = rng.random(5) + 0.1
        b /= b.sum()
        C = rng.random((4, 5))
        base = solve_transport(C, a, b).cost
        shifted = solve_transport(C + 1.25, a, b).cost
        assert shifted == pytest.approx(base + 1.25, abs=1e-9)

    def test_rejects_bad_weights(self, rng):
        C = rng.random((3, 3))
        with pytest.raises(ValidationError):
            solve_transport(C, np.array([0.5, 0.5, 0.5]), np.full(3, 1 / 3))
