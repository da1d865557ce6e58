#! encoding = utf-8

""" Unit test of the system containers, simulation and cost """

import unittest
import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from PyBiLQR.libs.bimatrix import Bimatrix
from PyBiLQR.libs.errors import DimensionMismatch, InvalidWeights
from PyBiLQR.libs.system import (ComplexLinearSystem, AntilinearSystem, CostWeights, FeedbackGain,
                                 Trajectory, closed_loop, spectral_radius, simulate, simulate_inputs,
                                 cost_truncated, cost_adaptive, random_antilinear_system,
                                 random_complex_system, random_weights)
from PyBiLQR.test.helpers import (P_NORMAL_SCALAR, K_NORMAL_SCALAR, scalar_normal,
                                  random_bimatrix, random_matrix)


class TestContainers(unittest.TestCase):

    def test_complex_system_shapes(self):
        sys_ = ComplexLinearSystem.from_matrices(np.eye(3), np.ones((3, 2)))
        self.assertEqual((sys_.n, sys_.m), (3, 2))
        assert_allclose(sys_.a.m2, np.zeros((3, 3)))

    def test_complex_system_rejects(self):
        with self.assertRaises(DimensionMismatch):
            ComplexLinearSystem.from_matrices(np.ones((2, 3)), np.ones((2, 1)))
        with self.assertRaises(DimensionMismatch):
            ComplexLinearSystem.from_matrices(np.eye(2), np.ones((3, 1)))

    def test_antilinear_lift(self):
        rng = np.random.default_rng(20)
        sys_ = random_antilinear_system(rng, 3, 2)
        lifted = sys_.lift()
        assert_allclose(lifted.a.m1, np.zeros((3, 3)))
        assert_allclose(lifted.a.m2, sys_.a2)
        assert_allclose(lifted.b.m2, sys_.b2)

    def test_antilinear_rejects(self):
        with self.assertRaises(DimensionMismatch):
            AntilinearSystem(np.eye(2), np.ones((3, 1)))

    def test_weights_rejects(self):
        with self.assertRaises(InvalidWeights) as cm:
            CostWeights(-np.eye(2), np.eye(1))
        self.assertTrue(str(cm.exception).startswith('q'))
        with self.assertRaises(InvalidWeights) as cm:
            CostWeights(np.eye(2), [[1, 1j], [1j, 1]])
        self.assertTrue(str(cm.exception).startswith('r'))

    def test_weights_conform(self):
        w = CostWeights(np.eye(2), np.eye(1))
        w.check_conform(2, 1)
        with self.assertRaises(DimensionMismatch):
            w.check_conform(3, 1)

    def test_trajectory_rejects(self):
        with self.assertRaises(DimensionMismatch):
            Trajectory(np.zeros((3, 2)), np.zeros((3, 1)))

    def test_random_builders_are_seeded(self):
        a = random_complex_system(7, 3, 2)
        b = random_complex_system(7, 3, 2)
        assert_array_equal(a.a.m1, b.a.m1)
        assert_array_equal(a.b.m2, b.b.m2)
        w1 = random_weights(8, 3, 2)
        w2 = random_weights(8, 3, 2)
        assert_array_equal(w1.q, w2.q)


class TestSimulate(unittest.TestCase):

    def setUp(self):
        rng = np.random.default_rng(21)
        self.sys = random_antilinear_system(rng, 3, 2)
        self.gain = FeedbackGain(random_bimatrix(rng, 2, 3))
        self.x0 = random_matrix(rng, 3, 1).ravel()

    def test_horizon_zero(self):
        traj = simulate(self.sys.lift(), self.gain, self.x0, 0)
        self.assertEqual(traj.states.shape, (1, 3))
        self.assertEqual(traj.inputs.shape, (0, 2))
        assert_allclose(traj.states[0], self.x0)

    def test_antilinear_recursion(self):
        traj = simulate(self.sys.lift(), self.gain, self.x0, 10)
        a2, b2 = self.sys.a2, self.sys.b2
        x = self.x0
        for k in range(10):
            u = self.gain.k1 @ x + self.gain.k2.conj() @ x.conj()
            assert_allclose(traj.inputs[k], u, atol=1e-10)
            x = a2.conj() @ x.conj() + b2.conj() @ u.conj()
            assert_allclose(traj.states[k + 1], x, rtol=1e-10, atol=1e-10)

    def test_deterministic(self):
        t1 = simulate(self.sys.lift(), self.gain, self.x0, 25)
        t2 = simulate(self.sys.lift(), self.gain, self.x0, 25)
        assert_array_equal(t1.states, t2.states)
        assert_array_equal(t1.inputs, t2.inputs)

    def test_open_loop_matches_closed_loop(self):
        sys_ = self.sys.lift()
        traj = simulate(sys_, self.gain, self.x0, 8)
        replay = simulate_inputs(sys_, self.x0, traj.inputs)
        assert_allclose(replay.states, traj.states, atol=1e-10)

    def test_gain_shape(self):
        with self.assertRaises(DimensionMismatch):
            simulate(self.sys.lift(), FeedbackGain(Bimatrix.zeros(3, 3)), self.x0, 3)

    def test_initial_state_shape(self):
        with self.assertRaises(DimensionMismatch):
            simulate(self.sys.lift(), self.gain, [1., 2.], 3)


class TestCost(unittest.TestCase):

    def test_horizon_zero(self):
        sys_, w = scalar_normal()
        traj = simulate(sys_, FeedbackGain.normal(K_NORMAL_SCALAR), [1.], 0)
        self.assertEqual(cost_truncated(traj, w), 0.)

    def test_truncated_by_hand(self):
        rng = np.random.default_rng(22)
        sys_ = random_complex_system(rng, 2, 1)
        w = random_weights(rng, 2, 1)
        traj = simulate(sys_, FeedbackGain(random_bimatrix(rng, 1, 2)), [1., 1j], 5)
        expect = sum(np.vdot(x, w.q @ x).real + np.vdot(u, w.r @ u).real
                     for x, u in zip(traj.states[:5], traj.inputs))
        self.assertAlmostEqual(cost_truncated(traj, w), expect, places=10)

    def test_scalar_closed_form(self):
        sys_, w = scalar_normal()
        gain = FeedbackGain.normal(K_NORMAL_SCALAR)
        cl = closed_loop(sys_, gain)
        self.assertAlmostEqual(spectral_radius(cl), 0.5 + K_NORMAL_SCALAR)
        x0 = 1 - 2j
        cost, horizon = cost_adaptive(sys_, gain, w, [x0])
        assert_allclose(cost, P_NORMAL_SCALAR * abs(x0) ** 2, rtol=1e-8)
        self.assertLess(horizon, 1000)

    def test_adaptive_stops_at_max_horizon(self):
        sys_, w = scalar_normal()
        with self.assertLogs('PyBiLQR.libs.system', level='WARNING'):
            _, horizon = cost_adaptive(sys_, FeedbackGain.normal(0.5), w, [1.], max_horizon=40)
        self.assertEqual(horizon, 40)

    def test_antilinear_spectral_radius(self):
        self.assertAlmostEqual(spectral_radius(Bimatrix(0, 2j)), 2.)


def load_tests(loader, tests, pattern):
    suite = unittest.TestSuite()
    for test_class in [TestContainers, TestSimulate, TestCost]:
        tests = loader.loadTestsFromTestCase(test_class)
        suite.addTests(tests)
    return suite


if __name__ == '__main__':
    unittest.main()
