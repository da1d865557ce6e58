#! encoding = utf-8

""" Unit test of the optimal gains, minimum cost and cross validation """

import unittest
import numpy as np
from numpy.testing import assert_allclose

from PyBiLQR.config.config import load_problem, fixture
from PyBiLQR.libs.bimatrix import Bimatrix
from PyBiLQR.libs.lqr import (lqr_complex, lqr_antilinear_anti, lqr_antilinear_normal,
                              cross_validate_antilinear)
from PyBiLQR.libs.system import FeedbackGain, closed_loop, spectral_radius, cost_adaptive
from PyBiLQR.test.helpers import (P_NORMAL_SCALAR, K_NORMAL_SCALAR, P_ANTI_SCALAR, K_ANTI_SCALAR,
                                  scalar_normal, scalar_antilinear, random_matrix,
                                  stabilizable_antilinear_suite, stabilizable_complex_suite)


class TestScalar(unittest.TestCase):

    def test_normal(self):
        sys_, w = scalar_normal()
        res = lqr_complex(sys_, w)
        assert_allclose(res.gain.k1, [[K_NORMAL_SCALAR]], rtol=1e-10)
        assert_allclose(res.gain.k2, [[0]], atol=1e-12)
        self.assertAlmostEqual(res.radius, 0.5 + K_NORMAL_SCALAR)
        self.assertTrue(res.is_stable)
        self.assertAlmostEqual(res.jmin([2j]), 4 * P_NORMAL_SCALAR)

    def test_antilinear_routes(self):
        sys_, w = scalar_antilinear()
        for res in (lqr_antilinear_anti(sys_, w), lqr_antilinear_normal(sys_, w),
                    lqr_complex(sys_.lift(), w)):
            assert_allclose(res.gain.k1, [[K_ANTI_SCALAR]], rtol=1e-10)
            assert_allclose(res.gain.k2, [[0]], atol=1e-10)
            self.assertAlmostEqual(res.radius, 2 + K_ANTI_SCALAR)
            self.assertAlmostEqual(res.jmin([1.]), P_ANTI_SCALAR)

    def test_method_labels(self):
        sys_, w = scalar_antilinear()
        self.assertEqual(lqr_antilinear_anti(sys_, w).method, 'anti')
        self.assertEqual(lqr_antilinear_normal(sys_, w).method, 'normal')


class TestFixtures(unittest.TestCase):

    def test_zero_state_matrix(self):
        problem = load_problem(fixture('antilinear_zero_state.json'))
        report = cross_validate_antilinear(problem.system, problem.weights, x0=problem.x0)
        for res in report.results.values():
            assert_allclose(res.p.p1, problem.weights.q, atol=1e-12)
            assert_allclose(res.gain.k1, np.zeros((1, 2)), atol=1e-12)
            self.assertAlmostEqual(res.radius, 0.)
        self.assertAlmostEqual(report.jmin['anti'], 8.)

    def test_stable_without_input(self):
        problem = load_problem(fixture('stable_no_input.json'))
        res = lqr_complex(problem.system, problem.weights)
        assert_allclose(res.gain.k1, np.zeros((1, 2)), atol=1e-12)
        self.assertTrue(res.is_stable)
        x0 = np.array([1., -1j])
        cost, _ = cost_adaptive(problem.system, res.gain, problem.weights, x0)
        assert_allclose(res.jmin(x0), cost, rtol=1e-8)


class TestCrossValidation(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.cases = stabilizable_antilinear_suite(50, 50)

    def test_routes_agree(self):
        rng = np.random.default_rng(51)
        for sys_, w in self.cases:
            x0 = random_matrix(rng, sys_.n, 1).ravel()
            report = cross_validate_antilinear(sys_, w, x0=x0)
            self.assertLess(report.max_discrepancy, 1e-7, report.table())
            self.assertIn('jmin', report.discrepancies)
            self.assertEqual(set(report.iterations), {'bimatrix', 'anti', 'normal'})
            for res in report.results.values():
                self.assertTrue(res.is_stable)

    def test_table_sorted(self):
        sys_, w = self.cases[0]
        names = [name for name, _ in cross_validate_antilinear(sys_, w).table()]
        self.assertEqual(names, sorted(names))
        self.assertNotIn('jmin', names)


class TestOptimality(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.results = [(sys_, w, lqr_complex(sys_, w)) for sys_, w in stabilizable_complex_suite(52, 20)]
        cls.results += [(sys_.lift(), w, lqr_antilinear_anti(sys_, w))
                        for sys_, w in stabilizable_antilinear_suite(53, 50)]

    def test_cost_identity(self):
        rng = np.random.default_rng(54)
        for sys_, w, res in self.results:
            for _ in range(20):
                x0 = random_matrix(rng, sys_.n, 1).ravel()
                cost, _ = cost_adaptive(sys_, res.gain, w, x0)
                assert_allclose(cost, res.jmin(x0), rtol=1e-6)

    def test_perturbation_never_helps(self):
        rng = np.random.default_rng(55)
        for sys_, w, res in self.results:
            x0 = random_matrix(rng, sys_.n, 1).ravel()
            jmin = res.jmin(x0)
            for _ in range(20):
                d1 = random_matrix(rng, sys_.m, sys_.n)
                d2 = random_matrix(rng, sys_.m, sys_.n)
                scale = 0.01 / np.sqrt(np.linalg.norm(d1) ** 2 + np.linalg.norm(d2) ** 2)
                gain = FeedbackGain(res.gain.k + Bimatrix(scale * d1, scale * d2))
                if spectral_radius(closed_loop(sys_, gain)) >= 1:
                    continue
                cost, _ = cost_adaptive(sys_, gain, w, x0)
                self.assertGreaterEqual(cost, jmin * (1 - 1e-9))


def load_tests(loader, tests, pattern):
    suite = unittest.TestSuite()
    for test_class in [TestScalar, TestFixtures, TestCrossValidation, TestOptimality]:
        tests = loader.loadTestsFromTestCase(test_class)
        suite.addTests(tests)
    return suite


if __name__ == '__main__':
    unittest.main()
