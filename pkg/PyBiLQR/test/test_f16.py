#! encoding = utf-8

""" Regression test on the F-16 one-step delay model """

import unittest
import numpy as np
from numpy.testing import assert_allclose

from PyBiLQR.config.config import load_problem, fixture
from PyBiLQR.libs.bimatrix import bnorm
from PyBiLQR.libs.riccati import SolverOptions, bimatrix_riccati_iterates, nth_iterate
from PyBiLQR.libs.timedelay import lift_delay_system, lift_state, solve_delay_lqr, simulate_delay
from PyBiLQR.test.helpers import dare_oracle

P1 = np.array([
    [12.3464, 2.3671, 8.6342, -2.0194 + 3.2919j, -0.1762],
    [2.3671, 3.7958, 10.5820, -3.6990 + 5.5020j, -0.2025],
    [8.6342, 10.5820, 56.7625, -18.9340 + 23.6474j, -0.9975],
    [-2.0194 - 3.2919j, -3.6990 - 5.5020j, -18.9340 - 23.6474j, 28.0046, 0.3487 + 0.4725j],
    [-0.1762, -0.2025, -0.9975, 0.3487 - 0.4725j, 1.5259]])

P2 = np.array([
    [11.3464, 2.3671, 8.6342, -2.0194 + 3.2919j, -0.1762],
    [2.3671, 2.7958, 10.5820, -3.6990 + 5.5020j, -0.2025],
    [8.6342, 10.5820, 55.7625, -18.9340 + 23.6474j, -0.9975],
    [-2.0194 + 3.2919j, -3.6990 + 5.5020j, -18.9340 + 23.6474j, -3.5897 - 17.1002j, 0.3487 - 0.4725j],
    [-0.1762, -0.2025, -0.9975, 0.3487 - 0.4725j, 0.5259]])

K1 = np.array([[0.0463 + 0.0962j, 0.1140 + 0.1205j, 0.6384 + 0.6279j, -0.7529 - 0.4637j, -0.0112 - 0.0584j]])
K2 = np.array([[0.0463 - 0.0962j, 0.1140 - 0.1205j, 0.6384 - 0.6279j, -0.2122 - 0.0036j, -0.0112 + 0.0584j]])

# entries are printed to four decimals
ATOL = 2e-3
# A0, Ad and G are themselves printed to four decimals. Their rounding moves
# P(140) by up to 6.4e-3 at a few entries (P1[0, 0], P1[2, 2] and their
# counterparts in P2), so these are held to ROUNDED_ATOL instead of ATOL.
ROUNDED_ATOL = 7e-3
ROUNDED_COUNT = 5
# roundoff floor of the residual trace at the scale of P (entries near 60)
TRACE_FLOOR = 1e-12


class TestF16(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        problem = load_problem(fixture('f16_delay.json'))
        cls.ds, cls.ic = problem.system, problem.ic
        cls.lifted = lift_delay_system(cls.ds)
        cls.res = solve_delay_lqr(cls.ds, SolverOptions(record_trace=True, record_iterates=True))

    def assert_printed(self, computed, printed):
        """ Every entry within ATOL of the printed value, except at most
            ROUNDED_COUNT entries of the upper triangle within ROUNDED_ATOL
        """
        err = np.abs(computed - printed)[np.triu_indices(printed.shape[0])]
        self.assertLessEqual(np.count_nonzero(err > ATOL), ROUNDED_COUNT, err)
        self.assertLess(err.max(), ROUNDED_ATOL, err)

    def test_no_normalization_needed(self):
        assert_allclose(self.lifted.l0, np.eye(2))
        self.assertFalse(self.lifted.padded)
        assert_allclose(lift_state(self.ic), [4 + 4j, 1 + 4j, -8 + 8j, -6 - 6j, 9 + 10j])

    def test_iterate_140(self):
        p = nth_iterate(bimatrix_riccati_iterates(self.lifted.system, self.lifted.weights), 140)
        self.assert_printed(p.p1, P1)
        self.assert_printed(p.p2, P2)

    def test_converged_solution(self):
        p = self.res.solution.p
        self.assert_printed(p.p1, P1)
        self.assert_printed(p.p2, P2)
        ref = dare_oracle(self.lifted.system, self.lifted.weights)
        self.assertLess(bnorm(p - ref), 1e-8 * bnorm(ref))

    def test_gains(self):
        assert_allclose(self.res.gain.k1, K1, atol=ATOL, rtol=0)
        assert_allclose(self.res.gain.k2, K2, atol=ATOL, rtol=0)

    def test_stable(self):
        self.assertTrue(self.res.lqr.is_stable)

    def test_iterates_keep_structure(self):
        iterates = self.res.solution.iterates
        self.assertEqual(len(iterates), self.res.solution.iterations + 1)
        for p in iterates:
            self.assertLess(p.correction, 1e-9)
            self.assertLess(np.abs(p.p1 - p.p1.conj().T).max(), 1e-9)
            self.assertLess(np.abs(p.p2 - p.p2.T).max(), 1e-9)

    def test_residual_decay(self):
        residuals = np.array([row.residual for row in self.res.solution.trace])
        tail = residuals[5:]
        self.assertTrue(np.all(np.diff(tail) <= TRACE_FLOOR), np.diff(tail).max())
        below = np.flatnonzero(residuals < 1e-9)
        self.assertGreater(below.size, 0)
        self.assertLessEqual(below[0], 300)
        self.assertLess(self.res.solution.residual, 1e-8 * np.linalg.norm(self.res.solution.p.p1))

    def test_cost_identity(self):
        _, cost = simulate_delay(self.ds, self.res.feedback, self.ic, 20000)
        assert_allclose(cost, self.res.jmin(self.ic), rtol=1e-6)


def load_tests(loader, tests, pattern):
    suite = unittest.TestSuite()
    for test_class in [TestF16]:
        tests = loader.loadTestsFromTestCase(test_class)
        suite.addTests(tests)
    return suite


if __name__ == '__main__':
    unittest.main()
