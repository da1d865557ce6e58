#! encoding = utf-8

""" Shared fixtures and closed-form oracles for the unit tests """

import numpy as np
from scipy import linalg

from PyBiLQR.libs.bimatrix import Bimatrix, HermitianBimatrix, embed
from PyBiLQR.libs.stabilizability import is_stabilizable_antilinear, is_stabilizable_complex
from PyBiLQR.libs.system import (ComplexLinearSystem, AntilinearSystem, CostWeights,
                                 random_antilinear_system, random_complex_system, random_weights)

SQRT5 = np.sqrt(5.)
# a1 = 0.5, b1 = 1, q = r = 1: positive root of p^2 - 0.25 p - 1
P_NORMAL_SCALAR = (0.25 + np.sqrt(0.0625 + 4.)) / 2
K_NORMAL_SCALAR = -0.5 * P_NORMAL_SCALAR / (1 + P_NORMAL_SCALAR)
# a2 = 2, b2 = 1, q = r = 1: positive root of P^2 - 4 P - 1
P_ANTI_SCALAR = 2 + SQRT5
K_ANTI_SCALAR = -(1 + SQRT5) / 2


def scalar_normal():
    return ComplexLinearSystem.from_matrices(0.5, 1.), CostWeights(1., 1.)


def scalar_antilinear(a2=2., b2=1.):
    return AntilinearSystem(a2, b2), CostWeights(1., 1.)


def random_matrix(rng, rows, cols):
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_bimatrix(rng, rows, cols) -> Bimatrix:
    return Bimatrix(random_matrix(rng, rows, cols), random_matrix(rng, rows, cols))


def random_hermitian_bimatrix(rng, n, shift=0.) -> HermitianBimatrix:
    """ Random Hermitian bimatrix; a large shift makes it positive definite """
    m1 = random_matrix(rng, n, n)
    m2 = random_matrix(rng, n, n)
    return HermitianBimatrix((m1 + m1.conj().T) / 2 + shift * np.eye(n), (m2 + m2.T) / 2)


def stabilizable_antilinear_suite(seed, count, n_max=4, m_max=2):
    """ Seed-fixed list of (system, weights) that pass the rank test """
    rng = np.random.default_rng(seed)
    suite = []
    while len(suite) < count:
        n = int(rng.integers(1, n_max + 1))
        m = int(rng.integers(1, m_max + 1))
        sys_ = random_antilinear_system(rng, n, m)
        w = random_weights(rng, n, m)
        if is_stabilizable_antilinear(sys_):
            suite.append((sys_, w))
    return suite


def stabilizable_complex_suite(seed, count, n_max=4, m_max=2):
    rng = np.random.default_rng(seed)
    suite = []
    while len(suite) < count:
        n = int(rng.integers(1, n_max + 1))
        m = int(rng.integers(1, m_max + 1))
        sys_ = random_complex_system(rng, n, m)
        w = random_weights(rng, n, m)
        if is_stabilizable_complex(sys_):
            suite.append((sys_, w))
    return suite


def dare_oracle(sys_: ComplexLinearSystem, w: CostWeights) -> HermitianBimatrix:
    """ Standard DARE on the embedding; its solution is the embedding of {P1, P2} """
    x = linalg.solve_discrete_are(embed(sys_.a), embed(sys_.b),
                                  embed(w.q_bimatrix), embed(w.r_bimatrix))
    return HermitianBimatrix.from_bimatrix(Bimatrix.from_embedding(x))
