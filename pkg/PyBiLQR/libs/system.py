#! encoding = utf-8

""" System containers, closed loop, simulation and quadratic cost.

    complex-valued system   x(k+1) = {A1, A2} x(k) + {B1, B2} u(k)
    antilinear system       x(k+1) = A2^# x^#(k) + B2^# u^#(k)
    feedback                u(k) = {K1, K2} x(k)
    cost                    J(u) = sum_k x^H Q x + u^H R u
"""

import logging
from dataclasses import dataclass
import numpy as np
from scipy import linalg

from PyBiLQR.libs.bimatrix import Bimatrix, HermitianBimatrix, apply, embed
from PyBiLQR.libs.common import as_matrix, as_vector, frozen, hermitian_part, is_hermitian_pd
from PyBiLQR.libs.consts import COST_RTOL, COST_MAX_HORIZON
from PyBiLQR.libs.errors import DimensionMismatch, InvalidWeights

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ComplexLinearSystem:
    """ x(k+1) = a x(k) + b u(k), with a (n x n) and b (n x m) bimatrices """

    a: Bimatrix
    b: Bimatrix

    def __post_init__(self):
        n, n_ = self.a.shape
        if n != n_:
            raise DimensionMismatch(f'state bimatrix must be square, got {self.a.shape}')
        if self.b.shape[0] != n:
            raise DimensionMismatch(f'input bimatrix has {self.b.shape[0]} rows, expected {n}')
        if n < 1 or self.b.shape[1] < 1:
            raise DimensionMismatch('system needs at least one state and one input')

    @classmethod
    def from_matrices(cls, a1, b1, a2=None, b2=None):
        a1 = as_matrix(a1)
        b1 = as_matrix(b1)
        a2 = np.zeros_like(a1) if a2 is None else a2
        b2 = np.zeros_like(b1) if b2 is None else b2
        return cls(Bimatrix(a1, a2), Bimatrix(b1, b2))

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def m(self) -> int:
        return self.b.shape[1]


@dataclass(frozen=True, eq=False)
class AntilinearSystem:
    """ x(k+1) = a2^# x^#(k) + b2^# u^#(k) """

    a2: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        a2 = as_matrix(self.a2)
        b2 = as_matrix(self.b2)
        if a2.shape[0] != a2.shape[1]:
            raise DimensionMismatch(f'a2 must be square, got {a2.shape}')
        if b2.shape[0] != a2.shape[0]:
            raise DimensionMismatch(f'b2 has {b2.shape[0]} rows, expected {a2.shape[0]}')
        object.__setattr__(self, 'a2', frozen(a2))
        object.__setattr__(self, 'b2', frozen(b2))

    @property
    def n(self) -> int:
        return self.a2.shape[0]

    @property
    def m(self) -> int:
        return self.b2.shape[1]

    def lift(self) -> ComplexLinearSystem:
        """ The same system as a complex-valued system with A1 = 0, B1 = 0 """
        return ComplexLinearSystem(Bimatrix(np.zeros_like(self.a2), self.a2),
                                   Bimatrix(np.zeros_like(self.b2), self.b2))


@dataclass(frozen=True, eq=False)
class CostWeights:
    """ Hermitian positive definite state weight q (n x n) and input weight r (m x m) """

    q: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        for name in ('q', 'r'):
            m = as_matrix(getattr(self, name))
            if m.shape[0] != m.shape[1]:
                raise InvalidWeights(f'{name} must be square, got {m.shape}')
            if not is_hermitian_pd(m):
                raise InvalidWeights(f'{name} is not Hermitian positive definite')
            h, _ = hermitian_part(m)
            object.__setattr__(self, name, frozen(h))

    @property
    def n(self) -> int:
        return self.q.shape[0]

    @property
    def m(self) -> int:
        return self.r.shape[0]

    @property
    def q_bimatrix(self) -> HermitianBimatrix:
        return HermitianBimatrix(self.q, np.zeros_like(self.q))

    @property
    def r_bimatrix(self) -> HermitianBimatrix:
        return HermitianBimatrix(self.r, np.zeros_like(self.r))

    def check_conform(self, n: int, m: int):
        if (self.n, self.m) != (n, m):
            raise DimensionMismatch(f'weights are sized for n={self.n}, m={self.m}, '
                                    f'system has n={n}, m={m}')


@dataclass(frozen=True, eq=False)
class FeedbackGain:
    """ u(k) = {k1, k2} x(k). k2 = 0 is a normal (linear) state feedback. """

    k: Bimatrix

    @classmethod
    def normal(cls, k1):
        return cls(Bimatrix.normal(k1))

    @property
    def k1(self) -> np.ndarray:
        return self.k.m1

    @property
    def k2(self) -> np.ndarray:
        return self.k.m2


@dataclass(frozen=True, eq=False)
class Trajectory:
    """ states[k] for k = 0..horizon, inputs[k] for k = 0..horizon-1 """

    states: np.ndarray
    inputs: np.ndarray

    def __post_init__(self):
        if self.states.shape[0] != self.inputs.shape[0] + 1:
            raise DimensionMismatch(f'{self.states.shape[0]} states do not match '
                                    f'{self.inputs.shape[0]} inputs')
        frozen(self.states)
        frozen(self.inputs)

    @property
    def horizon(self) -> int:
        return self.inputs.shape[0]


def _check_gain(sys: ComplexLinearSystem, gain: FeedbackGain):
    if gain.k.shape != (sys.m, sys.n):
        raise DimensionMismatch(f'gain is {gain.k.shape}, system needs ({sys.m}, {sys.n})')


def _initial_state(sys: ComplexLinearSystem, x0) -> np.ndarray:
    x0 = as_vector(x0)
    if x0.shape[0] != sys.n:
        raise DimensionMismatch(f'initial state has length {x0.shape[0]}, expected {sys.n}')
    return x0


def closed_loop(sys: ComplexLinearSystem, gain: FeedbackGain) -> Bimatrix:
    """ {A1, A2} + {B1, B2}{K1, K2} """
    _check_gain(sys, gain)
    return sys.a + sys.b @ gain.k


def spectral_radius(x: Bimatrix) -> float:
    """ Largest eigenvalue modulus of the embedding """
    if x.shape[0] != x.shape[1]:
        raise DimensionMismatch(f'spectral radius needs a square bimatrix, got {x.shape}')
    return float(np.max(np.abs(linalg.eigvals(embed(x)))))


def simulate(sys: ComplexLinearSystem, gain: FeedbackGain, x0, horizon: int) -> Trajectory:
    """ Closed-loop recursion from x0 over `horizon` steps """
    if horizon < 0:
        raise ValueError(f'horizon must be >= 0, got {horizon}')
    cl = closed_loop(sys, gain)
    states = np.empty((horizon + 1, sys.n), dtype=complex)
    inputs = np.empty((horizon, sys.m), dtype=complex)
    states[0] = _initial_state(sys, x0)
    for k in range(horizon):
        inputs[k] = apply(gain.k, states[k])
        states[k + 1] = apply(cl, states[k])
    return Trajectory(states, inputs)


def simulate_inputs(sys: ComplexLinearSystem, x0, inputs) -> Trajectory:
    """ Open-loop recursion driven by a prescribed input sequence (horizon x m) """
    inputs = np.array(inputs, dtype=complex).reshape(-1, sys.m)
    horizon = inputs.shape[0]
    states = np.empty((horizon + 1, sys.n), dtype=complex)
    states[0] = _initial_state(sys, x0)
    for k in range(horizon):
        states[k + 1] = apply(sys.a, states[k]) + apply(sys.b, inputs[k])
    return Trajectory(states, inputs)


def _stage_cost(x, u, w: CostWeights) -> float:
    return float(np.real(np.vdot(x, w.q @ x) + np.vdot(u, w.r @ u)))


def cost_truncated(traj: Trajectory, w: CostWeights) -> float:
    """ sum_{k < horizon} x(k)^H Q x(k) + u(k)^H R u(k) """
    xs = traj.states[:traj.horizon]
    us = traj.inputs
    if xs.shape[1] != w.n or us.shape[1] != w.m:
        raise DimensionMismatch(f'trajectory ({xs.shape[1]}, {us.shape[1]}) does not '
                                f'match weights ({w.n}, {w.m})')
    sx = np.einsum('ki,ij,kj->k', xs.conj(), w.q, xs)
    su = np.einsum('ki,ij,kj->k', us.conj(), w.r, us)
    return float(np.real(sx.sum() + su.sum()))


def cost_adaptive(sys: ComplexLinearSystem, gain: FeedbackGain, w: CostWeights, x0,
                  rtol=COST_RTOL, max_horizon=COST_MAX_HORIZON) -> tuple[float, int]:
    """ Closed-loop cost with a horizon doubled until the last doubling adds
        less than rtol of the running sum, or max_horizon is reached.
    :returns
        cost: float
        horizon: int
    """
    w.check_conform(sys.n, sys.m)
    cl = closed_loop(sys, gain)
    x = _initial_state(sys, x0)
    total = 0.
    last = 0.
    checkpoint = 16
    k = 0
    while k < max_horizon:
        u = apply(gain.k, x)
        total += _stage_cost(x, u, w)
        x = apply(cl, x)
        k += 1
        if not np.isfinite(total):
            break
        if k == checkpoint:
            if k > 16 and total - last <= rtol * total:
                return total, k
            last = total
            checkpoint *= 2
    logger.warning('cost horizon stopped at %d steps before the tail fell below %.1e',
                   k, rtol)
    return total, k


def _random_matrix(rng, rows, cols, scale=1.) -> np.ndarray:
    return scale * (rng.standard_normal((rows, cols))
                    + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_antilinear_system(rng, n: int, m: int, scale=None) -> AntilinearSystem:
    """ Random antilinear system. rng is a seed or a numpy Generator. """
    rng = np.random.default_rng(rng)
    scale = 1. / np.sqrt(n) if scale is None else scale
    return AntilinearSystem(_random_matrix(rng, n, n, scale), _random_matrix(rng, n, m))


def random_complex_system(rng, n: int, m: int, scale=None) -> ComplexLinearSystem:
    rng = np.random.default_rng(rng)
    scale = 1. / np.sqrt(n) if scale is None else scale
    return ComplexLinearSystem.from_matrices(
        _random_matrix(rng, n, n, scale), _random_matrix(rng, n, m),
        _random_matrix(rng, n, n, scale), _random_matrix(rng, n, m))


def random_weights(rng, n: int, m: int) -> CostWeights:
    """ Q = I + M M^H / (2n) and R alike: well conditioned Hermitian PD weights """
    rng = np.random.default_rng(rng)
    mq = _random_matrix(rng, n, n)
    mr = _random_matrix(rng, m, m)
    return CostWeights(np.eye(n) + mq @ mq.conj().T / (2 * n),
                       np.eye(m) + mr @ mr.conj().T / (2 * m))
