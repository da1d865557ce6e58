#! encoding = utf-8

""" One-step delay LQR through the complex-valued lifting.

delay system        xi(k+1) = A0 xi(k) + Ad xi(k-1) + G v(k)
cost                J(v) = sum_k xi^T Q0 xi + v^T R0 v
lifting             x(k) = xi(k) + j xi(k-1),   u = v1 + j v2
lifted system       A1 = A0/2 + j/2 (I - Ad),   A2 = A0/2 - j/2 (I + Ad)
                    B1 = B2 = G1/2 - j/2 G2,    Q = Q0/2,   R = R01

The pipeline pads an odd input dimension with a slack input, normalizes R0 to
diag(R01, R01) with v = L0 v_hat, solves the lifted complex problem and
separates real and imaginary parts of the optimal gain into a real feedback
on [xi(k); xi(k-1)].
"""

import logging
from dataclasses import dataclass, replace
from typing import NamedTuple
import numpy as np
from scipy import linalg

from PyBiLQR.libs.bimatrix import Bimatrix, quadratic_form
from PyBiLQR.libs.common import as_matrix, as_vector, frozen, herm_power, hermitian_part, is_hermitian_pd
from PyBiLQR.libs.consts import STRUCT_TOL
from PyBiLQR.libs.errors import DimensionMismatch, InvalidWeights, NotPositiveDefinite
from PyBiLQR.libs.lqr import LQRResult, lqr_complex
from PyBiLQR.libs.riccati import SolverOptions
from PyBiLQR.libs.system import ComplexLinearSystem, CostWeights, FeedbackGain

logger = logging.getLogger(__name__)


def _real_matrix(value, name) -> np.ndarray:
    m = as_matrix(value, dtype=complex)
    if np.any(np.abs(m.imag) > 0):
        raise ValueError(f'{name} must be real')
    return m.real.copy()


@dataclass(frozen=True, eq=False)
class DelaySystem:
    """ xi(k+1) = a0 xi(k) + ad xi(k-1) + g v(k), weights q0 (n x n) and r0 (p x p) """

    a0: np.ndarray
    ad: np.ndarray
    g: np.ndarray
    q0: np.ndarray
    r0: np.ndarray

    def __post_init__(self):
        for name in ('a0', 'ad', 'g', 'q0', 'r0'):
            object.__setattr__(self, name, _real_matrix(getattr(self, name), name))
        n = self.a0.shape[0]
        if self.a0.shape != (n, n) or self.ad.shape != (n, n):
            raise DimensionMismatch(f'a0 {self.a0.shape} and ad {self.ad.shape} must be {n} x {n}')
        if self.g.shape[0] != n:
            raise DimensionMismatch(f'g has {self.g.shape[0]} rows, expected {n}')
        p = self.g.shape[1]
        if self.q0.shape != (n, n) or self.r0.shape != (p, p):
            raise DimensionMismatch(f'weights q0 {self.q0.shape} and r0 {self.r0.shape} '
                                    f'do not match n={n}, p={p}')
        for name in ('q0', 'r0'):
            m = getattr(self, name)
            if not is_hermitian_pd(m):
                raise InvalidWeights(f'{name} is not symmetric positive definite')
            object.__setattr__(self, name, frozen(hermitian_part(m)[0]))
        for name in ('a0', 'ad', 'g'):
            frozen(getattr(self, name))

    @property
    def n(self) -> int:
        return self.a0.shape[0]

    @property
    def p(self) -> int:
        return self.g.shape[1]


@dataclass(frozen=True, eq=False)
class DelayInitialCondition:
    """ xi(0) and xi(-1) """

    xi0: np.ndarray
    xim1: np.ndarray

    def __post_init__(self):
        xi0 = as_vector(self.xi0, dtype=float)
        xim1 = as_vector(self.xim1, dtype=float)
        if xi0.shape != xim1.shape:
            raise DimensionMismatch(f'xi0 has length {xi0.shape[0]}, xim1 has length {xim1.shape[0]}')
        object.__setattr__(self, 'xi0', frozen(xi0))
        object.__setattr__(self, 'xim1', frozen(xim1))

    @property
    def n(self) -> int:
        return self.xi0.shape[0]


@dataclass(frozen=True, eq=False)
class RealFeedback:
    """ v(k) = f [xi(k); xi(k-1)], f is p x 2n """

    f: np.ndarray

    def __call__(self, xi, xi_prev) -> np.ndarray:
        return self.f @ np.concatenate([xi, xi_prev])


@dataclass(frozen=True, eq=False)
class DelayTrajectory:
    """ xi[k] = xi(k) for k = 0..horizon, inputs[k] = v(k) for k < horizon """

    xim1: np.ndarray
    xi: np.ndarray
    inputs: np.ndarray

    @property
    def horizon(self) -> int:
        return self.inputs.shape[0]

    def lifted(self) -> np.ndarray:
        """ x(k) = xi(k) + j xi(k-1) for k = 0..horizon """
        prev = np.vstack([self.xim1[np.newaxis, :], self.xi[:-1]])
        return self.xi + 1j * prev


def pad_odd_input(ds: DelaySystem, slack_weight=1.) -> DelaySystem:
    """ Append a zero input column to G and a slack_weight entry to R0 when p is odd """
    if ds.p % 2 == 0:
        return ds
    if not slack_weight > 0:
        raise InvalidWeights(f'slack weight must be > 0, got {slack_weight}')
    logger.debug('padding input dimension %d with a slack input of weight %g', ds.p, slack_weight)
    return replace(ds, g=np.hstack([ds.g, np.zeros((ds.n, 1))]),
                   r0=linalg.block_diag(ds.r0, [[slack_weight]]))


def normalize_input_weight(r0) -> tuple[np.ndarray, np.ndarray]:
    """ L0 with L0^T R0 L0 = diag(R01, R01)
        L0 = [[I, -R01^-1 R02 C], [0, C]],  C = S^-1/2 R01^1/2,  S = R03 - R02^T R01^-1 R02
    :returns
        l0: p x p real matrix
        r: R01, the m x m weight of the lifted problem
    """
    r0 = _real_matrix(r0, 'r0')
    p = r0.shape[0]
    if r0.shape != (p, p) or p % 2:
        raise DimensionMismatch(f'r0 must be square with even size, got {r0.shape}')
    if not is_hermitian_pd(r0):
        raise NotPositiveDefinite('r0 is not symmetric positive definite')
    r0 = hermitian_part(r0)[0]
    m = p // 2
    r01, r02, r03 = r0[:m, :m], r0[:m, m:], r0[m:, m:]
    r01_inv_r02 = linalg.solve(r01, r02, assume_a='pos')
    schur = hermitian_part(r03 - r02.T @ r01_inv_r02)[0]
    c = herm_power(schur, -0.5, 'R03 - R02^T R01^-1 R02') @ herm_power(r01, 0.5, 'R01')
    l0 = np.block([[np.eye(m), -r01_inv_r02 @ c],
                   [np.zeros((m, m)), c]])
    return np.real(l0), r01.copy()


def to_complex_system(ds: DelaySystem) -> tuple[ComplexLinearSystem, CostWeights]:
    """ Lifted complex-valued system and weights (Q = Q0/2, R = R01).
        R0 must already be diag(R01, R01).
    """
    if ds.p % 2:
        raise DimensionMismatch(f'input dimension must be even, got {ds.p}')
    n, m = ds.n, ds.p // 2
    r01 = ds.r0[:m, :m]
    off = np.linalg.norm(ds.r0 - linalg.block_diag(r01, r01))
    if off > STRUCT_TOL * max(1., float(np.linalg.norm(ds.r0))):
        raise InvalidWeights('r0 is not of the form diag(R01, R01); normalize it first')
    eye = np.eye(n)
    a1 = ds.a0 / 2 + 0.5j * (eye - ds.ad)
    a2 = ds.a0 / 2 - 0.5j * (eye + ds.ad)
    b = ds.g[:, :m] / 2 - 0.5j * ds.g[:, m:]
    sys = ComplexLinearSystem(Bimatrix(a1, a2), Bimatrix(b, b))
    return sys, CostWeights(ds.q0 / 2, r01)


def lift_state(ic: DelayInitialCondition) -> np.ndarray:
    """ x(0) = xi(0) + j xi(-1) """
    return ic.xi0 + 1j * ic.xim1


def realize_gain(gain: FeedbackGain) -> RealFeedback:
    """ Real feedback on [xi(k); xi(k-1)] producing [v1; v2] with v1 + j v2 = {K1, K2} x(k) """
    ks, kd = gain.k1 + gain.k2, gain.k1 - gain.k2
    return RealFeedback(np.block([[ks.real, -ks.imag],
                                  [kd.imag, kd.real]]))


@dataclass(frozen=True, eq=False)
class DelayLQRResult:
    """ Optimal real feedback of a delay system.
        feedback: RealFeedback      in the original input coordinates
        lqr: LQRResult              lifted complex problem (normalized inputs)
        system: ComplexLinearSystem lifted system
        weights: CostWeights        lifted weights
        l0: np.ndarray              input normalization, v = L0 v_hat
        padded: bool                slack input was added
    """

    feedback: RealFeedback
    lqr: LQRResult
    system: ComplexLinearSystem
    weights: CostWeights
    l0: np.ndarray
    padded: bool = False

    @property
    def solution(self):
        return self.lqr.solution

    @property
    def gain(self) -> FeedbackGain:
        return self.lqr.gain

    def jmin(self, ic: DelayInitialCondition) -> float:
        """ Minimum of sum_k xi^T Q0 xi + v^T R0 v """
        return self.jmin_lifted(ic) - float(ic.xim1 @ self.weights.q.real @ ic.xim1)

    def jmin_lifted(self, ic: DelayInitialCondition) -> float:
        return delay_lifted_cost(self, ic)


def delay_lifted_cost(res: DelayLQRResult, ic: DelayInitialCondition) -> float:
    """ Minimum cost of the lifted problem, Re(x0^H {P1, P2} x0) """
    if ic.n != res.system.n:
        raise DimensionMismatch(f'initial condition has length {ic.n}, expected {res.system.n}')
    return quadratic_form(res.solution.p, lift_state(ic))


class LiftedDelayProblem(NamedTuple):
    system: ComplexLinearSystem
    weights: CostWeights
    l0: np.ndarray
    padded: bool


def lift_delay_system(ds: DelaySystem, slack_weight=1.) -> LiftedDelayProblem:
    """ pad -> normalize -> lift """
    work = pad_odd_input(ds, slack_weight)
    l0, r01 = normalize_input_weight(work.r0)
    work = replace(work, g=work.g @ l0, r0=linalg.block_diag(r01, r01))
    sys, w = to_complex_system(work)
    return LiftedDelayProblem(sys, w, l0, ds.p % 2 == 1)


def solve_delay_lqr(ds: DelaySystem, opts: SolverOptions | None = None,
                    slack_weight=1.) -> DelayLQRResult:
    sys, w, l0, padded = lift_delay_system(ds, slack_weight)
    res = lqr_complex(sys, w, opts)
    f = l0 @ realize_gain(res.gain).f
    if padded:
        logger.debug('slack input row of the feedback has norm %.3e', np.linalg.norm(f[ds.p:]))
        f = f[:ds.p]
    logger.info('delay LQR solved: closed-loop spectral radius %.6f', res.radius)
    return DelayLQRResult(RealFeedback(f), res, sys, w, l0, padded)


def _check_ic(ds: DelaySystem, ic: DelayInitialCondition):
    if ic.n != ds.n:
        raise DimensionMismatch(f'initial condition has length {ic.n}, expected {ds.n}')


def propagate_delay(ds: DelaySystem, ic: DelayInitialCondition, inputs) -> DelayTrajectory:
    """ Open-loop delay recursion driven by a prescribed input sequence (horizon x p) """
    _check_ic(ds, ic)
    inputs = np.array(inputs, dtype=float).reshape(-1, ds.p)
    xi = np.empty((inputs.shape[0] + 1, ds.n))
    prev, cur = ic.xim1, ic.xi0
    xi[0] = cur
    for k, v in enumerate(inputs):
        prev, cur = cur, ds.a0 @ cur + ds.ad @ prev + ds.g @ v
        xi[k + 1] = cur
    return DelayTrajectory(ic.xim1, xi, inputs)


def delay_cost(ds: DelaySystem, traj: DelayTrajectory) -> float:
    """ sum_{k < horizon} xi(k)^T Q0 xi(k) + v(k)^T R0 v(k) """
    xs = traj.xi[:traj.horizon]
    vs = traj.inputs
    return float(np.einsum('ki,ij,kj->', xs, ds.q0, xs) + np.einsum('ki,ij,kj->', vs, ds.r0, vs))


def simulate_delay(ds: DelaySystem, f: RealFeedback, ic: DelayInitialCondition,
                   horizon: int) -> tuple[DelayTrajectory, float]:
    """ Closed-loop delay recursion and its truncated cost over k < horizon """
    if horizon < 0:
        raise ValueError(f'horizon must be >= 0, got {horizon}')
    _check_ic(ds, ic)
    if f.f.shape != (ds.p, 2 * ds.n):
        raise DimensionMismatch(f'feedback is {f.f.shape}, expected ({ds.p}, {2 * ds.n})')
    xi = np.empty((horizon + 1, ds.n))
    inputs = np.empty((horizon, ds.p))
    prev, cur = ic.xim1, ic.xi0
    xi[0] = cur
    for k in range(horizon):
        inputs[k] = f(cur, prev)
        prev, cur = cur, ds.a0 @ cur + ds.ad @ prev + ds.g @ inputs[k]
        xi[k + 1] = cur
    traj = DelayTrajectory(ic.xim1, xi, inputs)
    return traj, delay_cost(ds, traj)
