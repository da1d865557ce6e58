#! encoding = utf-8

""" Fixed-point Riccati solvers.

bimatrix Riccati (complex-valued systems), compact form
    P(0) = {Q, 0}
    P(k+1) = {Q, 0} + A^H (P(k)^-1 + G)^-1 A,      G = B {R, 0}^-1 B^H

anti-Riccati (antilinear systems)
    P_A(0) = Q
    P_A(k+1) = Q + A2^H (P_A(k)^-# + B2 R^-1 B2^H)^-1 A2

normal Riccati on the data (A_N, B_N, Q_N, R_N) built from an antilinear system
    P_N(0) = Q_N
    P_N(k+1) = Q_N + A_N^H (P_N(k)^-1 + B_N R_N^-1 B_N^H)^-1 A_N

All three sequences increase monotonically to the unique positive definite
solution when the system is stabilizable, and grow without bound otherwise.
"""

import logging
from dataclasses import dataclass
from itertools import islice
from typing import Callable, Iterator, NamedTuple
import numpy as np
from scipy import linalg

from PyBiLQR.libs.bimatrix import Bimatrix, HermitianBimatrix, bnorm, inverse
from PyBiLQR.libs.common import hermitian_part, herm_power, is_hermitian_pd
from PyBiLQR.libs.consts import DIVERGENCE_FACTOR, STALL_RTOL, PROGRESS_EVERY
from PyBiLQR.libs.errors import (Diverged, NotConvergent, NotPositiveDefinite,
                                 SingularMatrix, DimensionMismatch)
from PyBiLQR.libs.system import ComplexLinearSystem, AntilinearSystem, CostWeights

logger = logging.getLogger(__name__)


@dataclass
class SolverOptions:
    """ Fixed-point solver settings
    :argument
        tol: float                  relative step tolerance |P(k+1) - P(k)| / |P(k+1)|
        max_iter: int               iteration budget
        divergence_bound: float     iterate norm treated as divergence; None -> 1e12 * |P(0)|
        record_trace: bool          keep (iter, residual, step) rows
        record_iterates: bool       keep every iterate P(0), P(1), ...
        residual_factor: float      accepted residual is residual_factor * tol * |P|
        stall_window: int           iterations without step decrease before a stall is accepted
    """

    tol: float = 1e-12
    max_iter: int = 100000
    divergence_bound: float | None = None
    record_trace: bool = False
    record_iterates: bool = False
    residual_factor: float = 100.
    stall_window: int = 50

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f'tol must be > 0, got {self.tol}')
        if self.max_iter < 1:
            raise ValueError(f'max_iter must be >= 1, got {self.max_iter}')
        if self.divergence_bound is not None and not self.divergence_bound > 0:
            raise ValueError(f'divergence_bound must be > 0, got {self.divergence_bound}')


class TraceRow(NamedTuple):
    """ residual is |P(k+1) - P(k)|, which is the equation residual at P(k);
        step is the same quantity relative to |P(k+1)|
    """
    iteration: int
    residual: float
    step: float


@dataclass(frozen=True, eq=False)
class RiccatiSolution:
    """ Converged solution.
        p: {P1, P2} for the bimatrix solver, {P_A, 0} or {P_N, 0} for the others
        s: {S1, S2} = {R, 0} + B^H P B in the lifted bimatrix form
        gramian: {R1, R2} = B {R, 0}^-1 B^H in the lifted bimatrix form
        residual: residual of the equation the solver iterates on
    """

    p: HermitianBimatrix
    s: HermitianBimatrix
    gramian: HermitianBimatrix
    iterations: int
    residual: float
    method: str = 'bimatrix'
    trace: tuple[TraceRow, ...] | None = None
    iterates: tuple | None = None

    @property
    def p_matrix(self) -> np.ndarray:
        """ P_A or P_N for the antilinear solvers, P1 for the bimatrix solver """
        return self.p.p1


@dataclass(frozen=True, eq=False)
class NormalData:
    """ Normal-form data of an antilinear system
        A_N = A2^# (I - B2 (R + B2^H Q^# B2)^-1 B2^H Q^#) A2
        B_N = [B2^#, A2^# B2]
        Q_N = Q + A2^H (Q^-# + B2 R^-1 B2^H)^-1 A2
        R_N = diag(R^#, R + B2^H Q^# B2)
    """

    a_n: np.ndarray
    b_n: np.ndarray
    q_n: np.ndarray
    r_n: np.ndarray

    def __post_init__(self):
        for name in ('q_n', 'r_n'):
            h, _ = hermitian_part(getattr(self, name))
            if not is_hermitian_pd(h):
                raise NotPositiveDefinite(f'{name} is not Hermitian positive definite')
            object.__setattr__(self, name, h)

    @property
    def n(self) -> int:
        return self.a_n.shape[0]

    @property
    def m(self) -> int:
        """ input count of the antilinear system; B_N has 2m columns """
        return self.b_n.shape[1] // 2


class NMEResult(NamedTuple):
    """ X + A^H X^-# A = I """
    q0: np.ndarray
    a: np.ndarray
    x: np.ndarray
    residual: float


class IterationCounts(NamedTuple):
    anti_iters: int
    normal_iters: int


def _inv(m: np.ndarray, name='matrix') -> np.ndarray:
    try:
        out = linalg.inv(m)
    except (linalg.LinAlgError, ValueError) as err:
        raise SingularMatrix(f'{name} cannot be inverted: {err}') from err
    if not np.all(np.isfinite(out)):
        raise SingularMatrix(f'{name} is numerically singular')
    return out


def _solve(a: np.ndarray, b: np.ndarray, name='matrix') -> np.ndarray:
    try:
        return linalg.solve(a, b)
    except (linalg.LinAlgError, ValueError) as err:
        raise SingularMatrix(f'{name} cannot be inverted: {err}') from err


def _fro(m: np.ndarray) -> float:
    return float(np.linalg.norm(m))


# ---------------------------------------------------------------------------
# shared fixed-point driver
# ---------------------------------------------------------------------------

class _Converged(NamedTuple):
    value: object
    iterations: int
    trace: tuple | None
    iterates: tuple | None


def _iterate_to_fixed_point(iterates: Iterator, norm: Callable, opts: SolverOptions,
                            label: str) -> _Converged:
    """ Consume an iterate sequence until the relative step drops below opts.tol.
    :raises
        Diverged: iterate norm above the divergence bound (or not finite)
        NotConvergent: opts.max_iter steps without meeting the tolerance
    """
    prev = next(iterates)
    bound = opts.divergence_bound or DIVERGENCE_FACTOR * max(norm(prev), 1e-300)
    trace = [] if opts.record_trace else None
    kept = [prev] if opts.record_iterates else None
    best = np.inf
    stall = 0
    rel = np.inf
    for k in range(opts.max_iter):
        cur = next(iterates)
        size = norm(cur)
        if not np.isfinite(size) or size > bound:
            raise Diverged(f'{label} iteration diverged at step {k + 1}: '
                           f'norm {size:.3e} above bound {bound:.3e}',
                           iterations=k + 1, norm=size, step=rel)
        res = norm(cur - prev)
        rel = res / size if size > 0 else res
        if trace is not None:
            trace.append(TraceRow(k, res, rel))
        if kept is not None:
            kept.append(cur)
        if k % PROGRESS_EVERY == 0:
            logger.debug('%s iteration %d: residual %.3e, relative step %.3e', label, k, res, rel)
        if rel < opts.tol:
            return _Converged(cur, k + 1, _maybe_tuple(trace), _maybe_tuple(kept))
        if rel < best:
            best = rel
            stall = 0
        else:
            stall += 1
            if stall >= opts.stall_window and rel < STALL_RTOL:
                logger.debug('%s iteration stalled at relative step %.3e after %d steps; '
                             'accepted at the roundoff floor', label, rel, k + 1)
                return _Converged(cur, k + 1, _maybe_tuple(trace), _maybe_tuple(kept))
        prev = cur
    raise NotConvergent(f'{label} iteration did not reach tol {opts.tol:.1e} '
                        f'in {opts.max_iter} steps (last relative step {rel:.3e})',
                        iterations=opts.max_iter, norm=norm(prev), step=rel)


def _maybe_tuple(seq):
    return None if seq is None else tuple(seq)


def _check_residual(label: str, residual: float, scale: float, opts: SolverOptions):
    bound = opts.residual_factor * opts.tol * max(scale, 1.)
    if residual > bound:
        logger.warning('%s residual %.3e exceeds %.3e', label, residual, bound)


# ---------------------------------------------------------------------------
# bimatrix Riccati
# ---------------------------------------------------------------------------

def input_gramian(sys: ComplexLinearSystem, w: CostWeights) -> HermitianBimatrix:
    """ {R1, R2} = B {R, 0}^-1 B^H """
    return HermitianBimatrix.from_bimatrix(sys.b @ inverse(w.r_bimatrix) @ sys.b.H)


def bimatrix_riccati_step(p: Bimatrix, sys: ComplexLinearSystem, w: CostWeights,
                          gramian: Bimatrix | None = None) -> HermitianBimatrix:
    """ {Q, 0} + A^H (P^-1 + {R1, R2})^-1 A """
    g = input_gramian(sys, w) if gramian is None else gramian
    inner = inverse(inverse(p) + g)
    return HermitianBimatrix.from_bimatrix(w.q_bimatrix + sys.a.H @ inner @ sys.a)


def bimatrix_riccati_step_direct(p: Bimatrix, sys: ComplexLinearSystem,
                                 w: CostWeights) -> HermitianBimatrix:
    """ {Q, 0} + A^H P A - A^H P B {S1, S2}^-1 B^H P A, {S1, S2} = {R, 0} + B^H P B """
    a, b = sys.a, sys.b
    pa = p @ a
    s = w.r_bimatrix + b.H @ p @ b
    return HermitianBimatrix.from_bimatrix(
        w.q_bimatrix + a.H @ pa - a.H @ p @ b @ inverse(s) @ b.H @ pa)


def bimatrix_riccati_iterates(sys: ComplexLinearSystem, w: CostWeights) -> Iterator[HermitianBimatrix]:
    """ Endless sequence P(0) = {Q, 0}, P(1), ... """
    w.check_conform(sys.n, sys.m)
    g = input_gramian(sys, w)
    p = w.q_bimatrix
    while True:
        yield p
        p = bimatrix_riccati_step(p, sys, w, g)


def bimatrix_riccati_residual(p: Bimatrix, sys: ComplexLinearSystem, w: CostWeights) -> float:
    """ bnorm of {Q, 0} + A^H (P^-1 + {R1, R2})^-1 A - P """
    return bnorm(bimatrix_riccati_step(p, sys, w) - p)


def solve_bimatrix_riccati(sys: ComplexLinearSystem, w: CostWeights,
                           opts: SolverOptions | None = None) -> RiccatiSolution:
    opts = opts or SolverOptions()
    w.check_conform(sys.n, sys.m)
    out = _iterate_to_fixed_point(bimatrix_riccati_iterates(sys, w), bnorm, opts, 'bimatrix Riccati')
    p = out.value
    g = input_gramian(sys, w)
    residual = bnorm(bimatrix_riccati_step(p, sys, w, g) - p)
    _check_residual('bimatrix Riccati', residual, bnorm(p), opts)
    s = HermitianBimatrix.from_bimatrix(w.r_bimatrix + sys.b.H @ p @ sys.b)
    logger.info('bimatrix Riccati converged in %d iterations, residual %.3e', out.iterations, residual)
    return RiccatiSolution(p, s, g, out.iterations, residual, 'bimatrix', out.trace, out.iterates)


# ---------------------------------------------------------------------------
# anti-Riccati
# ---------------------------------------------------------------------------

def _antilinear_gramian(sys: AntilinearSystem, w: CostWeights) -> np.ndarray:
    """ B2 R^-1 B2^H """
    b2 = sys.b2
    return hermitian_part(b2 @ _solve(w.r, b2.conj().T, 'R'))[0]


def _lifted(m: np.ndarray) -> HermitianBimatrix:
    return HermitianBimatrix(m, np.zeros_like(m))


def anti_riccati_step(p_a: np.ndarray, sys: AntilinearSystem, w: CostWeights,
                      gramian: np.ndarray | None = None) -> np.ndarray:
    """ Q + A2^H (P_A^-# + B2 R^-1 B2^H)^-1 A2 """
    g = _antilinear_gramian(sys, w) if gramian is None else gramian
    a2 = sys.a2
    inner = _inv(_inv(p_a, 'P_A').conj() + g, 'P_A^-# + B2 R^-1 B2^H')
    return hermitian_part(w.q + a2.conj().T @ inner @ a2)[0]


def anti_riccati_iterates(sys: AntilinearSystem, w: CostWeights) -> Iterator[np.ndarray]:
    w.check_conform(sys.n, sys.m)
    g = _antilinear_gramian(sys, w)
    p = np.array(w.q)
    while True:
        yield p
        p = anti_riccati_step(p, sys, w, g)


def anti_riccati_residual(p_a: np.ndarray, sys: AntilinearSystem, w: CostWeights) -> float:
    """ |A2^H P^# A2 - A2^H P^# B2 (R + B2^H P^# B2)^-1 B2^H P^# A2 - P + Q|_F """
    a2, b2 = sys.a2, sys.b2
    pc = np.conj(p_a)
    s = w.r + b2.conj().T @ pc @ b2
    lhs = a2.conj().T @ pc @ a2 - a2.conj().T @ pc @ b2 @ _solve(s, b2.conj().T @ pc @ a2, 'R + B2^H P^# B2')
    return _fro(lhs - p_a + w.q)


def solve_anti_riccati(sys: AntilinearSystem, w: CostWeights,
                       opts: SolverOptions | None = None) -> RiccatiSolution:
    opts = opts or SolverOptions()
    w.check_conform(sys.n, sys.m)
    out = _iterate_to_fixed_point(anti_riccati_iterates(sys, w), _fro, opts, 'anti-Riccati')
    p_a = out.value
    residual = anti_riccati_residual(p_a, sys, w)
    _check_residual('anti-Riccati', residual, _fro(p_a), opts)
    b2 = sys.b2
    s = w.r + b2.conj().T @ p_a.conj() @ b2
    logger.info('anti-Riccati converged in %d iterations, residual %.3e', out.iterations, residual)
    return RiccatiSolution(_lifted(p_a), _lifted(s), _lifted(_antilinear_gramian(sys, w).conj()),
                           out.iterations, residual, 'anti', out.trace, out.iterates)


# ---------------------------------------------------------------------------
# normal Riccati
# ---------------------------------------------------------------------------

def build_normal_data(sys: AntilinearSystem, w: CostWeights) -> NormalData:
    w.check_conform(sys.n, sys.m)
    a2, b2, q, r = sys.a2, sys.b2, w.q, w.r
    n = sys.n
    qc = q.conj()
    s0 = r + b2.conj().T @ qc @ b2
    a_n = a2.conj() @ (np.eye(n) - b2 @ _solve(s0, b2.conj().T @ qc, 'R + B2^H Q^# B2')) @ a2
    b_n = np.hstack([b2.conj(), a2.conj() @ b2])
    q_n = q + a2.conj().T @ _inv(_inv(q, 'Q').conj() + _antilinear_gramian(sys, w), 'Q^-# + B2 R^-1 B2^H') @ a2
    r_n = linalg.block_diag(r.conj(), s0)
    return NormalData(a_n, b_n, q_n, r_n)


def _normal_gramian(nd: NormalData) -> np.ndarray:
    """ B_N R_N^-1 B_N^H """
    return hermitian_part(nd.b_n @ _solve(nd.r_n, nd.b_n.conj().T, 'R_N'))[0]


def normal_riccati_step(p_n: np.ndarray, nd: NormalData, gramian: np.ndarray | None = None) -> np.ndarray:
    """ Q_N + A_N^H (P_N^-1 + B_N R_N^-1 B_N^H)^-1 A_N """
    g = _normal_gramian(nd) if gramian is None else gramian
    inner = _inv(_inv(p_n, 'P_N') + g, 'P_N^-1 + B_N R_N^-1 B_N^H')
    return hermitian_part(nd.q_n + nd.a_n.conj().T @ inner @ nd.a_n)[0]


def normal_riccati_iterates(nd: NormalData) -> Iterator[np.ndarray]:
    g = _normal_gramian(nd)
    p = np.array(nd.q_n)
    while True:
        yield p
        p = normal_riccati_step(p, nd, g)


def normal_riccati_residual(p_n: np.ndarray, nd: NormalData) -> float:
    """ |A_N^H P A_N - A_N^H P B_N (R_N + B_N^H P B_N)^-1 B_N^H P A_N - P + Q_N|_F """
    a, b = nd.a_n, nd.b_n
    s = nd.r_n + b.conj().T @ p_n @ b
    lhs = a.conj().T @ p_n @ a - a.conj().T @ p_n @ b @ _solve(s, b.conj().T @ p_n @ a, 'R_N + B_N^H P B_N')
    return _fro(lhs - p_n + nd.q_n)


def solve_normal_riccati(nd: NormalData, opts: SolverOptions | None = None) -> RiccatiSolution:
    opts = opts or SolverOptions()
    if nd.b_n.shape[0] != nd.n or nd.r_n.shape[0] != nd.b_n.shape[1] or nd.q_n.shape[0] != nd.n:
        raise DimensionMismatch('normal data blocks do not conform')
    out = _iterate_to_fixed_point(normal_riccati_iterates(nd), _fro, opts, 'normal Riccati')
    p_n = out.value
    residual = normal_riccati_residual(p_n, nd)
    _check_residual('normal Riccati', residual, _fro(p_n), opts)
    s = nd.r_n + nd.b_n.conj().T @ p_n @ nd.b_n
    logger.info('normal Riccati converged in %d iterations, residual %.3e', out.iterations, residual)
    return RiccatiSolution(_lifted(p_n), _lifted(s), _lifted(_normal_gramian(nd)),
                           out.iterations, residual, 'normal', out.trace, out.iterates)


# ---------------------------------------------------------------------------
# nonlinear matrix equation X + A^H X^-# A = I
# ---------------------------------------------------------------------------

def nme_transform(sys: AntilinearSystem, w: CostWeights, p_a: np.ndarray) -> NMEResult:
    """ Map an anti-Riccati solution P_A to a solution X of X + A^H X^-# A = I
        Q0 = Q^-1 + (A2 Q^-1 A2^H)^# + (B2 R^-1 B2^H)^#
        A  = Q0^-#/2 A2 Q^-1 Q0^-1/2
        X  = Q0^-1/2 (P_A^-1 + (A2 Q^-1 A2^H)^# + (B2 R^-1 B2^H)^#) Q0^-1/2
    """
    w.check_conform(sys.n, sys.m)
    a2 = sys.a2
    q_inv = _inv(w.q, 'Q')
    g_a = (a2 @ q_inv @ a2.conj().T).conj()
    g_b = _antilinear_gramian(sys, w).conj()
    q0 = hermitian_part(q_inv + g_a + g_b)[0]
    q0_mhalf = herm_power(q0, -0.5, 'Q0')
    a = q0_mhalf.conj() @ a2 @ q_inv @ q0_mhalf
    x = hermitian_part(q0_mhalf @ (_inv(p_a, 'P_A') + g_a + g_b) @ q0_mhalf)[0]
    if not is_hermitian_pd(x):
        raise NotPositiveDefinite('X is not Hermitian positive definite')
    residual = _fro(x + a.conj().T @ _inv(x, 'X').conj() @ a - np.eye(sys.n))
    logger.debug('matrix equation residual %.3e', residual)
    return NMEResult(q0, a, x, residual)


def compare_iteration_counts(sys: AntilinearSystem, w: CostWeights,
                             opts: SolverOptions | None = None) -> IterationCounts:
    """ Iterations of the anti-Riccati and normal Riccati solvers at the same tolerance """
    anti = solve_anti_riccati(sys, w, opts)
    normal = solve_normal_riccati(build_normal_data(sys, w), opts)
    return IterationCounts(anti.iterations, normal.iterations)


def nth_iterate(iterates: Iterator, k: int):
    """ Iterate number k of an iterate sequence """
    return next(islice(iterates, k, None))
