#! encoding = utf-8

""" Optimal gains, minimum cost and closed-loop certificates.

complex-valued system (bimatrix route)
    {K1, K2} = -{S1, S2}^-1 {B1, B2}^H {P1, P2} {A1, A2}
    Jmin(x0) = Re(x0^H {P1, P2} x0)

antilinear system, anti-Riccati route
    K1 = -(R + B2^H P_A^# B2)^-1 B2^H P_A^# A2,     Jmin(x0) = x0^H P_A x0

antilinear system, normal Riccati route
    K1 = -((R + B2^H Q^# B2)^-1 B2^H Q^# A2 + [0 I] (R_N + B_N^H P_N B_N)^-1 B_N^H P_N A_N)
    Jmin(x0) = x0^H P_N x0

The optimal antilinear controller is a normal feedback u = K1 x (K2 = 0).
"""

import logging
from dataclasses import dataclass, field
import numpy as np

from PyBiLQR.libs.bimatrix import inverse, quadratic_form
from PyBiLQR.libs.common import as_vector, rel_diff
from PyBiLQR.libs.errors import DimensionMismatch
from PyBiLQR.libs.riccati import (SolverOptions, RiccatiSolution, NormalData, build_normal_data,
                                  solve_bimatrix_riccati, solve_anti_riccati, solve_normal_riccati,
                                  _solve)
from PyBiLQR.libs.system import (ComplexLinearSystem, AntilinearSystem, CostWeights, FeedbackGain,
                                 closed_loop, spectral_radius)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LQRResult:
    """ Optimal controller of a complex-valued (or lifted antilinear) system
        gain: FeedbackGain          optimal {K1, K2}
        solution: RiccatiSolution   solution the gain is built from
        radius: float               spectral radius of the closed loop
        method: str                 'bimatrix', 'anti' or 'normal'
    """

    gain: FeedbackGain
    solution: RiccatiSolution
    radius: float
    method: str = 'bimatrix'

    @property
    def p(self):
        return self.solution.p

    @property
    def is_stable(self) -> bool:
        return self.radius < 1

    def jmin(self, x0) -> float:
        """ Minimum cost from initial state x0 """
        return quadratic_form(self.solution.p, x0)


def _certify(sys: ComplexLinearSystem, gain: FeedbackGain, label: str) -> float:
    radius = spectral_radius(closed_loop(sys, gain))
    if radius >= 1:
        logger.warning('%s closed loop is not asymptotically stable: spectral radius %.6f',
                       label, radius)
    return radius


def lqr_complex(sys: ComplexLinearSystem, w: CostWeights,
                opts: SolverOptions | None = None) -> LQRResult:
    sol = solve_bimatrix_riccati(sys, w, opts)
    k = -(inverse(sol.s) @ sys.b.H @ sol.p @ sys.a)
    gain = FeedbackGain(k)
    return LQRResult(gain, sol, _certify(sys, gain, 'bimatrix'), 'bimatrix')


def anti_gain(sys: AntilinearSystem, w: CostWeights, p_a: np.ndarray) -> np.ndarray:
    """ K1 = -(R + B2^H P_A^# B2)^-1 B2^H P_A^# A2 """
    a2, b2 = sys.a2, sys.b2
    pc = np.conj(p_a)
    return -_solve(w.r + b2.conj().T @ pc @ b2, b2.conj().T @ pc @ a2, 'R + B2^H P_A^# B2')


def normal_gain(sys: AntilinearSystem, w: CostWeights, nd: NormalData, p_n: np.ndarray) -> np.ndarray:
    """ K1 from the normal Riccati solution """
    a2, b2, m = sys.a2, sys.b2, sys.m
    qc = w.q.conj()
    first = _solve(w.r + b2.conj().T @ qc @ b2, b2.conj().T @ qc @ a2, 'R + B2^H Q^# B2')
    s_n = nd.r_n + nd.b_n.conj().T @ p_n @ nd.b_n
    second = _solve(s_n, nd.b_n.conj().T @ p_n @ nd.a_n, 'R_N + B_N^H P_N B_N')[m:]
    return -(first + second)


def lqr_antilinear_anti(sys: AntilinearSystem, w: CostWeights,
                        opts: SolverOptions | None = None) -> LQRResult:
    sol = solve_anti_riccati(sys, w, opts)
    gain = FeedbackGain.normal(anti_gain(sys, w, sol.p_matrix))
    return LQRResult(gain, sol, _certify(sys.lift(), gain, 'anti-Riccati'), 'anti')


def lqr_antilinear_normal(sys: AntilinearSystem, w: CostWeights,
                          opts: SolverOptions | None = None) -> LQRResult:
    nd = build_normal_data(sys, w)
    sol = solve_normal_riccati(nd, opts)
    gain = FeedbackGain.normal(normal_gain(sys, w, nd, sol.p_matrix))
    return LQRResult(gain, sol, _certify(sys.lift(), gain, 'normal Riccati'), 'normal')


@dataclass
class CrossValidationReport:
    """ Pairwise relative discrepancies between the three antilinear routes.
        Solution and gain discrepancies are relative to the bimatrix result;
        p2 and k2 are the norms of the second blocks relative to P1 and K1.
    """

    results: dict = field(default_factory=dict)
    discrepancies: dict = field(default_factory=dict)
    iterations: dict = field(default_factory=dict)
    jmin: dict = field(default_factory=dict)

    @property
    def max_discrepancy(self) -> float:
        return max(self.discrepancies.values(), default=0.)

    def table(self) -> list[tuple[str, float]]:
        return sorted(self.discrepancies.items())


def _rel_norm(part, ref) -> float:
    ref_norm = float(np.linalg.norm(ref))
    part_norm = float(np.linalg.norm(part))
    return part_norm / ref_norm if ref_norm > 0 else part_norm


def cross_validate_antilinear(sys: AntilinearSystem, w: CostWeights,
                              opts: SolverOptions | None = None, x0=None) -> CrossValidationReport:
    """ Run the bimatrix, anti-Riccati and normal Riccati routes and compare them """
    results = {'bimatrix': lqr_complex(sys.lift(), w, opts),
               'anti': lqr_antilinear_anti(sys, w, opts),
               'normal': lqr_antilinear_normal(sys, w, opts)}
    bim = results['bimatrix']
    p1, k1 = bim.p.p1, bim.gain.k1
    report = CrossValidationReport(results=results)
    d = report.discrepancies
    d['p1_vs_anti'] = rel_diff(p1, results['anti'].p.p1)
    d['p1_vs_normal'] = rel_diff(p1, results['normal'].p.p1)
    d['anti_vs_normal'] = rel_diff(results['anti'].p.p1, results['normal'].p.p1)
    d['p2'] = _rel_norm(bim.p.p2, p1)
    d['gain_bimatrix_vs_anti'] = rel_diff(k1, results['anti'].gain.k1)
    d['gain_bimatrix_vs_normal'] = rel_diff(k1, results['normal'].gain.k1)
    d['gain_anti_vs_normal'] = rel_diff(results['anti'].gain.k1, results['normal'].gain.k1)
    d['k2'] = _rel_norm(bim.gain.k2, k1)
    report.iterations = {name: res.solution.iterations for name, res in results.items()}
    if x0 is not None:
        x0 = as_vector(x0)
        if x0.shape[0] != sys.n:
            raise DimensionMismatch(f'x0 has length {x0.shape[0]}, expected {sys.n}')
        report.jmin = {name: res.jmin(x0) for name, res in results.items()}
        ref = report.jmin['bimatrix']
        scale = abs(ref) if ref else 1.
        d['jmin'] = max(abs(v - ref) for v in report.jmin.values()) / scale
    logger.info('cross validation: largest relative discrepancy %.3e', report.max_discrepancy)
    return report
