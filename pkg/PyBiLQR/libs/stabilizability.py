#! encoding = utf-8

""" Stabilizability rank tests (PBH form).

The rank of [lambda I - A, B] can only drop at eigenvalues of A, so the
"for all |lambda| >= 1" conditions reduce to a check at the eigenvalues of A
on or outside the unit circle.

    complex-valued:  rank [lambda I - E(A), E(B)] = 2n
    antilinear:      rank [lambda I - A2 A2^#, B2, A2 B2^#] = n
"""

import logging
import numpy as np
from scipy import linalg

from PyBiLQR.libs.bimatrix import embed
from PyBiLQR.libs.consts import BOUNDARY_TOL, RANK_TOL_PBH
from PyBiLQR.libs.system import ComplexLinearSystem, AntilinearSystem

logger = logging.getLogger(__name__)


def _first_uncontrollable_mode(a: np.ndarray, b: np.ndarray):
    """ Return the first eigenvalue of a with |lambda| >= 1 - BOUNDARY_TOL
        where [lambda I - a, b] loses row rank, or None.
    """
    n = a.shape[0]
    eye = np.eye(n)
    for lam in linalg.eigvals(a):
        if abs(lam) < 1 - BOUNDARY_TOL:
            continue
        pbh = np.hstack([lam * eye - a, b])
        sv = linalg.svdvals(pbh)
        rank = int(np.sum(sv > RANK_TOL_PBH * sv[0])) if sv[0] > 0 else 0
        if rank < n:
            logger.debug('mode %s fails the rank test: rank %d < %d', lam, rank, n)
            return complex(lam)
    return None


def find_unstable_mode_complex(sys: ComplexLinearSystem):
    """ Eigenvalue of E(A) that cannot be stabilized, or None """
    return _first_uncontrollable_mode(embed(sys.a), embed(sys.b))


def find_unstable_mode_antilinear(sys: AntilinearSystem):
    """ Eigenvalue of A2 A2^# that cannot be stabilized, or None """
    a2, b2 = sys.a2, sys.b2
    return _first_uncontrollable_mode(a2 @ a2.conj(), np.hstack([b2, a2 @ b2.conj()]))


def is_stabilizable_complex(sys: ComplexLinearSystem) -> bool:
    return find_unstable_mode_complex(sys) is None


def is_stabilizable_antilinear(sys: AntilinearSystem) -> bool:
    return find_unstable_mode_antilinear(sys) is None
