#! encoding = utf-8
""" Constants for PyBiLQR """
from importlib.resources import files

VERSION = '1.0.0'

# structural symmetry check, relative to max(1, bnorm)
STRUCT_TOL = 1e-10
# PD threshold on the smallest embedding eigenvalue, relative to bnorm
PD_TOL = 1e-10
# psd_leq threshold on the smallest eigenvalue of the difference, relative to max(1, bnorm)
PSD_TOL = 1e-9
# smallest / largest singular value below which an embedding counts as singular
RANK_TOL_INV = 1e-12
# stabilizability rank test and unit circle boundary
RANK_TOL_PBH = 1e-10
BOUNDARY_TOL = 1e-9

# fixed-point solvers: default divergence bound is DIVERGENCE_FACTOR * norm of the first
# iterate; a stalled iteration is accepted once its relative step is below STALL_RTOL
DIVERGENCE_FACTOR = 1e12
STALL_RTOL = 1e-9
PROGRESS_EVERY = 1000

# adaptive cost horizon
COST_RTOL = 1e-9
COST_MAX_HORIZON = 100000

# exit codes of the command line tool
EXIT_CODE = {'ok': 0,
             'input': 2,
             'not_stabilizable': 3,
             'not_convergent': 4,
             }

KINDS = ('complex', 'antilinear', 'delay')
METHODS = ('bimatrix', 'anti', 'normal', 'all')

DATA_DIR = files('PyBiLQR.data')
