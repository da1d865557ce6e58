#! encoding = utf-8

""" Bimatrix algebra.

A bimatrix {M1, M2} is an ordered pair of equally sized complex matrices that
acts on a complex vector as

    {M1, M2} x = M1 x + M2^# x^#

where ^# is elementwise conjugation. The map is real-linear but not
complex-linear. Every bimatrix has the faithful embedding

    E({M1, M2}) = [[M1,  M2^#],
                   [M2,  M1^#]]

acting on [x; x^#]. Addition, composition, conjugate transpose and inverse
all commute with the embedding, so definiteness, order, norms and inverses
are defined (and computed) through it.
"""

from dataclasses import dataclass, field
import numpy as np
from scipy import linalg

from PyBiLQR.libs.common import as_matrix, as_vector, frozen, hermitian_part, symmetric_part
from PyBiLQR.libs.consts import STRUCT_TOL, PD_TOL, PSD_TOL, RANK_TOL_INV
from PyBiLQR.libs.errors import DimensionMismatch, SingularBimatrix, StructureViolation


@dataclass(frozen=True, eq=False)
class Bimatrix:
    """ Immutable bimatrix {m1, m2}. Both blocks are n x p complex arrays. """

    m1: np.ndarray
    m2: np.ndarray

    def __post_init__(self):
        m1 = as_matrix(self.m1)
        m2 = as_matrix(self.m2)
        if m1.shape != m2.shape:
            raise DimensionMismatch(f'bimatrix blocks differ in shape: {m1.shape} vs {m2.shape}')
        object.__setattr__(self, 'm1', frozen(m1))
        object.__setattr__(self, 'm2', frozen(m2))

    @classmethod
    def identity(cls, n: int):
        return cls(np.eye(n), np.zeros((n, n)))

    @classmethod
    def zeros(cls, n: int, p: int):
        return cls(np.zeros((n, p)), np.zeros((n, p)))

    @classmethod
    def normal(cls, m):
        """ {m, 0}: the ordinary linear map x -> m x """
        m = as_matrix(m)
        return cls(m, np.zeros_like(m))

    @classmethod
    def from_embedding(cls, e: np.ndarray):
        """ Read the bimatrix back from the left block column of its embedding """
        n2, p2 = e.shape
        if n2 % 2 or p2 % 2:
            raise DimensionMismatch(f'embedding shape {e.shape} is not even')
        n, p = n2 // 2, p2 // 2
        return cls(e[:n, :p], e[n:, :p])

    @property
    def shape(self) -> tuple[int, int]:
        return self.m1.shape

    @property
    def H(self):
        return conj_transpose(self)

    def __add__(self, other):
        if not isinstance(other, Bimatrix):
            return NotImplemented
        _check_same_shape(self, other)
        return Bimatrix(self.m1 + other.m1, self.m2 + other.m2)

    def __sub__(self, other):
        if not isinstance(other, Bimatrix):
            return NotImplemented
        _check_same_shape(self, other)
        return Bimatrix(self.m1 - other.m1, self.m2 - other.m2)

    def __neg__(self):
        return Bimatrix(-self.m1, -self.m2)

    def __mul__(self, scalar):
        """ c {m1, m2} = {c m1, c^# m2} """
        if not np.isscalar(scalar):
            return NotImplemented
        return Bimatrix(scalar * self.m1, np.conj(scalar) * self.m2)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if not isinstance(other, Bimatrix):
            return NotImplemented
        return multiply(self, other)

    def __repr__(self):
        return f'{type(self).__name__}(m1={self.m1!r}, m2={self.m2!r})'


@dataclass(frozen=True, eq=False)
class HermitianBimatrix(Bimatrix):
    """ Bimatrix equal to its own conjugate transpose: p1 = p1^H, p2 = p2^T.
        Blocks are re-symmetrized on construction; the discarded part is kept
        in `correction` and must stay below STRUCT_TOL relative to max(1, bnorm).
    """

    correction: float = field(default=0., init=False)

    def __post_init__(self):
        super().__post_init__()
        if self.m1.shape[0] != self.m1.shape[1]:
            raise DimensionMismatch(f'Hermitian bimatrix must be square, got {self.m1.shape}')
        p1, c1 = hermitian_part(self.m1)
        p2, c2 = symmetric_part(self.m2)
        correction = float(np.hypot(c1, c2))
        scale = max(1., bnorm(self))
        if correction > STRUCT_TOL * scale:
            raise StructureViolation(
                f'bimatrix is not Hermitian: deviation {correction:.3e} '
                f'(p1 {c1:.3e}, p2 {c2:.3e}) at scale {scale:.3e}', correction)
        object.__setattr__(self, 'm1', frozen(p1))
        object.__setattr__(self, 'm2', frozen(p2))
        object.__setattr__(self, 'correction', correction)

    @classmethod
    def from_bimatrix(cls, x: Bimatrix):
        return cls(x.m1, x.m2)

    @property
    def p1(self) -> np.ndarray:
        return self.m1

    @property
    def p2(self) -> np.ndarray:
        return self.m2


def _check_same_shape(x: Bimatrix, y: Bimatrix):
    if x.shape != y.shape:
        raise DimensionMismatch(f'bimatrix shapes differ: {x.shape} vs {y.shape}')


def embed(x: Bimatrix) -> np.ndarray:
    """ 2n x 2p embedding [[m1, m2^#], [m2, m1^#]] """
    return np.block([[x.m1, x.m2.conj()],
                     [x.m2, x.m1.conj()]])


def apply(x: Bimatrix, v) -> np.ndarray:
    """ {m1, m2} v = m1 v + m2^# v^# """
    v = as_vector(v)
    if v.shape[0] != x.shape[1]:
        raise DimensionMismatch(f'cannot apply {x.shape} bimatrix to vector of length {v.shape[0]}')
    return x.m1 @ v + x.m2.conj() @ v.conj()


def multiply(x: Bimatrix, y: Bimatrix) -> Bimatrix:
    """ Composition: apply(multiply(x, y), v) == apply(x, apply(y, v)) """
    if x.shape[1] != y.shape[0]:
        raise DimensionMismatch(f'cannot multiply {x.shape} by {y.shape}')
    c1 = x.m1 @ y.m1 + x.m2.conj() @ y.m2
    c2 = x.m1.conj() @ y.m2 + x.m2 @ y.m1
    return Bimatrix(c1, c2)


def conj_transpose(x: Bimatrix) -> Bimatrix:
    """ {m1, m2}^H = {m1^H, m2^T} """
    return Bimatrix(x.m1.conj().T, x.m2.T)


def inverse(x: Bimatrix) -> Bimatrix:
    """ Inverse through the embedding. Raises SingularBimatrix. """
    n, p = x.shape
    if n != p:
        raise DimensionMismatch(f'cannot invert non-square bimatrix {x.shape}')
    e = embed(x)
    sv = linalg.svdvals(e)
    if sv[0] == 0 or sv[-1] < RANK_TOL_INV * sv[0]:
        raise SingularBimatrix(f'bimatrix embedding is singular '
                               f'(singular values {sv[-1]:.3e} / {sv[0]:.3e})')
    return Bimatrix.from_embedding(linalg.inv(e))


def bnorm(x: Bimatrix) -> float:
    """ Frobenius norm of the embedding """
    return float(np.sqrt(2. * (np.linalg.norm(x.m1) ** 2 + np.linalg.norm(x.m2) ** 2)))


def _as_hermitian(p) -> HermitianBimatrix:
    if isinstance(p, HermitianBimatrix):
        return p
    return HermitianBimatrix.from_bimatrix(p)


def is_positive_definite(p: Bimatrix) -> bool:
    """ True iff embed(p) is Hermitian positive definite.
        Raises StructureViolation if p is not a Hermitian bimatrix.
    """
    p = _as_hermitian(p)
    w = linalg.eigvalsh(embed(p))
    return bool(w[0] > PD_TOL * bnorm(p))


def psd_leq(x: Bimatrix, y: Bimatrix, tol=PSD_TOL) -> bool:
    """ x <= y in the Loewner order of the embeddings """
    x = _as_hermitian(x)
    y = _as_hermitian(y)
    _check_same_shape(x, y)
    d, _ = hermitian_part(embed(y) - embed(x))
    w = linalg.eigvalsh(d)
    return bool(w[0] >= -tol * max(1., bnorm(x), bnorm(y)))


def quadratic_form(p: Bimatrix, x) -> float:
    """ Re(x^H {p1, p2} x) = Re(x^H p1 x + x^H p2^# x^#) """
    x = as_vector(x)
    if x.shape[0] != p.shape[1] or p.shape[0] != p.shape[1]:
        raise DimensionMismatch(f'cannot evaluate {p.shape} form at vector of length {x.shape[0]}')
    return float(np.real(np.vdot(x, p.m1 @ x) + np.vdot(x, p.m2.conj() @ x.conj())))
