#! encoding = utf-8

""" Common library functions """

from datetime import timedelta
import numpy as np
from scipy import linalg

from PyBiLQR.libs.errors import NotPositiveDefinite, DimensionMismatch


def format_timedelta(td: timedelta) -> str:
    days = td.days
    hours, remainder = divmod(td.seconds, 3600)
    minutes, seconds = divmod(remainder, 60)
    parts = []
    if days > 0:
        parts.append(f"{days} day{'s' if days > 1 else ''}")
    if hours > 0:
        parts.append(f"{hours} h")
    if minutes > 0:
        parts.append(f"{minutes} m")
    parts.append(f"{seconds + td.microseconds * 1e-6:.3f} s")
    return ' '.join(parts)


def as_matrix(value, dtype=complex) -> np.ndarray:
    """ Convert to a 2D array. Scalars become 1x1, vectors become columns. """
    m = np.array(value, dtype=dtype)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    elif m.ndim == 1:
        m = m.reshape(-1, 1)
    elif m.ndim > 2:
        raise DimensionMismatch(f'expected a matrix, got {m.ndim} dimensions')
    return m


def as_vector(value, dtype=complex) -> np.ndarray:
    """ Convert to a 1D array """
    v = np.array(value, dtype=dtype)
    if v.ndim == 0:
        v = v.reshape(1)
    elif v.ndim == 2 and 1 in v.shape:
        v = v.ravel()
    elif v.ndim != 1:
        raise DimensionMismatch(f'expected a vector, got shape {v.shape}')
    return v


def frozen(m: np.ndarray) -> np.ndarray:
    """ Mark array read-only and return it """
    m.setflags(write=False)
    return m


def hermitian_part(m: np.ndarray) -> tuple[np.ndarray, float]:
    """ Return (m + m^H)/2 and the Frobenius size of the discarded part """
    h = (m + m.conj().T) / 2
    return h, float(np.linalg.norm(m - h))


def symmetric_part(m: np.ndarray) -> tuple[np.ndarray, float]:
    """ Return (m + m^T)/2 and the Frobenius size of the discarded part """
    s = (m + m.T) / 2
    return s, float(np.linalg.norm(m - s))


def is_hermitian(m: np.ndarray, rtol=1e-10) -> bool:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    _, corr = hermitian_part(m)
    return corr <= rtol * max(1., float(np.linalg.norm(m)))


def is_hermitian_pd(m: np.ndarray, rtol=1e-10) -> bool:
    """ Hermitian and strictly positive definite """
    if not is_hermitian(m, rtol):
        return False
    h, _ = hermitian_part(m)
    return float(linalg.eigvalsh(h)[0]) > rtol * max(1., float(np.linalg.norm(h)))


def herm_power(m: np.ndarray, power: float, name='matrix') -> np.ndarray:
    """ Principal power of a Hermitian positive definite matrix via eigh.
        The result is Hermitian up to roundoff.
    """
    h, _ = hermitian_part(np.asarray(m))
    w, v = linalg.eigh(h)
    if w[0] <= 0:
        raise NotPositiveDefinite(f'{name} is not positive definite '
                                  f'(smallest eigenvalue {w[0]:.3e})')
    return (v * w ** power) @ v.conj().T


def rel_diff(a, b) -> float:
    """ Frobenius distance of a and b, relative to the norm of a when a != 0 """
    d = float(np.linalg.norm(np.asarray(a) - np.asarray(b)))
    ref = float(np.linalg.norm(a))
    return d / ref if ref > 0 else d
