"""Small dense complex linear-algebra helpers used throughout the package.

All matrices are plain ``numpy.ndarray`` with dtype complex128.  Solves go
through LAPACK's pivoted routines (``numpy.linalg.solve`` / ``lstsq``);
explicit inverses appear only where the returned object *is* an inverse.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch

__all__ = [
    "as_cmatrix",
    "herm",
    "imag_part",
    "real_part",
    "lambda_min",
    "lambda_max",
    "sigma_min",
    "spectral_norm",
    "require_finite",
    "to_reim",
    "from_reim",
]


def as_cmatrix(a, shape=None, name="matrix"):
    """Coerce input to a finite complex128 2-D array, optionally shape-checked."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise DimensionMismatch(f"{name}: expected 2-D array, got ndim={m.ndim}")
    if shape is not None and m.shape != tuple(shape):
        raise DimensionMismatch(f"{name}: expected shape {tuple(shape)}, got {m.shape}")
    require_finite(m, name)
    return m


def require_finite(m, name="matrix"):
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains NaN or Inf entries")


def herm(m):
    """Hermitian part (M + M*)/2."""
    return 0.5 * (m + m.conj().T)


def imag_part(m):
    """Matrix imaginary part (M - M*)/(2i); Hermitian by construction."""
    return (m - m.conj().T) / 2j


def real_part(m):
    """Matrix real part (M + M*)/2; alias of :func:`herm` for readability."""
    return herm(m)


def lambda_min(m):
    """Smallest eigenvalue of the Hermitianized matrix."""
    return float(np.linalg.eigvalsh(herm(m))[0])


def lambda_max(m):
    """Largest eigenvalue of the Hermitianized matrix."""
    return float(np.linalg.eigvalsh(herm(m))[-1])


def sigma_min(m):
    """Smallest singular value."""
    return float(np.linalg.svd(m, compute_uv=False)[-1])


def spectral_norm(m):
    """Largest singular value."""
    return float(np.linalg.norm(m, 2))


# -- JSON wire format: complex scalar as [re, im], matrix as nested rows ------

def to_reim(m):
    """Complex matrix -> row-major nested lists of [re, im] pairs."""
    m = np.atleast_2d(np.asarray(m, dtype=np.complex128))
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def from_reim(rows, name="matrix"):
    """Nested [re, im] lists -> complex matrix."""
    arr = np.asarray(rows, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise DimensionMismatch(f"{name}: expected rows of [re, im] pairs")
    return (arr[..., 0] + 1j * arr[..., 1]).astype(np.complex128)
