"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

Everything expensive in this package reduces to evaluating resolvent-type
quantities at many complex points: the frame Gram matrix

    B(z) = Pi* (I - z A*)^{-1} (S^{-1} Pi)

over circle grids (density extraction, Smirnov-class diagnostics), and
resolvent norms ||(I - z M)^{-1}|| over radius/angle fans (growth
diagnostics).  Both are batches of small dense complex solves, which numba
compiles to tight LAPACK loops without the (K, n, n) temporaries the
vectorized numpy path needs.

Backend selection:

* env var ``SNODELAB_BACKEND=numpy`` forces the fallback,
* ``SNODELAB_BACKEND=numba`` requires numba (ImportError otherwise),
* unset/empty: numba when importable, numpy otherwise.

``benchmarks/bench_kernels.py`` compares the two paths.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["BACKEND", "HAS_NUMBA", "gram_batch", "resolvent_norm_batch", "backend_info"]

_CHUNK = 512  # numpy path: points per batched-solve chunk, bounds temporaries

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    numba = None
    HAS_NUMBA = False


def _select_backend():
    choice = os.environ.get("SNODELAB_BACKEND", "").strip().lower()
    if choice in ("", "auto"):
        return "numba" if HAS_NUMBA else "numpy"
    if choice == "numba":
        if not HAS_NUMBA:
            raise ImportError("SNODELAB_BACKEND=numba but numba is not importable")
        return "numba"
    if choice == "numpy":
        return "numpy"
    raise ValueError(f"SNODELAB_BACKEND={choice!r}: expected 'numba', 'numpy' or 'auto'")


BACKEND = _select_backend()


def backend_info():
    """One-line description of the active kernel backend."""
    return f"backend={BACKEND} (numba available: {HAS_NUMBA})"


# -- pure numpy path ----------------------------------------------------------

def _gram_batch_numpy(a_star, c_mat, pi_h, zs):
    n = a_star.shape[0]
    q = c_mat.shape[1]
    rows = pi_h.shape[0]
    out = np.empty((zs.shape[0], rows, q), dtype=np.complex128)
    eye = np.eye(n, dtype=np.complex128)
    for lo in range(0, zs.shape[0], _CHUNK):
        hi = min(lo + _CHUNK, zs.shape[0])
        zc = zs[lo:hi]
        m = eye[None, :, :] - zc[:, None, None] * a_star[None, :, :]
        x = np.linalg.solve(m, np.broadcast_to(c_mat, (hi - lo, n, q)))
        out[lo:hi] = pi_h[None, :, :] @ x
    return out


def _resolvent_norm_batch_numpy(mat, zs):
    n = mat.shape[0]
    out = np.empty(zs.shape[0])
    eye = np.eye(n, dtype=np.complex128)
    for lo in range(0, zs.shape[0], _CHUNK):
        hi = min(lo + _CHUNK, zs.shape[0])
        m = eye[None, :, :] - zs[lo:hi, None, None] * mat[None, :, :]
        s = np.linalg.svd(m, compute_uv=False)
        out[lo:hi] = 1.0 / s[:, -1]
    return out


# -- numba path ---------------------------------------------------------------

if HAS_NUMBA:

    @numba.njit(cache=True)
    def _gram_batch_numba(a_star, c_mat, pi_h, zs):  # pragma: no cover - jitted
        n = a_star.shape[0]
        q = c_mat.shape[1]
        rows = pi_h.shape[0]
        out = np.empty((zs.shape[0], rows, q), dtype=np.complex128)
        for k in range(zs.shape[0]):
            m = -zs[k] * a_star
            for i in range(n):
                m[i, i] += 1.0
            x = np.linalg.solve(m, c_mat)
            out[k] = pi_h @ x
        return out

    @numba.njit(cache=True)
    def _resolvent_norm_batch_numba(mat, zs):  # pragma: no cover - jitted
        n = mat.shape[0]
        out = np.empty(zs.shape[0])
        for k in range(zs.shape[0]):
            m = -zs[k] * mat
            for i in range(n):
                m[i, i] += 1.0
            s = np.linalg.svd(m)[1]
            out[k] = 1.0 / s[n - 1]
        return out


def _prep(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


def gram_batch(a_star, c_mat, pi_h, zs, backend=None):
    """Batch of ``pi_h @ (I - z a_star)^{-1} @ c_mat`` over points ``zs``.

    Parameters
    ----------
    a_star : (n, n) complex matrix, typically A*.
    c_mat : (n, q) complex matrix, typically S^{-1} Pi (q = 2p) or S^{-1} Phi2.
    pi_h : (r, n) complex matrix, typically Pi* or Phi2*.
    zs : (K,) complex points; caller must keep them away from resolvent poles.
    backend : optional 'numba' / 'numpy' override (used by the benchmark).

    Returns
    -------
    (K, r, q) complex array.
    """
    zs = np.ascontiguousarray(np.atleast_1d(np.asarray(zs, dtype=np.complex128)))
    use = backend or BACKEND
    if use == "numba" and HAS_NUMBA:
        return _gram_batch_numba(_prep(a_star), _prep(c_mat), _prep(pi_h), zs)
    return _gram_batch_numpy(_prep(a_star), _prep(c_mat), _prep(pi_h), zs)


def resolvent_norm_batch(mat, zs, backend=None):
    """Spectral norms ``||(I - z mat)^{-1}||`` (= 1/sigma_min(I - z mat)) over ``zs``.

    Defaults to the numpy path regardless of the active backend: LAPACK's
    batched SVD beats a jitted per-point SVD loop at these matrix sizes (see
    the benchmark).  Pass backend="numba" to force the jitted loop.
    """
    zs = np.ascontiguousarray(np.atleast_1d(np.asarray(zs, dtype=np.complex128)))
    if backend == "numba" and HAS_NUMBA:
        return _resolvent_norm_batch_numba(_prep(mat), zs)
    if backend in (None, "numpy", "numba"):
        return _resolvent_norm_batch_numpy(_prep(mat), zs)
    raise ValueError(f"unknown backend {backend!r}")


def warmup():
    """Trigger JIT compilation of the default-path numba kernels on tiny inputs."""
    if BACKEND != "numba":
        return
    a = np.eye(2, dtype=np.complex128) * 0.1
    c = np.ones((2, 2), dtype=np.complex128)
    gram_batch(a, c, c.T, np.array([0.5j]))
