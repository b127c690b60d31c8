"""Transfer matrix, frame evaluation and the associated kernel identities.

For an S-node {A, S, Pi} the frame and the transfer matrix are

    Frame(S, z) = I - i z Pi* (I - z A*)^{-1} S^{-1} Pi J  =  w_A(1/conj(z))*,
    w_A(lam)    = I - i J Pi* S^{-1} (A - lam I)^{-1} Pi,

meromorphic with poles at 1/conj(lambda) resp. the eigenvalues of A.  The
kernel identity

    Frame(z) J Frame(conj(lam))* = J - i (z - lam) Pi* (I-zA*)^{-1} S^{-1} (I-lam A)^{-1} Pi

drives everything downstream: the J-inequalities on either half-plane, the
rho kernel, the explicit inverse J Frame(conj(z))* J, and the first-block-row
representation used by the Smirnov-class diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backends
from .errors import (
    CBlockSingular,
    FramePole,
    RealAxisPoint,
    ResolventSingular,
)
from .linalg import herm, lambda_max, lambda_min, sigma_min, spectral_norm
from .snode import POLE_REFUSE_RADIUS, DEFAULT_TOLERANCES

__all__ = [
    "FrameSample",
    "RhoValue",
    "JReport",
    "is_frame_pole",
    "eval_transfer",
    "eval_frame",
    "frame_grid",
    "kernel_identity_residual",
    "check_j_inequality",
    "rho",
    "inverse_frame",
    "calV",
    "upsilon",
]


@dataclass(frozen=True)
class FrameSample:
    """Frame value at one point with p x p block views; ``value`` is None at poles."""

    z: complex
    value: np.ndarray
    is_pole: bool

    def _block(self, i, j):
        if self.is_pole:
            raise FramePole(f"frame has a pole at z={self.z}")
        p = self.value.shape[0] // 2
        return self.value[i * p:(i + 1) * p, j * p:(j + 1) * p]

    @property
    def A11(self):
        return self._block(0, 0)

    @property
    def A12(self):
        return self._block(0, 1)

    @property
    def A21(self):
        return self._block(1, 0)

    @property
    def A22(self):
        return self._block(1, 1)


@dataclass(frozen=True)
class RhoValue:
    z: complex
    lam: complex
    value: np.ndarray


@dataclass(frozen=True)
class JReport:
    """J-form and block-positivity eigenvalue bounds at one point."""

    z: complex
    lmin_jform: float  # lambda_min(Frame* J Frame - J)
    lmin_block: float  # lambda_min(A21 A22* + A22 A21*)
    lmax_block: float
    scale: float
    passed: bool


def _pole_sigma_threshold(node, z, tolerances=DEFAULT_TOLERANCES):
    return tolerances.pole_sigma * (1.0 + abs(z) * spectral_norm(node.A))


def is_frame_pole(node, z, tolerances=DEFAULT_TOLERANCES):
    """Scale-aware rank test: sigma_min(I - z A*) below threshold."""
    m = np.eye(node.n) - z * node.A.conj().T
    return sigma_min(m) < _pole_sigma_threshold(node, z, tolerances)


def _near_pole(node, z, conjugate=False):
    """z within refusal distance of a pole of (I - z A*)^{-1} (or its conjugate set)."""
    poles = node.pole_points()
    if not poles.size:
        return False
    if conjugate:
        poles = poles.conj()
    return bool(np.min(np.abs(poles - z)) < POLE_REFUSE_RADIUS)


def _refuse_near_pole(node, z):
    if _near_pole(node, z):
        raise FramePole(f"z={z} within {POLE_REFUSE_RADIUS:g} of a frame pole")


def _sinv_pi(node):
    return np.linalg.solve(node.S, node.Pi)


def _resolvent_chain(node, z, lam, right):
    """(I - z A*)^{-1} S^{-1} (I - lam A)^{-1} @ right, via two pivoted solves."""
    n = node.n
    y = np.linalg.solve(np.eye(n) - lam * node.A, right)
    w = np.linalg.solve(node.S, y)
    return np.linalg.solve(np.eye(n) - z * node.A.conj().T, w)


def eval_transfer(node, lam):
    """Transfer matrix w_A(lam) = I - i J Pi* S^{-1} (A - lam I)^{-1} Pi."""
    eigs = np.linalg.eigvals(node.A)
    if eigs.size and np.min(np.abs(eigs - lam)) < POLE_REFUSE_RADIUS:
        raise ResolventSingular(f"lam={lam} within refusal distance of spec(A)")
    m = node.A - lam * np.eye(node.n)
    if sigma_min(m) < 1e-12 * (1.0 + abs(lam) + spectral_norm(node.A)):
        raise ResolventSingular(f"A - lam I singular at lam={lam}")
    J = node.constants().J
    x = np.linalg.solve(m, node.Pi)
    w = np.linalg.solve(node.S, x)
    return np.eye(2 * node.p) - 1j * J @ node.Pi.conj().T @ w


def eval_frame(node, z, tolerances=DEFAULT_TOLERANCES):
    """Frame sample at z; never raises, poles (and near-pole points) are flagged."""
    if is_frame_pole(node, z, tolerances) or _near_pole(node, z):
        return FrameSample(z=complex(z), value=None, is_pole=True)
    n = node.n
    x = np.linalg.solve(np.eye(n) - z * node.A.conj().T, _sinv_pi(node))
    J = node.constants().J
    value = np.eye(2 * node.p) - 1j * z * node.Pi.conj().T @ x @ J
    return FrameSample(z=complex(z), value=value, is_pole=False)


def frame_grid(node, zs):
    """Frame values over a batch of points via the kernel backend.

    Returns ``(values, pole_mask)``: values has shape (K, 2p, 2p) and rows
    within the pole refusal radius are NaN-filled with the mask set.
    """
    zs = np.atleast_1d(np.asarray(zs, dtype=np.complex128))
    poles = node.pole_points()
    if poles.size:
        dist = np.abs(zs[:, None] - poles[None, :]).min(axis=1)
        mask = dist < POLE_REFUSE_RADIUS
    else:
        mask = np.zeros(zs.shape, dtype=bool)

    grams = backends.gram_batch(
        node.A.conj().T, _sinv_pi(node), node.Pi.conj().T, zs[~mask]
    )
    J = node.constants().J
    eye = np.eye(2 * node.p, dtype=np.complex128)
    vals = np.full((zs.shape[0], 2 * node.p, 2 * node.p), np.nan, dtype=np.complex128)
    vals[~mask] = eye[None] - 1j * zs[~mask, None, None] * (grams @ J)
    return vals, mask


def kernel_identity_residual(node, z, lam):
    """|| Frame(z) J Frame(conj(lam))* - (J - i(z-lam) Pi* R(z) S^{-1} R~(lam) Pi) ||."""
    left = eval_frame(node, z)
    right = eval_frame(node, np.conj(lam))
    if left.is_pole or right.is_pole:
        raise FramePole(f"kernel identity needs non-pole points, got z={z}, lam={lam}")
    J = node.constants().J
    lhs = left.value @ J @ right.value.conj().T
    chain = _resolvent_chain(node, z, lam, node.Pi)
    rhs = J - 1j * (z - lam) * node.Pi.conj().T @ chain
    return spectral_norm(lhs - rhs)


def check_j_inequality(node, z, tol=1e-10):
    """J-inequality Frame* J Frame >= J and the 21/22 block positivity at z.

    For Im z > 0 the block form A21 A22* + A22 A21* must be positive definite,
    for Im z < 0 negative definite; the J-form bound applies on the upper
    half-plane.
    """
    if z.imag == 0:
        raise RealAxisPoint("J-inequality is signed only off the real axis")
    sample = eval_frame(node, z)
    if sample.is_pole:
        raise FramePole(f"frame pole at z={z}")
    J = node.constants().J
    jform = sample.value.conj().T @ J @ sample.value - J
    block = sample.A21 @ sample.A22.conj().T + sample.A22 @ sample.A21.conj().T
    scale = 1.0 + spectral_norm(sample.value) ** 2
    lo_j = lambda_min(jform)
    lo_b = lambda_min(block)
    hi_b = lambda_max(block)
    if z.imag > 0:
        ok = lo_j >= -tol * scale and lo_b > 0.0
    else:
        ok = hi_b < 0.0
    return JReport(z=complex(z), lmin_jform=lo_j, lmin_block=lo_b, lmax_block=hi_b,
                   scale=scale, passed=bool(ok))


def rho(node, z, lam):
    """rho(z, lam) = i (lam - z) Phi2* (I - z A*)^{-1} S^{-1} (I - lam A)^{-1} Phi2."""
    n = node.n
    scale_a = spectral_norm(node.A)
    if _near_pole(node, z) or sigma_min(
        np.eye(n) - z * node.A.conj().T
    ) < 1e-12 * (1.0 + abs(z) * scale_a):
        raise ResolventSingular(f"I - z A* singular at z={z}")
    if _near_pole(node, lam, conjugate=True) or sigma_min(
        np.eye(n) - lam * node.A
    ) < 1e-12 * (1.0 + abs(lam) * scale_a):
        raise ResolventSingular(f"I - lam A singular at lam={lam}")
    chain = _resolvent_chain(node, z, lam, node.Phi2)
    value = 1j * (lam - z) * node.Phi2.conj().T @ chain
    return RhoValue(z=complex(z), lam=complex(lam), value=value)


def rho_inverse(node, z):
    """rho(z, conj(z))^{-1}, the right-hand side of the entropy inequality."""
    r = rho(node, z, np.conj(z)).value
    return np.linalg.solve(herm(r), np.eye(node.p))


def inverse_frame(node, z):
    """Frame(S, z)^{-1} = J Frame(S, conj(z))* J, residual-checked."""
    _refuse_near_pole(node, z)
    direct = eval_frame(node, z)
    mirror = eval_frame(node, np.conj(z))
    if direct.is_pole or mirror.is_pole:
        raise FramePole(f"inverse frame needs z and conj(z) off poles, z={z}")
    J = node.constants().J
    inv = J @ mirror.value.conj().T @ J
    residual = spectral_norm(direct.value @ inv - np.eye(2 * node.p))
    if residual > 1e-10 * (1.0 + spectral_norm(direct.value) * spectral_norm(inv)):
        raise FramePole(
            f"inverse-frame residual {residual:.3e} at z={z}; too close to a pole"
        )
    return inv


def calV(node, z):
    """First block row of the inverse frame: [I 0] + i z Phi1* S^{-1} (I-zA)^{-1} Pi J."""
    n = node.n
    m = np.eye(n) - z * node.A
    if sigma_min(m) < 1e-12 * (1.0 + abs(z) * spectral_norm(node.A)):
        raise ResolventSingular(f"I - z A singular at z={z}")
    u = np.linalg.solve(node.S, node.Phi1)  # S^{-1} Phi1
    y = np.linalg.solve(m, node.Pi)
    J = node.constants().J
    head = np.hstack([np.eye(node.p), np.zeros((node.p, node.p))])
    return head + 1j * z * u.conj().T @ y @ J


def upsilon(node, zeta, moebius):
    """a-hat(zeta) c-hat(zeta)^{-1} where a, c are the 11 and 21 frame blocks.

    For zeta in the unit disk this has positive semidefinite Hermitian part
    (the Smirnov-class candidate of the outerness diagnostics).
    """
    z = moebius.to_halfplane(zeta)
    sample = eval_frame(node, z)
    if sample.is_pole:
        raise FramePole(f"frame pole at z={z} (zeta={zeta})")
    c = sample.A21
    if sigma_min(c) < 1e-12 * (1.0 + spectral_norm(sample.value)):
        raise CBlockSingular(f"21-block singular at zeta={zeta}")
    return np.linalg.solve(c.T, sample.A11.T).T
