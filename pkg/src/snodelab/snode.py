"""Finite-dimensional self-adjoint S-nodes.

An S-node is a triple {A, S, Pi} of complex matrices, Pi = [Phi1 Phi2],
with S Hermitian positive definite and

    A S - S A* = i Pi J Pi*,      J = [[0, I_p], [I_p, 0]].

This module owns construction, validation against the identity and the
positivity/rank hypotheses, the sign-flip companion node, and the resolvent
pole classification that the half-plane machinery depends on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConstructionInfeasible,
    DimensionMismatch,
    IdentityViolation,
    NonHermitianS,
    Phi2RankDeficient,
    SNotPositive,
)
from .linalg import as_cmatrix, herm, spectral_norm

__all__ = [
    "ToleranceSet",
    "SignatureConstants",
    "signature_constants",
    "SNode",
    "ValidationReport",
    "validate_node",
    "build_moment_node",
    "flip_node",
    "SpectrumReport",
    "spectrum_report",
    "POLE_REFUSE_RADIUS",
]

# points closer than this to a resolvent pole are refused by evaluators
POLE_REFUSE_RADIUS = 1e-8


@dataclass(frozen=True)
class ToleranceSet:
    """Relative tolerances for node validation (double-precision dense scale)."""

    tau_herm: float = 1e-10
    tau_id: float = 1e-10
    eps_min: float = 1e-12  # positivity floor for lambda_min(S)
    pole_sigma: float = 1e-12  # scale-aware sigma_min threshold for pole detection


DEFAULT_TOLERANCES = ToleranceSet()


@dataclass(frozen=True)
class SignatureConstants:
    """The three constant 2p x 2p signature matrices J, j and K with J = K j K*."""

    p: int
    J: np.ndarray
    j: np.ndarray
    K: np.ndarray


def signature_constants(p):
    """Build J = [[0,I],[I,0]], j = diag(I,-I) and K = (1/sqrt2)[[I,-I],[I,I]]."""
    ip = np.eye(p, dtype=np.complex128)
    zp = np.zeros((p, p), dtype=np.complex128)
    J = np.block([[zp, ip], [ip, zp]])
    jj = np.block([[ip, zp], [zp, -ip]])
    K = np.block([[ip, -ip], [ip, ip]]) / np.sqrt(2.0)
    return SignatureConstants(p=p, J=J, j=jj, K=K)


MAX_STATE_DIM = 64  # desk-scale dense algebra; everything assumes small n


@dataclass(frozen=True)
class SNode:
    """Immutable S-node {A, S, Pi=[Phi1 Phi2]} on C^n with p x p block size."""

    A: np.ndarray
    S: np.ndarray
    Phi1: np.ndarray
    Phi2: np.ndarray

    def __post_init__(self):
        A = as_cmatrix(self.A, name="A")
        n = A.shape[0]
        if A.shape[1] != n:
            raise DimensionMismatch(f"A must be square, got {A.shape}")
        if n > MAX_STATE_DIM:
            raise DimensionMismatch(f"state dimension {n} exceeds the cap {MAX_STATE_DIM}")
        S = as_cmatrix(self.S, shape=(n, n), name="S")
        Phi1 = as_cmatrix(self.Phi1, name="Phi1")
        if Phi1.shape[0] != n:
            raise DimensionMismatch(f"Phi1 must have {n} rows, got {Phi1.shape}")
        p = Phi1.shape[1]
        Phi2 = as_cmatrix(self.Phi2, shape=(n, p), name="Phi2")
        for name, m in (("A", A), ("S", S), ("Phi1", Phi1), ("Phi2", Phi2)):
            m.setflags(write=False)
            object.__setattr__(self, name, m)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def p(self):
        return self.Phi1.shape[1]

    @property
    def Pi(self):
        return np.hstack([self.Phi1, self.Phi2])

    def constants(self):
        return signature_constants(self.p)

    def identity_residual(self):
        """Norm of A S - S A* - i Pi J Pi*."""
        Pi = self.Pi
        J = self.constants().J
        lhs = self.A @ self.S - self.S @ self.A.conj().T
        rhs = 1j * Pi @ J @ Pi.conj().T
        return spectral_norm(lhs - rhs)

    def pole_points(self):
        """Poles of z -> (I - z A*)^{-1}: the points 1/conj(lambda), lambda in spec(A)."""
        eigs = np.linalg.eigvals(self.A)
        nz = eigs[np.abs(eigs) > 0]
        return 1.0 / nz.conj()


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of :func:`validate_node`; ``failures`` holds error-class names."""

    n: int
    p: int
    herm_residual: float
    identity_residual: float
    identity_scale: float
    lambda_min_S: float
    lambda_max_S: float
    phi2_rank: int
    passed: bool
    failures: tuple = field(default_factory=tuple)

    def raise_if_failed(self):
        exc_by_name = {
            "NonHermitianS": NonHermitianS,
            "IdentityViolation": IdentityViolation,
            "SNotPositive": SNotPositive,
            "Phi2RankDeficient": Phi2RankDeficient,
        }
        for name in self.failures:
            raise exc_by_name[name](
                f"{name}: herm_residual={self.herm_residual:.3e}, "
                f"identity_residual={self.identity_residual:.3e}, "
                f"lambda_min(S)={self.lambda_min_S:.3e}, rank(Phi2)={self.phi2_rank}"
            )


def validate_node(node, tolerances=DEFAULT_TOLERANCES):
    """Check the S-node invariants and report residuals.

    Passes iff S is Hermitian within ``tau_herm`` (relative), the identity
    residual is within ``tau_id * (1 + ||A|| ||S||)``, the smallest eigenvalue
    of S clears the positivity floor, and Phi2 has full column rank.
    """
    t = tolerances
    failures = []

    herm_res = spectral_norm(node.S - node.S.conj().T)
    s_norm = spectral_norm(node.S)
    if herm_res > t.tau_herm * (1.0 + s_norm):
        failures.append("NonHermitianS")

    id_res = node.identity_residual()
    id_scale = 1.0 + spectral_norm(node.A) * s_norm
    if id_res > t.tau_id * id_scale:
        failures.append("IdentityViolation")

    s_eigs = np.linalg.eigvalsh(herm(node.S))
    if s_eigs[0] < t.eps_min:
        failures.append("SNotPositive")

    sv = np.linalg.svd(node.Phi2, compute_uv=False)
    scale = sv[0] if sv[0] > 0 else 1.0
    rank = int(np.sum(sv > 1e-12 * scale * max(node.n, node.p)))
    if rank < node.p:
        failures.append("Phi2RankDeficient")

    return ValidationReport(
        n=node.n,
        p=node.p,
        herm_residual=herm_res,
        identity_residual=id_res,
        identity_scale=id_scale,
        lambda_min_S=float(s_eigs[0]),
        lambda_max_S=float(s_eigs[-1]),
        phi2_rank=rank,
        passed=not failures,
        failures=tuple(failures),
    )


def _solve_phi1(A, S, Phi2, tol=1e-8):
    """Solve Phi1 Phi2* + Phi2 Phi1* = -i(AS - SA*) for Phi1 by real-linear lstsq.

    The map is R-linear (the second term conjugates Phi1), so the system is
    assembled over (Re Phi1, Im Phi1).  Raises ConstructionInfeasible when the
    least-squares residual shows the system is inconsistent.
    """
    n, p = Phi2.shape
    H = -1j * (A @ S - S @ A.conj().T)  # Hermitian target

    def apply(X):
        return X @ Phi2.conj().T + Phi2 @ X.conj().T

    cols = []
    for a in range(n):
        for b in range(p):
            E = np.zeros((n, p), dtype=np.complex128)
            E[a, b] = 1.0
            cols.append(apply(E).ravel())
            E[a, b] = 1j
            cols.append(apply(E).ravel())
    M = np.array(cols).T  # (n^2, 2np) complex
    Mr = np.vstack([M.real, M.imag])
    hr = np.concatenate([H.ravel().real, H.ravel().imag])
    x, _, _, _ = np.linalg.lstsq(Mr, hr, rcond=None)
    Phi1 = (x[0::2] + 1j * x[1::2]).reshape(n, p)

    scale = 1.0 + spectral_norm(A) * spectral_norm(S)
    residual = spectral_norm(apply(Phi1) - H)
    if residual > tol * scale:
        raise ConstructionInfeasible(
            f"Phi1 solve inconsistent: residual {residual:.3e} "
            f"(relative {residual / scale:.3e})"
        )
    return Phi1


def _strict_lower_basis(n):
    idx = [(a, b) for a in range(n) for b in range(a)]
    mats = []
    for a, b in idx:
        e = np.zeros((n, n), dtype=np.complex128)
        e[a, b] = 1.0
        mats.append(e)
        e = np.zeros((n, n), dtype=np.complex128)
        e[a, b] = 1j
        mats.append(e)
    return mats


def build_moment_node(p, n, seed):
    """Random node with strictly lower-triangular nilpotent A and random HPD S.

    Feasibility of the Phi1 solve requires A S - S A* to live in the range of
    X -> X Phi2* + Phi2 X*, i.e. to have vanishing compression onto the
    orthocomplement of range(Phi2).  That is a linear constraint on A, so A is
    drawn from the nullspace of the constraint map over strictly lower
    matrices (scaled to keep resolvents tame), S from a random unitary
    conjugation of eigenvalues in [0.5, 1.5], Phi2 as a random well-scaled
    frame, and Phi1 by least squares from the node identity.  spec(A) = {0},
    so the resolvent hypotheses over both half-planes hold.
    """
    if p < 1 or n < 1:
        raise DimensionMismatch("need p >= 1 and n >= 1")
    if n < p:
        raise DimensionMismatch("need n >= p for Phi2 to have full column rank")
    if n == 1 and p == 1:
        # degenerate case: A = 0 forces Pi J Pi* = 0
        return SNode(A=[[0]], S=[[1]], Phi1=[[0]], Phi2=[[1]])

    rng = np.random.default_rng(seed)

    u, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    eigs = rng.uniform(0.5, 1.5, n)
    S = (u * eigs) @ u.conj().T

    q, _ = np.linalg.qr(rng.standard_normal((n, p)) + 1j * rng.standard_normal((n, p)))
    g = rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p)) + 3.0 * np.eye(p)
    Phi2 = q @ g

    # constraint: P_perp (A S - S A*) P_perp = 0 on the complement of range(Phi2)
    basis = _strict_lower_basis(n)
    p_perp = np.eye(n) - q @ q.conj().T
    cols = []
    for e in basis:
        m = p_perp @ (e @ S - S @ e.conj().T) @ p_perp
        cols.append(np.concatenate([m.ravel().real, m.ravel().imag]))
    cmat = np.array(cols).T
    _, sv, vh = np.linalg.svd(cmat)
    rank = int(np.sum(sv > 1e-10 * (sv[0] if sv.size else 1.0)))
    null = vh[rank:].T  # real coefficients of nullspace elements
    if null.shape[1] == 0:
        A = np.zeros((n, n), dtype=np.complex128)
    else:
        coeff = null @ rng.standard_normal(null.shape[1])
        A = sum(c * e for c, e in zip(coeff, basis))
        norm = spectral_norm(A)
        if norm > 0:
            A = 0.5 * A / norm

    Phi1 = _solve_phi1(A, S, Phi2)
    node = SNode(A=A, S=S, Phi1=Phi1, Phi2=Phi2)
    validate_node(node).raise_if_failed()
    return node


def flip_node(node):
    """Companion node {-A, S, [-Phi2, Phi1]}; satisfies the identity iff the input does."""
    return SNode(A=-node.A, S=node.S, Phi1=-node.Phi2, Phi2=node.Phi1)


@dataclass(frozen=True)
class SpectrumReport:
    """Eigenvalues of A and the half-plane resolvent-invertibility classification.

    ``upper_poles``: poles of (I - z A*)^{-1}, i.e. 1/conj(lambda); those in the
    open upper half-plane obstruct pole-free evaluation there.
    ``lower_poles``: poles of (I - z A)^{-1}, i.e. 1/lambda.
    """

    eigenvalues: np.ndarray
    upper_poles: np.ndarray
    lower_poles: np.ndarray
    r0: float
    upper_halfplane_pole_free: bool
    prop41_ok: bool

    @property
    def poles_in_upper_halfplane(self):
        p = self.upper_poles
        return p[p.imag > 1e-12 * (1.0 + np.abs(p))]


def spectrum_report(node, r0=10.0):
    """Classify the resolvent hypotheses of the node from spec(A).

    (a) ``upper_halfplane_pole_free``: (I - z A*) is invertible everywhere on
        the closed upper half-plane (no pole 1/conj(lambda) with Im >= 0); when
        false the isolated poles are listed.
    (b) ``prop41_ok``: (I - z A) is invertible for Im z <= 0 and for |z| >= r0
        in the upper half-plane, i.e. every nonzero eigenvalue lies in the open
        lower half-plane and the corresponding poles 1/lambda (which then sit
        in the upper half-plane) have modulus below r0.
    """
    eigs = np.linalg.eigvals(node.A)
    nz = eigs[np.abs(eigs) > 1e-14 * (1.0 + np.abs(eigs).max(initial=0.0))]
    upper_poles = 1.0 / nz.conj() if nz.size else np.zeros(0, dtype=np.complex128)
    lower_poles = 1.0 / nz if nz.size else np.zeros(0, dtype=np.complex128)

    def _tol(p):
        return 1e-12 * (1.0 + np.abs(p))

    # (a) concerns the OPEN upper half-plane: real-axis poles do not count
    if upper_poles.size:
        pole_free_a = not np.any(upper_poles.imag > _tol(upper_poles))
    else:
        pole_free_a = True

    if lower_poles.size:
        # closed lower half-plane must be pole free ...
        bad_lower = np.any(lower_poles.imag <= _tol(lower_poles))
        # ... and upper-half poles must sit below radius r0
        in_upper = lower_poles[lower_poles.imag > _tol(lower_poles)]
        bad_radius = np.any(np.abs(in_upper) >= r0) if in_upper.size else False
        prop41 = not (bad_lower or bad_radius)
    else:
        prop41 = True

    return SpectrumReport(
        eigenvalues=eigs,
        upper_poles=upper_poles,
        lower_poles=lower_poles,
        r0=float(r0),
        upper_halfplane_pole_free=bool(pole_free_a),
        prop41_ok=bool(prop41),
    )
