"""Property-J pairs and the linear-fractional transformation they parametrize.

A nonsingular property-J pair is a pair of p x p evaluators (R, Q) on the
upper half-plane with R*R + Q*Q > 0 and R*Q + Q*R >= 0 off isolated points.
Feeding a pair through the frame gives the Herglotz-class function

    phi(z) = i (F11 R + F12 Q) (F21 R + F22 Q)^{-1},

whose boundary density is what the spectral factorization consumes.  The
extremal constant pair (R, Q) = (F22(lam)*, F21(lam)*) realizes equality in
the entropy inequality at z = lam.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DenominatorSingular,
    EvaluatorFailure,
    FramePole,
    NotContractive,
)
from .frame import eval_frame, frame_grid
from .linalg import as_cmatrix, herm, imag_part, lambda_min, sigma_min, spectral_norm
from .snode import signature_constants

__all__ = [
    "PairJ",
    "constant_pair",
    "identity_pair",
    "pair_from_disk_pair",
    "equality_pair",
    "PairReport",
    "check_pair",
    "eval_phi",
    "HerglotzEval",
    "check_herglotz",
    "estimate_gamma_theta",
    "HerglotzRepresentation",
    "herglotz_representation",
]


@dataclass(frozen=True)
class PairJ:
    """Pair of p x p evaluators z -> (R(z), Q(z)); constant pairs carry their matrices."""

    kind: str
    p: int
    R: object
    Q: object
    R_const: np.ndarray = None
    Q_const: np.ndarray = None
    disk_q: object = None
    disk_a: np.ndarray = None
    label: str = ""

    def eval(self, z):
        try:
            r = as_cmatrix(self.R(z), shape=(self.p, self.p), name="R(z)")
            q = as_cmatrix(self.Q(z), shape=(self.p, self.p), name="Q(z)")
        except Exception as exc:
            if isinstance(exc, NotContractive):
                raise
            raise EvaluatorFailure(f"pair evaluator failed at z={z}: {exc}") from exc
        return r, q

    def eval_many(self, zs):
        zs = np.atleast_1d(np.asarray(zs, dtype=np.complex128))
        if self.kind == "constant":
            r = np.broadcast_to(self.R_const, (zs.size, self.p, self.p))
            q = np.broadcast_to(self.Q_const, (zs.size, self.p, self.p))
            return r, q
        rs = np.empty((zs.size, self.p, self.p), dtype=np.complex128)
        qs = np.empty_like(rs)
        for k, z in enumerate(zs):
            rs[k], qs[k] = self.eval(complex(z))
        return rs, qs


def constant_pair(R, Q, label=""):
    R = np.atleast_2d(np.asarray(R, dtype=np.complex128))
    Q = as_cmatrix(Q, shape=R.shape, name="Q")
    R = as_cmatrix(R, name="R")
    p = R.shape[0]
    return PairJ(kind="constant", p=p, R=lambda z: R, Q=lambda z: Q,
                 R_const=R, Q_const=Q, label=label or "constant")


def identity_pair(p):
    """The pair {I, I}; R*Q + Q*R = 2I."""
    eye = np.eye(p, dtype=np.complex128)
    return constant_pair(eye, eye, label="identity")


def pair_from_disk_pair(q, a, moebius, p=None):
    """Transport a contractive disk parameter into a property-J pair.

    ``q`` is either a constant matrix or an evaluator zeta -> p x p contraction
    (||q|| <= 1); ``a`` an invertible p x p scale.  The half-plane pair is

        [R(z); Q(z)] = K J [q(zeta(z)) a; a].
    """
    a = np.atleast_2d(np.asarray(a, dtype=np.complex128))
    p = p or a.shape[0]
    a = as_cmatrix(a, shape=(p, p), name="a")
    if sigma_min(a) < 1e-12 * (1.0 + spectral_norm(a)):
        raise EvaluatorFailure("disk pair scale 'a' must be invertible")

    if callable(q):
        q_eval = q
        q_const = None
    else:
        q_const = as_cmatrix(np.atleast_2d(np.asarray(q)), shape=(p, p), name="q")
        if spectral_norm(q_const) > 1.0 + 1e-12:
            raise NotContractive(f"||q|| = {spectral_norm(q_const):.6f} > 1")
        q_eval = lambda zeta: q_const

    consts = signature_constants(p)
    KJ = consts.K @ consts.J

    def q_at(zeta):
        qv = as_cmatrix(q_eval(zeta), shape=(p, p), name="q(zeta)")
        if spectral_norm(qv) > 1.0 + 1e-12:
            raise NotContractive(f"||q(zeta)|| = {spectral_norm(qv):.6f} > 1 at zeta={zeta}")
        return qv

    def stack(z):
        zeta = moebius.to_disk(z)
        return KJ @ np.vstack([q_at(zeta) @ a, a])

    pair = PairJ(
        kind="disk-derived",
        p=p,
        R=lambda z: stack(z)[:p, :],
        Q=lambda z: stack(z)[p:, :],
        disk_q=q_at,
        disk_a=a,
        label="disk-derived",
    )
    if q_const is not None:
        # constant disk parameter: freeze the transported pair
        s = KJ @ np.vstack([q_const @ a, a])
        return PairJ(kind="disk-derived", p=p,
                     R=lambda z: s[:p, :], Q=lambda z: s[p:, :],
                     R_const=s[:p, :].copy(), Q_const=s[p:, :].copy(),
                     disk_q=q_at, disk_a=a, label="disk-derived")
    return pair


def equality_pair(node, lam):
    """Constant pair (F22(lam)*, F21(lam)*) realizing entropy equality at z = lam."""
    sample = eval_frame(node, lam)
    if sample.is_pole:
        raise FramePole(f"frame pole at lam={lam}")
    return constant_pair(sample.A22.conj().T, sample.A21.conj().T,
                         label=f"equality@{lam}")


@dataclass(frozen=True)
class PairReport:
    min_nonsingular: float  # min over samples of lambda_min(R*R + Q*Q)
    min_jform: float        # min over samples of lambda_min(R*Q + Q*R), scaled check
    n_samples: int
    n_failures: int
    failure_points: tuple = field(default_factory=tuple)
    clustered: bool = False
    passed: bool = False


def check_pair(pair, samples, tol=1e-10):
    """Sample the pair invariants; isolated failures are tolerated.

    Passes iff at least 95% of the samples satisfy both forms and no two
    failure points lie within 1e-3 of each other (finite proxy for the
    'excluding isolated points' clause).
    """
    min_ns = np.inf
    min_jf = np.inf
    failures = []
    for z in samples:
        r, q = pair.eval(complex(z))
        ns = lambda_min(r.conj().T @ r + q.conj().T @ q)
        jf = lambda_min(r.conj().T @ q + q.conj().T @ r)
        scale = spectral_norm(r) ** 2 + spectral_norm(q) ** 2
        min_ns = min(min_ns, ns)
        min_jf = min(min_jf, jf)
        ok = ns > tol * max(scale, 1e-300) and jf >= -tol * max(scale, 1.0)
        if not ok:
            failures.append(complex(z))
    clustered = any(
        abs(a - b) < 1e-3 for i, a in enumerate(failures) for b in failures[i + 1:]
    )
    n = len(list(samples))
    passed = (n - len(failures)) >= 0.95 * n and not clustered and n > 0
    return PairReport(
        min_nonsingular=float(min_ns),
        min_jform=float(min_jf),
        n_samples=n,
        n_failures=len(failures),
        failure_points=tuple(failures),
        clustered=clustered,
        passed=bool(passed),
    )


def eval_phi(node, pair, z):
    """phi(z) = i (F11 R + F12 Q)(F21 R + F22 Q)^{-1} with denominator check."""
    sample = eval_frame(node, z)
    if sample.is_pole:
        raise FramePole(f"frame pole at z={z}")
    r, q = pair.eval(z)
    num = sample.A11 @ r + sample.A12 @ q
    den = sample.A21 @ r + sample.A22 @ q
    scale = spectral_norm(sample.value) * (spectral_norm(r) + spectral_norm(q))
    if sigma_min(den) <= 1e-12 * (1.0 + scale):
        raise DenominatorSingular(f"LFT denominator singular at z={z}")
    return 1j * np.linalg.solve(den.T, num.T).T


@dataclass(frozen=True)
class HerglotzEval:
    """phi attached to a node and a pair; callable at points or batches."""

    node: object
    pair: PairJ

    @property
    def p(self):
        return self.node.p

    def __call__(self, z):
        return eval_phi(self.node, self.pair, complex(z))

    def eval_many(self, zs):
        """Vectorized phi over a batch; pole-refused points come back NaN."""
        zs = np.atleast_1d(np.asarray(zs, dtype=np.complex128))
        frames, pole_mask = frame_grid(self.node, zs)
        rs, qs = self.pair.eval_many(zs)
        p = self.p
        f11 = frames[:, :p, :p]
        f12 = frames[:, :p, p:]
        f21 = frames[:, p:, :p]
        f22 = frames[:, p:, p:]
        num = f11 @ rs + f12 @ qs
        den = f21 @ rs + f22 @ qs
        out = np.full((zs.size, p, p), np.nan, dtype=np.complex128)
        good = ~pole_mask
        out[good] = 1j * np.linalg.solve(
            den[good].swapaxes(-1, -2), num[good].swapaxes(-1, -2)
        ).swapaxes(-1, -2)
        return out


def check_herglotz(h, samples):
    """min over samples of lambda_min(i(phi* - phi)); >= -1e-10 counts as a pass."""
    worst = np.inf
    for z in samples:
        v = h(complex(z))
        worst = min(worst, lambda_min(2.0 * imag_part(v)))
    return float(worst)


def estimate_gamma_theta(h, y_large=1e6):
    """Point estimates of the linear term and the Hermitian offset.

    gamma from Im phi(iy)/y at y = 1e6; theta as the Hermitian part of phi(i)
    (at z = i the integral term of the Herglotz representation is purely
    imaginary, so the Hermitian part isolates theta exactly).
    """
    gamma = herm(imag_part(h(1j * y_large)) / y_large)
    theta = herm(h(1j))
    return gamma, theta


@dataclass(frozen=True)
class HerglotzRepresentation:
    """gamma z + theta + integral data: point estimates plus the a.c. density."""

    gamma: np.ndarray
    theta: np.ndarray
    density: object


def herglotz_representation(h, grid, moebius, eps=1e-5):
    """Bundle gamma/theta point estimates with the extracted boundary density."""
    from .conformal import extract_density

    gamma, theta = estimate_gamma_theta(h)
    density = extract_density(h, grid, moebius, eps=eps)
    return HerglotzRepresentation(gamma=gamma, theta=theta, density=density)
