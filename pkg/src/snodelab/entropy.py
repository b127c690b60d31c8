"""Disk-side frame objects, the entropy inequality verifier, and hypothesis
diagnostics.

Transport the frame to the disk, twist by the constant K J, and the
Arov-Krein machinery applies: with calA(zeta) = Frame-hat(zeta) K J the form
calA* J calA + j is PSD, the contraction

    chi(zeta) = (F21-hat + F22-hat)^{-1} (F21-hat - F22-hat)

has norm < 1, and the weight

    Delta(zeta) = (calA22 calA22* - calA21 calA21*)^{-1} = rho(z, conj z)^{-1}

bounds the factorized boundary density from above:

    2 pi G(z)* G(z) <= rho(z, conj z)^{-1}   on the upper half-plane,

with equality at z = lam exactly for the constant pair built from the frame
blocks at lam.  ``verify_inequality`` runs the full pipeline (LFT ->
boundary density -> outer factor -> pointwise comparison); the Smirnov-class
and resolvent-growth diagnostics screen the outerness hypothesis the theorem
needs, and hypothesis failures downgrade to warnings so counterexamples can
be explored.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import backends
from .conformal import CircleGrid, MoebiusMap, extract_density
from .errors import (
    DenominatorSingular,
    EvaluatorFailure,
    FramePole,
    InteriorSingularity,
    NotContractive,
    PoleInRegion,
    SingularForm,
    SumBlockSingular,
)
from .frame import eval_frame, frame_grid, rho, rho_inverse
from .lft import HerglotzEval, check_pair
from .linalg import as_cmatrix, herm, lambda_min, sigma_min, spectral_norm
from .snode import signature_constants, spectrum_report, validate_node
from .specfact import evaluate_interior, szego_check, wilson_factorize

__all__ = [
    "DiskFrameSample",
    "build_disk_frame",
    "chi",
    "delta",
    "disk_lft",
    "EntropyReport",
    "VerificationRun",
    "verify_inequality",
    "SmirnovReport",
    "smirnov_diagnostics",
    "GrowthReport",
    "growth_diagnostics",
]


# -- disk frame objects --------------------------------------------------------

@dataclass(frozen=True)
class DiskFrameSample:
    """calA(zeta) = Frame-hat(zeta) K J with block views and the signed J-form bound."""

    zeta: complex
    z: complex
    calA: np.ndarray
    jform_lmin: float  # lambda_min(calA* J calA + j), PSD up to roundoff

    def _block(self, i, j):
        p = self.calA.shape[0] // 2
        return self.calA[i * p:(i + 1) * p, j * p:(j + 1) * p]

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


def _hat_frame(node, zeta, moebius):
    z = moebius.to_halfplane(zeta)
    sample = eval_frame(node, z)
    if sample.is_pole:
        raise FramePole(f"frame pole at z={z} (zeta={zeta})")
    return sample, complex(z)


def build_disk_frame(node, zeta, moebius):
    sample, z = _hat_frame(node, zeta, moebius)
    consts = signature_constants(node.p)
    cal = sample.value @ consts.K @ consts.J
    form = cal.conj().T @ consts.J @ cal + consts.j
    return DiskFrameSample(zeta=complex(zeta), z=z, calA=cal, jform_lmin=lambda_min(form))


def chi(node, zeta, moebius):
    """The disk contraction (F21-hat + F22-hat)^{-1}(F21-hat - F22-hat).

    For zeta strictly inside the disk the norm must be below one, equivalently
    the 21/22 block form of the hatted frame is positive definite; the two
    readings are cross-checked and disagreement raises.
    """
    sample, _ = _hat_frame(node, zeta, moebius)
    s = sample.A21 + sample.A22
    if sigma_min(s) < 1e-12 * (1.0 + spectral_norm(sample.value)):
        raise SumBlockSingular(f"F21-hat + F22-hat singular at zeta={zeta}")
    value = np.linalg.solve(s, sample.A21 - sample.A22)
    if abs(zeta) < 1.0:
        norm = spectral_norm(value)
        block_pos = lambda_min(
            sample.A21 @ sample.A22.conj().T + sample.A22 @ sample.A21.conj().T
        )
        if (norm < 1.0) != (block_pos > 0.0):
            raise NotContractive(
                f"contraction/block-positivity disagree at zeta={zeta}: "
                f"||chi||={norm:.6f}, block lambda_min={block_pos:.3e}"
            )
        if norm >= 1.0:
            raise NotContractive(f"||chi({zeta})|| = {norm:.6f} >= 1")
    return value


def delta(node, zeta, moebius, check_tol=1e-9):
    """Delta(zeta) = (calA22 calA22* - calA21 calA21*)^{-1}, checked against rho.

    The identity Delta(zeta) = rho(z, conj z)^{-1} (z the half-plane image of
    zeta) is verified to ``check_tol`` relative.
    """
    disk = build_disk_frame(node, zeta, moebius)
    form = disk.A22 @ disk.A22.conj().T - disk.A21 @ disk.A21.conj().T
    if sigma_min(form) < 1e-14 * (1.0 + spectral_norm(disk.calA) ** 2):
        raise SingularForm(f"block form singular at zeta={zeta}")
    value = np.linalg.solve(form, np.eye(node.p))
    ref = rho_inverse(node, disk.z)
    err = spectral_norm(value - ref)
    if err > check_tol * (1.0 + spectral_norm(ref)):
        raise SingularForm(
            f"Delta/rho identity residual {err:.3e} at zeta={zeta} exceeds {check_tol:g}"
        )
    return value


def disk_lft(node, qhat, zeta, moebius):
    """f(zeta) = (calA11 q + calA12)(calA21 q + calA22)^{-1} for a contraction q."""
    disk = build_disk_frame(node, zeta, moebius)
    q = qhat(zeta) if callable(qhat) else qhat
    q = as_cmatrix(np.atleast_2d(np.asarray(q)), shape=(node.p, node.p), name="q")
    if spectral_norm(q) > 1.0 + 1e-12:
        raise NotContractive(f"||q(zeta)|| = {spectral_norm(q):.6f} > 1")
    num = disk.A11 @ q + disk.A12
    den = disk.A21 @ q + disk.A22
    if sigma_min(den) < 1e-12 * (1.0 + spectral_norm(disk.calA)):
        raise DenominatorSingular(f"disk LFT denominator singular at zeta={zeta}")
    return np.linalg.solve(den.T, num.T).T


# -- the inequality -------------------------------------------------------------

@dataclass(frozen=True)
class EntropyReport:
    """Two sides of the entropy inequality at one point."""

    z: complex
    lhs: np.ndarray  # 2 pi G(z)* G(z)
    rhs: np.ndarray  # rho(z, conj z)^{-1}
    gap: float       # lambda_min(rhs - lhs)
    lhs_min: float
    rhs_min: float
    equality: bool
    passed: bool


@dataclass(frozen=True)
class VerificationRun:
    """Pipeline result: per-point reports plus the shared artifacts."""

    reports: list
    density: object
    factor: object
    szego: object
    pair_report: object
    boundary_residual: float
    hypothesis_warnings: tuple = field(default_factory=tuple)

    @property
    def passed(self):
        return not self.hypothesis_warnings and all(r.passed for r in self.reports)

    @property
    def inequality_holds(self):
        return all(r.passed for r in self.reports)


def _hypothesis_warnings(node, moebius, grid):
    warnings = []
    spec = spectrum_report(node)
    if not spec.upper_halfplane_pole_free:
        poles = ", ".join(f"{p:.6g}" for p in spec.poles_in_upper_halfplane)
        warnings.append(f"HypothesisFail: frame poles in the upper half-plane at {poles}")
    try:
        sm = smirnov_diagnostics(node, moebius, grid=grid)
        if not sm.passed:
            warnings.append("HypothesisFail: Smirnov-class log-integrals did not converge")
    except InteriorSingularity as exc:
        warnings.append(f"HypothesisFail: {exc}")
    try:
        gr = growth_diagnostics(node, r0=0.5)
        if not gr.passed:
            warnings.append(f"HypothesisFail: resolvent growth exponent {gr.kappa:.3f}")
    except PoleInRegion as exc:
        warnings.append(f"HypothesisFail: {exc}")
    return warnings


def verify_inequality(node, pair, z_points, grid=None, moebius=None, eps=1e-5,
                      gap_tol=1e-7, equality_tol=1e-6, skip_diagnostics=False):
    """Run the full entropy-inequality pipeline for one node and pair.

    phi -> boundary density -> Szegő screen -> outer factor -> pointwise
    comparison of 2 pi G(z)* G(z) against rho(z, conj z)^{-1}.  Outerness
    hypothesis failures are collected as warnings (the run still executes so
    counterexamples can be demonstrated); Szegő failure and factorization
    breakdown raise.
    """
    moebius = moebius or MoebiusMap()
    grid = grid or CircleGrid(4096)
    validate_node(node).raise_if_failed()

    rng = np.random.default_rng(0)
    samples = rng.uniform(-2, 2, 40) + 1j * rng.uniform(0.1, 2.0, 40)
    pair_report = check_pair(pair, samples)
    if not pair_report.passed:
        raise EvaluatorFailure(
            f"pair fails property-J sampling: {pair_report.n_failures} failures "
            f"of {pair_report.n_samples}"
        )

    warnings = [] if skip_diagnostics else _hypothesis_warnings(node, moebius, grid)

    h = HerglotzEval(node=node, pair=pair)
    density = extract_density(h, grid, moebius, eps=eps)
    szego = szego_check(density)
    factor = wilson_factorize(density)
    boundary_res = np.pi * factor.recon_residual

    reports = []
    for z in np.atleast_1d(np.asarray(z_points, dtype=np.complex128)):
        z = complex(z)
        g = evaluate_interior(factor, z).value
        lhs = herm(2.0 * np.pi * g.conj().T @ g)
        rhs = herm(rho_inverse(node, z))
        scale = spectral_norm(rhs)
        gap = lambda_min(rhs - lhs)
        reports.append(
            EntropyReport(
                z=z,
                lhs=lhs,
                rhs=rhs,
                gap=gap,
                lhs_min=lambda_min(lhs),
                rhs_min=lambda_min(rhs),
                equality=bool(abs(gap) <= equality_tol * scale),
                passed=bool(gap >= -gap_tol * scale),
            )
        )
    return VerificationRun(
        reports=reports,
        density=density,
        factor=factor,
        szego=szego,
        pair_report=pair_report,
        boundary_residual=float(boundary_res),
        hypothesis_warnings=tuple(warnings),
    )


# -- Smirnov-class diagnostics ----------------------------------------------------

@dataclass(frozen=True)
class SmirnovReport:
    """log-plus integrals of the hatted 21-block and its inverse along r -> 1."""

    radii: np.ndarray
    fwd_integrals: np.ndarray      # (k, p, p)
    inv_integrals: np.ndarray      # (k, p, p)
    fwd_boundary: np.ndarray       # (p, p)
    inv_boundary: np.ndarray       # (p, p)
    excluded_angles: tuple
    fwd_converged: bool
    inv_converged: bool
    passed: bool


def _c_hat_on_circle(node, moebius, radius, angles):
    zetas = radius * np.exp(1j * angles)
    sing = np.abs(zetas - 1.0) < 1e-14
    zs = np.zeros_like(zetas)
    zs[~sing] = moebius.to_halfplane(zetas[~sing])
    frames, mask = frame_grid(node, zs)
    p = node.p
    c = frames[:, p:, :p].copy()
    c[sing] = np.nan
    return c, mask | sing


def _det_c_zeros(node):
    """Zeros of det c(z) beyond the structural one at z = 0, exactly.

    c(z) = -i z Phi2* (I - z A*)^{-1} S^{-1} Phi2, so the nontrivial zeros are
    the points where the strictly proper transfer part drops rank; they are
    the finite generalized eigenvalues of the system-zero pencil

        [[I - z A*,  S^{-1} Phi2],
         [Phi2*,     0          ]].
    """
    from scipy.linalg import eig

    n, p = node.n, node.p
    b = np.linalg.solve(node.S, node.Phi2)
    t0 = np.block([
        [np.eye(n, dtype=np.complex128), b],
        [node.Phi2.conj().T, np.zeros((p, p), dtype=np.complex128)],
    ])
    t1 = np.zeros_like(t0)
    t1[:n, :n] = -node.A.conj().T
    vals = eig(t0, -t1, right=False)
    return vals[np.isfinite(vals)]


def _logplus_integral(values, keep, dtheta):
    """Entrywise integral of ln^+ |entries| over kept angles."""
    with np.errstate(divide="ignore"):
        lp = np.log(np.abs(values))
    lp = np.where(np.isfinite(lp), lp, 0.0)
    lp = np.clip(lp, 0.0, None)
    lp[~keep] = 0.0
    return lp.sum(axis=0) * dtheta


def smirnov_diagnostics(node, moebius=None, grid=None, k_max=12, rel_tol=1e-3):
    """Convergence test for the outerness requirement on the 21-block.

    Exact failure paths first: a frame pole mapping strictly inside the disk
    (radius below 1 - 1e-3), or a system-zero-pencil eigenvalue showing det of
    the hatted 21-block vanishes inside, raise InteriorSingularity.  Otherwise
    the entrywise log-plus integrals of the block and its inverse are compared
    along radii 1 - 2^{-k} against the boundary integral, excluding fixed arcs
    around the determinant's boundary zeros (exact pencil angles plus grid
    dips) and around the grid node at zeta = 1; pass iff both families
    converge within ``rel_tol`` relative.
    """
    moebius = moebius or MoebiusMap()
    grid = grid or CircleGrid(4096)
    n_ang = grid.N
    angles = grid.angles
    dtheta = 2.0 * np.pi / n_ang
    p = node.p
    scan_radius = 1.0 - 1e-3

    poles = node.pole_points()
    interior = poles[poles.imag > 0] if poles.size else poles
    if interior.size:
        zeta_poles = moebius.to_disk(interior)
        bad = np.abs(zeta_poles) < scan_radius
        if np.any(bad):
            raise InteriorSingularity(
                "21-block has interior pole(s) at zeta = "
                + ", ".join(f"{z:.6g}" for z in np.atleast_1d(zeta_poles)[bad])
            )

    # zeros of det c-hat from the system-zero pencil; interior ones are exact
    # fails, near-boundary ones get exclusion arcs in the integrals below
    zeros = _det_c_zeros(node)
    boundary_zero_angles = [np.pi]  # z = 0 always maps to the boundary
    if zeros.size:
        zeta_zeros = np.atleast_1d(moebius.to_disk(zeros))
        inner = (np.abs(zeta_zeros) < scan_radius) & (zeros.imag > 1e-9 * (1 + np.abs(zeros)))
        if np.any(inner):
            raise InteriorSingularity(
                "det of the 21-block vanishes inside the disk at zeta = "
                + ", ".join(f"{z:.6g}" for z in zeta_zeros[inner])
            )
        boundary_zero_angles += list(np.angle(zeta_zeros) % (2 * np.pi))

    # boundary samples; exclude arcs around determinant zeros (exact pencil
    # angles plus any grid-level dips) and around the zeta = 1 node
    c_bnd, mask_bnd = _c_hat_on_circle(node, moebius, 1.0, angles)
    keep = ~mask_bnd
    keep[grid.excluded_index] = False
    det_bnd = np.abs(np.linalg.det(np.where(np.isfinite(c_bnd), c_bnd, 0.0)))
    med = np.median(det_bnd[keep])
    zero_nodes = set(np.where(keep & (det_bnd < 1e-3 * med))[0])
    zero_nodes.update(
        int(round(th / (2 * np.pi / n_ang))) % n_ang for th in boundary_zero_angles
    )
    arc = max(8, n_ang // 256)
    excluded_angles = []
    for kz in sorted(zero_nodes):
        lo = np.arange(kz - arc, kz + arc + 1) % n_ang
        keep[lo] = False
        excluded_angles.append(float(angles[kz]))
    for off in range(-arc, arc + 1):
        keep[(grid.excluded_index + off) % n_ang] = False

    def integrals(radius):
        c, m = _c_hat_on_circle(node, moebius, radius, angles)
        use = keep & ~m
        good = np.where(np.isfinite(c.reshape(n_ang, -1)).all(axis=1), True, False)
        use &= good
        fwd = _logplus_integral(c, use, dtheta)
        cinv = np.full_like(c, np.nan)
        cinv[use] = np.linalg.inv(c[use])
        inv = _logplus_integral(np.where(np.isfinite(cinv), cinv, 0.0), use, dtheta)
        return fwd, inv

    radii = 1.0 - 0.5 ** np.arange(1, k_max + 1)
    fwd = np.empty((k_max, p, p))
    inv = np.empty((k_max, p, p))
    for i, r in enumerate(radii):
        fwd[i], inv[i] = integrals(r)
    fwd_b, inv_b = integrals(1.0)

    tol_f = rel_tol * (1.0 + np.abs(fwd_b))
    tol_i = rel_tol * (1.0 + np.abs(inv_b))
    fwd_ok = bool(np.all(np.abs(fwd[-1] - fwd_b) <= tol_f))
    inv_ok = bool(np.all(np.abs(inv[-1] - inv_b) <= tol_i))
    return SmirnovReport(
        radii=radii,
        fwd_integrals=fwd,
        inv_integrals=inv,
        fwd_boundary=fwd_b,
        inv_boundary=inv_b,
        excluded_angles=tuple(excluded_angles),
        fwd_converged=fwd_ok,
        inv_converged=inv_ok,
        passed=fwd_ok and inv_ok,
    )


# -- resolvent growth diagnostics ----------------------------------------------------

@dataclass(frozen=True)
class GrowthReport:
    """Sampled resolvent sup-norms over nested regions and the fitted exponent."""

    radii: np.ndarray
    M_upper: np.ndarray    # sup ||(I - z A*)^{-1}||, |z| < r, Im z >= 0
    M_annulus: np.ndarray  # sup ||(I - z A)^{-1}||, r0 < |z| < r
    M_lower: np.ndarray    # sup ||(I - z A*)^{-1}||, Im z <= 0, r0 < |z| < r
    kappa: float
    bounded: bool
    r0: float
    passed: bool


def _check_poles(points, region, label):
    if points.size and np.any(region(points)):
        bad = points[region(points)]
        raise PoleInRegion(
            f"{label}: resolvent pole(s) at " + ", ".join(f"{p:.6g}" for p in bad)
        )


def _sup_profile(mat, radii, angle_grid, r_min=0.0):
    """Running sup of ||(I - z mat)^{-1}|| over shells radius <= r."""
    prof = np.full(radii.size, np.nan)
    sel = radii > r_min
    if not sel.any():
        return prof
    zs = (radii[sel][:, None] * np.exp(1j * angle_grid)[None, :]).ravel()
    norms = backends.resolvent_norm_batch(mat, zs)
    per_shell = norms.reshape(-1, angle_grid.size).max(axis=1)
    prof[sel] = np.maximum.accumulate(per_shell)
    return prof


def _fit_kappa(radii, values):
    """Least-squares slope of ln ln M against ln r over the top decade."""
    mask = (radii >= radii[-1] / 10.0) & np.isfinite(values) & (values > 1.0 + 1e-9)
    if mask.sum() < 3:
        return 0.0
    x = np.log(radii[mask])
    y = np.log(np.log(values[mask]))
    slope = np.polyfit(x, y, 1)[0]
    return float(max(slope, 0.0))


def growth_diagnostics(node, r0, r_max=1e4, n_radii=40, n_angles=24):
    """Sampled sup-norm growth of the three resolvent families, with exact pole scan.

    Raises PoleInRegion when spec(A) puts a pole of the relevant resolvent
    inside its required region; otherwise fits the double-log growth exponent
    over the top decade of radii and passes iff it stays below 0.95.
    """
    eigs = np.linalg.eigvals(node.A)
    nz = eigs[np.abs(eigs) > 1e-14 * (1.0 + np.abs(eigs).max(initial=0.0))]
    star_poles = 1.0 / nz.conj() if nz.size else np.zeros(0, dtype=complex)
    plain_poles = 1.0 / nz if nz.size else np.zeros(0, dtype=complex)

    def _tol(p):
        return 1e-12 * (1.0 + np.abs(p))

    # the sup regions are closed half-planes: real-axis poles count as inside
    _check_poles(star_poles, lambda p: p.imag >= -_tol(p), "upper half-plane (I - z A*)")
    _check_poles(plain_poles, lambda p: np.abs(p) > r0, f"annulus |z| > r0={r0} (I - z A)")
    _check_poles(star_poles, lambda p: (p.imag <= _tol(p)) & (np.abs(p) > r0),
                 f"lower half-plane |z| > r0={r0} (I - z A*)")

    radii = np.geomspace(max(r0, 1e-3), r_max, n_radii)
    upper_angles = np.linspace(0.0, np.pi, n_angles)
    all_angles = np.linspace(0.0, 2.0 * np.pi, n_angles, endpoint=False)
    lower_angles = np.linspace(np.pi, 2.0 * np.pi, n_angles)

    a_star = node.A.conj().T
    m_upper = _sup_profile(a_star, radii, upper_angles)
    m_ann = _sup_profile(node.A, radii, all_angles, r_min=r0)
    m_low = _sup_profile(a_star, radii, lower_angles, r_min=r0)

    finite = np.concatenate([m for m in (m_upper, m_ann, m_low)])
    finite = finite[np.isfinite(finite)]
    bounded = bool(finite.size and finite.max() < 1.0 + 1e-6)
    kappa = max(_fit_kappa(radii, m_upper), _fit_kappa(radii, m_ann),
                _fit_kappa(radii, m_low))
    return GrowthReport(
        radii=radii,
        M_upper=m_upper,
        M_annulus=m_ann,
        M_lower=m_low,
        kappa=kappa,
        bounded=bounded,
        r0=float(r0),
        passed=bool(bounded or kappa <= 0.95),
    )
