"""Moebius transport between the upper half-plane and the unit disk.

The map and its inverse (z0 in the upper half-plane, default i) are

    z(zeta) = (conj(z0) zeta - z0) / (zeta - 1),      zeta(z) = (z - z0)/(z - conj(z0)),

with boundary parametrization t(theta) = z(e^{i theta}) on the real axis and
the Jacobian relation

    dt / (1 + t^2) = w(theta) d theta,
    w(theta) = 2 Im z0 / (|zeta - 1|^2 + |conj(z0) zeta - z0|^2).

``hat``/``breve`` transport function evaluators between the two domains, and
:func:`extract_density` reads the absolutely continuous part of the Herglotz
measure off the boundary via Im phi(t + i eps) / pi with one Richardson step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, MapSingularity

__all__ = [
    "MoebiusMap",
    "CircleGrid",
    "DensityGrid",
    "hat_transport",
    "breve_transport",
    "weight_transform",
    "axis_quadrature",
    "extract_density",
    "axis_density",
    "fill_excluded_even",
]


@dataclass(frozen=True)
class MoebiusMap:
    """Disk <-> upper half-plane map with center z0 (zeta=0 maps to z0)."""

    z0: complex = 1j

    def __post_init__(self):
        z0 = complex(self.z0)
        if z0.imag <= 0:
            raise MapSingularity(f"z0 must lie in the open upper half-plane, got {z0}")
        object.__setattr__(self, "z0", z0)

    def to_disk(self, z):
        z = np.asarray(z, dtype=np.complex128)
        denom = z - np.conj(self.z0)
        if np.any(np.abs(denom) == 0):
            raise MapSingularity(f"to_disk undefined at z = conj(z0) = {np.conj(self.z0)}")
        return (z - self.z0) / denom

    def to_halfplane(self, zeta):
        zeta = np.asarray(zeta, dtype=np.complex128)
        denom = zeta - 1.0
        if np.any(np.abs(denom) == 0):
            raise MapSingularity("to_halfplane undefined at zeta = 1")
        return (np.conj(self.z0) * zeta - self.z0) / denom

    def boundary_point(self, theta):
        """Real axis point t(theta) = z(e^{i theta}); theta = 0 maps to infinity."""
        t = self.to_halfplane(np.exp(1j * np.asarray(theta, dtype=np.float64)))
        return np.real(t)

    def weight(self, theta):
        """Jacobian w(theta) with dt/(1+t^2) = w(theta) d theta; positive, smooth off theta=0."""
        zeta = np.exp(1j * np.asarray(theta, dtype=np.float64))
        denom = np.abs(zeta - 1.0) ** 2 + np.abs(np.conj(self.z0) * zeta - self.z0) ** 2
        return 2.0 * self.z0.imag / denom


def weight_transform(moebius, theta):
    """Jacobian weight at angles theta; the axis substitution breaks at theta=0."""
    if np.any(np.exp(1j * np.asarray(theta)) == 1.0):
        raise MapSingularity("weight undefined at theta = 0 (zeta = 1)")
    return moebius.weight(theta)


def axis_quadrature(values, grid, moebius):
    """Trapezoid for integral of f(t) dt/(1+t^2) from circle-grid samples of f.

    The weight itself is smooth on the whole circle; the excluded node (where
    t is infinite) has its integrand value filled by even interpolation, which
    keeps the rule spectrally accurate for smooth transported integrands.
    """
    values = np.asarray(values, dtype=np.float64)
    filled = fill_excluded_even(values, grid.excluded_index)
    w = moebius.weight(grid.angles)
    return float(np.sum(filled * w) * (2.0 * np.pi / grid.N))


def hat_transport(f, moebius):
    """Half-plane evaluator -> disk evaluator by substitution z = z(zeta)."""

    def fhat(zeta):
        return f(moebius.to_halfplane(zeta))

    return fhat


def breve_transport(g, moebius):
    """Disk evaluator -> half-plane evaluator by substitution zeta = zeta(z)."""

    def gbreve(z):
        return g(moebius.to_disk(z))

    return gbreve


@dataclass(frozen=True)
class CircleGrid:
    """Uniform unit-circle grid theta_k = 2 pi k / N, N a power of two >= 256.

    Node 0 sits exactly at zeta = 1 (t = infinity); it is the excluded node of
    every axis quadrature.
    """

    N: int
    excluded_index: int = 0

    def __post_init__(self):
        if self.N < 256 or (self.N & (self.N - 1)) != 0:
            raise DimensionMismatch(f"grid size must be a power of two >= 256, got {self.N}")

    @property
    def angles(self):
        return 2.0 * np.pi * np.arange(self.N) / self.N

    @property
    def points(self):
        return np.exp(1j * self.angles)

    def axis_points(self, moebius):
        """t(theta_k); the excluded node is set to +inf."""
        theta = self.angles
        t = np.empty(self.N)
        mask = np.arange(self.N) != self.excluded_index
        t[mask] = moebius.boundary_point(theta[mask])
        t[~mask] = np.inf
        return t


def fill_excluded_even(values, idx):
    """Fill one node from its four neighbours, O(h^4) for smooth periodic data.

    f(0) ~ (4 (f(h) + f(-h)) - (f(2h) + f(-2h))) / 6.
    """
    n = values.shape[0]
    out = values.copy()
    out[idx] = (
        4.0 * (values[(idx + 1) % n] + values[(idx - 1) % n])
        - (values[(idx + 2) % n] + values[(idx - 2) % n])
    ) / 6.0
    return out


@dataclass(frozen=True)
class DensityGrid:
    """Samples of a p x p Hermitian PSD density on a circle grid.

    ``values[k]`` approximates mu'(t(theta_k)); the axis samples coincide with
    the circle samples because the density transports by pure substitution.
    ``psd_defect`` records the worst negative eigenvalue removed by the PSD
    projection, ``pole_flags`` marks nodes where the two-epsilon boundary
    passes disagreed (suspected pole of phi on the real axis).
    """

    grid: CircleGrid
    map: MoebiusMap
    values: np.ndarray
    psd_defect: float = 0.0
    pole_flags: np.ndarray = field(default=None)
    excluded_filled: bool = False

    @property
    def p(self):
        return self.values.shape[1]

    @property
    def axis_values(self):
        return self.values

    def axis_points(self):
        return self.grid.axis_points(self.map)


def _herm_psd_project(batch):
    """Hermitianize and clip negative eigenvalues; return (projected, worst defect)."""
    sym = 0.5 * (batch + np.conj(np.swapaxes(batch, -1, -2)))
    w, v = np.linalg.eigh(sym)
    defect = float(max(0.0, -w.min())) if w.size else 0.0
    w_clipped = np.clip(w, 0.0, None)
    proj = np.einsum("...ij,...j,...kj->...ik", v, w_clipped, v.conj())
    return proj, defect


def axis_density(phi_batch, ts, eps=1e-5):
    """Density samples at real points via Im phi(t + i eps)/pi, Richardson in eps.

    ``phi_batch`` maps an array of complex points to stacked p x p values.
    Returns (values, disagreement) where disagreement is the per-node relative
    gap between the eps and eps/2 passes (pole indicator).
    """
    ts = np.asarray(ts, dtype=np.float64)
    v1 = np.asarray(phi_batch(ts + 1j * eps))
    v2 = np.asarray(phi_batch(ts + 0.5j * eps))
    im1 = (v1 - np.conj(np.swapaxes(v1, -1, -2))) / 2j
    im2 = (v2 - np.conj(np.swapaxes(v2, -1, -2))) / 2j
    extrap = (2.0 * im2 - im1) / np.pi
    scale = 1.0 + np.abs(im2).max(axis=(-2, -1))
    disagreement = np.abs(im2 - im1).max(axis=(-2, -1)) / scale
    return extrap, disagreement


def extract_density(h, grid, moebius, eps=1e-5):
    """Boundary density of a Herglotz evaluator on a circle grid.

    Evaluates phi just above the axis at the grid's t-points (two passes,
    eps and eps/2, Richardson extrapolated), projects each node onto the
    Hermitian PSD cone recording the pre-projection defect, flags nodes where
    the passes disagree by more than 1e-3 relative, and fills the excluded
    node (t = infinity) by even fourth-order interpolation from neighbours.
    """
    idx = grid.excluded_index
    mask = np.arange(grid.N) != idx
    ts = grid.axis_points(moebius)[mask]

    raw, disagreement = axis_density(h.eval_many, ts, eps=eps)

    p = raw.shape[1]
    values = np.zeros((grid.N, p, p), dtype=np.complex128)
    values[mask] = raw
    flags = np.zeros(grid.N, dtype=bool)
    flags[mask] = (disagreement > 1e-3) | ~np.isfinite(disagreement)

    # pole-refused evaluations come back NaN: flag and zero them
    bad = ~np.isfinite(values).all(axis=(1, 2))
    flags |= bad
    values[bad] = 0.0

    values = fill_excluded_even(values, idx)
    proj, defect = _herm_psd_project(values)
    return DensityGrid(
        grid=grid,
        map=moebius,
        values=proj,
        psd_defect=defect,
        pole_flags=flags,
        excluded_filled=True,
    )
