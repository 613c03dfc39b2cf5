"""Bulk shallow-water Hamiltonian, bands, projectors and Chern numbers.

The linearized rotating shallow-water system with odd viscosity reads
H(k) = d(k) . S with d = (kx, ky, f - nu k^2) and S a spin-1 representation.
Its bands are omega = 0, +-|d|; the regularized Bloch vector e = d/|d| tends to
the south pole at infinity, which is what makes the Chern integrals well posed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import (
    CurvatureResidualError,
    DegenerateBandsError,
    InvalidParametersError,
    UnderResolvedWarning,
)
from .quadrature import PlaneGrid, integrate

# spin-1 matrices in the form used for the fluid variables (eta, u, v)
S1 = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex)
S2 = np.array([[0, 0, 1], [0, 0, 0], [1, 0, 0]], dtype=complex)
S3 = np.array([[0, 0, 0], [0, 0, -1j], [0, 1j, 0]], dtype=complex)
SPIN1 = np.stack([S1, S2, S3])

BAND_M = {"minus": -1, "zero": 0, "plus": 1}


@dataclass(frozen=True)
class FluidParams:
    """Coriolis parameter f and odd viscosity nu (gravity scaled to one)."""

    f: float = 1.0
    nu: float = 0.2
    _checked: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        if not self._checked:
            return
        if not (np.isfinite(self.f) and np.isfinite(self.nu)):
            raise InvalidParametersError("f and nu must be finite")
        if not (self.f > 0 and self.nu > 0):
            raise InvalidParametersError(f"need f > 0 and nu > 0, got f={self.f}, nu={self.nu}")
        if not self.nu < 1.0 / (4.0 * self.f):
            raise InvalidParametersError(f"need nu < 1/(4f) = {1 / (4 * self.f):.6g}, got {self.nu}")

    @classmethod
    def unchecked(cls, f: float, nu: float) -> "FluidParams":
        """Bypass validation. Meant for tests probing the unregularized nu = 0 model."""
        return cls(f, nu, _checked=False)


class Momentum2(NamedTuple):
    kx: float
    ky: float


class _Infinity:
    """Tag for the point at infinity of the compactified momentum plane."""

    def __repr__(self):
        return "INFINITY"


INFINITY = _Infinity()


@dataclass(frozen=True)
class BlochVector:
    d: np.ndarray | None  # None at infinity
    e: np.ndarray


@dataclass(frozen=True)
class BandProjector:
    band: str
    P: np.ndarray


def _check_band(band):
    if band not in BAND_M:
        raise ValueError(f"band must be one of {sorted(BAND_M)}, got {band!r}")
    return BAND_M[band]


def d_vector(params: FluidParams, kx, ky):
    """d(k) = (kx, ky, f - nu k^2), stacked along the last axis."""
    kx, ky = np.broadcast_arrays(np.asarray(kx, float), np.asarray(ky, float))
    return np.stack([kx, ky, params.f - params.nu * (kx**2 + ky**2)], axis=-1)


def bloch_vector(params: FluidParams, k) -> BlochVector:
    if k is INFINITY:
        return BlochVector(None, np.array([0.0, 0.0, -1.0]))
    d = d_vector(params, *k)
    return BlochVector(d, d / np.linalg.norm(d))


def hamiltonian(params: FluidParams, k) -> np.ndarray:
    """3x3 Hermitian H(k) acting on (eta, u, v)."""
    kx, ky = k
    m = params.f - params.nu * (kx * kx + ky * ky)
    return kx * S1 + ky * S2 + m * S3


def omega_plus(params: FluidParams, kx, ky=0.0):
    """Upper band frequency sqrt(k^2 + (f - nu k^2)^2); vectorized."""
    X = np.asarray(kx) ** 2 + np.asarray(ky) ** 2
    return np.sqrt(X + (params.f - params.nu * X) ** 2)


def band_frequencies(params: FluidParams, k):
    """Return (omega_minus, omega_zero, omega_plus), ascending."""
    w = omega_plus(params, *k)
    return -w, np.zeros_like(w), w


def spin1_projector(e, m: int) -> np.ndarray:
    """Eigenprojector of e.S (spin-1 fluid basis) for eigenvalue m; e has shape (..., 3)."""
    E = np.einsum("...i,ijk->...jk", np.asarray(e, dtype=complex), SPIN1)
    E2 = E @ E
    if m == 0:
        return np.eye(3) - E2
    return 0.5 * (E2 + m * E)


def eigenprojector(params: FluidParams, k, band: str) -> BandProjector:
    m = _check_band(band)
    return BandProjector(band, spin1_projector(bloch_vector(params, k).e, m))


def fd_curvature(projector: Callable, kx, ky, h=None):
    """(1/i) tr(P [dP/dkx, dP/dky]) by central differences.

    ``projector(kx, ky)`` must return projectors of shape (..., n, n). The
    step defaults to 1e-4 * max(1, |k|). The result is complex; callers check
    and drop the imaginary residue.
    """
    kx = np.asarray(kx, float)
    ky = np.asarray(ky, float)
    if h is None:
        h = 1e-4 * np.maximum(1.0, np.hypot(kx, ky))
    h = np.asarray(h, float)
    hh = h[..., None, None]
    P = projector(kx, ky)
    Px = (projector(kx + h, ky) - projector(kx - h, ky)) / (2 * hh)
    Py = (projector(kx, ky + h) - projector(kx, ky - h)) / (2 * hh)
    C = Px @ Py - Py @ Px
    return np.trace(P @ C, axis1=-2, axis2=-1) / 1j


def _unit_e(params, kx, ky):
    d = d_vector(params, kx, ky)
    return d / np.linalg.norm(d, axis=-1, keepdims=True)


def berry_curvature(params: FluidParams, k, band: str, h: float | None = None) -> float:
    """Finite-difference Berry curvature of one band at a single momentum."""
    m = _check_band(band)
    if h is not None and not h > 0:
        raise ValueError("step h must be positive")
    val = complex(fd_curvature(lambda x, y: spin1_projector(_unit_e(params, x, y), m), k[0], k[1], h))
    if abs(val.imag) > 1e-6:
        raise CurvatureResidualError(f"imaginary residue {val.imag:.3e} at k={tuple(k)}")
    return val.real


def berry_curvature_analytic(params: FluidParams, kx, ky, band: str):
    """m e.(d1 e x d2 e) = m (f + nu k^2)/|d|^3, vectorized."""
    m = _check_band(band)
    X = np.asarray(kx) ** 2 + np.asarray(ky) ** 2
    d = np.sqrt(X + (params.f - params.nu * X) ** 2)
    return m * (params.f + params.nu * X) / d**3


def default_cutoff(params: FluidParams) -> float:
    """Disk radius K beyond which e is close to its limit at infinity."""
    if params.nu > 0:
        scale = max(np.sqrt(params.f / params.nu), np.sqrt(max(1 - 2 * params.nu * params.f, 0.0)) / params.nu)
    else:
        scale = max(params.f, 1.0)
    return 8.0 * scale


def min_band_gap(params: FluidParams, grid: PlaneGrid | None = None) -> float:
    """Smallest separation |d| between adjacent bands over the grid nodes."""
    grid = grid or PlaneGrid()
    kx, ky, _ = grid.nodes(grid.cutoff or default_cutoff(params))
    return float(np.min(omega_plus(params, kx, ky)))


def chern_number(params: FluidParams, band: str, grid: PlaneGrid | None = None, method: str = "analytic") -> float:
    """Chern number of a band on the compactified plane.

    ``method="analytic"`` integrates the closed-form spin-1 curvature;
    ``method="fd"`` uses the finite-difference trace formula at every node.
    Emits UnderResolvedWarning if the value is more than 0.05 from an integer.
    """
    m = _check_band(band)
    grid = grid or PlaneGrid()
    kx, ky, w = grid.nodes(grid.cutoff or default_cutoff(params))
    gap = float(np.min(omega_plus(params, kx, ky)))
    if gap < 1e-6:
        raise DegenerateBandsError(f"minimal band gap {gap:.3e} on the grid")
    if method == "analytic":
        density = berry_curvature_analytic(params, kx, ky, band)
    elif method == "fd":
        vals = fd_curvature(lambda x, y: spin1_projector(_unit_e(params, x, y), m), kx, ky)
        resid = np.max(np.abs(vals.imag))
        if resid > 1e-6:
            raise CurvatureResidualError(f"imaginary residue {resid:.3e} in curvature")
        density = vals.real
    else:
        raise ValueError(f"unknown method {method!r}")
    value = integrate(density, w) / (2 * np.pi)
    if abs(value - round(value)) > 0.05:
        warnings.warn(f"Chern number {value:.4f} is not near an integer", UnderResolvedWarning, stacklevel=2)
    return value
