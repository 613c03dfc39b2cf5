"""Plane-wave modes of the half-plane problem at fixed (kx, omega).

For omega above the band edge, X = k^2 solves omega^2 = X + (f - nu X)^2 with
one positive root X+ (propagating, ky real) and one negative root X-
(evanescent, ky imaginary). Decay convention throughout: Im kappa_ev > 0, so
exp(i kappa_ev y) decays into the fluid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bulk import FluidParams
from .errors import BranchPointError


def x_roots(params: FluidParams, omega):
    """Roots (X+, X-) of nu^2 X^2 + (1 - 2 nu f) X + f^2 - omega^2 = 0; vectorized.

    X- is taken from the quadratic formula (no cancellation since the linear
    coefficient is positive) and X+ from the product of roots.
    """
    f, nu = params.f, params.nu
    b = 1 - 2 * nu * f
    c = f * f - np.asarray(omega) ** 2
    disc = np.sqrt(b * b - 4 * nu * nu * c)
    X_minus = (-b - disc) / (2 * nu * nu)
    X_plus = c / (nu * nu * X_minus)
    return X_plus, X_minus


def omega_of_x(params: FluidParams, X):
    """Frequency on the upper band for k^2 = X (X may be negative or complex)."""
    return np.sqrt(X + (params.f - params.nu * X) ** 2)


def kappa_ev(params: FluidParams, kx, kappa):
    """Evanescent wavenumber i sqrt(kappa^2 + 2 kx^2 + (1 - 2 nu f)/nu^2), Im > 0 for real input."""
    f, nu = params.f, params.nu
    return 1j * np.sqrt(np.asarray(kappa) ** 2 + 2 * np.asarray(kx) ** 2 + (1 - 2 * nu * f) / nu**2 + 0j)


@dataclass(frozen=True)
class TransverseRoots:
    kx: float
    omega: float
    X_plus: float
    X_minus: float
    kappa_in: complex
    kappa_out: complex
    kappa_ev: complex
    kappa_div: complex
    q_plus: float
    q_minus: float

    @property
    def roots(self):
        return (self.kappa_in, self.kappa_out, self.kappa_ev, self.kappa_div)


def mode_q(params: FluidParams, X, omega):
    return (params.f - params.nu * X) / omega


def transverse_roots(params: FluidParams, kx: float, omega: float) -> TransverseRoots:
    """All four ky roots at fixed (kx, omega).

    Raises BranchPointError where the propagating pair coalesces (X+ = kx^2).
    Below the band edge kappa_out is the decaying imaginary root (Im > 0).
    """
    if not omega > 0:
        raise ValueError("omega must be positive")
    Xp, Xm = x_roots(params, omega)
    Xp, Xm = float(Xp), float(Xm)
    gap = Xp - kx * kx
    if abs(gap) <= 1e-12 * max(1.0, kx * kx):
        raise BranchPointError(f"X+ = kx^2 at kx={kx}, omega={omega}: ky = 0 is a double root")
    if gap > 0:
        k_out = complex(np.sqrt(gap))
    else:
        k_out = 1j * np.sqrt(-gap)
    k_ev = 1j * np.sqrt(kx * kx - Xm)
    return TransverseRoots(
        kx, omega, Xp, Xm, -k_out, k_out, k_ev, -k_ev,
        mode_q(params, Xp, omega), mode_q(params, Xm, omega),
    )


def raw_mode(params: FluidParams, kx, ky, omega):
    """Unnormalized eigenvector (X/omega, kx - i ky q, ky + i kx q) with X = kx^2 + ky^2."""
    X = kx * kx + ky * ky
    q = mode_q(params, X, omega)
    return np.stack(np.broadcast_arrays(X / omega, kx - 1j * ky * q, ky + 1j * kx * q))


def section_infinity(params: FluidParams, kx, ky, omega=None):
    """Section psi^inf = raw_mode / (sqrt 2 (kx - i ky)) in a form regular at kx = i ky.

    Uses (1 - q)/X = ((1 - 2 nu f + nu^2 X)/(omega + f) + nu)/omega, valid on
    shell. ``omega`` defaults to the principal root at X = kx^2 + ky^2; pass it
    explicitly when ky is off the real axis.
    """
    f, nu = params.f, params.nu
    kx = np.asarray(kx)
    ky = np.asarray(ky)
    X = kx * kx + ky * ky
    if omega is None:
        omega = omega_of_x(params, X)
    Db = kx + 1j * ky
    r = ((1 - 2 * nu * f + nu * nu * X) / (omega + f) + nu) / omega
    comps = np.broadcast_arrays(Db / omega, 1 + 1j * ky * Db * r, 1j - 1j * kx * Db * r)
    return np.stack(comps) / np.sqrt(2)


def continued_hamiltonian(params: FluidParams, kx, ky) -> np.ndarray:
    """H(kx, ky) with ky allowed complex (polynomial continuation, not Hermitian then)."""
    m = params.f - params.nu * (kx * kx + ky * ky)
    return np.array([[0, kx, ky], [kx, 0, -1j * m], [ky, 1j * m, 0]], dtype=complex)
