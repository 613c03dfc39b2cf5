"""Scattering states psi_in + S psi_out + T psi_ev above the upper band.

Incoming and outgoing waves (ky = -kappa, +kappa) use a common section psi^zeta;
the evanescent part always uses psi^inf at kappa_ev. Two independent routes to
S are provided: the explicit 2x2 determinants (Cramer's rule on the boundary
rows) and the null vector of the 2x3 boundary matrix [A Psi_in | A Psi_out | A Psi_ev].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boundary import BoundaryCondition, boundary_vector, omega_form
from .bulk import FluidParams, omega_plus
from .errors import ContractViolationError, PoleError, SingularGaugeError
from .modes import kappa_ev, raw_mode, section_infinity, x_roots


@dataclass(frozen=True)
class SectionGauge:
    """Gauge zeta on the Riemann sphere; ``zeta=None`` is the point at infinity."""

    zeta: complex | None = None

    def transition(self, kx, ky):
        """t^zeta_inf = (conj(z) - conj(zeta))/(z - zeta), continued holomorphically in ky."""
        if self.zeta is None:
            return np.ones(np.broadcast(np.asarray(kx), np.asarray(ky)).shape, dtype=complex)
        z = np.asarray(kx) + 1j * np.asarray(ky)
        zbar = np.asarray(kx) - 1j * np.asarray(ky)
        den = z - self.zeta
        if np.any(np.abs(den) <= 1e-12 * max(1.0, abs(self.zeta))):
            raise SingularGaugeError(f"section evaluated at its singular point zeta={self.zeta}")
        return (zbar - np.conj(self.zeta)) / den

    @property
    def label(self):
        return "inf" if self.zeta is None else f"{complex(self.zeta):g}"


GAUGE_INF = SectionGauge(None)
GAUGE_ZERO = SectionGauge(0j)


@dataclass(frozen=True)
class ModeVector:
    psi_hat: np.ndarray
    normalization: str


def section(gauge: SectionGauge, params: FluidParams, kx, ky, omega=None) -> ModeVector:
    """Section psi^zeta = t^zeta_inf psi^inf of the upper band at (kx, ky)."""
    psi = section_infinity(params, kx, ky, omega) * gauge.transition(kx, ky)
    return ModeVector(psi, "section:" + gauge.label)


@dataclass(frozen=True)
class ScatteringPoint:
    kx: float
    kappa: float
    omega: float
    kappa_ev: complex

    @classmethod
    def at(cls, params: FluidParams, kx: float, kappa: float) -> "ScatteringPoint":
        if not kappa > 0:
            raise ValueError("kappa must be positive")
        return cls(kx, kappa, float(omega_plus(params, kx, kappa)), complex(kappa_ev(params, kx, kappa)))


def _uv(gauge, params, kx, ky, omega):
    psi = section(gauge, params, kx, ky, omega).psi_hat
    return psi[1], psi[2]


def g_family_a(params: FluidParams, a: float, gauge: SectionGauge, kx, kappa):
    """Determinant g_zeta(kx, kappa) of the v = 0, u_x + a v_y = 0 boundary rows.

    kappa may carry either sign (g(-kappa) enters S); the evanescent column is
    evaluated at kappa_ev(kx, kappa), which depends on kappa^2 only.
    """
    kx, kappa = np.broadcast_arrays(np.asarray(kx, float), np.asarray(kappa, float))
    omega = omega_plus(params, kx, kappa)
    kev = kappa_ev(params, kx, kappa)
    u, v = _uv(gauge, params, kx, kappa, omega)
    ue, ve = _uv(GAUGE_INF, params, kx, kev, omega)
    return (kx * u + a * kappa * v) * ve - (kx * ue + a * kev * ve) * v


def h_family_a(params: FluidParams, a: float, gauge: SectionGauge, kx, kappa):
    kx, kappa = np.broadcast_arrays(np.asarray(kx, float), np.asarray(kappa, float))
    omega = omega_plus(params, kx, kappa)
    u, v = _uv(gauge, params, kx, kappa, omega)
    um, vm = _uv(gauge, params, kx, -kappa, omega)
    return (kx * u + a * kappa * v) * vm - (kx * um - a * kappa * vm) * v


def _check_pole(g, scale=1.0):
    if np.any(np.abs(g) <= 1e-14 * scale):
        raise PoleError("scattering denominator vanishes (bound state at real kappa)")


def _boundary_columns(params, bc, gauge, kx, kappa):
    """A(kx) applied to the in, out and evanescent boundary vectors, shape (..., 2) each."""
    omega = omega_plus(params, kx, kappa)
    kev = kappa_ev(params, kx, kappa)
    A = bc.matrix(kx)
    cols = []
    for ky, g in ((-kappa, gauge), (kappa, gauge), (kev, GAUGE_INF)):
        psi = section(g, params, kx, ky, omega).psi_hat
        Psi = boundary_vector(psi, ky)
        cols.append(np.einsum("...ij,j...->...i", A, Psi))
    return cols


def scattering_parts(params: FluidParams, bc, gauge: SectionGauge, kx, kappa):
    """Numerator and denominator (N, D) with S = N / D, both smooth in (kx, kappa).

    S can only turn quickly where D (or N) passes close to zero, which makes
    these the right quantities to watch when resolving arg S along a path.
    """
    kx, kappa = np.broadcast_arrays(np.asarray(kx, float), np.asarray(kappa, float))
    if isinstance(bc, BoundaryCondition):
        c_in, c_out, c_ev = _boundary_columns(params, bc, gauge, kx, kappa)
        det = lambda p, q: p[..., 0] * q[..., 1] - p[..., 1] * q[..., 0]
        return -det(c_in, c_ev), det(c_out, c_ev)
    a = float(bc)
    return -g_family_a(params, a, gauge, kx, -kappa), g_family_a(params, a, gauge, kx, kappa)


def scattering_amplitude(params: FluidParams, bc, gauge: SectionGauge, kx, kappa):
    """(S, T) at real kx and kappa >= 0; vectorized. kappa = 0 is the threshold, where S = -1.

    ``bc`` is either the family parameter a (explicit g_zeta, h_zeta
    determinants) or a BoundaryCondition (Cramer's rule on A(kx) applied to
    the three boundary vectors; for Dirichlet this is the u, v determinant).
    """
    kx, kappa = np.broadcast_arrays(np.asarray(kx, float), np.asarray(kappa, float))
    if np.any(kappa < 0):
        raise ValueError("kappa must be non-negative")
    if isinstance(bc, BoundaryCondition):
        c_in, c_out, c_ev = _boundary_columns(params, bc, gauge, kx, kappa)
        det = lambda p, q: p[..., 0] * q[..., 1] - p[..., 1] * q[..., 0]
        den = det(c_out, c_ev)
        _check_pole(den)
        return -det(c_in, c_ev) / den, -det(c_out, c_in) / den
    a = float(bc)
    g = g_family_a(params, a, gauge, kx, kappa)
    _check_pole(g)
    return -g_family_a(params, a, gauge, kx, -kappa) / g, -h_family_a(params, a, gauge, kx, kappa) / g


def boundary_residual(params: FluidParams, bc: BoundaryCondition, gauge: SectionGauge, kx, kappa, S, T) -> float:
    """max |A(kx)(Psi_in + S Psi_out + T Psi_ev)| for an assembled scattering state."""
    c_in, c_out, c_ev = _boundary_columns(params, bc, gauge, kx, kappa)
    r = c_in + np.asarray(S)[..., None] * c_out + np.asarray(T)[..., None] * c_ev
    return float(np.max(np.abs(r)))


# ------------------------------------------------------------ general route


def scattering_modes(params: FluidParams, kx, omega, gauge: SectionGauge | None = None):
    """Boundary vectors (Psi_in, Psi_out, Psi_ev) at fixed (kx, omega) above the band.

    With ``gauge=None`` the unnormalized plane-wave vectors are used; otherwise
    in/out use the section psi^zeta and the evanescent mode psi^inf.
    """
    kx, omega = np.broadcast_arrays(np.asarray(kx, float), np.asarray(omega, float))
    Xp, Xm = x_roots(params, omega)
    if np.any(Xp - kx * kx <= 0):
        raise ValueError("omega must lie above the band edge omega_plus(kx, 0)")
    kap = np.sqrt(Xp - kx * kx)
    kev = 1j * np.sqrt(kx * kx - Xm)
    out = []
    for ky, g in ((-kap, gauge), (kap, gauge), (kev, GAUGE_INF if gauge is not None else None)):
        if g is None:
            psi = raw_mode(params, kx, ky, omega)
        else:
            psi = section(g, params, kx, ky, omega).psi_hat
        out.append(boundary_vector(psi, ky))
    return out


def scattering_amplitude_general(params: FluidParams, bc: BoundaryCondition, kx, omega, gauge: SectionGauge | None = None):
    """(S, T) from the one-dimensional kernel of [A Psi_in | A Psi_out | A Psi_ev]."""
    Pin, Pout, Pev = scattering_modes(params, kx, omega, gauge)
    kx = np.broadcast_to(np.asarray(kx, float), np.shape(Pin)[1:])
    A = bc.matrix(kx)
    M = np.stack([np.einsum("...ij,j...->...i", A, P) for P in (Pin, Pout, Pev)], axis=-1)  # (..., 2, 3)
    _, s, Vh = np.linalg.svd(M)
    null = np.conj(Vh[..., -1, :])
    f_in, f_out, f_ev = null[..., 0], null[..., 1], null[..., 2]
    if np.any(np.abs(f_in) <= 1e-12 * np.linalg.norm(null, axis=-1)):
        raise ContractViolationError("incoming amplitude of the boundary kernel vanishes")
    return f_out / f_in, f_ev / f_in


def kernel_amplitude(params: FluidParams, bc: BoundaryCondition, kx, kappa, gauge: SectionGauge | None = None):
    """Kernel-route S at (kx, kappa), i.e. at omega = omega_plus(kx, kappa)."""
    return scattering_amplitude_general(params, bc, kx, omega_plus(params, kx, kappa), gauge)[0]


def flux_terms(params: FluidParams, kx, omega):
    """Omega-pairings of the unnormalized in/out boundary vectors and the closed form for out-out."""
    Pin, Pout, _ = scattering_modes(params, kx, omega)
    Om = omega_form(params.nu).Omega
    pair = lambda p, q: np.einsum("i...,ij,j...->...", np.conj(p), Om, q)
    Xp, _ = x_roots(params, omega)
    kout = np.sqrt(Xp - np.asarray(kx) ** 2)
    closed = -(2 * Xp * kout / omega) * (1 - 2 * params.nu * (params.f - params.nu * Xp))
    return {
        "out_out": pair(Pout, Pout),
        "in_in": pair(Pin, Pin),
        "out_in": pair(Pout, Pin),
        "in_out": pair(Pin, Pout),
        "closed_form": closed,
    }


def independence_margin(params: FluidParams, kx: float, omega: float) -> float:
    """Smallest over largest singular value of the 6x3 matrix [Psi_in | Psi_out | Psi_ev]."""
    M = np.stack(scattering_modes(params, kx, omega), axis=1)
    s = np.linalg.svd(M, compute_uv=False)
    return float(s[-1] / s[0])
