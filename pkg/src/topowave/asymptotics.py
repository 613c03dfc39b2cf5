"""Behaviour of the family-a scattering amplitude near |kx| = infinity.

The leading-order determinant g_0, the line-circle ansatz for its zeros, the
second-order correction locating the merge point, and the Dirichlet check
where S_0 -> -1 and nothing winds at infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boundary import dirichlet_bc
from .bulk import FluidParams
from .edge import count_nb
from .scattering import GAUGE_ZERO, SectionGauge, g_family_a, scattering_amplitude
from .winding import ContourArc, winding

SQRT2 = math.sqrt(2.0)
# psi^0 and psi^inf both carry 1/sqrt(2), so the exact g_0 is half the bare formula.
SECTION_NORM = 0.5


def g0_exact(params: FluidParams, a: float, kx, kappa):
    """Exact g_0(kx, kappa) with the normalized zeta = 0 sections."""
    return g_family_a(params, a, GAUGE_ZERO, kx, kappa)


def asymptotic_g0(params: FluidParams, a: float, kx, kappa):
    """Leading order i(2 kx + i a (kappa_ev - kappa)) with kappa_ev ~ i sqrt(2 kx^2 + kappa^2).

    Valid for |kx| >= 10. Compare with ``SECTION_NORM * asymptotic_g0`` against
    :func:`g0_exact`. ``params`` is accepted for signature symmetry; the
    leading term does not depend on f or nu.
    """
    kx = np.asarray(kx, float)
    kappa = np.asarray(kappa, float)
    if np.any(np.abs(kx) < 10):
        raise ValueError("asymptotic_g0 needs |kx| >= 10")
    kev = 1j * np.sqrt(2 * kx**2 + kappa**2)
    return 1j * (2 * kx + 1j * a * (kev - kappa))


def asymptotic_g0_dual(a: float, lambda_x, epsilon):
    """The same leading term in the dual variables of the contour.

    Substituting kx = lambda/(lambda^2+eps^2), kappa ~ eps/(lambda^2+eps^2)
    gives (i/(lambda^2+eps^2)) (2 lambda - a sqrt(2 lambda^2 + eps^2) - i a eps).
    """
    lam = np.asarray(lambda_x, float)
    r2 = lam**2 + epsilon**2
    return (1j / r2) * (2 * lam - a * np.sqrt(2 * lam**2 + epsilon**2) - 1j * a * epsilon)


@dataclass(frozen=True)
class InfinityAnsatz:
    """Zero of G_0 = 2 + a(c_+ + c_-) on the circle c_+^2 + c_-^2 = 2 with c_+^2 < 1 < c_-^2."""

    a: float
    c_plus: float | None
    c_minus: float | None
    bound_state_at: str  # "plus_infinity" | "minus_infinity" | "none"
    transition: bool = False


def infinity_ansatz(a: float) -> InfinityAnsatz:
    """Admissible line-circle intersection and the side at which an edge mode survives."""
    a = float(a)
    if a == 0:
        raise ValueError("a = 0: the line 2 + a(c+ + c-) = 0 has no solution")
    if math.isinf(a):
        return InfinityAnsatz(a, 1.0, -1.0, "plus_infinity" if a > 0 else "minus_infinity")
    s = -2.0 / a  # c_+ + c_-
    disc = 4.0 - s * s
    transition = math.isclose(abs(a), SQRT2, rel_tol=1e-12)
    if disc <= 0:
        # |a| <= 1: the line misses the circle or touches it at c^2 = 1
        return InfinityAnsatz(a, None, None, "none", transition)
    root = math.sqrt(disc)
    t1, t2 = (s + root) / 2, (s - root) / 2
    c_plus, c_minus = (t1, t2) if abs(t1) < abs(t2) else (t2, t1)
    if transition:
        c_plus = 0.0  # tangency to the axis; remove roundoff
    if c_plus > 0 > c_minus:
        side = "plus_infinity"
    elif c_plus < 0 < c_minus:
        side = "minus_infinity"
    else:
        side = "none"
    return InfinityAnsatz(a, c_plus, c_minus, side, transition)


@dataclass(frozen=True)
class SecondOrder:
    d_plus: float
    d_minus: float
    merge_kx_squared: float | None  # math.inf when c_+ = 0, None when -d_+/c_+ <= 0


def second_order_coefficients(params: FluidParams, a: float) -> SecondOrder:
    """Solve d_+ + d_- = -1/(nu^2 (1-c_-)(1-c_+)), c_+ d_+ + c_- d_- = (1-2 nu f)/(2 nu^2).

    The merge point of the branch that the ansatz places at infinity sits at
    kx^2 = -d_+/c_+.
    """
    if abs(a) < SQRT2 and not math.isclose(abs(a), SQRT2, rel_tol=1e-12):
        raise ValueError("second order needs |a| >= sqrt(2)")
    ans = infinity_ansatz(a)
    cp, cm = ans.c_plus, ans.c_minus
    if cp == cm:
        raise ValueError("singular second-order system (c+ = c-)")
    nu, f = params.nu, params.f
    M = np.array([[1.0, 1.0], [cp, cm]])
    rhs = np.array([-1.0 / (nu**2 * (1 - cm) * (1 - cp)), (1 - 2 * nu * f) / (2 * nu**2)])
    d_plus, d_minus = np.linalg.solve(M, rhs)
    if abs(cp) < 1e-12:
        merge = math.inf
    else:
        q = -d_plus / cp
        merge = float(q) if q > 0 else None
    return SecondOrder(float(d_plus), float(d_minus), merge)


@dataclass
class DirichletReport:
    s0_deviation: float  # max |S_0 + 1| at the sampled large-|kx| points
    outer_winding: float  # eps -> 0 limit on the infinity arc
    full_winding: float
    n_b: int
    passed: bool


DIRICHLET_POINTS = ((100.0, 1.0), (-100.0, 1.0), (50.0, 1.0), (-50.0, 1.0))


def dirichlet_infinity_check(params: FluidParams, epsilon: float = 0.05, lambda0: float = 0.05) -> DirichletReport:
    """S_0 -> -1 at infinity for Dirichlet, so the outer arc does not wind and n_b = C_+ = 2."""
    bc = dirichlet_bc()
    kx, kappa = np.array(DIRICHLET_POINTS).T
    S, _ = scattering_amplitude(params, bc, GAUGE_ZERO, kx, kappa)
    dev = float(np.max(np.abs(S + 1)))
    outer = winding(params, bc, GAUGE_ZERO, ContourArc(epsilon, lambda0, "outer"))
    arc = ContourArc(epsilon, lambda0, "full")
    # the full winding counts C_+ only in a gauge singular inside the circle
    full = winding(params, bc, SectionGauge(1j * (arc.radius + epsilon)), arc)
    nb = count_nb(params, bc)
    passed = dev < 0.05 and abs(outer.limit) < 0.02 and abs(full.winding - 2) < 0.02 and nb == 2
    return DirichletReport(dev, float(outer.limit), float(full.winding), nb, passed)
