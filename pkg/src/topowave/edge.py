"""Edge modes of the half-plane y > 0 under a boundary condition A(kx) Psi = 0.

Below the upper band a bound state is a combination of the two decaying
modes, ky = i beta (the continued propagating root) and ky = kappa_ev. We
parametrize by the decay rate beta rather than omega: X+ = kx^2 - beta^2 fixes
omega, and the determinant F(kx, beta) = det[A Psi_1 | A Psi_2] extends
analytically to beta <= 0. Merge events with the band edge are the zeros of
F(kx, 0); the sign of d beta*/d kx there says whether a branch emerges or
disappears.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.optimize import brentq

from .boundary import BoundaryCondition, family_a_bc, kernel_basis
from .bulk import FluidParams, omega_plus
from .errors import NoBoundStateSectorError, UnresolvedMergeWarning
from .modes import omega_of_x, section_infinity, x_roots

DET_TOL = 1e-8


def _as_bc(a_or_bc) -> BoundaryCondition:
    return a_or_bc if isinstance(a_or_bc, BoundaryCondition) else family_a_bc(float(a_or_bc))


def decaying_boundary_vectors(params: FluidParams, kx, beta):
    """Unit-normalized boundary data of the two decaying modes at decay rate beta.

    Returns (Psi_1, Psi_2, omega) with Psi arrays of shape (6, ...). Psi_1 is
    the mode with ky = i beta, Psi_2 the evanescent one with ky = i gamma.
    """
    f, nu = params.f, params.nu
    kx, beta = np.broadcast_arrays(np.asarray(kx, float), np.asarray(beta, float))
    Xp = kx * kx - beta * beta
    omega = omega_of_x(params, Xp)
    Xm = -(1 - 2 * nu * f) / nu**2 - Xp
    gamma = np.sqrt(kx * kx - Xm)
    out = []
    for ky in (1j * beta, 1j * gamma):
        psi = section_infinity(params, kx, ky, omega)
        Psi = np.concatenate([psi, 1j * ky * psi], axis=0)
        out.append(Psi / np.linalg.norm(Psi, axis=0))
    return out[0], out[1], omega


def _det(bc, kx, Psi1, Psi2):
    A = bc.matrix(kx)  # (..., 2, 6)
    c1 = np.einsum("...ij,j...->...i", A, Psi1)
    c2 = np.einsum("...ij,j...->...i", A, Psi2)
    return c1[..., 0] * c2[..., 1] - c1[..., 1] * c2[..., 0]


def determinant_beta(params: FluidParams, bc: BoundaryCondition, kx, beta):
    """F(kx, beta) = det[A Psi_1 | A Psi_2]; vectorized, analytic in beta."""
    Psi1, Psi2, _ = decaying_boundary_vectors(params, kx, beta)
    return _det(bc, np.broadcast_arrays(np.asarray(kx, float), np.asarray(beta, float))[0], Psi1, Psi2)


def beta_of_omega(params: FluidParams, kx, omega):
    """Decay rate of the continued propagating root, sqrt(kx^2 - X+(omega))."""
    Xp, _ = x_roots(params, omega)
    return np.sqrt(np.asarray(kx) ** 2 - Xp)


def beta_max(params: FluidParams, kx):
    """beta at omega -> 0, the bottom of the searched gap."""
    return beta_of_omega(params, kx, 0.0)


def bound_state_determinant(params: FluidParams, bc: BoundaryCondition, kx: float, omega: float) -> complex:
    """Determinant whose zeros in (0, omega_plus(kx, 0)) are the edge modes."""
    top = float(omega_plus(params, kx, 0.0))
    if not 0 < omega < top:
        raise NoBoundStateSectorError(f"omega={omega} is outside the gap (0, {top:.6g}) at kx={kx}")
    beta = float(beta_of_omega(params, kx, omega))
    if beta <= 1e-12:
        raise NoBoundStateSectorError("propagating root is not decaying here")
    return complex(determinant_beta(params, bc, kx, beta))


# ---------------------------------------------------------------- zero finding


def _line_zeros(fun, xs, vals, xtol=1e-14):
    """Zeros of a complex function of one real variable with a locally real form.

    A sign change is a phase jump beyond pi/2 between neighbours; each is
    refined on Re(F conj(p)) with p the phase at the left end, then accepted
    only if |F| is tiny compared with its bracket values.
    """
    roots = []
    flips = np.nonzero((vals[1:] * np.conj(vals[:-1])).real < 0)[0]
    for i in flips:
        lo, hi = xs[i], xs[i + 1]
        p = vals[i] / abs(vals[i])
        g = lambda x: (complex(fun(x)) * np.conj(p)).real
        glo, ghi = g(lo), g(hi)
        if glo * ghi > 0:
            continue
        x0 = brentq(g, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)
        if abs(fun(x0)) <= 1e-6 * max(abs(vals[i]), abs(vals[i + 1])):
            roots.append(x0)
    return roots


@dataclass(frozen=True)
class MergeEvent:
    kx: float
    direction: int  # +1 emerges from the band edge as kx increases, -1 disappears
    slope: float  # d beta*/d kx at the merge


def merge_events(params: FluidParams, bc: BoundaryCondition, kx_window=(-40.0, 40.0), n: int = 16001):
    """Zeros of F(kx, 0) in the window, with their emerge/disappear direction."""
    lo, hi = kx_window
    # small irrational offset keeps grid points off symmetric special values
    xs = np.linspace(lo, hi, n) + 1.234567e-7 * (hi - lo)
    xs = xs[(xs >= lo) & (xs <= hi)]
    vals = determinant_beta(params, bc, xs, 0.0)
    events = []
    for x0 in _line_zeros(lambda x: determinant_beta(params, bc, x, 0.0), xs, vals):
        h = 1e-5 * max(1.0, abs(x0))
        dk = (determinant_beta(params, bc, x0 + h, 0.0) - determinant_beta(params, bc, x0 - h, 0.0)) / (2 * h)
        db = (determinant_beta(params, bc, x0, h) - determinant_beta(params, bc, x0, -h)) / (2 * h)
        if abs(db) < 1e-12 * max(abs(dk), 1e-300):
            continue  # tangential contact, no branch crosses the edge here
        slope = complex(-dk / db)
        events.append(MergeEvent(float(x0), int(np.sign(slope.real)), float(slope.real)))
    return events


def bound_states(params: FluidParams, bc: BoundaryCondition, kx: float, n_beta: int = 400, omega_floor: float = 0.0):
    """Edge-mode (beta, omega) pairs at fixed kx, ordered by increasing beta."""
    bmax = float(beta_max(params, kx))
    if omega_floor > 0:
        bmax = float(beta_of_omega(params, kx, omega_floor))
    grid = np.unique(np.concatenate([np.linspace(0, bmax, n_beta)[1:-1], bmax * np.geomspace(1e-9, 0.05, n_beta // 4)]))
    vals = determinant_beta(params, bc, kx, grid)
    betas = _line_zeros(lambda b: determinant_beta(params, bc, kx, b), grid, vals)
    return [(b, float(omega_of_x(params, kx * kx - b * b))) for b in betas]


def asymptotic_branch_probe(params: FluidParams, a, kx_probe: float, min_ratio: float = 0.25, n_beta: int = 2000):
    """Look for an edge mode hugging the band at large |kx|.

    Scans omega from min_ratio * omega_plus(kx, 0) up to the band edge.
    Returns a dict with ``bound_state_exists`` and ``omega_gap`` (distance of
    the closest mode to the band edge, nan if none).
    """
    if abs(kx_probe) < 20:
        raise ValueError("the probe is meant for |kx| >= 20")
    bc = _as_bc(a)
    top = float(omega_plus(params, kx_probe, 0.0))
    found = bound_states(params, bc, kx_probe, n_beta, omega_floor=min_ratio * top)
    if not found:
        return {"bound_state_exists": False, "omega_gap": float("nan"), "beta": float("nan"), "omega": float("nan")}
    beta, omega = min(found, key=lambda t: top - t[1])
    return {"bound_state_exists": True, "omega_gap": top - omega, "beta": beta, "omega": omega}


# ------------------------------------------------------------------ counting


def count_nb(params: FluidParams, bc: BoundaryCondition, kx_window=(-40.0, 40.0), n: int = 16001) -> int:
    """Signed number of branches emerging at the bottom of the upper band.

    Warns with UnresolvedMergeWarning if a branch sits close to the band edge
    at either end of the window, since its merge may lie just outside.
    """
    events = merge_events(params, bc, kx_window, n)
    for kx_end in kx_window:
        near = [b for b, _ in bound_states(params, bc, kx_end) if b < 0.05 * max(1.0, abs(kx_end))]
        if near:
            warnings.warn(
                f"branch at kx={kx_end} has beta={near[0]:.3g}, close to the band edge; count may be partial",
                UnresolvedMergeWarning,
                stacklevel=2,
            )
    return int(sum(e.direction for e in events))


# ------------------------------------------------------------------ spectrum


@dataclass
class EdgeBranch:
    kx: list = field(default_factory=list)
    omega: list = field(default_factory=list)
    beta: list = field(default_factory=list)
    start: str = "window"
    end: str = "window"

    def add(self, kx, beta, omega):
        self.kx.append(kx)
        self.beta.append(beta)
        self.omega.append(omega)

    def predict(self, kx):
        if len(self.kx) < 2:
            return self.omega[-1]
        k0, k1 = self.kx[-2:]
        w0, w1 = self.omega[-2:]
        return w1 + (w1 - w0) * (kx - k1) / (k1 - k0)


@dataclass
class EdgeSpectrum:
    kx: np.ndarray
    band_edge: np.ndarray
    branches: list
    merges: list
    n_a: int = 0  # the upper band has no upper edge

    @property
    def n_b(self):
        return int(sum(e.direction for e in self.merges))

    @property
    def lost(self):
        return [b for b in self.branches if "lost" in (b.start, b.end)]


def in_continuum(params: FluidParams, kx, omega):
    """Bulk-continuum mask |omega| >= omega_plus(kx, 0)."""
    return np.abs(omega) >= omega_plus(params, kx, 0.0)


def edge_spectrum(
    params: FluidParams,
    bc: BoundaryCondition,
    kx_range=(-20.0, 20.0),
    omega_resolution: int = 400,
    n_kx: int = 401,
    max_halvings: int = 6,
) -> EdgeSpectrum:
    """Trace the edge branches of the upper gap over a kx range.

    Roots are found per kx by a sign scan in beta and polished with brentq,
    then linked to branches with a secant predictor. When linking is
    ambiguous the kx step is halved. A branch that starts or stops between two
    kx samples is classified by the merge events found there ('band_edge'),
    by its frequency ('low_frequency'), or else marked 'lost'.
    """
    lo, hi = kx_range
    merges = [e for e in merge_events(params, bc, kx_range, max(4001, 20 * n_kx))]
    kxs = np.linspace(lo, hi, n_kx)

    def roots_at(k):
        return bound_states(params, bc, float(k), omega_resolution)

    active = []
    done = []
    for b, w in roots_at(kxs[0]):
        br = EdgeBranch(start="window")
        br.add(float(kxs[0]), b, w)
        active.append(br)

    def link(k0, k1, depth):
        nonlocal active
        roots = roots_at(k1)
        scale = max(1.0, float(omega_plus(params, k1, 0.0)))
        tol = 0.05 * scale
        preds = [br.predict(k1) for br in active]
        pairs = sorted(
            ((abs(p - w), i, j) for i, p in enumerate(preds) for j, (_, w) in enumerate(roots)),
        )
        used_b, used_r, match = set(), set(), {}
        for d, i, j in pairs:
            if d > tol or i in used_b or j in used_r:
                continue
            used_b.add(i)
            used_r.add(j)
            match[i] = j
        ambiguous = len(match) < min(len(active), len(roots)) or any(
            sum(1 for (_, w) in roots if abs(w - preds[i]) < tol) > 1 for i in match
        )
        if ambiguous and depth < max_halvings:
            mid = 0.5 * (k0 + k1)
            link(k0, mid, depth + 1)
            link(mid, k1, depth + 1)
            return
        crossed = [e for e in merges if k0 < e.kx <= k1]
        new_active = []
        for i, br in enumerate(active):
            if i in match:
                b, w = roots[match[i]]
                br.add(float(k1), b, w)
                new_active.append(br)
            else:
                br.end = _classify(params, min(br.omega[-1], br.predict(k1)), k1, crossed)
                done.append(br)
        for j, (b, w) in enumerate(roots):
            if j not in used_r:
                br = EdgeBranch(start=_classify(params, w, k1, crossed))
                br.add(float(k1), b, w)
                new_active.append(br)
        active = new_active

    for k0, k1 in zip(kxs[:-1], kxs[1:]):
        link(float(k0), float(k1), 0)
    branches = done + active
    branches.sort(key=lambda br: (br.kx[0], br.omega[0]))
    return EdgeSpectrum(kxs, omega_plus(params, kxs, 0.0), branches, merges)


def _classify(params, omega, kx, crossed):
    """Why a branch starts or stops between two kx samples."""
    if crossed:
        return "band_edge"
    if omega < 0.1 * float(omega_plus(params, kx, 0.0)):
        return "low_frequency"
    return "lost"


# ---------------------------------------------------------- profile checks


def edge_ode_matrix(params: FluidParams, kx: float, omega: float) -> np.ndarray:
    """Matrix L of Y' = L Y for Y = (u, v, u', v'), with eta eliminated.

    From H psi = omega psi with ky -> -i d/dy: eta = (kx u - i v')/omega,
    nu v'' = i(omega u - kx eta) - m v, nu u'' = eta' - m u - i omega v,
    where m = f - nu kx^2.
    """
    nu, m = params.nu, params.f - params.nu * kx * kx
    L = np.zeros((4, 4), dtype=complex)
    for j in range(4):
        u, v, du, dv = np.eye(4)[j]
        eta = (kx * u - 1j * dv) / omega
        d2v = (1j * (omega * u - kx * eta) - m * v) / nu
        deta = (kx * du - 1j * d2v) / omega
        d2u = (deta - m * u - 1j * omega * v) / nu
        L[:, j] = (du, dv, d2u, d2v)
    return L


def bound_state_data(params: FluidParams, bc: BoundaryCondition, kx: float, beta: float):
    """Boundary vector of the edge mode at a determinant zero (null vector of [A Psi1 | A Psi2])."""
    Psi1, Psi2, omega = decaying_boundary_vectors(params, kx, beta)
    M = bc.matrix(kx) @ np.stack([Psi1, Psi2], axis=1)
    c = kernel_basis(M, rtol=1e-6)
    if c.shape[1] == 0:
        c = np.linalg.svd(M)[2][-1].conj()[:, None]
    Psi = np.stack([Psi1, Psi2], axis=1) @ c[:, 0]
    return Psi, float(omega)


def decay_ratio(params: FluidParams, bc: BoundaryCondition, kx: float, beta: float, y_max: float | None = None) -> float:
    """Integrate the edge ODE from the bound state's boundary data; return |psi(y_max)| / |psi(0)|.

    y_max defaults to ten decay lengths of the slower of the two decaying
    components, 10 / min(beta, Im kappa_ev). The forward integration also
    carries the growing solutions, so roundoff is amplified by about
    exp(10 Im kappa_ev / beta); the check is only meaningful when that stays
    well below 1e16.
    """
    Psi, omega = bound_state_data(params, bc, kx, beta)
    if y_max is None:
        Xm = -(1 - 2 * params.nu * params.f) / params.nu**2 - (kx * kx - beta * beta)
        y_max = 10.0 / min(beta, np.sqrt(kx * kx - Xm))
    L = edge_ode_matrix(params, kx, omega)
    Y0 = Psi[[1, 2, 4, 5]]
    Y1 = expm(L * y_max) @ Y0

    def full(Y):
        eta = (kx * Y[0] - 1j * Y[3]) / omega
        return np.linalg.norm(np.concatenate([[eta], Y]))

    return float(full(Y1) / full(Y0))


def embedded_eigenvalue_indicator(params: FluidParams, kx, omega):
    """(omega^2 - kx^2) X- ; nonzero on the continuum rules out family-a embedded eigenvalues."""
    _, Xm = x_roots(params, omega)
    return (np.asarray(omega) ** 2 - np.asarray(kx) ** 2) * Xm


def growing_amplitude(params: FluidParams, bc: BoundaryCondition, kx: float, beta: float) -> float:
    """Relative weight of the bound state's boundary data on the growing solutions.

    Expands (u, v, u', v') in eigenvectors of the ODE matrix; eigenvalues with
    positive real part are the growing modes exp(+beta y), exp(+gamma y).
    Stable where the forward integration in ``decay_ratio`` is not.
    """
    Psi, omega = bound_state_data(params, bc, kx, beta)
    w, V = np.linalg.eig(edge_ode_matrix(params, kx, omega))
    Vn = V / np.linalg.norm(V, axis=0)
    c = np.linalg.solve(Vn, Psi[[1, 2, 4, 5]])
    grow = w.real > 0
    return float(np.linalg.norm(c[grow]) / np.linalg.norm(c))
