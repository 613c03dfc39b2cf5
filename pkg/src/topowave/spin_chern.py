"""Spin-s bundles over the sphere: C(P_m) = 2 m deg(e).

Representation matrices use the S3-diagonal standard basis with m listed in
descending order. Maps k -> e(k) are sampled on the same two-chart plane grid
as the bulk Chern integral.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .bulk import FluidParams, SPIN1, d_vector, default_cutoff, fd_curvature
from .errors import UnderResolvedWarning
from .quadrature import PlaneGrid, integrate


@dataclass(frozen=True)
class SpinRep:
    s: Fraction
    S1: np.ndarray
    S2: np.ndarray
    S3: np.ndarray

    @property
    def S(self):
        return np.stack([self.S1, self.S2, self.S3])

    @property
    def dim(self):
        return int(2 * self.s + 1)

    @property
    def ms(self):
        """Magnetic quantum numbers in basis order (descending)."""
        return [self.s - j for j in range(self.dim)]


def _as_spin(s) -> Fraction:
    exact = Fraction(s)
    two_s = exact.limit_denominator(1000) * 2
    if two_s.denominator != 1 or two_s < 0 or abs(float(two_s) - 2 * float(exact)) > 1e-12:
        raise ValueError(f"spin must be a non-negative half-integer, got {s}")
    return two_s / 2


def spin_matrices(s) -> SpinRep:
    """Irreducible spin-s representation from the ladder operators."""
    s = _as_spin(s)
    n = int(2 * s + 1)
    m = np.array([float(s) - j for j in range(n)])
    Sp = np.zeros((n, n), dtype=complex)
    for j in range(1, n):
        # <m+1| S+ |m>, with basis index j-1 holding m+1
        Sp[j - 1, j] = np.sqrt(float(s) * (float(s) + 1) - m[j] * (m[j] + 1))
    Sm = Sp.conj().T
    return SpinRep(s, (Sp + Sm) / 2, (Sp - Sm) / 2j, np.diag(m).astype(complex))


def projector_on_m(rep: SpinRep, e, m) -> np.ndarray:
    """Spectral projector of e.S onto eigenvalue m; e may carry leading axes."""
    ms = [float(x) for x in rep.ms]
    m = float(m)
    if not any(abs(m - x) < 1e-12 for x in ms):
        raise ValueError(f"m={m} is not a weight of spin {rep.s}")
    E = np.einsum("...i,ijk->...jk", np.asarray(e, dtype=complex), rep.S)
    eye = np.eye(rep.dim)
    P = np.broadcast_to(eye, E.shape).astype(complex)
    for mp in ms:
        if abs(mp - m) > 1e-12:
            P = P @ ((E - mp * eye) / (m - mp))
    return P


@dataclass(frozen=True)
class SphereMap:
    """A map of the compactified plane to the unit sphere.

    ``func(kx, ky)`` returns unit vectors stacked along the last axis. The
    ``cutoff`` is the disk radius used when sampling on a PlaneGrid.
    """

    func: Callable
    cutoff: float = 8.0
    name: str = ""

    def __call__(self, kx, ky):
        return self.func(np.asarray(kx, float), np.asarray(ky, float))


def shallow_water_map(params: FluidParams) -> SphereMap:
    def e(kx, ky):
        d = d_vector(params, kx, ky)
        return d / np.linalg.norm(d, axis=-1, keepdims=True)

    return SphereMap(e, default_cutoff(params), f"shallow-water(f={params.f}, nu={params.nu})")


def polynomial_map(degree: int) -> SphereMap:
    """Inverse stereographic image of w = z^degree; has degree ``degree``."""
    if degree < 0:
        raise ValueError("degree must be non-negative")

    def e(kx, ky):
        w = (kx + 1j * ky) ** degree
        a = np.abs(w) ** 2
        return np.stack([2 * w.real, 2 * w.imag, 1 - a], axis=-1) / (1 + a)[..., None]

    return SphereMap(e, 8.0, f"z^{degree}")


def rotated(smap: SphereMap, rotation) -> SphereMap:
    """Compose a map with a rotation, either a fixed 3x3 matrix or R(kx, ky) of shape (..., 3, 3)."""
    if callable(rotation):
        fn = lambda kx, ky: np.einsum("...ij,...j->...i", rotation(kx, ky), smap(kx, ky))
    else:
        R = np.asarray(rotation, float)
        fn = lambda kx, ky: smap(kx, ky) @ R.T
    return SphereMap(fn, smap.cutoff, f"rotated {smap.name}")


def _fd_partials(smap, kx, ky):
    h = 1e-4 * np.maximum(1.0, np.hypot(kx, ky))
    e1 = (smap(kx + h, ky) - smap(kx - h, ky)) / (2 * h[:, None])
    e2 = (smap(kx, ky + h) - smap(kx, ky - h)) / (2 * h[:, None])
    return e1, e2


def pullback_area(smap: SphereMap, grid: PlaneGrid | None = None) -> float:
    """Integral of e.(d1 e x d2 e) over the plane, i.e. signed area covered."""
    grid = grid or PlaneGrid()
    kx, ky, w = grid.nodes(grid.cutoff or smap.cutoff)
    e = smap(kx, ky)
    e1, e2 = _fd_partials(smap, kx, ky)
    density = np.einsum("...i,...i->...", e, np.cross(e1, e2))
    return integrate(density, w)


def _flag(value, what):
    if abs(value - round(value)) > 0.05:
        warnings.warn(f"{what} {value:.4f} is not near an integer", UnderResolvedWarning, stacklevel=3)


def degree(smap: SphereMap, grid: PlaneGrid | None = None) -> float:
    value = pullback_area(smap, grid) / (4 * np.pi)
    _flag(value, "degree")
    return value


def chern_of_spin_band(rep: SpinRep, smap: SphereMap, m, grid: PlaneGrid | None = None) -> float:
    """Chern number of the P_m line bundle over the plane, by FD curvature."""
    grid = grid or PlaneGrid()
    kx, ky, w = grid.nodes(grid.cutoff or smap.cutoff)
    curv = fd_curvature(lambda x, y: projector_on_m(rep, smap(x, y), m), kx, ky)
    value = integrate(curv.real, w) / (2 * np.pi)
    _flag(value, "Chern number")
    return value


def min_gap(rep: SpinRep, smap: SphereMap, grid: PlaneGrid | None = None) -> float:
    """Smallest spacing between adjacent eigenvalues of e.S over the grid (diagnostic)."""
    grid = grid or PlaneGrid()
    kx, ky, _ = grid.nodes(grid.cutoff or smap.cutoff)
    E = np.einsum("...i,ijk->...jk", smap(kx, ky).astype(complex), rep.S)
    ev = np.linalg.eigvalsh(E)
    return float(np.min(np.diff(ev, axis=-1))) if rep.dim > 1 else np.inf


def fluid_basis_unitary() -> np.ndarray:
    """Unitary U with U^* S_i(fluid) U = S_i(standard) for the spin-1 matrices.

    Columns are S3(fluid) eigenvectors for m = 1, 0, -1, with phases fixed so
    that the ladder operator has the standard positive matrix elements.
    """
    std = spin_matrices(1)
    w, V = np.linalg.eigh(SPIN1[2])
    U = V[:, np.argsort(-w)].astype(complex)
    Sp = SPIN1[0] + 1j * SPIN1[1]
    for j in (1, 2):
        # fix column j so that <j-1| S+ |j> is real positive
        c = U[:, j - 1].conj() @ Sp @ U[:, j]
        U[:, j] *= np.conj(c) / abs(c)
    assert np.allclose(U.conj().T @ SPIN1 @ U, std.S, atol=1e-12)
    return U


def clebsch_gordan_residuals(s, m, e) -> tuple[float, float]:
    """Check the tensor identity for D_s (x) D_1/2 at a fixed direction e.

    Returns two residuals: the eigen-m projector of e.S_total against
    P_{s,m-1/2} (x) P_{1/2,1/2} + P_{s,m+1/2} (x) P_{1/2,-1/2}, and against the
    sum over j = s +- 1/2 of the embedded irreducible projectors P_{j,m}.
    """
    rs, rh = spin_matrices(s), spin_matrices(Fraction(1, 2))
    S_tot = np.stack([np.kron(rs.S[i], np.eye(2)) + np.kron(np.eye(rs.dim), rh.S[i]) for i in range(3)])
    s_f = float(rs.s)
    m = float(m)
    total = _eig_projector(S_tot, e, m)

    def Ps(mm):
        return projector_on_m(rs, e, mm) if abs(mm) <= s_f + 1e-12 else np.zeros((rs.dim, rs.dim))

    tensor = np.kron(Ps(m - 0.5), projector_on_m(rh, e, 0.5)) + np.kron(Ps(m + 0.5), projector_on_m(rh, e, -0.5))

    embedded = np.zeros_like(total)
    for j in (s_f + 0.5, s_f - 0.5):
        if j < 0 or abs(m) > j + 1e-12:
            continue
        V = _coupled_basis(S_tot, s_f, j)
        embedded += V @ projector_on_m(spin_matrices(j), e, m) @ V.conj().T
    return float(np.max(np.abs(total - tensor))), float(np.max(np.abs(total - embedded)))


def _eig_projector(S, e, m):
    E = np.einsum("i,ijk->jk", np.asarray(e, dtype=complex), S)
    w, V = np.linalg.eigh(E)
    sel = np.abs(w - m) < 1e-8
    return V[:, sel] @ V[:, sel].conj().T


def _coupled_basis(S_tot, s, j):
    """Isometry onto the spin-j block, built from its highest weight by lowering."""
    cas = sum(Si @ Si for Si in S_tot)
    M = cas - j * (j + 1) * np.eye(len(cas))
    # highest weight: S3 = j inside the Casimir-j block
    w, V = np.linalg.eigh(S_tot[2] + 1e3 * M.conj().T @ M)
    top = V[:, np.argmin(np.abs(w - j))]
    top = top / (top[np.argmax(np.abs(top))] / abs(top[np.argmax(np.abs(top))]))
    Sm = S_tot[0] - 1j * S_tot[1]
    cols = [top]
    for k in range(int(round(2 * j))):
        nxt = Sm @ cols[-1]
        cols.append(nxt / np.linalg.norm(nxt))
    return np.stack(cols, axis=1)
