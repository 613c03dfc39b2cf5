"""Boundary form of the half-plane problem and self-adjoint boundary conditions.

Boundary data at y = 0 are stacked as Psi = (eta, u, v, eta', u', v'). The
partial integration of <psi~, H psi> leaves the Hermitian form Psi~* Omega Psi;
a 4-dimensional subspace M = ker A gives a self-adjoint realization iff
A N = 0 and A OmegaHat A* = 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

DEFAULT_KX_SAMPLES = (0.0, 1.0, -1.0, 10.0, -10.0, 100.0, -100.0)
CERT_TOL = 1e-12


@dataclass(frozen=True)
class OmegaForm:
    nu: float
    Omega: np.ndarray
    OmegaHat: np.ndarray
    N: np.ndarray
    P: np.ndarray


def omega_form(nu: float) -> OmegaForm:
    if not nu > 0:
        raise ValueError("nu must be positive")
    Om = np.zeros((6, 6), dtype=complex)
    Om[0, 2] = Om[2, 0] = -1
    Om[1, 5] = Om[5, 1] = -nu
    Om[2, 4] = Om[4, 2] = nu
    lam = 1.0 / (1.0 + nu**2)
    Oh = np.zeros((6, 6), dtype=complex)
    Oh[0, 2] = Oh[2, 0] = -lam
    Oh[1, 5] = Oh[5, 1] = -1.0 / nu
    Oh[2, 4] = Oh[4, 2] = lam * nu
    N = np.zeros((6, 2), dtype=complex)
    N[0, 0], N[4, 0], N[3, 1] = nu, 1, 1
    # orthogonal projector onto range(Omega) = complement of span(N)
    Q, _ = np.linalg.qr(N)
    P = np.eye(6) - Q @ Q.conj().T
    return OmegaForm(nu, Om, Oh, N, P)


@dataclass(frozen=True)
class BoundaryCondition:
    """A(kx) = A02 + i kx A1 acting on stacked boundary data."""

    A02: np.ndarray
    A1: np.ndarray
    label: str = ""
    a: float | None = None

    def __post_init__(self):
        for name in ("A02", "A1"):
            M = np.asarray(getattr(self, name), dtype=complex)
            if M.shape != (2, 6):
                raise ValueError(f"{name} must be 2x6, got {M.shape}")
            object.__setattr__(self, name, M)

    def matrix(self, kx) -> np.ndarray:
        """A(kx); broadcasts over an array of kx to shape (..., 2, 6)."""
        kx = np.asarray(kx, dtype=float)[..., None, None]
        return self.A02 + 1j * kx * self.A1

    def to_json(self) -> str:
        doc = {"A02": _encode(self.A02), "A1": _encode(self.A1), "label": self.label}
        if self.a is not None:
            doc["a"] = self.a
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "BoundaryCondition":
        doc = json.loads(text)
        unknown = set(doc) - {"A02", "A1", "label", "a"}
        if unknown:
            raise ValueError(f"unknown keys in boundary condition: {sorted(unknown)}")
        return cls(_decode(doc["A02"]), _decode(doc.get("A1", [[[0, 0]] * 6] * 2)), doc.get("label", ""), doc.get("a"))


def _encode(M):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(M)]


def _decode(rows):
    arr = np.asarray(rows, dtype=float)
    if arr.shape != (2, 6, 2):
        raise ValueError("matrices are encoded as 2 rows of 6 [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def family_a_bc(a: float) -> BoundaryCondition:
    """v = 0 and du/dx + a dv/dy = 0 at y = 0."""
    A02 = np.zeros((2, 6), dtype=complex)
    A1 = np.zeros((2, 6), dtype=complex)
    A02[0, 2] = 1
    A02[1, 5] = a
    A1[1, 1] = 1
    return BoundaryCondition(A02, A1, f"family-a(a={a:g})", float(a))


def dirichlet_bc() -> BoundaryCondition:
    """u = v = 0 at y = 0."""
    A02 = np.zeros((2, 6), dtype=complex)
    A02[0, 1] = A02[1, 2] = 1
    return BoundaryCondition(A02, np.zeros((2, 6), dtype=complex), "dirichlet")


def boundary_pairing(psi_tilde, psi, nu: float) -> complex:
    """Psi~* Omega Psi (conjugate-linear in the first slot)."""
    return complex(np.conj(psi_tilde) @ omega_form(nu).Omega @ psi)


def boundary_vector(psi_hat, ky):
    """Boundary data (psi, i ky psi) of a plane-wave mode psi_hat e^{i ky y}; works on stacked arrays."""
    psi_hat = np.asarray(psi_hat)
    return np.concatenate([psi_hat, 1j * ky * psi_hat], axis=0)


def compatibility_residual(Psi, kx, omega) -> complex:
    """kx u - i v' - omega eta, zero for boundary data of a genuine solution."""
    return Psi[..., 1] * kx - 1j * Psi[..., 5] - omega * Psi[..., 0]


def kernel_basis(A: np.ndarray, rtol: float = 1e-8) -> np.ndarray:
    """Orthonormal basis (columns) of ker A."""
    _, s, Vh = np.linalg.svd(A)
    rank = int(np.sum(s > rtol * max(s[0], 1e-300)))
    return Vh[rank:].conj().T


def matrix_rank(A: np.ndarray) -> int:
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(s > 1e-8 * max(s[0], 1e-300)))


@dataclass
class Certificate:
    passed: bool
    residuals: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps({"schema_version": 1, "pass": self.passed, "residuals": self.residuals, "failures": self.failures}, indent=2)


def is_self_adjoint(bc: BoundaryCondition, nu: float, kx_samples=None) -> Certificate:
    """Self-adjointness certificate: rank A = 2, A N = 0 and A OmegaHat A* = 0.

    Residuals are relative: each norm is divided by max(1, scale) where scale
    is the size the product would have for unit-norm inputs, so the 1e-12
    threshold is meaningful for badly scaled but exact matrices.
    """
    form = omega_form(nu)
    ks = list(DEFAULT_KX_SAMPLES) + [float(k) for k in (kx_samples or [])]
    nN, nOh = np.linalg.norm(form.N, 2), np.linalg.norm(form.OmegaHat, 2)
    residuals, failures = {}, []

    def record(name, value, tol=CERT_TOL):
        residuals[name] = max(residuals.get(name, 0.0), float(value))
        if value >= tol:
            failures.append(f"{name}: residual {value:.3e}")

    for k in ks:
        A = bc.matrix(k)
        nA = np.linalg.norm(A, 2)
        r = matrix_rank(A)
        residuals.setdefault("rank", 2)
        if r != 2:
            residuals["rank"] = r
            failures.append(f"rank A(kx={k:g}) = {r}")
        record(f"AN[kx={k:g}]", np.linalg.norm(A @ form.N, 2) / max(1.0, nA * nN))
        record(f"AOhA*[kx={k:g}]", np.linalg.norm(A @ form.OmegaHat @ A.conj().T, 2) / max(1.0, nA**2 * nOh))

    A02, A1, Oh = bc.A02, bc.A1, form.OmegaHat
    n0, n1 = max(1.0, np.linalg.norm(A02, 2)), max(1.0, np.linalg.norm(A1, 2))
    local = {
        "A02 N": (np.linalg.norm(A02 @ form.N, 2), n0 * nN),
        "A1 N": (np.linalg.norm(A1 @ form.N, 2), n1 * nN),
        "A02 Oh A02*": (np.linalg.norm(A02 @ Oh @ A02.conj().T, 2), n0 * n0 * nOh),
        "A02 Oh A1* - A1 Oh A02*": (np.linalg.norm(A02 @ Oh @ A1.conj().T - A1 @ Oh @ A02.conj().T, 2), n0 * n1 * nOh),
        "A1 Oh A1*": (np.linalg.norm(A1 @ Oh @ A1.conj().T, 2), n1 * n1 * nOh),
    }
    for name, (val, scale) in local.items():
        record(name, val / max(1.0, scale))
    return Certificate(not failures, residuals, failures)
