"""Quadrature over the compactified momentum plane.

The plane is split into the disk |k| <= K, integrated in polar coordinates,
and its exterior, integrated in the inverted radius rho = 1/|k|. In the
inverted chart the area element is rho^-3 drho dphi, so integrands that decay
like |k|^-4 (the regularized model) or |k|^-3 (nu = 0) stay bounded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PlaneGrid:
    """Tensor grid for the two-chart plane quadrature.

    Attributes:
        n_radial: Radial nodes per chart (split evenly into Gauss-Legendre panels).
        n_angular: Trapezoid nodes in the polar angle.
        cutoff: Disk radius K. ``None`` lets the caller pick a model-based default.
        panels: Number of composite Gauss-Legendre panels per chart.
    """

    n_radial: int = 128
    n_angular: int = 64
    cutoff: float | None = None
    panels: int = 8

    def __post_init__(self):
        if self.n_radial < 64 or self.n_angular < 64:
            raise ValueError("grid resolution must be at least 64 per axis")
        if self.n_radial % self.panels:
            raise ValueError("n_radial must be a multiple of panels")
        if self.cutoff is not None and not self.cutoff > 0:
            raise ValueError("cutoff must be positive")

    def with_cutoff(self, cutoff: float) -> "PlaneGrid":
        return PlaneGrid(self.n_radial, self.n_angular, cutoff, self.panels)

    def nodes(self, cutoff: float | None = None):
        """Return flat arrays (kx, ky, weight) such that sum(w*F) ~ int F d^2k."""
        K = self.cutoff if cutoff is None else cutoff
        if K is None:
            raise ValueError("no cutoff given")
        r, wr = _composite_gauss(0.0, K, self.panels, self.n_radial // self.panels)
        rho, wrho = _composite_gauss(0.0, 1.0 / K, self.panels, self.n_radial // self.panels)
        phi = 2 * np.pi * np.arange(self.n_angular) / self.n_angular
        wphi = 2 * np.pi / self.n_angular

        # disk: dA = r dr dphi; exterior: |k| = 1/rho, dA = rho^-3 drho dphi
        radii = np.concatenate([r, 1.0 / rho])
        wrad = np.concatenate([wr * r, wrho / rho**3]) * wphi
        R, PHI = np.meshgrid(radii, phi, indexing="ij")
        W = np.broadcast_to(wrad[:, None], R.shape)
        return (R * np.cos(PHI)).ravel(), (R * np.sin(PHI)).ravel(), np.array(W).ravel()


def _composite_gauss(a, b, panels, order):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def integrate(values, weights) -> float:
    """Compensated, order-fixed sum so results are reproducible bit for bit."""
    return math.fsum(np.asarray(values * weights, dtype=float).tolist())
