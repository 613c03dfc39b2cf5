"""Topology of rotating shallow water with odd viscosity.

Bulk Chern numbers, self-adjoint boundary conditions, edge spectra and the
winding of scattering amplitudes near the band bottom.
"""

from .bulk import FluidParams, chern_number, omega_plus
from .boundary import BoundaryCondition, dirichlet_bc, family_a_bc, is_self_adjoint
from .edge import asymptotic_branch_probe, count_nb, edge_spectrum
from .scattering import GAUGE_INF, GAUGE_ZERO, SectionGauge, scattering_amplitude
from .winding import ContourArc, arc_triple, epsilon_sweep, winding

__all__ = [
    "FluidParams",
    "chern_number",
    "omega_plus",
    "BoundaryCondition",
    "dirichlet_bc",
    "family_a_bc",
    "is_self_adjoint",
    "asymptotic_branch_probe",
    "count_nb",
    "edge_spectrum",
    "GAUGE_INF",
    "GAUGE_ZERO",
    "SectionGauge",
    "scattering_amplitude",
    "ContourArc",
    "arc_triple",
    "epsilon_sweep",
    "winding",
]
__version__ = "0.1.0"
