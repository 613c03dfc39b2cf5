import math

import numpy as np
import pytest

from topowave.boundary import BoundaryCondition, dirichlet_bc, family_a_bc
from topowave.bulk import omega_plus
from topowave.errors import PoleError, SingularGaugeError
from topowave.modes import mode_q
from topowave.scattering import (
    GAUGE_INF,
    GAUGE_ZERO,
    ScatteringPoint,
    SectionGauge,
    boundary_residual,
    flux_terms,
    independence_margin,
    kernel_amplitude,
    scattering_amplitude,
    scattering_parts,
    section,
)

OMEGA_10 = 1.2806248474865698  # omega_plus(1, 0)


@pytest.fixture
def samples(rng):
    kx = rng.uniform(-5, 5, 1000)
    kappa = rng.uniform(0.01, 5, 1000)
    return kx, kappa


class TestSections:
    def test_example_at_unit_kx(self, params):
        psi = section(GAUGE_INF, params, 1.0, 0.0).psi_hat
        q = (1 - 0.2) / OMEGA_10
        expected = np.array([1 / OMEGA_10, 1, 1j * q]) / math.sqrt(2)
        assert np.allclose(psi, expected, atol=1e-14)
        assert q == pytest.approx(0.624695, abs=1e-6)

    def test_q_limits(self, params):
        assert mode_q(params, 0.0, params.f) == pytest.approx(1.0)
        X = 1e8
        assert mode_q(params, X, omega_plus(params, math.sqrt(X), 0.0)) == pytest.approx(-1.0, abs=1e-6)

    def test_gauge_zero_is_transition(self, params, rng):
        kx, ky = rng.normal(size=(2, 50))
        z = kx + 1j * ky
        psi0 = section(GAUGE_ZERO, params, kx, ky).psi_hat
        psii = section(GAUGE_INF, params, kx, ky).psi_hat
        assert np.allclose(psi0, (np.conj(z) / z) * psii, atol=1e-14)

    def test_sections_normalized_and_eigen(self, params, rng):
        kx, ky = rng.normal(size=(2, 50))
        psi = section(SectionGauge(1j), params, kx, ky).psi_hat
        assert np.allclose(np.linalg.norm(psi, axis=0), 1, atol=1e-12)

    def test_singular_point(self, params):
        with pytest.raises(SingularGaugeError):
            section(SectionGauge(1 + 1j), params, 1.0, 1.0)


class TestUnimodularity:
    @pytest.mark.parametrize("bc", [2.0, -1.0, family_a_bc(2.0), dirichlet_bc()])
    def test_unit_modulus(self, params, samples, bc):
        S, _ = scattering_amplitude(params, bc, SectionGauge(1j), *samples)
        assert np.max(np.abs(np.abs(S) - 1)) < 1e-10

    def test_threshold_value(self, params):
        S, _ = scattering_amplitude(params, 2.0, GAUGE_INF, np.array([0.3, -4.0]), 0.0)
        assert np.allclose(S, -1, atol=1e-12)

    def test_transition_relation(self, params, samples):
        kx, kappa = samples
        S0, _ = scattering_amplitude(params, 2.0, GAUGE_ZERO, kx, kappa)
        Si, _ = scattering_amplitude(params, 2.0, GAUGE_INF, kx, kappa)
        t = GAUGE_ZERO.transition
        # S^zeta = S^inf t(-kappa) / t(kappa): the incoming wave carries -kappa
        assert np.max(np.abs(S0 - Si * t(kx, -kappa) / t(kx, kappa))) < 1e-12

    def test_boundary_residual(self, params):
        bc = family_a_bc(1.0)
        S, T = scattering_amplitude(params, bc, GAUGE_ZERO, 0.7, 0.3)
        assert boundary_residual(params, bc, GAUGE_ZERO, 0.7, 0.3, S, T) < 1e-10

    def test_family_matches_matrix_route(self, params, samples):
        S1, T1 = scattering_amplitude(params, 2.0, GAUGE_ZERO, *samples)
        S2, T2 = scattering_amplitude(params, family_a_bc(2.0), GAUGE_ZERO, *samples)
        assert np.allclose(S1, S2, atol=1e-12)

    def test_parts(self, params, samples):
        N, D = scattering_parts(params, 2.0, GAUGE_ZERO, *samples)
        S, _ = scattering_amplitude(params, 2.0, GAUGE_ZERO, *samples)
        assert np.allclose(N / D, S, atol=1e-12)

    def test_negative_kappa_rejected(self, params):
        with pytest.raises(ValueError):
            scattering_amplitude(params, 2.0, GAUGE_ZERO, 0.0, -0.1)

    def test_pole_error(self, params):
        # both rows constrain u only, so the out and evanescent columns are parallel
        A = np.zeros((2, 6), complex)
        A[0, 1] = A[1, 1] = 1.0
        with pytest.raises(PoleError):
            scattering_amplitude(params, BoundaryCondition(A, np.zeros((2, 6))), GAUGE_ZERO, 0.5, 0.5)

    def test_point(self, params):
        pt = ScatteringPoint.at(params, 1.0, 0.0001)
        assert pt.omega == pytest.approx(OMEGA_10, rel=1e-6)
        with pytest.raises(ValueError):
            ScatteringPoint.at(params, 1.0, 0.0)


class TestKernelRoute:
    @pytest.mark.parametrize("a", [-2.0, -1.0, 1.0, 2.0])
    def test_kernel_equals_determinant(self, params, samples, a):
        bc = family_a_bc(a)
        S0, _ = scattering_amplitude(params, bc, GAUGE_ZERO, *samples)
        Sk = kernel_amplitude(params, bc, *samples, gauge=GAUGE_ZERO)
        assert np.max(np.abs(Sk - S0)) < 1e-9

    def test_flux_identities(self, params, samples):
        kx, kappa = samples
        ft = flux_terms(params, kx, omega_plus(params, kx, kappa))
        scale = np.abs(ft["out_out"])
        assert np.max(np.abs(ft["out_out"] - ft["closed_form"]) / scale) < 1e-10
        assert np.max(np.abs(ft["in_in"] + ft["out_out"]) / scale) < 1e-10
        assert np.max(np.abs(ft["out_in"]) / scale) < 1e-10
        assert np.max(np.abs(ft["in_out"]) / scale) < 1e-10

    def test_independence(self, params, samples):
        kx, kappa = samples
        omega = omega_plus(params, kx, kappa)
        margins = [independence_margin(params, k, w) for k, w in zip(kx[:200], omega[:200])]
        assert min(margins) > 1e-5
