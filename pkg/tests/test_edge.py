import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topowave.boundary import dirichlet_bc, family_a_bc
from topowave.bulk import FluidParams, omega_plus
from topowave.edge import (
    _det,
    asymptotic_branch_probe,
    bound_state_determinant,
    bound_states,
    count_nb,
    decay_ratio,
    decaying_boundary_vectors,
    determinant_beta,
    edge_spectrum,
    embedded_eigenvalue_indicator,
    growing_amplitude,
    in_continuum,
    merge_events,
)
from topowave.errors import BranchPointError, NoBoundStateSectorError
from topowave.modes import kappa_ev, omega_of_x, transverse_roots, x_roots


class TestTransverseRoots:
    def test_x_roots_closed_form(self, params):
        Xp, Xm = x_roots(params, 1.5)
        assert Xp == pytest.approx((-15 + math.sqrt(350)) / 2, rel=1e-12)
        assert Xm == pytest.approx((-15 - math.sqrt(350)) / 2, rel=1e-12)
        assert Xp * Xm == pytest.approx(-31.25, rel=1e-12)

    def test_kappa_ev(self, params):
        assert kappa_ev(params, 0.0, 0.0) == pytest.approx(1j * math.sqrt(15), rel=1e-14)
        assert kappa_ev(params, 1.0, 0.5) == pytest.approx(1j * math.sqrt(17.25), rel=1e-14)

    def test_branch_point(self, params):
        Xp, _ = x_roots(params, 1.5)
        with pytest.raises(BranchPointError):
            transverse_roots(params, math.sqrt(Xp), 1.5)

    def test_rejects_nonpositive_omega(self, params):
        with pytest.raises(ValueError):
            transverse_roots(params, 0.3, 0.0)

    @given(st.floats(-5, 5), st.floats(0.05, 30))
    @settings(max_examples=200, deadline=None)
    def test_root_invariants(self, kx, omega):
        params = FluidParams()
        Xp, Xm = x_roots(params, omega)
        if abs(Xp - kx * kx) < 1e-6:
            return
        r = transverse_roots(params, kx, omega)
        nu, f = params.nu, params.f
        assert nu**2 * r.X_plus * r.X_minus == pytest.approx(f * f - omega**2, rel=1e-9, abs=1e-9)
        assert r.kappa_in == -r.kappa_out and r.kappa_div == -r.kappa_ev
        assert r.kappa_ev.imag > 0
        # every root lies on the dispersion surface
        for ky in r.roots:
            X = kx * kx + ky * ky
            assert X + (f - nu * X) ** 2 == pytest.approx(omega**2, rel=1e-8, abs=1e-8)
        if r.X_plus > kx * kx:
            assert r.kappa_out.real > 0 and r.kappa_out.imag == 0
        else:
            assert r.kappa_out.imag > 0


class TestDeterminant:
    def test_dirichlet_nonzero_in_gap(self, params):
        F = bound_state_determinant(params, dirichlet_bc(), 0.0, 0.5)
        assert abs(F) == pytest.approx(0.021869790349403496, rel=1e-8)

    def test_outside_gap_raises(self, params):
        with pytest.raises(NoBoundStateSectorError):
            bound_state_determinant(params, dirichlet_bc(), 0.0, 1.2)

    def test_rescaled_modes_scale_determinant(self, params):
        bc = family_a_bc(2.0)
        P1, P2, _ = decaying_boundary_vectors(params, 0.7, 0.4)
        base = _det(bc, 0.7, P1, P2)
        assert _det(bc, 0.7, 2 * P1, 2 * P2) == pytest.approx(4 * base, rel=1e-12)
        assert abs(base) > 1e-6

    def test_vectorized(self, params):
        vals = determinant_beta(params, family_a_bc(1.0), np.linspace(-3, 3, 7), 0.2)
        one = [determinant_beta(params, family_a_bc(1.0), k, 0.2) for k in np.linspace(-3, 3, 7)]
        assert np.allclose(vals, one)


class TestCounting:
    @pytest.mark.parametrize(
        "a, merges",
        [
            (-2.0, [(-10.1631, -1), (-2.2361, 1), (-0.8285, 1), (1.8777, 1)]),
            (-1.0, [(-2.2361, 1), (-0.5909, 1), (1.7042, 1)]),
            (1.0, [(-2.2361, 1)]),
            (2.0, [(-2.2361, 1), (3.6744, 1)]),
        ],
    )
    def test_merge_events(self, params, a, merges):
        ev = merge_events(params, family_a_bc(a))
        assert [(round(e.kx, 4), e.direction) for e in ev] == merges

    def test_common_merge_at_sqrt5(self, params):
        # every family-a condition has a branch leaving the band at kx = -sqrt 5
        ev = merge_events(params, family_a_bc(1.0))
        assert ev[0].kx == pytest.approx(-math.sqrt(5), abs=1e-8)

    @pytest.mark.parametrize("a, nb", [(-2.0, 2), (-1.0, 3), (1.0, 1), (2.0, 2)])
    def test_count_nb(self, params, a, nb):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            assert count_nb(params, family_a_bc(a)) == nb

    def test_count_nb_dirichlet(self, params):
        assert count_nb(params, dirichlet_bc()) == 2


class TestBoundStates:
    @pytest.mark.parametrize("kx", [-2.0, -1.0, 5.0, 10.0])
    def test_roots_are_zeros_and_in_gap(self, params, kx):
        bc = family_a_bc(2.0)
        found = bound_states(params, bc, kx)
        assert found
        top = float(omega_plus(params, kx, 0.0))
        for beta, omega in found:
            assert abs(determinant_beta(params, bc, kx, beta)) < 1e-12
            assert 0 < omega < top
            assert growing_amplitude(params, bc, kx, beta) < 1e-12

    def test_kelvin_like_branch(self, params):
        # family a carries a branch on omega = -kx inside the gap
        for kx in (-0.5, -1.0, -1.5):
            omegas = [w for _, w in bound_states(params, family_a_bc(2.0), kx)]
            assert any(abs(w + kx) < 1e-9 for w in omegas)

    @pytest.mark.parametrize("kx", [-2.0, -1.0])
    def test_profile_decays(self, params, kx):
        # forward integration is trustworthy here: the slow root is the propagating one
        bc = family_a_bc(2.0)
        beta = max(b for b, _ in bound_states(params, bc, kx))
        assert decay_ratio(params, bc, kx, beta) < 1e-3

    def test_no_modes_in_middle(self, params):
        assert bound_states(params, family_a_bc(2.0), 0.0) == []


class TestProbe:
    def test_plus_infinity_for_a2(self, params):
        assert asymptotic_branch_probe(params, 2.0, 50.0)["bound_state_exists"]
        assert not asymptotic_branch_probe(params, 2.0, -50.0)["bound_state_exists"]

    def test_minus_infinity_for_am2(self, params):
        assert asymptotic_branch_probe(params, -2.0, -50.0)["bound_state_exists"]
        assert not asymptotic_branch_probe(params, -2.0, 50.0)["bound_state_exists"]

    @pytest.mark.parametrize("kx", [-50.0, 50.0])
    def test_none_for_a1(self, params, kx):
        res = asymptotic_branch_probe(params, 1.0, kx)
        assert not res["bound_state_exists"] and math.isnan(res["omega_gap"])

    def test_small_kx_rejected(self, params):
        with pytest.raises(ValueError):
            asymptotic_branch_probe(params, 2.0, 5.0)


class TestSpectrum:
    def test_a2_branches(self, params):
        sp = edge_spectrum(params, family_a_bc(2.0))
        assert sp.n_b == 2 and sp.n_a == 0
        assert not sp.lost
        assert len(sp.branches) == 3
        for br in sp.branches:
            top = omega_plus(params, np.array(br.kx), 0.0)
            assert np.all(np.array(br.omega) < top)
            assert not np.any(in_continuum(params, np.array(br.kx), np.array(br.omega)))

    def test_embedded_indicator_nonzero(self, params, rng):
        kx = rng.uniform(-5, 5, 1000)
        omega = omega_plus(params, kx, 0.0) + rng.uniform(0.01, 10, 1000)
        ind = embedded_eigenvalue_indicator(params, kx, omega)
        ok = np.abs(omega**2 - kx**2) > 1e-6
        assert np.all(np.abs(ind[ok]) > 0)

    def test_omega_of_x_consistent(self, params):
        assert omega_of_x(params, 1.0) == pytest.approx(omega_plus(params, 1.0, 0.0))
