import math

import numpy as np
import pytest

from topowave.asymptotics import (
    SECTION_NORM,
    SQRT2,
    asymptotic_g0,
    asymptotic_g0_dual,
    dirichlet_infinity_check,
    g0_exact,
    infinity_ansatz,
    second_order_coefficients,
)
from topowave.boundary import family_a_bc
from topowave.edge import merge_events


class TestLeadingOrder:
    def test_ratio_tends_to_one(self, params):
        err = [abs(SECTION_NORM * asymptotic_g0(params, 2.0, k, 1.0) / g0_exact(params, 2.0, k, 1.0) - 1) for k in (50.0, 100.0)]
        assert err[0] < 0.006
        # second-order error: doubling kx cuts it by about four
        assert err[0] / err[1] == pytest.approx(4, rel=0.05)

    def test_small_kx_rejected(self, params):
        with pytest.raises(ValueError):
            asymptotic_g0(params, 2.0, 5.0, 1.0)

    def test_dual_form(self, params):
        lam, eps = 0.003, 0.005
        r2 = lam**2 + eps**2
        assert asymptotic_g0_dual(2.0, lam, eps) == pytest.approx(asymptotic_g0(params, 2.0, lam / r2, eps / r2), rel=1e-12)


class TestAnsatz:
    def test_transition_value(self):
        ans = infinity_ansatz(SQRT2)
        assert ans.transition
        assert ans.c_plus == 0.0
        assert ans.c_minus == pytest.approx(-SQRT2, abs=1e-12)

    def test_a2_line_circle(self):
        ans = infinity_ansatz(2.0)
        s3 = math.sqrt(3)
        assert ans.c_plus == pytest.approx((s3 - 1) / 2, abs=1e-10)
        assert ans.c_minus == pytest.approx(-(s3 + 1) / 2, abs=1e-10)
        assert ans.bound_state_at == "plus_infinity"
        assert ans.c_plus**2 + ans.c_minus**2 == pytest.approx(2, abs=1e-12)
        assert 2 + 2.0 * (ans.c_plus + ans.c_minus) == pytest.approx(0, abs=1e-12)

    def test_mirror(self):
        assert infinity_ansatz(-2.0).bound_state_at == "minus_infinity"

    @pytest.mark.parametrize("a", [0.5, 1.0, 1.2])
    def test_none_below_transition(self, a):
        assert infinity_ansatz(a).bound_state_at == "none"

    def test_no_intersection(self):
        ans = infinity_ansatz(0.5)
        assert ans.c_plus is None and ans.c_minus is None

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            infinity_ansatz(0.0)


class TestSecondOrder:
    def test_transition_merge_at_infinity(self, params):
        so = second_order_coefficients(params, SQRT2)
        assert so.merge_kx_squared == math.inf
        assert so.d_plus == pytest.approx(-5.052038200428268, rel=1e-10)
        assert so.d_minus == pytest.approx(-5.303300858899106, rel=1e-10)

    def test_a15_against_traced_merge(self, params):
        so = second_order_coefficients(params, 1.5)
        traced = max(e.kx for e in merge_events(params, family_a_bc(1.5)))
        assert so.merge_kx_squared == pytest.approx(traced**2, rel=0.2)

    def test_frozen(self, params):
        assert second_order_coefficients(params, 2.0).merge_kx_squared == pytest.approx(24.081548620732, rel=1e-10)
        assert second_order_coefficients(params, -2.0).merge_kx_squared == pytest.approx(95.9048999000404, rel=1e-10)

    def test_rejects_small_a(self, params):
        with pytest.raises(ValueError):
            second_order_coefficients(params, 1.0)

    def test_solves_system(self, params):
        so = second_order_coefficients(params, 2.0)
        ans = infinity_ansatz(2.0)
        nu, f = params.nu, params.f
        assert so.d_plus + so.d_minus == pytest.approx(-1 / (nu**2 * (1 - ans.c_minus) * (1 - ans.c_plus)))
        assert ans.c_plus * so.d_plus + ans.c_minus * so.d_minus == pytest.approx((1 - 2 * nu * f) / (2 * nu**2))


class TestDirichlet:
    def test_report(self, params):
        rep = dirichlet_infinity_check(params)
        assert rep.passed
        assert rep.s0_deviation < 1e-5
        assert rep.outer_winding == pytest.approx(0, abs=0.02)
        assert rep.full_winding == pytest.approx(2, abs=0.02)
        assert rep.n_b == 2
        assert np.isfinite(rep.s0_deviation)
