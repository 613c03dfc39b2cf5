"""Acceptance criteria at f = 1, nu = 0.2; each test records one PASS/FAIL line."""

import math
import time
import warnings
from fractions import Fraction

import numpy as np
import pytest

from conftest import record_acceptance
from topowave.asymptotics import SQRT2, infinity_ansatz, second_order_coefficients
from topowave.boundary import BoundaryCondition, dirichlet_bc, family_a_bc, is_self_adjoint
from topowave.bulk import FluidParams, chern_number, omega_plus
from topowave.edge import asymptotic_branch_probe, count_nb, merge_events
from topowave.modes import x_roots
from topowave.scattering import (
    GAUGE_INF,
    GAUGE_ZERO,
    SectionGauge,
    flux_terms,
    independence_margin,
    scattering_amplitude,
)
from topowave.spin_chern import chern_of_spin_band, polynomial_map, pullback_area, shallow_water_map, spin_matrices
from topowave.winding import ContourArc, admissible_lambda, epsilon_sweep, winding

A_VALUES = (-2.0, -1.0, 1.0, 2.0)
NB = {-2.0: 2, -1.0: 3, 1.0: 1, 2.0: 2}


def expected_outer(a):
    return 0 if abs(a) > SQRT2 else int(np.sign(a))


def test_1_chern_numbers(params):
    t0 = time.perf_counter()
    values = {band: chern_number(params, band) for band in ("plus", "zero", "minus")}
    elapsed = time.perf_counter() - t0
    res = max(abs(values["plus"] - 2), abs(values["zero"]), abs(values["minus"] + 2))
    ok = res <= 0.01 and elapsed <= 30
    record_acceptance(1, ok, f"C+={values['plus']:.6f} C0={values['zero']:.2e} C-={values['minus']:.6f} ({elapsed:.1f} s)")
    assert ok


def test_2_spin_law():
    worst = 0.0
    for s in ("1/2", "1", "3/2"):
        rep = spin_matrices(s)
        for d in (0, 1, 2):
            smap = polynomial_map(d)
            for m in rep.ms:
                worst = max(worst, abs(chern_of_spin_band(rep, smap, m) - 2 * m * d))
    ok = worst <= 0.02
    record_acceptance(2, ok, f"max |C - 2md| = {worst:.2e} over s in {{1/2, 1, 3/2}}, d in {{0, 1, 2}}")
    assert ok


def test_3_unregularized():
    p0 = FluidParams.unchecked(1.0, 0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        value = chern_number(p0, "plus")
    area = pullback_area(shallow_water_map(p0))
    ok = abs(value - 1) <= 0.02 and abs(area - 2 * math.pi) <= 0.06
    record_acceptance(3, ok, f"nu=0 integral {value:.5f}, image area {area:.5f} (2 pi = {2 * math.pi:.5f})")
    assert ok


def test_4_phase_diagram(params):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        got = {a: count_nb(params, family_a_bc(a)) for a in A_VALUES}
        got["dirichlet"] = count_nb(params, dirichlet_bc())
    ok = got == {**NB, "dirichlet": 2}
    record_acceptance(4, ok, "n_b = " + ", ".join(f"{k}: {v}" for k, v in got.items()))
    assert ok


@pytest.mark.parametrize("a", A_VALUES)
def test_5_winding_theorem(params, a):
    t0 = time.perf_counter()
    lam = admissible_lambda(params, a)
    triples, verdict = epsilon_sweep(params, a, (0.1, 0.05, 0.025), lam)
    elapsed = time.perf_counter() - t0
    ok = (
        all(abs(t.full.winding - 2) <= 0.02 for t in triples)
        and all(abs(t.inner.limit - NB[a]) <= 0.02 for t in triples)
        and all(abs(t.outer.limit - expected_outer(a)) <= 0.02 for t in triples)
        and all(t.additivity <= 0.01 for t in triples)
        and verdict["stable"]
        and elapsed <= 120
    )
    _FIVE[a] = (ok, triples[-1], elapsed)
    if len(_FIVE) == len(A_VALUES):
        parts = [
            f"a={k:g}: full {t.full.winding:.3f} inner {t.inner.limit:.3f} outer {round(t.outer.limit, 3) + 0.0:.3f} ({s:.1f} s)"
            for k, (_, t, s) in sorted(_FIVE.items())
        ]
        record_acceptance(5, all(v[0] for v in _FIVE.values()), "; ".join(parts))
    assert ok


_FIVE = {}


def test_6_asymptotic_modes(params):
    found = {
        (a, kx): asymptotic_branch_probe(params, a, kx)["bound_state_exists"]
        for a in (2.0, 1.0, -2.0)
        for kx in (50.0, -50.0)
    }
    want = {(2.0, 50.0): True, (2.0, -50.0): False, (1.0, 50.0): False, (1.0, -50.0): False, (-2.0, -50.0): True, (-2.0, 50.0): False}
    ok = found == want
    record_acceptance(6, ok, ", ".join(f"a={a:g} kx={kx:+g}: {'mode' if v else 'none'}" for (a, kx), v in found.items()))
    assert ok


def test_7_identities(params):
    rng = np.random.default_rng(7)
    n = 1000
    kx = rng.uniform(-6, 6, n)
    kappa = rng.uniform(1e-3, 6, n)
    omega = omega_plus(params, kx, kappa)
    unimod = 0.0
    for bc in (2.0, -1.0, family_a_bc(1.0), dirichlet_bc()):
        S, _ = scattering_amplitude(params, bc, SectionGauge(1j), kx, kappa)
        unimod = max(unimod, float(np.max(np.abs(np.abs(S) - 1))))
    S0, _ = scattering_amplitude(params, 2.0, GAUGE_ZERO, kx, kappa)
    Si, _ = scattering_amplitude(params, 2.0, GAUGE_INF, kx, kappa)
    t = GAUGE_ZERO.transition
    transition = float(np.max(np.abs(S0 - Si * t(kx, -kappa) / t(kx, kappa))))
    ft = flux_terms(params, kx, omega)
    scale = np.abs(ft["out_out"])
    flux = max(
        float(np.max(np.abs(ft["out_out"] - ft["closed_form"]) / scale)),
        float(np.max(np.abs(ft["in_in"] + ft["out_out"]) / scale)),
        float(np.max(np.abs(ft["out_in"]) / scale)),
    )
    Xp, Xm = x_roots(params, omega)
    prod = float(np.max(np.abs(params.nu**2 * Xp * Xm - (params.f**2 - omega**2)) / omega**2))
    margin = min(independence_margin(params, k, w) for k, w in zip(kx, omega))
    ok = unimod < 1e-10 and transition < 1e-10 and flux < 1e-10 and prod < 1e-12 and margin > 1e-6
    record_acceptance(
        7, ok,
        f"n={n}: ||S|-1| {unimod:.1e}, transition {transition:.1e}, flux {flux:.1e}, "
        f"root product {prod:.1e}, independence margin {margin:.1e}",
    )
    assert ok


def test_8_ansatz(params):
    root2 = infinity_ansatz(SQRT2)
    two = infinity_ansatz(2.0)
    s3 = math.sqrt(3)
    err_t = max(abs(root2.c_plus), abs(root2.c_minus + SQRT2))
    err_2 = max(abs(two.c_plus - (s3 - 1) / 2), abs(two.c_minus + (s3 + 1) / 2))
    traced = max(e.kx for e in merge_events(params, family_a_bc(1.5))) ** 2
    predicted = second_order_coefficients(params, 1.5).merge_kx_squared
    rel = abs(predicted - traced) / traced
    ok = err_t <= 1e-12 and err_2 <= 1e-10 and rel <= 0.2
    record_acceptance(8, ok, f"sqrt2 err {err_t:.1e}, a=2 err {err_2:.1e}, a=1.5 kx^2 {predicted:.2f} vs traced {traced:.2f} ({rel:.1%})")
    assert ok


def test_9_oracle_equivalence(params):
    worst, labels = 0.0, []
    for bc in [family_a_bc(a) for a in A_VALUES] + [dirichlet_bc()]:
        for eps in (0.1, 0.05):
            arc = ContourArc(eps, admissible_lambda(params, bc), "full")
            det = winding(params, bc, SectionGauge(1j), arc).winding
            ker = winding(params, bc, SectionGauge(1j), arc, method="kernel").winding
            worst = max(worst, abs(det - ker))
        labels.append(bc.label)
    ok = worst <= 0.01
    record_acceptance(9, ok, f"max |W_det - W_kernel| = {worst:.1e} over {', '.join(labels)}")
    assert ok


def test_10_certificates(params):
    good = [is_self_adjoint(family_a_bc(a), params.nu).passed for a in (-2.0, -1.0, 0.5, 1.0, 2.0)]
    good.append(is_self_adjoint(dirichlet_bc(), params.nu).passed)
    rng = np.random.default_rng(10)
    bad = []
    for _ in range(100):
        A = rng.normal(size=(2, 6)) + 1j * rng.normal(size=(2, 6))
        bad.append(is_self_adjoint(BoundaryCondition(A, np.zeros((2, 6))), params.nu).passed)
    ok = all(good) and not any(bad)
    record_acceptance(10, ok, f"{sum(good)}/6 valid conditions pass, {sum(bad)}/100 random pass")
    assert ok
