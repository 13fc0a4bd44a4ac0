"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py`` and read the "acceptance criteria"
section of the terminal summary.
"""
import math
import time

import numpy as np
import pytest

from spindec import atomics as at
from spindec import green_kernel as gk
from spindec import layered_media as lm
from spindec import rates_coherence as rc
from spindec.numerics import second_derivative
from spindec.verify import fd_oracle_cases, random_oracle_cases

UM = 1e-6
OMEGA = 2 * math.pi * 560e3
TOL = 1e-8
SPIN = (0.0, 0.25j, 0.25)
METAL = lm.LayerStack.half_space(lm.DrudeSkinDepth(110 * UM))
THIN = lm.LayerStack.film(lm.DrudeSkinDepth(110 * UM), 1 * UM, lm.Vacuum())
FIG1_D = (5 * UM, 10 * UM, 20 * UM)
FIG1_L = np.linspace(0, 100, 51) * UM
FIG2_D = 50 * UM
FIG2_H = np.array([0.5, 1, 2, 5, 10, 20, 30, 50, 100, 200, 500]) * UM


def rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


def fig2_stack(delta, h):
    return lm.LayerStack.film(lm.DrudeSkinDepth(delta), h, lm.ConstantPermittivity(2.25))


def test_criterion_1_fig1(criterion):
    start = time.perf_counter()
    S = {d: np.array([rc.coherence_S(l, d, OMEGA, METAL, SPIN, tol=TOL) for l in FIG1_L])
         for d in FIG1_D}
    seconds = time.perf_counter() - start
    starts = all(S[d][0] == 1.0 for d in FIG1_D)
    monotone = all(np.all(np.diff(S[d]) < 0) for d in FIG1_D)
    ordered = bool(np.all(S[FIG1_D[2]][1:] > S[FIG1_D[1]][1:])
                   and np.all(S[FIG1_D[1]][1:] > S[FIG1_D[0]][1:]))
    ok = starts and monotone and ordered and seconds < 60
    detail = (f"S(0)=1 {starts}, monotone {monotone}, ordered {ordered}, "
              f"S(100um) = {S[5*UM][-1]:.3f}/{S[10*UM][-1]:.3f}/{S[20*UM][-1]:.3f}, "
              f"{seconds:.1f} s (limit 60 s)")
    assert criterion(1, "Fig. 1 coherence curves", ok, detail), detail


def test_criterion_2_exponents(criterion):
    thick_d = np.geomspace(0.5 * UM, 2.5 * UM, 9)
    thin_d = np.geomspace(10 * UM, 50 * UM, 9)
    thick = rc.fit_asymptotic_exponent(
        thick_d, [rc.gamma12_closed_form(d, OMEGA, METAL, tol=TOL)[0] for d in thick_d])
    thin = rc.fit_asymptotic_exponent(
        thin_d, [rc.gamma12_closed_form(d, OMEGA, THIN, tol=TOL)[0] for d in thin_d])
    ok = abs(thick.exponent - 1) <= 0.05 and abs(thin.exponent - 2) <= 0.05
    detail = (f"thick (delta 110 um, d 0.5-2.5 um) n = {thick.exponent:.4f}; "
              f"thin (h 1 um, d 10-50 um) n = {thin.exponent:.4f}; tolerance 0.05")
    assert criterion(2, "asymptotic exponents", ok, detail), detail


def test_criterion_3_small_l(criterion):
    worst = 0.0
    for d in FIG1_D:
        c2 = rc.small_l_coefficient(d, OMEGA, METAL)
        for l in np.linspace(0, d / 10, 6):
            worst = max(worst, abs(rc.coherence_S(l, d, OMEGA, METAL, SPIN, tol=TOL) - (1 - c2 * l * l)))
    d_thick, d_thin = 1 * UM, 30 * UM
    c2_thick = rc.small_l_coefficient(d_thick, OMEGA, METAL)
    c2_thin = rc.small_l_coefficient(d_thin, OMEGA, THIN)
    mono_thick = c2_thick / (5 * 2 / (96 * d_thick ** 2))
    mono_thin = c2_thin / (5 * 6 / (96 * d_thin ** 2))
    alpha_thick = 48 * d_thick ** 2 * c2_thick / 5
    alpha_thin = 48 * d_thin ** 2 * c2_thin / 5
    ok = (worst <= 1e-3 and abs(mono_thick - 1) <= 0.05 and abs(mono_thin - 1) <= 0.05
          and abs(alpha_thick - 1) <= 0.05 and abs(alpha_thin / 3 - 1) <= 0.05)
    detail = (f"max |S - (1 - c2 l^2)| = {worst:.1e} (limit 1e-3); c2/monomial = "
              f"{mono_thick:.4f} thick, {mono_thin:.4f} thin; alpha = {alpha_thick:.3f} / "
              f"{alpha_thin:.3f} (targets 1 / 3, 5%)")
    assert criterion(3, "small-l law", ok, detail), detail


def test_criterion_4_oracles(criterion):
    limit = max(10 * TOL, 1e-6)
    worst_grid = 0.0
    for l, d, omega, delta in random_oracle_cases(10):
        stack = lm.LayerStack.half_space(lm.DrudeSkinDepth(delta))
        H, _ = gk.magnetic_kernel(l, d, omega, stack, tol=TOL)
        worst_grid = max(worst_grid, rel(H.tensor, gk.brute_force_kernel(l, d, omega, stack)))
    worst_fd = 0.0
    for K, phi, omega, d, eps in fd_oracle_cases(10):
        stack = lm.LayerStack.half_space(lm.ConstantPermittivity(eps))
        a = gk.magnetic_weyl_integrand(K, phi, omega, d, stack, quasi_static=False)
        worst_fd = max(worst_fd, rel(a, gk.fd_curl_curl(K, phi, omega, d, stack)))
    ok = worst_grid <= limit and worst_fd <= 1e-4
    detail = (f"radial vs 2-D grid {worst_grid:.1e} over 10 sets (limit {limit:.0e}); "
              f"k-space vs finite-difference curls {worst_fd:.1e} (limit 1e-4)")
    assert criterion(4, "oracle equivalence", ok, detail), detail


def test_criterion_5_consistency(criterion):
    worst_rate = 0.0
    for d in FIG1_D:
        g1, _ = rc.gamma12_closed_form(d, OMEGA, METAL, tol=TOL)
        g2 = rc.gamma_general(d, OMEGA, METAL, SPIN, tol=TOL)
        worst_rate = max(worst_rate, abs(g2 - g1) / g1)
    worst_k2 = 0.0
    for d in (5 * UM, 20 * UM):
        plain = lambda x: gk.radial_moment(x, OMEGA, METAL, 2, tol=1e-13)[0]
        extra, _ = gk.radial_moment(d, OMEGA, METAL, 4, tol=1e-13)
        worst_k2 = max(worst_k2, abs(0.25 * second_derivative(plain, d, d / 200) - extra) / extra)
    ok = worst_rate <= 1e-5 and worst_k2 <= 1e-5
    detail = f"general vs closed-form rate {worst_rate:.1e}; K^2 identity {worst_k2:.1e} (limits 1e-5)"
    assert criterion(5, "internal consistency", ok, detail), detail


def test_criterion_6_fresnel(criterion):
    rng = np.random.default_rng(6)
    worst0 = 0.0
    for _ in range(50):
        omega = 2 * math.pi * rng.uniform(1e5, 1e7)
        K = rng.uniform(0, 3) * omega / gk.C_LIGHT
        e2 = complex(rng.uniform(1, 10), rng.uniform(0, 5))
        e3 = complex(rng.uniform(1, 10), rng.uniform(0, 5))
        for fres in (lm.fresnel_te, lm.fresnel_tm):
            comp = lm.three_layer_fresnel(fres(omega, K, 1.0, e2), fres(omega, K, e2, 1.0),
                                          fres(omega, K, e2, e3), lm.normal_wavenumber(omega, K, e2),
                                          0.0)
            worst0 = max(worst0, rel(comp, fres(omega, K, 1.0, e3)))
    worst10 = 0.0
    K = np.geomspace(1e2, 1e7, 60)
    for delta in (10 * UM, 50 * UM, 110 * UM):
        film = fig2_stack(delta, 10 * delta)
        half = lm.LayerStack.half_space(lm.DrudeSkinDepth(delta))
        for pol in (lm.TE, lm.TM):
            worst10 = max(worst10, rel(lm.stack_reflection(film, OMEGA, K, pol),
                                       lm.stack_reflection(half, OMEGA, K, pol)))
    ok = worst0 <= 1e-12 and worst10 <= 1e-6
    detail = f"h = 0 vs direct {worst0:.1e} (limit 1e-12); h = 10 delta vs half-space {worst10:.1e} (limit 1e-6)"
    assert criterion(6, "three-layer Fresnel identities", ok, detail), detail


def test_criterion_7_fig2(criterion):
    start = time.perf_counter()
    lh = {delta: np.array([rc.half_coherence_length(FIG2_D, OMEGA, fig2_stack(delta, h), SPIN, tol=TOL)
                           for h in FIG2_H]) for delta in (10 * UM, 100 * UM)}
    seconds = time.perf_counter() - start
    small = lh[10 * UM]
    rising = FIG2_H < 2 * 10 * UM
    decreasing = bool(np.all(np.diff(small[rising]) < 0))
    plateau = small[~rising]
    near_delta = bool(np.all((plateau >= 5 * UM) & (plateau <= 20 * UM)))
    large = lh[100 * UM][FIG2_H <= 100 * UM]
    spread = large.max() / large.min() - 1
    ok = decreasing and near_delta and spread < 0.20 and seconds < 600
    detail = (f"delta 10 um: decreasing for h < 2 delta {decreasing}, plateau "
              f"{plateau.min() / UM:.1f}-{plateau.max() / UM:.1f} um (need 5-20 um); "
              f"delta 100 um: spread {100 * spread:.1f}% for h <= delta (limit 20%); {seconds:.1f} s (limit 600 s)")
    assert criterion(7, "Fig. 2 half-coherence length", ok, detail), detail


def test_criterion_8_rho12(criterion):
    worst = 0.0
    exact_start = True
    for d in FIG1_D:
        g = rc.gamma12_closed_form(d, OMEGA, METAL, tol=TOL)[0]
        for l in (5 * UM, 30 * UM, 90 * UM):
            S = rc.coherence_S(l, d, OMEGA, METAL, SPIN, tol=TOL)
            exact_start &= rc.rho12(0.0, S, g) == 1.0
            t = np.linspace(0, 10 / g, 41)
            worst = max(worst, float(np.max(np.abs(rc.rho12(t, S, g) - S - (1 - S) * np.exp(-g * t)))))
    multiplicative = True
    worst_T = 0.0
    for T in (0.0, 4.2, 77.0, 300.0):
        g0 = rc.rate(10 * UM, OMEGA, METAL, SPIN, 0.0, tol=TOL).gamma12
        res = rc.rate(10 * UM, OMEGA, METAL, SPIN, T, tol=TOL)
        nbar = at.thermal_photon_number(OMEGA, T) if T > 0 else 0.0
        multiplicative &= res.thermal_factor == nbar + 1 and res.gamma12 == g0 * res.thermal_factor
        S0 = rc.coherence_S(20 * UM, 10 * UM, OMEGA, METAL, SPIN, tol=TOL, T=0.0)
        ST = rc.coherence_S(20 * UM, 10 * UM, OMEGA, METAL, SPIN, tol=TOL, T=T)
        worst_T = max(worst_T, abs(ST - S0))
    ok = exact_start and worst <= 1e-12 and multiplicative and worst_T <= 4 * np.finfo(float).eps
    detail = (f"rho12(0) = 1 exactly {exact_start}; interpolation identity {worst:.1e} "
              f"(limit 1e-12); thermal scaling exact {multiplicative}; S(T) - S(0) {worst_T:.1e}")
    assert criterion(8, "rho12 contract", ok, detail), detail


def test_criterion_9_positivity_reality(criterion):
    min_rate = math.inf
    for delta in (10 * UM, 110 * UM):
        for stack in (lm.LayerStack.half_space(lm.DrudeSkinDepth(delta)),
                      fig2_stack(delta, 1 * UM), fig2_stack(delta, 30 * UM)):
            for d in (1 * UM, 5 * UM, 20 * UM, 80 * UM):
                min_rate = min(min_rate, rc.gamma12_closed_form(d, OMEGA, stack, tol=TOL)[0],
                               rc.gamma_general(d, OMEGA, stack, SPIN, tol=TOL))
    worst_imag = 0.0
    for d in FIG1_D:
        H0, _ = gk.magnetic_kernel(0.0, d, OMEGA, METAL, tol=TOL)
        rate_c = H0.contract(SPIN)
        worst_imag = max(worst_imag, abs(rate_c.imag) / abs(rate_c))
        g = rc.gamma12_closed_form(d, OMEGA, METAL, tol=TOL)[0]
        for l in (3 * UM, 25 * UM, 70 * UM):
            H, _ = gk.magnetic_kernel(l, d, OMEGA, METAL, tol=TOL)
            num = H.contract(SPIN)
            worst_imag = max(worst_imag, abs(num.imag) / abs(num))
            S = num / rate_c
            rho = rc.rho12(np.array([0.1, 1.0]) / g, S, g)
            worst_imag = max(worst_imag, float(np.max(np.abs(np.imag(rho)) / np.abs(rho))))
    worst_recip = 0.0
    for axis in ("x", "y"):
        for l in (2 * UM, 13 * UM, 40 * UM):
            a, _ = gk.magnetic_kernel(l, 10 * UM, OMEGA, METAL, tol=TOL, axis=axis)
            b, _ = gk.magnetic_kernel(-l, 10 * UM, OMEGA, METAL, tol=TOL, axis=axis)
            worst_recip = max(worst_recip, rel(a.tensor, b.tensor.T))
    ok = min_rate >= 0 and worst_imag <= 1e-10 and worst_recip <= 10 * TOL
    detail = (f"min rate {min_rate:.3e} /s; max imaginary residue {worst_imag:.1e} (limit 1e-10); "
              f"reciprocity {worst_recip:.1e} (limit {10 * TOL:.0e})")
    assert criterion(9, "positivity and reality", ok, detail), detail
