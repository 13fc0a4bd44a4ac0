"""Self-checks run by ``spindec verify``: oracles, identities and asymptotic slopes."""
import math
import time
from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from . import green_kernel as gk
from . import layered_media as lm
from . import rates_coherence as rc
from .errors import SpindecError
from .numerics import second_derivative

OMEGA_FIG1 = 2.0 * math.pi * 560e3
UM = 1e-6


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


def check_fresnel_identity(tol):
    """h = 0 composite equals the direct 1 -> 3 coefficient, both polarizations."""
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(20):
        omega = 2 * math.pi * rng.uniform(1e5, 1e7)
        k0 = omega / gk.C_LIGHT
        e2 = complex(rng.uniform(1, 5), rng.uniform(0, 3))
        e3 = complex(rng.uniform(1, 5), rng.uniform(0, 3))
        K = rng.uniform(0, 3) * k0
        for pol, fres in ((lm.TE, lm.fresnel_te), (lm.TM, lm.fresnel_tm)):
            r12 = fres(omega, K, 1.0, e2)
            r21 = fres(omega, K, e2, 1.0)
            r23 = fres(omega, K, e2, e3)
            k2z = lm.normal_wavenumber(omega, K, e2)
            comp = lm.three_layer_fresnel(r12, r21, r23, k2z, 0.0)
            worst = max(worst, _rel(comp, fres(omega, K, 1.0, e3)))
    return worst <= 1e-12, f"max rel. deviation {worst:.2e} (limit 1e-12)"


def check_thick_film(tol):
    """Film of thickness 10 delta matches the semi-infinite metal."""
    worst = 0.0
    for delta in (10 * UM, 110 * UM):
        K = np.geomspace(1e2, 1e7, 40)
        film = lm.LayerStack.film(lm.DrudeSkinDepth(delta), 10 * delta, lm.ConstantPermittivity(2.25))
        half = lm.LayerStack.half_space(lm.DrudeSkinDepth(delta))
        for pol in (lm.TE, lm.TM):
            worst = max(worst, _rel(lm.stack_reflection(film, OMEGA_FIG1, K, pol),
                                    lm.stack_reflection(half, OMEGA_FIG1, K, pol)))
    return worst <= 1e-6, f"max rel. deviation {worst:.2e} (limit 1e-6)"


def random_oracle_cases(n, seed=2024):
    """Parameter sets (l, d, omega, delta) drawn from the oracle-equivalence ranges."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        d = math.exp(rng.uniform(math.log(1 * UM), math.log(100 * UM)))
        l = rng.uniform(0, 5) * d
        delta = rng.uniform(10, 200) * UM
        omega = 2 * math.pi * math.exp(rng.uniform(math.log(1e5), math.log(1e7)))
        out.append((l, d, omega, delta))
    return out


def check_brute_force(tol, n=3):
    """Bessel radial quadrature against the 2-D (k_x, k_y) grid."""
    limit = max(10 * tol, 1e-6)
    worst = 0.0
    for l, d, omega, delta in random_oracle_cases(n):
        stack = lm.LayerStack.half_space(lm.DrudeSkinDepth(delta))
        H, _ = gk.magnetic_kernel(l, d, omega, stack, tol=tol)
        worst = max(worst, _rel(H.tensor, gk.brute_force_kernel(l, d, omega, stack)))
    return worst <= limit, f"max rel. deviation {worst:.2e} over {n} sets (limit {limit:.1e})"


def fd_oracle_cases(n, seed=7):
    """Retarded-regime parameters (k0 d of order one) where both polarizations matter."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        omega = 2 * math.pi * rng.uniform(1e5, 1e7)
        k0 = omega / gk.C_LIGHT
        d = rng.uniform(0.3, 3.0) / k0
        K = rng.uniform(0.1, 3.0) / d
        phi = rng.uniform(0, 2 * math.pi)
        eps = complex(rng.uniform(1.5, 6.0), rng.uniform(0.0, 4.0))
        out.append((K, phi, omega, d, eps))
    return out


def check_fd_curl(tol, n=10):
    """k-space curls against finite-difference curls of the electric tensor."""
    worst = 0.0
    for K, phi, omega, d, eps in fd_oracle_cases(n):
        stack = lm.LayerStack.half_space(lm.ConstantPermittivity(eps))
        a = gk.magnetic_weyl_integrand(K, phi, omega, d, stack, quasi_static=False)
        b = gk.fd_curl_curl(K, phi, omega, d, stack)
        worst = max(worst, _rel(a, b))
    return worst <= 1e-4, f"max rel. deviation {worst:.2e} over {n} sets (limit 1e-4)"


def check_closed_form(tol):
    """Spin contraction of the kernel equals the single-integral rate."""
    worst = 0.0
    stack = lm.LayerStack.half_space(lm.DrudeSkinDepth(110 * UM))
    for d in (5 * UM, 10 * UM, 20 * UM):
        g1, _ = rc.gamma12_closed_form(d, OMEGA_FIG1, stack, tol=tol)
        g2 = rc.gamma_general(d, OMEGA_FIG1, stack, tol=tol)
        worst = max(worst, abs(g2 - g1) / g1)
    return worst <= 1e-5, f"max rel. deviation {worst:.2e} (limit 1e-5)"


def check_k2_identity(tol):
    """An extra K^2 in the radial integrand equals (1/4) d^2/dd^2 of the plain one."""
    stack = lm.LayerStack.half_space(lm.DrudeSkinDepth(110 * UM))
    worst = 0.0
    for d in (5 * UM, 20 * UM):
        plain = lambda x: gk.radial_moment(x, OMEGA_FIG1, stack, 2, tol=1e-13)[0]
        extra, _ = gk.radial_moment(d, OMEGA_FIG1, stack, 4, tol=1e-13)
        fd = 0.25 * second_derivative(plain, d, d / 200.0)
        worst = max(worst, abs(fd - extra) / abs(extra))
    return worst <= 1e-5, f"max rel. deviation {worst:.2e} (limit 1e-5)"


def check_reciprocity(tol):
    """H(l) equals H(-l) transposed."""
    stack = lm.LayerStack.half_space(lm.DrudeSkinDepth(110 * UM))
    worst = 0.0
    for l in (3 * UM, 17 * UM):
        for axis in ("x", "y"):
            a, _ = gk.magnetic_kernel(l, 10 * UM, OMEGA_FIG1, stack, tol=tol, axis=axis)
            b, _ = gk.magnetic_kernel(-l, 10 * UM, OMEGA_FIG1, stack, tol=tol, axis=axis)
            worst = max(worst, _rel(a.tensor, b.tensor.T))
    limit = 10 * tol
    return worst <= limit, f"max rel. deviation {worst:.2e} (limit {limit:.1e})"


def thick_regime_exponent(tol):
    stack = lm.LayerStack.half_space(lm.DrudeSkinDepth(110 * UM))
    ds = np.geomspace(0.5 * UM, 2.5 * UM, 9)
    return rc.fit_asymptotic_exponent(ds, [rc.gamma12_closed_form(x, OMEGA_FIG1, stack, tol=tol)[0]
                                           for x in ds])


def thin_regime_exponent(tol):
    stack = lm.LayerStack.film(lm.DrudeSkinDepth(110 * UM), 1 * UM, lm.Vacuum())
    ds = np.geomspace(10 * UM, 50 * UM, 9)
    return rc.fit_asymptotic_exponent(ds, [rc.gamma12_closed_form(x, OMEGA_FIG1, stack, tol=tol)[0]
                                           for x in ds])


def check_slopes(tol):
    """Rate exponents n = 1 (thick metal) and n = 2 (thin film)."""
    thick = thick_regime_exponent(tol).exponent
    thin = thin_regime_exponent(tol).exponent
    ok = abs(thick - 1) <= 0.05 and abs(thin - 2) <= 0.05
    return ok, f"thick n = {thick:.4f}, thin n = {thin:.4f} (target 1, 2 within 0.05)"


CHECKS: List[Callable] = [
    check_fresnel_identity,
    check_thick_film,
    check_fd_curl,
    check_brute_force,
    check_closed_form,
    check_k2_identity,
    check_reciprocity,
    check_slopes,
]


def run_checks(tol=1e-8, checks=None):
    """Run every check; exceptions count as failures."""
    results = []
    for fn in checks or CHECKS:
        name = fn.__name__.replace("check_", "")
        start = time.perf_counter()
        try:
            ok, detail = fn(tol)
        except (SpindecError, ArithmeticError, ValueError) as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(ok), detail, time.perf_counter() - start))
    return results
