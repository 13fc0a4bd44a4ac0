"""Spin-flip rate, line shift, spatial coherence and the off-diagonal density-matrix element."""
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .atomics import CODATA2018, RB87_SURFACE_ELEMENTS, thermal_photon_number
from .errors import DomainError
from .green_kernel import magnetic_kernel, radial_moment
from .numerics import QuadratureReport, bisect, loglog_slope, second_derivative

# populations of the two sites stay normalized; only the coherence decays
RHO11 = RHO22 = 1.0

# Im residue (relative) below which complex results are returned as float
REALITY_THRESHOLD = 1e-10


@dataclass(frozen=True)
class RateResult:
    gamma12: float
    delta_omega: float
    thermal_factor: float
    report: QuadratureReport

    def __post_init__(self):
        if self.gamma12 < 0:
            raise DomainError(f"negative rate {self.gamma12}")
        if self.thermal_factor < 1:
            raise DomainError("thermal factor must be >= 1")


@dataclass(frozen=True)
class CoherenceResult:
    S: complex
    l: float
    d: float
    rho12_samples: tuple = ()
    small_l_coeff: Optional[float] = None
    report: Optional[QuadratureReport] = None


@dataclass(frozen=True)
class AsymptoticFit:
    exponent: float
    residual: float


def _positive(name, value):
    if not value > 0:
        raise DomainError(f"{name} must be positive, got {value}")


def _maybe_real(z, scale=None):
    z = complex(z)
    ref = abs(z) if scale is None else scale
    if abs(z.imag) <= REALITY_THRESHOLD * ref:
        return z.real
    return z


def gamma12_closed_form(d, omega_A, stack, constants=CODATA2018, tol=1e-8):
    """Zero-temperature rate from the single radial integral over Im r_TE.

    Gamma = pref * 3/(64 pi) * ∫ K^2 e^{-2Kd} Im r_TE(K) dK with
    pref = (mu_B g_S)^2/(c^2 eps0 hbar); this assumes |S_y| = |S_z| = 1/4.
    Returns ``(gamma, QuadratureReport)``.
    """
    _positive("d", d)
    _positive("omega_A", omega_A)
    if stack.is_vacuum():
        return 0.0, QuadratureReport(0.0, 0, 0)
    val, rep = radial_moment(d, omega_A, stack, 2, "imag", tol)
    return constants.rate_prefactor * 3.0 / (64.0 * math.pi) * float(val), rep


def _kernel(l, d, omega_A, stack, tol, axis):
    H, rep = magnetic_kernel(l, d, omega_A, stack, tol=tol, axis=axis)
    return H, rep


def gamma_general(d, omega_A, stack, spin_elements=RB87_SURFACE_ELEMENTS,
                  constants=CODATA2018, tol=1e-8):
    """Rate 2 pref a^† Im H(0, d) a for spin elements a = ⟨i|S|f⟩."""
    _positive("d", d)
    H, _ = _kernel(0.0, d, omega_A, stack, tol, "x")
    g = 2.0 * constants.rate_prefactor * H.contract(spin_elements, "imag")
    return _maybe_real(g, abs(g))


def line_shift(d, omega_A, stack, spin_elements=RB87_SURFACE_ELEMENTS,
               constants=CODATA2018, tol=1e-8):
    """Shift pref a^† Re H(0, d) a in rad/s; reported only, never applied."""
    _positive("d", d)
    H, _ = _kernel(0.0, d, omega_A, stack, tol, "x")
    dw = constants.rate_prefactor * H.contract(spin_elements, "real")
    return _maybe_real(dw, abs(dw))


def apply_thermal(rate, omega_A, T, constants=CODATA2018):
    """Scale a zero-temperature rate by n_bar + 1."""
    if rate < 0:
        raise DomainError("rate must be >= 0")
    return rate * (thermal_photon_number(omega_A, T, constants) + 1.0)


def rate(d, omega_A, stack, spin_elements=RB87_SURFACE_ELEMENTS, T=0.0,
         constants=CODATA2018, tol=1e-8):
    """Bundle rate, shift and thermal factor into a :class:`RateResult`."""
    H, rep = _kernel(0.0, d, omega_A, stack, tol, "x")
    g0 = max(0.0, float(np.real(2.0 * constants.rate_prefactor * H.contract(spin_elements))))
    dw = float(np.real(constants.rate_prefactor * H.contract(spin_elements, "real")))
    factor = thermal_photon_number(omega_A, T, constants) + 1.0
    return RateResult(g0 * factor, dw * factor, factor, rep)


def coherence_S(l, d, omega_A, stack, spin_elements=RB87_SURFACE_ELEMENTS,
                constants=CODATA2018, tol=1e-8, axis="x", d2=None, T=0.0):
    """Spatial coherence S between two sites separated laterally by ``l``.

    With ``d2`` the sites sit at heights d and d2; the kernel then depends on
    (d + d2)/2 and the rate in the denominator is the mean (Gamma_1 + Gamma_2)/2.
    The thermal factor cancels, so ``T`` has no effect; it is accepted for
    symmetry with :func:`rho12`. Returns a float when the imaginary residue
    is negligible, otherwise a complex number.
    """
    if l < 0:
        raise DomainError("separation must be >= 0")
    _positive("d", d)
    if T < 0:
        raise DomainError("temperature must be >= 0")
    dm = d if d2 is None else 0.5 * (d + d2)
    H, _ = _kernel(float(l), dm, omega_A, stack, tol, axis)
    num = H.contract(spin_elements, "imag")
    if d2 is None:
        den = _kernel(0.0, d, omega_A, stack, tol, axis)[0].contract(spin_elements, "imag")
    else:
        _positive("d2", d2)
        den = 0.5 * (_kernel(0.0, d, omega_A, stack, tol, axis)[0].contract(spin_elements)
                     + _kernel(0.0, d2, omega_A, stack, tol, axis)[0].contract(spin_elements))
    if den == 0:
        raise DomainError("spin-flip rate vanishes; coherence is undefined")
    factor = thermal_photon_number(omega_A, T, constants) + 1.0
    S = (factor * num) / (factor * den)
    return _maybe_real(S, abs(S))


def rho12(t, S, gamma12):
    """Coherence e^{-Gamma t} + (1 - e^{-Gamma t}) S between the two sites.

    ``gamma12`` is the thermal rate; ``t`` may be an array.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("time must be >= 0")
    decay = np.exp(-gamma12 * t)
    out = S + (1.0 - S) * decay
    return out.item() if out.ndim == 0 else out


def rho12_full(t, l, d, omega_A, stack, spin_elements=RB87_SURFACE_ELEMENTS, T=0.0,
               constants=CODATA2018, tol=1e-8, axis="x"):
    """ρ12(t) from scratch: thermal rate, S(l), then :func:`rho12`."""
    g0, _ = gamma12_from_kernel(d, omega_A, stack, spin_elements, constants, tol)
    g = apply_thermal(g0, omega_A, T, constants)
    S = coherence_S(l, d, omega_A, stack, spin_elements, constants, tol, axis)
    return rho12(t, S, g)


def gamma12_from_kernel(d, omega_A, stack, spin_elements, constants=CODATA2018, tol=1e-8):
    H, rep = _kernel(0.0, d, omega_A, stack, tol, "x")
    g = 2.0 * constants.rate_prefactor * H.contract(spin_elements)
    return max(0.0, g.real), rep


def small_l_coefficient(d, omega_A, stack, constants=CODATA2018, rate_fn: Optional[Callable] = None,
                        tol=1e-12):
    """c2 in S(l) ≈ 1 - c2 l^2, namely (5/96) Gamma''(d)/Gamma(d).

    The second derivative uses central differences with step d/200 and one
    Richardson level. ``rate_fn(d)`` overrides the closed-form rate.
    """
    _positive("d", d)
    if rate_fn is None:
        def rate_fn(x):
            return gamma12_closed_form(x, omega_A, stack, constants, tol=tol)[0]
    g = rate_fn(d)
    if g == 0:
        raise DomainError("spin-flip rate vanishes; the expansion is undefined")
    return 5.0 / 96.0 * second_derivative(rate_fn, d, d / 200.0, richardson=True) / g


def alpha_from_exponent(n):
    """Short-time prefactor alpha = n(n+1)/2 for a rate falling as d^-n."""
    return 0.5 * n * (n + 1.0)


def short_time_decoherence(t, l, d, gamma12, alpha):
    """|ρ12(t) - 1| ≈ (5 alpha l^2 / 48 d^2) Gamma t, valid for t < 1/(10 Gamma)."""
    _positive("d", d)
    return 5.0 * alpha * l * l / (48.0 * d * d) * gamma12 * t


def half_coherence_length(d, omega_A, stack, spin_elements=RB87_SURFACE_ELEMENTS,
                          constants=CODATA2018, tol=1e-8, axis="x", rel_tol=1e-4):
    """Separation at which S falls to 1/2, by bisection.

    The bracket starts at [0, d] and doubles up to [0, 32 d]; if S is still
    above 1/2 there, :class:`BracketError` reports S at both ends.
    """
    _positive("d", d)

    def f(l):
        return float(np.real(coherence_S(l, d, omega_A, stack, spin_elements, constants, tol,
                                         axis))) - 0.5

    hi = d
    while f(hi) > 0 and hi < 32.0 * d:
        hi *= 2.0
    return bisect(f, (0.0, hi), tol=rel_tol, relative=True)


def fit_asymptotic_exponent(ds: Sequence[float], gammas: Sequence[float]) -> AsymptoticFit:
    """Exponent n of Gamma ∝ d^-n from a log-log least-squares fit."""
    ds = np.asarray(ds, dtype=float)
    gammas = np.asarray(gammas, dtype=float)
    if ds.size < 3:
        raise DomainError("need at least 3 points for an exponent fit")
    slope, resid = loglog_slope(ds, gammas)
    return AsymptoticFit(-slope, resid)
