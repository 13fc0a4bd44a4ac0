"""Physical constants, the two-level spin transition and thermal statistics."""
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class PhysicalConstants:
    """SI constants, CODATA 2018 recommended values."""

    mu_B: float = 9.2740100783e-24  # J/T
    g_S: float = 2.00231930436256  # |g_e|
    hbar: float = 1.054571817e-34  # J s
    eps0: float = 8.8541878128e-12  # F/m
    c: float = 299792458.0  # m/s
    k_B: float = 1.380649e-23  # J/K

    def __post_init__(self):
        for name in ("mu_B", "g_S", "hbar", "eps0", "c", "k_B"):
            if not getattr(self, name) > 0:
                raise DomainError(f"constant {name} must be positive")

    @property
    def rate_prefactor(self):
        """(mu_B g_S)^2 / (c^2 eps0 hbar), in s^-1 m^3."""
        return (self.mu_B * self.g_S) ** 2 / (self.c ** 2 * self.eps0 * self.hbar)


CODATA2018 = PhysicalConstants()

# ⟨i|S|f⟩ for 87Rb |2,2> -> |2,1> with the bias field along the surface x
# axis, up to a global phase.
RB87_SURFACE_ELEMENTS = (0.0, 0.25j, 0.25)


@dataclass(frozen=True)
class AtomTransition:
    """A magnetic-dipole transition |i> -> |f> at angular frequency ``omega_A``.

    ``spin_elements`` holds ⟨i|S_q|f⟩ for q = x, y, z of the surface frame
    (z along the surface normal), in units of hbar.
    """

    omega_A: float
    spin_elements: tuple = RB87_SURFACE_ELEMENTS
    label: str = ""

    def __post_init__(self):
        if not self.omega_A > 0:
            raise DomainError(f"transition frequency must be positive, got {self.omega_A}")
        elems = tuple(complex(v) for v in self.spin_elements)
        if len(elems) != 3:
            raise DomainError("spin_elements needs three Cartesian components")
        if all(v == 0 for v in elems):
            raise DomainError("spin_elements are all zero")
        object.__setattr__(self, "spin_elements", elems)

    @classmethod
    def from_frequency(cls, f_hz, spin_elements=RB87_SURFACE_ELEMENTS, label=""):
        return cls(2.0 * math.pi * f_hz, spin_elements, label)

    @property
    def elements(self):
        return np.array(self.spin_elements, dtype=complex)


@dataclass(frozen=True)
class ThermalState:
    """Field temperature and the photon occupation it implies at ``omega``."""

    temperature: float
    omega: float
    constants: PhysicalConstants = CODATA2018
    n_bar: float = field(init=False, default=0.0)

    def __post_init__(self):
        if self.temperature < 0:
            raise DomainError("temperature must be >= 0")
        object.__setattr__(self, "n_bar",
                           thermal_photon_number(self.omega, self.temperature, self.constants))


@dataclass(frozen=True)
class TrapField:
    B0: float

    def __post_init__(self):
        if self.B0 < 0:
            raise DomainError("bias field must be >= 0")


def larmor_frequency(B0, constants=CODATA2018):
    """Zeeman splitting g_S mu_B B0 / hbar in rad/s."""
    if B0 < 0:
        raise DomainError("bias field must be >= 0")
    return constants.g_S * constants.mu_B * B0 / constants.hbar


def thermal_photon_number(omega, T, constants=CODATA2018):
    """Bose occupation 1/(exp(hbar omega / k_B T) - 1); exactly 0 at T = 0."""
    if not omega > 0:
        raise DomainError(f"frequency must be positive, got {omega}")
    if T < 0:
        raise DomainError("temperature must be >= 0")
    if T == 0:
        return 0.0
    x = constants.hbar * omega / (constants.k_B * T)
    if x > 700:
        return 0.0
    return 1.0 / math.expm1(x)


# Clebsch-Gordan machinery ----------------------------------------------------

def _frac(x):
    f = Fraction(x).limit_denominator(2)
    if abs(float(f) - float(x)) > 1e-12:
        raise DomainError(f"quantum number {x} is not a multiple of 1/2")
    return f


def _is_int(f):
    return f.denominator == 1


def clebsch_gordan(j1, m1, j2, m2, J, M):
    """⟨j1 m1; j2 m2 | J M⟩ by the Racah formula (Condon-Shortley phases)."""
    j1, m1, j2, m2, J, M = map(_frac, (j1, m1, j2, m2, J, M))
    if m1 + m2 != M:
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(M) > J:
        return 0.0
    if not (abs(j1 - j2) <= J <= j1 + j2) or not _is_int(j1 + j2 + J):
        return 0.0
    fact = math.factorial

    def fi(x):
        return fact(int(x))

    pre = Fraction((2 * J + 1) * fi(J + j1 - j2) * fi(J - j1 + j2) * fi(j1 + j2 - J),
                   fi(j1 + j2 + J + 1))
    pre *= fi(J + M) * fi(J - M) * fi(j1 - m1) * fi(j1 + m1) * fi(j2 - m2) * fi(j2 + m2)
    total = Fraction(0)
    for k in range(0, int(j1 + j2 - J) + 1):
        args = (k, j1 + j2 - J - k, j1 - m1 - k, j2 + m2 - k, J - j2 + m1 + k, J - j1 - m2 + k)
        if any(a < 0 for a in args):
            continue
        den = 1
        for a in args:
            den *= fi(a)
        total += Fraction((-1) ** k, den)
    return float(total) * math.sqrt(float(pre))


def _check_state(F, mF, S, I):
    if not (abs(S - I) <= F <= S + I) or not _is_int(F - abs(S - I)):
        raise DomainError(f"F = {F} not allowed for S = {S}, I = {I}")
    if abs(mF) > F or not _is_int(F - mF):
        raise DomainError(f"m_F = {mF} not allowed for F = {F}")


def _hyperfine_state(F, mF, S, I):
    """Coefficients of |F mF> on the product basis |mS, mI>, keyed by (mS, mI)."""
    out = {}
    mS = -S
    while mS <= S:
        mI = mF - mS
        if abs(mI) <= I:
            cg = clebsch_gordan(S, mS, I, mI, F, mF)
            if cg != 0.0:
                out[(mS, mI)] = cg
        mS += 1
    return out


def _spin_apply(state, S):
    """Return (S+ state, S- state, Sz state) on the product basis."""
    plus, minus, z = {}, {}, {}
    for (mS, mI), amp in state.items():
        up = math.sqrt(float(S * (S + 1) - mS * (mS + 1)))
        dn = math.sqrt(float(S * (S + 1) - mS * (mS - 1)))
        if up:
            plus[(mS + 1, mI)] = plus.get((mS + 1, mI), 0.0) + up * amp
        if dn:
            minus[(mS - 1, mI)] = minus.get((mS - 1, mI), 0.0) + dn * amp
        z[(mS, mI)] = float(mS) * amp
    return plus, minus, z


def _overlap(bra, ket):
    return sum(amp * ket.get(key, 0.0) for key, amp in bra.items())


def spin_matrix_elements(F_i, mF_i, F_f, mF_f, S=0.5, I=1.5):
    """Electron-spin matrix elements ⟨F_i mF_i|S_q|F_f mF_f⟩, q = x, y, z.

    Components refer to the frame whose z axis is the quantization (bias
    field) axis; :func:`to_surface_frame` rotates them into the surface
    frame. Nuclear spin enters only through the Clebsch-Gordan expansion.
    """
    S, I = _frac(S), _frac(I)
    F_i, mF_i, F_f, mF_f = map(_frac, (F_i, mF_i, F_f, mF_f))
    _check_state(F_i, mF_i, S, I)
    _check_state(F_f, mF_f, S, I)
    bra = _hyperfine_state(F_i, mF_i, S, I)
    ket = _hyperfine_state(F_f, mF_f, S, I)
    plus, minus, z = _spin_apply(ket, S)
    sp, sm, sz = _overlap(bra, plus), _overlap(bra, minus), _overlap(bra, z)
    sx = 0.5 * (sp + sm)
    sy = -0.5j * (sp - sm)
    return np.array([sx, sy, sz], dtype=complex)


_AXIS_MAPS = {
    # quantization axis -> rows mapping spin-frame (x', y', z') onto surface axes
    "z": np.eye(3),
    "x": np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]], dtype=float),
    "y": np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=float),
}


def to_surface_frame(elements, bias_axis="x"):
    """Rotate spin-frame elements so that z' lies along surface axis ``bias_axis``.

    The rotation is a cyclic relabelling of axes, so it is proper and keeps
    handedness.
    """
    try:
        M = _AXIS_MAPS[bias_axis]
    except KeyError:
        raise DomainError(f"bias_axis must be one of x, y, z; got {bias_axis!r}") from None
    return M @ np.asarray(elements, dtype=complex)
