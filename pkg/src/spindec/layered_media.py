"""Permittivity models and Fresnel reflection for planar multilayers.

Region 1 is the vacuum half-space holding the atom (z > 0); the stack lists
the layers below it from the surface downwards, the last one semi-infinite.
Normal wavenumbers always take the branch with Im k_z >= 0.
"""
import contextlib
import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from . import _kernels
from .atomics import CODATA2018
from .errors import DomainError, SingularityError

SINGULAR = _kernels.SINGULAR
TE, TM = "TE", "TM"

# debug hook: when set, TM coefficients use a "-" in the denominator
_flip_tm_sign = False


@contextlib.contextmanager
def debug_tm_sign_flip():
    """Temporarily flip the TM denominator sign (mutation testing only)."""
    global _flip_tm_sign
    saved = _flip_tm_sign
    _flip_tm_sign = True
    try:
        yield
    finally:
        _flip_tm_sign = saved


@dataclass(frozen=True)
class Vacuum:
    def epsilon(self, omega):
        return 1.0 + 0j


@dataclass(frozen=True)
class ConstantPermittivity:
    value: complex

    def __post_init__(self):
        v = complex(self.value)
        if v.imag < 0:
            raise DomainError(f"passive medium needs Im eps >= 0, got {v}")
        object.__setattr__(self, "value", v)

    def epsilon(self, omega):
        return self.value


@dataclass(frozen=True)
class DrudeSkinDepth:
    """Low-frequency metal, eps = 2 i c^2 / (omega^2 delta^2).

    Only meaningful near the single frequency at which ``skin_depth`` was
    quoted.
    """

    skin_depth: float
    c: float = CODATA2018.c

    def __post_init__(self):
        if not self.skin_depth > 0:
            raise DomainError(f"skin depth must be positive, got {self.skin_depth}")

    def epsilon(self, omega):
        return 2j * self.c ** 2 / (omega ** 2 * self.skin_depth ** 2)


PermittivityModel = Union[Vacuum, ConstantPermittivity, DrudeSkinDepth]


@dataclass(frozen=True)
class Layer:
    model: PermittivityModel
    thickness: float = math.inf

    def __post_init__(self):
        if not (self.thickness > 0):
            raise DomainError(f"layer thickness must be positive, got {self.thickness}")

    @property
    def semi_infinite(self):
        return math.isinf(self.thickness)


@dataclass(frozen=True)
class LayerStack:
    """Layers below the vacuum half-space, topmost first."""

    layers: Tuple[Layer, ...]

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise DomainError("a layer stack needs at least one layer")
        if not layers[-1].semi_infinite:
            raise DomainError("the last layer must be semi-infinite")
        if any(l.semi_infinite for l in layers[:-1]):
            raise DomainError("only the last layer may be semi-infinite")
        object.__setattr__(self, "layers", layers)

    @classmethod
    def half_space(cls, model):
        return cls((Layer(model),))

    @classmethod
    def film(cls, film_model, thickness, substrate_model):
        return cls((Layer(film_model, thickness), Layer(substrate_model)))

    @property
    def thicknesses(self):
        return np.array([l.thickness for l in self.layers], dtype=float)

    def permittivities(self, omega):
        """Region permittivities, vacuum first."""
        return np.array([1.0 + 0j] + [evaluate_permittivity(l.model, omega) for l in self.layers])

    def min_skin_depth(self):
        depths = [l.model.skin_depth for l in self.layers if isinstance(l.model, DrudeSkinDepth)]
        return min(depths) if depths else None

    def is_vacuum(self):
        return all(isinstance(l.model, Vacuum) for l in self.layers)


VACUUM_STACK = LayerStack.half_space(Vacuum())


@dataclass(frozen=True)
class WaveContext:
    """Normal wavenumbers of every region for one (omega, K)."""

    omega: float
    K: float
    k_iz: np.ndarray

    @classmethod
    def build(cls, stack, omega, K, c=CODATA2018.c):
        eps = stack.permittivities(omega)
        return cls(omega, K, np.array([normal_wavenumber(omega, K, e, c) for e in eps]))


def _check_omega(omega):
    if not omega > 0:
        raise DomainError(f"angular frequency must be positive, got {omega}")


def evaluate_permittivity(model, omega):
    _check_omega(omega)
    return complex(model.epsilon(omega))


def normal_wavenumber(omega, K, epsilon, c=CODATA2018.c):
    """sqrt(omega^2 eps / c^2 - K^2) on the branch Im k_z >= 0 (Re >= 0 if real)."""
    _check_omega(omega)
    K = np.asarray(K, dtype=float)
    if np.any(K < 0):
        raise DomainError("in-plane wavenumber must be >= 0")
    kz = _kernels._kz_numpy((omega / c) ** 2 * complex(epsilon), K)
    return complex(kz) if kz.ndim == 0 else kz


def _pol_code(polarization):
    if polarization == TE:
        return 0
    if polarization == TM:
        return 2 if _flip_tm_sign else 1
    raise DomainError(f"polarization must be 'TE' or 'TM', got {polarization!r}")


def _interface(omega, K, eps1, eps2, polarization, c):
    _check_omega(omega)
    K = np.asarray(K, dtype=float)
    if np.any(K < 0):
        raise DomainError("in-plane wavenumber must be >= 0")
    k0sq = (omega / c) ** 2
    eps = np.array([complex(eps1), complex(eps2)])
    r, bad, _ = _kernels.stack_reflection(np.atleast_1d(K), k0sq, eps, np.array([math.inf]),
                                          _pol_code(polarization))
    if bad >= 0:
        Kb = float(np.atleast_1d(K)[bad])
        raise SingularityError(
            f"{polarization} Fresnel denominator vanishes at K = {Kb:.6g} 1/m "
            f"(eps1 = {complex(eps1):.6g}, eps2 = {complex(eps2):.6g}, omega = {omega:.6g})")
    return complex(r[0]) if K.ndim == 0 else r


def fresnel_te(omega, K, eps1, eps2, c=CODATA2018.c):
    """TE reflection (k1z - k2z)/(k1z + k2z) at the 1 -> 2 interface."""
    return _interface(omega, K, eps1, eps2, TE, c)


def fresnel_tm(omega, K, eps1, eps2, c=CODATA2018.c):
    """TM reflection (eps2 k1z - eps1 k2z)/(eps2 k1z + eps1 k2z)."""
    return _interface(omega, K, eps1, eps2, TM, c)


def three_layer_fresnel(r12, r21, r23, k2z, h):
    """Generalized reflection of a film of thickness ``h`` on a substrate."""
    h = np.asarray(h, dtype=float)
    if np.any(h < 0):
        raise DomainError("film thickness must be >= 0")
    k2z = np.asarray(k2z, dtype=complex)
    with np.errstate(over="ignore", invalid="ignore"):
        e = np.where(np.isinf(h), 0j, np.exp(2j * k2z * np.where(np.isinf(h), 0.0, h)))
    den = 1.0 - np.asarray(r21) * np.asarray(r23) * e
    if np.any(np.abs(den) < SINGULAR):
        raise SingularityError("three-layer denominator 1 - r21 r23 exp(2 i k2z h) vanishes")
    out = (np.asarray(r12) + np.asarray(r23) * e) / den
    return complex(out) if out.ndim == 0 else out


def stack_reflection(stack, omega, K, polarization, c=CODATA2018.c):
    """Generalized reflection coefficient of ``stack`` seen from vacuum.

    Vectorised over ``K``; the three-layer formula is folded from the
    bottom interface upwards.
    """
    _check_omega(omega)
    K_arr = np.asarray(K, dtype=float)
    if np.any(K_arr < 0):
        raise DomainError("in-plane wavenumber must be >= 0")
    eps = stack.permittivities(omega)
    r, bad, kind = _kernels.stack_reflection(np.atleast_1d(K_arr), (omega / c) ** 2, eps,
                                             stack.thicknesses, _pol_code(polarization))
    if bad >= 0:
        Kb = float(np.atleast_1d(K_arr).ravel()[bad])
        what = "interface" if kind == 1 else "multiple-reflection"
        raise SingularityError(f"{polarization} {what} denominator vanishes at K = {Kb:.6g} 1/m, "
                               f"omega = {omega:.6g} rad/s")
    return complex(r.ravel()[0]) if K_arr.ndim == 0 else r.reshape(K_arr.shape)
