"""Hot numerical kernels in two flavours: numba loops and numpy vectorised.

Both flavours implement the same algorithms and are cross-checked in the
test-suite. :mod:`spindec._backend` picks one at import time; the public
modules only ever call :func:`bessel_j012` and :func:`stack_reflection`.
"""
import cmath
import math

import numpy as np

from ._backend import USE_NUMBA, njit

# Bessel J0, J1, J2 ----------------------------------------------------------
#
# x < 8        power series
# 8 <= x < 25  Miller backward recurrence normalised by J0 + 2*sum J_2k = 1
# x >= 25      Hankel asymptotic expansion, terms summed below 1e-17

SERIES_MAX = 8.0
ASYMPTOTIC_MIN = 25.0
_SERIES_TERMS = 40
_MILLER_PAD = 40
_ASYM_TOL = 1e-17
_ASYM_MAX_TERMS = 60
_INV_SQRT2 = 1.0 / math.sqrt(2.0)
# cos/sin of the phase offset (2n + 1) pi / 4 for n = 0, 1, 2
_PHASE_COS = np.array([_INV_SQRT2, -_INV_SQRT2, -_INV_SQRT2])
_PHASE_SIN = np.array([_INV_SQRT2, _INV_SQRT2, -_INV_SQRT2])
_FACT = np.array([1.0, 1.0, 2.0])


@njit
def _bessel_scalar(x, out):
    if x < SERIES_MAX:
        q = 0.25 * x * x
        for n in range(3):
            term = (0.5 * x) ** n / _FACT[n]
            total = term
            for k in range(1, _SERIES_TERMS):
                term = -term * q / (k * (k + n))
                total += term
            out[n] = total
    elif x < ASYMPTOTIC_MIN:
        top = 2 * ((int(x) + _MILLER_PAD) // 2)
        b_next = 0.0
        b = 1e-30
        norm = 0.0
        j0 = j1 = j2 = 0.0
        for k in range(top, 0, -1):
            b_prev = 2.0 * k / x * b - b_next
            b_next = b
            b = b_prev
            m = k - 1
            if m == 2:
                j2 = b
            elif m == 1:
                j1 = b
            elif m == 0:
                j0 = b
            if m > 0 and m % 2 == 0:
                norm += 2.0 * b
            if abs(b) > 1e250:
                b *= 1e-250
                b_next *= 1e-250
                norm *= 1e-250
                j1 *= 1e-250
                j2 *= 1e-250
        norm += j0
        out[0] = j0 / norm
        out[1] = j1 / norm
        out[2] = j2 / norm
    else:
        amp = math.sqrt(2.0 / (math.pi * x))
        cx = math.cos(x)
        sx = math.sin(x)
        for n in range(3):
            mu = 4.0 * n * n
            p = 1.0
            qq = 0.0
            a = 1.0
            for k in range(1, _ASYM_MAX_TERMS):
                a = a * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
                sign = 1.0 if (k // 2) % 2 == 0 else -1.0
                if k % 2 == 0:
                    p += sign * a
                else:
                    qq += sign * a
                if abs(a) < _ASYM_TOL:
                    break
            cchi = cx * _PHASE_COS[n] + sx * _PHASE_SIN[n]
            schi = sx * _PHASE_COS[n] - cx * _PHASE_SIN[n]
            out[n] = amp * (p * cchi - qq * schi)


@njit
def _bessel_j012_numba(x):
    n = x.shape[0]
    out = np.empty((3, n))
    tmp = np.empty(3)
    for i in range(n):
        _bessel_scalar(x[i], tmp)
        out[0, i] = tmp[0]
        out[1, i] = tmp[1]
        out[2, i] = tmp[2]
    return out


def _bessel_j012_numpy(x):
    x = np.asarray(x, dtype=float)
    out = np.empty((3,) + x.shape)

    small = x < SERIES_MAX
    if small.any():
        xs = x[small]
        q = 0.25 * xs * xs
        for n in range(3):
            term = (0.5 * xs) ** n / _FACT[n]
            total = term.copy()
            for k in range(1, _SERIES_TERMS):
                term = -term * q / (k * (k + n))
                total += term
            out[n, small] = total

    mid = (~small) & (x < ASYMPTOTIC_MIN)
    if mid.any():
        xm = x[mid]
        top = 2 * ((xm.astype(int) + _MILLER_PAD) // 2)
        b_next = np.zeros_like(xm)
        b = np.zeros_like(xm)
        norm = np.zeros_like(xm)
        j = np.zeros((3,) + xm.shape)
        for k in range(int(top.max()), 0, -1):
            started = k <= top
            seed = k == top
            b_prev = np.where(started, 2.0 * k / xm * b - b_next, 0.0)
            b_prev = np.where(seed, 2.0 * k / xm * 1e-30, b_prev)
            b_next = np.where(seed, 1e-30, b)
            b = b_prev
            m = k - 1
            if m <= 2:
                j[m] = b
            if m > 0 and m % 2 == 0:
                norm += 2.0 * b
        norm += j[0]
        out[:, mid] = j / norm

    big = x >= ASYMPTOTIC_MIN
    if big.any():
        xb = x[big]
        amp = np.sqrt(2.0 / (np.pi * xb))
        cx = np.cos(xb)
        sx = np.sin(xb)
        for n in range(3):
            mu = 4.0 * n * n
            p = np.ones_like(xb)
            qq = np.zeros_like(xb)
            a = np.ones_like(xb)
            for k in range(1, _ASYM_MAX_TERMS):
                a = a * (mu - (2 * k - 1) ** 2) / (k * 8.0 * xb)
                sign = 1.0 if (k // 2) % 2 == 0 else -1.0
                if k % 2 == 0:
                    p += sign * a
                else:
                    qq += sign * a
                if np.all(np.abs(a) < _ASYM_TOL):
                    break
            cchi = cx * _PHASE_COS[n] + sx * _PHASE_SIN[n]
            schi = sx * _PHASE_COS[n] - cx * _PHASE_SIN[n]
            out[n, big] = amp * (p * cchi - qq * schi)
    return out


# Fresnel recursion ----------------------------------------------------------
#
# pol: 0 = TE, 1 = TM, 2 = TM with the sign of the denominator flipped
# (debug hook used by the mutation check of the verify command).

SINGULAR = 1e-14


@njit
def _kz_scalar(k0sq_eps, K):
    kz = cmath.sqrt(k0sq_eps - K * K)
    if kz.imag < 0.0 or (kz.imag == 0.0 and kz.real < 0.0):
        kz = -kz
    return kz


@njit
def _interface_scalar(K, k0sq, ea, eb, kza, kzb, pol):
    """Return (r, ok) for the interface a -> b."""
    if pol == 2:
        num = eb * kza - ea * kzb
        den = eb * kza - ea * kzb
        if abs(den) < SINGULAR * (abs(eb * kza) + abs(ea * kzb)):
            return 0j, False
        return num / den, True
    if ea == eb:
        return 0j, True
    if pol == 0:
        s = kza + kzb
        if abs(s) < SINGULAR * (abs(kza) + abs(kzb)):
            return 0j, False
        return k0sq * (ea - eb) / (s * s), True
    s = eb * kza + ea * kzb
    if abs(s) < SINGULAR * (abs(eb * kza) + abs(ea * kzb)):
        return 0j, False
    return (eb - ea) * (k0sq * ea * eb - K * K * (ea + eb)) / (s * s), True


@njit
def _stack_reflection_numba(K, k0sq, eps, thick, pol):
    n = K.shape[0]
    nreg = eps.shape[0]
    out = np.empty(n, dtype=np.complex128)
    kz = np.empty(nreg, dtype=np.complex128)
    for i in range(n):
        Ki = K[i]
        for m in range(nreg):
            kz[m] = _kz_scalar(k0sq * eps[m], Ki)
        j = nreg - 2
        r, ok = _interface_scalar(Ki, k0sq, eps[j], eps[j + 1], kz[j], kz[j + 1], pol)
        if not ok:
            return out, i, 1
        for j in range(nreg - 3, -1, -1):
            r12, ok1 = _interface_scalar(Ki, k0sq, eps[j], eps[j + 1], kz[j], kz[j + 1], pol)
            r21, ok2 = _interface_scalar(Ki, k0sq, eps[j + 1], eps[j], kz[j + 1], kz[j], pol)
            if not (ok1 and ok2):
                return out, i, 1
            h = thick[j]
            if math.isinf(h):
                e = 0j
            else:
                e = cmath.exp(2j * kz[j + 1] * h)
            den = 1.0 - r21 * r * e
            if abs(den) < SINGULAR:
                return out, i, 2
            r = (r12 + r * e) / den
        out[i] = r
    return out, -1, 0


def _kz_numpy(k0sq_eps, K):
    kz = np.sqrt(k0sq_eps - K * K + 0j)
    flip = (kz.imag < 0.0) | ((kz.imag == 0.0) & (kz.real < 0.0))
    return np.where(flip, -kz, kz)


def _interface_numpy(K, k0sq, ea, eb, kza, kzb, pol):
    """Vectorised interface coefficient; returns (r, bad_mask)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        if pol == 2:
            den = eb * kza - ea * kzb
            bad = np.abs(den) < SINGULAR * (np.abs(eb * kza) + np.abs(ea * kzb))
            return (eb * kza - ea * kzb) / np.where(bad, 1.0, den), bad
        if ea == eb:
            return np.zeros(K.shape, dtype=complex), np.zeros(K.shape, dtype=bool)
        if pol == 0:
            s = kza + kzb
            bad = np.abs(s) < SINGULAR * (np.abs(kza) + np.abs(kzb))
            s = np.where(bad, 1.0, s)
            return k0sq * (ea - eb) / (s * s), bad
        s = eb * kza + ea * kzb
        bad = np.abs(s) < SINGULAR * (np.abs(eb * kza) + np.abs(ea * kzb))
        s = np.where(bad, 1.0, s)
        return (eb - ea) * (k0sq * ea * eb - K * K * (ea + eb)) / (s * s), bad


def _stack_reflection_numpy(K, k0sq, eps, thick, pol):
    K = np.asarray(K, dtype=float)
    nreg = eps.shape[0]
    kz = [_kz_numpy(k0sq * eps[m], K) for m in range(nreg)]
    j = nreg - 2
    r, bad = _interface_numpy(K, k0sq, eps[j], eps[j + 1], kz[j], kz[j + 1], pol)
    if bad.any():
        return r, int(np.argmax(bad)), 1
    for j in range(nreg - 3, -1, -1):
        r12, bad1 = _interface_numpy(K, k0sq, eps[j], eps[j + 1], kz[j], kz[j + 1], pol)
        r21, bad2 = _interface_numpy(K, k0sq, eps[j + 1], eps[j], kz[j + 1], kz[j], pol)
        bad = bad1 | bad2
        if bad.any():
            return r, int(np.argmax(bad)), 1
        h = thick[j]
        e = np.zeros(K.shape, dtype=complex) if np.isinf(h) else np.exp(2j * kz[j + 1] * h)
        den = 1.0 - r21 * r * e
        bad = np.abs(den) < SINGULAR
        if bad.any():
            return r, int(np.argmax(bad)), 2
        r = (r12 + r * e) / den
    return r, -1, 0


# dispatch -------------------------------------------------------------------

def bessel_j012(x, use_numba=None):
    """J0, J1, J2 at ``x >= 0``; returns an array of shape ``(3,) + x.shape``."""
    x = np.asarray(x, dtype=float)
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba:
        flat = np.ascontiguousarray(x.ravel())
        return _bessel_j012_numba(flat).reshape((3,) + x.shape)
    return _bessel_j012_numpy(x)


def stack_reflection(K, k0sq, eps, thick, pol, use_numba=None):
    """Fold the interface recursion from the bottom layer up.

    Returns ``(r, bad_index, bad_kind)``; ``bad_index`` is -1 on success,
    ``bad_kind`` is 1 for a vanishing interface denominator and 2 for a
    vanishing multiple-reflection denominator.
    """
    K = np.asarray(K, dtype=float)
    eps = np.ascontiguousarray(eps, dtype=np.complex128)
    thick = np.ascontiguousarray(thick, dtype=float)
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba:
        flat = np.ascontiguousarray(K.ravel())
        r, bad, kind = _stack_reflection_numba(flat, float(k0sq), eps, thick, int(pol))
        return r.reshape(K.shape), int(bad), int(kind)
    r, bad, kind = _stack_reflection_numpy(K.ravel(), float(k0sq), eps, thick, int(pol))
    return r.reshape(K.shape), bad, kind
