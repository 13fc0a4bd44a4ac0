"""Shared numerical primitives.

Adaptive Gauss-Kronrod quadrature for smooth, exponentially damped
integrands; Bessel functions J0, J1, J2; bisection; central second
differences with Richardson extrapolation; log-log least squares.
"""
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import _kernels
from .errors import BracketError, DomainError

# 7-point Gauss / 15-point Kronrod pair (QUADPACK qk15)
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

KRONROD_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes sit at the odd Kronrod positions of the symmetric layout
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[[1, 3, 5, 7, 9, 11, 13]] = _WG[[0, 1, 2, 3, 2, 1, 0]]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Interval:
    """Integration range; ``hi`` may be ``inf`` if ``decay_rate`` is given."""

    lo: float
    hi: float
    decay_rate: Optional[float] = None

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"interval needs lo < hi, got [{self.lo}, {self.hi}]")
        if math.isinf(self.hi) and not (self.decay_rate and self.decay_rate > 0):
            raise DomainError("a semi-infinite interval needs a positive decay_rate")


@dataclass(frozen=True)
class ToleranceSpec:
    rel: float = 1e-10
    abs: float = 0.0
    max_evals: int = 500_000

    def __post_init__(self):
        if not (self.rel > 0 or self.abs > 0):
            raise DomainError("tolerance needs rel > 0 or abs > 0")
        if self.max_evals <= 0:
            raise DomainError("max_evals must be positive")


@dataclass(frozen=True)
class QuadratureReport:
    """Diagnostics of one adaptive integration."""

    rel_error: float
    evaluations: int
    subdivisions: int
    converged: bool = True
    tail_bound: float = 0.0

    def merge(self, other):
        return QuadratureReport(
            rel_error=max(self.rel_error, other.rel_error),
            evaluations=self.evaluations + other.evaluations,
            subdivisions=self.subdivisions + other.subdivisions,
            converged=self.converged and other.converged,
            tail_bound=max(self.tail_bound, other.tail_bound),
        )


def _as_real_rows(values, ncomp, is_complex):
    v = values.reshape(ncomp, -1)
    if is_complex:
        return np.concatenate([v.real, v.imag])
    return v.real if np.iscomplexobj(v) else v


def _gk_panels(f, a, b, probe_shape):
    """Apply the 15-point rule to panels [a_i, b_i]; returns (kron, err, absint)."""
    ncomp, is_complex = probe_shape
    centre = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = (centre[:, None] + half[:, None] * KRONROD_NODES[None, :]).ravel()
    fx = np.asarray(f(x))
    rows = _as_real_rows(fx, ncomp, is_complex).reshape(-1, a.size, 15)
    kron = (rows * KRONROD_WEIGHTS).sum(axis=-1) * half
    gauss = (rows * GAUSS_WEIGHTS).sum(axis=-1) * half
    absint = (np.abs(rows) * KRONROD_WEIGHTS).sum(axis=-1) * np.abs(half)
    return kron, np.abs(kron - gauss), absint


def integrate_adaptive(f: Callable, interval: Interval, tol: ToleranceSpec = ToleranceSpec(),
                       breakpoints: Optional[Sequence[float]] = None, scale: str = "value"):
    """Adaptive 7/15-point Gauss-Kronrod quadrature of a vectorised integrand.

    ``f`` maps a 1-D array of abscissae to values of shape ``(n,)`` or
    ``(m, n)``, real or complex. Real and imaginary parts are controlled
    separately, each against its own magnitude, so a small imaginary part
    riding on a large real part is still resolved to ``tol.rel``.

    ``scale="magnitude"`` measures the relative error against the integral
    of ``|f|`` instead of ``|integral f|``, which is the right yardstick for
    oscillatory integrands whose value may cancel to nearly zero.

    Returns ``(value, QuadratureReport)``. When the evaluation budget runs
    out the partial value is returned with ``report.converged = False``.
    """
    if scale not in ("value", "magnitude"):
        raise DomainError(f"unknown scale {scale!r}")
    lo, hi = float(interval.lo), float(interval.hi)
    tail = 0.0
    if math.isinf(hi):
        hi = lo + (math.log(1.0 / max(tol.rel, 1e-300)) + 40.0) / interval.decay_rate

    probe = np.asarray(f(np.array([0.5 * (lo + hi)])))
    is_complex = np.iscomplexobj(probe)
    ncomp = probe.size
    shape = (ncomp, is_complex)
    nrows = ncomp * (2 if is_complex else 1)
    groups = [slice(0, ncomp), slice(ncomp, 2 * ncomp)] if is_complex else [slice(0, ncomp)]

    pts = [lo, hi]
    if breakpoints is not None:
        pts = sorted({lo, hi, *[float(p) for p in breakpoints if lo < p < hi]})
    a = np.array(pts[:-1])
    b = np.array(pts[1:])
    kron, err, absint = _gk_panels(f, a, b, shape)
    evals = 15 * a.size + 1
    subdivisions = 0
    min_width = 1e-13 * (hi - lo)

    while True:
        total = kron.sum(axis=1)
        total_abs = absint.sum(axis=1)
        if math.isinf(interval.hi):
            fx = np.asarray(f(np.array([hi])))
            tail = 2.0 * float(np.max(np.abs(fx))) / interval.decay_rate
        targets = np.empty(nrows)
        for g in groups:
            ref = np.max(np.abs(total[g])) if scale == "value" else np.max(total_abs[g])
            floor = 50.0 * _EPS * np.max(total_abs[g])
            targets[g] = max(tol.rel * ref, tol.abs, floor)
        with np.errstate(divide="ignore", invalid="ignore"):
            norm = np.where(targets[:, None] > 0, err / targets[:, None], np.where(err > 0, np.inf, 0.0))
            total_norm = np.where(targets > 0, (err.sum(axis=1) + tail) / targets, 0.0)
        converged = bool(np.all(total_norm <= 1.0))
        if converged or evals >= tol.max_evals:
            break
        per_panel = norm.max(axis=0)
        width = b - a
        split = (per_panel > 1.0 / a.size) & (width > min_width)
        if not split.any():
            break
        mid = 0.5 * (a[split] + b[split])
        new_a = np.concatenate([a[split], mid])
        new_b = np.concatenate([mid, b[split]])
        k2, e2, s2 = _gk_panels(f, new_a, new_b, shape)
        evals += 15 * new_a.size
        subdivisions += int(split.sum())
        keep = ~split
        a = np.concatenate([a[keep], new_a])
        b = np.concatenate([b[keep], new_b])
        kron = np.concatenate([kron[:, keep], k2], axis=1)
        err = np.concatenate([err[:, keep], e2], axis=1)
        absint = np.concatenate([absint[:, keep], s2], axis=1)
        order = np.argsort(a, kind="stable")
        a, b = a[order], b[order]
        kron, err, absint = kron[:, order], err[:, order], absint[:, order]

    total = kron.sum(axis=1)
    rel = 0.0
    for g in groups:
        ref = np.max(np.abs(total[g])) if scale == "value" else np.max(total_abs[g])
        e = np.max(err[g].sum(axis=1)) + tail
        if ref > 0:
            rel = max(rel, e / ref)
        elif e > 0:
            rel = math.inf
    value = total[:ncomp] + 1j * total[ncomp:] if is_complex else total
    value = value.reshape(probe.shape[:-1]) if probe.ndim > 1 else value[0]
    report = QuadratureReport(rel_error=float(rel), evaluations=int(evals),
                              subdivisions=subdivisions, converged=converged, tail_bound=tail)
    return value, report


def bessel_j(n: int, x):
    """Bessel function of the first kind of order 0, 1 or 2 for ``x >= 0``."""
    if n not in (0, 1, 2):
        raise DomainError(f"order must be 0, 1 or 2, got {n}")
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise DomainError("bessel_j needs x >= 0")
    out = _kernels.bessel_j012(np.atleast_1d(arr))[n]
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def bisect(f: Callable[[float], float], bracket, tol: float = 1e-12, relative: bool = False,
           max_iter: int = 400) -> float:
    """Root of ``f`` inside ``bracket`` by plain bisection.

    Stops when the bracket width is below ``tol`` (or ``tol * |midpoint|``
    when ``relative`` is set).
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketError(f"no sign change on [{lo:g}, {hi:g}]: f = ({flo:g}, {fhi:g})",
                           bracket=(lo, hi), values=(flo, fhi))
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        width = hi - lo
        if width <= (tol * abs(mid) if relative else tol):
            break
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def second_derivative(f: Callable[[float], float], x: float, h: float, richardson: bool = True) -> float:
    """Central second difference, optionally with one Richardson level."""
    def central(step):
        return (f(x + step) - 2.0 * f(x) + f(x - step)) / (step * step)

    coarse = central(h)
    if not richardson:
        return coarse
    fine = central(0.5 * h)
    return (4.0 * fine - coarse) / 3.0


def loglog_slope(xs, ys):
    """Least-squares slope of log y against log x and the RMS log-residual."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.size < 2:
        raise DomainError("loglog_slope needs two equal-length arrays of at least 2 points")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise DomainError("loglog_slope needs strictly positive data")
    lx, ly = np.log(xs), np.log(ys)
    A = np.vstack([lx, np.ones_like(lx)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    return float(slope), float(np.sqrt(np.mean(resid ** 2)))
