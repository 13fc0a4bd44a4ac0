"""Reflected dyadic Green tensor above a planar stack and its magnetic kernel.

Conventions: the field point sits at r = (x, y, z), the source at r' with
z, z' > 0 in vacuum. A plane-wave component of the reflected tensor carries
exp(i k∥·(ρ - ρ') + i k_1z (z + z')), so the curl at the field point acts as
i q× with q = (k∥, k_1z) and at the source as i q'× with q' = (-k∥, k_1z).
The magnetic kernel is

    H_qk = eps_qab eps_kcd ∂_a ∂'_c G_bd,

the tensor whose imaginary part is the magnetic-field noise correlator.
Only the reflected part of G enters; the free-space part is dropped.
"""
import functools
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import _kernels
from .atomics import CODATA2018
from .errors import DomainError, QuadratureError
from .layered_media import TE, TM, stack_reflection
from .numerics import Interval, QuadratureReport, ToleranceSpec, integrate_adaptive

C_LIGHT = CODATA2018.c
ALL_POLARIZATIONS = (TE, TM)


@dataclass(frozen=True)
class MagneticKernel:
    """H_qk between field point (l e_sep, d) and source point (0, d), in 1/m^3."""

    tensor: np.ndarray
    l: float
    d: float
    omega: float
    axis: str = "x"
    quasi_static: bool = True
    tm_fraction: float = 0.0

    def contract(self, elements, part="imag"):
        """Sum_qk conj(a_q) part(H_qk) a_k for spin elements a = ⟨i|S|f⟩."""
        a = np.asarray(elements, dtype=complex)
        M = self.tensor.imag if part == "imag" else self.tensor.real
        return complex(np.conj(a) @ M @ a)


@dataclass(frozen=True)
class BruteForceGrid:
    """Tensor-product Gauss-Legendre grid for the (k_x, k_y) plane.

    Each half axis [0, k_max] is cut into uniform panels of width
    ``panel_width``; the first panel is further graded geometrically toward
    the origin over ``levels`` halvings. ``None`` picks a default from d and l.
    """

    order: int = 8
    levels: int = 30
    k_max: Optional[float] = None
    panel_width: Optional[float] = None
    chunk: int = 400_000


def _check_inputs(omega, d):
    if not omega > 0:
        raise DomainError(f"angular frequency must be positive, got {omega}")
    if not d > 0:
        raise DomainError(f"height must be positive, got {d}")


def _polarization_mask(polarizations):
    pols = tuple(polarizations)
    for p in pols:
        if p not in ALL_POLARIZATIONS:
            raise DomainError(f"unknown polarization {p!r}")
    return TE in pols, TM in pols


def _reflections(stack, omega, K, polarizations):
    use_te, use_tm = _polarization_mask(polarizations)
    K = np.asarray(K, dtype=float)
    r_te = stack_reflection(stack, omega, K, TE) if use_te else np.zeros(K.shape, complex)
    r_tm = stack_reflection(stack, omega, K, TM) if use_tm else np.zeros(K.shape, complex)
    return np.asarray(r_te), np.asarray(r_tm)


def _plane_wave_vectors(K, phi, kz):
    """Unit vectors of one plane-wave component.

    s is the TE polarization direction, a = q × s and b = q' × s.
    """
    cx, cy = np.cos(phi), np.sin(phi)
    zero = np.zeros(np.broadcast(K, phi, kz).shape)
    s = np.stack([cy + zero, -cx + zero, zero], axis=-1).astype(complex)
    a = np.stack([kz * cx, kz * cy, -K + zero], axis=-1)
    b = np.stack([kz * cx, kz * cy, K + zero], axis=-1)
    return s, a, b


def _outer(u, v):
    return u[..., :, None] * v[..., None, :]


def reflection_components(K, phi, omega, z, zp, stack, polarizations=ALL_POLARIZATIONS):
    """Plane-wave component R(K, phi; z, z') of the reflected Green tensor.

    R = i/(2 k_1z) exp(i k_1z (z + z')) [r_TE s s^T - r_TM a b^T / k_1^2]
    with s = (sin phi, -cos phi, 0), a = (k_1z k̂, -K), b = (k_1z k̂, K).
    The tensor is transverse on both sides: q·R = 0 and R·q' = 0.
    Vectorised over K and phi; returns shape (..., 3, 3) in 1/m.
    """
    _check_inputs(omega, 1.0)
    if not (z > 0 and zp > 0):
        raise DomainError(f"both points must lie above the surface, got z = {z}, z' = {zp}")
    K = np.asarray(K, dtype=float)
    phi = np.asarray(phi, dtype=float)
    k0sq = (omega / C_LIGHT) ** 2
    kz = _kernels._kz_numpy(k0sq, K)
    r_te, r_tm = _reflections(stack, omega, K, polarizations)
    s, a, b = _plane_wave_vectors(K, phi, kz)
    pref = 0.5j / kz * np.exp(1j * kz * (z + zp))
    body = r_te[..., None, None] * _outer(s, s) - (r_tm / k0sq)[..., None, None] * _outer(a, b)
    return pref[..., None, None] * body


def electric_plane_wave(K, phi, omega, r, rp, stack, polarizations=ALL_POLARIZATIONS):
    """R(K, phi; z, z') times the lateral phase exp(i k∥·(ρ - ρ'))."""
    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    R = reflection_components(K, phi, omega, r[2], rp[2], stack, polarizations)
    phase = np.exp(1j * K * (np.cos(phi) * (r[0] - rp[0]) + np.sin(phi) * (r[1] - rp[1])))
    return R * np.asarray(phase)[..., None, None]


def magnetic_weyl_integrand(K, phi, omega, d, stack, quasi_static=True,
                            polarizations=ALL_POLARIZATIONS):
    """Plane-wave component of the magnetic kernel at coincident lateral points.

    Exact form: i/(2 k_1z) e^{2 i k_1z d} [-r_TE a b^T + r_TM k_1^2 s s^T].
    Quasi-static form (k_1z -> iK, k_1^2 -> 0): r_TE e^{-2Kd} (K/2) N with
    N = v v^† and v = (cos phi, sin phi, i). Returns shape (..., 3, 3).
    """
    _check_inputs(omega, d)
    K = np.asarray(K, dtype=float)
    phi = np.asarray(phi, dtype=float)
    r_te, r_tm = _reflections(stack, omega, K, polarizations)
    if quasi_static:
        cx, cy = np.cos(phi), np.sin(phi)
        one = np.ones(np.broadcast(K, phi).shape)
        v = np.stack([cx * one, cy * one, 1j * one], axis=-1)
        N = _outer(v, np.conj(v))
        w = r_te * np.exp(-2.0 * K * d) * 0.5 * K
        return w[..., None, None] * N
    k0sq = (omega / C_LIGHT) ** 2
    kz = _kernels._kz_numpy(k0sq, K)
    s, a, b = _plane_wave_vectors(K, phi, kz)
    pref = 0.5j / kz * np.exp(2j * kz * d)
    body = -r_te[..., None, None] * _outer(a, b) + (r_tm * k0sq)[..., None, None] * _outer(s, s)
    return pref[..., None, None] * body


def fd_curl_curl(K, phi, omega, d, stack, step=None, polarizations=ALL_POLARIZATIONS,
                 richardson=True):
    """Finite-difference oracle for :func:`magnetic_weyl_integrand` (exact form).

    Applies eps_qab eps_kcd ∂_a ∂'_c to the electric plane-wave tensor with
    second-order central differences in all six coordinates, both points at
    height d above the same lateral position. ``step`` defaults to 1e-3 d;
    with ``richardson`` one extrapolation level at step/2 is added.
    """
    _check_inputs(omega, d)
    h = 1e-3 * d if step is None else float(step)
    base = np.array([0.0, 0.0, d])

    def G(r, rp):
        return electric_plane_wave(K, phi, omega, r, rp, stack, polarizations)

    def grad_grad(hh):
        # D[a][c] = ∂_a ∂'_c G, each a (3, 3) tensor
        D = [[None] * 3 for _ in range(3)]
        for ia in range(3):
            ea = np.eye(3)[ia] * hh
            for ic in range(3):
                ec = np.eye(3)[ic] * hh
                D[ia][ic] = (G(base + ea, base + ec) - G(base + ea, base - ec)
                             - G(base - ea, base + ec) + G(base - ea, base - ec)) / (4 * hh * hh)
        return D

    def assemble(D):
        eps = np.zeros((3, 3, 3))
        eps[0, 1, 2] = eps[1, 2, 0] = eps[2, 0, 1] = 1.0
        eps[0, 2, 1] = eps[2, 1, 0] = eps[1, 0, 2] = -1.0
        out = np.zeros(D[0][0].shape, dtype=complex)
        for q in range(3):
            for k in range(3):
                acc = 0j
                for ia in range(3):
                    for ib in range(3):
                        if eps[q, ia, ib] == 0:
                            continue
                        for ic in range(3):
                            for idd in range(3):
                                if eps[k, ic, idd] == 0:
                                    continue
                                acc = acc + eps[q, ia, ib] * eps[k, ic, idd] * D[ia][ic][..., ib, idd]
                out[..., q, k] = acc
        return out

    coarse = assemble(grad_grad(h))
    if not richardson:
        return coarse
    fine = assemble(grad_grad(0.5 * h))
    return (4.0 * fine - coarse) / 3.0


# radial quadrature ----------------------------------------------------------

def k_max_for(d, stack):
    """Upper quadrature cutoff max(60/(2d), 20/delta_min)."""
    kmax = 60.0 / (2.0 * d)
    delta = stack.min_skin_depth()
    if delta is not None:
        kmax = max(kmax, 20.0 / delta)
    return kmax


def _signed_bessel(K, l):
    J = _kernels.bessel_j012(np.abs(l) * K)
    if l < 0:
        J = J.copy()
        J[1] = -J[1]
    return J


def _assemble_x(I):
    """Tensor from radial integrals keyed by name (separation along x)."""
    H = np.zeros((3, 3), dtype=complex)
    H[0, 0] = I["xx"]
    H[1, 1] = I["yy"]
    H[2, 2] = I["zz"]
    H[0, 2] = I["xz"]
    H[2, 0] = -I["xz"]
    return H


_ROT_Z = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])


def _rotate_to_axis(H, axis):
    if axis == "x":
        return H
    if axis == "y":
        return _ROT_Z @ H @ _ROT_Z.T
    raise DomainError(f"separation axis must be 'x' or 'y', got {axis!r}")


def _qs_radial(l, d, omega, stack, tol):
    """Quasi-static radial integrals: K^2 r_TE e^{-2Kd}/(4 pi) × J_n(Kl)."""
    kmax = k_max_for(d, stack)

    def f(K):
        r = stack_reflection(stack, omega, K, TE)
        w = K * K * r * np.exp(-2.0 * K * d) / (4.0 * math.pi)
        J = _signed_bessel(K, l)
        return np.stack([w * J[0], w * J[1], w * J[2]])

    bps = kmax * 2.0 ** -np.arange(1, 28)
    vals, rep = integrate_adaptive(f, Interval(0.0, kmax), ToleranceSpec(rel=tol),
                                   breakpoints=bps)
    I0, I1, I2 = vals
    # analytic tail: |r| <= rmax, |J| <= 1, ∫_kmax^∞ K^2 e^{-2Kd} dK
    rmax = max(1.0, float(np.abs(stack_reflection(stack, omega, kmax, TE))))
    tail = rmax * math.exp(-2 * kmax * d) * (kmax ** 2 / (2 * d) + kmax / (2 * d ** 2)
                                              + 1 / (4 * d ** 3)) / (4 * math.pi)
    I = {"xx": 0.5 * (I0 - I2), "yy": 0.5 * (I0 + I2), "zz": I0, "xz": I1}
    ref = max(abs(I0), abs(I2), 1e-300)
    rep = QuadratureReport(rel_error=rep.rel_error + tail / ref, evaluations=rep.evaluations,
                           subdivisions=rep.subdivisions, converged=rep.converged,
                           tail_bound=tail)
    return _assemble_x(I), np.zeros((3, 3), dtype=complex), rep


def _exact_terms(K, kz, dk_over_kz, l, d, omega, stack, polarizations):
    """Exact-mode radial integrand rows (TE xx, yy, zz, xz; TM xx, yy)."""
    k0sq = (omega / C_LIGHT) ** 2
    r_te, r_tm = _reflections(stack, omega, K, polarizations)
    J = _signed_bessel(K, l)
    P = K / (2 * math.pi) * 0.5j * dk_over_kz * np.exp(2j * kz * d)
    te_xx = P * (-r_te * kz * kz * 0.5 * (J[0] - J[2]))
    te_yy = P * (-r_te * kz * kz * 0.5 * (J[0] + J[2]))
    te_zz = P * (r_te * K * K * J[0])
    te_xz = P * (-r_te * kz * K * 1j * J[1])
    tm_xx = P * (r_tm * k0sq * 0.5 * (J[0] + J[2]))
    tm_yy = P * (r_tm * k0sq * 0.5 * (J[0] - J[2]))
    return np.stack([te_xx, te_yy, te_zz, te_xz, tm_xx, tm_yy])


def _exact_radial(l, d, omega, stack, tol, polarizations):
    """Exact radial integrals with the 1/k_z branch point at K = k_0 removed.

    K = k0 sin(t) on [0, k0] and K = k0 cosh(u) on [k0, 2 k0] make dK/k_z
    regular; above 2 k0 the integrand is smooth and exponentially damped.
    """
    k0 = omega / C_LIGHT
    kmax = max(k_max_for(d, stack), 4.0 * k0)
    spec = ToleranceSpec(rel=tol)

    def f_prop(t):
        K = k0 * np.sin(t)
        return _exact_terms(K, k0 * np.cos(t) + 0j, np.ones_like(t) + 0j, l, d, omega, stack,
                            polarizations)

    def f_near(u):
        K = k0 * np.cosh(u)
        return _exact_terms(K, 1j * k0 * np.sinh(u), -1j * np.ones_like(u), l, d, omega, stack,
                            polarizations)

    def f_far(K):
        kz = _kernels._kz_numpy(k0 * k0, K)
        return _exact_terms(K, kz, 1.0 / kz, l, d, omega, stack, polarizations)

    bps = [b for b in kmax * 2.0 ** -np.arange(1, 28) if b > 2 * k0]
    v3, r3 = integrate_adaptive(f_far, Interval(2 * k0, kmax), spec, breakpoints=bps)
    # the pieces differ by many orders of magnitude when k0 d << 1, so the
    # small ones only need absolute accuracy against the evanescent part
    spec = ToleranceSpec(rel=tol, abs=tol * float(np.max(np.abs(v3))))
    v1, r1 = integrate_adaptive(f_prop, Interval(0.0, 0.5 * math.pi), spec)
    v2, r2 = integrate_adaptive(f_near, Interval(0.0, math.acosh(2.0)), spec)
    vals = v1 + v2 + v3
    abs_err = sum(rep.rel_error * np.max(np.abs(v)) for rep, v in ((r1, v1), (r2, v2), (r3, v3)))
    rmax = max(1.0, float(np.abs(stack_reflection(stack, omega, kmax, TE))))
    tail = rmax * math.exp(-2 * math.sqrt(kmax ** 2 - k0 ** 2) * d) * (
        kmax ** 2 / (2 * d) + kmax / (2 * d ** 2) + 1 / (4 * d ** 3)) / (4 * math.pi)
    ref = max(float(np.max(np.abs(vals))), 1e-300)
    rep = r1.merge(r2).merge(r3)
    rep = QuadratureReport(rel_error=(abs_err + tail) / ref, evaluations=rep.evaluations,
                           subdivisions=rep.subdivisions, converged=rep.converged,
                           tail_bound=tail)
    te = _assemble_x({"xx": vals[0], "yy": vals[1], "zz": vals[2], "xz": vals[3]})
    tm = np.zeros((3, 3), dtype=complex)
    tm[0, 0], tm[1, 1] = vals[4], vals[5]
    return te + tm, tm, rep


@functools.lru_cache(maxsize=4096)
def _kernel_cached(l, d, omega, stack, tol, quasi_static, axis, polarizations):
    if quasi_static:
        H, tm, rep = _qs_radial(l, d, omega, stack, tol)
    else:
        H, tm, rep = _exact_radial(l, d, omega, stack, tol, polarizations)
    if not rep.converged:
        raise QuadratureError(
            f"magnetic kernel did not converge (l = {l:.6g} m, d = {d:.6g} m, "
            f"omega = {omega:.6g} rad/s, estimated rel. error {rep.rel_error:.3g})",
            partial=H, report=rep)
    scale = float(np.max(np.abs(H.imag)))
    tm_fraction = float(np.max(np.abs(tm.imag))) / scale if scale > 0 else 0.0
    H = _rotate_to_axis(H, axis)
    H.setflags(write=False)
    return MagneticKernel(H, l, d, omega, axis, quasi_static, tm_fraction), rep


def magnetic_kernel(l, d, omega, stack, tol=1e-8, quasi_static=True, axis="x",
                    polarizations=ALL_POLARIZATIONS):
    """Magnetic kernel H(l, d, omega) by adaptive radial quadrature.

    The angular integral is done in closed form, leaving Bessel kernels
    J_n(K l). A negative ``l`` places the field point on the negative
    ``axis``. Quasi-static mode keeps only the TE reflection; the exact mode
    adds TM and reports its share in ``tm_fraction``.

    Returns ``(MagneticKernel, QuadratureReport)``; raises
    :class:`QuadratureError` if the evaluation budget runs out.
    """
    _check_inputs(omega, d)
    if not tol > 0:
        raise DomainError("tol must be positive")
    _polarization_mask(polarizations)
    return _kernel_cached(float(l), float(d), float(omega), stack, float(tol),
                          bool(quasi_static), axis, tuple(polarizations))


def radial_moment(d, omega, stack, power=2, part="imag", tol=1e-10):
    """∫_0^∞ K^power e^{-2Kd} part(r_TE(K)) dK with the same cutoff as the kernel.

    Returns ``(value, QuadratureReport)``. Extra powers of K correspond to
    derivatives in d: power + 2 gives 1/4 of the second d-derivative.
    """
    _check_inputs(omega, d)
    if part not in ("imag", "real"):
        raise DomainError(f"part must be 'imag' or 'real', got {part!r}")
    take = np.imag if part == "imag" else np.real
    kmax = k_max_for(d, stack)

    def f(K):
        return K ** power * np.exp(-2.0 * K * d) * take(stack_reflection(stack, omega, K, TE))

    val, rep = integrate_adaptive(f, Interval(0.0, kmax), ToleranceSpec(rel=tol),
                                  breakpoints=kmax * 2.0 ** -np.arange(1, 28))
    if not rep.converged:
        raise QuadratureError(f"radial moment did not converge at d = {d:.6g} m",
                              partial=val, report=rep)
    return float(val), rep


# brute-force 2-D oracle -----------------------------------------------------

def _half_axis_nodes(k_max, width, levels, order):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = list(np.arange(0.0, k_max, width)) + [k_max]
    first = edges[1]
    graded = [first * 0.5 ** j for j in range(levels, 0, -1)]
    edges = [0.0] + graded + edges[1:]
    a = np.array(edges[:-1])
    b = np.array(edges[1:])
    nodes = (0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * x).ravel()
    weights = (0.5 * (b - a)[:, None] * w).ravel()
    return nodes, weights


def brute_force_kernel(l, d, omega, stack, grid=BruteForceGrid(), axis="x"):
    """Quasi-static H(l) by direct 2-D quadrature over (k_x, k_y).

    No angular integration is done analytically, which makes this an
    independent check of :func:`magnetic_kernel`. Intended for tests and the
    verify command only.
    """
    _check_inputs(omega, d)
    kmax = grid.k_max if grid.k_max is not None else 40.0 / (2.0 * d)
    width = grid.panel_width
    if width is None:
        width = 0.5 / max(abs(l), d)
    n, w = _half_axis_nodes(kmax, width, grid.levels, grid.order)
    nodes = np.concatenate([-n[::-1], n])
    weights = np.concatenate([w[::-1], w])
    lx, ly = (l, 0.0) if axis == "x" else (0.0, l)
    if axis not in ("x", "y"):
        raise DomainError(f"separation axis must be 'x' or 'y', got {axis!r}")

    KX, KY = np.meshgrid(nodes, nodes, indexing="ij")
    WW = np.outer(weights, weights).ravel()
    KX, KY = KX.ravel(), KY.ravel()
    total = np.zeros((3, 3), dtype=complex)
    for start in range(0, KX.size, grid.chunk):
        sl = slice(start, start + grid.chunk)
        kx, ky = KX[sl], KY[sl]
        K = np.hypot(kx, ky)
        phi = np.arctan2(ky, kx)
        h = magnetic_weyl_integrand(K, phi, omega, d, stack, quasi_static=True)
        phase = np.exp(1j * (kx * lx + ky * ly)) * WW[sl]
        total += np.einsum("n,nij->ij", phase, h)
    return total / (4.0 * math.pi ** 2)
