"""Gaussian moments of ``(f_n(t), f_n'(t))`` and the Kac-Rice zero count.

The coefficient sequences are stationary with correlation ``rho``, so

* ``E[f^2]   = sum_{|m|<n} (1 - |m|/n) rho(|m|) cos(mt)``
* ``E[f f']  = (1/n) sum_{k,l} l rho(k-l) sin((k-l)t)``
* ``E[f'^2]  = (1/n) sum_{k,l} k l rho(k-l) cos((k-l)t)``

For an atom pair these collapse onto the kernels of :mod:`trigzero.kernels`.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .angles import distance_to_pi_z
from .errors import Degenerate, ValidationError
from .kernels import alpha_norm, energy_kernel, fejer, fejer_deriv
from .quadrature import adaptive_gauss
from .spectral import TWO_PI, correlation_sequence

DEGENERACY_FLOOR = 1e-13
NEGATIVE_CLAMP = -1e-9
PI_Z_TOL = 1e-9
CHECK_MARGIN = 1e-3


@dataclass
class MomentTriple:
    """``(E[f^2], E[f f'], E[f'^2])`` at one point (or arrays of points)."""

    var_f: object
    cov: object
    var_fprime: object

    def __post_init__(self):
        vf, c, vp = (np.asarray(v, dtype=float) for v in (self.var_f, self.cov, self.var_fprime))
        scale = np.maximum(np.abs(vf) * np.abs(vp), 1.0)
        if np.any(vf < -1e-12 * scale) or np.any(vp < -1e-12 * scale):
            raise ValidationError("variances must be nonnegative")
        if np.any(c * c > vf * vp + 1e-12 * scale):
            raise ValidationError("covariance violates Cauchy-Schwarz")


@dataclass(frozen=True)
class QuadratureSpec:
    """Controls for the Kac-Rice integral.

    ``panels_per_period * n`` base panels of ``gauss_order`` points cover
    ``[0, 2pi]``; windows of radius ``n ** -atom_window_beta`` around the atoms
    are split once more before adaptive refinement to ``refine_tol``.
    """

    panels_per_period: int = 8
    gauss_order: int = 10
    atom_window_beta: float = 1.0 / 6.0
    refine_tol: float = 1e-8
    min_width: float = TWO_PI * 1e-7
    max_evals: int = 50_000_000

    def __post_init__(self):
        if self.panels_per_period < 4:
            raise ValidationError("panels_per_period must be >= 4")
        if self.gauss_order < 4:
            raise ValidationError("gauss_order must be >= 4")
        if not 0.0 < self.atom_window_beta < 0.5:
            raise ValidationError("atom_window_beta must lie in (0, 1/2)")
        if not self.refine_tol > 0:
            raise ValidationError("refine_tol must be positive")


class KacRiceResult(NamedTuple):
    value: float
    diagnostics: dict


class QnForms(NamedTuple):
    ratio: float
    reduced: float

    @property
    def rel_gap(self):
        return abs(self.ratio - self.reduced) / abs(self.reduced)


# moments --------------------------------------------------------------------

def moments_atomic(n, alpha, t):
    """Moments for ``mu = (delta_alpha + delta_-alpha) / 2`` via the kernels."""
    vf, c, vp = _atomic_arrays(n, alpha, t)
    return MomentTriple(_scalar(t, vf), _scalar(t, c), _scalar(t, vp))


def _scalar(t, v):
    return float(v) if np.ndim(t) == 0 else v


def _atomic_arrays(n, alpha, t):
    t = np.asarray(t, dtype=float)
    tm, tp = t - alpha, t + alpha
    vf = 0.5 * (fejer(n, tm) + fejer(n, tp))
    cov = 0.25 * (fejer_deriv(n, tm) + fejer_deriv(n, tp))
    vfp = 0.5 * (energy_kernel(n, tm) + energy_kernel(n, tp)) / alpha_norm(n)
    return vf, cov, vfp


def _toeplitz_arrays(rho, n, t, chunk=2048):
    # grouped O(n) sums over lag p = k - l >= 1
    t = np.atleast_1d(np.asarray(t, dtype=float))
    p = np.arange(1, n, dtype=float)
    rho_p = np.asarray(rho[1:n], dtype=float)
    nn = float(n)
    w_var = 2.0 * (1.0 - p / nn) * rho_p
    w_cov = -p * (nn - p) * rho_p / nn
    m = nn - p
    sq = lambda N: N * (N + 1.0) * (2.0 * N + 1.0) / 6.0
    w_der = 2.0 * rho_p * (sq(m) + p * m * (m + 1.0) / 2.0) / nn
    vf = np.empty_like(t)
    cov = np.empty_like(t)
    vfp = np.empty_like(t)
    step = max(1, chunk * 256 // max(n, 1))
    for lo in range(0, t.size, step):
        arg = np.multiply.outer(t[lo:lo + step], p)
        cs, sn = np.cos(arg), np.sin(arg)
        vf[lo:lo + step] = rho[0] + cs @ w_var
        cov[lo:lo + step] = sn @ w_cov
        vfp[lo:lo + step] = rho[0] * sq(nn) / nn + cs @ w_der
    return vf, cov, vfp


def moments_general(measure, n, t):
    """Moments for any valid measure from the correlation sequence directly.

    Independent of the kernel closed forms; costs O(n) per point.
    """
    n = int(n)
    if n < 1:
        raise ValidationError("degree must be >= 1")
    rho = correlation_sequence(measure, n)
    vf, c, vp = _toeplitz_arrays(rho, n, t)
    if np.ndim(t) == 0:
        return MomentTriple(float(vf[0]), float(c[0]), float(vp[0]))
    return MomentTriple(vf.reshape(np.shape(t)), c.reshape(np.shape(t)), vp.reshape(np.shape(t)))


def _density_rho(measure, n):
    rho = np.zeros(n)
    rho[0] = 1.0
    if n > 1:
        full = correlation_sequence(measure, n)
        atomic = np.zeros(n)
        k = np.arange(n, dtype=float)
        for a, w in measure.atoms:
            atomic += measure.eta * w * np.cos(k * a)
        rho[1:] = (full[1:] - atomic[1:]) / (1.0 - measure.eta)
    return rho


def moment_arrays(measure, n, t):
    """Fast moments for the quadrature: kernels for atoms, sums for densities."""
    t = np.asarray(t, dtype=float)
    vf = np.zeros_like(t)
    cov = np.zeros_like(t)
    vfp = np.zeros_like(t)
    if measure.eta > 0.0:
        for a, w in measure.atoms:
            f0, f1, f2 = _atomic_arrays(n, a, t)
            vf += measure.eta * w * f0
            cov += measure.eta * w * f1
            vfp += measure.eta * w * f2
    if measure.eta < 1.0:
        d = 1.0 - measure.eta
        if measure.density == "uniform":
            vf += d
            vfp += d / alpha_norm(n)
        else:
            f0, f1, f2 = _toeplitz_arrays(_density_rho(measure, n), n, t.ravel())
            vf += d * f0.reshape(t.shape)
            cov += d * f1.reshape(t.shape)
            vfp += d * f2.reshape(t.shape)
    return vf, cov, vfp


def kacrice_integrand(m, floor=DEGENERACY_FLOOR):
    """``I = E[f'^2]/E[f^2] - (E[f f']/E[f^2])^2``, clamped at 0 against roundoff.

    Raises :class:`Degenerate` when ``E[f^2] <= floor`` anywhere.
    """
    vf = np.asarray(m.var_f, dtype=float)
    if np.any(vf <= floor):
        raise Degenerate(f"variance {np.min(vf):.3g} at or below floor {floor:g}")
    ratio = np.asarray(m.var_fprime, dtype=float) / vf
    val = ratio - (np.asarray(m.cov, dtype=float) / vf) ** 2
    # roundoff threshold scales with the size of the cancelling terms
    if np.any(val < NEGATIVE_CLAMP * np.maximum(1.0, ratio)):
        raise ArithmeticError(f"Kac-Rice integrand is negative ({np.min(val):.3g})")
    val = np.maximum(val, 0.0)
    return float(val) if val.ndim == 0 else val


# expected number of zeros ---------------------------------------------------

def _atom_windows(measure, eps):
    """Merged intervals of radius ``eps`` around every atom and its mirror."""
    if measure.eta == 0.0:
        return []
    raw = []
    for a, _ in measure.atoms:
        for c in (a, TWO_PI - a):
            lo, hi = c - eps, c + eps
            if lo < 0.0:
                raw += [(0.0, hi), (lo + TWO_PI, TWO_PI)]
            elif hi > TWO_PI:
                raw += [(lo, TWO_PI), (0.0, hi - TWO_PI)]
            else:
                raw.append((lo, hi))
    raw.sort()
    merged = []
    for lo, hi in raw:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def is_degenerate(measure, n, tol=PI_Z_TOL):
    """Whether ``E[f_n(t)^2]`` vanishes somewhere on ``[0, 2pi]``.

    Only purely atomic measures can degenerate: every atom needs
    ``n alpha_i`` in pi*Z, with multiples of a common parity so that the
    kernel zero sets intersect.
    """
    if not measure.is_atomic:
        return False
    parities = set()
    for a, _ in measure.atoms:
        na = n * a
        if distance_to_pi_z(na) > tol:
            return False
        parities.add(int(round(na / math.pi)) % 2)
    return len(parities) == 1


def expected_zeros(measure, n, quad=None):
    """Expected number of real zeros of ``f_n`` on ``[0, 2pi]`` by Kac-Rice.

    Returns ``(value, diagnostics)``. Diagnostics carry the near-atom window
    radius and the part of the count falling inside those windows.
    """
    quad = quad or QuadratureSpec()
    n = int(n)
    if n < 1:
        raise ValidationError("degree must be >= 1")
    if is_degenerate(measure, n):
        raise Degenerate(
            f"n * alpha lies in pi*Z for n={n}; the variance vanishes and the count "
            "follows from the structural factorization instead")

    eps = float(n) ** (-quad.atom_window_beta)
    windows = _atom_windows(measure, eps)
    base = np.linspace(0.0, TWO_PI, quad.panels_per_period * n + 1)
    win_edges = [e for w in windows for e in w]
    edges = np.union1d(base, win_edges)
    if windows:
        mids = 0.5 * (edges[:-1] + edges[1:])
        inside = np.zeros(mids.size, dtype=bool)
        for lo, hi in windows:
            inside |= (mids > lo) & (mids < hi)
        edges = np.union1d(edges, mids[inside])

    def integrand(t):
        return np.sqrt(kacrice_integrand(_Moments(*moment_arrays(measure, n, t)))) / math.pi

    res = adaptive_gauss(integrand, edges, order=quad.gauss_order, rtol=quad.refine_tol,
                         min_width=quad.min_width, max_evals=quad.max_evals,
                         keep_panels=True)
    mid = 0.5 * (res.left + res.right)
    in_win = np.zeros(mid.size, dtype=bool)
    for lo, hi in windows:
        in_win |= (mid > lo) & (mid < hi)
    win_count = float(np.sum(res.contributions[in_win]))
    diagnostics = {
        "epsilon_n": eps,
        "window_count": win_count,
        "window_share": win_count / res.value if res.value else 0.0,
        "window_width": float(sum(hi - lo for lo, hi in windows)),
        "panels": res.panels,
        "evaluations": res.evaluations,
        "error_estimate": res.error,
        "unresolved_panels": res.unresolved,
    }
    return KacRiceResult(res.value, diagnostics)


class _Moments(NamedTuple):
    # unchecked carrier for the quadrature hot loop
    var_f: np.ndarray
    cov: np.ndarray
    var_fprime: np.ndarray


# reduced forms --------------------------------------------------------------

def g_function(x, alpha, s, u):
    """``sin(x) sin((s-a)/2) sin((s+a)/2) / (sin^2((u-x)/2) sin^2((s+a)/2)
    + sin^2((u+x)/2) sin^2((s-a)/2))``, unguarded."""
    sm = np.sin(0.5 * (s - alpha))
    sp = np.sin(0.5 * (s + alpha))
    den = np.sin(0.5 * (u - x)) ** 2 * sp ** 2 + np.sin(0.5 * (u + x)) ** 2 * sm ** 2
    return np.sin(x) * sm * sp / den


def q_n(n, alpha, t, check=True, rtol=1e-9):
    """``Q_n(t)`` in its ratio form and as ``1 + g_{n alpha}(t, nt)^2``.

    With ``check`` the forms must agree within ``rtol`` wherever
    ``|sin((t +- alpha)/2)| >= CHECK_MARGIN``. Closer to the atoms ``Q_n``
    grows like ``(t -+ alpha)^-2`` and both forms inherit the rounding error
    of ``t -+ alpha``, so no check is made there.
    """
    n = int(n)
    if distance_to_pi_z(n * alpha) <= PI_Z_TOL:
        raise Degenerate("n * alpha lies in pi*Z")
    sm = np.sin(0.5 * (t - alpha))
    sp = np.sin(0.5 * (t + alpha))
    if min(abs(sm), abs(sp)) <= 1e-12:
        raise Degenerate("t coincides with an atom")
    Sm, Sp = sm * sm, sp * sp
    Nm, Np = math.sin(0.5 * n * (t - alpha)), math.sin(0.5 * n * (t + alpha))
    Cm, Cp = math.cos(0.5 * n * (t - alpha)), math.cos(0.5 * n * (t + alpha))
    den = Nm * Nm / Sm + Np * Np / Sp
    first = (1.0 / Sm + 1.0 / Sp) / den
    second = ((Nm * Cm / Sm + Np * Cp / Sp) / den) ** 2
    reduced = 1.0 + float(g_function(n * alpha, alpha, t, n * t)) ** 2
    forms = QnForms(float(first - second), reduced)
    if check and min(abs(sm), abs(sp)) >= CHECK_MARGIN and forms.rel_gap > rtol:
        raise ArithmeticError(
            f"Q_n forms disagree: {forms.ratio!r} vs {forms.reduced!r}")
    return forms


def tilde_variance(q, alpha, t):
    """Variance of the reduced polynomial in the factorization regime ``q alpha in pi*Z``.

    ``(1/2) [sin^2(q(a+t)/2) / sin^2((a+t)/2) + sin^2(q(a-t)/2) / sin^2((a-t)/2)]``,
    each ratio replaced by its limit ``q^2`` on 2pi*Z.
    """
    q = int(q)
    if q < 1:
        raise ValidationError("q must be >= 1")
    if distance_to_pi_z(q * alpha) > PI_Z_TOL:
        raise ValidationError("tilde_variance requires q * alpha in pi*Z")

    def ratio(y):
        s = math.sin(0.5 * y)
        if abs(s) < 1e-8:
            return float(q * q)
        return math.sin(0.5 * q * y) ** 2 / (s * s)

    return 0.5 * (ratio(alpha + t) + ratio(alpha - t))
