"""The limit profiles of ``E[N(f_n)] / n`` and the kernel ``g`` behind them.

``g_x^a(s, u)`` is, for fixed ``s``, a Poisson-kernel-like bump in ``u``:
its denominator can be written ``a0 - b0 cos(u - phi)`` with
``a0^2 - b0^2 = sin^2(x) sin^2((s-a)/2) sin^2((s+a)/2)`` equal to the square of
its numerator. Hence ``int_0^{2pi} |g| du = 2pi`` for every ``s`` and

    ell^a(x) = 1 + (1/4pi^2) int int F(g) ds du,   F(g) = sqrt(1 + g^2) - |g|,

where ``0 < F <= 1`` is bounded. The two points where ``g`` blows up then
contribute nothing singular. :func:`ell_alpha` uses this form;
:func:`ell_alpha_direct` integrates ``sqrt(1 + g^2)`` itself (polar patches
around the singular points plus nested adaptive quadrature outside) and is
kept as the independent check.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .errors import NotConverged, SingularPoint, ValidationError
from .quadrature import adaptive_gauss, gauss_legendre, panel_nodes

TWO_PI = 2.0 * math.pi
SQRT2 = math.sqrt(2.0)
EVAL_BUDGET = 2 ** 22
INNER_TOL = 1e-12


@dataclass(frozen=True)
class LimitQuery:
    """Point ``(alpha, x)`` at which to evaluate a limit profile."""

    alpha: float
    x: float
    tol: float = 1e-6
    exclusion_delta: float = 1e-3

    def __post_init__(self):
        if not 0.0 < self.x < math.pi:
            raise ValidationError(f"x must lie in (0, pi), got {self.x}")
        if not (self.alpha == 0.0 or 0.0 < self.alpha < math.pi):
            raise ValidationError(f"alpha must be 0 or lie in (0, pi), got {self.alpha}")
        if not self.tol > 0:
            raise ValidationError("tol must be positive")
        if not 0.0 < self.exclusion_delta < 0.1:
            raise ValidationError("exclusion_delta must lie in (0, 0.1)")


def _near(a, b, eps=1e-12):
    d = math.fmod(abs(a - b), TWO_PI)
    return min(d, TWO_PI - d) <= eps


def g(alpha, x, s, u):
    """``g_x^alpha(s, u)``; raises :class:`SingularPoint` at ``+-(alpha, x)``."""
    if np.ndim(s) == 0 and np.ndim(u) == 0:
        if (_near(s, alpha) and _near(u, x)) or (_near(s, -alpha) and _near(u, -x)):
            raise SingularPoint(f"g is singular at (s, u) = ({s}, {u})")
    return _g_raw(alpha, x, s, u)


def _g_raw(alpha, x, s, u):
    sm = np.sin(0.5 * (s - alpha))
    sp = np.sin(0.5 * (s + alpha))
    den = np.sin(0.5 * (u - x)) ** 2 * sp * sp + np.sin(0.5 * (u + x)) ** 2 * sm * sm
    val = np.sin(x) * sm * sp / den
    return float(val) if np.ndim(val) == 0 else val


def g0(x, u):
    """``sin(x) / (1 - cos(u) cos(x))``."""
    if not 0.0 < x < math.pi:
        raise ValidationError("x must lie in (0, pi)")
    val = math.sin(x) / (1.0 - np.cos(u) * math.cos(x))
    return float(val) if np.ndim(val) == 0 else val


def _soft(gabs):
    # sqrt(1 + g^2) - |g| without cancellation
    return 1.0 / (np.sqrt(1.0 + gabs * gabs) + gabs)


# inner integral in u ---------------------------------------------------------

def _bump_integral(A, gap, b, panels):
    """``int_0^{2pi} F(A / (gap + 2 b sin^2(v/2))) dv`` for arrays of parameters.

    The bump has width about ``kappa = sqrt(2 gap / b)``; ``v = kappa sinh(tau)``
    spreads it over ``tau`` of order one.
    """
    A = np.abs(A)[:, None]
    gap = gap[:, None]
    b = b[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa = np.where(b > 0, np.sqrt(2.0 * gap / np.where(b > 0, b, 1.0)), math.pi)
    kappa = np.minimum(kappa, math.pi)
    top = np.arcsinh(math.pi / kappa)
    ref_t, ref_w = panel_nodes(np.linspace(0, 1, panels + 1)[:-1],
                               np.linspace(0, 1, panels + 1)[1:], 10)
    tau = top * ref_t.ravel()[None, :]
    w = top * ref_w.ravel()[None, :]
    v = kappa * np.sinh(tau)
    den = gap + 2.0 * b * np.sin(0.5 * v) ** 2
    vals = _soft(A / den) * kappa * np.cosh(tau)
    return 2.0 * (vals * w).sum(axis=1)


def _bump_integral_checked(A, gap, b, tol=INNER_TOL):
    panels = 16
    coarse = _bump_integral(A, gap, b, panels)
    out = coarse.copy()
    todo = np.arange(A.size)
    while todo.size:
        panels *= 2
        fine = _bump_integral(A[todo], gap[todo], b[todo], panels)
        bad = np.abs(fine - coarse[todo]) > tol * TWO_PI
        out[todo] = fine
        if panels >= 1024:
            if np.any(bad):
                raise NotConverged("inner u-integral did not converge")
            break
        coarse = out.copy()
        todo = todo[bad]
    return out


def _row_integral(alpha, x, s):
    """``int_0^{2pi} F(g_x^alpha(s, u)) du`` for an array of ``s``."""
    sm = np.sin(0.5 * (s - alpha))
    sp = np.sin(0.5 * (s + alpha))
    B, C = sp * sp, sm * sm
    A = math.sin(x) * sm * sp
    a0 = 0.5 * (B + C)
    b0 = 0.5 * np.sqrt(np.maximum(B * B + C * C + 2.0 * B * C * math.cos(2.0 * x), 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        gap = np.where(a0 + b0 > 0, A * A / (a0 + b0), 0.0)
    out = np.full(s.shape, TWO_PI)
    live = np.abs(A) > 0
    if np.any(live):
        out[live] = _bump_integral_checked(A[live], gap[live], b0[live])
    return out


# limit profiles ---------------------------------------------------------------

@dataclass
class LimitResult:
    value: float
    error: float
    evaluations: int


def ell_alpha(query, full_output=False):
    """``ell^alpha(x) = (1/4pi^2) int int sqrt(1 + g_x^alpha(s, u)^2) ds du``.

    Integrates the bounded remainder ``F(g)`` (see the module docstring).
    The outer integral in ``s`` is split at the two singular rows
    ``s = +-alpha`` and mapped with ``s = p + (q - p)(1 - cos(pi tau))/2`` to
    absorb the square-root cusps there.
    """
    if query.alpha == 0.0:
        val = ell_zero(query.x, tol=min(query.tol, 1e-10))
        return LimitResult(val, query.tol, 0) if full_output else val
    alpha, x = query.alpha, query.x
    inner_points = 160
    total, err, evals = 0.0, 0.0, 0
    for p, q in ((alpha, TWO_PI - alpha), (TWO_PI - alpha, TWO_PI + alpha)):
        def outer(tau, p=p, q=q):
            s = p + (q - p) * 0.5 * (1.0 - np.cos(math.pi * tau))
            jac = (q - p) * 0.5 * math.pi * np.sin(math.pi * tau)
            return _row_integral(alpha, x, s) * jac
        res = adaptive_gauss(outer, np.linspace(0.0, 1.0, 9), order=10, rtol=0.0,
                             atol=0.5 * query.tol * 4.0 * math.pi ** 2,
                             max_evals=EVAL_BUDGET // inner_points)
        total += res.value
        err += res.error
        evals += res.evaluations * inner_points
    value = 1.0 + total / (4.0 * math.pi ** 2)
    if full_output:
        return LimitResult(value, err / (4.0 * math.pi ** 2), evals)
    return value


def ell_zero(x, tol=1e-10):
    """``ell^0(x) = (1/2pi) int_0^{2pi} sqrt(1 + g_x^0(u)^2) du``.

    Symmetric about ``pi/2``; evaluated at ``min(x, pi - x)`` so the symmetry is
    exact.
    """
    if not 0.0 < x < math.pi:
        raise ValidationError("x must lie in (0, pi)")
    xr = min(x, math.pi - x)
    A = math.sin(xr)
    gap = 2.0 * math.sin(0.5 * xr) ** 2
    b = math.cos(xr)
    kappa = min(math.pi, math.sqrt(2.0 * gap / b)) if b > 0 else math.pi
    top = math.asinh(math.pi / kappa)

    def f(tau):
        v = kappa * np.sinh(tau)
        return _soft(A / (gap + 2.0 * b * np.sin(0.5 * v) ** 2)) * kappa * np.cosh(tau)

    res = adaptive_gauss(f, np.linspace(0.0, top, 17), order=10, rtol=0.0,
                         atol=0.25 * tol * math.pi)
    return 1.0 + 2.0 * res.value / TWO_PI


def ell_inverse(target, tol=1e-10):
    """Smallest ``x`` in ``(0, pi/2)`` with ``ell^0(x) = target``.

    Scans 64 samples for the leftmost downward crossing, then solves with
    Brent's method. Warns when the samples are not monotone.
    """
    if not SQRT2 < target < 2.0:
        raise ValidationError(f"target must lie in (sqrt(2), 2), got {target}")
    xs = np.linspace(0.0, 0.5 * math.pi, 65)[1:]
    vals = np.array([ell_zero(v, tol=0.1 * tol) for v in xs])
    if np.any(np.diff(vals) > 10 * tol):
        warnings.warn("ell^0 samples are not monotone on (0, pi/2)", RuntimeWarning)
    lo = xs[0]
    while ell_zero(lo, tol=0.1 * tol) <= target:
        lo *= 0.5
        if lo < 1e-300:
            raise NotConverged("no bracket found for ell_inverse")
    grid = np.concatenate([[lo], xs])
    gv = np.concatenate([[ell_zero(lo, tol=0.1 * tol)], vals])
    i = int(np.argmax(gv <= target))
    a, b = grid[i - 1], grid[i]
    # tighten tolerances until the residual meets tol
    xtol = 1e-12
    for _ in range(6):
        root = optimize.brentq(lambda v: ell_zero(v, tol=0.1 * tol) - target, a, b,
                               xtol=xtol, rtol=4 * np.finfo(float).eps)
        if abs(ell_zero(root, tol=0.1 * tol) - target) <= tol:
            return root
        xtol *= 1e-2
    raise NotConverged(f"ell_inverse residual above {tol:g}", estimate=root)


# direct route -----------------------------------------------------------------

def _patch_integral(alpha, x, h, delta, center, tol):
    """Polar patch of radius ``delta`` around a singular point.

    With ``r = delta * sigma^2`` the radial integrand ``h(g) r`` stays bounded
    for ``h`` growing at most like ``|g|^1.5``.
    """
    cs, cu = center
    sig, wsig = panel_nodes(np.array([0.0]), np.array([1.0]), 64)
    sig, wsig = sig.ravel(), wsig.ravel()
    r = delta * sig * sig
    jac = 2.0 * delta * sig * r  # dr * r

    def over_theta(theta):
        s = cs + np.multiply.outer(np.cos(theta), r)
        u = cu + np.multiply.outer(np.sin(theta), r)
        return (h(_g_raw(alpha, x, s, u)) * jac) @ wsig

    half = 0.5 * math.pi
    edges = np.linspace(-half, 3 * half, 17)
    res = adaptive_gauss(over_theta, edges, order=10, rtol=tol, max_evals=EVAL_BUDGET // 64)
    return res.value


def g_power_integral(alpha, x, h, exclusion_delta=1e-3, tol=1e-9):
    """``int int h(g_x^alpha(s, u)) ds du`` over ``[0, 2pi]^2``.

    ``h`` acts on arrays. Disks of radius ``exclusion_delta`` around
    ``(alpha, x)`` and ``(2pi - alpha, 2pi - x)`` use polar coordinates; the
    rest is nested adaptive quadrature with the disk chords cut out.
    """
    q = LimitQuery(alpha, x, exclusion_delta=exclusion_delta)
    if q.alpha == 0.0:
        raise ValidationError("g_power_integral needs alpha in (0, pi)")
    d = exclusion_delta
    centers = ((alpha, x), (TWO_PI - alpha, TWO_PI - x))
    patches = sum(_patch_integral(alpha, x, h, d, c, tol) for c in centers)

    def hs(s, u):
        return float(h(np.float64(_g_raw(alpha, x, s, u))))

    def row(s):
        cuts = []
        for cs, cu in centers:
            if abs(s - cs) < d:
                w = math.sqrt(d * d - (s - cs) ** 2)
                cuts.append((cu - w, cu + w))
        pieces, lo = [], 0.0
        for a, b in sorted(cuts):
            pieces.append((lo, a))
            lo = b
        pieces.append((lo, TWO_PI))
        total = 0.0
        for a, b in pieces:
            pts = [p for p in (x, TWO_PI - x) if a < p < b]
            total += integrate.quad(lambda u: hs(s, u), a, b, points=pts or None,
                                    limit=400, epsabs=0.1 * tol, epsrel=tol)[0]
        return total

    s_breaks = sorted({alpha - d, alpha, alpha + d,
                       TWO_PI - alpha - d, TWO_PI - alpha, TWO_PI - alpha + d})
    exterior = integrate.quad(row, 0.0, TWO_PI, points=s_breaks, limit=400,
                              epsabs=tol, epsrel=tol)[0]
    return patches + exterior


def ell_alpha_direct(query):
    """``ell^alpha`` by integrating ``sqrt(1 + g^2)`` directly (slow; for checks)."""
    total = g_power_integral(query.alpha, query.x, lambda v: np.sqrt(1.0 + v * v),
                             exclusion_delta=query.exclusion_delta,
                             tol=min(1e-8, query.tol))
    return total / (4.0 * math.pi ** 2)
