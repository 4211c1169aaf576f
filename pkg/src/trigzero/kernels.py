"""Fejer-type kernels governing the covariance of ``(f_n, f_n')``.

All functions accept scalars or arrays for ``x`` (reduced mod 2pi internally)
and return floats or arrays accordingly.
"""

import math

import numpy as np

from .errors import ValidationError

TWO_PI = 2.0 * math.pi
FEJER_GUARD = 1e-8
ENERGY_GUARD = 1e-6


def _check_n(n):
    n = int(n)
    if n < 1:
        raise ValidationError(f"degree must be >= 1, got {n}")
    return n


def _centered(x):
    # representative in [-pi, pi): keeps sin(x/2) accurate near 2pi*Z
    x = np.asarray(x, dtype=float)
    return np.mod(x + math.pi, TWO_PI) - math.pi


def _out(x, val):
    return float(val) if np.ndim(x) == 0 else val


def alpha_norm(n):
    """``6 / ((n + 1)(2n + 1))``, the reciprocal of ``(1/n) sum k^2``."""
    n = _check_n(n)
    return 6.0 / ((n + 1) * (2 * n + 1))


def fejer(n, x):
    """Fejer kernel ``K_n(x) = (1/n) (sin(nx/2) / sin(x/2))^2``; equals n on 2pi*Z."""
    n = _check_n(n)
    y = _centered(x)
    s = np.sin(0.5 * y)
    small = np.abs(s) < FEJER_GUARD
    safe = np.where(small, 1.0, s)
    val = np.sin(0.5 * n * y) ** 2 / (n * safe ** 2)
    series = n * (1.0 - (n * n - 1.0) * y * y / 12.0)
    return _out(x, np.where(small, series, val))


def fejer_deriv(n, x):
    """Derivative ``K_n'(x)``; vanishes on 2pi*Z."""
    n = _check_n(n)
    y = _centered(x)
    s = np.sin(0.5 * y)
    c = np.cos(0.5 * y)
    small = np.abs(s) < FEJER_GUARD
    safe = np.where(small, 1.0, s)
    S = np.sin(0.5 * n * y)
    C = np.cos(0.5 * n * y)
    val = (2.0 / n) * (S / safe) * (n * C / (2.0 * safe) - S * c / (2.0 * safe ** 2))
    series = -n * (n * n - 1.0) * y / 6.0
    return _out(x, np.where(small, series, val))


def _energy_direct(n, y):
    k = np.arange(n + 1, dtype=float)
    z = np.exp(1j * np.multiply.outer(y, k)) @ k
    return alpha_norm(n) / n * np.abs(z) ** 2


def energy_kernel(n, x):
    """``L_n(x) = (alpha_n / n) |sum_{k=0}^n k e^{ikx}|^2``, of unit mean.

    Away from 2pi*Z the closed form is used in the real rewriting
    ``|1 - z|^2 = (1 - D)^2 + 4 D sin^2(nx/4)`` with
    ``D = sin((n+1)x/2) / ((n+1) sin(x/2))``; within ``|sin(x/2)| < 1e-6`` the
    sum is taken directly.
    """
    n = _check_n(n)
    y = np.atleast_1d(_centered(x))
    s = np.sin(0.5 * y)
    small = np.abs(s) < ENERGY_GUARD
    safe = np.where(small, 1.0, s)
    D = np.sin(0.5 * (n + 1) * y) / ((n + 1) * safe)
    one_minus_z = (1.0 - D) ** 2 + 4.0 * D * np.sin(0.25 * n * y) ** 2
    val = alpha_norm(n) / n * (n + 1) ** 2 / (4.0 * safe ** 2) * one_minus_z
    if np.any(small):
        val[small] = _energy_direct(n, y[small])
    return _out(x, val.reshape(np.shape(x)))


def energy_kernel_closed(n, x):
    """The literal complex closed form of ``L_n`` (no guard); for cross-checks."""
    n = _check_n(n)
    x = np.asarray(x, dtype=float)
    e = np.exp(1j * x)
    z = (1.0 - np.exp(1j * (n + 1) * x)) * np.exp(-1j * n * x) / ((n + 1) * (1.0 - e))
    val = alpha_norm(n) / n * (n + 1) ** 2 / (4.0 * np.sin(0.5 * x) ** 2) * np.abs(1.0 - z) ** 2
    return _out(x, val)


def energy_kernel_direct(n, x):
    """``L_n`` by O(n) summation; the independent oracle for the closed form."""
    n = _check_n(n)
    y = np.asarray(x, dtype=float)
    return _out(x, _energy_direct(n, y))


def kernel_approx_error(n, epsilon):
    """Empirical sup-errors of the large-n approximations of ``K_n'`` and ``L_n``.

    Over a ``10n``-point grid of ``F_eps = {x : |sin(x/2)| >= eps}`` returns
    ``(sup |K_n' - sin(nx/2)cos(nx/2)/sin^2(x/2)|,
    sup |L_n - alpha_n n / (4 sin^2(x/2))|)``. Requires ``n * eps > 1``.
    """
    n = _check_n(n)
    if not 0.0 < epsilon <= 1.0:
        raise ValidationError("epsilon must lie in (0, 1]")
    if n * epsilon <= 1.0:
        raise ValidationError(f"n * epsilon = {n * epsilon:g} must exceed 1")
    x = np.linspace(0.0, TWO_PI, 10 * n, endpoint=False)
    s = np.sin(0.5 * x)
    x, s = x[np.abs(s) >= epsilon], s[np.abs(s) >= epsilon]
    if x.size == 0:
        raise ValidationError("F_eps has no grid points")
    approx_k = np.sin(0.5 * n * x) * np.cos(0.5 * n * x) / s ** 2
    approx_l = alpha_norm(n) * n / (4.0 * s ** 2)
    err_k = np.max(np.abs(fejer_deriv(n, x) - approx_k))
    err_l = np.max(np.abs(energy_kernel(n, x) - approx_l))
    return float(err_k), float(err_l)
