import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from trigzero.errors import SingularPoint, ValidationError
from trigzero.limitfn import (LimitQuery, ell_alpha, ell_alpha_direct, ell_inverse, ell_zero,
                              g, g0, g_power_integral)

# independent values of ell^0 from the raw integrand (mpmath / scipy quad, frozen)
ELL_ZERO_ORACLE = {
    0.005: 1.94616291105889856,
    0.01: 1.9240011574590061,
    0.3: 1.6233142356305819,
    1.0: 1.44484651675266,
    1.2: 1.4266795887771782,
    2.0: 1.4310646324642424,
}
# polar patches + nested scipy quad on sqrt(1 + g^2), frozen
ELL_HALF_AT_ONE = 1.5066030984958723


# g ----------------------------------------------------------------------------

def test_g_vanishes_on_atom_row():
    assert g(0.7, 1.1, 0.7, 2.0) == 0.0


def test_g_periodic():
    rng = np.random.default_rng(1)
    for s, u in rng.uniform(0, 2 * np.pi, (50, 2)):
        base = g(0.6, 1.3, s, u)
        assert g(0.6, 1.3, s + 2 * np.pi, u) == pytest.approx(base, rel=1e-10, abs=1e-12)
        assert g(0.6, 1.3, s, u + 2 * np.pi) == pytest.approx(base, rel=1e-10, abs=1e-12)


def test_g_singular_points():
    with pytest.raises(SingularPoint):
        g(0.6, 1.3, 0.6, 1.3)
    with pytest.raises(SingularPoint):
        g(0.6, 1.3, 2 * np.pi - 0.6, 2 * np.pi - 1.3)


def test_g_local_bound_near_singular_point():
    rng = np.random.default_rng(2)
    alpha, x = 0.8, 1.9
    C = min(abs(math.sin(x)), abs(math.sin(alpha)))
    for _ in range(100):
        r = 0.05 * math.sqrt(rng.uniform())
        th = rng.uniform(0, 2 * np.pi)
        ds, du = r * math.cos(th), r * math.sin(th)
        bound = (4 / C) * abs(ds) / (ds * ds + du * du)
        assert abs(g(alpha, x, alpha + ds, x + du)) <= bound * (1 + 1e-12)


def test_g_row_absolute_integral_is_two_pi():
    # identity behind the bounded reformulation of ell^alpha
    rng = np.random.default_rng(3)
    alpha, x = 0.5, 1.0
    for s in rng.uniform(0, 2 * np.pi, 5):
        val = integrate.quad(lambda u: abs(g(alpha, x, s, u)), 0, 2 * np.pi,
                             points=[x, 2 * np.pi - x], limit=400, epsabs=1e-11)[0]
        assert val == pytest.approx(2 * np.pi, rel=1e-8)


def test_g_sup_bound_off_atoms():
    u = np.linspace(0, 2 * np.pi, 4001)
    worst = 0.0
    for alpha, x, eps in ((0.5, 1.0, 0.1), (1.2, 0.3, 0.05), (2.0, 2.8, 0.2)):
        s = np.linspace(0, 2 * np.pi, 4001)
        keep = ((np.abs(np.sin((s - alpha) / 2)) > eps) & (np.abs(np.sin((s + alpha) / 2)) > eps))
        S, U = np.meshgrid(s[keep], u, indexing="ij")
        sup = np.max(np.abs(g(alpha, x, S, U)))
        worst = max(worst, sup * eps ** 2 * (1 - abs(math.cos(x))))
    assert worst <= 2.0


def test_g0_values():
    assert g0(np.pi / 2, 0.4) == pytest.approx(1.0, abs=1e-15)
    u = np.linspace(0, 2 * np.pi, 200)
    assert np.all(g0(0.2, u) > 0)


@pytest.mark.parametrize("x", [0.3, 1.0, 2.5])
def test_g0_mean_is_one(x):
    val = integrate.quad(lambda u: g0(x, u), 0, 2 * np.pi, limit=200, epsabs=1e-13)[0]
    assert val / (2 * np.pi) == pytest.approx(1.0, abs=1e-10)


# ell^0 ------------------------------------------------------------------------

def test_ell_zero_at_half_pi():
    assert ell_zero(np.pi / 2) == pytest.approx(math.sqrt(2), abs=1e-12)


def test_ell_zero_symmetry():
    for x in (0.1, 0.7, 1.3):
        assert abs(ell_zero(x) - ell_zero(np.pi - x)) <= 1e-12


def test_ell_zero_near_boundary():
    assert 1.9 < ell_zero(0.01) < 2.0


@pytest.mark.parametrize("x,expected", sorted(ELL_ZERO_ORACLE.items()))
def test_ell_zero_matches_oracle(x, expected):
    assert ell_zero(x) == pytest.approx(expected, abs=1e-10)


def test_ell_zero_range_on_grid():
    xs = np.linspace(0, np.pi, 1002)[1:-1]
    v = np.array([ell_zero(x) for x in xs])
    assert np.all(v >= math.sqrt(2) - 1e-12)
    assert np.all(v <= 2.0)


def test_ell_zero_tolerance_halving():
    x = 0.05
    ref = ell_zero(x, tol=1e-14)
    for tol in (1e-6, 1e-8, 1e-10):
        assert abs(ell_zero(x, tol=tol) - ref) <= tol
        assert abs(ell_zero(x, tol=tol / 2) - ref) <= tol / 2


def test_ell_zero_rejects_outside():
    for x in (0.0, np.pi, -1.0):
        with pytest.raises(ValidationError):
            ell_zero(x)


# ell^alpha --------------------------------------------------------------------

def test_ell_alpha_matches_direct_oracle():
    assert ell_alpha(LimitQuery(0.5, 1.0, tol=1e-8)) == pytest.approx(ELL_HALF_AT_ONE, abs=1e-8)


@pytest.mark.slow
def test_ell_alpha_direct_route_agrees():
    q = LimitQuery(1.1, 0.6, tol=1e-7)
    assert ell_alpha_direct(q) == pytest.approx(ell_alpha(q), abs=1e-7)


def test_ell_alpha_small_alpha_near_ell_zero():
    assert abs(ell_alpha(LimitQuery(1e-3, 1.0)) - ell_zero(1.0)) <= 5e-3


def test_ell_alpha_zero_alpha_dispatches():
    assert ell_alpha(LimitQuery(0.0, 0.8)) == ell_zero(0.8, tol=1e-10)


def test_ell_alpha_continuous_sweep():
    tol = 1e-6
    xs = np.arange(0.005, np.pi - 0.004, 1e-3)
    v = np.array([ell_alpha(LimitQuery(0.5, x, tol=tol)) for x in xs])
    # a jump is a step that stands out against both neighbouring steps
    d = np.abs(np.diff(v))
    excess = d[1:-1] - np.maximum(d[:-2], d[2:])
    assert excess.max() <= 10 * tol
    assert d.max() <= 0.01


@settings(max_examples=25, deadline=None)
@given(st.floats(1e-3, np.pi - 1e-3), st.floats(1e-3, np.pi - 1e-3))
def test_ell_alpha_range(alpha, x):
    tol = 1e-6
    val = ell_alpha(LimitQuery(alpha, x, tol=tol))
    assert 1.0 <= val <= 2.0 + tol


def test_ell_alpha_tolerance_halving():
    ref = ell_alpha(LimitQuery(0.9, 0.4, tol=1e-10))
    for tol in (1e-4, 1e-6):
        gap = abs(ell_alpha(LimitQuery(0.9, 0.4, tol=tol)) - ref)
        half = abs(ell_alpha(LimitQuery(0.9, 0.4, tol=tol / 2)) - ref)
        assert gap <= tol and half <= tol / 2


def test_ell_alpha_reports_error():
    res = ell_alpha(LimitQuery(0.5, 2.0, tol=1e-7), full_output=True)
    assert res.error <= 1e-7 and res.evaluations > 0


def test_limit_query_validation():
    for args in ((0.5, 0.0), (0.5, np.pi), (-0.1, 1.0), (np.pi, 1.0)):
        with pytest.raises(ValidationError):
            LimitQuery(*args)
    with pytest.raises(ValidationError):
        LimitQuery(0.5, 1.0, tol=0.0)


@pytest.mark.slow
def test_power_integral_stable_under_exclusion_halving():
    tol = 1e-7
    h = lambda v: np.abs(v) ** 1.5
    a = g_power_integral(0.5, 1.0, h, exclusion_delta=1e-3, tol=tol)
    b = g_power_integral(0.5, 1.0, h, exclusion_delta=5e-4, tol=tol)
    assert math.isfinite(a)
    assert abs(a - b) <= 10 * tol * max(1.0, abs(a))


# ell_inverse --------------------------------------------------------------------

def test_ell_inverse_near_sqrt2():
    x = ell_inverse(math.sqrt(2) + 1e-9)
    assert abs(x - np.pi / 2) < 1e-3


def test_ell_inverse_round_trip():
    for target in (1.5, 1.9):
        x = ell_inverse(target)
        assert 0 < x < np.pi / 2
        assert abs(ell_zero(x) - target) <= 1e-10


@pytest.mark.parametrize("target", [2.0, 2.1, math.sqrt(2), 1.2])
def test_ell_inverse_rejects(target):
    with pytest.raises(ValidationError):
        ell_inverse(target)
