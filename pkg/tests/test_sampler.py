import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trigzero.errors import FactorizationFailed, ValidationError
from trigzero.kacrice import moments_atomic
from trigzero.sampler import (RngSpec, TrigPolynomial, dump_draw, evaluate, evaluate_grid,
                              evaluate_grid_deriv, evaluate_many, floored_cholesky, load_draw,
                              sample, sample_general, sample_two_atom)
from trigzero.spectral import SpectralMeasure


def naive(poly, t):
    k = np.arange(1, poly.n + 1)
    f = np.sum(poly.a * np.cos(k * t) + poly.b * np.sin(k * t)) / math.sqrt(poly.n)
    fp = np.sum(k * (poly.b * np.cos(k * t) - poly.a * np.sin(k * t))) / math.sqrt(poly.n)
    return f, fp


def stacked(draws):
    return (np.array([p.a for p in draws]), np.array([p.b for p in draws]))


def test_two_atom_alpha_zero_is_constant():
    p = sample_two_atom(6, 0.0, RngSpec(3, 0))
    assert np.all(p.a == p.a[0]) and np.all(p.b == p.b[0])


def test_two_atom_covariance():
    rng = np.random.default_rng(11)
    n, alpha = 8, 0.9
    A, B = stacked([sample_two_atom(n, alpha, rng) for _ in range(200000)])
    k = np.arange(1, n + 1)
    target = np.cos(np.subtract.outer(k, k) * alpha)
    assert np.max(np.abs(A.T @ A / len(A) - target)) <= 0.01
    assert np.max(np.abs(B.T @ B / len(B) - target)) <= 0.01
    assert np.max(np.abs(A.T @ B / len(A))) <= 0.01


def test_draws_are_deterministic():
    m = SpectralMeasure.mixed(0.5, 1.0)
    for measure in (SpectralMeasure.atomic(0.4), SpectralMeasure.uniform(), m):
        assert sample(measure, 20, RngSpec(99, 5)) == sample(measure, 20, RngSpec(99, 5))
        assert sample(measure, 20, RngSpec(99, 5)) != sample(measure, 20, RngSpec(99, 6))


def test_general_sampler_matches_two_atom():
    rng = np.random.default_rng(12)
    n, alpha, draws = 6, 1.1, 100000
    m = SpectralMeasure.atomic(alpha)
    A, _ = stacked([sample_general(m, n, rng) for _ in range(draws)])
    A2, _ = stacked([sample_two_atom(n, alpha, rng) for _ in range(draws)])
    # both estimate cos((k - l) alpha); entries have standard error <= sqrt(2 / draws)
    assert np.max(np.abs(A.T @ A - A2.T @ A2) / draws) <= 6 * math.sqrt(2.0 / draws) * math.sqrt(2)


def test_uniform_has_identity_covariance():
    rng = np.random.default_rng(13)
    m = SpectralMeasure(eta=0.0, density="uniform")
    A, B = stacked([sample(m, 5, rng) for _ in range(200000)])
    C = A.T @ A / len(A)
    assert np.max(np.abs(C - np.diag(np.diag(C)))) <= 0.01
    assert np.max(np.abs(np.diag(C) - 1)) <= 0.02
    assert np.max(np.abs(A.T @ B / len(A))) <= 0.01


def test_general_sampler_size_guard():
    with pytest.raises(ValidationError):
        sample_general(SpectralMeasure.mixed(0.5, 1.0), 5000, RngSpec(0, 0))


def test_floored_cholesky_rejects_indefinite():
    with pytest.raises(FactorizationFailed):
        floored_cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_floored_cholesky_rank_deficient():
    v = np.array([1.0, 0.5, -0.3])
    cov = np.outer(v, v)
    L = floored_cholesky(cov)
    assert np.allclose(L @ L.T, cov, atol=1e-12)


def test_rng_spec_validation():
    with pytest.raises(ValidationError):
        RngSpec(-1, 0)
    with pytest.raises(ValidationError):
        RngSpec(0, 1 << 64)


def test_polynomial_is_immutable():
    p = TrigPolynomial([1.0, 2.0], [0.0, 1.0])
    with pytest.raises(ValueError):
        p.a[0] = 3.0
    with pytest.raises(ValidationError):
        TrigPolynomial([1.0], [1.0, 2.0])


# evaluation -------------------------------------------------------------------

def test_evaluate_simple():
    f, fp = evaluate(TrigPolynomial([1.0], [0.0]), math.pi / 2)
    assert f == pytest.approx(0.0, abs=1e-15)
    assert fp == pytest.approx(-1.0, abs=1e-15)


def test_evaluate_matches_naive_sum():
    rng = np.random.default_rng(4)
    p = TrigPolynomial(rng.standard_normal(1024), rng.standard_normal(1024))
    for t in rng.uniform(0, 2 * np.pi, 20):
        f, fp = evaluate(p, t)
        nf, nfp = naive(p, t)
        scale = math.sqrt(p.n)
        assert abs(f - nf) <= 1e-11 * max(abs(nf), scale)
        assert abs(fp - nfp) <= 1e-11 * max(abs(nfp), scale * p.n)


def test_evaluate_periodic():
    p = TrigPolynomial([0.3, -1.2, 0.7], [1.1, 0.4, -0.2])
    for t in (0.1, 1.7, 4.0):
        shifted = t + 2 * np.pi
        # exact once the argument is reduced; t + 2 pi itself is already rounded
        assert evaluate(p, shifted) == evaluate(p, np.mod(shifted, 2 * np.pi))
        assert evaluate(p, shifted) == pytest.approx(evaluate(p, t), abs=1e-14)


def test_evaluate_many_agrees():
    rng = np.random.default_rng(5)
    p = TrigPolynomial(rng.standard_normal(40), rng.standard_normal(40))
    t = rng.uniform(0, 2 * np.pi, 30)
    f, fp = evaluate_many(p, t)
    f2, fp2 = evaluate(p, t)
    assert np.allclose(f, f2, atol=1e-12) and np.allclose(fp, fp2, atol=1e-10)


def test_grid_matches_pointwise():
    rng = np.random.default_rng(6)
    p = TrigPolynomial(rng.standard_normal(4), rng.standard_normal(4))
    t = 2 * np.pi * np.arange(16) / 16
    grid = evaluate_grid(p, 16)
    f, fp = evaluate(p, t)
    scale = np.max(np.abs(grid))
    assert np.max(np.abs(grid - f)) <= 1e-9 * scale
    gf, gfp = evaluate_grid_deriv(p, 16)
    assert np.max(np.abs(gfp - fp)) <= 1e-9 * np.max(np.abs(gfp))


def test_grid_size_guard():
    p = TrigPolynomial(np.ones(4), np.zeros(4))
    with pytest.raises(ValidationError):
        evaluate_grid(p, 9)


def test_grid_of_zero_polynomial():
    assert np.all(evaluate_grid(TrigPolynomial(np.zeros(5), np.zeros(5)), 12) == 0.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 256), st.integers(0, 2 ** 32), st.floats(0.0, 2 * np.pi))
def test_derivative_matches_finite_difference(n, seed, t):
    p = sample(SpectralMeasure.uniform(), n, RngSpec(seed, 0))
    h = 1e-6
    fd = (evaluate(p, t + h)[0] - evaluate(p, t - h)[0]) / (2 * h)
    fp = evaluate(p, t)[1]
    # the finite difference itself carries about n^2 h^2 truncation and eps/h roundoff
    scale = math.sqrt(np.sum(np.arange(1, n + 1) ** 2 * (p.a ** 2 + p.b ** 2)) / n)
    assert abs(fd - fp) <= 1e-4 * max(abs(fp), scale)


@pytest.mark.slow
def test_variance_matches_kernels():
    rng = np.random.default_rng(7)
    draws = 100000
    for _ in range(20):
        n = int(rng.integers(2, 40))
        alpha = rng.uniform(0.05, np.pi - 0.05)
        t = rng.uniform(0, 2 * np.pi)
        A, B = stacked([sample_two_atom(n, alpha, rng) for _ in range(draws)])
        k = np.arange(1, n + 1)
        f = (A @ np.cos(k * t) + B @ np.sin(k * t)) / math.sqrt(n)
        v = np.mean(f * f)
        se = np.std(f * f) / math.sqrt(draws)
        assert abs(v - moments_atomic(n, alpha, t).var_f) <= 3 * se + 1e-12


def test_dump_load_round_trip(tmp_path):
    p = sample(SpectralMeasure.atomic(0.8), 12, RngSpec(1, 2))
    path = tmp_path / "draw.txt"
    dump_draw(p, path)
    assert load_draw(path) == p


def test_load_draw_rejects_bad_rows(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("3\n1 2 3\n1 2\n")
    with pytest.raises(ValidationError):
        load_draw(path)
