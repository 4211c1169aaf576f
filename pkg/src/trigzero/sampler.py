"""Gaussian coefficient draws and evaluation of ``f_n`` and ``f_n'``.

Coefficients are stored unnormalized; the ``1/sqrt(n)`` factor is applied at
evaluation. Internally a polynomial is the complex vector ``c_k = a_k - i b_k``
so that ``sqrt(n) f_n(t) = Re sum_k c_k e^{ikt}``.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import FactorizationFailed, ValidationError
from .spectral import toeplitz_covariance

MAX_GENERAL_N = 4096
PIVOT_FAIL = -1e-8
PIVOT_FLOOR = 1e-10
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True, eq=False)
class TrigPolynomial:
    """``f_n(t) = n^{-1/2} sum_{k=1}^n a_k cos(kt) + b_k sin(kt)``."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=float).ravel()
        b = np.array(self.b, dtype=float).ravel()
        if a.size == 0 or a.size != b.size:
            raise ValidationError("a and b must be nonempty and of equal length")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValidationError("coefficients must be finite")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self):
        return self.a.size

    @property
    def coeffs(self):
        """``c_k = a_k - i b_k`` for ``k = 1..n``."""
        return self.a - 1j * self.b

    def __eq__(self, other):
        return (isinstance(other, TrigPolynomial) and np.array_equal(self.a, other.a)
                and np.array_equal(self.b, other.b))

    __hash__ = None


@dataclass(frozen=True)
class RngSpec:
    """A reproducible substream: Philox keyed by ``(master_seed, stream)``."""

    master_seed: int
    stream: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not 0 <= v <= _MASK64:
                raise ValidationError(f"{name} must be a 64-bit unsigned integer")

    def generator(self):
        key = int(self.master_seed) | (int(self.stream) << 64)
        return np.random.Generator(np.random.Philox(key=key))


def _generator(rng):
    if isinstance(rng, RngSpec):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise ValidationError("rng must be an RngSpec or numpy Generator")


def sample_two_atom(n, alpha, rng):
    """Exact draw for ``rho(k) = cos(k alpha)`` from four standard normals.

    ``a_k = xi1 cos(k alpha) + xi2 sin(k alpha)``, and likewise ``b_k`` with
    ``xi3, xi4``.
    """
    n = int(n)
    if n < 1:
        raise ValidationError("degree must be >= 1")
    xi = _generator(rng).standard_normal(4)
    k = np.arange(1, n + 1, dtype=float)
    c, s = np.cos(k * alpha), np.sin(k * alpha)
    return TrigPolynomial(xi[0] * c + xi[1] * s, xi[2] * c + xi[3] * s)


def floored_cholesky(cov, fail=PIVOT_FAIL, floor=PIVOT_FLOOR):
    """Lower factor ``L`` with ``L L^T = cov`` for positive semidefinite input.

    Tries LAPACK first; on failure runs a left-looking factorization in which
    pivots in ``(fail, floor]`` are treated as zero (their column is dropped).
    Raises :class:`FactorizationFailed` on a pivot below ``fail``.
    """
    cov = np.asarray(cov, dtype=float)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    m = cov.shape[0]
    L = np.zeros_like(cov)
    for j in range(m):
        v = cov[j:, j] - L[j:, :j] @ L[j, :j]
        piv = v[0]
        if piv < fail:
            raise FactorizationFailed(f"pivot {piv:.3g} at column {j}: covariance is not PSD")
        if piv <= floor:
            continue
        L[j:, j] = v / math.sqrt(piv)
    return L


@lru_cache(maxsize=8)
def _factor(measure, n):
    L = floored_cholesky(toeplitz_covariance(measure, n))
    L.setflags(write=False)
    return L


def sample_general(measure, n, rng):
    """Draw with covariance ``[rho(|i - j|)]`` via a cached Cholesky factor."""
    n = int(n)
    if n < 1:
        raise ValidationError("degree must be >= 1")
    if n > MAX_GENERAL_N:
        raise ValidationError(f"sample_general is limited to n <= {MAX_GENERAL_N}")
    L = _factor(measure, n)
    z = _generator(rng).standard_normal((2, n))
    return TrigPolynomial(L @ z[0], L @ z[1])


def sample(measure, n, rng):
    """Dispatch to the cheapest exact sampler for ``measure``."""
    if measure.single_atom is not None:
        return sample_two_atom(n, measure.single_atom, rng)
    if measure.eta == 0.0 and measure.density == "uniform":
        z = _generator(rng).standard_normal((2, int(n)))
        return TrigPolynomial(z[0], z[1])
    return sample_general(measure, n, rng)


# evaluation -------------------------------------------------------------------

def evaluate(poly, t):
    """``(f_n(t), f_n'(t))`` by Horner's rule in ``z = e^{it}``.

    ``S(z) = sum c_k z^k`` and ``z S'(z)`` are accumulated together from the
    top coefficient down; ``f = Re S / sqrt(n)``, ``f' = Re(i z S') / sqrt(n)``.
    """
    t = np.asarray(t, dtype=float)
    z = np.exp(1j * np.mod(t, 2.0 * math.pi))
    c = poly.coeffs
    n = poly.n
    p = np.zeros_like(z)
    dp = np.zeros_like(z)
    for k in range(n - 1, -1, -1):
        dp = dp * z + p
        p = p * z + c[k]
    # p = sum c_k z^{k-1}, dp its z-derivative
    S = z * p
    zdS = z * (p + z * dp)
    scale = 1.0 / math.sqrt(n)
    f = S.real * scale
    fp = (1j * zdS).real * scale
    if t.ndim == 0:
        return float(f), float(fp)
    return f, fp


def evaluate_many(poly, t, chunk=1 << 20):
    """Vectorized ``(f, f')`` at many points by dense summation (O(n) per point)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    k = np.arange(1, poly.n + 1, dtype=float)
    c = poly.coeffs
    f = np.empty(t.size)
    fp = np.empty(t.size)
    step = max(1, chunk // poly.n)
    for lo in range(0, t.size, step):
        e = np.exp(1j * np.multiply.outer(t[lo:lo + step], k))
        f[lo:lo + step] = (e @ c).real
        fp[lo:lo + step] = (1j * (e @ (k * c))).real
    scale = 1.0 / math.sqrt(poly.n)
    return f * scale, fp * scale


def _grid_sums(poly, m, weights):
    if m < 2 * poly.n + 2:
        raise ValidationError(f"grid size {m} must be at least 2n + 2 = {2 * poly.n + 2}")
    buf = np.zeros(m, dtype=complex)
    buf[1:poly.n + 1] = weights
    return m * np.fft.ifft(buf) / math.sqrt(poly.n)


def evaluate_grid(poly, m):
    """``f_n(2 pi j / m)`` for ``j = 0..m-1`` through one inverse FFT."""
    return _grid_sums(poly, int(m), poly.coeffs).real


def evaluate_grid_deriv(poly, m):
    """``(f, f')`` on the same grid as :func:`evaluate_grid`."""
    m = int(m)
    c = poly.coeffs
    k = np.arange(1, poly.n + 1, dtype=float)
    f = _grid_sums(poly, m, c).real
    fp = (1j * _grid_sums(poly, m, k * c)).real
    return f, fp


# text dump --------------------------------------------------------------------

def dump_draw(poly, path):
    """Write ``n``, then the ``a`` row, then the ``b`` row (full precision)."""
    with open(path, "w") as fh:
        fh.write(f"{poly.n}\n")
        fh.write(" ".join(repr(float(v)) for v in poly.a) + "\n")
        fh.write(" ".join(repr(float(v)) for v in poly.b) + "\n")


def load_draw(path):
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if len(lines) != 3:
        raise ValidationError(f"{path}: expected 3 lines (n, a, b), got {len(lines)}")
    try:
        n = int(lines[0])
        a = [float(v) for v in lines[1].split()]
        b = [float(v) for v in lines[2].split()]
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from None
    if len(a) != n or len(b) != n:
        raise ValidationError(f"{path}: rows must have n = {n} entries")
    return TrigPolynomial(a, b)
