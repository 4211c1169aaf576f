"""Counting the real zeros of a sampled ``f_n`` on ``[0, 2pi)``.

Two independent methods: a sign-change scan on an FFT grid (default) and the
unit-circle roots of the associated degree-``2n`` algebraic polynomial
(oracle, small ``n`` only).
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import gcd

import numpy as np
from scipy.ndimage import maximum_filter1d

from .errors import IllConditioned, ValidationError
from .sampler import RngSpec, evaluate_grid_deriv, evaluate_many, sample

TWO_PI = 2.0 * math.pi
MAX_COMPANION_N = 128
DIP_RATIO = 1e-3
SUBDIVIDE = 16


@dataclass
class ZeroCountResult:
    count: int
    roots: list = field(default_factory=list)
    suspicious_intervals: list = field(default_factory=list)
    method: str = "scan"

    @property
    def suspicious(self):
        return bool(self.suspicious_intervals)


# scan -------------------------------------------------------------------------

def _refine(poly, lo, hi, flo, tol, deriv=False):
    """Safeguarded Newton on brackets ``[lo, hi]`` (vectorized).

    Roots of ``f`` (or of ``f'`` when ``deriv``); ``flo`` is the value at ``lo``
    used to keep the bracket oriented.
    """
    lo, hi = lo.copy(), hi.copy()
    neg_lo = flo < 0
    x = 0.5 * (lo + hi)
    for _ in range(100):
        f, fp = evaluate_many(poly, x)
        if deriv:
            f, fp = fp, _second_derivative(poly, x)
        left = (f < 0) == neg_lo
        lo = np.where(left, x, lo)
        hi = np.where(left, hi, x)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = f / fp
        newton = x - step
        bad = ~np.isfinite(newton) | (newton <= lo) | (newton >= hi)
        x_new = np.where(bad, 0.5 * (lo + hi), newton)
        done = (hi - lo <= tol) | (np.abs(x_new - x) <= 0.5 * tol)
        x = x_new
        if np.all(done):
            break
    return x


def _second_derivative(poly, t):
    k = np.arange(1, poly.n + 1, dtype=float)
    e = np.exp(1j * np.multiply.outer(np.atleast_1d(t), k))
    return -(e @ (k * k * poly.coeffs)).real / math.sqrt(poly.n)


def _hidden_pairs(poly, lo, hi, f_lo, f_hi, refine_tol):
    """Within same-sign cells, look for an interior extremum of opposite sign.

    Each cell is sampled at ``SUBDIVIDE`` sub-nodes; a sub-cell sign change is a
    zero, and a sub-cell with a derivative sign change is searched for its
    extremum. The end values are pinned to the grid values so that a zero
    sitting on a grid node is attributed to exactly one cell. Returns a list
    of root brackets ``(a, b)``.
    """
    if lo.size == 0:
        return []
    frac = np.linspace(0.0, 1.0, SUBDIVIDE + 1)
    pts = lo[:, None] + (hi - lo)[:, None] * frac[None, :]
    f, fp = evaluate_many(poly, pts.ravel())
    f, fp = f.reshape(pts.shape), fp.reshape(pts.shape)
    f[:, 0], f[:, -1] = f_lo, f_hi
    brackets = []
    sgn = f >= 0
    # explicit sign changes on the finer grid
    for i, j in zip(*np.nonzero(sgn[:, :-1] != sgn[:, 1:])):
        brackets.append((pts[i, j], pts[i, j + 1]))
    # extrema that may dip through zero between sub-nodes
    dsg = fp >= 0
    cand = np.nonzero((dsg[:, :-1] != dsg[:, 1:]) & (sgn[:, :-1] == sgn[:, 1:]))
    if cand[0].size:
        a = pts[cand[0], cand[1]]
        b = pts[cand[0], cand[1] + 1]
        ext = _refine(poly, a, b, fp[cand[0], cand[1]], refine_tol, deriv=True)
        fext, _ = evaluate_many(poly, ext)
        flip = (fext >= 0) != sgn[cand[0], cand[1]]
        for ai, ei, bi in zip(a[flip], ext[flip], b[flip]):
            brackets.append((ai, ei))
            brackets.append((ei, bi))
    return brackets


def _hermite_min(f0, f1, d0, d1):
    """Minimum over ``[0, 1]`` of the cubic Hermite interpolant (unit-width slopes)."""
    # H(s) = f0 + d0 s + c2 s^2 + c3 s^3
    c2 = 3.0 * (f1 - f0) - 2.0 * d0 - d1
    c3 = 2.0 * (f0 - f1) + d0 + d1
    best = np.minimum(f0, f1)
    qa, qb, qc = 3.0 * c3, 2.0 * c2, d0
    disc = qb * qb - 4.0 * qa * qc
    sq = np.sqrt(np.maximum(disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        lin = -qc / qb
        cands = (np.where(qa != 0, (-qb + sq) / (2.0 * qa), lin),
                 np.where(qa != 0, (-qb - sq) / (2.0 * qa), lin))
    for r in cands:
        ok = (disc >= 0) & np.isfinite(r) & (r > 0) & (r < 1)
        r = np.where(ok, r, 0.0)
        val = f0 + r * (d0 + r * (c2 + r * c3))
        best = np.where(ok, np.minimum(best, val), best)
    return best


def count_zeros_scan(poly, grid_factor=32, refine_tol=1e-12, refine=True):
    """Zeros of ``f_n`` on ``[0, 2pi)`` by a sign-change scan.

    ``f`` and ``f'`` are taken on ``grid_factor * n`` nodes by FFT. Cells whose
    endpoints share a sign are checked for a hidden pair of zeros: the cubic
    Hermite interpolant of ``(f, f')`` is within ``h^4 max|f^(4)| / 384`` of
    ``f``, so only cells where it comes that close to zero can hide one.
    Those cells, and cells where ``|f|`` dips below ``1e-3`` times its local
    maximum (over one period ``2pi / n``), are resampled ``SUBDIVIDE`` times
    and searched for an extremum of the opposite sign. Dip cells are reported
    as suspicious.

    With ``refine`` the roots are polished to ``refine_tol``; counting alone
    does not need it.
    """
    n = poly.n
    m = max(int(grid_factor) * n, 2 * n + 2)
    f, fp = evaluate_grid_deriv(poly, m)
    h = TWO_PI / m
    t = h * np.arange(m)
    f_next = np.roll(f, -1)
    sgn = f >= 0
    change = sgn != np.roll(sgn, -1)

    k = np.arange(1, n + 1, dtype=float)
    bound = h ** 4 * float(np.sum(k ** 4 * np.abs(poly.coeffs))) / (384.0 * math.sqrt(n))
    orient = np.where(sgn, 1.0, -1.0)
    low = _hermite_min(orient * f, orient * f_next,
                       orient * h * fp, orient * h * np.roll(fp, -1))
    maybe = (~change) & (low <= bound)
    # a dip is a tiny node value with no crossing on either side of it
    local = maximum_filter1d(np.abs(f), size=2 * max(m // n, 1) + 1, mode="wrap")
    dip_node = ((np.abs(f) < DIP_RATIO * local) & ~change & ~np.roll(change, 1))
    dip = dip_node | np.roll(dip_node, -1)
    check = np.nonzero(dip | maybe)[0]

    lo = t[change]
    hi = lo + h
    extra = _hidden_pairs(poly, t[check], t[check] + h, f[check], f_next[check],
                          refine_tol)
    count = int(change.sum()) + len(extra)
    flagged = set(np.nonzero(dip)[0].tolist())
    flagged |= {int(a // h) % m for a, _ in extra}
    suspicious = [(j * h, (j + 1) * h) for j in sorted(flagged)]

    roots = []
    if refine and count:
        a = np.concatenate([lo, np.array([e[0] for e in extra])])
        b = np.concatenate([hi, np.array([e[1] for e in extra])])
        fa, _ = evaluate_many(poly, a)
        r = _refine(poly, a, b, fa, refine_tol)
        roots = sorted(float(v) for v in np.mod(r, TWO_PI))
    return ZeroCountResult(count, roots, suspicious, "scan")


# companion --------------------------------------------------------------------

def companion_coefficients(poly):
    """Coefficients (lowest degree first) of ``P(z) = z^n sqrt(n) f_n``, degree ``2n``.

    On ``|z| = 1``, ``P(e^{it}) = e^{int} sqrt(n) f_n(t)``.
    """
    n = poly.n
    c = poly.coeffs
    P = np.zeros(2 * n + 1, dtype=complex)
    P[n + 1:] = 0.5 * c
    P[:n][::-1] = 0.5 * np.conj(c)
    return P


def count_zeros_companion(poly, circle_tol=1e-8):
    """Zeros as the unit-circle eigenvalues of the companion matrix of ``P``."""
    if poly.n > MAX_COMPANION_N:
        raise ValidationError(f"companion method is limited to n <= {MAX_COMPANION_N}")
    P = companion_coefficients(poly)
    if abs(P[-1]) < 1e-13:
        raise IllConditioned(f"leading coefficient {abs(P[-1]):.3g} is too small")
    z = np.roots(P[::-1])
    on = np.abs(np.abs(z) - 1.0) <= circle_tol
    roots = sorted(float(v) for v in np.mod(np.angle(z[on]), TWO_PI))
    return ZeroCountResult(len(roots), roots, [], "companion")


# structural zeros ---------------------------------------------------------------

def deterministic_zeros(n, p, q):
    """Zeros shared by every draw when ``alpha = 2 pi p / q`` and ``q | n``.

    Each residue class of ``k mod q`` contributes ``e^{ijt}(1 - e^{int}) /
    (1 - e^{iqt})``, which vanishes at ``t = 2 pi k / n`` unless ``r = n / q``
    divides ``k``: ``n - q`` points.
    """
    n, p, q = int(n), int(p), int(q)
    if n < 1 or q < 1:
        raise ValidationError("n and q must be positive")
    if gcd(p, q) != 1:
        raise ValidationError(f"p/q must be in lowest terms, got {p}/{q}")
    if n % q:
        raise ValidationError(f"q = {q} must divide n = {n}")
    r = n // q
    return [TWO_PI * k / n for k in range(n) if k % r]


# Monte Carlo ------------------------------------------------------------------

@dataclass
class MonteCarloResult:
    mean: float
    stderr: float
    counts: np.ndarray
    suspicious_rate: float

    def __iter__(self):
        return iter((self.mean, self.stderr, self.counts))


def resolve_threads(threads=None):
    if threads is None:
        env = os.environ.get("TRIGZERO_THREADS")
        threads = int(env) if env else 1
    threads = int(threads)
    if threads < 1:
        raise ValidationError("threads must be >= 1")
    return threads


def monte_carlo_mean_zeros(measure, n, trials, master_seed, threads=None, grid_factor=32):
    """Mean and standard error of the scan count over streams ``0..trials-1``.

    Trial ``i`` always uses ``RngSpec(master_seed, i)``, so the result does not
    depend on ``threads``.
    """
    trials = int(trials)
    if trials < 2:
        raise ValidationError("trials must be >= 2")

    def one(i):
        poly = sample(measure, n, RngSpec(int(master_seed), i))
        res = count_zeros_scan(poly, grid_factor=grid_factor, refine=False)
        return res.count, res.suspicious

    workers = resolve_threads(threads)
    if workers == 1:
        out = [one(i) for i in range(trials)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(one, range(trials)))
    counts = np.array([c for c, _ in out], dtype=np.int64)
    susp = sum(s for _, s in out)
    mean = float(counts.mean())
    stderr = float(counts.std(ddof=1) / math.sqrt(trials))
    return MonteCarloResult(mean, stderr, counts, susp / trials)
