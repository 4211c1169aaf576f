"""Spectral measures of stationary coefficient sequences and their correlations.

A measure is a convex combination ``eta * atomic + (1 - eta) * density``.
Each atom ``(alpha, w)`` stands for the symmetric pair
``w * (delta_alpha + delta_-alpha) / 2``; densities are taken with respect to
``dxi / 2pi`` on ``[0, 2pi]`` so that the uniform density is identically 1
and has no Fourier content beyond the constant term.
"""

import json
import math
import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .angles import parse_angle
from .errors import MeasureFileError, NotConverged, ValidationError
from .quadrature import panel_nodes

TWO_PI = 2.0 * math.pi
DENSITY_FLOOR = 1e-9
DENSITY_CEILING = 1e9
FOURIER_TOL = 1e-10


def _reduce_atom(alpha):
    # cos(k * alpha) only depends on alpha up to sign and 2pi-periodicity
    r = math.fmod(abs(alpha), TWO_PI)
    return TWO_PI - r if r > math.pi else r


@dataclass(frozen=True)
class SpectralMeasure:
    """Atoms plus an optional density, mixed with weight ``eta`` on the atoms.

    Parameters
    ----------
    atoms : tuple of (location, weight)
        Locations are reduced to ``[0, pi]``; weights are relative and must
        sum to one.
    density : None, "uniform" or tuple of (angle, value)
        Tabulated densities are interpolated piecewise-linearly (periodically)
        and rescaled to unit mass at construction.
    eta : float
        Mass of the atomic part.
    """

    atoms: tuple = ()
    density: object = None
    eta: float = 1.0

    def __post_init__(self):
        atoms = tuple((_reduce_atom(float(a)), float(w)) for a, w in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        eta = float(self.eta)
        object.__setattr__(self, "eta", eta)
        if not 0.0 <= eta <= 1.0:
            raise ValidationError(f"eta must lie in [0, 1], got {eta}")
        for a, w in atoms:
            if not (math.isfinite(a) and math.isfinite(w)) or w < 0:
                raise ValidationError(f"invalid atom ({a}, {w})")
        if atoms and abs(sum(w for _, w in atoms) - 1.0) > 1e-9:
            raise ValidationError("atom weights must sum to 1")
        if eta == 1.0 and not atoms:
            raise ValidationError("eta = 1 requires at least one atom")
        if eta > 0.0 and not atoms:
            raise ValidationError("eta > 0 requires at least one atom")

        dens = self.density
        if dens in ("none", None):
            dens = None
        if eta < 1.0 and dens is None:
            raise ValidationError("eta < 1 requires a density")
        if dens is not None and dens != "uniform" and not isinstance(dens, TabulatedDensity):
            dens = _normalize_grid(dens)
        object.__setattr__(self, "density", dens)

    # constructors -----------------------------------------------------------

    @classmethod
    def atomic(cls, alpha):
        """The single symmetric pair ``(delta_alpha + delta_-alpha) / 2``."""
        return cls(atoms=((float(parse_angle(alpha)), 1.0),), eta=1.0)

    @classmethod
    def mixed(cls, eta, alpha, density="uniform"):
        return cls(atoms=((float(parse_angle(alpha)), 1.0),), density=density, eta=eta)

    @classmethod
    def uniform(cls):
        """Independent coefficients."""
        return cls(atoms=(), density="uniform", eta=0.0)

    @property
    def is_atomic(self):
        return self.eta == 1.0

    @property
    def single_atom(self):
        """The location when the measure is exactly one atom pair, else None."""
        if self.is_atomic and len(self.atoms) == 1:
            return self.atoms[0][0]
        return None

    def density_at(self, xi):
        """Evaluate the (normalized) density at angles ``xi``."""
        xi = np.asarray(xi, dtype=float)
        if self.density is None:
            return np.zeros_like(xi)
        if self.density == "uniform":
            return np.ones_like(xi)
        d = self.density
        return np.interp(np.mod(xi, TWO_PI), d.angles, d.values, period=TWO_PI)

    def to_dict(self):
        if self.density is None:
            dens = "none"
        elif self.density == "uniform":
            dens = "uniform"
        else:
            d = self.density
            dens = {"grid": [[a, v] for a, v in zip(d.angles, d.values)]}
        return {"eta": self.eta, "atoms": [list(a) for a in self.atoms], "density": dens}


@dataclass(frozen=True)
class TabulatedDensity:
    """Normalized periodic piecewise-linear density on ``[0, 2pi)``."""

    angles: tuple
    values: tuple


def _normalize_grid(dens):
    if isinstance(dens, dict):
        dens = dens.get("grid")
    try:
        arr = np.array([[float(parse_angle(a)), float(v)] for a, v in dens])
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"density grid must be a list of [angle, value]: {exc}")
    if arr.ndim != 2 or arr.shape[0] < 2:
        raise ValidationError("density grid needs at least two points")
    ang, val = arr[:, 0], arr[:, 1]
    if not (np.all(np.isfinite(ang)) and np.all(np.isfinite(val))):
        raise ValidationError("density grid entries must be finite")
    if np.any(np.diff(ang) <= 0) or ang[0] < 0 or ang[-1] > TWO_PI:
        raise ValidationError("density grid angles must increase within [0, 2pi]")
    # periodic piecewise-linear mass: trapezoid over the closed loop
    loop_a = np.append(ang, ang[0] + TWO_PI)
    loop_v = np.append(val, val[0])
    mass = np.sum(0.5 * (loop_v[1:] + loop_v[:-1]) * np.diff(loop_a)) / TWO_PI
    if not mass > 0:
        raise ValidationError("density must have positive mass")
    val = val / mass
    if val.min() < DENSITY_FLOOR:
        raise ValidationError(
            f"density minimum {val.min():.3g} is below the floor {DENSITY_FLOOR:g}")
    if val.max() > DENSITY_CEILING:
        raise ValidationError("density is not bounded")
    return TabulatedDensity(tuple(ang.tolist()), tuple(val.tolist()))


# Fourier coefficients and correlation ---------------------------------------

def _fourier_edges(measure, panels):
    edges = np.linspace(0.0, TWO_PI, panels + 1)
    if measure.density not in (None, "uniform"):
        edges = np.union1d(edges, np.asarray(measure.density.angles))
    return edges


def _cosine_coeffs(measure, ks, panels):
    edges = _fourier_edges(measure, panels)
    t, w = panel_nodes(edges[:-1], edges[1:], 10)
    t, w = t.ravel(), w.ravel()
    wphi = w * measure.density_at(t) / TWO_PI
    out = np.empty(len(ks))
    for lo in range(0, len(ks), 256):
        kk = np.asarray(ks[lo:lo + 256], dtype=float)
        out[lo:lo + 256] = np.cos(np.outer(kk, t)) @ wphi
    return out


def density_fourier(measure, k, tol=FOURIER_TOL):
    """k-th cosine coefficient ``(1/2pi) int phi(xi) cos(k xi) dxi`` of the density.

    Uses composite 10-point Gauss-Legendre on at least ``8k`` panels; the
    rerun on twice as many panels serves as error estimate.
    """
    if measure.density is None:
        raise ValidationError("measure has no density part")
    k = int(k)
    if k < 1:
        raise ValidationError("density_fourier requires k >= 1")
    if measure.density == "uniform":
        return 0.0
    panels = max(8 * k, 16)
    coarse = _cosine_coeffs(measure, [k], panels)[0]
    fine = _cosine_coeffs(measure, [k], 2 * panels)[0]
    if abs(fine - coarse) > tol:
        raise NotConverged(f"density Fourier coefficient k={k} did not reach {tol:g}",
                           estimate=fine, error=abs(fine - coarse))
    return float(fine)


def correlation(measure, k):
    """Correlation ``rho(k)`` induced by ``measure``; ``rho(0) == 1``."""
    k = int(k)
    if k < 0:
        raise ValidationError("correlation requires k >= 0")
    if k == 0:
        return 1.0
    rho = measure.eta * sum(w * math.cos(k * a) for a, w in measure.atoms)
    if measure.eta < 1.0:
        rho += (1.0 - measure.eta) * density_fourier(measure, k)
    return rho


@lru_cache(maxsize=32)
def _correlation_sequence(measure, m):
    k = np.arange(m, dtype=float)
    rho = np.zeros(m)
    for a, w in measure.atoms:
        rho += measure.eta * w * np.cos(k * a)
    if measure.eta < 1.0 and measure.density != "uniform" and m > 1:
        ks = np.arange(1, m)
        panels = max(8 * (m - 1), 16)
        coarse = _cosine_coeffs(measure, ks, panels)
        fine = _cosine_coeffs(measure, ks, 2 * panels)
        if np.max(np.abs(fine - coarse)) > FOURIER_TOL:
            raise NotConverged("density Fourier coefficients did not converge")
        rho[1:] += (1.0 - measure.eta) * fine
    rho[0] = 1.0
    rho.setflags(write=False)
    return rho


def correlation_sequence(measure, m):
    """``rho(0), ..., rho(m - 1)`` as a read-only array."""
    return _correlation_sequence(measure, int(m))


def toeplitz_covariance(measure, m):
    """The ``m x m`` covariance ``[rho(|i - j|)]`` of the coefficient sequence."""
    rho = correlation_sequence(measure, m)
    idx = np.arange(m)
    return rho[np.abs(idx[:, None] - idx[None, :])]


# measure files --------------------------------------------------------------

def _line_of(text, key):
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def measure_from_json(text, source="<measure>"):
    """Parse a measure specification.

    Format: ``{"eta": float, "atoms": [[alpha, weight], ...],
    "density": "none" | "uniform" | {"grid": [[angle, value], ...]}}``.
    Angles may be numbers or strings such as ``"pi*1/3"``.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MeasureFileError(exc.msg, line=exc.lineno, source=source) from None
    if not isinstance(raw, dict):
        raise MeasureFileError("top level must be an object", line=1, source=source)
    unknown = set(raw) - {"eta", "atoms", "density"}
    if unknown:
        key = sorted(unknown)[0]
        raise MeasureFileError(f"unknown key {key!r}", _line_of(text, key), source)

    eta = raw.get("eta", 1.0)
    if not isinstance(eta, (int, float)) or isinstance(eta, bool):
        raise MeasureFileError("eta must be a number", _line_of(text, "eta"), source)

    atoms = []
    for item in raw.get("atoms", []):
        try:
            loc, w = item
            atoms.append((float(parse_angle(loc)), float(w)))
        except (TypeError, ValueError) as exc:
            raise MeasureFileError(f"bad atom entry {item!r}: {exc}",
                                   _line_of(text, "atoms"), source) from None

    dens = raw.get("density", "none")
    if isinstance(dens, str) and dens not in ("none", "uniform"):
        raise MeasureFileError(f"unknown density {dens!r}", _line_of(text, "density"), source)
    if isinstance(dens, dict) and "grid" not in dens:
        raise MeasureFileError("density object needs a 'grid'", _line_of(text, "density"), source)

    try:
        return SpectralMeasure(atoms=tuple(atoms), density=dens, eta=eta)
    except ValidationError as exc:
        msg = str(exc)
        key = "density" if "densit" in msg else "atoms" if "atom" in msg else "eta"
        raise MeasureFileError(msg, _line_of(text, key), source) from None


def load_measure(path):
    with open(path) as fh:
        return measure_from_json(fh.read(), source=str(path))
