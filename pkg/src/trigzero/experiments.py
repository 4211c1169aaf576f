"""Sweeps behind the command-line verbs, producing :class:`ExperimentRecord` rows."""

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .angles import mod_pi, parse_angle
from .errors import Degenerate, NotConverged, NotFound, ValidationError
from .kacrice import QuadratureSpec, expected_zeros
from .limitfn import LimitQuery, ell_alpha, ell_inverse, ell_zero
from .spectral import SpectralMeasure
from .zerocount import monte_carlo_mean_zeros

COLUMNS = ("experiment", "n", "alpha", "x_mod_pi", "method", "value", "stderr",
           "runtime_ms", "seed", "diagnostics")


@dataclass
class ExperimentRecord:
    experiment: str
    n: int = None
    alpha: float = None
    x_mod_pi: float = None
    method: str = "kacrice"
    value: float = None
    stderr: float = None
    runtime_ms: int = 0
    seed: int = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in ("kacrice", "montecarlo", "limit"):
            raise ValidationError(f"unknown method {self.method!r}")
        if self.value is not None and not math.isfinite(self.value):
            raise ValidationError("record value must be finite")
        if (self.stderr is not None) != (self.method == "montecarlo"):
            raise ValidationError("stderr is set exactly for montecarlo rows")

    def as_dict(self):
        return {c: getattr(self, c) for c in COLUMNS}


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, dict):
        return json.dumps(v, sort_keys=True)
    return str(v)


def records_to_csv(records):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in records:
        w.writerow([_cell(getattr(r, c)) for c in COLUMNS])
    return buf.getvalue()


def records_to_jsonl(records):
    return "".join(json.dumps(r.as_dict(), sort_keys=True) + "\n" for r in records)


class _Clock:
    """Milliseconds since construction, or always 0 when timing is off."""

    def __init__(self, enabled):
        self.enabled = enabled
        self.start = time.perf_counter()

    def ms(self):
        return int(round(1000 * (time.perf_counter() - self.start))) if self.enabled else 0


def _float(x):
    return float(x) if x is not None else None


# limit ------------------------------------------------------------------------

def cmd_limit(alpha, xs, tol=1e-6, timing=False):
    """``ell^alpha(x)`` (``ell^0`` when alpha is 0) for each ``x``."""
    a = float(parse_angle(alpha))
    out = []
    for x in xs:
        clock = _Clock(timing)
        rec = ExperimentRecord("limit", alpha=a, x_mod_pi=float(x), method="limit")
        try:
            if a == 0.0:
                rec.value = ell_zero(float(x), tol=min(tol, 1e-10))
            else:
                res = ell_alpha(LimitQuery(a, float(x), tol=tol), full_output=True)
                rec.value = res.value
                rec.diagnostics = {"error_estimate": res.error, "evaluations": res.evaluations}
        except NotConverged as exc:
            rec.diagnostics = {"status": "not_converged", "message": str(exc),
                               "estimate": exc.estimate}
        rec.runtime_ms = clock.ms()
        out.append(rec)
    return out


# Kac-Rice -------------------------------------------------------------------

def _atom_angle(measure, alpha_text):
    """The angle used for ``n alpha mod pi``: exact when given as text like ``pi*1/3``."""
    if measure.single_atom is None:
        return None
    return parse_angle(alpha_text if alpha_text is not None else measure.single_atom)


def cmd_kacrice(measure, ns, quad=None, alpha_text=None, tol=1e-6, timing=False,
                experiment="kacrice"):
    """``E[N]/n`` per ``n``; single-atom measures also get ``ell^alpha(n alpha mod pi)`` rows."""
    quad = quad or QuadratureSpec()
    ang = _atom_angle(measure, alpha_text)
    a = measure.single_atom
    out = []
    for n in ns:
        clock = _Clock(timing)
        x = mod_pi(n, ang) if ang is not None else None
        rec = ExperimentRecord(experiment, n=int(n), alpha=a, x_mod_pi=x, method="kacrice")
        try:
            value, diag = expected_zeros(measure, n, quad)
            rec.value = value / n
            rec.diagnostics = {k: _float(v) if isinstance(v, (float, np.floating)) else v
                               for k, v in diag.items()}
            rec.diagnostics["expected_zeros"] = value
        except Degenerate as exc:
            rec.diagnostics = {"status": "degenerate", "message": str(exc)}
        except NotConverged as exc:
            rec.diagnostics = {"status": "not_converged", "message": str(exc),
                               "estimate": exc.estimate}
        rec.runtime_ms = clock.ms()
        out.append(rec)
        if x is not None and 0.0 < x < math.pi:
            out.extend(cmd_limit(a, [x], tol=tol, timing=timing))
            out[-1].experiment = experiment
            out[-1].n = int(n)
    return out


# Monte Carlo --------------------------------------------------------------------

def cmd_montecarlo(measure, ns, trials, seed, threads=None, timing=False, alpha_text=None):
    """Scan-count mean ``E[N]/n`` with standard error, one row per ``n``.

    Also returns the per-trial counts as ``{n: counts}``.
    """
    ang = _atom_angle(measure, alpha_text)
    out, counts = [], {}
    for n in ns:
        clock = _Clock(timing)
        res = monte_carlo_mean_zeros(measure, n, trials, seed, threads=threads)
        counts[int(n)] = res.counts
        out.append(ExperimentRecord(
            "montecarlo", n=int(n), alpha=measure.single_atom,
            x_mod_pi=mod_pi(n, ang) if ang is not None else None,
            method="montecarlo", value=res.mean / n, stderr=res.stderr / n,
            runtime_ms=clock.ms(), seed=int(seed),
            diagnostics={"mean_count": res.mean, "trials": int(trials),
                         "suspicious_rate": res.suspicious_rate}))
    return out, counts


def counts_to_csv(counts):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("n", "trial", "count"))
    for n in sorted(counts):
        for i, c in enumerate(counts[n]):
            w.writerow((n, i, int(c)))
    return buf.getvalue()


# range demonstration ----------------------------------------------------------

def candidate_degrees(alpha, x_star, n_max=20000, window=1e-3):
    """All ``n <= n_max`` with ``n alpha mod pi`` within ``window`` of ``x_star``."""
    n = np.arange(1, int(n_max) + 1)
    r = np.mod(n * float(alpha), math.pi)
    d = np.abs(r - x_star)
    d = np.minimum(d, math.pi - d)
    return n[d < window].tolist()


def cmd_range_demo(target, epsilon=0.05, alpha=1e-2, n_max=20000, candidates=3,
                   tol=1e-8, quad=None, timing=False):
    """Realize a limit value ``target`` in ``(sqrt 2, 2)`` as ``E[N]/n`` for some ``n``.

    Solves ``ell^0(x*) = target``, then evaluates the Kac-Rice count at the
    largest ``candidates`` degrees whose ``n alpha mod pi`` is near ``x*``.
    Returns ``(records, achieved)``.
    """
    if not math.sqrt(2.0) < target < 2.0:
        raise ValidationError(f"target must lie in (sqrt(2), 2), got {target}")
    x_star = ell_inverse(target, tol=tol)
    ns = candidate_degrees(alpha, x_star, n_max)
    if not ns:
        raise NotFound(f"no n <= {n_max} has n*alpha mod pi within 1e-3 of {x_star:.6g}")
    measure = SpectralMeasure.atomic(alpha)
    rows = [r for r in cmd_kacrice(measure, ns[-candidates:], quad=quad, timing=timing,
                                   experiment="range-demo")
            if r.method == "kacrice"]
    achieved = False
    for r in rows:
        gap = abs(r.value - target) if r.value is not None else None
        ok = gap is not None and gap <= epsilon
        achieved |= ok
        r.diagnostics.update({"target": target, "x_star": x_star, "gap": gap,
                              "epsilon": epsilon, "achieved": ok})
    return rows, achieved
