"""Angles given either as plain radians or as exact rational multiples of pi."""

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import ValidationError

_PI_RE = re.compile(
    r"^\s*(?P<sign>[+-])?\s*(?:(?P<pre>\d+)\s*\*?\s*)?pi"
    r"\s*(?:\*\s*(?P<num>\d+))?\s*(?:/\s*(?P<den>\d+))?\s*$"
)


@dataclass(frozen=True)
class Angle:
    """An angle in radians, remembering ``value = pi * pi_multiple`` when exact."""

    value: float
    pi_multiple: Fraction = None

    def __float__(self):
        return self.value

    def __str__(self):
        if self.pi_multiple is None:
            return repr(self.value)
        p, q = self.pi_multiple.numerator, self.pi_multiple.denominator
        return f"pi*{p}/{q}" if q != 1 else f"pi*{p}"


def parse_angle(text):
    """Parse ``"0.7"``, ``"pi"``, ``"pi/3"``, ``"pi*2/3"`` or ``"2*pi/3"``.

    Numbers (int/float) are accepted as radians.
    """
    if isinstance(text, Angle):
        return text
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        if not math.isfinite(text):
            raise ValidationError(f"angle must be finite, got {text!r}")
        return Angle(float(text))
    if not isinstance(text, str):
        raise ValidationError(f"cannot interpret {text!r} as an angle")
    m = _PI_RE.match(text.lower())
    if m:
        frac = Fraction(int(m["pre"] or 1) * int(m["num"] or 1), int(m["den"] or 1))
        if m["den"] is not None and int(m["den"]) == 0:
            raise ValidationError(f"zero denominator in angle {text!r}")
        if m["sign"] == "-":
            frac = -frac
        return Angle(math.pi * frac.numerator / frac.denominator, frac)
    try:
        value = float(text)
    except ValueError:
        raise ValidationError(
            f"cannot parse angle {text!r}; use radians or the form pi*p/q") from None
    if not math.isfinite(value):
        raise ValidationError(f"angle must be finite, got {text!r}")
    return Angle(value)


def mod_pi(n, angle):
    """``n * angle`` reduced to ``[0, pi)``, exactly when the angle is pi-rational."""
    angle = parse_angle(angle)
    if angle.pi_multiple is not None:
        r = (n * angle.pi_multiple) % 1
        return math.pi * r.numerator / r.denominator
    x = math.fmod(n * angle.value, math.pi)
    return x + math.pi if x < 0 else x


def distance_to_pi_z(x):
    """Distance from ``x`` to the nearest integer multiple of pi."""
    r = math.fmod(abs(x), math.pi)
    return min(r, math.pi - r)
