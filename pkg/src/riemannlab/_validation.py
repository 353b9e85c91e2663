"""Input validation helpers shared by the numerical modules and estimators."""

from __future__ import annotations

import math
import numbers
from fractions import Fraction

import numpy as np


class ValidationError(ValueError):
    """Raised when an argument violates an operation's precondition."""


class NumericalError(RuntimeError):
    """Raised when a computation cannot produce a trustworthy result
    (degenerate regression, too-shallow expansion, aliasing guard, ...)."""


class DegenerateFitError(NumericalError):
    pass


class InsufficientDepthError(NumericalError):
    pass


def check_int(value, name, *, min_value=None, max_value=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValidationError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if min_value is not None and value < min_value:
        raise ValidationError(f"{name} must be >= {min_value}, got {value}")
    if max_value is not None and value > max_value:
        raise ValidationError(f"{name} must be <= {max_value}, got {value}")
    return value


def check_real(value, name, *, min_value=None, max_value=None, strict_min=False):
    """Validate a finite real scalar. Fractions are returned unchanged."""
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ValidationError(f"{name} must be a real number, got {value!r}")
    if not isinstance(value, Fraction):
        if not math.isfinite(float(value)):
            raise ValidationError(f"{name} must be finite, got {value!r}")
        if isinstance(value, numbers.Integral):
            value = int(value)
        else:
            value = float(value)
    if min_value is not None:
        if strict_min and not value > min_value:
            raise ValidationError(f"{name} must be > {min_value}, got {value}")
        if value < min_value:
            raise ValidationError(f"{name} must be >= {min_value}, got {value}")
    if max_value is not None and value > max_value:
        raise ValidationError(f"{name} must be <= {max_value}, got {value}")
    return value


def check_finite_array(values, name, *, dtype=float):
    arr = np.asarray(values, dtype=dtype)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def check_power_of_two(value, name, *, min_value=1):
    value = check_int(value, name, min_value=min_value)
    if value & (value - 1):
        raise ValidationError(f"{name} must be a power of two, got {value}")
    return value


def as_rational(x, name="x0", *, max_denominator=None):
    """Return ``x`` as a Fraction if it is exactly rational (int or Fraction),
    else None. Floats are never silently converted."""
    if isinstance(x, bool):
        raise ValidationError(f"{name} must be a number, got {x!r}")
    if isinstance(x, Fraction):
        frac = x
    elif isinstance(x, numbers.Integral):
        frac = Fraction(int(x))
    else:
        return None
    if max_denominator is not None and frac.denominator > max_denominator:
        raise ValidationError(
            f"{name} has denominator {frac.denominator} > {max_denominator}")
    return frac


def parse_rational(text):
    """Parse '3/8', '0.25' or '2' into a Fraction (exact decimal)."""
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"cannot parse {text!r} as a rational number") from exc
