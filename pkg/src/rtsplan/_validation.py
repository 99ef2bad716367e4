"""Input validation helpers shared by the functional API and the estimators."""
from __future__ import annotations

from decimal import Decimal
from fractions import Fraction
from numbers import Rational

Number = int | float | Decimal | Fraction | str


def to_fraction(value: Number, *, name: str = "value") -> Fraction:
    """Convert a user-facing number to an exact ``Fraction``.

    Floats go through their shortest ``repr`` so that ``0.7`` becomes
    ``7/10`` rather than the binary approximation.
    """
    if isinstance(value, bool):
        raise TypeError(f"{name} must be a number, got bool")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise ValueError(f"{name} must be finite, got {value!r}")
        return Fraction(repr(value))
    if isinstance(value, (Decimal, str)):
        try:
            return Fraction(value)
        except (ValueError, ArithmeticError) as exc:
            raise ValueError(f"{name} is not a number: {value!r}") from exc
    raise TypeError(f"{name} must be a number, got {type(value).__name__}")


def check_fraction(value: Number, *, name: str = "fraction") -> Fraction:
    frac = to_fraction(value, name=name)
    if not 0 <= frac <= 1:
        raise ValueError(f"{name} must lie in [0, 1], got {format_number(frac)}")
    return frac


def check_int_range(value, lo: int, hi: int, *, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"{name} must be an integer in {lo}..{hi}, got {value!r}")
    if not lo <= value <= hi:
        raise ValueError(f"{name} must be an integer in {lo}..{hi}, got {value}")
    return value


def check_choice(value: str, choices, *, name: str) -> str:
    if value not in choices:
        raise ValueError(f"{name} must be one of {sorted(choices)}, got {value!r}")
    return value


def format_number(value, max_digits: int = 6) -> str:
    """Render a rational as a decimal with at most ``max_digits`` fractional
    digits, trailing zeros trimmed (``Fraction(3, 2)`` -> ``"1.5"``)."""
    frac = to_fraction(value)
    if frac.denominator == 1:
        return str(frac.numerator)
    scaled = round(frac * 10**max_digits)
    sign = "-" if scaled < 0 else ""
    whole, rem = divmod(abs(scaled), 10**max_digits)
    digits = f"{rem:0{max_digits}d}".rstrip("0")
    return f"{sign}{whole}.{digits}" if digits else f"{sign}{whole}"


def json_number(value: Fraction | int):
    """Integers stay integers; other rationals become the nearest float,
    which round-trips through ``to_fraction`` for decimal-sourced values."""
    frac = to_fraction(value)
    if frac.denominator == 1:
        return frac.numerator
    return float(frac)
