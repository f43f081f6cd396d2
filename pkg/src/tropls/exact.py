"""Strict exact-rational parsing and formatting.

All quantities in this package are `fractions.Fraction` values.  The parser
deliberately rejects anything that is not an integer or a ``p/q`` string:
decimal literals would silently import binary-float rounding into what is
otherwise an exact computation, so ``"1.5"`` is an error, not three halves.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd


class ExactnessError(ValueError):
    """Raised when an input value is not an exact rational literal."""


class _Infinity:
    """Positive infinity, the min-plus zero element.

    Greater than every Fraction, absorbing under addition, and exact (never a
    float).  A single shared instance, ``INF``, is the only value of this
    type; identity checks (``x is INF``) are the idiomatic test.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __sub__(self, other):
        if other is self:
            raise ArithmeticError("inf - inf is undefined")
        return self

    def __rsub__(self, other):
        raise ArithmeticError("cannot subtract inf from a finite value")

    def __neg__(self):
        raise ArithmeticError("negative infinity is not a tropical value")

    def __hash__(self):
        return hash("tropical-inf")

    def __repr__(self):
        return "inf"


INF = _Infinity()


def parse_extended(value: object) -> object:
    """Like `parse_rational`, but also accepts ``"inf"`` / `INF` itself."""
    if value is INF or (isinstance(value, str) and value.strip() == "inf"):
        return INF
    return parse_rational(value)


def format_extended(x: object) -> str:
    if x is INF:
        return "inf"
    return format_rational(x)


def parse_rational(value: object) -> Fraction:
    """Parse an int, or a string of the form ``"p"`` / ``"p/q"``, exactly.

    Floats and decimal strings are rejected.
    """
    if isinstance(value, bool):
        raise ExactnessError(f"not a rational literal: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise ExactnessError(
            f"float literal {value!r} rejected: use an exact 'p/q' string"
        )
    if isinstance(value, str):
        text = value.strip()
        body = text[1:] if text[:1] in "+-" else text
        if "/" in body:
            num, _, den = body.partition("/")
            ok = num.isdigit() and den.isdigit() and int(den) != 0
        else:
            ok = body.isdigit()
        if not ok:
            raise ExactnessError(
                f"malformed rational literal {value!r}: expected 'p' or 'p/q'"
            )
        return Fraction(text)
    raise ExactnessError(f"not a rational literal: {value!r}")


def format_rational(x: Fraction) -> str:
    """Canonical string form: ``"p"`` for integers, else ``"p/q"`` reduced."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def lcm(*values: int) -> int:
    out = 1
    for v in values:
        v = abs(int(v))
        if v:
            out = out * v // gcd(out, v)
    return out
