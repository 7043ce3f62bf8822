"""Exact-number helpers shared by every module."""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational, Real


def to_fraction(x) -> Fraction:
    """Convert ``x`` to a Fraction, reading floats by their decimal repr.

    ``to_fraction(2.1) == Fraction(21, 10)``, which is what a table written
    with decimals means; ``Fraction(2.1)`` would keep the binary error.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not payoffs")
    if isinstance(x, Rational):
        return Fraction(int(x.numerator), int(x.denominator))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, Real):
        xf = float(x)
        if not math.isfinite(xf):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(repr(xf))
    raise TypeError(f"cannot read {x!r} as an exact number")


def fraction_str(x: Fraction) -> str:
    """Serialize as ``"p/q"`` (``"p"`` when the denominator is 1)."""
    return str(Fraction(x))


def format_float(x: float) -> str:
    return format(float(x), ".17g")
