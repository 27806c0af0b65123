"""Formatting and parsing of exact rationals for JSON and LaTeX output."""

from fractions import Fraction


def fmt_frac(x, always_ratio: bool = False) -> str:
    x = Fraction(x)
    if x.denominator == 1 and not always_ratio:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_frac(s) -> Fraction:
    if isinstance(s, (int, Fraction)):
        return Fraction(s)
    if isinstance(s, str):
        return Fraction(s.strip())
    raise TypeError(f"cannot read a rational from {s!r}")


def latex_frac(x) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    sign = "-" if x < 0 else ""
    return r"%s\frac{%d}{%d}" % (sign, abs(x.numerator), x.denominator)
