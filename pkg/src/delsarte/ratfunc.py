"""Exact rational functions in one variable over Q.

Thin value type over ``flint.fmpq_poly``: numerator and denominator are kept
coprime with a monic denominator, so equality is structural.
"""

from __future__ import annotations

from fractions import Fraction

from flint import fmpq, fmpq_poly

from .textfmt import fmt_frac, latex_frac, parse_frac

_ONE = fmpq_poly([1])
_ZERO = fmpq_poly([])


def _to_fmpq(x) -> fmpq:
    if isinstance(x, fmpq):
        return x
    x = Fraction(x)
    return fmpq(x.numerator, x.denominator)


def _to_fraction(c) -> Fraction:
    c = fmpq(c)
    return Fraction(int(c.p), int(c.q))


def _as_poly(x) -> fmpq_poly:
    if isinstance(x, fmpq_poly):
        return x
    return fmpq_poly([_to_fmpq(x)])


class RationalFunction:
    __slots__ = ("num", "den")

    def __init__(self, num=0, den=None, *, reduced: bool = False):
        num = _as_poly(num)
        den = _ONE if den is None else _as_poly(den)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if num.is_zero():
            self.num, self.den = _ZERO, _ONE
            return
        if not reduced and den.degree() > 0:
            g = num.gcd(den)
            if g.degree() > 0:
                num, den = num // g, den // g
        lc = den.leading_coefficient()
        if lc != 1:
            inv = 1 / lc
            num, den = num * inv, den * inv
        self.num, self.den = num, den

    # -- constructors ------------------------------------------------------

    @classmethod
    def variable(cls) -> "RationalFunction":
        return cls(fmpq_poly([0, 1]), reduced=True)

    @classmethod
    def monomial(cls, k: int, c=1) -> "RationalFunction":
        if k >= 0:
            return cls(fmpq_poly([0] * k + [_to_fmpq(c)]), reduced=True)
        return cls(_to_fmpq(c), fmpq_poly([0] * (-k) + [1]), reduced=True)

    @classmethod
    def coerce(cls, x) -> "RationalFunction":
        return x if isinstance(x, RationalFunction) else cls(x)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        if o.num.is_zero():
            return self
        if self.num.is_zero():
            return o
        if self.den == o.den:
            return RationalFunction(self.num + o.num, self.den)
        return RationalFunction(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den, reduced=True)

    def __sub__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, fmpq)):
            if other == 0:
                return RationalFunction()
            return RationalFunction(self.num * _to_fmpq(other), self.den, reduced=True)
        o = _coerce(other)
        if o is NotImplemented:
            return o
        if self.num.is_zero() or o.num.is_zero():
            return RationalFunction()
        return RationalFunction(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        if o.num.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def __pow__(self, k: int):
        if k < 0:
            return RationalFunction(1) / self ** (-k)
        return RationalFunction(self.num ** k, self.den ** k, reduced=True)

    def derivative(self) -> "RationalFunction":
        if self.den.degree() == 0:
            return RationalFunction(self.num.derivative(), self.den, reduced=True)
        return RationalFunction(self.num.derivative() * self.den - self.num * self.den.derivative(),
                                self.den * self.den)

    # -- predicates & access -----------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.degree() == 0

    def __bool__(self):
        return not self.num.is_zero()

    def __eq__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((tuple(map(str, self.num.coeffs())), tuple(map(str, self.den.coeffs()))))

    def __call__(self, x) -> Fraction:
        x = _to_fmpq(x)
        d = self.den(x)
        if d == 0:
            raise ZeroDivisionError("evaluation at a pole")
        return _to_fraction(self.num(x) / d)

    def numerator_coeffs(self) -> list[Fraction]:
        return [_to_fraction(c) for c in self.num.coeffs()]

    def denominator_coeffs(self) -> list[Fraction]:
        return [_to_fraction(c) for c in self.den.coeffs()]

    def divides_power_of(self, poly: "RationalFunction | fmpq_poly", bound: int = 64) -> bool:
        """True if the denominator divides poly^e for some e <= bound."""
        p = poly.num if isinstance(poly, RationalFunction) else poly
        d = self.den
        for _ in range(bound + 1):
            if d.degree() == 0:
                return True
            g = d.gcd(p)
            if g.degree() == 0:
                return False
            d = d // g
        return d.degree() == 0

    # -- output ------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "num": [fmt_frac(c, always_ratio=True) for c in self.numerator_coeffs()],
            "den": [fmt_frac(c, always_ratio=True) for c in self.denominator_coeffs()],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RationalFunction":
        num = fmpq_poly([_to_fmpq(parse_frac(c)) for c in data["num"]])
        den = fmpq_poly([_to_fmpq(parse_frac(c)) for c in data["den"]])
        return cls(num, den)

    @staticmethod
    def _poly_text(coeffs, var="λ", latex=False) -> str:
        terms = []
        for k, c in enumerate(coeffs):
            if c == 0:
                continue
            mag = abs(c)
            sign = "-" if c < 0 else "+"
            num = latex_frac(mag) if latex else fmt_frac(mag)
            if k == 0:
                body = num
            else:
                pw = var if k == 1 else (f"{var}^{{{k}}}" if latex else f"{var}^{k}")
                body = pw if mag == 1 else (f"{num}{pw}" if latex else f"{num}*{pw}")
            terms.append((sign, body))
        if not terms:
            return "0"
        out = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out

    def __str__(self):
        n = self._poly_text(self.numerator_coeffs())
        if self.is_polynomial():
            return n
        return f"({n})/({self._poly_text(self.denominator_coeffs())})"

    __repr__ = __str__

    def latex(self, var=r"\lambda") -> str:
        n = self._poly_text(self.numerator_coeffs(), var, True)
        if self.is_polynomial():
            return n
        return r"\frac{%s}{%s}" % (n, self._poly_text(self.denominator_coeffs(), var, True))


def _coerce(x):
    if isinstance(x, RationalFunction):
        return x
    if isinstance(x, (int, Fraction, fmpq, fmpq_poly)):
        return RationalFunction(x)
    return NotImplemented


LAMBDA = RationalFunction.variable()
