"""Hypergeometric series and operators attached to the coset blocks.

A series is stored as

    constant * lam^p * sum_{s>=0} prod (alpha)_s / prod (beta)_s * lam^(ell*s)

with the factorial (1)_s kept as an ordinary denominator parameter, so a
balanced series has as many numerator as denominator parameters.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Sequence

from .errors import (
    DifferentCosets,
    LogarithmicCase,
    NotInM,
    PoleInBracket,
    PoleInPochhammer,
)
from .lattice import LatticeData, Vector, membership, shift_coords
from .textfmt import fmt_frac, latex_frac, parse_frac


# ---------------------------------------------------------------------------
# scalar helpers
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def bracket(z: Fraction, l: int) -> Fraction:
    """[z]_l: 1 for l = 0, 1/((z+1)...(z+l)) for l > 0, z(z-1)...(z+l+1) for l < 0."""
    z = Fraction(z)
    if l == 0:
        return Fraction(1)
    if l > 0:
        den = Fraction(1)
        for i in range(1, l + 1):
            den *= z + i
            if den == 0:
                raise PoleInBracket(f"[{z}]_{l} has a vanishing factor")
        return 1 / den
    out = Fraction(1)
    for i in range(-l):
        out *= z - i
    return out


def pochhammer(a: Fraction, s: int) -> Fraction:
    """Rising factorial (a)_s; for s < 0 this is 1/((a-1)...(a+s))."""
    a = Fraction(a)
    out = Fraction(1)
    if s >= 0:
        for i in range(s):
            out *= a + i
        return out
    for i in range(1, -s + 1):
        out *= a - i
    if out == 0:
        raise PoleInPochhammer(f"({a})_{s} has a vanishing factor")
    return 1 / out


def _multiset_minus(items: Sequence[Fraction], remove: Sequence[Fraction]) -> tuple[Fraction, ...]:
    left = Counter(items)
    left.subtract(Counter(remove))
    if any(v < 0 for v in left.values()):
        raise ValueError("removing parameters that are not present")
    return tuple(sorted(left.elements()))


# ---------------------------------------------------------------------------
# series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HGSeries:
    constant: Fraction
    prefactor_power: Fraction
    numerator: tuple[Fraction, ...]
    denominator: tuple[Fraction, ...]
    variable_power: int
    removed: tuple[Fraction, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "constant", Fraction(self.constant))
        p = Fraction(self.prefactor_power)
        object.__setattr__(self, "prefactor_power", int(p) if p.denominator == 1 else p)
        object.__setattr__(self, "numerator", tuple(sorted(map(Fraction, self.numerator))))
        object.__setattr__(self, "denominator", tuple(sorted(map(Fraction, self.denominator))))
        object.__setattr__(self, "removed", tuple(sorted(map(Fraction, self.removed))))
        if self.variable_power == 0:
            raise ValueError("variable power must be nonzero")
        if any(b <= 0 and b.denominator == 1 for b in self.denominator):
            raise PoleInPochhammer(f"denominator parameters {self.denominator} hit a pole")

    # -- value semantics ---------------------------------------------------

    @classmethod
    def constant_series(cls, c, power=0, ell: int = 1) -> "HGSeries":
        """c * lam^power, encoded with a zero numerator parameter."""
        return cls(Fraction(c), power, (Fraction(0),), (Fraction(1),), ell)

    @classmethod
    def zero(cls, ell: int = 1) -> "HGSeries":
        return cls.constant_series(0, 0, ell)

    def is_zero(self) -> bool:
        return self.constant == 0

    def terminates_at(self) -> int | None:
        """Index of the first vanishing term, if a numerator parameter is a nonpositive integer."""
        hits = [-a for a in self.numerator if a <= 0 and a.denominator == 1]
        return int(min(hits)) + 1 if hits else None

    def coefficient(self, s: int) -> Fraction:
        c = self.constant
        for a in self.numerator:
            c *= pochhammer(a, s)
        for b in self.denominator:
            c /= pochhammer(b, s)
        return c

    def terms(self, count: int):
        """Yield (exponent, coefficient) for s = 0..count-1, using term ratios."""
        c = self.constant
        for s in range(count):
            yield self.prefactor_power + self.variable_power * s, c
            if c == 0:
                continue
            num = Fraction(1)
            for a in self.numerator:
                num *= a + s
            den = Fraction(1)
            for b in self.denominator:
                den *= b + s
            c = c * num / den

    # -- transformations ---------------------------------------------------

    def cancel(self) -> "HGSeries":
        common = Counter(self.numerator) & Counter(self.denominator)
        if not common:
            return self
        gone = tuple(common.elements())
        return HGSeries(
            self.constant,
            self.prefactor_power,
            _multiset_minus(self.numerator, gone),
            _multiset_minus(self.denominator, gone),
            self.variable_power,
            self.removed + gone,
        )

    def canonical(self) -> "HGSeries":
        """Cancelled form; terminating-at-one series collapse to constant * lam^p."""
        out = self.cancel()
        if out.is_zero():
            return HGSeries.zero(self.variable_power)
        if out.terminates_at() == 1:
            return HGSeries(out.constant, out.prefactor_power, (Fraction(0),), (Fraction(1),),
                            out.variable_power, out.removed)
        return out

    def is_constant(self) -> bool:
        return self.is_zero() or self.terminates_at() == 1

    def classical(self) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]] | None:
        """Upper and lower parameters of the pFq form, dropping one denominator 1."""
        if Fraction(1) not in self.denominator:
            return None
        return self.numerator, _multiset_minus(self.denominator, (Fraction(1),))

    # -- output ------------------------------------------------------------

    def label(self) -> str:
        cl = self.classical()
        if cl is None:
            return f"H[{len(self.numerator)};{len(self.denominator)}]"
        return f"{len(cl[0])}F{len(cl[1])}"

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        head = fmt_frac(self.constant)
        if self.prefactor_power != 0:
            pw = "λ" if self.prefactor_power == 1 else f"λ^{fmt_frac(Fraction(self.prefactor_power))}"
            head = {"1": pw, "-1": "-" + pw}.get(head, f"{head}*{pw}")
        if self.is_constant():
            return head
        cl = self.classical()
        up, low = cl if cl else (self.numerator, self.denominator)
        body = (f"{self.label()}({','.join(map(fmt_frac, up))};"
                f"{','.join(map(fmt_frac, low))};λ^{self.variable_power})")
        if head in ("1", "-1"):
            return head[:-1] + body
        return f"{head}*{body}"

    def latex(self) -> str:
        if self.is_zero():
            return "0"
        c = self.constant
        parts = []
        if c == -1:
            parts.append("-")
        elif c != 1 or (self.prefactor_power == 0 and self.is_constant()):
            parts.append(latex_frac(c))
        if self.prefactor_power != 0:
            p = self.prefactor_power
            parts.append(r"\lambda" if p == 1 else r"\lambda^{%s}" % fmt_frac(Fraction(p)))
        if self.is_constant():
            return "".join(parts)
        cl = self.classical()
        up, low = cl if cl else (self.numerator, self.denominator)
        if cl:
            name = r"{}_{%d}F_{%d}" % (len(up), len(low))
        else:
            name = r"{}_{%d}H_{%d}" % (len(up), len(low))
        parts.append(
            r"%s\left(\begin{matrix} %s \\ %s \end{matrix};\lambda^{%d}\right)"
            % (name, ", ".join(map(latex_frac, up)) or r"-",
               ", ".join(map(latex_frac, low)) or r"-", self.variable_power)
        )
        return r"\,".join(p for p in parts if p)

    def to_dict(self) -> dict:
        return {
            "constant": fmt_frac(self.constant, always_ratio=True),
            "prefactor_power": fmt_frac(Fraction(self.prefactor_power), always_ratio=True),
            "numerator": [fmt_frac(a, always_ratio=True) for a in self.numerator],
            "denominator": [fmt_frac(b, always_ratio=True) for b in self.denominator],
            "variable_power": self.variable_power,
            "removed": [fmt_frac(r, always_ratio=True) for r in self.removed],
            "text": str(self),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HGSeries":
        return cls(
            parse_frac(data["constant"]),
            parse_frac(data["prefactor_power"]),
            tuple(map(parse_frac, data["numerator"])),
            tuple(map(parse_frac, data["denominator"])),
            int(data["variable_power"]),
            tuple(map(parse_frac, data.get("removed", ()))),
        )


# ---------------------------------------------------------------------------
# closed-form entries
# ---------------------------------------------------------------------------


def _closed_form(lat: LatticeData, uc, b: Vector) -> HGSeries:
    sd = shift_coords(lat, uc, b)
    v = lat.coords[b]
    ells, ell0 = lat.ells, lat.ell0
    const = Fraction((-ell0) ** sd.s0, factorial(sd.s0))
    for vj, sj, lj in zip(v, sd.s, ells):
        const *= bracket(-vj, sj) * Fraction(lj) ** sj
    num = [(vj - sj + i) / lj for vj, sj, lj in zip(v, sd.s, ells) for i in range(lj)]
    den = [Fraction(sd.s0 + i, ell0) for i in range(1, ell0 + 1)]
    return HGSeries(const, sd.s0, num, den, ell0)


def diagonal_series(lat: LatticeData, b: Vector) -> HGSeries:
    v = lat.coords[b]
    num = [(vj + i) / lj for vj, lj in zip(v, lat.ells) for i in range(lj)]
    den = [Fraction(i, lat.ell0) for i in range(1, lat.ell0 + 1)]
    return HGSeries(Fraction(1), 0, num, den, lat.ell0)


def entry_series(lat: LatticeData, b_row: Vector, b_col: Vector) -> HGSeries:
    """Uncancelled entry of the solution matrix: the functional of ``b_col`` on x^``b_row``."""
    if lat.coset_of[b_row] != lat.coset_of[b_col]:
        raise DifferentCosets(f"{b_row} and {b_col} lie in different cosets")
    return _closed_form(lat, lat.coords[b_row], b_col)


def general_entry(lat: LatticeData, u: Sequence[int], b: Vector) -> HGSeries:
    """The functional of basis point ``b`` evaluated on x^u for any u in M."""
    uc = membership(u, lat.cmap)
    if uc is None:
        raise NotInM(f"{tuple(u)} is not in M")
    if lat.coset_of_point(tuple(u), uc) != lat.coset_of[b]:
        return _zero(lat.ell0)
    if lat.is_interior(b):
        return _closed_form(lat, uc, b)
    # boundary b: nonzero only on the translate of b by the face containing it
    v = lat.coords[b]
    const = Fraction(1)
    for uj, vj, lj in zip(uc, v, lat.ells):
        t = uj - vj
        if t.denominator != 1 or t < 0 or (vj == 0 and t != 0):
            return HGSeries.zero(lat.ell0)
        const *= Fraction(lj) ** (-int(t)) * bracket(-vj, -int(t))
    return HGSeries.constant_series(const, 0, lat.ell0)


@lru_cache(maxsize=None)
def _zero(ell: int) -> HGSeries:
    return HGSeries.zero(ell)


def solution_block(lat: LatticeData, k: int) -> list[list[HGSeries]]:
    block = lat.cosets[k]
    return [[entry_series(lat, bi, bj) for bj in block] for bi in block]


def predicted_removed(lat: LatticeData, b: Vector) -> tuple[Fraction, ...]:
    """Parameters expected to cancel on the diagonal of ``b``: one per boundary partner."""
    out = []
    for bj in lat.cosets[lat.coset_of[b]]:
        if bj != b and not lat.is_interior(bj):
            s0 = shift_coords(lat, lat.coords[b], bj).s0
            out.append(1 - Fraction(s0, lat.ell0))
    return tuple(sorted(out))


class CancellationMismatch(AssertionError):
    pass


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------


def _factor_str(c: Fraction, var: str = "δ") -> str:
    if c == 0:
        return var
    sign = "+" if c > 0 else "-"
    return f"({var}{sign}{fmt_frac(abs(c))})"


def _product_str(consts: Sequence[Fraction], descending: bool, var: str = "δ") -> str:
    counts = Counter(consts)
    order = sorted(counts, reverse=descending)
    out = []
    for c in order:
        f = _factor_str(c, var)
        out.append(f if counts[c] == 1 else f"{f}^{counts[c]}")
    return "".join(out) or "1"


def _product_latex(consts: Sequence[Fraction], descending: bool, var: str) -> str:
    counts = Counter(consts)
    out = []
    for c in sorted(counts, reverse=descending):
        if c == 0:
            f = var
        else:
            f = r"(%s %s %s)" % (var, "+" if c > 0 else "-", latex_frac(abs(c)))
        out.append(f if counts[c] == 1 else "%s^{%d}" % (f, counts[c]))
    return "".join(out) or "1"


@dataclass(frozen=True)
class HGOperator:
    """prod(delta + ell*beta - ell) - lam^ell * prod(delta + ell*alpha)."""

    ell: int
    alphas: tuple[Fraction, ...]
    betas: tuple[Fraction, ...]

    def __post_init__(self):
        a = tuple(sorted(map(Fraction, self.alphas)))
        b = sorted(map(Fraction, self.betas))
        if len(a) != len(b) or not a:
            raise ValueError("operator needs equally many, and at least one, alpha and beta")
        lead = max(b)
        b.remove(lead)
        object.__setattr__(self, "alphas", a)
        object.__setattr__(self, "betas", (lead,) + tuple(sorted(b, reverse=True)))

    @property
    def order(self) -> int:
        return len(self.alphas)

    @property
    def lower_shifts(self) -> tuple[Fraction, ...]:
        return tuple(self.ell * b - self.ell for b in self.betas)

    @property
    def upper_shifts(self) -> tuple[Fraction, ...]:
        return tuple(self.ell * a for a in self.alphas)

    def x_form(self) -> "HGOperator":
        return HGOperator(1, self.alphas, self.betas)

    def lower_poly(self, e: Fraction) -> Fraction:
        out = Fraction(1)
        for c in self.lower_shifts:
            out *= e + c
        return out

    def upper_poly(self, e: Fraction) -> Fraction:
        out = Fraction(1)
        for c in self.upper_shifts:
            out *= e + c
        return out

    def delta_coefficients(self) -> tuple[list[Fraction], list[Fraction]]:
        """Coefficients (in powers of delta) of the lower and upper products."""
        def expand(roots):
            poly = [Fraction(1)]
            for c in roots:
                nxt = [Fraction(0)] * (len(poly) + 1)
                for i, p in enumerate(poly):
                    nxt[i] += c * p
                    nxt[i + 1] += p
                poly = nxt
            return poly
        return expand(self.lower_shifts), expand(self.upper_shifts)

    def text(self, var: str | None = None) -> str:
        var = var or ("x" if self.ell == 1 else "λ")
        power = "" if self.ell == 1 else f"^{self.ell}"
        return (f"{_product_str(self.lower_shifts, True)} - "
                f"{var}{power}{_product_str(self.upper_shifts, False)}")

    __str__ = text

    def latex(self, var: str | None = None) -> str:
        var = var or ("x" if self.ell == 1 else r"\lambda")
        d = r"\delta_{%s}" % var
        power = "" if self.ell == 1 else "^{%d}" % self.ell
        return (f"{_product_latex(self.lower_shifts, True, d)} - "
                f"{var}{power}{_product_latex(self.upper_shifts, False, d)}")

    def to_dict(self) -> dict:
        return {
            "ell": self.ell,
            "alphas": [fmt_frac(a, always_ratio=True) for a in self.alphas],
            "betas": [fmt_frac(b, always_ratio=True) for b in self.betas],
            "text": self.text(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HGOperator":
        return cls(int(data["ell"]), tuple(map(parse_frac, data["alphas"])),
                   tuple(map(parse_frac, data["betas"])))


def row_operator(lat: LatticeData, b: Vector) -> HGOperator:
    """Hypergeometric operator (in lam, power ell0) killing the row of ``b``."""
    diag = diagonal_series(lat, b).cancel()
    expected = predicted_removed(lat, b)
    if diag.removed != expected:
        raise CancellationMismatch(
            f"diagonal of {b} cancelled {list(map(str, diag.removed))}, "
            f"expected {list(map(str, expected))}"
        )
    return HGOperator(lat.ell0, diag.numerator, diag.denominator)


def substitute_power(op: HGOperator, ell: int) -> HGOperator:
    """x -> lam^ell on an operator given in x (ell = 1)."""
    if op.ell != 1:
        raise ValueError("substitute_power expects an operator in x")
    if ell <= 0:
        raise ValueError("ell must be positive")
    return HGOperator(ell, op.alphas, op.betas)


def conjugate_shift(op: HGOperator, c) -> HGOperator:
    """Add c to every (delta + .) factor; kills lam^(-c) times the solutions of ``op``."""
    c = Fraction(c)
    return HGOperator(op.ell, tuple(a + c / op.ell for a in op.alphas),
                      tuple(b + c / op.ell for b in op.betas))


@dataclass(frozen=True)
class InfinitySolutions:
    operator_at_zero: HGOperator
    solutions: tuple[HGSeries, ...]
    logarithmic: bool
    exponents: tuple[Fraction, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "operator_at_zero": self.operator_at_zero.to_dict(),
            "solutions": [s.to_dict() for s in self.solutions],
            "logarithmic": self.logarithmic,
            "note": ("repeated local exponents: remaining solutions involve log(lam)"
                     if self.logarithmic else ""),
        }


def local_solutions(op: HGOperator) -> tuple[list[HGSeries], bool]:
    """Non-logarithmic series solutions of an x-form operator at the origin.

    Returns the solutions x^(1-beta) pFq(alpha+1-beta; betas+1-beta; x), one per
    distinct beta whose shifted denominators avoid poles, and whether some
    solutions are missing (logarithmic case).
    """
    sols = []
    for bj in sorted(set(op.betas), reverse=True):
        shift = 1 - bj
        den = [b + shift for b in op.betas]
        if any(x <= 0 and x.denominator == 1 for x in den):
            continue
        sols.append(HGSeries(1, shift, [a + shift for a in op.alphas], den, 1))
    return sols, len(sols) < op.order


def infinity_solutions(op: HGOperator, strict: bool = False) -> InfinitySolutions:
    """Series solutions at lam = infinity of the lam-form operator ``op``."""
    a1 = min(op.alphas)
    betas0 = [1 - a + a1 for a in op.alphas]
    alphas0 = [1 - b + a1 for b in op.betas]
    at_zero = HGOperator(1, alphas0, betas0)
    local, missing = local_solutions(at_zero)
    log_case = missing or len(set(at_zero.betas)) < at_zero.order
    if log_case and strict:
        raise LogarithmicCase(f"operator {at_zero} has repeated local exponents at 0")
    ell = op.ell
    sols = tuple(
        HGSeries(s.constant, -ell * a1 - ell * Fraction(s.prefactor_power),
                 s.numerator, s.denominator, -ell)
        for s in local
    )
    return InfinitySolutions(at_zero, sols, log_case,
                             tuple(1 - b for b in sorted(set(at_zero.betas), reverse=True)))
