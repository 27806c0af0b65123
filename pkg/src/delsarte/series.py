"""Truncated power series over Q and the numerical consistency checks.

Series are sparse: most entries of a coset block live on a single residue
class of exponents modulo ell0, so a dict of nonzero coefficients is both
smaller and faster than a dense list.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial, lcm
from typing import Mapping, Sequence

from .errors import NotInM, TruncationTooSmall
from .hyper import HGOperator, HGSeries, bracket, entry_series, row_operator
from .lattice import LatticeData, Vector, membership
from .ratfunc import RationalFunction


class TruncatedSeries:
    """sum c_e t^e known exactly for all exponents e < order.

    ``chart`` is "lambda" (t = lam) or "mu" (t = 1/lam).  Exponents may be
    negative or fractional.
    """

    __slots__ = ("coeffs", "order", "chart")

    def __init__(self, coeffs: Mapping | None = None, order=0, chart: str = "lambda"):
        self.order = order
        self.chart = chart
        self.coeffs = {e: Fraction(c) for e, c in (coeffs or {}).items() if c != 0 and e < order}

    # -- construction --------------------------------------------------------

    @classmethod
    def from_polynomial(cls, coeffs: Sequence, order, chart="lambda") -> "TruncatedSeries":
        return cls({k: c for k, c in enumerate(coeffs)}, order, chart)

    @classmethod
    def from_rational(cls, f: RationalFunction, order) -> "TruncatedSeries":
        """Laurent expansion at lam = 0, exact below ``order``."""
        num = f.numerator_coeffs()
        den = f.denominator_coeffs()
        k = next(i for i, c in enumerate(den) if c != 0)
        den = den[k:]
        prec = order + k
        inv = _sparse_inverse(den, prec)
        out: dict = {}
        for i, a in enumerate(num):
            if a == 0:
                continue
            for j, b in inv.items():
                e = i + j
                if e >= prec:
                    continue
                out[e - k] = out.get(e - k, 0) + a * b
        return cls(out, order)

    def copy(self) -> "TruncatedSeries":
        s = TruncatedSeries(order=self.order, chart=self.chart)
        s.coeffs = dict(self.coeffs)
        return s

    # -- inspection ----------------------------------------------------------

    def valuation(self):
        """Smallest exponent with nonzero coefficient, or ``order`` if none is known."""
        return min(self.coeffs) if self.coeffs else self.order

    def coefficient(self, e) -> Fraction:
        if e >= self.order:
            raise TruncationTooSmall(f"exponent {e} is beyond the truncation order {self.order}")
        return self.coeffs.get(e, Fraction(0))

    def is_zero(self) -> bool:
        return not self.coeffs

    def first_nonzero(self):
        return min(self.coeffs) if self.coeffs else None

    def truncate(self, order) -> "TruncatedSeries":
        return TruncatedSeries(self.coeffs, min(order, self.order), self.chart)

    def dense(self, start: int = 0) -> list[Fraction]:
        return [self.coeffs.get(e, Fraction(0)) for e in range(start, int(self.order))]

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        if self.chart != other.chart:
            return False
        o = min(self.order, other.order)
        return ({e: c for e, c in self.coeffs.items() if e < o}
                == {e: c for e, c in other.coeffs.items() if e < o})

    def __repr__(self):
        body = " + ".join(f"{c}*t^{e}" for e, c in sorted(self.coeffs.items())) or "0"
        return f"TruncatedSeries({body} + O(t^{self.order}), chart={self.chart})"

    # -- arithmetic ----------------------------------------------------------

    def _check(self, other):
        if self.chart != other.chart:
            raise ValueError("series live in different charts")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = TruncatedSeries({0: other}, self.order, self.chart)
        self._check(other)
        order = min(self.order, other.order)
        out = {e: c for e, c in self.coeffs.items() if e < order}
        for e, c in other.coeffs.items():
            if e < order:
                out[e] = out.get(e, 0) + c
        return TruncatedSeries(out, order, self.chart)

    __radd__ = __add__

    def __neg__(self):
        s = TruncatedSeries(order=self.order, chart=self.chart)
        s.coeffs = {e: -c for e, c in self.coeffs.items()}
        return s

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "TruncatedSeries":
        s = TruncatedSeries(order=self.order, chart=self.chart)
        if c != 0:
            s.coeffs = {e: v * c for e, v in self.coeffs.items()}
        return s

    def shift(self, k) -> "TruncatedSeries":
        """Multiply by t^k."""
        s = TruncatedSeries(order=self.order + k, chart=self.chart)
        s.coeffs = {e + k: c for e, c in self.coeffs.items()}
        return s

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        self._check(other)
        order = min(self.order + other.valuation(), other.order + self.valuation())
        out: dict = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = e1 + e2
                if e < order:
                    out[e] = out.get(e, 0) + c1 * c2
        return TruncatedSeries(out, order, self.chart)

    __rmul__ = __mul__

    def derivative(self) -> "TruncatedSeries":
        """d/dt in the series' own variable."""
        s = TruncatedSeries(order=self.order - 1, chart=self.chart)
        s.coeffs = {e - 1: e * c for e, c in self.coeffs.items() if e != 0}
        return s

    def euler(self) -> "TruncatedSeries":
        """t d/dt."""
        s = TruncatedSeries(order=self.order, chart=self.chart)
        s.coeffs = {e: e * c for e, c in self.coeffs.items() if e != 0}
        return s

    def to_dict(self) -> dict:
        return {
            "chart": self.chart,
            "order": str(self.order),
            "coefficients": {str(e): f"{c.numerator}/{c.denominator}"
                             for e, c in sorted(self.coeffs.items())},
        }


def _sparse_inverse(den: Sequence[Fraction], prec: int) -> dict:
    """Coefficients of 1/den below ``prec``; den[0] must be nonzero."""
    d0 = den[0]
    terms = [(i, c) for i, c in enumerate(den) if i and c != 0]
    out: dict = {}
    if prec <= 0:
        return out
    inv0 = 1 / Fraction(d0)
    out[0] = inv0
    for nidx in range(1, prec):
        acc = Fraction(0)
        for i, c in terms:
            if i > nidx:
                break
            prev = out.get(nidx - i)
            if prev is not None:
                acc += c * prev
        if acc:
            out[nidx] = -acc * inv0
    return out


# ---------------------------------------------------------------------------
# expansion of closed forms
# ---------------------------------------------------------------------------


def expand(series: HGSeries, T) -> TruncatedSeries:
    """Truncate a hypergeometric series to exponents below T in its natural chart.

    Positive variable power expands in lam; negative variable power expands in
    mu = 1/lam with the prefactor lam^p read as mu^(-p).
    """
    if series.variable_power > 0:
        chart, start, step = "lambda", series.prefactor_power, series.variable_power
    else:
        chart, start, step = "mu", -series.prefactor_power, -series.variable_power
    out = TruncatedSeries(order=T, chart=chart)
    if series.is_zero() or start >= T:
        return out
    count = int((T - start - 1) // step) + 1
    for s, (_, c) in enumerate(series.terms(count)):
        if c != 0:
            out.coeffs[start + step * s] = c
    return out


# ---------------------------------------------------------------------------
# brute-force coefficient oracle
# ---------------------------------------------------------------------------


class _Oracle:
    """Direct summation over (s0, s_1..s_m) of the defining double sum.

    Integrality of s = v - u' - s0*a0' is tested through residues of the
    scaled integer vectors, which makes a scan over all s0 < T a dict lookup.
    """

    def __init__(self, lat: LatticeData):
        self.lat = lat
        dens = [x.denominator for c in lat.coords.values() for x in c]
        dens += [x.denominator for x in lat.a0_coords]
        self.D = lcm(*dens)
        self.step = tuple(int(x * self.D) for x in lat.a0_coords)
        self.scaled_v = {b: tuple(int(x * self.D) for x in c) for b, c in lat.coords.items()}
        self._scaled_u: dict = {}
        self._tables: dict = {}

    def table(self, T: int) -> dict:
        if T not in self._tables:
            tab: dict = {}
            for s0 in range(T):
                key = tuple((s0 * x) % self.D for x in self.step)
                tab.setdefault(key, []).append(s0)
            self._tables[T] = tab
        return self._tables[T]

    def series(self, b: Vector, u: Vector, uc, T: int) -> TruncatedSeries:
        lat, D = self.lat, self.D
        v = lat.coords[b]
        su = self._scaled_u.get(u)
        if su is None:
            su = self._scaled_u[u] = tuple(int(x * D) for x in uc)
        w = tuple(x - y for x, y in zip(self.scaled_v[b], su))
        out = TruncatedSeries(order=T)
        for s0 in self.table(T).get(tuple(x % D for x in w), ()):
            s = [(wj - s0 * st) // D for wj, st in zip(w, self.step)]
            if any(x > 0 for x in s):
                continue
            term = Fraction((-lat.ell0) ** s0, factorial(s0))
            for vj, sj, lj in zip(v, s, lat.ells):
                if term == 0:
                    break
                term *= bracket(-vj, sj) * Fraction(lj) ** sj
            if term:
                out.coeffs[s0] = out.coeffs.get(s0, 0) + term
        return out


@lru_cache(maxsize=32)
def _oracle(lat: LatticeData) -> _Oracle:
    return _Oracle(lat)


def brute_force_G(lat: LatticeData, b: Vector, u: Sequence[int], T: int) -> TruncatedSeries:
    uc = membership(u, lat.cmap)
    if uc is None:
        raise NotInM(f"{tuple(u)} is not in M")
    return _oracle(lat).series(b, tuple(u), uc, T)


# ---------------------------------------------------------------------------
# operators acting on series
# ---------------------------------------------------------------------------


def apply_hg(op: HGOperator, y: TruncatedSeries) -> TruncatedSeries:
    """Apply prod(delta + ell*beta - ell) - lam^ell prod(delta + ell*alpha)."""
    out: dict = {}
    if y.chart == "lambda":
        order = y.order
        for e, c in y.coeffs.items():
            out[e] = out.get(e, 0) + op.lower_poly(e) * c
            out[e + op.ell] = out.get(e + op.ell, 0) - op.upper_poly(e) * c
    else:
        # delta_lam = -delta_mu and lam^ell = mu^(-ell)
        order = y.order - op.ell
        for e, c in y.coeffs.items():
            out[e] = out.get(e, 0) + op.lower_poly(-e) * c
            out[e - op.ell] = out.get(e - op.ell, 0) - op.upper_poly(-e) * c
    return TruncatedSeries(out, order, y.chart)


def apply_ode(coeffs: Sequence[RationalFunction], y: TruncatedSeries) -> TruncatedSeries:
    """Apply sum_i coeffs[i](lam) * d^i/dlam^i to a lam-series."""
    if y.chart != "lambda":
        raise ValueError("generic ODEs are applied in the lam chart")
    derivs = [y]
    for _ in range(len(coeffs) - 1):
        derivs.append(derivs[-1].derivative())
    terms = []
    floor_exp = None
    for c, dy in zip(coeffs, derivs):
        if c.is_zero():
            continue
        # expand c far enough that dy's precision, not c's, is the limit
        vd = dy.valuation()
        lowest_c = -next(i for i, x in enumerate(c.denominator_coeffs()) if x != 0)
        cs = TruncatedSeries.from_rational(c, max(dy.order + lowest_c - vd, lowest_c + 1))
        if not dy.is_zero():
            lo = lowest_c + vd
            floor_exp = lo if floor_exp is None else min(floor_exp, lo)
        terms.append(cs * dy)
    if not terms:
        return TruncatedSeries(order=y.order, chart=y.chart)
    out = terms[0]
    for t in terms[1:]:
        out = out + t
    if floor_exp is not None and out.order <= floor_exp:
        raise TruncationTooSmall(
            f"no coefficient survives: valid order {out.order} <= lowest exponent {floor_exp}")
    return out


def apply_operator(op, y: TruncatedSeries) -> TruncatedSeries:
    if isinstance(op, HGOperator):
        return apply_hg(op, y)
    return apply_ode(list(op), y)


# ---------------------------------------------------------------------------
# end-to-end verification
# ---------------------------------------------------------------------------


def matrix_residual(G: list[list[TruncatedSeries]], C: list[list[RationalFunction]]):
    """d/dlam G - C G, entrywise."""
    n = len(G)
    T = max(g.order for row in G for g in row)
    cexp = [[TruncatedSeries.from_rational(c, T) if not c.is_zero() else None for c in row]
            for row in C]
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = G[i][j].derivative()
            for k in range(n):
                if cexp[i][k] is not None and not G[k][j].is_zero():
                    acc = acc - cexp[i][k] * G[k][j]
            row.append(acc)
        out.append(row)
    return out


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: dict

    def to_dict(self) -> dict:
        return {"name": self.name, "status": "pass" if self.passed else "fail", **self.detail}


def _entry_status(r: TruncatedSeries) -> dict:
    return {
        "valid_below": str(r.order),
        "first_nonzero": None if r.is_zero() else str(r.first_nonzero()),
    }


def verify_fundamental(lat: LatticeData, k: int, T: int | None = None, reducer=None,
                       corrupt: tuple[int, int] | None = None,
                       check_annihilators: bool = True) -> dict:
    """Check dG = C G and the row operators for coset ``k`` through order T.

    ``corrupt=(i, j)`` adds 1 to C[i][j] before checking (negative control).
    """
    from .reduction import Reducer

    T = T if T is not None else 6 * lat.ell0 + 1
    reducer = reducer or Reducer(lat)
    block = lat.cosets[k]
    raw = [[entry_series(lat, bi, bj) for bj in block] for bi in block]
    G = [[expand(s.cancel(), T) for s in row] for row in raw]
    C = [list(row) for row in reducer.connection_matrix(k).entries]
    if corrupt is not None:
        i, j = corrupt
        C[i][j] = C[i][j] + 1
    checks: list[CheckResult] = []

    resid = matrix_residual(G, C)
    entries = []
    ok = True
    for i, row in enumerate(resid):
        for j, r in enumerate(row):
            st = _entry_status(r)
            st.update(row=list(block[i]), col=list(block[j]))
            entries.append(st)
            ok &= r.is_zero()
    need = T - lat.ell0 - 1
    min_valid = min(r.order for row in resid for r in row)
    checks.append(CheckResult("dG = C G", ok and min_valid >= need,
                              {"valid_below": str(min_valid), "entries": entries}))

    for i, bi in enumerate(block):
        op = row_operator(lat, bi)
        kills = []
        for j in range(len(block)):
            if raw[i][j].is_zero():
                continue
            r = apply_hg(op, G[i][j])
            kills.append(r.is_zero() and r.order >= T - lat.ell0)
        checks.append(CheckResult(f"row operator {list(bi)}", all(kills),
                                  {"operator": op.text(), "entries_checked": len(kills)}))
        if check_annihilators:
            ode = reducer.annihilator(bi)
            expected = lat.R[k] + (0 if lat.is_interior(bi) else 1)
            kills = []
            for j in range(len(block)):
                if raw[i][j].is_zero():
                    continue
                r = apply_ode(ode, G[i][j])
                kills.append(r.is_zero() and r.order >= T - lat.ell0)
            checks.append(CheckResult(
                f"annihilator {list(bi)}", all(kills) and len(ode) - 1 == expected,
                {"order": len(ode) - 1, "expected_order": expected, "entries_checked": len(kills)}))

    return {
        "coset": k,
        "points": [list(b) for b in block],
        "T": T,
        "corrupted": list(corrupt) if corrupt else None,
        "all_pass": all(c.passed for c in checks),
        "checks": [c.to_dict() for c in checks],
    }
