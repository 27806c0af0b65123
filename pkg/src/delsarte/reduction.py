"""Normal forms in the quotient module and the Picard-Fuchs data derived from them.

Monomials x^u are handled through their coordinates u' (u = sum u'_j a_j);
u lies in the basis set exactly when every coordinate is < 1.  The defining
relation is

    x^(u + a_j) = lam * x^(u + a0) - (u'_j / ell_j) * x^u      (u in M).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Mapping, Sequence

from .errors import NotInM, NotReducible
from .hyper import HGOperator
from .lattice import Coords, LatticeData, Vector, membership
from .ratfunc import LAMBDA, RationalFunction

ONE = RationalFunction(1)


class BasisCombination:
    """Finite Q(lam)-combination of basis monomials, keyed by basis point."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Vector, RationalFunction] | None = None):
        self.terms = {b: RationalFunction.coerce(c) for b, c in (terms or {}).items()
                      if not RationalFunction.coerce(c).is_zero()}

    def __add__(self, other: "BasisCombination") -> "BasisCombination":
        out = dict(self.terms)
        for b, c in other.terms.items():
            s = out[b] + c if b in out else c
            if s.is_zero():
                out.pop(b, None)
            else:
                out[b] = s
        res = BasisCombination()
        res.terms = out
        return res

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, f) -> "BasisCombination":
        f = RationalFunction.coerce(f)
        res = BasisCombination()
        if not f.is_zero():
            res.terms = {b: c * f for b, c in self.terms.items()}
        return res

    __rmul__ = scale

    def __mul__(self, f):
        return self.scale(f)

    def __getitem__(self, b) -> RationalFunction:
        return self.terms.get(b, RationalFunction())

    def __eq__(self, other):
        if not isinstance(other, BasisCombination):
            return NotImplemented
        return self.terms == other.terms

    def __repr__(self):
        return "BasisCombination({%s})" % ", ".join(f"{b}: {c}" for b, c in sorted(self.terms.items()))

    def to_dict(self) -> list:
        return [{"point": list(b), "coefficient": c.to_dict()} for b, c in sorted(self.terms.items())]


@dataclass(frozen=True)
class ConnectionMatrix:
    k: int
    points: tuple[Vector, ...]
    entries: tuple[tuple[RationalFunction, ...], ...]

    def to_dict(self) -> dict:
        return {
            "coset": self.k,
            "points": [list(b) for b in self.points],
            "entries": [[c.to_dict() for c in row] for row in self.entries],
        }

    def latex(self) -> str:
        rows = [" & ".join(c.latex() for c in row) for row in self.entries]
        return "\\begin{pmatrix}\n" + " \\\\\n".join(rows) + "\n\\end{pmatrix}"


class Reducer:
    """Normal forms with respect to the basis X^B, memoized per monomial."""

    def __init__(self, lat: LatticeData):
        self.lat = lat
        self.ells = lat.ells
        self.ell0 = lat.ell0
        self.a0 = lat.a0_coords
        self.lam_pow = [LAMBDA ** k for k in range(self.ell0 + 1)]
        self.cycle_factor = 1 / (1 - LAMBDA ** self.ell0)
        self._memo: dict[Coords, BasisCombination] = {}
        self._cmat: dict[int, ConnectionMatrix] = {}
        self._ann: dict[Vector, list[RationalFunction]] = {}

    # -- single rewrites -----------------------------------------------------

    def _coords(self, u: Sequence[int]) -> Coords:
        c = membership(u, self.lat.cmap)
        if c is None:
            raise NotInM(f"{tuple(u)} is not in M")
        return c

    def rewrite_once(self, w: Sequence[int], j: int | None = None) -> dict:
        """One relation step on x^w, as {monomial: coefficient}; j is 0-based."""
        c = self._coords(w)
        if j is None:
            j = next((i for i, x in enumerate(c) if x >= 1), None)
            if j is None:
                raise NotReducible(f"{tuple(w)} is a basis point")
        elif c[j] < 1:
            raise NotReducible(f"coordinate {j} of {tuple(w)} is below 1")
        y = tuple(x - (i == j) for i, x in enumerate(c))
        up = tuple(x + a for x, a in zip(y, self.a0))
        cmap = self.lat.cmap
        out = {cmap.integral_point(up): LAMBDA}
        coef = -y[j] / self.ells[j]
        out[cmap.integral_point(y)] = RationalFunction(coef)
        return out

    # -- normal forms --------------------------------------------------------

    def _is_basis(self, c: Coords) -> bool:
        return all(x < 1 for x in c)

    def _basis(self, c: Coords) -> BasisCombination:
        res = BasisCombination()
        res.terms = {self.lat.by_coords[c]: ONE}
        return res

    def nf_coords(self, c: Coords) -> BasisCombination:
        if self._is_basis(c):
            return self._basis(c)
        hit = self._memo.get(c)
        if hit is not None:
            return hit
        res = self._chain(c)
        self._memo[c] = res
        return res

    def _chain(self, c0: Coords) -> BasisCombination:
        """Walk x^c -> lam x^(c - e_j + a0) with the smallest usable j."""
        lower = BasisCombination()
        cur = c0
        used = [0] * len(c0)
        for k in range(self.ell0):
            j = next(i for i, x in enumerate(cur) if x >= 1)
            y = tuple(x - (i == j) for i, x in enumerate(cur))
            coef = -y[j] / self.ells[j]
            if coef:
                lower = lower + self.nf_coords(y).scale(self.lam_pow[k] * coef)
            used[j] += 1
            cur = tuple(x + a for x, a in zip(y, self.a0))
            if self._is_basis(cur) or cur in self._memo:
                return lower + self.nf_coords(cur).scale(self.lam_pow[k + 1])
        # x^c0 = lam^ell0 x^cur + lower; swap cur back to c0 one step at a time
        swaps = BasisCombination()
        excess = [u - l for u, l in zip(used, self.ells)]
        cur = list(cur)
        while any(excess):
            jj = next(i for i, e in enumerate(excess) if e < 0)   # coordinate above target
            j = next(i for i, e in enumerate(excess) if e > 0)    # coordinate below target
            y = tuple(x - (i == jj) for i, x in enumerate(cur))
            coef = y[j] / self.ells[j] - y[jj] / self.ells[jj]
            if coef:
                swaps = swaps + self.nf_coords(y).scale(coef)
            cur = [x + (i == j) for i, x in enumerate(y)]
            excess[jj] += 1
            excess[j] -= 1
        assert tuple(cur) == c0
        rhs = lower + swaps.scale(self.lam_pow[self.ell0])
        return rhs.scale(self.cycle_factor)

    def normal_form(self, expr) -> BasisCombination:
        """Normal form of a monomial (integer vector) or {monomial: coefficient} map."""
        if isinstance(expr, BasisCombination):
            return expr
        if isinstance(expr, Mapping):
            out = BasisCombination()
            # highest degree first, then lexicographic, for a reproducible traversal
            keys = sorted(expr, key=lambda u: (-sum(self._coords(u)), tuple(u)))
            for u in keys:
                out = out + self.nf_coords(self._coords(u)).scale(expr[u])
            return out
        return self.nf_coords(self._coords(expr))

    # -- linear-algebra cross-check -----------------------------------------

    def normal_form_linear(self, u: Sequence[int]) -> BasisCombination:
        """Normal form by solving every relation of each degree slice at once.

        Independent of the chain walk (no memo sharing); meant for small cases.
        """
        lat = self.lat
        c = self._coords(u)
        block = lat.cosets[lat.coset_index(u)]
        top = sum(c)
        known: dict[Coords, BasisCombination] = {lat.coords[b]: self._basis(lat.coords[b])
                                                 for b in block}
        slices: dict[Fraction, list[Coords]] = {}
        for b in block:
            vb = lat.coords[b]
            room = top - sum(vb)
            if room < 0:
                continue
            for n in _compositions_upto(len(vb), int(room)):
                w = tuple(x + k for x, k in zip(vb, n))
                if not self._is_basis(w):
                    slices.setdefault(sum(w), []).append(w)
        for deg in sorted(slices):
            unknown = sorted(slices[deg])
            index = {w: i for i, w in enumerate(unknown)}
            rows = []
            for w in unknown:
                for j, x in enumerate(w):
                    if x < 1:
                        continue
                    y = tuple(t - (i == j) for i, t in enumerate(w))
                    up = tuple(t + a for t, a in zip(y, self.a0))
                    coef = [RationalFunction() for _ in unknown]
                    coef[index[w]] = ONE
                    rhs = known[y].scale(-y[j] / self.ells[j]) if y[j] else BasisCombination()
                    if up in index:
                        coef[index[up]] = coef[index[up]] - LAMBDA
                    else:
                        rhs = rhs + known[up].scale(LAMBDA)
                    rows.append((coef, rhs))
            sol = _solve_rows(rows, len(unknown))
            for w, val in zip(unknown, sol):
                known[w] = val
        return known[c]

    # -- Picard-Fuchs data ---------------------------------------------------

    def connection_matrix(self, k: int) -> ConnectionMatrix:
        if k not in self._cmat:
            lat = self.lat
            block = lat.cosets[k]
            rows = []
            for b in block:
                c = tuple(x + a for x, a in zip(lat.coords[b], self.a0))
                nf = self.nf_coords(c).scale(-self.ell0)
                rows.append(tuple(nf[bj] for bj in block))
            self._cmat[k] = ConnectionMatrix(k, block, tuple(rows))
        return self._cmat[k]

    def apply_D(self, vec: list[RationalFunction], C: ConnectionMatrix) -> list[RationalFunction]:
        """Coefficient vector of D_lam applied to sum vec[i] x^(b_i)."""
        n = len(vec)
        out = [f.derivative() for f in vec]
        for i, f in enumerate(vec):
            if f.is_zero():
                continue
            row = C.entries[i]
            for j in range(n):
                if not row[j].is_zero():
                    out[j] = out[j] + f * row[j]
        return out

    def annihilator(self, b: Vector) -> list[RationalFunction]:
        """Monic minimal ODE sum c_i d^i/dlam^i killing x^b, as [c_0, ..., c_r = 1]."""
        if b in self._ann:
            return self._ann[b]
        lat = self.lat
        k = lat.coset_of[b]
        C = self.connection_matrix(k)
        block = C.points
        n = len(block)
        vec = [ONE if p == b else RationalFunction() for p in block]
        echelon: list[tuple[int, list[RationalFunction], list[RationalFunction]]] = []
        for t in range(n + 1):
            red = list(vec)
            combo = [RationalFunction() for _ in range(t)] + [ONE]
            for piv, evec, ecombo in echelon:
                f = red[piv]
                if f.is_zero():
                    continue
                red = [r - f * e if not e.is_zero() else r for r, e in zip(red, evec)]
                combo = [c - f * (ecombo[i] if i < len(ecombo) else RationalFunction())
                         for i, c in enumerate(combo)]
            piv = next((i for i, r in enumerate(red) if not r.is_zero()), None)
            if piv is None:
                self._ann[b] = combo
                return combo
            inv = 1 / red[piv]
            echelon.append((piv, [r * inv for r in red], [c * inv for c in combo]))
            vec = self.apply_D(vec, C)
        raise ArithmeticError("no linear dependence found within the coset dimension")


def _compositions_upto(m: int, total: int):
    if m == 0:
        yield ()
        return
    for first in range(total + 1):
        for rest in _compositions_upto(m - 1, total - first):
            yield (first,) + rest


def _solve_rows(rows, nvars: int) -> list[BasisCombination]:
    """Solve sum_j coef[j] X_j = rhs over Q(lam); checks consistency of extra rows."""
    rows = [(list(c), r) for c, r in rows]
    pivots: list[int] = []
    r_i = 0
    for col in range(nvars):
        p = next((i for i in range(r_i, len(rows)) if not rows[i][0][col].is_zero()), None)
        if p is None:
            raise ArithmeticError("relations do not determine the slice")
        rows[r_i], rows[p] = rows[p], rows[r_i]
        coef, rhs = rows[r_i]
        inv = 1 / coef[col]
        coef = [c * inv for c in coef]
        rhs = rhs.scale(inv)
        rows[r_i] = (coef, rhs)
        for i in range(len(rows)):
            if i == r_i or rows[i][0][col].is_zero():
                continue
            f = rows[i][0][col]
            rows[i] = ([a - f * b for a, b in zip(rows[i][0], coef)], rows[i][1] - rhs.scale(f))
        pivots.append(col)
        r_i += 1
    for coef, rhs in rows[r_i:]:
        if rhs.terms:
            raise ArithmeticError("inconsistent relations in a degree slice")
    return [rows[i][1] for i in range(nvars)]


# ---------------------------------------------------------------------------
# hypergeometric operators as ODEs in d/dlam
# ---------------------------------------------------------------------------


def _stirling2(k: int) -> list[int]:
    """S(k, i) for i = 0..k."""
    return [sum((-1) ** (i - t) * comb(i, t) * t ** k for t in range(i + 1)) // factorial(i)
            for i in range(k + 1)]


def operator_as_ode(op: HGOperator, monic: bool = True) -> list[RationalFunction]:
    """Rewrite P(delta) - lam^ell Q(delta) as sum c_i(lam) (d/dlam)^i.

    Uses delta^k = sum_i S(k, i) lam^i d^i, S the Stirling numbers of the
    second kind.
    """
    low, up = op.delta_coefficients()
    r = op.order
    coeffs = []
    for i in range(r + 1):
        p = sum((low[k] * _stirling2(k)[i] for k in range(i, r + 1)), Fraction(0))
        q = sum((up[k] * _stirling2(k)[i] for k in range(i, r + 1)), Fraction(0))
        coeffs.append(LAMBDA ** i * (p - q * LAMBDA ** op.ell))
    if monic:
        lead = coeffs[-1]
        coeffs = [c / lead for c in coeffs]
    return coeffs


def ode_to_dict(coeffs: Sequence[RationalFunction]) -> dict:
    return {"order": len(coeffs) - 1, "coefficients": [c.to_dict() for c in coeffs],
            "text": ode_text(coeffs)}


def ode_text(coeffs: Sequence[RationalFunction]) -> str:
    parts = []
    for i in range(len(coeffs) - 1, -1, -1):
        c = coeffs[i]
        if c.is_zero():
            continue
        d = "" if i == 0 else ("∂" if i == 1 else f"∂^{i}")
        parts.append(f"[{c}]{d}" if d else f"[{c}]")
    return " + ".join(parts)


def ode_latex(coeffs: Sequence[RationalFunction]) -> str:
    parts = []
    for i in range(len(coeffs) - 1, -1, -1):
        c = coeffs[i]
        if c.is_zero():
            continue
        d = "" if i == 0 else (r"\partial_\lambda" if i == 1 else r"\partial_\lambda^{%d}" % i)
        parts.append(r"\left(%s\right)%s" % (c.latex(), d))
    return " + ".join(parts)
