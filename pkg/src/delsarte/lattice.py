"""Lattice data attached to a deformed Delsarte polynomial.

The exponent vectors a_1..a_m are the columns of an integer n x m matrix A;
a_0 is an interior point of their convex hull.  Everything here is exact
integer / rational arithmetic on small matrices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations, product
from math import floor, gcd, lcm
from typing import Iterable, Sequence

from flint import fmpz_mat

from .errors import (
    ConfigError,
    DependentColumns,
    DifferentCosets,
    NonIntegral,
    NotInterior,
)

Vector = tuple[int, ...]
Coords = tuple[Fraction, ...]


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _frac_part(x: Fraction) -> Fraction:
    return x - floor(x)


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExponentConfig:
    """Exponent vectors ``columns`` (a_1..a_m) and deformation exponent ``a0``."""

    columns: tuple[Vector, ...]
    a0: Vector

    def __post_init__(self):
        cols = tuple(tuple(int(x) for x in c) for c in self.columns)
        a0 = tuple(int(x) for x in self.a0)
        if not cols:
            raise ConfigError("at least one exponent vector is required")
        n = len(a0)
        if n == 0 or any(len(c) != n for c in cols):
            raise ConfigError("all vectors must have the same positive length")
        if len(cols) > n:
            raise DependentColumns(f"{len(cols)} vectors in dimension {n} cannot be independent")
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "a0", a0)

    @property
    def n(self) -> int:
        return len(self.a0)

    @property
    def m(self) -> int:
        return len(self.columns)

    def row(self, i: int) -> Vector:
        return tuple(c[i] for c in self.columns)

    @classmethod
    def from_dict(cls, data: dict) -> "ExponentConfig":
        try:
            return cls(tuple(map(tuple, data["columns"])), tuple(data["a0"]))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed configuration: {exc}") from exc

    def to_dict(self) -> dict:
        return {"columns": [list(c) for c in self.columns], "a0": list(self.a0)}

    @classmethod
    def load(cls, path) -> "ExponentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class WeightVector:
    ells: tuple[int, ...]
    ell0: int

    def __post_init__(self):
        if self.ell0 != sum(self.ells) or min(self.ells) <= 0:
            raise NonIntegral(f"inconsistent weights {self.ells}, {self.ell0}")

    def to_dict(self) -> dict:
        return {"ell": list(self.ells), "ell0": self.ell0}


# ---------------------------------------------------------------------------
# exact linear algebra on small matrices
# ---------------------------------------------------------------------------


def _solve_square(mat: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Inverse of a square rational matrix (Gauss-Jordan)."""
    k = len(mat)
    aug = [[_frac(x) for x in row] + [Fraction(int(i == j)) for j in range(k)]
           for i, row in enumerate(mat)]
    for c in range(k):
        piv = next((r for r in range(c, k) if aug[r][c] != 0), None)
        if piv is None:
            raise DependentColumns("singular matrix")
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = 1 / aug[c][c]
        aug[c] = [x * inv for x in aug[c]]
        for r in range(k):
            if r != c and aug[r][c] != 0:
                f = aug[r][c]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[c])]
    return [row[k:] for row in aug]


def _pivot_rows(cfg: ExponentConfig) -> tuple[int, ...]:
    """Indices of m rows of A that are linearly independent."""
    rows: list[list[Fraction]] = []
    chosen: list[int] = []
    pivots: list[int] = []
    for i in range(cfg.n):
        r = [Fraction(x) for x in cfg.row(i)]
        for basis, p in zip(rows, pivots):
            if r[p] != 0:
                f = r[p] / basis[p]
                r = [x - f * y for x, y in zip(r, basis)]
        p = next((j for j, x in enumerate(r) if x != 0), None)
        if p is not None:
            rows.append(r)
            pivots.append(p)
            chosen.append(i)
            if len(chosen) == cfg.m:
                return tuple(chosen)
    raise DependentColumns("exponent vectors are linearly dependent")


def hermite_reduce(matrix: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]]]:
    """Unimodular row reduction of an integer n x m matrix.

    Returns ``(H, Uinv)`` with ``H = U * matrix`` upper-echelon and ``Uinv``
    the inverse of the unimodular transform.  Only integer operations are used.
    """
    h = [list(map(int, row)) for row in matrix]
    n = len(h)
    m = len(h[0]) if n else 0
    uinv = [[int(i == j) for j in range(n)] for i in range(n)]
    r = 0
    for c in range(m):
        if r == n:
            break
        while True:
            nz = [i for i in range(r, n) if h[i][c] != 0]
            if not nz:
                break
            p = min(nz, key=lambda i: abs(h[i][c]))
            if p != r:
                h[r], h[p] = h[p], h[r]
                for row in uinv:
                    row[r], row[p] = row[p], row[r]
            done = True
            for i in range(r + 1, n):
                q = h[i][c] // h[r][c]
                if q:
                    h[i] = [x - q * y for x, y in zip(h[i], h[r])]
                    # row_i -= q row_r  <=>  col_r(Uinv) += q col_i(Uinv)
                    for row in uinv:
                        row[r] += q * row[i]
                if h[i][c]:
                    done = False
            if done:
                break
        if any(h[i][c] for i in range(r, n)):
            r += 1
    return h, uinv


def lattice_index(cfg: ExponentConfig) -> int:
    """[V_Z : ZA] as the gcd of the maximal minors of A.

    V_Z is saturated, so its own maximal minors are coprime and every minor of
    A is the index times a minor of a basis of V_Z.  This does not touch the
    echelon form used to enumerate B.
    """
    g = 0
    for rows in combinations(range(cfg.n), cfg.m):
        g = gcd(g, int(fmpz_mat([list(cfg.row(i)) for i in rows]).det()))
    if g == 0:
        raise DependentColumns("exponent vectors are linearly dependent")
    return g


def saturation_basis(cfg: ExponentConfig) -> list[Vector]:
    """A Z-basis of V_Z = span(A) intersected with Z^n."""
    h, uinv = hermite_reduce([cfg.row(i) for i in range(cfg.n)])
    if any(h[j][j] == 0 for j in range(cfg.m)):
        raise DependentColumns("exponent vectors are linearly dependent")
    return [tuple(uinv[i][j] for i in range(cfg.n)) for j in range(cfg.m)]


# ---------------------------------------------------------------------------
# coordinates
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CoordinateMap:
    """Left inverse of A on its span, plus the degree denominator q0.

    Coordinate solves are memoized per instance; the cache is invisible to
    equality and hashing.
    """

    matrix: tuple[Coords, ...]
    columns: tuple[Vector, ...]
    q0: int
    _cache: dict = field(default_factory=dict, compare=False, repr=False)
    _cone: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def m(self) -> int:
        return len(self.matrix)

    def cone_coords(self, u: Sequence[int]) -> Coords | None:
        """Coordinates of u if they are all nonnegative, else None."""
        u = tuple(u)
        try:
            return self._cone[u]
        except KeyError:
            pass
        c = self.coords(u)
        if c is not None and any(x < 0 for x in c):
            c = None
        if len(self._cone) < 1 << 20:
            self._cone[u] = c
        return c

    def coords(self, u: Sequence[int]) -> Coords | None:
        """Coordinates u' with u = sum u'_j a_j, or None if u is outside the span."""
        u = tuple(u)
        try:
            return self._cache[u]
        except KeyError:
            pass
        c = self._solve(u)
        if len(self._cache) < 1 << 20:
            self._cache[u] = c
        return c

    def _solve(self, u: Vector) -> Coords | None:
        c = tuple(sum((row[i] * u[i] for i in range(len(u)) if u[i]), Fraction(0))
                  for row in self.matrix)
        back = self.point(c)
        if any(Fraction(x) != y for x, y in zip(u, back)):
            return None
        return c

    def point(self, c: Sequence[Fraction]) -> tuple[Fraction, ...]:
        n = len(self.columns[0])
        return tuple(sum((cj * a[i] for cj, a in zip(c, self.columns) if cj), Fraction(0))
                     for i in range(n))

    def integral_point(self, c: Sequence[Fraction]) -> Vector:
        p = self.point(c)
        if any(x.denominator != 1 for x in p):
            raise NonIntegral(f"coordinates {c} do not give an integer vector")
        return tuple(int(x) for x in p)

    def degree(self, u: Sequence[int]) -> Fraction:
        c = self.coords(u)
        if c is None:
            raise ValueError(f"{tuple(u)} is not in the span")
        return sum(c, Fraction(0))


def coordinate_map(cfg: ExponentConfig) -> CoordinateMap:
    rows = _pivot_rows(cfg)
    inv = _solve_square([[Fraction(cfg.columns[j][i]) for j in range(cfg.m)] for i in rows])
    full = []
    for j in range(cfg.m):
        r = [Fraction(0)] * cfg.n
        for k, i in enumerate(rows):
            r[i] = inv[j][k]
        full.append(tuple(r))
    partial = CoordinateMap(tuple(full), cfg.columns, 1)
    q0 = 1
    for e in saturation_basis(cfg):
        q0 = lcm(q0, partial.degree(e).denominator)
    return CoordinateMap(tuple(full), cfg.columns, q0)


def membership(u: Sequence[int], cmap: CoordinateMap) -> Coords | None:
    """Coordinates of u if u lies in M = V_Z intersected with the cone of A."""
    return cmap.cone_coords(u)


# ---------------------------------------------------------------------------
# weights
# ---------------------------------------------------------------------------


def solve_weights(cfg: ExponentConfig, cmap: CoordinateMap | None = None) -> WeightVector:
    cmap = cmap or coordinate_map(cfg)
    c = cmap.coords(cfg.a0)
    if c is None:
        raise NotInterior(f"a0={cfg.a0} is not in the span of the exponent vectors")
    if any(x <= 0 for x in c) or sum(c) != 1:
        raise NotInterior(f"a0 has barycentric coordinates {tuple(map(str, c))}")
    ell0 = lcm(*(x.denominator for x in c))
    ells = [x * ell0 for x in c]
    if any(x.denominator != 1 for x in ells):
        raise NonIntegral("weight relation did not clear to integers")
    ells = [int(x) for x in ells]
    g = gcd(ell0, *ells)
    ell0 //= g
    ells = [x // g for x in ells]
    w = WeightVector(tuple(ells), ell0)
    for i in range(cfg.n):
        if ell0 * cfg.a0[i] != sum(l * a[i] for l, a in zip(ells, cfg.columns)):
            raise NonIntegral("weight relation fails to hold exactly")
    return w


# ---------------------------------------------------------------------------
# parallelepiped points and cosets
# ---------------------------------------------------------------------------


def parallelepiped_points(cfg: ExponentConfig, cmap: CoordinateMap) -> list[tuple[Vector, Coords]]:
    """All integer points with coordinates in [0,1)^m, sorted by coordinates.

    With A = S H (S a basis of V_Z, H upper triangular) the quotient V_Z / ZA
    is represented by the box 0 <= x_i < |H_ii|; each representative S x is
    folded back into the parallelepiped by taking fractional coordinates.
    """
    h, uinv = hermite_reduce([cfg.row(i) for i in range(cfg.n)])
    m = cfg.m
    if any(h[j][j] == 0 for j in range(m)):
        raise DependentColumns("exponent vectors are linearly dependent")
    hinv = _solve_square([[Fraction(h[i][j]) for j in range(m)] for i in range(m)])
    out = []
    for x in product(*(range(abs(h[j][j])) for j in range(m))):
        c = tuple(_frac_part(sum((r[k] * x[k] for k in range(m) if x[k]), Fraction(0)))
                  for r in hinv)
        out.append((cmap.integral_point(c), c))
    out.sort(key=lambda t: t[1])
    return out


@dataclass(frozen=True)
class ShiftData:
    s0: int
    s: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class LatticeData:
    """The basis set B with coordinates, interior flags and coset structure."""

    cfg: ExponentConfig
    weights: WeightVector
    cmap: CoordinateMap
    points: tuple[Vector, ...]
    coords: dict
    cosets: tuple[tuple[Vector, ...], ...]
    coset_of: dict
    phase: dict
    a0_coords: Coords
    by_coords: dict = field(repr=False)
    _memo: dict = field(default_factory=dict, repr=False)

    @property
    def d(self) -> int:
        return len(self.points)

    @property
    def N(self) -> int:
        return len(self.cosets)

    @property
    def ell0(self) -> int:
        return self.weights.ell0

    @property
    def ells(self) -> tuple[int, ...]:
        return self.weights.ells

    def is_interior(self, b: Vector) -> bool:
        return all(x > 0 for x in self.coords[b])

    @cached_property
    def R(self) -> tuple[int, ...]:
        return tuple(sum(self.is_interior(b) for b in block) for block in self.cosets)

    def reduce_coords(self, c: Coords) -> Coords:
        return tuple(_frac_part(x) for x in c)

    def basis_point_of(self, u: Sequence[int]) -> Vector:
        """The point of B congruent to u modulo ZA."""
        c = self.cmap.coords(u)
        if c is None:
            raise ValueError(f"{tuple(u)} is not in the span")
        return self.by_coords[self.reduce_coords(c)]

    def coset_of_point(self, u: Vector, c: Coords) -> int:
        """Coset index of the point u with coordinates c (memoized on u)."""
        k = self._memo.get(u)
        if k is None:
            k = self.coset_of[self.by_coords[self.reduce_coords(c)]]
            self._memo[u] = k
        return k

    def coset_index(self, u: Sequence[int]) -> int:
        return self.coset_of[self.basis_point_of(u)]

    def to_dict(self) -> dict:
        return {
            "config": self.cfg.to_dict(),
            "weights": self.weights.to_dict(),
            "q0": self.cmap.q0,
            "d": self.d,
            "N": self.N,
            "points": [
                {
                    "point": list(b),
                    "v": [f"{x.numerator}/{x.denominator}" for x in self.coords[b]],
                    "interior": self.is_interior(b),
                    "coset": self.coset_of[b],
                }
                for b in self.points
            ],
            "cosets": [
                {"index": k, "points": [list(b) for b in block], "R": self.R[k]}
                for k, block in enumerate(self.cosets)
            ],
        }


def enumerate_basis(cfg: ExponentConfig, weights: WeightVector | None = None,
                    cmap: CoordinateMap | None = None) -> LatticeData:
    cmap = cmap or coordinate_map(cfg)
    weights = weights or solve_weights(cfg, cmap)
    pts = parallelepiped_points(cfg, cmap)
    by_coords = {c: p for p, c in pts}
    coords = {p: c for p, c in pts}
    a0c = cmap.coords(cfg.a0)

    # orbits of b -> b + a0 (mod ZA); every orbit has exactly ell0 points
    coset_of: dict = {}
    phase: dict = {}
    blocks = []
    for p, c in sorted(pts, key=lambda t: t[0]):
        if p in coset_of:
            continue
        orbit = []
        cur = c
        for t in range(weights.ell0):
            q = by_coords[cur]
            orbit.append((q, t))
            cur = tuple(_frac_part(x + y) for x, y in zip(cur, a0c))
        if cur != c or len({q for q, _ in orbit}) != weights.ell0:
            raise NonIntegral("coset orbit does not close after ell0 steps")
        blocks.append(orbit)
        for q, _ in orbit:
            coset_of[q] = None
    # label cosets by their lexicographically smallest member
    blocks.sort(key=lambda orb: min(q for q, _ in orb))
    cosets = []
    for k, orbit in enumerate(blocks):
        rep = min(q for q, _ in orbit)
        t_rep = next(t for q, t in orbit if q == rep)
        for q, t in orbit:
            coset_of[q] = k
            phase[q] = (t - t_rep) % weights.ell0
        cosets.append(tuple(sorted((q for q, _ in orbit), key=lambda q: coords[q])))
    return LatticeData(
        cfg=cfg,
        weights=weights,
        cmap=cmap,
        points=tuple(p for p, _ in pts),
        coords=coords,
        cosets=tuple(cosets),
        coset_of=coset_of,
        phase=phase,
        a0_coords=a0c,
        by_coords=by_coords,
    )


def build(cfg: ExponentConfig) -> LatticeData:
    """Validate ``cfg`` and compute all lattice data."""
    cmap = coordinate_map(cfg)
    return enumerate_basis(cfg, solve_weights(cfg, cmap), cmap)


def shift_coords(lat: LatticeData, uc: Coords, b: Vector) -> ShiftData:
    """Shift data from coordinates of u (which may be any point of M)."""
    vb = lat.coords[b]
    for s0 in range(lat.ell0):
        s = [vb[j] - uc[j] - s0 * lat.a0_coords[j] for j in range(len(vb))]
        if all(x.denominator == 1 for x in s):
            s = tuple(int(x) for x in s)
            if any(x > 0 for x in s):
                raise NonIntegral(f"positive shift {s} for u'={uc}, b={b}")
            return ShiftData(s0, s)
    raise DifferentCosets(f"u'={tuple(map(str, uc))} and {b} lie in different cosets")


def shift_data(lat: LatticeData, u: Sequence[int], b: Vector) -> ShiftData:
    """The unique (s0, s) with u + s0*a0 = b - sum s_j a_j, 0 <= s0 < ell0, s_j <= 0."""
    uc = lat.cmap.coords(u)
    if uc is None:
        raise DifferentCosets(f"{tuple(u)} is not in the span")
    return shift_coords(lat, uc, b)


# ---------------------------------------------------------------------------
# dimension count
# ---------------------------------------------------------------------------


def dimension_identity(cfg: ExponentConfig) -> tuple[int, int]:
    """(#interior points of B, inclusion-exclusion count over faces).

    Does not need a0, so it also applies to configurations without a valid
    weight relation.
    """
    cmap = coordinate_map(cfg)
    pts = parallelepiped_points(cfg, cmap)
    interior = sum(all(x > 0 for x in c) for _, c in pts)
    m = cfg.m
    total = 0
    for size in range(m + 1):
        for face in combinations(range(m), size):
            inside = set(face)
            count = sum(all(c[j] == 0 for j in range(m) if j not in inside) for _, c in pts)
            total += (-1) ** (m - size) * count
    return interior, total


def load_config(path) -> ExponentConfig:
    return ExponentConfig.load(path)


def iter_cone_points(lat: LatticeData, max_degree: Fraction | int,
                     cosets: Iterable[int] | None = None):
    """Yield (u, u') for points u of M with deg(u) <= max_degree."""
    max_degree = Fraction(max_degree)
    m = lat.cfg.m
    wanted = set(range(lat.N)) if cosets is None else set(cosets)
    for b in lat.points:
        if lat.coset_of[b] not in wanted:
            continue
        vb = lat.coords[b]
        room = max_degree - sum(vb)
        if room < 0:
            continue
        for n in _compositions_upto(m, int(floor(room))):
            c = tuple(x + k for x, k in zip(vb, n))
            yield lat.cmap.integral_point(c), c


def _compositions_upto(m: int, total: int):
    if m == 0:
        yield ()
        return
    for first in range(total + 1):
        for rest in _compositions_upto(m - 1, total - first):
            yield (first,) + rest
