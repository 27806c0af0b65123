"""Diagonal hypersurfaces sum w_j x_j^d - d lam x^w and their primitive blocks.

The subspace spanned by x^u with every u_j >= 1 and d | sum(u) is stable under
d/dlam; its basis is the part of B strictly inside the cube (0, d)^n with
degree divisible by d.  Restricting the coset blocks to it gives the smaller
blocks of the projective Picard-Fuchs system.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .errors import WeightMismatch
from .hyper import entry_series, row_operator
from .lattice import ExponentConfig, LatticeData, Vector, build
from .reduction import ConnectionMatrix, Reducer


@dataclass(frozen=True)
class HypersurfaceFilter:
    degree: int
    weights: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))
        if self.degree <= 0:
            raise WeightMismatch(f"degree must be positive, got {self.degree}")
        if any(w <= 0 for w in self.weights):
            raise WeightMismatch(f"weights must be positive, got {list(self.weights)}")
        if sum(self.weights) != self.degree:
            raise WeightMismatch(f"weights {list(self.weights)} sum to {sum(self.weights)}, not {self.degree}")

    @classmethod
    def from_dict(cls, data: dict) -> "HypersurfaceFilter":
        return cls(int(data["d"]), tuple(data["weights"]))

    def config(self) -> ExponentConfig:
        n = len(self.weights)
        cols = tuple(tuple(self.degree if i == j else 0 for i in range(n)) for j in range(n))
        return ExponentConfig(cols, self.weights)

    def keeps(self, u: Vector) -> bool:
        return all(0 < x < self.degree for x in u) and sum(u) % self.degree == 0


@dataclass
class HypersurfaceBlock:
    coset: int
    points: tuple[Vector, ...]

    def to_dict(self) -> dict:
        return {"coset": self.coset, "points": [list(b) for b in self.points]}


class Hypersurface:
    def __init__(self, filt: HypersurfaceFilter, lat: LatticeData | None = None):
        self.filter = filt
        self.lat = lat or build(filt.config())
        self._reducer: Reducer | None = None

    @property
    def reducer(self) -> Reducer:
        if self._reducer is None:
            self._reducer = Reducer(self.lat)
        return self._reducer

    @cached_property
    def basis(self) -> tuple[Vector, ...]:
        return tuple(b for b in self.lat.points if self.filter.keeps(b))

    @cached_property
    def blocks(self) -> tuple[HypersurfaceBlock, ...]:
        out = []
        for k, block in enumerate(self.lat.cosets):
            kept = tuple(b for b in block if self.filter.keeps(b))
            if kept:
                out.append(HypersurfaceBlock(k, kept))
        return tuple(out)

    def block_sizes(self) -> list[int]:
        return sorted(len(b.points) for b in self.blocks)

    def find_block(self, point: Vector) -> HypersurfaceBlock:
        for blk in self.blocks:
            if tuple(point) in blk.points:
                return blk
        raise KeyError(f"{tuple(point)} is not in the filtered basis")

    def solution_matrix(self, blk: HypersurfaceBlock):
        """Cancelled entries: row b_i, column b_j holds the functional of b_j on x^(b_i)."""
        return [[entry_series(self.lat, bi, bj).cancel() for bj in blk.points] for bi in blk.points]

    def operators(self, blk: HypersurfaceBlock):
        return [row_operator(self.lat, b) for b in blk.points]

    def connection_block(self, blk: HypersurfaceBlock) -> ConnectionMatrix:
        """Connection matrix restricted to the block, after checking nothing leaks out."""
        full = self.reducer.connection_matrix(blk.coset)
        idx = [full.points.index(b) for b in blk.points]
        for i in idx:
            for j, b in enumerate(full.points):
                if j not in idx and not full.entries[i][j].is_zero():
                    raise ArithmeticError(
                        f"derivative of x^{full.points[i]} leaves the filtered span via {b}")
        entries = tuple(tuple(full.entries[i][j] for j in idx) for i in idx)
        return ConnectionMatrix(blk.coset, blk.points, entries)
