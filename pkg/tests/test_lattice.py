from fractions import Fraction as F
from itertools import product

import pytest

from _configs import RANDOM_SEEDS, preset, random_config
from delsarte.errors import ConfigError, DependentColumns, DifferentCosets, NotInterior
from delsarte.lattice import (
    ExponentConfig,
    build,
    coordinate_map,
    dimension_identity,
    iter_cone_points,
    lattice_index,
    membership,
    saturation_basis,
    shift_data,
    solve_weights,
)

DIAG236 = ExponentConfig(((2, 0, 0), (0, 3, 0), (0, 0, 6)), (1, 1, 1))
CHAIN4 = ExponentConfig(((5, 1, 0, 0), (0, 4, 1, 0), (0, 0, 8, 0), (0, 0, 0, 2)), (1, 1, 1, 1))
FERMAT = ExponentConfig(((2, 0), (0, 2)), (1, 1))


def box_scan(cfg):
    """Independent enumeration for square configs: scan [0, sum of columns] in Z^n."""
    cmap = coordinate_map(cfg)
    hi = [sum(max(c[i], 0) for c in cfg.columns) for i in range(cfg.n)]
    lo = [sum(min(c[i], 0) for c in cfg.columns) for i in range(cfg.n)]
    out = set()
    for u in product(*(range(a, b + 1) for a, b in zip(lo, hi))):
        c = cmap.coords(u)
        if c is not None and all(0 <= x < 1 for x in c):
            out.add(u)
    return out


class TestWeights:
    @pytest.mark.parametrize("cfg, ells, ell0", [
        (DIAG236, (3, 2, 1), 6),
        (CHAIN4, (2, 2, 1, 5), 10),
        (FERMAT, (1, 1), 2),
    ])
    def test_known_relations(self, cfg, ells, ell0):
        w = solve_weights(cfg)
        assert (w.ells, w.ell0) == (ells, ell0)

    def test_relation_holds(self):
        for seed in RANDOM_SEEDS[:8]:
            cfg = random_config(seed)
            w = solve_weights(cfg)
            assert w.ell0 == sum(w.ells)
            for i in range(cfg.n):
                assert w.ell0 * cfg.a0[i] == sum(l * a[i] for l, a in zip(w.ells, cfg.columns))

    def test_dependent_columns(self):
        with pytest.raises(DependentColumns):
            build(ExponentConfig(((1, 0), (2, 0)), (1, 0)))

    def test_too_many_columns(self):
        with pytest.raises(DependentColumns):
            ExponentConfig(((1, 0), (0, 1), (1, 1)), (1, 1))

    def test_a0_on_boundary(self):
        with pytest.raises(NotInterior):
            solve_weights(ExponentConfig(((2, 0), (0, 2)), (2, 0)))

    def test_a0_outside_hull(self):
        with pytest.raises(NotInterior):
            solve_weights(ExponentConfig(((2, 0), (0, 2)), (2, 2)))

    def test_a0_outside_span(self):
        with pytest.raises(NotInterior):
            solve_weights(ExponentConfig(((2, 0, 0), (0, 2, 0)), (1, 1, 1)))

    def test_bad_dict(self):
        with pytest.raises(ConfigError):
            ExponentConfig.from_dict({"columns": [[1, 0]]})


class TestCoordinates:
    def test_diag236_a0(self):
        assert coordinate_map(DIAG236).coords((1, 1, 1)) == (F(1, 2), F(1, 3), F(1, 6))

    def test_columns_are_unit_vectors(self):
        for cfg in (DIAG236, CHAIN4, random_config(1)):
            cmap = coordinate_map(cfg)
            for j, a in enumerate(cfg.columns):
                assert cmap.coords(a) == tuple(F(int(i == j)) for i in range(cfg.m))

    def test_diagonal_scaling(self):
        assert coordinate_map(preset("section11")).coords((5, 4, 3)) == (F(5, 6), F(4, 6), F(3, 6))

    def test_membership(self):
        cmap = coordinate_map(DIAG236)
        assert membership((1, 2, 5), cmap) == (F(1, 2), F(2, 3), F(5, 6))
        assert membership((-2, 0, 0), cmap) is None
        assert membership((0, 0, 0), cmap) == (0, 0, 0)

    def test_outside_span(self):
        cfg = ExponentConfig(((2, 0, 1), (0, 2, 1)), (1, 1, 1))
        assert coordinate_map(cfg).coords((1, 0, 0)) is None

    def test_degree_denominator(self):
        cmap = coordinate_map(DIAG236)
        assert cmap.q0 == 6
        for u in product(range(4), repeat=3):
            assert (cmap.degree(u) * cmap.q0).denominator == 1

    def test_saturation_basis_spans(self):
        cfg = ExponentConfig(((2, 0, 1), (0, 2, 1)), (1, 1, 1))
        cmap = coordinate_map(cfg)
        for e in saturation_basis(cfg):
            assert cmap.coords(e) is not None


class TestBasis:
    def test_diag236(self):
        lat = build(DIAG236)
        assert (lat.d, lat.N) == (36, 6)
        k = lat.coset_of[(0, 0, 0)]
        assert set(lat.cosets[k]) == {(0, 0, 0), (1, 1, 1), (0, 2, 2), (1, 0, 3), (0, 1, 4), (1, 2, 5)}
        assert lat.R[k] == 2

    def test_diag236_coset_counts(self):
        # interior counts per coset, from the independent box scan below
        assert build(DIAG236).R == (2, 1, 2, 2, 2, 1)

    def test_fermat(self):
        lat = build(FERMAT)
        assert set(lat.points) == {(0, 0), (1, 0), (0, 1), (1, 1)}
        assert {frozenset(c) for c in lat.cosets} == {frozenset({(0, 0), (1, 1)}),
                                                      frozenset({(1, 0), (0, 1)})}
        assert lat.R == (1, 0)

    def test_chain4(self):
        lat = build(CHAIN4)
        assert (lat.d, lat.N, lat.ell0) == (320, 32, 10)

    @pytest.mark.parametrize("cfg", [DIAG236, FERMAT, preset("section11")],
                             ids=["diag236", "fermat", "sextic"])
    def test_against_box_scan(self, cfg):
        lat = build(cfg)
        assert set(lat.points) == box_scan(cfg)
        interior = {u for u in box_scan(cfg)
                    if all(x > 0 for x in coordinate_map(cfg).coords(u))}
        assert sum(lat.R) == len(interior)

    def test_ordering_is_lexicographic_in_coordinates(self):
        lat = build(DIAG236)
        cs = [lat.coords[b] for b in lat.points]
        assert cs == sorted(cs)
        for block in lat.cosets:
            cs = [lat.coords[b] for b in block]
            assert cs == sorted(cs)

    def test_coset_labels_follow_smallest_member(self):
        lat = build(CHAIN4)
        reps = [min(block) for block in lat.cosets]
        assert reps == sorted(reps)

    @pytest.mark.parametrize("seed", RANDOM_SEEDS)
    def test_random_structure(self, seed):
        cfg = random_config(seed)
        lat = build(cfg)
        assert lat.d == lattice_index(cfg)
        assert all(len(b) == lat.ell0 for b in lat.cosets)
        assert lat.N * lat.ell0 == lat.d
        interior, alt = dimension_identity(cfg)
        assert interior == alt == sum(lat.R)

    def test_embedded_config(self):
        cfg = ExponentConfig(((2, 0, 1), (0, 2, 1)), (1, 1, 1))
        lat = build(cfg)
        assert lat.d == lattice_index(cfg) == 2
        assert set(lat.points) == {(0, 0, 0), (1, 1, 1)}

    def test_to_dict(self):
        data = build(FERMAT).to_dict()
        assert data["d"] == 4 and data["N"] == 2
        assert {tuple(p["v"]) for p in data["points"]} == {("0/1", "0/1"), ("1/2", "1/2"),
                                                           ("0/1", "1/2"), ("1/2", "0/1")}


class TestChainCongruences:
    TABLE = [(1, 1, 1, 1), (2, 2, 2, 0), (3, 3, 3, 1), (4, 4, 4, 0), (0, 0, 4, 1),
             (1, 1, 5, 0), (2, 2, 6, 1), (3, 3, 7, 0), (4, 4, 8, 1), (0, 0, 0, 0)]

    def test_table(self):
        lat = build(CHAIN4)
        b1 = lat.coords[self.TABLE[0]]
        for j, b in enumerate(self.TABLE):
            c = tuple(x + j * a for x, a in zip(b1, lat.a0_coords))
            assert lat.by_coords[lat.reduce_coords(c)] == b
        assert set(lat.cosets[lat.coset_of[self.TABLE[0]]]) == set(self.TABLE)

    def test_interior_pattern(self):
        lat = build(CHAIN4)
        interior = [j + 1 for j, b in enumerate(self.TABLE) if lat.is_interior(b)]
        assert interior == [1, 3, 7, 9]


class TestShifts:
    def test_diag236_examples(self):
        lat = build(DIAG236)
        assert shift_data(lat, (0, 0, 0), (0, 2, 2)).s0 == 2
        assert shift_data(lat, (1, 1, 1), (0, 0, 0)).s0 == 5
        sd = shift_data(lat, (1, 1, 1), (1, 1, 1))
        assert sd.s0 == 0 and sd.s == (0, 0, 0)

    def test_different_cosets(self):
        lat = build(DIAG236)
        with pytest.raises(DifferentCosets):
            shift_data(lat, (0, 0, 0), (0, 0, 1))

    @pytest.mark.parametrize("cfg", [DIAG236, CHAIN4, random_config(3)],
                             ids=["diag236", "chain4", "random3"])
    def test_recomposes_and_bijects(self, cfg):
        lat = build(cfg)
        for block in lat.cosets[:6]:
            for u in block:
                s0s = []
                for b in block:
                    sd = shift_data(lat, u, b)
                    assert all(x <= 0 for x in sd.s)
                    lhs = [ui + sd.s0 * a for ui, a in zip(u, cfg.a0)]
                    rhs = [bi - sum(sj * a[i] for sj, a in zip(sd.s, cfg.columns))
                           for i, bi in enumerate(b)]
                    assert lhs == rhs
                    s0s.append(sd.s0)
                assert sorted(s0s) == list(range(lat.ell0))


class TestDimension:
    def test_fermat(self):
        assert dimension_identity(FERMAT) == (1, 1)

    def test_single_monomial(self):
        assert dimension_identity(ExponentConfig(((2,),), (1,))) == (1, 1)

    def test_diag236(self):
        assert dimension_identity(DIAG236) == (10, 10)

    def test_lattice_index_matches(self):
        for cfg in (DIAG236, CHAIN4, FERMAT):
            assert lattice_index(cfg) == build(cfg).d


def test_cone_points_have_bounded_degree():
    lat = build(DIAG236)
    pts = list(iter_cone_points(lat, 2))
    assert len({u for u, _ in pts}) == len(pts)
    for u, c in pts:
        assert sum(c) <= 2 and all(x >= 0 for x in c)
        assert lat.cmap.coords(u) == c
