from hypothesis import assume, given, settings
from hypothesis import strategies as st

from _configs import RANDOM_SEEDS, preset, random_config
from delsarte.errors import PoleInBracket, PoleInPochhammer
from delsarte.hyper import bracket, pochhammer
from delsarte.lattice import build, solve_weights
from delsarte.ratfunc import LAMBDA, RationalFunction
from delsarte.reduction import Reducer
from delsarte.series import TruncatedSeries

DIAG = build(preset("section1"))
RED = Reducer(DIAG)

fractions = st.fractions(min_value=-20, max_value=20, max_denominator=12)
steps = st.integers(min_value=-20, max_value=20)
exponents = st.lists(st.integers(0, 7), min_size=3, max_size=3).map(tuple)
small_polys = st.lists(st.fractions(-5, 5, max_denominator=6), min_size=1, max_size=4)


def _poly(cs):
    out = RationalFunction(0)
    for i, c in enumerate(cs):
        out = out + LAMBDA ** i * c
    return out


@given(fractions, steps)
@settings(max_examples=300)
def test_bracket_reflection(z, l):
    try:
        lhs = bracket(z, l)
    except PoleInBracket:
        lhs = None
    try:
        rhs = (-1) ** abs(l) * pochhammer(-z, -l)
    except PoleInPochhammer:
        rhs = None
    assert lhs == rhs


@given(fractions, steps, steps)
def test_bracket_splits(z, l, k):
    try:
        whole = bracket(z, l + k)
        parts = bracket(z, l) * bracket(z + l, k)
    except PoleInBracket:
        assume(False)
    assert whole == parts


@given(exponents, exponents, small_polys, small_polys)
@settings(max_examples=40, deadline=None)
def test_normal_form_linear(u, w, p, q):
    f, g = _poly(p), _poly(q)
    combined = RED.normal_form({u: f, w: g} if u != w else {u: f + g})
    separate = RED.normal_form(u).scale(f) + RED.normal_form(w).scale(g)
    assert combined == separate


@given(exponents)
@settings(max_examples=40, deadline=None)
def test_normal_form_idempotent(u):
    nf = RED.normal_form(u)
    assert RED.normal_form(dict(nf.terms)) == nf


@given(st.sampled_from(RANDOM_SEEDS))
@settings(max_examples=len(RANDOM_SEEDS), deadline=None)
def test_weight_relation(seed):
    cfg = random_config(seed)
    w = solve_weights(cfg)
    assert w.ell0 == sum(w.ells) and all(l > 0 for l in w.ells)
    for i in range(cfg.n):
        assert w.ell0 * cfg.a0[i] == sum(l * a[i] for l, a in zip(w.ells, cfg.columns))


series = st.dictionaries(st.integers(-3, 8), st.fractions(-9, 9, max_denominator=5), max_size=6)


def _ts(d, order=10):
    return TruncatedSeries({e: c for e, c in d.items() if e < order}, order)


@given(series, series, series)
def test_series_ring_laws(a, b, c):
    x, y, z = _ts(a), _ts(b), _ts(c)
    assert x + y == y + x
    assert x * y == y * x
    lhs, rhs = (x * (y + z)), (x * y + x * z)
    n = min(lhs.order, rhs.order)
    assert lhs.truncate(n) == rhs.truncate(n)


@given(series, series)
def test_leibniz(a, b):
    x, y = _ts(a), _ts(b)
    lhs = (x * y).derivative()
    rhs = x.derivative() * y + x * y.derivative()
    n = min(lhs.order, rhs.order)
    assert lhs.truncate(n) == rhs.truncate(n)


@given(small_polys, st.integers(1, 6))
def test_rational_expansion_inverts(p, k):
    f = _poly(p)
    assume(not f.is_zero())
    g = 1 / (1 - LAMBDA ** k)
    s = TruncatedSeries.from_rational(f * g, 20) * TruncatedSeries.from_rational(1 - LAMBDA ** k, 20)
    assert s.truncate(20) == TruncatedSeries.from_rational(f, 20)
