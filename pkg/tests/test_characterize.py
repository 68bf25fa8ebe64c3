import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from hardylorentz.characterize import (
    MaximalSpec,
    RestrictedSpec,
    fractional,
    fractional_log,
    hardy_littlewood,
    k_restricted,
    lorentz_maximal,
    maximal_norm,
    maximal_regime,
    reduce_maximal,
    restricted_regime,
)
from hardylorentz.errors import (
    HardyLorentzError,
    RegimeError,
    ShapeError,
    UncoveredRegion,
)
from hardylorentz.grid import Grid
from hardylorentz.norms import associate_ggamma_norm
from hardylorentz.stepfn import StepFn
from hardylorentz.verify import brute_force_k
from hardylorentz.weights import Weight

ONE = Weight.constant()
GRID = Grid(n_points=512)
bp = Weight.broken_power

# finite Hardy-Littlewood example in the 4.3(i) regime
HL_V = Weight([(0, 1, -1.6221447013513008), (1, 1, -1.2659831709502)])
HL_W = Weight([(0, 1, 0.367740564729759), (1, 1, -1.6685010510380551)])
HL = hardy_littlewood(1.08, 0.87, 2.11, HL_V, HL_W)

COVERED = [
    ((0.5, 0.5, 2.0), "3.2"),
    ((2.0, 0.5, 3.0), "3.3i"),
    ((3.0, 0.5, 2.0), "3.3ii"),
    ((0.5, 2.0, 3.0), "3.4i"),
    ((0.5, 3.0, 2.0), "3.4ii"),
    ((2.0, 2.0, 3.0), "3.5i"),
    ((2.5, 1.5, 2.0), "3.5ii"),
]


def _v_for(p, m):
    k = m / p
    return bp(m - k - 1.1 if p < 1 else -1.0, -1.0 - k / 2)


# -- dispatch -----------------------------------------------------------------------


@pytest.mark.parametrize("pmq,case", COVERED)
def test_restricted_regime_labels(pmq, case):
    assert restricted_regime(*pmq) == case


def test_uncovered_regions():
    with pytest.raises(UncoveredRegion, match="1<p<=q<m"):
        restricted_regime(2.0, 3.0, 2.5)
    with pytest.raises(UncoveredRegion, match="1<q<min"):
        restricted_regime(2.0, 2.0, 1.5)


def test_q_at_most_one_is_a_regime_error():
    with pytest.raises(RegimeError):
        restricted_regime(2.0, 2.0, 1.0)


def test_maximal_regime_divides_by_alpha():
    assert maximal_regime(4.0, 4.0, 6.0, 2.0) == "4.5i"
    assert maximal_regime(0.5, 0.5, 2.0, 1.0) == "4.2"


def test_dispatch_totality_on_lattice():
    vals = np.linspace(0.3, 4.8, 10)
    seen = set()
    for p, m, q in itertools.product(vals, repeat=3):
        try:
            seen.add(restricted_regime(p, m, q))
        except (UncoveredRegion, RegimeError):
            seen.add("raised")
    assert seen == {c for _, c in COVERED} | {"raised"}


# -- restricted constant -------------------------------------------------------------


@pytest.mark.parametrize("pmq,case", COVERED)
def test_k_zero_for_zero_w(pmq, case):
    p, m, q = pmq
    rep = k_restricted(RestrictedSpec(p, m, q, ONE, ONE, _v_for(p, m), Weight.zero()), GRID)
    assert rep.value == 0.0
    assert rep.regime == "thm" + case


def test_k_uncovered_raises():
    spec = RestrictedSpec(2.0, 3.0, 2.5, ONE, ONE, _v_for(2, 3), ONE)
    with pytest.raises(UncoveredRegion):
        k_restricted(spec, GRID)


def test_k_rejects_increasing_b():
    spec = RestrictedSpec(0.5, 0.5, 2.0, ONE, Weight.power(1.0), _v_for(0.5, 0.5), ONE)
    with pytest.raises(HardyLorentzError):
        k_restricted(spec, GRID)


def test_k_constant_operator_closed_loop():
    # with u = B and b = 1 the operator is the constant int f*, so K = (int w)^{1/q} ||1||'
    p, m, q = 0.5, 0.5, 2.0
    v = _v_for(p, m)
    spec = RestrictedSpec(p, m, q, Weight.power(1.0), ONE, v, Weight.indicator(0, 1))
    formula = k_restricted(spec, GRID).value
    oracle = brute_force_k(spec, 500, 10, 42).oracle_lower_bound
    assoc = associate_ggamma_norm(StepFn.indicator(1e8), p, m, v, Grid(1e-8, 1e10, 512))
    assert_allclose(oracle, assoc, rtol=1e-2)
    assert max(formula / oracle, oracle / formula) <= 8.0


def test_k_scales_with_w():
    p, m, q = 0.5, 0.5, 2.0
    v, w = bp(-1.5446526558939897, -1.6162817781906769), bp(1.78, -2.13)
    base = k_restricted(RestrictedSpec(p, m, q, ONE, ONE, v, w), GRID)
    scaled = k_restricted(RestrictedSpec(p, m, q, ONE, ONE, v, w.scaled(7.0)), GRID)
    assert_allclose(scaled.value, 7.0 ** (1 / q) * base.value, rtol=1e-9)


# -- maximal operators ---------------------------------------------------------------


def test_reduce_hardy_littlewood_gives_unit_u():
    red, a = reduce_maximal(HL)
    assert a == 1.0
    assert (red.p, red.m, red.q) == (HL.p, HL.m, HL.q)
    t = np.geomspace(1e-4, 1e4, 50)
    assert_allclose(red.u(t), 1.0, rtol=1e-14)


def test_reduce_divides_exponents():
    spec = MaximalSpec(4.0, 4.0, 6.0, 2.0, 2.0, ONE, Weight.power(0.5), HL_V, HL_W)
    red, a = reduce_maximal(spec)
    assert (red.p, red.m, red.q, a) == (2.0, 2.0, 3.0, 2.0)


def test_reduce_rejects_decreasing_phi():
    spec = MaximalSpec(1.0, 1.0, 2.0, 1.0, 1.0, ONE, Weight.power(-1.0), HL_V, HL_W)
    with pytest.raises(ShapeError) as info:
        reduce_maximal(spec)
    assert any("quasi-increasing" in f for f in info.value.failed)


def test_maximal_zero_w():
    rep = maximal_norm(HL.with_w(Weight.zero()), "both", GRID)
    assert rep.value == 0.0


def test_maximal_paths_agree_on_hardy_littlewood():
    d = maximal_norm(HL, "direct", GRID)
    r = maximal_norm(HL, "reduced", GRID)
    assert d.regime == r.regime == "thm4.3i"
    for k in d.terms:
        assert_allclose(d.terms[k], r.terms[k], rtol=1e-9)
    assert "agree" in maximal_norm(HL, "both", GRID).notes[-1]


def test_maximal_hardy_littlewood_against_brute_force():
    formula = maximal_norm(HL, "both", GRID).value
    red, _ = reduce_maximal(HL)
    oracle = brute_force_k(red, 1000, 20, 42).oracle_lower_bound
    assert math.isfinite(formula)
    assert max(formula / oracle, oracle / formula) <= 16.0


@pytest.mark.parametrize("lam", [1 / 3, 7.0])
def test_maximal_scales_with_w(lam):
    base = maximal_norm(HL, "direct", GRID).value
    scaled = maximal_norm(HL.with_w(HL_W.scaled(lam)), "direct", GRID).value
    assert_allclose(scaled, lam ** (1 / HL.q) * base, rtol=1e-9)


def test_maximal_unknown_path():
    with pytest.raises(ValueError):
        maximal_norm(HL, "sideways")


def test_presets_pass_shape_checks():
    for spec in (HL, fractional(1.0, 3, 1.08, 0.87, 2.11, HL_V, HL_W),
                 fractional_log(1.5, 1.0, 3, 0.5, -0.5, 1.08, 0.87, 2.11, HL_V, HL_W),
                 lorentz_maximal(2.0, 1.0, 1.08, 0.87, 2.11, HL_V, HL_W)):
        red, a = reduce_maximal(spec)
        assert a == spec.alpha


def test_direct_and_reduced_agree_on_random_specs():
    rng = np.random.default_rng(42)
    accepted = 0
    while accepted < 15:
        p, m, q = np.round(rng.uniform(0.4, 4, 3), 2)
        k = m / p
        v = bp(float(rng.uniform(-1 - k, -1)) * 0.999 - 0.001, float(rng.uniform(-1 - k, -1)))
        w = bp(float(rng.uniform(-0.9, 2)), float(rng.uniform(-4, -1.2)))
        gamma = float(rng.uniform(0, 2))
        spec = fractional(gamma, 3, float(p), float(m), float(q), v, w)
        try:
            maximal_norm(spec, "both", GRID)
        except HardyLorentzError as exc:
            assert "direct" not in str(exc)
            continue
        accepted += 1


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 2.0), st.floats(-0.9, 2.0), st.floats(-4.0, -1.2))
def test_maximal_monotone_in_w(bump, a0, a1):
    w1 = bp(a0, a1)
    w2 = Weight([(pc.lo, pc.coeff * (1 + bump), pc.a, pc.beta) for pc in w1.pieces])
    v1 = maximal_norm(HL.with_w(w1), "direct", GRID).value
    v2 = maximal_norm(HL.with_w(w2), "direct", GRID).value
    assert v1 <= v2 * (1 + 1e-9)
