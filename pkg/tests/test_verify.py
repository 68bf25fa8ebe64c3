import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from hardylorentz.characterize import RestrictedSpec, k_restricted
from hardylorentz.constants import copson_constant, hardy_constant
from hardylorentz.verify import (
    RestrictedEvaluator,
    brute_force_background,
    brute_force_k,
    equivalence_report,
)
from hardylorentz.grid import Grid
from hardylorentz.weights import Weight

ONE = Weight.constant()
P = Weight.power
SPEC = RestrictedSpec(0.5, 0.5, 2.0, ONE, ONE,
                      Weight.broken_power(-1.5446526558939897, -1.6162817781906769),
                      Weight.broken_power(1.7876184676609452, -2.1327911517660727))


def _reevaluate(spec, witness):
    ev = RestrictedEvaluator(spec, Grid(1e-6, 1e6))
    return ev.ratio_of(witness)


# -- equivalence ------------------------------------------------------------------


def test_equivalence_zero_zero_passes():
    rep = equivalence_report(0.0, 0.0, 4.0)
    assert rep.passed and rep.ratio == 1.0


def test_equivalence_inside_window():
    assert equivalence_report(1.0, 2.0, 4.0).passed


def test_equivalence_outside_window():
    assert not equivalence_report(1.0, 100.0, 4.0).passed


def test_equivalence_is_two_sided():
    assert not equivalence_report(100.0, 1.0, 4.0).passed


def test_equivalence_rejects_small_window():
    with pytest.raises(ValueError):
        equivalence_report(1.0, 1.0, 0.5)


def test_equivalence_nan_fails():
    assert not equivalence_report(math.nan, 1.0, 4.0).passed


# -- restricted oracle -------------------------------------------------------------


def test_brute_force_k_zero_w():
    spec = RestrictedSpec(0.5, 0.5, 2.0, ONE, ONE, SPEC.v, Weight.zero())
    rep = brute_force_k(spec, 50, 2, 42)
    assert rep.oracle_lower_bound == 0.0
    assert rep.formula_value == 0.0


def test_brute_force_k_power_suite_ratio_in_window():
    rep = brute_force_k(SPEC, 500, 10, 42)
    assert rep.regime == "thm3.2"
    assert 1.0 <= rep.ratio <= 64.0


def test_brute_force_k_uses_supplied_formula():
    formula = k_restricted(SPEC)
    rep = brute_force_k(SPEC, 20, 0, 42, formula=formula)
    assert rep.formula_value == formula.value


def test_brute_force_k_uncovered_gives_nan_formula():
    spec = RestrictedSpec(2.0, 3.0, 2.5, ONE, ONE, SPEC.v, SPEC.w)
    rep = brute_force_k(spec, 20, 0, 42)
    assert math.isnan(rep.formula_value)
    assert rep.regime == "UncoveredRegion"


def test_witness_reproduces_bound():
    rep = brute_force_k(SPEC, 300, 5, 42)
    assert_allclose(_reevaluate(SPEC, rep.best_witness), rep.oracle_lower_bound, rtol=1e-10)


def test_seed_determinism():
    a = brute_force_k(SPEC, 200, 5, 7)
    b = brute_force_k(SPEC, 200, 5, 7)
    assert a.oracle_lower_bound == b.oracle_lower_bound
    assert a.best_witness == b.best_witness


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 300), st.integers(0, 300), st.integers(0, 6))
def test_oracle_monotone_in_samples_and_steps(n1, extra, steps):
    lo = brute_force_k(SPEC, n1, steps, 42).oracle_lower_bound
    more_samples = brute_force_k(SPEC, n1 + extra, steps, 42).oracle_lower_bound
    more_steps = brute_force_k(SPEC, n1, steps + 2, 42).oracle_lower_bound
    assert more_samples >= lo
    assert more_steps >= lo


def test_report_serializes():
    d = brute_force_k(SPEC, 10, 0, 42).to_dict()
    assert {"regime", "formula_value", "oracle_lower_bound", "ratio", "witness"} <= set(d)


# -- background oracle -------------------------------------------------------------


def test_hardy_oracle_approaches_classical_constant():
    v, w = ONE, P(-2.0)
    formula = hardy_constant(2.0, 2.0, v, w)
    rep = brute_force_background("hardy", dict(p=2.0, q=2.0, v=v, w=w), 200, 10, 42,
                                 formula=formula)
    assert_allclose(formula.value, 1.0, rtol=1e-12)
    assert 1.9 <= rep.oracle_lower_bound <= 2.0 * (1 + 1e-9)
    assert equivalence_report(formula, rep, 2.0).passed


def test_copson_mirror_ratio_within_two():
    v, w = P(2.0), ONE
    formula = copson_constant(2.0, 2.0, v, w)
    rep = brute_force_background("copson", dict(p=2.0, q=2.0, v=v, w=w), 200, 10, 42,
                                 formula=formula)
    assert 0.5 <= rep.ratio <= 2.0


def test_background_zero_w():
    rep = brute_force_background("hardy", dict(p=2.0, q=2.0, v=ONE, w=Weight.zero()), 50, 2, 42)
    assert rep.oracle_lower_bound == 0.0


def test_background_unknown_inequality():
    with pytest.raises(ValueError):
        brute_force_background("bogus", dict(p=2.0, q=2.0, v=ONE, w=ONE))


def test_background_deterministic():
    inputs = dict(p=2.0, q=2.0, v=ONE, w=P(-2.0))
    a = brute_force_background("hardy", inputs, 100, 3, 11)
    b = brute_force_background("hardy", inputs, 100, 3, 11)
    assert a.oracle_lower_bound == b.oracle_lower_bound
    assert np.isnan(a.formula_value)
