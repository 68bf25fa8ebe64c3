import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from hardylorentz.errors import InconclusiveDivergence, ParseError, ValidationError
from hardylorentz.weights import (
    FAILS,
    HOLDS,
    INCONCLUSIVE,
    Weight,
    check_admissibility,
    check_shape,
    cumulative_B,
    evaluate,
    parse_weight,
    primitive,
    render_weight,
)

exps = st.floats(-3.0, 3.0, allow_nan=False).map(lambda x: round(x, 3))
logs = st.floats(-2.0, 2.0, allow_nan=False).map(lambda x: round(x, 3))
coeffs = st.floats(0.1, 10.0, allow_nan=False)


@st.composite
def weights(draw, max_pieces=3):
    n = draw(st.integers(1, max_pieces))
    los = sorted(draw(st.lists(st.floats(0.05, 20.0), min_size=n - 1, max_size=n - 1,
                               unique=True)))
    los = [0.0] + los
    return Weight([(lo, draw(coeffs), draw(exps), draw(logs)) for lo in los])


# -- eval -------------------------------------------------------------------


def test_eval_identity_power():
    assert evaluate(Weight.power(1.0), 2.0) == 2.0


def test_eval_log_family_at_inverse_e():
    ell = Weight.ell(1.0, 0.0)
    assert_allclose(evaluate(ell, math.exp(-1.0)), 2.0, rtol=1e-14)


def test_eval_inverse_square_tail_piece():
    w = Weight([(0, 1, 0), (1, 1, -2)])
    assert_allclose(evaluate(w, 4.0), 1 / 16, rtol=1e-15)


def test_eval_rejects_non_positive_argument():
    with pytest.raises(ValueError):
        evaluate(Weight.constant(), 0.0)


def test_negative_coefficient_rejected():
    with pytest.raises(ValidationError) as info:
        Weight([(0, -1.0, 0)])
    assert info.value.violations


def test_breakpoints_must_increase():
    with pytest.raises(ValidationError):
        Weight([(0, 1, 0), (2, 1, 0), (1, 1, 0)])


# -- primitive --------------------------------------------------------------


def test_primitive_constant():
    assert_allclose(primitive(Weight.constant(), 0.0, 3.0), 3.0, rtol=1e-15)


def test_primitive_inverse_square_tail():
    assert_allclose(primitive(Weight.power(-2.0), 1.0, math.inf), 1.0, rtol=1e-15)


def test_primitive_inverse_diverges_at_zero():
    assert primitive(Weight.power(-1.0), 0.0, 1.0) == math.inf


def test_primitive_log_piece_closed_form():
    # t^-1 (1+|log t|)^-2 on (0, 1]: substitute s = -log t
    w = Weight.power(-1.0, beta=-2.0)
    assert_allclose(primitive(w, 0.0, 1.0), 1.0, rtol=1e-12)


def test_primitive_log_divergence_and_bad_limits():
    w = Weight.power(-1.0, beta=-1.0)
    assert primitive(w, 0.0, 1.0) == math.inf
    with pytest.raises(ValueError):
        primitive(w, 2.0, 1.0)


def test_inconclusive_divergence_is_an_error_type():
    assert issubclass(InconclusiveDivergence, Exception)


@settings(max_examples=60, deadline=None)
@given(weights(), st.floats(0.01, 5.0), st.floats(1.1, 4.0), st.floats(1.1, 4.0))
def test_primitive_additive(w, a, f1, f2):
    b, c = a * f1, a * f1 * f2
    left = primitive(w, a, c)
    right = primitive(w, a, b) + primitive(w, b, c)
    assert_allclose(left, right, rtol=1e-12)


def test_closed_form_matches_quadrature_on_random_pieces():
    rng = np.random.default_rng(42)
    checked = 0
    while checked < 100:
        a0, a1 = rng.uniform(-3, 3, 2)
        w = Weight([(0, rng.uniform(0.1, 5), a0, 0.0),
                    (rng.uniform(0.2, 5), rng.uniform(0.1, 5), a1, 0.0)])
        lo = float(rng.choice([0.0, rng.uniform(0.01, 1.0)]))
        hi = float(rng.choice([math.inf, rng.uniform(2.0, 50.0)]))
        exact = primitive(w, lo, hi)
        if not math.isfinite(exact):
            continue
        assert_allclose(primitive(w, lo, hi, method="quad"), exact, rtol=1e-9)
        checked += 1


# -- cumulative B -------------------------------------------------------------


def test_cumulative_B_constant():
    assert_allclose(cumulative_B(Weight.constant(), 5.0), 5.0, rtol=1e-15)


def test_cumulative_B_piecewise():
    b = Weight([(0, 1, 1), (1, 1, -1)])
    assert_allclose(cumulative_B(b, math.e), 1.5, rtol=1e-14)


def test_cumulative_B_divergent_at_zero():
    with pytest.raises(ValidationError):
        cumulative_B(Weight.power(-2.0), 1.0)


@settings(max_examples=40, deadline=None)
@given(weights())
def test_cumulative_B_non_decreasing(b):
    if b.pieces[0].coeff > 0 and b.pieces[0].a <= -1:
        return
    t = np.geomspace(1e-4, 1e4, 200)
    B = b.cumulative(t)
    assert np.all(np.diff(B) >= -1e-12 * np.abs(B[1:]))


# -- admissibility ------------------------------------------------------------


def test_admissibility_member_example():
    v = Weight([(0, 1, -1), (1, 1, -2)])
    rep = check_admissibility(v, 1.0, 1.0)
    assert rep.nontriv_ok and rep.nondegen_ok and rep.member


def test_admissibility_constant_fails_finiteness():
    rep = check_admissibility(Weight.constant(), 2.0, 1.5)
    assert not rep.nontriv_ok
    assert not rep.member


def test_admissibility_report_has_diagnostics():
    rep = check_admissibility(Weight([(0, 1, -1), (1, 1, -2)]), 1.0, 1.0)
    assert "probes" in rep.diagnostics


# -- shape checks -------------------------------------------------------------


def test_q_r_boundary_pure_power_holds():
    assert check_shape(Weight.power(0.5), "q_r", r=2.0) == HOLDS


def test_q_r_fails_above_boundary():
    assert check_shape(Weight.power(1.0), "q_r", r=2.0) == FAILS


def test_q_r_log_boundary_inconclusive():
    assert check_shape(Weight.power(0.5, beta=1.0), "q_r", r=2.0) == INCONCLUSIVE


def test_quasi_increasing_square():
    assert check_shape(Weight.power(2.0), "quasi_increasing") == HOLDS


def test_quasi_increasing_inverse_fails():
    assert check_shape(Weight.power(-1.0), "quasi_increasing") == FAILS


def test_quasi_increasing_flat_with_negative_log_inconclusive():
    w = Weight([(0, 1, 0, -1), (1, 1, 1, 0)])
    assert check_shape(w, "quasi_increasing") == INCONCLUSIVE


def test_quasi_increasing_decaying_log_tail_fails():
    assert check_shape(Weight.power(0.0, beta=-1.0), "quasi_increasing") == FAILS


def test_b_over_power_holds_for_constant_b():
    # B(t) / t^{alpha/r} = t^{1/2}
    assert check_shape(Weight.constant(), "b_over_power", r=2.0, alpha=1.0) == HOLDS


def test_check_shape_unknown_kind():
    with pytest.raises(ValueError):
        check_shape(Weight.constant(), "convex")


@settings(max_examples=50, deadline=None)
@given(weights())
def test_delta2_holds_for_every_weight(w):
    assert check_shape(w, "delta2") in (HOLDS, INCONCLUSIVE)
    if all(p.coeff > 0 for p in w.pieces):
        assert check_shape(w, "delta2") == HOLDS


# -- literal grammar ----------------------------------------------------------


def test_parse_weight_literal():
    w = parse_weight("[(0,1,-1,0),(1,1,-2,0)]")
    assert w == Weight([(0, 1, -1, 0), (1, 1, -2, 0)])


def test_parse_weight_bad_literal():
    with pytest.raises(ParseError):
        parse_weight("[(0,1,")


def test_parse_weight_negative_coefficient():
    with pytest.raises(ValidationError):
        parse_weight("[(0,-1,0)]")


@settings(max_examples=50, deadline=None)
@given(weights())
def test_render_parse_round_trip(w):
    assert parse_weight(render_weight(w)) == w
