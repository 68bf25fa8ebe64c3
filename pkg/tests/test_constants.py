import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from hardylorentz.constants import (
    copson_constant,
    derived_weights,
    gks_constant,
    gks_regime,
    hardy_constant,
    kernel_B,
    kernel_frak,
    krepick_constant,
    supop_D,
    supop_E,
)
from hardylorentz.errors import AdmissibilityError, RegimeError
from hardylorentz.grid import Grid
from hardylorentz.verify import brute_force_background, equivalence_report
from hardylorentz.weights import Weight

W = Weight
ONE = W.constant()
MEMBER = W([(0, 1, -1), (1, 1, -2)])
SMALL = Grid(n_points=512)


def bp(a0, a1):
    return W.broken_power(a0, a1)


def kinked(a0, a1):
    # continuous at 1, as required of u
    return W([(0, 1, a0), (1, 1, a1)])


# (which, exponents, u, v, w) found by a seeded search for finite admissible cases
BACKGROUND_SUITE = [
    ("gks", (2, 2, 2), (-2.47, -1.51), (-2.65, 1.74), (0.08, -0.98)),
    ("gks", (2, 2, 2), (-2.85, -2.44), (-1.4, 1.92), (0.16, -0.45)),
    ("gks", (3, 2, 4), (-2.84, -2.97), (-0.6, 2.31), (1.92, 2.47)),
    ("gks", (3, 2, 4), (-2.62, -2.26), (-0.42, 1.98), (-0.95, -0.43)),
    ("krepick", (2, 2, 2), (1.47, -1.69), (-2.18, 1.45), (1.04, -1.36)),
    ("krepick", (2, 2, 2), (2.09, -2.41), (-0.35, 2.36), (-0.45, 0.39)),
    ("krepick", (2, 3, 3), (0.25, -1.21), (0.31, 2.61), (2.21, 0.46)),
    ("krepick", (2, 3, 3), (-0.91, -2.38), (-1.19, 1.84), (-0.04, -1.97)),
    ("supD", (2,), (1.46, -2.85), (-0.43, 0.91), (-0.24, -1.57)),
    ("supD", (2,), (-1.04, -1.18), (0.56, 1.51), (2.63, -2.44)),
    ("supD", (3,), (0.28, -2.01), (0.1, 2.76), (-0.45, -0.45)),
    ("supD", (3,), (2.65, -1.04), (1.43, -1.02), (2.72, -2.78)),
    ("supE", (2,), (0.32, -0.87), (1.49, 1.21), (1.19, -0.73)),
    ("supE", (2,), (0.06, -2.81), (0.66, 1.5), (2.74, -1.78)),
    ("supE", (1.5,), (0.63, -1.98), (0.71, 1.55), (2.13, -1.09)),
    ("supE", (1.5,), (-2.48, -2.04), (-0.37, 1.73), (2.31, 1.53)),
]
BACKGROUND_WINDOW = 16.0


def background_inputs(exps, u, v, w):
    d = dict(zip("pmq", exps))
    d.update(u=kinked(*u), v=bp(*v), w=bp(*w))
    return d


def background_formula(which, d, grid=None):
    if which == "gks":
        return gks_constant(d["p"], d["m"], d["q"], d["u"], d["v"], d["w"], grid)
    if which == "krepick":
        return krepick_constant(d["p"], d["m"], d["q"], d["u"], d["v"], d["w"], grid)
    if which == "supD":
        return supop_D(d["p"], 0.0, d["u"], d["v"], d["w"], grid)
    return supop_E(d["p"], 0.0, d["u"], d["v"], d["w"], grid)


# -- derived weights --------------------------------------------------------------------


def test_v1_closed_form_on_unit_interval():
    dw = derived_weights(MEMBER, 1.0, 1.0)
    t = np.array([1e-4, 0.01, 0.3, 1.0])
    assert_allclose(dw.v1(t), t * (2 + np.log(1 / t)), rtol=1e-12)


def test_v0_v1_bilinear_scaling():
    t = np.geomspace(1e-3, 1e3, 7)
    base = derived_weights(MEMBER, 1.0, 1.0)
    dbl = derived_weights(MEMBER.scaled(2.0), 1.0, 1.0)
    assert_allclose(dbl.v1(t), 2 * base.v1(t), rtol=1e-13)
    assert_allclose(dbl.v0(t), 4 * base.v0(t), rtol=1e-13)


def test_v2_scaling_exponent():
    v = bp(-1.7, -2.2)
    m, p, mu = 3.0, 2.0, 7.0
    t = np.array([0.01, 0.3, 1.0, 3.0, 100.0])
    ratio = derived_weights(v.scaled(mu), m, p).v2(t) / derived_weights(v, m, p).v2(t)
    assert_allclose(ratio, mu ** (1 - m / (m - 1)), rtol=1e-12)


def test_derived_weights_rejects_inadmissible_v():
    with pytest.raises(AdmissibilityError):
        derived_weights(ONE, 2.0, 2.0)


# -- Hardy and Copson ---------------------------------------------------------------------


def test_hardy_classical_is_one():
    assert_allclose(hardy_constant(2, 2, ONE, W.power(-2)).value, 1.0, rtol=1e-12)


def test_hardy_integral_case():
    # (int_0^1 (1 - x) x dx)^{1/2}
    got = hardy_constant(2, 1, ONE, W.indicator(0, 1)).value
    assert_allclose(got, math.sqrt(1 / 6), rtol=1e-3)


def test_hardy_zero_w():
    assert hardy_constant(2, 2, ONE, W.zero()).value == 0.0


def test_hardy_needs_p_above_one():
    with pytest.raises(RegimeError):
        hardy_constant(1.0, 2, ONE, W.power(-2))


def test_copson_mirror_is_one():
    assert_allclose(copson_constant(2, 2, W.power(2), ONE).value, 1.0, rtol=1e-12)


def test_copson_zero_w():
    assert copson_constant(2, 2, W.power(2), W.zero()).value == 0.0


def test_copson_blow_up_reports_inf():
    assert copson_constant(2, 3, W.power(2), W.indicator(0, 1)).value == math.inf


# -- supremal operators -----------------------------------------------------------------


def test_supD_zero_w():
    rep = supop_D(2, 0.0, kinked(0, -1), ONE, W.zero())
    assert rep.terms == {"D1": 0.0, "D2": 0.0}


def test_supD_analytic_first_term():
    rep = supop_D(2, 0.0, kinked(0, -1), ONE, W.indicator(0, 1))
    assert_allclose(rep.terms["D1"], math.sqrt(0.5), rtol=1e-8)


def test_supD_linear_in_w():
    # the left side is an L^1(w) norm, so every term is linear in w
    u = kinked(0, -1)
    base = supop_D(2, 0.0, u, ONE, W.indicator(0, 1))
    dbl = supop_D(2, 0.0, u, ONE, W.indicator(0, 1, 2.0))
    for k in base.terms:
        assert_allclose(dbl.terms[k], 2 * base.terms[k], rtol=1e-9)


def test_supE_zero_w():
    rep = supop_E(2, 0.0, ONE, W.power(2), W.zero())
    assert rep.terms == {"E1": 0.0, "E2": 0.0}


def test_supE_analytic_first_term():
    rep = supop_E(2, 0.0, ONE, W.power(2), W.indicator(0, 1))
    assert_allclose(rep.terms["E1"], 1.0, rtol=1e-8)


def test_supE_scaling_in_v():
    base = supop_E(2, 0.0, ONE, W.power(2), W.indicator(0, 1))
    scaled = supop_E(2, 0.0, ONE, W.power(2, coeff=7.0), W.indicator(0, 1))
    # mu^{(1 - p')/p'} with p' = 2
    assert_allclose(scaled.terms["E1"], base.terms["E1"] * 7.0 ** -0.5, rtol=1e-9)


# -- iterated operators -------------------------------------------------------------------


def test_gks_zero_w():
    d = background_inputs(*BACKGROUND_SUITE[0][1:])
    assert gks_constant(2, 2, 2, d["u"], d["v"], W.zero()).value == 0.0


def test_gks_regime_dispatch():
    assert gks_regime(3, 2, 4) == "b"
    assert gks_regime(2, 2, 2) == "a"
    with pytest.raises(RegimeError):
        gks_regime(3, 2, 2)


def test_krepick_zero_w():
    d = background_inputs(*BACKGROUND_SUITE[4][1:])
    assert krepick_constant(2, 2, 2, d["u"], d["v"], W.zero()).value == 0.0


def test_krepick_scaling_in_w():
    _, exps, u, v, w = BACKGROUND_SUITE[4]
    d = background_inputs(exps, u, v, w)
    base = krepick_constant(*exps, d["u"], d["v"], d["w"], SMALL)
    scaled = krepick_constant(*exps, d["u"], d["v"], d["w"].scaled(7.0), SMALL)
    assert_allclose(scaled.terms["G1"], base.terms["G1"] * 7.0 ** (1 / exps[2]), rtol=1e-9)


@pytest.mark.parametrize("case", BACKGROUND_SUITE, ids=lambda c: f"{c[0]}{c[1]}")
def test_background_formula_within_window(case):
    which, exps, u, v, w = case
    d = background_inputs(exps, u, v, w)
    formula = background_formula(which, d)
    oracle = brute_force_background(which, d, n_samples=300, refine_steps=10,
                                    formula=formula)
    assert equivalence_report(formula, oracle, BACKGROUND_WINDOW).passed, oracle.ratio


# -- kernels ------------------------------------------------------------------------------


def test_kernel_B_unit_b():
    assert_allclose(kernel_B(1.0, 2.0, 3.0, 2.0, ONE), 1.0, rtol=1e-12)


def test_kernel_B_vanishes_on_short_interval():
    assert kernel_B(1.0, 1.0 + 1e-9, 3.0, 2.0, ONE) < 1e-20


def test_kernel_B_tilde_with_unit_alpha_matches_plain():
    rng = np.random.default_rng(42)
    b = bp(0.5, -0.5)
    for _ in range(5):
        t = rng.uniform(0.1, 2.0)
        s = t + rng.uniform(0.1, 3.0)
        assert_allclose(kernel_B(t, s, 3.0, 2.0, b, "calB_tilde", 1.0),
                        kernel_B(t, s, 3.0, 2.0, b), rtol=1e-14)


def _power_kernel_constants(a, p, m):
    # v = s^a gives v1 = c1 s^{a+k+1} and v0 = c0 s^{2a+2k+1}
    k = m / p
    mc = m / (m - 1)
    c1 = 1 / (a + k + 1) - 1 / (a + 1)
    c0 = 1 / ((a + k + 1) * (-a - 1))
    C = c0 / c1 ** (mc + 1)
    g1 = 2 * a + 2 * k + 1 - (mc + 1) * (a + k + 1)
    return C, g1, mc


def test_kernel_frak_power_weight_closed_forms():
    p, m, q, a = 2.0, 3.0, 2.0, -2.0
    C, g1, mc = _power_kernel_constants(a, p, m)
    g2 = g1 + mc
    e = m * (q - 1) / (m - q)
    dw = derived_weights(W.power(a), m, p)
    for s in (0.3, 1.0, 4.0):
        b1 = (C * s ** (g1 + 1) / -(g1 + 1)) ** e * C * s ** g1
        b2 = (C * s ** (g2 + 1) / (g2 + 1)) ** e * C * s ** g2
        assert_allclose(kernel_frak(s, "B1", dw, ONE, p, m, q), b1, rtol=1e-8)
        assert_allclose(kernel_frak(s, "B2", dw, ONE, p, m, q), b2, rtol=1e-8)


def test_kernel_frak_scaling_in_v():
    p, m, q, mu = 2.0, 3.0, 2.0, 7.0
    v = bp(-1.7, -2.2)
    mc = m / (m - 1)
    e = m * (q - 1) / (m - q)
    for s in (0.5, 2.0):
        scaled = kernel_frak(s, "B1", derived_weights(v.scaled(mu), m, p), ONE, p, m, q)
        base = kernel_frak(s, "B1", derived_weights(v, m, p), ONE, p, m, q)
        assert_allclose(scaled / base, mu ** ((1 - mc) * (e + 1)), rtol=1e-8)


def test_kernel_frak_needs_regime():
    dw = derived_weights(W.power(-2.0), 3.0, 2.0)
    with pytest.raises(RegimeError):
        kernel_frak(1.0, "B1", dw, ONE, 2.0, 3.0, 4.0)


# -- homogeneity and grid stability -------------------------------------------------------


@pytest.mark.parametrize("lam", [1 / 3, 7.0])
@pytest.mark.parametrize("case", BACKGROUND_SUITE[::2], ids=lambda c: f"{c[0]}{c[1]}")
def test_background_homogeneity(case, lam):
    which, exps, u, v, w = case
    d = background_inputs(exps, u, v, w)
    base = background_formula(which, d, SMALL).value
    p = exps[0]
    w_exp = 1.0 if which.startswith("sup") else 1.0 / exps[2]
    dw_ = dict(d, w=d["w"].scaled(lam))
    dv_ = dict(d, v=d["v"].scaled(lam))
    assert_allclose(background_formula(which, dw_, SMALL).value, base * lam ** w_exp,
                    rtol=1e-9)
    assert_allclose(background_formula(which, dv_, SMALL).value, base * lam ** (-1 / p),
                    rtol=1e-9)


@pytest.mark.parametrize("case", BACKGROUND_SUITE[::4], ids=lambda c: f"{c[0]}{c[1]}")
def test_background_grid_stability(case):
    which, exps, u, v, w = case
    d = background_inputs(exps, u, v, w)
    coarse = background_formula(which, d, Grid(n_points=1024)).value
    fine = background_formula(which, d, Grid(n_points=2048)).value
    assert abs(fine / coarse - 1) < 0.02
