"""Best constant of the restricted inequality for ``T_{u,b}`` and maximal-operator norms.

All seven parameter regimes share one term library written for a generic
exponent ``alpha``. The restricted constant ``K`` is the library evaluated at
``alpha = 1`` with ``U = u`` and ``R = u/B``; the maximal-operator norm uses
``U = B^{1/alpha}/phi`` and ``R = 1/phi`` with the unhatted exponents. The
reduced path rescales exponents by ``1/alpha``, evaluates ``K`` and raises
each term to ``1/alpha``, which reproduces the direct terms exactly.

Integrals of kernels of the form ``F(s)^k F'(s)`` are evaluated through the
antiderivative ``F^{k+1}/(k+1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from . import grid as G
from .constants import (ConstantReport, DerivedWeights, derived_weights, extended, lattice,
                        outer_range, values)
from .errors import (AdmissibilityError, DisagreementError, RegimeError, ShapeError,
                     UncoveredRegion, ValidationError)
from .grid import Grid
from .weights import FuncWeight, Weight, check_shape, cumulative_B

_pow = G.safe_pow


def _mul(*xs):
    out = xs[0]
    for x in xs[1:]:
        out = G.safe_mul(out, x)
    return out


# ---------------------------------------------------------------------------
# specs


@dataclass(frozen=True)
class RestrictedSpec:
    """Data of the restricted inequality: exponents and the four weights."""

    p: float
    m: float
    q: float
    u: Weight | FuncWeight
    b: Weight
    v: Weight
    w: Weight
    name: str = ""

    def validate(self, grid: Grid) -> None:
        problems = []
        if isinstance(self.u, Weight) and not self.u.is_continuous():
            problems.append("u must be continuous")
        t = lattice(grid, self.b)
        bt = values(self.b, t)
        if np.any(np.diff(bt) > 1e-12 * np.maximum(bt[:-1], 1e-300)):
            problems.append("b must be non-increasing")
        if problems:
            raise ValidationError("; ".join(problems), problems)
        cumulative_B(self.b, grid.points)


@dataclass(frozen=True)
class MaximalSpec:
    """Data of the maximal-operator problem ``M_{phi, Lambda^alpha(b)}``."""

    p: float
    m: float
    q: float
    alpha: float
    r: float
    b: Weight
    phi: Weight
    v: Weight
    w: Weight
    name: str = ""

    def with_w(self, w: Weight) -> "MaximalSpec":
        return replace(self, w=w)


# ---------------------------------------------------------------------------
# dispatch


def restricted_regime(p: float, m: float, q: float) -> str:
    """Case label among ``3.2 .. 3.5ii`` for the restricted constant."""
    for name, val in (("p", p), ("m", m), ("q", q)):
        if not (val > 0 and math.isfinite(val)):
            raise RegimeError(f"{name} must be positive and finite, got {val}")
    if q <= 1:
        raise RegimeError(f"q must exceed 1, got q={q}")
    if m <= 1:
        if p <= 1:
            return "3.2"
        return "3.3i" if p <= q else "3.3ii"
    if p <= 1:
        return "3.4i" if m <= q else "3.4ii"
    if max(p, m) <= q:
        return "3.5i"
    if m <= q < p:
        return "3.5ii"
    if p <= q < m:
        raise UncoveredRegion(f"uncovered: 1<p<=q<m (p={p}, q={q}, m={m})")
    raise UncoveredRegion(f"uncovered: 1<q<min(p,m) (p={p}, q={q}, m={m})")


def maximal_regime(p: float, m: float, q: float, alpha: float) -> str:
    """Case label among ``4.2 .. 4.5ii``; the restricted rule on ``(p, m, q)/alpha``."""
    if not alpha > 0:
        raise RegimeError("alpha must be positive")
    return "4" + restricted_regime(p / alpha, m / alpha, q / alpha)[1:]


# ---------------------------------------------------------------------------
# generic term library


@dataclass
class _Ctx:
    t: np.ndarray
    p: float
    m: float
    q: float
    a: float
    U: np.ndarray
    R: np.ndarray
    Ba: np.ndarray
    B: np.ndarray
    dw: DerivedWeights
    w: Weight
    lo: int = 0
    hi: int = -1
    notes: list = field(default_factory=list)

    # -- basic arrays ---------------------------------------------------------

    @cached_property
    def n(self) -> int:
        return len(self.t)

    @cached_property
    def wt(self) -> np.ndarray:
        return values(self.w, self.t)

    @cached_property
    def W0(self) -> np.ndarray:
        return self.w.cumulative(self.t)

    @cached_property
    def wcells(self) -> np.ndarray:
        return np.maximum(np.diff(self.W0), 0.0)

    @cached_property
    def v0(self) -> np.ndarray:
        return self.dw.v0(self.t)

    @cached_property
    def v1(self) -> np.ndarray:
        return self.dw.v1(self.t)

    @cached_property
    def v1m(self) -> np.ndarray:
        return _pow(self.v1, -1.0 / self.m)

    @cached_property
    def c_t(self) -> np.ndarray:
        return _mul(_pow(self.t, 1.0 / self.p), self.v1m)

    @cached_property
    def supR(self) -> np.ndarray:
        return G.sup_tail(self.t, self.R)

    @cached_property
    def tailRq(self) -> np.ndarray:
        """``int_x^inf (sup_{tau>=y} R)^q w(y) dy``."""
        return G.cum_to_inf(self.t, _mul(_pow(self.supR, self.q), self.wt))

    @cached_property
    def Uq(self) -> np.ndarray:
        return _pow(self.U, self.q)

    @cached_property
    def A0(self) -> np.ndarray:
        """``int_0^t sup_{[x,t]} U^q w(x) dx``."""
        t, out = self.t, np.zeros(self.n)
        for j in range(1, self.n):
            h = _mul(G.window_sup_from_right(self.Uq, j), self.wt[: j + 1])
            out[j] = G.head_piece(t[: j + 1], h) + float(np.sum(G.cell_integrals(t[: j + 1], h)))
            if j == 1:
                out[0] = G.head_piece(t[:2], h)
        return out

    @cached_property
    def Amat(self) -> np.ndarray:
        """``Amat[i, j] = int_{t_i}^{t_j} sup_{[x,t_j]} U^q w(x) dx`` for ``i <= j``."""
        n = self.n
        A = np.zeros((n, n))
        for j in range(1, n):
            h = _mul(G.window_sup_from_right(self.Uq, j), self.wt[: j + 1])
            c = G.cell_integrals(self.t[: j + 1], h)
            A[:j, j] = np.cumsum(c[::-1])[::-1]
        return A

    # -- kernels in B ---------------------------------------------------------

    @cached_property
    def pe(self) -> float:
        return self.p / (self.p - self.a)

    @cached_property
    def bcells(self) -> np.ndarray:
        """Cell integrals of ``(B(y)/y)^{p/(p-alpha)}``."""
        return G.cell_integrals(self.t, _pow(self.B / self.t, self.pe))

    def Pb_from(self, i: int) -> np.ndarray:
        return G.cum_from_index(self.bcells, i)

    def wcum_from(self, i: int) -> np.ndarray:
        return G.cum_from_index(self.wcells, i)

    def IB_from(self, i: int) -> np.ndarray:
        """``int_t^tau calB~(t, s) ds`` for ``tau >= t = t_i``."""
        p, q, a = self.p, self.q, self.a
        k1 = q * (p - a) / (a * (p - q))
        return _pow(self.Pb_from(i), k1) / k1

    # -- kernels in v ---------------------------------------------------------

    @cached_property
    def k1(self) -> np.ndarray:
        return G.safe_div(self.v0, _pow(self.v1, self.dw.v1_power()))

    @cached_property
    def k2(self) -> np.ndarray:
        return _mul(_pow(self.B, self.m / (self.m - self.a)), self.k1)

    @cached_property
    def v2t(self) -> np.ndarray:
        m, p, a = self.m, self.p, self.a
        return _mul(_pow(self.t, m * (p - a) / (p * (m - a))), self.k1)

    @cached_property
    def es(self) -> float:
        m, p, a = self.m, self.p, self.a
        return m * a / (p * (m - a))

    @cached_property
    def I(self) -> np.ndarray:
        """``int_0^t (int_s^t (B/y)^{pe} dy)^{em} v2~(s) ds``."""
        m, p, a = self.m, self.p, self.a
        em = m * (p - a) / (p * (m - a))
        t, out = self.t, np.zeros(self.n)
        kern = _pow(self.B / t, self.pe)
        for j in range(1, self.n):
            P = np.zeros(j + 1)
            P[:j] = np.cumsum(self.bcells[:j][::-1])[::-1]
            h = _mul(_pow(P, em), self.v2t[: j + 1])
            out[j] = float(np.sum(G.cell_integrals(t[: j + 1], h)))
        out += G.head_kernel_integral(t, kern, self.v2t, G.cum_from_index(self.bcells, 0), em)
        return out

    @cached_property
    def V2s(self) -> np.ndarray:
        """``int_0^inf (s + t)^{-es} v2~(s) ds`` at every lattice ``t``."""
        out = np.empty(self.n)
        for i, T in enumerate(self.t):
            out[i] = G.integral(self.t, _mul(_pow(self.t + T, -self.es), self.v2t))
        return out

    # -- small helpers --------------------------------------------------------

    def tail_from(self, i: int, f: np.ndarray) -> float:
        """``int_{t_i}^inf`` of ``f`` given on ``t[i:]``."""
        tt = self.t[i:]
        f = np.nan_to_num(np.asarray(f, dtype=float), nan=0.0, posinf=np.inf)
        return float(np.sum(G.cell_integrals(tt, f))) + G.tail_piece(tt, f)

    def sup_from(self, i: int, f: np.ndarray) -> float:
        return float(G.sup_tail(self.t[i:], f)[0])

    def o(self, arr: np.ndarray) -> np.ndarray:
        """Restriction of a full-lattice array to the outer index range."""
        return np.asarray(arr)[self.lo: self.hi + 1]

    def outer_sup(self, arr: np.ndarray) -> float:
        arr = np.asarray(arr, dtype=float)
        if len(arr) == self.n:
            arr = self.o(arr)
        return G.sup_all(self.o(self.t), arr)

    def per_t(self, fn) -> np.ndarray:
        """Evaluate ``fn(i)`` for every outer lattice index."""
        return np.array([fn(i) for i in range(self.lo, self.hi + 1)])


def _root(x, e):
    return _pow(np.asarray(x, dtype=float), e)


def _terms_2(c: _Ctx) -> dict:
    q = c.q
    return {
        "T1": c.outer_sup(_mul(c.v1m, _root(c.A0, 1 / q))),
        "T2": c.outer_sup(_mul(c.Ba, c.v1m, c.supR, _root(c.W0, 1 / q))),
        "T3": c.outer_sup(_mul(c.Ba, c.v1m, _root(c.tailRq, 1 / q))),
    }


def _terms_3i(c: _Ctx) -> dict:
    p, q, a = c.p, c.q, c.a
    ex = (p - a) / (p * a)
    S1 = G.sup_tail(c.t, _mul(_pow(c.t, -1.0 / p), _root(c.A0, 1 / q)))
    g2 = _mul(c.supR, _root(c.W0, 1 / q))
    g3 = _root(c.tailRq, 1 / q)

    def t2(i):
        return c.sup_from(i, _mul(_pow(c.Pb_from(i), ex), g2[i:]))

    def t3(i):
        return c.sup_from(i, _mul(_pow(c.Pb_from(i), ex), g3[i:]))

    ct = c.o(c.c_t)
    return {
        "T1": c.outer_sup(_mul(c.c_t, S1)),
        "T2": c.outer_sup(_mul(ct, c.per_t(t2))),
        "T3": c.outer_sup(_mul(ct, c.per_t(t3))),
    }


def _ii_pieces(c: _Ctx):
    """Shared pieces of the ``q < p`` integral terms."""
    p, q = c.p, c.q
    oe, iw, r, e1 = (p - q) / (p * q), q / (p - q), p * q / (p - q), q / (q - p)
    return oe, iw, r, e1


def _terms_3ii(c: _Ctx) -> dict:
    p, q = c.p, c.q
    oe, iw, r, e1 = _ii_pieces(c)
    ct = c.o(c.c_t)
    S2 = G.sup_tail(c.t, _mul(c.U, _pow(c.t, -1.0 / p)))
    S3 = G.sup_tail(c.t, _mul(_pow(c.U, r), _pow(c.t, e1)))
    S4 = G.sup_tail(c.t, _mul(c.Uq, _pow(c.t, e1)))
    SR = G.sup_tail(c.t, _pow(c.R, r))
    Rq = _pow(c.supR, q)
    A = c.Amat

    def t3(i):
        return c.tail_from(i, _mul(S3[i:], _pow(c.wcum_from(i), iw), c.wt[i:]))

    def t4(i):
        return c.tail_from(i, _mul(_pow(A[i, i:], iw), S4[i:], c.wt[i:]))

    def t5(i):
        return c.sup_from(i, _mul(c.R[i:], _pow(c.IB_from(i), oe)))

    def t6(i):
        S = G.sup_tail(c.t[i:], _mul(SR[i:], c.IB_from(i)))
        return c.tail_from(i, _mul(S, _pow(c.wcum_from(i), iw), c.wt[i:]))

    def t7(i):
        return c.tail_from(i, _mul(_pow(c.tailRq[i:], iw), Rq[i:], c.IB_from(i), c.wt[i:]))

    W = _root(c.W0, 1 / q)
    return {
        "T1": c.outer_sup(_mul(c.v1m, _root(c.A0, 1 / q))),
        "T2": c.outer_sup(_mul(c.c_t, W, S2)),
        "T3": c.outer_sup(_mul(ct, _root(c.per_t(t3), oe))),
        "T4": c.outer_sup(_mul(ct, _root(c.per_t(t4), oe))),
        "T5": c.outer_sup(_mul(ct, c.o(W), c.per_t(t5))),
        "T6": c.outer_sup(_mul(ct, _root(c.per_t(t6), oe))),
        "T7": c.outer_sup(_mul(ct, _root(c.per_t(t7), oe))),
    }


def _terms_4i(c: _Ctx) -> dict:
    m, q, a = c.m, c.q, c.a
    oe = (m - a) / (m * a)
    K1 = _root(G.cum_to_inf(c.t, c.k1), oe)
    K2 = _root(G.cum_from_zero(c.t, c.k2), oe)
    return {
        "T1": c.outer_sup(_mul(K1, _root(c.A0, 1 / q))),
        "T2": c.outer_sup(_mul(K2, _root(c.W0, 1 / q), c.supR)),
        "T3": c.outer_sup(_mul(K2, _root(c.tailRq, 1 / q))),
    }


def _terms_4ii(c: _Ctx) -> dict:
    m, q, a = c.m, c.q, c.a
    oe, iw, r = (m - q) / (m * q), q / (m - q), m * q / (m - q)
    k = q * (m - a) / (a * (m - q))
    F1 = _pow(G.cum_to_inf(c.t, c.k1), k) / k
    F2 = _pow(G.cum_from_zero(c.t, c.k2), k) / k
    Wi = _pow(c.W0, iw)
    integ = lambda f: float(_root(G.integral(c.t, f), oe))  # noqa: E731
    SR = G.sup_tail(c.t, _pow(c.R, r))
    Rq = _pow(c.supR, q)
    return {
        "T1": integ(_mul(G.sup_tail(c.t, _mul(_pow(c.U, r), F1)), Wi, c.wt)),
        "T2": integ(_mul(_pow(c.A0, iw), G.sup_tail(c.t, _mul(c.Uq, F1)), c.wt)),
        "T3": integ(_mul(G.sup_tail(c.t, _mul(SR, F2)), Wi, c.wt)),
        "T4": integ(_mul(_pow(c.tailRq, iw), Rq, F2, c.wt)),
    }


def _check_v2(c: _Ctx) -> None:
    t, v2 = c.t, c.v2t
    weighted = _mul(_pow(t, -c.es), v2)
    problems = []
    if not math.isfinite(G.head_piece(t, v2)):
        problems.append("int_0^t v2 must be finite")
    if not math.isfinite(G.tail_piece(t, weighted)):
        problems.append("int_t^inf s^(-e) v2 must be finite")
    I = c.o(c.I)
    if not np.all(np.isfinite(I) & (I > 0)):
        problems.append("0 < I(t) < inf must hold")
    if math.isfinite(G.head_piece(t, weighted)):
        problems.append("int_0^1 s^(-e) v2 must diverge")
    if math.isfinite(G.tail_piece(t, v2)):
        problems.append("int_1^inf v2 must diverge")
    if problems:
        raise AdmissibilityError("v2 conditions fail: " + "; ".join(problems))


def _terms_5_common(c: _Ctx) -> dict:
    q, oe = c.q, (c.m - c.a) / (c.m * c.a)
    Ir = _root(c.I, oe)
    return {
        "T1": c.outer_sup(_mul(Ir, _root(c.W0, 1 / q), c.supR)),
        "T2": c.outer_sup(_mul(Ir, _root(c.tailRq, 1 / q))),
    }


def _terms_5i(c: _Ctx) -> dict:
    _check_v2(c)
    out = _terms_5_common(c)
    oe = (c.m - c.a) / (c.m * c.a)
    out["T3"] = c.outer_sup(_mul(_root(c.V2s, oe), _root(c.A0, 1 / c.q)))
    return out


def _terms_5ii(c: _Ctx) -> dict:
    _check_v2(c)
    out = _terms_5_common(c)
    q = c.q
    oem = (c.m - c.a) / (c.m * c.a)
    oe, iw, r, e1 = _ii_pieces(c)
    V2h = c.o(_root(G.cum_from_zero(c.t, c.v2t), oem))
    SR = G.sup_tail(c.t, _pow(c.R, r))
    Rq = _pow(c.supR, q)

    def t3(i):
        return c.sup_from(i, _mul(c.R[i:], _pow(c.IB_from(i), oe)))

    def t4(i):
        S = G.sup_tail(c.t[i:], _mul(SR[i:], c.IB_from(i)))
        return c.tail_from(i, _mul(S, _pow(c.wcum_from(i), iw), c.wt[i:]))

    def t5(i):
        return c.tail_from(i, _mul(_pow(c.tailRq[i:], iw), Rq[i:], c.IB_from(i), c.wt[i:]))

    Ur = _pow(c.U, r)
    Wi = _pow(c.W0, iw)
    Ai = _pow(c.A0, iw)

    def j1(i):
        T = c.t[i]
        S = G.sup_tail(c.t, _mul(Ur, _pow(c.t + T, e1)))
        return G.integral(c.t, _mul(S, Wi, c.wt))

    def j2(i):
        T = c.t[i]
        S = G.sup_tail(c.t, _mul(c.Uq, _pow(c.t + T, e1)))
        return G.integral(c.t, _mul(Ai, S, c.wt))

    front = c.o(_root(_mul(_pow(c.t, c.es), c.V2s), oem))
    out["T3"] = c.outer_sup(_mul(V2h, c.o(_root(c.W0, 1 / q)), c.per_t(t3)))
    out["T4"] = c.outer_sup(_mul(V2h, _root(c.per_t(t4), oe)))
    out["T5"] = c.outer_sup(_mul(V2h, _root(c.per_t(t5), oe)))
    out["T6"] = c.outer_sup(_mul(front, _root(c.per_t(j1), oe)))
    out["T7"] = c.outer_sup(_mul(front, _root(c.per_t(j2), oe)))
    return out


_TERMS = {
    "2": _terms_2, "3i": _terms_3i, "3ii": _terms_3ii, "4i": _terms_4i,
    "4ii": _terms_4ii, "5i": _terms_5i, "5ii": _terms_5ii,
}


def _evaluate(case: str, ctx: _Ctx) -> dict:
    if ctx.w.is_zero():
        n_terms = {"2": 3, "3i": 3, "3ii": 7, "4i": 3, "4ii": 4, "5i": 3, "5ii": 7}[case]
        return {f"T{k + 1}": 0.0 for k in range(n_terms)}
    return {k: float(v) for k, v in _TERMS[case](ctx).items()}


# ---------------------------------------------------------------------------
# restricted constant


def _restricted_ctx(spec: RestrictedSpec, grid: Grid) -> _Ctx:
    t = lattice(extended(grid), spec.u, spec.b, spec.v, spec.w)
    lo, hi = outer_range(t, grid)
    B = cumulative_B(spec.b, t)
    U = values(spec.u, t)
    dw = derived_weights(spec.v, spec.m, spec.p)
    return _Ctx(t, spec.p, spec.m, spec.q, 1.0, U, G.safe_div(U, B), B, B, dw, spec.w, lo, hi)


def k_restricted(spec: RestrictedSpec, grid: Grid | None = None) -> ConstantReport:
    """Characterising quantity for the best constant ``K`` of the restricted inequality.

    Parameters
    ----------
    spec : RestrictedSpec
    grid : Grid, optional

    Returns
    -------
    ConstantReport
        ``value`` is the sum of the displayed terms ``T1, T2, ...`` of the
        case selected by :func:`restricted_regime`; ``regime`` is e.g.
        ``"thm3.3ii"``.

    Raises
    ------
    UncoveredRegion, RegimeError, AdmissibilityError, ValidationError
    """
    grid = grid or Grid()
    case = restricted_regime(spec.p, spec.m, spec.q)
    spec.validate(grid)
    ctx = _restricted_ctx(spec, grid)
    terms = _evaluate(case[2:], ctx)
    return ConstantReport.from_terms(terms, "thm" + case, grid, ctx.notes)


# ---------------------------------------------------------------------------
# maximal operator


def shape_failures(spec: MaximalSpec) -> list[str]:
    """Names of the structural conditions on ``(b, phi, alpha, r)`` that fail."""
    failed = []
    if not spec.alpha <= spec.r:
        failed.append("alpha <= r")
    for kind, label, kw in (
        ("quasi_increasing", "phi quasi-increasing", {}),
        ("q_r", "phi in Q_r", {"r": spec.r}),
    ):
        verdict = check_shape(spec.phi, kind, **kw)
        if verdict != "holds":
            failed.append(f"{label} ({verdict})")
    if check_shape(spec.b, "delta2") != "holds":
        failed.append("B in Delta_2")
    try:
        cumulative_B(spec.b, np.array([1e-8, 1.0, 1e8]))
    except ValidationError:
        failed.append("0 < B < inf")
    if math.isfinite(spec.b.primitive(1.0, math.inf)):
        failed.append("B(inf) = inf")
    verdict = check_shape(spec.b, "b_over_power", r=spec.r, alpha=spec.alpha)
    if verdict != "holds":
        failed.append(f"B/t^(alpha/r) quasi-increasing ({verdict})")
    return failed


def _u_reduced(b: Weight, phi: Weight, alpha: float) -> FuncWeight:
    def fn(t: np.ndarray) -> np.ndarray:
        return G.safe_div(b.cumulative(t), _pow(values(phi, t), alpha))
    return FuncWeight(fn, label=f"B/phi^{alpha:g}")


def reduce_maximal(spec: MaximalSpec) -> tuple[RestrictedSpec, float]:
    """Restricted problem equivalent to the maximal-operator bound.

    Returns the restricted problem with ``u = B/phi^alpha`` and exponents divided by
    ``alpha`` together with ``alpha``; the norm equals ``K^{1/alpha}``.

    Raises
    ------
    ShapeError
        Listing every failed structural condition.
    """
    failed = shape_failures(spec)
    if failed:
        raise ShapeError("maximal spec fails: " + ", ".join(failed), failed)
    a = spec.alpha
    red = RestrictedSpec(spec.p / a, spec.m / a, spec.q / a, _u_reduced(spec.b, spec.phi, a),
                         spec.b, spec.v, spec.w, name=spec.name)
    return red, a


def _direct_ctx(spec: MaximalSpec, grid: Grid) -> _Ctx:
    t = lattice(extended(grid), spec.b, spec.phi, spec.v, spec.w)
    lo, hi = outer_range(t, grid)
    B = cumulative_B(spec.b, t)
    phi = values(spec.phi, t)
    Ba = _pow(B, 1.0 / spec.alpha)
    U = G.safe_div(Ba, phi)
    R = G.safe_div(np.ones_like(phi), phi)
    dw = derived_weights(spec.v, spec.m, spec.p, spec.alpha)
    return _Ctx(t, spec.p, spec.m, spec.q, spec.alpha, U, R, Ba, B, dw, spec.w, lo, hi)


def maximal_norm(spec: MaximalSpec, path: str = "direct", grid: Grid | None = None,
                 rtol: float = 1e-9) -> ConstantReport:
    """Characterising quantity for ``||M_{phi,Lambda^alpha(b)}||`` from GGamma into Lambda^q.

    Parameters
    ----------
    spec : MaximalSpec
    path : {"direct", "reduced", "both"}
        ``"direct"`` evaluates the terms with ``B^{1/alpha}/phi``;
        ``"reduced"`` evaluates ``K`` of the reduced problem and raises each
        term to ``1/alpha``; ``"both"`` runs the two and compares every term.
    grid : Grid, optional
    rtol : float
        Relative tolerance of the ``"both"`` comparison.

    Raises
    ------
    ShapeError, UncoveredRegion, RegimeError, DisagreementError
    """
    grid = grid or Grid()
    if path not in ("direct", "reduced", "both"):
        raise ValueError(f"unknown path {path!r}")
    case = maximal_regime(spec.p, spec.m, spec.q, spec.alpha)
    red, a = reduce_maximal(spec)
    if path in ("reduced", "both"):
        kr = k_restricted(red, grid)
        r_terms = {k: float(_pow(v, 1.0 / a)) for k, v in kr.terms.items()}
        k_root = float(_pow(kr.value, 1.0 / a))
        reduced = ConstantReport.from_terms(r_terms, "thm" + case, grid,
                                            [f"K(reduced)^(1/alpha) = {k_root!r}"])
        if path == "reduced":
            return reduced
    ctx = _direct_ctx(spec, grid)
    direct = ConstantReport.from_terms(_evaluate(case[2:], ctx), "thm" + case, grid)
    if path == "direct":
        return direct
    for k, dv in direct.terms.items():
        rv = reduced.terms[k]
        if math.isinf(dv) and math.isinf(rv):
            continue
        if not math.isclose(dv, rv, rel_tol=rtol, abs_tol=0.0):
            raise DisagreementError(f"term {k}: direct {dv!r} vs reduced {rv!r}")
    direct.notes.append("direct and reduced paths agree")
    return direct


# ---------------------------------------------------------------------------
# presets


def hardy_littlewood(p: float, m: float, q: float, v: Weight, w: Weight) -> MaximalSpec:
    """Hardy-Littlewood maximal operator: ``alpha = 1``, ``b = 1``, ``phi(t) = t``."""
    return MaximalSpec(p, m, q, 1.0, 1.0, Weight.constant(1.0), Weight.power(1.0), v, w,
                       name="hardy_littlewood")


def fractional(gamma: float, n: int, p: float, m: float, q: float, v: Weight,
               w: Weight) -> MaximalSpec:
    """Fractional maximal operator: ``phi(t) = t^{1 - gamma/n}``, ``0 <= gamma < n``."""
    if not 0 <= gamma < n:
        raise ValidationError("fractional preset needs 0 <= gamma < n")
    return MaximalSpec(p, m, q, 1.0, 1.0, Weight.constant(1.0),
                       Weight.power(1.0 - gamma / n), v, w, name=f"fractional({gamma:g},{n})")


def fractional_log(s: float, gamma: float, n: int, A0: float, Ainf: float, p: float,
                   m: float, q: float, v: Weight, w: Weight) -> MaximalSpec:
    """``M_{s,gamma,A}``: ``alpha = r = s``, ``phi(t) = t^{(n-gamma)/(s n)} l^A(t)``."""
    lam = (n - gamma) / (s * n)
    phi = Weight([(0.0, 1.0, lam, A0), (1.0, 1.0, lam, Ainf)], label="t^lam l^A")
    return MaximalSpec(p, m, q, s, s, Weight.constant(1.0), phi, v, w,
                       name=f"fractional_log({s:g},{gamma:g},{n},{A0:g},{Ainf:g})")


def lorentz_maximal(p0: float, q0: float, p: float, m: float, q: float, v: Weight,
                    w: Weight) -> MaximalSpec:
    """``M_{p0,q0}``: ``alpha = q0``, ``b = t^{q0/p0 - 1}``, ``phi = t^{1/p0}``, ``r = p0``."""
    return MaximalSpec(p, m, q, q0, p0, Weight.power(q0 / p0 - 1.0), Weight.power(1.0 / p0),
                       v, w, name=f"lorentz_maximal({p0:g},{q0:g})")
