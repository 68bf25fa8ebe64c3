"""Best-constant functionals for Hardy-type inequalities and derived weights.

Every functional is evaluated on a lattice made of the grid points plus the
breakpoints of the weights involved (each breakpoint is doubled by a point
a relative ``1e-9`` to its right so that jumps live in negligible cells).
Integrals of the input weights themselves are exact; integrals of derived
expressions use the power-law cell rule from :mod:`hardylorentz.grid`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from . import grid as G
from .errors import AdmissibilityError, DomainError, NonDegeneracyError, RegimeError
from .grid import Grid
from .weights import FuncWeight, Weight, check_admissibility

JUMP_OFFSET = 1e-9
EXTRA_DECADES = 4.0


@dataclass
class ConstantReport:
    """A computed constant together with its named terms.

    ``value`` is the sum of ``terms``; ``regime`` names the case applied.
    """

    value: float
    terms: dict[str, float]
    regime: str
    grid: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @classmethod
    def from_terms(cls, terms: dict[str, float], regime: str, grid: Grid,
                   notes: list[str] | None = None) -> "ConstantReport":
        vals = [float(v) for v in terms.values()]
        total = math.inf if any(math.isinf(v) for v in vals) else float(sum(vals))
        return cls(total, {k: float(v) for k, v in terms.items()}, regime,
                   grid.describe(), list(notes or []))

    def to_dict(self) -> dict:
        return {"value": self.value, "terms": dict(self.terms), "regime": self.regime,
                "grid": dict(self.grid), "notes": list(self.notes)}


# ---------------------------------------------------------------------------
# lattice helpers


def breakpoints_of(*weights) -> list[float]:
    out: list[float] = []
    for w in weights:
        if isinstance(w, Weight):
            out.extend(p.lo for p in w.pieces if p.lo > 0)
    return out


def lattice(grid: Grid, *weights, start: float | None = None, extra=()) -> np.ndarray:
    """Grid points plus weight breakpoints (and their right neighbours)."""
    pts = [grid.points]
    bps = np.array(breakpoints_of(*weights) + list(extra), dtype=float)
    if bps.size:
        pts.append(bps)
        pts.append(bps * (1.0 + JUMP_OFFSET))
    t = np.unique(np.concatenate(pts))
    t = t[(t >= grid.t_min) & (t <= grid.t_max)]
    if start is not None and start > 0:
        t = np.unique(np.concatenate([[start], t[t > start * (1.0 + 1e-12)]]))
    return t


def extended(grid: Grid, decades: float = EXTRA_DECADES) -> Grid:
    """Grid with the same spacing reaching ``decades`` further on both sides.

    Inner integrals and suprema run over the extended lattice so that
    quantities at the nominal cutoffs see their asymptotic behaviour.
    """
    span = math.log10(grid.t_max / grid.t_min)
    n = int(round((grid.n_points - 1) * (span + 2 * decades) / span)) + 1
    return Grid(grid.t_min * 10 ** -decades, grid.t_max * 10 ** decades, n)


def outer_range(t: np.ndarray, grid: Grid) -> tuple[int, int]:
    """Index bounds ``lo, hi`` of the lattice points inside the nominal grid."""
    lo = int(np.searchsorted(t, grid.t_min * (1 - 1e-12), side="left"))
    hi = int(np.searchsorted(t, grid.t_max * (1 + 1e-12), side="right")) - 1
    return lo, min(hi, len(t) - 2)


def values(w, t: np.ndarray) -> np.ndarray:
    """Pointwise values of a Weight or FuncWeight on the lattice."""
    return np.asarray(w(t), dtype=float)


def _pow(x, e):
    return G.safe_pow(x, e)


def _mul(*xs):
    out = xs[0]
    for x in xs[1:]:
        out = G.safe_mul(out, x)
    return out


def _root(x: float, p: float) -> float:
    if math.isinf(x):
        return math.inf
    return float(max(x, 0.0) ** (1.0 / p))


def _conj(p: float) -> float:
    if p <= 1:
        raise RegimeError(f"conjugate exponent requires p > 1, got {p}")
    return p / (p - 1.0)


# ---------------------------------------------------------------------------
# derived weights


@dataclass(frozen=True)
class DerivedWeights:
    """Weights ``v0``, ``v1``, ``v2`` and ``v2_tilde`` built from ``v``.

    Parameters
    ----------
    v : Weight
    m, p : float
    alpha : float
        Exponent used by ``v2_tilde``; ``alpha = 1`` reproduces ``v2``.
    """

    v: Weight
    m: float
    p: float
    alpha: float = 1.0

    @property
    def k(self) -> float:
        return self.m / self.p

    def head(self, t) -> np.ndarray:
        """``int_0^t v(s) s^{m/p} ds``."""
        return self.v.times_power(self.k).cumulative(t)

    def tail(self, t) -> np.ndarray:
        """``int_t^inf v``."""
        return self.v.tail(t)

    def v1(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return self.head(t) + _mul(_pow(t, self.k), self.tail(t))

    def v0(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return _mul(_pow(t, self.k - 1.0), self.head(t), self.tail(t))

    def v1_power(self) -> float:
        """Exponent of ``v1`` in the denominators: ``(2m - a)/(m - a)``."""
        a = self.alpha
        return (2.0 * self.m - a) / (self.m - a)

    def v2(self, t) -> np.ndarray:
        mc = _conj(self.m)
        pc = _conj(self.p)
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return G.safe_div(_mul(_pow(t, mc / pc), self.v0(t)), _pow(self.v1(t), mc + 1.0))

    def v2_tilde(self, t) -> np.ndarray:
        m, p, a = self.m, self.p, self.alpha
        if not (a < m and a < p):
            raise RegimeError("v2_tilde needs alpha < min(m, p)")
        t = np.atleast_1d(np.asarray(t, dtype=float))
        e = m * (p - a) / (p * (m - a))
        return G.safe_div(_mul(_pow(t, e), self.v0(t)), _pow(self.v1(t), self.v1_power()))


def derived_weights(v: Weight, m: float, p: float, alpha: float = 1.0,
                    check: bool = True) -> DerivedWeights:
    """Build :class:`DerivedWeights`, checking admissibility of ``v`` first."""
    if check:
        rep = check_admissibility(v, m, p)
        if not rep.member:
            raise AdmissibilityError(
                f"v fails {'finiteness' if not rep.nontriv_ok else 'non-degeneracy'} "
                f"for (m, p) = ({m}, {p})")
    return DerivedWeights(v, m, p, alpha)


# ---------------------------------------------------------------------------
# Hardy and Copson


def _check_hardy_exponents(p: float, q: float) -> None:
    if not p > 1:
        raise RegimeError(f"Hardy-type constants need p > 1, got p={p}")
    if not q > 0:
        raise RegimeError(f"q must be positive, got q={q}")


def hardy_constant(p: float, q: float, v: Weight, w: Weight,
                   grid: Grid | None = None) -> ConstantReport:
    """Characterising quantity for ``(int (int_0^x f)^q w)^{1/q} <= C (int f^p v)^{1/p}``.

    For ``p <= q`` the supremum ``sup_x (int_x^inf w)^{1/q} (int_0^x v^{1-p'})^{1/p'}``;
    for ``q < p`` the corresponding integral expression.
    """
    _check_hardy_exponents(p, q)
    grid = grid or Grid()
    pc = _conj(p)
    sigma = v.pow(1.0 - pc)
    t = lattice(grid, v, w)
    Wt = w.tail(t)
    S = sigma.cumulative(t)
    if p <= q:
        val = G.sup_all(t, _mul(_pow(Wt, 1.0 / q), _pow(S, 1.0 / pc)))
        return ConstantReport.from_terms({"C1": val}, "hardy-a", grid)
    r = p * q / (p - q)
    f = _mul(_pow(Wt, q / (p - q)), values(w, t), _pow(S, q * (p - 1.0) / (p - q)))
    val = _root(G.integral(t, f), r)
    return ConstantReport.from_terms({"C1": val}, "hardy-b", grid)


def copson_constant(p: float, q: float, v: Weight, w: Weight,
                    grid: Grid | None = None) -> ConstantReport:
    """Mirror of :func:`hardy_constant` for ``int_x^inf f``."""
    _check_hardy_exponents(p, q)
    grid = grid or Grid()
    pc = _conj(p)
    sigma = v.pow(1.0 - pc)
    t = lattice(grid, v, w)
    W0 = w.cumulative(t)
    S = sigma.tail(t)
    if p <= q:
        val = G.sup_all(t, _mul(_pow(W0, 1.0 / q), _pow(S, 1.0 / pc)))
        return ConstantReport.from_terms({"C2": val}, "copson-a", grid)
    r = p * q / (p - q)
    f = _mul(_pow(W0, q / (p - q)), values(w, t), _pow(S, q * (p - 1.0) / (p - q)))
    val = _root(G.integral(t, f), r)
    return ConstantReport.from_terms({"C2": val}, "copson-b", grid)


# ---------------------------------------------------------------------------
# supremal operators with offset


def _offset_setup(t0: float, grid: Grid, u, v: Weight, w: Weight):
    if t0 < 0:
        raise DomainError("offset t must be non-negative")
    t = lattice(grid, u, v, w, start=t0 if t0 > 0 else None)
    from_zero = t0 == 0
    base = 0.0 if from_zero else t0
    return t, from_zero, base


def _cum_offset(wt: Weight, t: np.ndarray, base: float) -> np.ndarray:
    """``int_base^t wt`` on the lattice (``base = 0`` means from zero)."""
    if base == 0:
        return wt.cumulative(t)
    return np.maximum(wt.cumulative(t) - float(wt.cumulative(np.array([base]))[0]), 0.0)


def _integral_offset(t: np.ndarray, f: np.ndarray, from_zero: bool) -> float:
    f = np.nan_to_num(np.asarray(f, dtype=float), nan=0.0, posinf=np.inf)
    total = float(np.sum(G.cell_integrals(t, f))) + G.tail_piece(t, f)
    if from_zero:
        total += G.head_piece(t, f)
    return total


def _check_offset_domain(t: np.ndarray, v: Weight, w: Weight, base: float) -> None:
    probe = t[len(t) // 2]
    iv = _cum_offset(v, np.array([probe]), base)[0]
    iw = _cum_offset(w, np.array([probe]), base)[0]
    if not (0 < iv < math.inf and 0 < iw < math.inf):
        raise DomainError("need 0 < int_t^x v < inf and 0 < int_t^x w < inf")


def supop_D(p: float, t0: float, u, v: Weight, w: Weight,
            grid: Grid | None = None) -> ConstantReport:
    """Terms ``D1`` and ``D2`` for the supremal operator ``sup_{y>=x} u(y) int_t^y g``."""
    grid = grid or Grid()
    pc = _conj(p)
    if w.is_zero():
        return ConstantReport.from_terms({"D1": 0.0, "D2": 0.0}, "supD", grid)
    t, from_zero, base = _offset_setup(t0, grid, u, v, w)
    _check_offset_domain(t, v, w, base)
    sigma = v.pow(1.0 - pc)
    V = _cum_offset(sigma, t, base)
    W = _cum_offset(w, t, base)
    ut, wt = values(u, t), values(w, t)
    Upc = G.sup_tail(t, _pow(ut, pc))
    S = G.sup_tail(t, _mul(Upc, V))
    d1 = _root(_integral_offset(t, _mul(S, _pow(W, pc - 1.0), wt), from_zero), pc)
    su = G.sup_tail(t, ut)
    inner = G.cum_to_inf(t, _mul(su, wt))
    d2 = _root(_integral_offset(t, _mul(_pow(inner, pc - 1.0), su, V, wt), from_zero), pc)
    return ConstantReport.from_terms({"D1": d1, "D2": d2}, "supD", grid)


def supop_E(p: float, t0: float, u, v: Weight, w: Weight,
            grid: Grid | None = None) -> ConstantReport:
    """Terms ``E1`` and ``E2`` for the supremal operator ``sup_{y>=x} u(y) int_y^inf g``."""
    grid = grid or Grid()
    pc = _conj(p)
    if w.is_zero():
        return ConstantReport.from_terms({"E1": 0.0, "E2": 0.0}, "supE", grid)
    t, from_zero, base = _offset_setup(t0, grid, u, v, w)
    _check_offset_domain(t, v, w, base)
    sigma = v.pow(1.0 - pc)
    Vt = sigma.tail(t)
    W = _cum_offset(w, t, base)
    ut, wt = values(u, t), values(w, t)
    S1 = G.sup_tail(t, _mul(_pow(ut, pc), Vt))
    e1 = _root(_integral_offset(t, _mul(S1, _pow(W, pc - 1.0), wt), from_zero), pc)
    # inner(x) = int_base^x sup_{[s,x]} u * w(s) ds
    n = len(t)
    inner = np.zeros(n)
    for j in range(1, n):
        h = _mul(G.window_sup_from_right(ut, j), wt[: j + 1])
        inner[j] = float(np.sum(G.cell_integrals(t[: j + 1], h)))
        if from_zero:
            head = G.head_piece(t[: j + 1], h)
            inner[j] += head
            if j == 1:
                inner[0] = head
    S2 = G.sup_tail(t, _mul(ut, Vt))
    e2 = _root(_integral_offset(t, _mul(_pow(inner, pc - 1.0), S2, wt), from_zero), pc)
    return ConstantReport.from_terms({"E1": e1, "E2": e2}, "supE", grid)


# ---------------------------------------------------------------------------
# iterated Hardy operators


def _positive_everywhere(w: Weight) -> bool:
    return all(p.coeff > 0 for p in w.pieces)


def gks_regime(p: float, m: float, q: float) -> str:
    if not (p > 1 and m > 1 and q > 1):
        raise RegimeError("iterated constants need p, m, q > 1")
    if p <= min(m, q):
        return "a"
    if m < p <= q:
        return "b"
    raise RegimeError(f"no case for q < p (p={p}, q={q})")


def gks_constant(p: float, m: float, q: float, u: Weight, v: Weight, w: Weight,
                 grid: Grid | None = None, check: bool = True) -> ConstantReport:
    """Terms for ``(int (int_t^inf (int_0^s h)^m u ds)^{q/m} w dt)^{1/q} <= C ||h||_{p,v}``.

    Case ``a`` (``p <= min(m, q)``) gives ``F1 + F2``; case ``b``
    (``m < p <= q``) gives ``F2 + F3``. Ties ``p = m = q`` use case ``a``.
    """
    case = gks_regime(p, m, q)
    grid = grid or Grid()
    if w.is_zero():
        names = ("F1", "F2") if case == "a" else ("F2", "F3")
        return ConstantReport.from_terms(dict.fromkeys(names, 0.0), f"gks-{case}", grid)
    pc = _conj(p)
    t = lattice(grid, u, v, w)
    Ut = u.tail(t)
    if check:
        _gks_nondegeneracy(u, w, q, m, t, Ut)
    sigma = v.pow(1.0 - pc)
    S = sigma.cumulative(t)
    W0 = w.cumulative(t)
    wt = values(w, t)
    inner = G.cum_to_inf(t, _mul(_pow(Ut, q / m), wt))
    F2 = G.sup_all(t, _mul(_pow(inner, 1.0 / q), _pow(S, 1.0 / pc)))
    if case == "a":
        F1 = G.sup_all(t, _mul(_pow(W0, 1.0 / q), _pow(Ut, 1.0 / m), _pow(S, 1.0 / pc)))
        return ConstantReport.from_terms({"F1": F1, "F2": F2}, "gks-a", grid)
    st = values(sigma, t)
    h = _mul(_pow(Ut, p / (p - m)), _pow(S, p * (m - 1.0) / (p - m)), st)
    tail = G.cum_to_inf(t, h)
    F3 = G.sup_all(t, _mul(_pow(W0, 1.0 / q), _pow(tail, (p - m) / (p * m))))
    return ConstantReport.from_terms({"F2": F2, "F3": F3}, "gks-b", grid)


def _gks_nondegeneracy(u: Weight, w: Weight, q: float, m: float, t, Ut) -> None:
    problems = []
    if not _positive_everywhere(u):
        problems.append("u must be strictly positive")
    if not math.isfinite(u.primitive(1.0, math.inf)):
        problems.append("int_t^inf u must be finite")
    if math.isfinite(u.primitive(0.0, math.inf)):
        problems.append("int_0^inf u must diverge")
    if not math.isfinite(w.primitive(0.0, 1.0)):
        problems.append("int_0^t w must be finite")
    if math.isfinite(w.primitive(1.0, math.inf)):
        problems.append("int_1^inf w must diverge")
    f = _mul(_pow(Ut, q / m), values(w, t))
    if not math.isfinite(G.tail_piece(t, f)):
        problems.append("int_t^inf w (int_s^inf u)^{q/m} must be finite")
    if G.head_piece(t, f) < math.inf:
        problems.append("int_0^1 w (int_s^inf u)^{q/m} must diverge")
    if problems:
        raise NonDegeneracyError("; ".join(problems))


def krepick_constant(p: float, m: float, q: float, u: Weight, v: Weight, w: Weight,
                     grid: Grid | None = None) -> ConstantReport:
    """Terms for ``(int (int_t^inf (int_s^inf h)^m u ds)^{q/m} w dt)^{1/q} <= C ||h||_{p,v}``.

    Case ``a`` gives ``G1``; case ``b`` gives ``G1 + G2``.
    """
    case = gks_regime(p, m, q)
    grid = grid or Grid()
    pc = _conj(p)
    t = lattice(grid, u, v, w)
    ut, wt = values(u, t), values(w, t)
    ucells = np.diff(u.cumulative(t))
    # A(t_j) = int_0^{t_j} w(s) (int_s^{t_j} u)^{q/m} ds
    n = len(t)
    A = np.empty(n)
    for j in range(n):
        us = np.zeros(j + 1)
        if j > 0:
            us[:j] = np.cumsum(ucells[:j][::-1])[::-1]
        h = _mul(wt[: j + 1], _pow(us, q / m))
        A[j] = float(np.sum(G.cell_integrals(t[: j + 1], h))) if j > 0 else 0.0
    P = G.cum_from_index(ucells, 0)
    A += G.head_kernel_integral(t, ut, wt, P, q / m)
    probe = A[n // 2]
    if not (0 < probe < math.inf) and not w.is_zero():
        raise AdmissibilityError("pair (u, w) is not admissible: "
                                 "int_0^t (int_s^t u)^{q/m} w must be positive and finite")
    sigma = v.pow(1.0 - pc)
    St = sigma.tail(t)
    G1 = G.sup_all(t, _mul(_pow(A, 1.0 / q), _pow(St, 1.0 / pc)))
    if case == "a":
        return ConstantReport.from_terms({"G1": G1}, "krepick-a", grid)
    W0 = w.cumulative(t)
    tail = np.empty(n)
    ex = m * (p - 1.0) / (p - m)
    for i in range(n):
        ui = np.zeros(n - i)
        ui[1:] = np.cumsum(ucells[i:])
        h = _mul(_pow(ui, m / (p - m)), ut[i:], _pow(St[i:], ex))
        tail[i] = float(np.sum(G.cell_integrals(t[i:], h))) + G.tail_piece(t[i:], h) \
            if n - i > 1 else 0.0
    G2 = G.sup_all(t, _mul(_pow(W0, 1.0 / q), _pow(tail, (p - m) / (p * m))))
    return ConstantReport.from_terms({"G1": G1, "G2": G2}, "krepick-b", grid)


# ---------------------------------------------------------------------------
# kernels


def _B_of(b: Weight) -> Callable[[float], float]:
    def B(y: float) -> float:
        return float(b.cumulative(np.array([y]))[0])
    return B


def kernel_B(t: float, s: float, p: float, q: float, b: Weight,
             variant: str = "calB", alpha: float = 1.0) -> float:
    """``(int_t^s (B/y)^{e} dy)^{k} (B(s)/s)^{e}``.

    ``variant="calB"`` uses ``e = p'`` and ``k = p(q-1)/(p-q)``;
    ``variant="calB_tilde"`` uses ``e = p/(p-alpha)`` and
    ``k = p(q-alpha)/(alpha(p-q))``.
    """
    if not t < s:
        raise DomainError("kernel_B needs t < s")
    if variant == "calB":
        alpha = 1.0
    elif variant != "calB_tilde":
        raise ValueError(f"unknown variant {variant!r}")
    if not (p > alpha and q < p):
        raise RegimeError("kernel_B needs alpha < p and q < p")
    e = p / (p - alpha)
    k = p * (q - alpha) / (alpha * (p - q))
    B = _B_of(b)
    val, _ = integrate.quad(lambda y: (B(y) / y) ** e, t, s, epsabs=0.0, epsrel=1e-12, limit=200)
    return float(val ** k * (B(s) / s) ** e)


def kernel_frak(s: float, variant: str, dw: DerivedWeights, b: Weight,
                p: float, m: float, q: float, alpha: float = 1.0) -> float:
    """Kernels built on ``v0 / v1^{(2m-alpha)/(m-alpha)}``.

    ``B1``: ``(int_s^inf k1)^{e} k1(s)`` and ``B2``: ``(int_0^s k2)^{e} k2(s)``
    with ``k1 = v0/v1^{...}``, ``k2 = B^{m/(m-alpha)} k1`` and
    ``e = m(q-alpha)/(alpha(m-q))``. The ``_tilde`` variants take ``alpha``
    from the argument; the plain ones fix ``alpha = 1``.
    """
    base = variant.replace("_tilde", "")
    if not variant.endswith("_tilde"):
        alpha = 1.0
    if base not in ("B1", "B2"):
        raise ValueError(f"unknown variant {variant!r}")
    if not (alpha < q < m):
        raise RegimeError("kernel_frak needs alpha < q < m")
    dwa = DerivedWeights(dw.v, m, p, alpha)
    ev = dwa.v1_power()
    e = m * (q - alpha) / (alpha * (m - q))
    B = _B_of(b)

    def k1(x: float) -> float:
        x_ = np.array([x])
        return float(G.safe_div(dwa.v0(x_), _pow(dwa.v1(x_), ev))[0])

    def k2(x: float) -> float:
        return B(x) ** (m / (m - alpha)) * k1(x)

    z0 = math.log(s)

    def quad_log(fun, lo, hi):
        a = -math.inf if lo == 0 else math.log(lo)
        c = math.inf if math.isinf(hi) else math.log(hi)

        def integrand(z: float) -> float:
            # outside the float range of t a convergent integrand has vanished
            if abs(z) > 700.0:
                return 0.0
            return fun(math.exp(z)) * math.exp(z)

        # a finite core around log s keeps quad away from the far tails
        core = (max(a, z0 - 40.0), min(c, z0 + 40.0))
        val = integrate.quad(integrand, *core, epsabs=0.0, epsrel=1e-10, limit=400)[0]
        tol = 1e-12 * abs(val)
        if a < core[0]:
            val += integrate.quad(integrand, a, core[0], epsabs=tol, epsrel=1e-10, limit=400)[0]
        if core[1] < c:
            val += integrate.quad(integrand, core[1], c, epsabs=tol, epsrel=1e-10, limit=400)[0]
        return val

    if base == "B1":
        return float(quad_log(k1, s, math.inf) ** e * k1(s))
    return float(quad_log(k2, 0.0, s) ** e * k2(s))
