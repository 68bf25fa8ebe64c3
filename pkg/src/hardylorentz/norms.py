"""Lorentz-type functionals of step functions and the associate norm of GGamma."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import grid as G
from .errors import AdmissibilityError
from .grid import Grid
from .stepfn import StepFn
from .weights import Weight, check_admissibility, primitive


@dataclass(frozen=True)
class Params:
    """Exponent tuple ``(p, m, q, alpha, r)`` with conjugates on demand."""

    p: float
    m: float
    q: float = 2.0
    alpha: float = 1.0
    r: float = 1.0

    def __post_init__(self) -> None:
        for name in ("p", "m", "q", "alpha", "r"):
            val = getattr(self, name)
            if not (val > 0 and math.isfinite(val)):
                raise ValueError(f"{name} must be a positive finite number, got {val}")

    @staticmethod
    def conj(x: float) -> float:
        if x <= 1:
            raise ValueError(f"conjugate exponent needs x > 1, got {x}")
        return x / (x - 1.0)

    @property
    def p_conj(self) -> float:
        return self.conj(self.p)

    @property
    def q_conj(self) -> float:
        return self.conj(self.q)

    @property
    def m_conj(self) -> float:
        return self.conj(self.m)

    @property
    def ratio(self) -> float:
        """``m / p``, the exponent in the admissibility conditions."""
        return self.m / self.p

    def hatted(self) -> "Params":
        """``(p, m, q) / alpha`` with ``alpha`` reset to one."""
        a = self.alpha
        return Params(self.p / a, self.m / a, self.q / a, 1.0, self.r)


def _root(x: float, p: float) -> float:
    if math.isinf(x):
        return math.inf
    return x ** (1.0 / p)


def _quad_against(fun, w: Weight, lo: float, hi: float) -> float:
    """``int_lo^hi fun(t) w(t) dt`` split at the breakpoints of ``w``."""
    cuts = [lo] + [b for b in w._los if lo < b < hi] + [hi]
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        def integrand(s: float) -> float:
            t = math.exp(s)
            return fun(t) * float(w(t)) * t
        val, _ = integrate.quad(integrand, math.log(a), math.log(b),
                                epsabs=0.0, epsrel=1e-11, limit=200)
        total += val
    return total


def lambda_norm(f: StepFn, p: float, w: Weight) -> float:
    """``(int (f*)^p w)^{1/p}`` evaluated exactly on each step."""
    return _root(f.integrate_power(p, w), p)


def gamma_norm(f: StepFn, p: float, w: Weight) -> float:
    """``(int (f**)^p w)^{1/p}``.

    ``f**`` equals the first value on the first step, ``C/t`` beyond the
    support and a rational function in between; the first and last parts
    are integrated exactly, the middle by quadrature.
    """
    if np.all(f.values == 0):
        return 0.0
    t = f.breakpoints
    vals = f.values
    cum = f.cumulative(t)
    total = vals[0] ** p * primitive(w, 0.0, t[0])
    for i in range(1, len(t)):
        c0, v, left = cum[i - 1], vals[i], t[i - 1]
        total += _quad_against(lambda s: ((c0 + v * (s - left)) / s) ** p, w, left, t[i])
    total += cum[-1] ** p * primitive(w.times_power(-p), t[-1], math.inf)
    return _root(total, p)


def ggamma_norm(f: StepFn, p: float, m: float, v: Weight) -> float:
    """``(int_0^inf (int_0^x (f*)^p)^{m/p} v(x) dx)^{1/m}``."""
    if np.all(f.values == 0):
        return 0.0
    k = m / p
    t = f.breakpoints
    vp = f.values ** p
    inner = np.concatenate([[0.0], np.cumsum(vp * f.measures)])
    total = f.values[0] ** m * primitive(v.times_power(k), 0.0, t[0])
    for i in range(1, len(t)):
        h0, slope, left = inner[i], vp[i], t[i - 1]
        total += _quad_against(lambda s: (h0 + slope * (s - left)) ** k, v, left, t[i])
    total += inner[-1] ** k * primitive(v, t[-1], math.inf)
    return _root(total, m)


def associate_regime(p: float, m: float) -> str:
    """Case label ``"i"``..``"iv"`` of the associate-norm formula."""
    if m <= 1:
        return "i" if p <= 1 else "ii"
    return "iii" if p <= 1 else "iv"


def _lattice(grid: Grid, g: StepFn) -> np.ndarray:
    pts = grid.points
    extra = g.breakpoints[(g.breakpoints > pts[0]) & (g.breakpoints < pts[-1])]
    return np.unique(np.concatenate([pts, extra]))


def associate_ggamma_norm(g: StepFn, p: float, m: float, v: Weight,
                          grid: Grid | None = None) -> float:
    """Regime-dependent expression equivalent to the associate norm of GGamma.

    Parameters
    ----------
    g : StepFn
        Non-increasing argument.
    p, m : float
        Exponents of GGamma(p, m, v).
    v : Weight
        Must satisfy the finiteness and non-degeneracy conditions.
    grid : Grid, optional
        Lattice for suprema and quadrature; breakpoints of ``g`` are added.

    Returns
    -------
    float
        The raw formula value; equivalence constants are not applied.
    """
    from .constants import derived_weights

    rep = check_admissibility(v, m, p, grid)
    if not rep.member:
        raise AdmissibilityError(f"v is not admissible for (m, p) = ({m}, {p})")
    if np.all(g.values == 0):
        return 0.0
    grid = grid or Grid()
    t = _lattice(grid, g)
    dw = derived_weights(v, m, p)
    v0, v1 = dw.v0(t), dw.v1(t)
    cum = g.cumulative(t)
    gss = cum / t
    case = associate_regime(p, m)
    if case == "i":
        return G.sup_all(t, G.safe_div(cum, v1 ** (1.0 / m)))
    pc = Params.conj(p) if p > 1 else None
    mc = Params.conj(m) if m > 1 else None
    if case == "ii":
        tail = G.cum_to_inf(t, gss ** pc) ** (1.0 / pc)
        return G.sup_all(t, G.safe_div(G.safe_mul(tail, t ** (1.0 / p)), v1 ** (1.0 / m)))
    kern = G.safe_div(v0, v1 ** (mc + 1.0))
    if case == "iii":
        return _root(G.integral(t, G.safe_mul(cum ** mc, kern)), mc)
    tail = G.cum_to_inf(t, gss ** pc)
    inner = G.safe_mul(tail ** (mc / pc), t ** (mc / pc))
    return _root(G.integral(t, G.safe_mul(inner, kern)), mc)
