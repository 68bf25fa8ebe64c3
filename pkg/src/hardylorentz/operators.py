"""The supremal operator ``T_{u,b}`` and exact identities used as test oracles."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from . import grid as G
from .constants import JUMP_OFFSET, values
from .errors import ValidationError
from .grid import Grid
from .stepfn import StepFn
from .weights import FuncWeight, Weight, check_shape, cumulative_B

# Gauss-Legendre nodes on [0, 1] for per-cell quadrature in log variable.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


@dataclass(frozen=True)
class OperatorSpec:
    """Weights of ``(T_{u,b} g)(t) = sup_{tau >= t} u(tau)/B(tau) int_0^tau g b``."""

    u: Weight | FuncWeight
    b: Weight

    def __post_init__(self) -> None:
        if isinstance(self.u, Weight) and not self.u.is_continuous():
            raise ValidationError("u must be continuous", ["u continuous"])

    def B(self, t) -> np.ndarray:
        return cumulative_B(self.b, np.atleast_1d(np.asarray(t, dtype=float)))

    def ratio(self, t: np.ndarray) -> np.ndarray:
        """``u(t) / B(t)`` on a lattice."""
        return G.safe_div(values(self.u, t), self.B(t))


def gb_cumulative(g: StepFn, b: Weight, t: np.ndarray) -> np.ndarray:
    """``int_0^t g b`` for a step function ``g`` at every entry of ``t``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    edges = np.concatenate([[0.0], g.breakpoints])
    Be = np.concatenate([[0.0], b.cumulative(g.breakpoints)])
    steps = np.concatenate([[0.0], np.cumsum(g.values * np.diff(Be))])
    k = np.searchsorted(g.breakpoints, t, side="left")
    inside = k < len(g.values)
    out = np.full(len(t), steps[-1])
    if np.any(inside):
        ki = k[inside]
        Bt = b.cumulative(t[inside])
        out[inside] = steps[ki] + g.values[ki] * (Bt - Be[ki])
    return out


def t_ub_profile(spec: OperatorSpec, g: StepFn, points: np.ndarray) -> np.ndarray:
    """``T_{u,b} g`` at every lattice point by one reverse cumulative maximum.

    Beyond the support of ``g`` the integral is constant, so the tail limit
    is decided by the growth of ``u/B`` at the last lattice point.
    """
    t = np.asarray(points, dtype=float)
    F = G.safe_mul(spec.ratio(t), gb_cumulative(g, spec.b, t))
    return G.sup_tail(t, F)


def t_ub(spec: OperatorSpec, g: StepFn, t, grid: Grid | None = None):
    """``(T_{u,b} g)(t)``.

    Parameters
    ----------
    spec : OperatorSpec
    g : StepFn
    t : float or array of float
        Positive evaluation points.
    grid : Grid, optional
        Lattice of candidate ``tau``; the breakpoints of ``g`` and the
        evaluation points are added.

    Returns
    -------
    float or ndarray
        ``inf`` where ``u/B`` is unbounded on the tail and ``g`` is nonzero.
    """
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(tt <= 0):
        raise ValueError("t_ub needs t > 0")
    grid = grid or Grid()
    bps = g.breakpoints
    pts = np.unique(np.concatenate([grid.points, bps, bps * (1.0 + JUMP_OFFSET), tt]))
    prof = t_ub_profile(spec, g, pts)
    out = prof[np.searchsorted(pts, tt)]
    return float(out[0]) if np.ndim(t) == 0 else out


# ---------------------------------------------------------------------------
# transfer of monotonicity


def _as_density(f) -> tuple[np.ndarray, np.ndarray]:
    """Breakpoints and values of a non-negative step density.

    Accepts a :class:`StepFn` or a pair ``(breakpoints, values)`` with the
    same convention but no monotonicity requirement.
    """
    if isinstance(f, StepFn):
        return np.asarray(f.breakpoints), np.asarray(f.values)
    t, v = (np.asarray(x, dtype=float) for x in f)
    if t.shape != v.shape or np.any(np.diff(t) <= 0) or np.any(t <= 0) or np.any(v < 0):
        raise ValidationError("density needs increasing positive breakpoints and values >= 0")
    return t, v


def _density_values(t_f: np.ndarray, v_f: np.ndarray, x: np.ndarray) -> np.ndarray:
    k = np.searchsorted(t_f, x, side="left")
    return np.append(v_f, 0.0)[k]


def critical_points(w: Weight) -> list[float]:
    """Breakpoints, ``t = 1`` and interior extrema of the pieces of ``w``."""
    out = [1.0]
    his = list(w._los[1:]) + [math.inf]
    for p, hi in zip(w.pieces, his):
        if p.lo > 0:
            out.append(p.lo)
        if p.coeff == 0 or p.a == 0 or p.beta == 0:
            continue
        # stationary points of a*s + beta*log(1 + |s|) in s = log t on either side of 0
        for s in (-p.beta / p.a - 1.0, 1.0 - p.beta / p.a):
            if s == 0 or abs(s) > 700 or (s > 0) != (s == -p.beta / p.a - 1.0):
                continue
            x = math.exp(s)
            if p.lo < x < hi:
                out.append(x)
    return out


def _sup_at_inf(w: Weight) -> float:
    last = w.pieces[-1]
    if last.coeff == 0:
        return 0.0
    if last.a > 0 or (last.a == 0 and last.beta > 0):
        return math.inf
    if last.a == 0 and last.beta == 0:
        return last.coeff
    return 0.0


def _range_of(t_f: np.ndarray, w: Weight) -> tuple[float, float]:
    special = np.array([*critical_points(w), *t_f], dtype=float)
    lo = float(min(special.min(), t_f[0])) * 1e-4
    hi = float(special.max()) * 10.0
    return lo, hi


def _transfer_rhs(t_f, v_f, w: Weight, n_points: int) -> float:
    lo, hi = _range_of(t_f, w)
    special = np.array([*critical_points(w), *t_f], dtype=float)
    pts = np.concatenate([np.geomspace(lo, hi, n_points), special,
                          special * (1.0 + JUMP_OFFSET), special * (1.0 - JUMP_OFFSET)])
    x = np.unique(pts[(pts >= lo) & (pts <= hi)])
    wx = values(w, x)
    wbar = np.maximum.accumulate(wx[::-1])[::-1]
    wbar = np.maximum(wbar, _sup_at_inf(w))
    fx = _density_values(t_f, v_f, x)
    prod = G.safe_mul(fx, wbar)
    head = float(fx[0] * wbar[0] * x[0])
    return head + float(np.sum(G.cell_integrals(x, prod)))


def _transfer_lhs(t_f, v_f, w: Weight, n_points: int) -> float:
    """Greedy feasible ``g``: keep mass where ``w`` beats every lattice point to
    the right, otherwise move it to the running maximiser."""
    lo, hi = _range_of(t_f, w)
    special = np.array([*critical_points(w), *t_f], dtype=float)
    special = special[(special > lo) & (special < hi)]
    # both one-sided limits at jumps are attainable targets for moved mass
    sides = [special * (1.0 - JUMP_OFFSET), special * (1.0 + JUMP_OFFSET)]
    n_geo = max(n_points - 3 * len(special), 16)
    x = np.unique(np.concatenate([np.geomspace(lo, hi, n_geo), special, *sides]))
    wx = values(w, x)
    S = np.maximum.accumulate(wx[::-1])[::-1]
    S = np.maximum(S, _sup_at_inf(w))
    # head cell (0, x0]: all mass moves to the best point at or after x0
    total = float(_density_values(t_f, v_f, x[:1])[0] * x[0] * S[0])
    a, b = np.log(x[:-1]), np.log(x[1:])
    s = a[:, None] + (b - a)[:, None] * _GL_X[None, :]
    xs = np.exp(s)
    fv = _density_values(t_f, v_f, xs.ravel()).reshape(xs.shape)
    wv = values(w, xs.ravel()).reshape(xs.shape)
    gain = np.maximum(wv, S[1:, None])
    if np.isinf(S[0]) and np.any(fv > 0):
        return math.inf
    cell = (b - a) * np.sum(_GL_W[None, :] * G.safe_mul(fv * xs, gain), axis=1)
    return total + float(np.sum(cell))


def transfer_monotone(f, w: Weight, mode: str = "rhs_formula", n_points: int = 400) -> float:
    """Either side of the transfer-of-monotonicity identity.

    Parameters
    ----------
    f : StepFn or (breakpoints, values)
        Non-negative step density, not necessarily monotone.
    w : Weight
    mode : {"rhs_formula", "lhs_oracle"}
        ``"rhs_formula"`` integrates ``f`` against the running supremum
        ``sup_{t >= x} w(t)`` on a fine lattice. ``"lhs_oracle"`` builds an
        explicit admissible ``g`` on a lattice of at most ``n_points``
        points by transporting mass rightward and returns ``int g w``.
    n_points : int
        Lattice size for the oracle.

    Returns
    -------
    float
    """
    t_f, v_f = _as_density(f)
    if np.all(v_f == 0):
        return 0.0
    if mode == "rhs_formula":
        return _transfer_rhs(t_f, v_f, w, max(4 * n_points, 2048))
    if mode == "lhs_oracle":
        return _transfer_lhs(t_f, v_f, w, n_points)
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# gluing


def _quad_weight(fun: Callable[[float], float], w: Weight, lo: float, hi: float) -> float:
    """``int_lo^hi fun(t) w(t) dt`` in the variable ``log t`` split at breakpoints."""
    if hi <= lo:
        return 0.0
    cuts = [lo] + [c for c in critical_points(w) if lo < c < hi] + [hi]
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        def integrand(s: float) -> float:
            t = math.exp(s)
            wt = float(w(t))
            return 0.0 if wt == 0 else fun(t) * wt * t
        la = math.log(a) if a > 0 else -745.0
        lb = math.log(b) if math.isfinite(b) else 745.0
        val, _ = integrate.quad(integrand, la, lb, epsabs=0.0, epsrel=1e-10, limit=200)
        total += val
    return total


def _gl_nodes(cuts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes in ``log t`` on every cell and weights for ``dt``."""
    a, b = np.log(cuts[:-1]), np.log(cuts[1:])
    s = a[:, None] + (b - a)[:, None] * _GL_X[None, :]
    x = np.exp(s)
    return x.ravel(), ((b - a)[:, None] * _GL_W[None, :] * x).ravel()


def _maximise(fun: Callable[[float], float], xs: np.ndarray) -> float:
    """Supremum of ``fun`` over the lattice refined around the best point."""
    vals = np.array([fun(float(x)) for x in xs])
    if np.any(np.isinf(vals)):
        return math.inf
    k = int(np.argmax(vals))
    lo, hi = math.log(xs[max(k - 1, 0)]), math.log(xs[min(k + 1, len(xs) - 1)])
    if hi > lo:
        res = optimize.minimize_scalar(lambda s: -fun(math.exp(s)), bounds=(lo, hi),
                                       method="bounded", options={"xatol": 1e-12})
        return float(max(vals[k], -res.fun))
    return float(vals[k])


def glue_sides(a: Weight, g: Weight, h: Weight, alpha: float, beta: float,
               grid: Grid | None = None) -> tuple[float, float]:
    """Both sides of the gluing equivalence.

    Parameters
    ----------
    a : Weight
        Non-decreasing.
    g, h : Weight
    alpha, beta : float
        Positive exponents.
    grid : Grid, optional
        Lattice of ``x`` for both suprema and of the quadrature cells.

    Returns
    -------
    lhs, rhs : float
        ``lhs`` is the supremum of the blended two-factor expression, ``rhs``
        the sum of the two split suprema. Both suprema are refined by a
        bounded scalar search around the best lattice point.
    """
    if not (alpha > 0 and beta > 0):
        raise ValueError("alpha and beta must be positive")
    if check_shape(a, "quasi_increasing") == "fails" or not _non_decreasing(a):
        raise ValidationError("a must be non-decreasing", ["a non-decreasing"])
    if g.is_zero() and h.is_zero():
        return 0.0, 0.0
    grid = grid or Grid(1e-8, 1e8, 801)
    special = [c for w in (a, g, h) for c in critical_points(w)]
    xs = np.unique(np.concatenate([grid.points, special]))
    xs = xs[(xs >= grid.t_min) & (xs <= grid.t_max)]

    ag, ah = a.pow(-beta) * g, a.pow(alpha) * h

    def split_first(x: float) -> float:
        return float(g.cumulative(x)[0]) ** (1.0 / beta) * float(h.tail(x)[0]) ** (1.0 / alpha)

    def split_second(x: float) -> float:
        return float(G.safe_mul(float(ag.tail(x)[0]) ** (1.0 / beta),
                                float(ah.cumulative(x)[0]) ** (1.0 / alpha)))

    nodes, dt = _gl_nodes(xs)
    an, gn, hn = values(a, nodes), values(g, nodes) * dt, values(h, nodes) * dt

    def blended(x: float) -> float:
        ax = float(a(x))
        with np.errstate(invalid="ignore", divide="ignore"):
            left = np.sum(G.safe_mul((ax / (ax + an)) ** beta, gn))
            right = np.sum(G.safe_mul((an / (ax + an)) ** alpha, hn))
        return float(left ** (1.0 / beta) * right ** (1.0 / alpha))

    rhs = _maximise(split_first, xs) + _maximise(split_second, xs)
    return _maximise(blended, xs), float(rhs)


def _non_decreasing(a: Weight) -> bool:
    x = np.unique(np.concatenate([np.geomspace(1e-8, 1e8, 401), critical_points(a)]))
    ax = values(a, x)
    return bool(np.all(np.diff(ax) >= -1e-12 * np.abs(ax[:-1])))


# ---------------------------------------------------------------------------
# integration by parts


def ibp_pair(g: Weight, f: StepFn, alpha: float) -> tuple[float, float]:
    """Both sides of the integration-by-parts identity.

    ``A1 = int (int_0^t g)^alpha g(t) f(t) dt`` by adaptive quadrature and
    ``A2 = sum_i (int_0^{t_i} g)^{alpha+1} (f(t_i) - f(t_i+))`` over the
    jumps of ``f``. Finite support makes ``lim f = 0``. For such ``f``
    ``A2 = (alpha + 1) A1`` exactly.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if np.all(f.values == 0):
        return 0.0, 0.0
    t = f.breakpoints
    Gt = g.cumulative(t)
    if np.any(~np.isfinite(Gt)) or np.any(Gt <= 0):
        raise ValidationError("need 0 < int_0^t g < inf", ["0 < G(t) < inf"])
    A1 = 0.0
    for lo, hi, val in zip(f.lefts, t, f.values):
        if val == 0:
            continue
        A1 += val * _quad_weight(lambda s: float(g.cumulative(s)[0]) ** alpha, g, lo, hi)
    jumps = f.values - np.append(f.values[1:], 0.0)
    A2 = float(np.sum(Gt ** (alpha + 1.0) * jumps))
    return float(A1), A2


# ---------------------------------------------------------------------------
# supremum decompositions


@dataclass(frozen=True)
class SupPieces:
    """Decomposed supremum of ``F`` restricted to ``(0, t]`` or ``[t, inf)``.

    ``head``: ``profile[x] = sup_{x <= tau <= t} F`` for ``x <= t``, zero beyond.
    ``tail``: ``const = sup_{tau >= t} F`` used for ``x <= t`` and
    ``profile[x] = sup_{tau >= x} F`` for ``x > t``.
    """

    side: str
    t: float
    const: float
    points: np.ndarray
    profile: np.ndarray

    def integral(self, w: Weight) -> float:
        """``int_0^inf (sup_{tau >= x} F chi(tau)) w(x) dx`` from the pieces."""
        x = self.points
        wx = values(w, x)
        k = int(np.searchsorted(x, self.t, side="right"))
        if self.side == "head":
            f = G.safe_mul(self.profile[:k], wx[:k])
            return G.head_piece(x[:k], f) + float(np.sum(G.cell_integrals(x[:k], f)))
        head = self.const * float(w.cumulative(np.array([self.t]))[0])
        xs = np.concatenate([[self.t], x[k:]])
        prof = np.concatenate([[self.const], self.profile[k:]])
        f = G.safe_mul(prof, values(w, xs))
        body = float(np.sum(G.cell_integrals(xs, f))) + G.tail_piece(xs, f)
        return head + body


def sup_restrict(F, t: float, side: str, points: np.ndarray) -> SupPieces:
    """Decompose ``x -> sup_{tau >= x} F(tau) chi(tau)`` for a cut-off at ``t``.

    Parameters
    ----------
    F : callable or ndarray
        Non-negative function, or its values on ``points``.
    t : float
        Cut-off; added to the lattice if missing.
    side : {"head", "tail"}
        ``"head"`` restricts to ``(0, t]``, ``"tail"`` to ``[t, inf)``.
    points : ndarray
        Increasing lattice.
    """
    x = np.asarray(points, dtype=float)
    Fx = np.asarray(F(x) if callable(F) else F, dtype=float)
    if not callable(F) and Fx.shape != x.shape:
        raise ValueError("F values must match points")
    if t not in x:
        if not callable(F):
            raise ValueError("t must be a lattice point when F is given as values")
        x = np.sort(np.append(x, t))
        Fx = np.asarray(F(x), dtype=float)
    j = int(np.searchsorted(x, t))
    if side == "head":
        prof = np.zeros_like(Fx)
        prof[: j + 1] = G.window_sup_from_right(Fx, j)
        return SupPieces("head", t, 0.0, x, prof)
    if side == "tail":
        prof = G.sup_tail(x, Fx)
        return SupPieces("tail", t, float(prof[j]), x, prof)
    raise ValueError(f"unknown side {side!r}")


def sup_direct(F, t: float, side: str, points: np.ndarray) -> np.ndarray:
    """Un-decomposed ``x -> sup_{tau >= x} F(tau) chi(tau)`` on ``points``."""
    x = np.asarray(points, dtype=float)
    Fx = np.asarray(F(x) if callable(F) else F, dtype=float)
    chi = (x <= t) if side == "head" else (x >= t)
    return G.sup_tail(x, np.where(chi, Fx, 0.0))
