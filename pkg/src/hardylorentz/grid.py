"""Logarithmic evaluation lattice and the quadrature/supremum primitives on it.

Every integral over a semi-infinite interval is split into three parts: a
head piece on ``(0, t_min]``, a sum of cell integrals between consecutive
lattice points and a tail piece on ``[t_max, inf)``. Cells are integrated
under local power-law interpolation, which is exact for piecewise power
integrands whose kinks sit on lattice points. Head and tail pieces use the
log-log slope at the boundary to decide convergence and, when convergent,
integrate the extrapolated power law exactly.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

#: Slopes within this distance of -1 are treated as logarithmically divergent.
EXP_TOL = 1e-6
#: A boundary log-log slope steeper than this marks an unbounded supremum.
SUP_TOL = 1e-3

DEFAULT_T_MIN = 1e-8
DEFAULT_T_MAX = 1e8
DEFAULT_POINTS = 2048


def _max_points() -> int | None:
    raw = os.environ.get("LORENTZ_GRID_MAX_POINTS")
    if raw is None or raw.strip() == "":
        return None
    return int(raw)


@dataclass(frozen=True)
class Grid:
    """Log-spaced lattice with explicit cutoffs.

    Parameters
    ----------
    t_min, t_max : float
        Positive cutoffs with ``t_min < t_max``; both are lattice points.
    n_points : int
        Number of lattice points, at least 2. Capped by the environment
        variable ``LORENTZ_GRID_MAX_POINTS`` when it is set.
    """

    t_min: float = DEFAULT_T_MIN
    t_max: float = DEFAULT_T_MAX
    n_points: int = DEFAULT_POINTS
    points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not (self.t_min > 0 and self.t_max > self.t_min):
            raise ValueError("grid requires 0 < t_min < t_max")
        n = int(self.n_points)
        cap = _max_points()
        if cap is not None:
            n = min(n, cap)
        if n < 2:
            raise ValueError("grid requires at least two points")
        object.__setattr__(self, "n_points", n)
        pts = np.geomspace(self.t_min, self.t_max, n)
        pts[0], pts[-1] = self.t_min, self.t_max
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def refined(self, factor: int = 2) -> "Grid":
        """Same cutoffs with ``factor`` times as many points."""
        return Grid(self.t_min, self.t_max, self.n_points * factor)

    def describe(self) -> dict:
        return {"t_min": self.t_min, "t_max": self.t_max, "n_points": self.n_points}


# ---------------------------------------------------------------------------
# extended arithmetic


def safe_mul(a, b):
    """Product with the convention ``0 * inf = 0``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid="ignore", over="ignore"):
        out = a * b
    zero = (a == 0) | (b == 0)
    return np.where(zero, 0.0, out)


def safe_div(a, b):
    """Quotient with ``inf/inf = 0``, ``0/0 = 0`` and ``x/0 = inf`` for ``x > 0``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = a / b
    out = np.where(np.isinf(a) & np.isinf(b), 0.0, out)
    out = np.where((a == 0) & (b == 0), 0.0, out)
    return out


def safe_pow(a, e):
    """Power of a non-negative base with ``0**neg = inf`` and ``inf**neg = 0``."""
    a = np.asarray(a, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.power(a, e)
    if np.isscalar(e) and e == 0:
        out = np.ones_like(a)
    return out


# ---------------------------------------------------------------------------
# slopes and boundary pieces


def _log_slope(t0, t1, f0, f1) -> float:
    if not (f0 > 0 and f1 > 0 and np.isfinite(f0) and np.isfinite(f1)):
        return np.nan
    return float(np.log(f1 / f0) / np.log(t1 / t0))


def head_piece(t: np.ndarray, f: np.ndarray) -> float:
    """Integral of the power-law extrapolation of ``f`` over ``(0, t[0]]``."""
    if f[0] == 0:
        return 0.0
    if not np.isfinite(f[0]):
        return np.inf
    g = _log_slope(t[0], t[1], f[0], f[1])
    if np.isnan(g):
        g = 0.0
    if g + 1.0 <= EXP_TOL:
        return np.inf
    return float(f[0] * t[0] / (g + 1.0))


def tail_piece(t: np.ndarray, f: np.ndarray) -> float:
    """Integral of the power-law extrapolation of ``f`` over ``[t[-1], inf)``."""
    if f[-1] == 0:
        return 0.0
    if not np.isfinite(f[-1]):
        return np.inf
    g = _log_slope(t[-2], t[-1], f[-2], f[-1])
    if np.isnan(g):
        g = 0.0
    if g + 1.0 >= -EXP_TOL:
        return np.inf
    return float(-f[-1] * t[-1] / (g + 1.0))


def _phi(z: np.ndarray) -> np.ndarray:
    """``expm1(z)/z`` with the removable singularity filled in."""
    out = np.ones_like(z)
    nz = np.abs(z) > 1e-12
    out[nz] = np.expm1(z[nz]) / z[nz]
    return out


def cell_integrals(t: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Integrals of ``f`` over ``[t[i], t[i+1]]`` under power-law interpolation."""
    t = np.asarray(t, dtype=float)
    f = np.asarray(f, dtype=float)
    f0, f1 = f[:-1], f[1:]
    L = np.log(t[1:] / t[:-1])
    out = np.empty(len(L))
    pos = (f0 > 0) & (f1 > 0) & np.isfinite(f0) & np.isfinite(f1)
    if np.any(pos):
        k = np.log(f1[pos] / f0[pos]) / L[pos] + 1.0
        out[pos] = f0[pos] * t[:-1][pos] * L[pos] * _phi(k * L[pos])
    rest = ~pos
    if np.any(rest):
        with np.errstate(invalid="ignore"):
            out[rest] = 0.5 * (f0[rest] + f1[rest]) * (t[1:][rest] - t[:-1][rest])
    out[np.isinf(f0) | np.isinf(f1)] = np.inf
    return out


def integral(t: np.ndarray, f: np.ndarray) -> float:
    """Integral of ``f`` over ``(0, inf)`` including head and tail pieces."""
    f = np.nan_to_num(np.asarray(f, dtype=float), nan=0.0, posinf=np.inf)
    total = head_piece(t, f) + float(np.sum(cell_integrals(t, f))) + tail_piece(t, f)
    return float(total)


def cum_from_zero(t: np.ndarray, f: np.ndarray) -> np.ndarray:
    """``F[i] = integral of f over (0, t[i]]``."""
    f = np.nan_to_num(np.asarray(f, dtype=float), nan=0.0, posinf=np.inf)
    c = cell_integrals(t, f)
    out = np.empty(len(t))
    out[0] = head_piece(t, f)
    out[1:] = out[0] + np.cumsum(c)
    return out


def cum_to_inf(t: np.ndarray, f: np.ndarray) -> np.ndarray:
    """``F[i] = integral of f over [t[i], inf)``."""
    f = np.nan_to_num(np.asarray(f, dtype=float), nan=0.0, posinf=np.inf)
    c = cell_integrals(t, f)
    out = np.empty(len(t))
    out[-1] = tail_piece(t, f)
    out[:-1] = out[-1] + np.cumsum(c[::-1])[::-1]
    return out


def cum_from_index(cells: np.ndarray, i: int) -> np.ndarray:
    """``F[j] = integral over [t[i], t[i + j]]`` from precomputed cell integrals."""
    out = np.zeros(len(cells) + 1 - i)
    out[1:] = np.cumsum(cells[i:])
    return out


# ---------------------------------------------------------------------------
# suprema


def limit_at_inf_unbounded(t: np.ndarray, f: np.ndarray) -> bool:
    """True when the boundary slope says ``f`` grows without bound at infinity."""
    if np.isinf(f[-1]):
        return True
    g = _log_slope(t[-2], t[-1], f[-2], f[-1])
    return bool(not np.isnan(g) and g > SUP_TOL)


def limit_at_zero_unbounded(t: np.ndarray, f: np.ndarray) -> bool:
    """True when the boundary slope says ``f`` grows without bound at zero."""
    if np.isinf(f[0]):
        return True
    g = _log_slope(t[0], t[1], f[0], f[1])
    return bool(not np.isnan(g) and g < -SUP_TOL)


def sup_tail(t: np.ndarray, f: np.ndarray) -> np.ndarray:
    """``S[i] = sup of f over [t[i], inf)`` with the analytic limit at infinity."""
    f = np.nan_to_num(np.asarray(f, dtype=float), nan=0.0, posinf=np.inf)
    if limit_at_inf_unbounded(t, f):
        return np.full(len(f), np.inf)
    return np.maximum.accumulate(f[::-1])[::-1]


def sup_head(t: np.ndarray, f: np.ndarray) -> np.ndarray:
    """``S[i] = sup of f over (0, t[i]]`` with the analytic limit at zero."""
    f = np.nan_to_num(np.asarray(f, dtype=float), nan=0.0, posinf=np.inf)
    if limit_at_zero_unbounded(t, f):
        return np.full(len(f), np.inf)
    return np.maximum.accumulate(f)


def sup_all(t: np.ndarray, f: np.ndarray) -> float:
    """Supremum of ``f`` over ``(0, inf)`` including both boundary limits."""
    f = np.nan_to_num(np.asarray(f, dtype=float), nan=0.0, posinf=np.inf)
    if limit_at_inf_unbounded(t, f) or limit_at_zero_unbounded(t, f):
        return float(np.inf)
    return float(np.max(f))


def window_sup_from_right(f: np.ndarray, j: int) -> np.ndarray:
    """``S[i] = max f[i..j]`` for ``i <= j``: the sup over ``[t_i, t_j]``."""
    return np.maximum.accumulate(np.asarray(f[: j + 1])[::-1])[::-1]


def head_kernel_integral(t: np.ndarray, k: np.ndarray, g: np.ndarray, P: np.ndarray,
                         e: float, nodes: int = 64) -> np.ndarray:
    """``int_0^{t[0]} (P + int_s^{t[0]} k)^e g(s) ds`` for every entry of ``P``.

    Both ``k`` and ``g`` are extrapolated below ``t[0]`` as power laws fitted
    on the first two lattice points; the remaining one-dimensional integral
    is done by Gauss-Legendre after the substitution that flattens ``g``.
    """
    P = np.asarray(P, dtype=float)
    if g[0] == 0:
        return np.zeros_like(P)
    if not np.isfinite(g[0]):
        return np.full_like(P, np.inf)
    eg = _log_slope(t[0], t[1], g[0], g[1])
    eg = 0.0 if np.isnan(eg) else eg
    if eg + 1.0 <= EXP_TOL:
        return np.full_like(P, np.inf)
    H0 = head_piece(t, k)
    if not np.isfinite(H0):
        return np.full_like(P, np.inf)
    ek = _log_slope(t[0], t[1], k[0], k[1])
    gam = 1.0 if np.isnan(ek) else ek + 1.0
    y, wts = np.polynomial.legendre.leggauss(nodes)
    y, wts = 0.5 * (y + 1.0), 0.5 * wts
    inner = P[:, None] + H0 * (1.0 - y[None, :] ** (gam / (eg + 1.0)))
    return t[0] * g[0] / (eg + 1.0) * (safe_pow(inner, e) @ wts)
