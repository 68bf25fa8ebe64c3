"""Piecewise power-log weights on (0, inf).

A weight is a finite list of pieces ``(lo, coeff, a, beta)``. The piece
starting at ``lo`` covers ``(lo, next_lo]`` and equals
``coeff * t**a * (1 + |log t|)**beta`` there; the last piece extends to
infinity. Zero coefficients are allowed so that indicators and the zero
weight are representable; negative coefficients are rejected.

Antiderivatives are closed form whenever ``beta == 0`` or ``a == -1``; the
remaining pieces are integrated by adaptive quadrature in ``s = log t``.
Convergence at 0 and at infinity is always decided by exponent rules.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate

from .errors import InconclusiveDivergence, ParseError, ValidationError
from .grid import Grid

ArrayLike = float | np.ndarray


@dataclass(frozen=True)
class Piece:
    lo: float
    coeff: float
    a: float
    beta: float = 0.0


def _log_factor(t: np.ndarray, beta: float) -> np.ndarray:
    if beta == 0:
        return np.ones_like(t)
    return (1.0 + np.abs(np.log(t))) ** beta


class Weight:
    """Immutable piecewise power-log function.

    Parameters
    ----------
    pieces : sequence of (lo, coeff, a, beta)
        Breakpoints must be strictly increasing. A first breakpoint above
        zero is padded with a zero piece on ``(0, lo]``.
    label : str, optional
        Free-form name used in reports.
    """

    __slots__ = ("pieces", "label", "_los")

    def __init__(self, pieces: Iterable[Sequence[float]], label: str = ""):
        raw = [tuple(float(x) for x in p) for p in pieces]
        if not raw:
            raise ValidationError("weight needs at least one piece")
        problems = []
        out: list[Piece] = []
        for i, p in enumerate(raw):
            if len(p) == 3:
                p = (*p, 0.0)
            if len(p) != 4:
                raise ValidationError(f"piece {i} must have 3 or 4 entries", [f"piece {i}: arity"])
            lo, c, a, beta = p
            if not math.isfinite(lo) or lo < 0:
                problems.append(f"piece {i}: breakpoint {lo} must be finite and >= 0")
            if math.isnan(c) or c < 0:
                problems.append(f"piece {i}: coefficient {c} must be >= 0")
            if not (math.isfinite(a) and math.isfinite(beta)):
                problems.append(f"piece {i}: exponents must be finite")
            out.append(Piece(lo, c, a, beta))
        for i in range(1, len(out)):
            if not out[i].lo > out[i - 1].lo:
                problems.append(f"piece {i}: breakpoints must be strictly increasing")
        if problems:
            raise ValidationError("; ".join(problems), problems)
        if out[0].lo > 0:
            out.insert(0, Piece(0.0, 0.0, 0.0, 0.0))
        self.pieces: tuple[Piece, ...] = tuple(out)
        self.label = label
        self._los = np.array([p.lo for p in out])

    # -- constructors -------------------------------------------------------

    @classmethod
    def power(cls, a: float, coeff: float = 1.0, beta: float = 0.0) -> "Weight":
        return cls([(0.0, coeff, a, beta)], label=f"t^{a:g}")

    @classmethod
    def constant(cls, c: float = 1.0) -> "Weight":
        return cls([(0.0, c, 0.0, 0.0)], label=f"{c:g}")

    @classmethod
    def zero(cls) -> "Weight":
        return cls([(0.0, 0.0, 0.0, 0.0)], label="0")

    @classmethod
    def indicator(cls, lo: float, hi: float, coeff: float = 1.0) -> "Weight":
        """``coeff`` on ``(lo, hi]`` and zero elsewhere."""
        pieces = [(0.0, 0.0, 0.0, 0.0)] if lo > 0 else []
        pieces += [(lo, coeff, 0.0, 0.0), (hi, 0.0, 0.0, 0.0)]
        return cls(pieces, label=f"chi({lo:g},{hi:g}]")

    @classmethod
    def broken_power(cls, a0: float, a1: float, split: float = 1.0, coeff: float = 1.0) -> "Weight":
        """Continuous ``t^a0`` below ``split`` and matching ``t^a1`` above."""
        c1 = coeff * split ** (a0 - a1)
        return cls([(0.0, coeff, a0, 0.0), (split, c1, a1, 0.0)],
                   label=f"t^{a0:g}|t^{a1:g}")

    @classmethod
    def ell(cls, A0: float, Ainf: float) -> "Weight":
        """``(1 + |log t|)**A0`` on ``(0, 1]`` and ``**Ainf`` on ``(1, inf)``."""
        return cls([(0.0, 1.0, 0.0, A0), (1.0, 1.0, 0.0, Ainf)], label=f"ell({A0:g},{Ainf:g})")

    # -- algebra --------------------------------------------------------------

    def scaled(self, lam: float) -> "Weight":
        return Weight([(p.lo, p.coeff * lam, p.a, p.beta) for p in self.pieces], self.label)

    def times_power(self, k: float) -> "Weight":
        """``t**k * self``."""
        return Weight([(p.lo, p.coeff, p.a + k, p.beta) for p in self.pieces], self.label)

    def pow(self, e: float) -> "Weight":
        """``self**e``; zero pieces raised to a negative power become ``inf``."""
        out = []
        for p in self.pieces:
            if p.coeff == 0:
                c = 0.0 if e > 0 else (1.0 if e == 0 else math.inf)
            else:
                c = p.coeff ** e
            out.append((p.lo, c, p.a * e, p.beta * e))
        return Weight(out, self.label)

    def __mul__(self, other: "Weight") -> "Weight":
        los = sorted(set(self._los.tolist()) | set(other._los.tolist()))
        out = []
        for lo in los:
            p = self.piece_at(lo)
            q = other.piece_at(lo)
            c = 0.0 if (p.coeff == 0 or q.coeff == 0) else p.coeff * q.coeff
            out.append((lo, c, p.a + q.a, p.beta + q.beta))
        return Weight(out)

    def piece_at(self, lo: float) -> Piece:
        """Piece governing the interval immediately to the right of ``lo``."""
        k = int(np.searchsorted(self._los, lo, side="right") - 1)
        return self.pieces[max(k, 0)]

    # -- evaluation -----------------------------------------------------------

    def _index(self, t: np.ndarray) -> np.ndarray:
        return np.maximum(np.searchsorted(self._los, t, side="left") - 1, 0)

    def __call__(self, t: ArrayLike) -> ArrayLike:
        return evaluate(self, t)

    def is_continuous(self, rtol: float = 1e-9) -> bool:
        """True when one-sided limits match at every interior breakpoint."""
        for k in range(1, len(self.pieces)):
            lo = self.pieces[k].lo
            left = _piece_value(self.pieces[k - 1], lo)
            right = _piece_value(self.pieces[k], lo)
            if not math.isclose(left, right, rel_tol=rtol, abs_tol=0.0):
                return False
        return True

    def is_zero(self) -> bool:
        return all(p.coeff == 0 for p in self.pieces)

    # -- integrals ------------------------------------------------------------

    def primitive(self, a: float, b: float) -> float:
        return primitive(self, a, b)

    def cumulative(self, t: ArrayLike) -> np.ndarray:
        """``integral of self over (0, t]`` for every entry of ``t``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty_like(t)
        totals = self._piece_totals()
        prefix = np.concatenate([[0.0], np.cumsum(totals)])
        idx = self._index(t)
        for k in np.unique(idx):
            sel = idx == k
            p = self.pieces[k]
            part = _piece_integral_many(p, np.full(sel.sum(), p.lo), t[sel])
            with np.errstate(invalid="ignore"):
                out[sel] = prefix[k] + part
        return out

    def tail(self, t: ArrayLike) -> np.ndarray:
        """``integral of self over [t, inf)`` for every entry of ``t``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty_like(t)
        totals = self._piece_totals()
        suffix = np.concatenate([np.cumsum(totals[::-1])[::-1], [0.0]])
        idx = self._index(t)
        his = np.append(self._los[1:], np.inf)
        for k in np.unique(idx):
            sel = idx == k
            p = self.pieces[k]
            part = _piece_integral_many(p, t[sel], np.full(sel.sum(), his[k]))
            with np.errstate(invalid="ignore"):
                out[sel] = suffix[k + 1] + part
        return out

    def _piece_totals(self) -> np.ndarray:
        his = np.append(self._los[1:], np.inf)
        return np.array([
            _piece_integral(p, p.lo, hi) for p, hi in zip(self.pieces, his)
        ])

    # -- misc -----------------------------------------------------------------

    def as_tuples(self) -> list[tuple[float, float, float, float]]:
        return [(p.lo, p.coeff, p.a, p.beta) for p in self.pieces]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Weight) and self.pieces == other.pieces

    def __hash__(self) -> int:
        return hash(self.pieces)

    def __repr__(self) -> str:
        return f"Weight({self.as_tuples()!r})"


class FuncWeight:
    """Evaluation-only weight built from a vectorised callable.

    Used for derived functions such as ``B / phi**alpha`` that leave the
    power-log family. Only pointwise evaluation is supported.
    """

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], label: str = ""):
        self._fn = fn
        self.label = label

    def __call__(self, t: ArrayLike) -> ArrayLike:
        return evaluate(self, t)

    def values(self, t: np.ndarray) -> np.ndarray:
        return np.asarray(self._fn(np.asarray(t, dtype=float)), dtype=float)


def _piece_value(p: Piece, t: float) -> float:
    if p.coeff == 0:
        return 0.0
    return float(p.coeff * t ** p.a * (1.0 + abs(math.log(t))) ** p.beta)


def evaluate(w: "Weight | FuncWeight", t: ArrayLike) -> ArrayLike:
    """Value of ``w`` at ``t > 0``; scalar in, scalar out."""
    scalar = np.ndim(t) == 0
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(tt <= 0):
        raise ValueError("weights are evaluated at t > 0 only")
    if isinstance(w, FuncWeight):
        out = w.values(tt)
    else:
        out = np.zeros_like(tt)
        idx = w._index(tt)
        for k in np.unique(idx):
            p = w.pieces[k]
            if p.coeff == 0:
                continue
            sel = idx == k
            with np.errstate(over="ignore", invalid="ignore"):
                out[sel] = p.coeff * tt[sel] ** p.a * _log_factor(tt[sel], p.beta)
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# piece integrals


def _converges_at_zero(a: float, beta: float) -> bool:
    return a > -1 or (a == -1 and beta < -1)


def _converges_at_inf(a: float, beta: float) -> bool:
    return a < -1 or (a == -1 and beta < -1)


def _log_antiderivative(s: np.ndarray, beta: float) -> np.ndarray:
    """Antiderivative of ``(1 + |s|)**beta`` vanishing at ``s = 0``."""
    s = np.asarray(s, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        if beta == -1:
            g = np.log1p(np.abs(s))
        else:
            g = ((1.0 + np.abs(s)) ** (beta + 1.0) - 1.0) / (beta + 1.0)
    return np.sign(s) * g


def _quad_log(p: Piece, x: float, y: float) -> float:
    """Quadrature of one piece over ``[x, y]`` in the variable ``s = log t``."""
    k = p.a + 1.0

    def f(s: float) -> float:
        return math.exp(k * s) * (1.0 + abs(s)) ** p.beta

    sx = -math.inf if x == 0 else math.log(x)
    sy = math.inf if math.isinf(y) else math.log(y)
    cuts = [sx] + [c for c in (0.0,) if sx < c < sy] + [sy]
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        val, err = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=1e-12, limit=400)
        if not math.isfinite(val):
            raise InconclusiveDivergence(
                f"quadrature of t^{p.a} L^{p.beta} on [{x}, {y}] did not converge")
        total += val
    return p.coeff * total


def _piece_integral(p: Piece, x: float, y: float, method: str = "auto") -> float:
    """Integral of one piece over ``[x, y]`` with ``0 <= x <= y <= inf``."""
    if not y > x:
        return 0.0
    if p.coeff == 0:
        return 0.0
    if math.isinf(p.coeff):
        return math.inf
    if x == 0 and not _converges_at_zero(p.a, p.beta):
        return math.inf
    if math.isinf(y) and not _converges_at_inf(p.a, p.beta):
        return math.inf
    if method == "quad":
        return _quad_log(p, x, y)
    if p.beta == 0:
        if p.a == -1:
            return p.coeff * (math.log(y) - math.log(x))
        k = p.a + 1.0
        hi = 0.0 if math.isinf(y) else y ** k
        lo = 0.0 if x == 0 else x ** k
        if x > 0 and not math.isinf(y):
            # relative accuracy when x and y are close
            return p.coeff * x ** k * math.expm1(k * math.log(y / x)) / k
        return p.coeff * (hi - lo) / k
    if p.a == -1:
        sx = -math.inf if x == 0 else math.log(x)
        sy = math.inf if math.isinf(y) else math.log(y)
        gy = -1.0 / (p.beta + 1.0) if math.isinf(sy) else float(_log_antiderivative(sy, p.beta))
        gx = 1.0 / (p.beta + 1.0) if math.isinf(sx) else float(_log_antiderivative(sx, p.beta))
        return p.coeff * (gy - gx)
    return _quad_log(p, x, y)


def _piece_integral_many(p: Piece, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if p.coeff == 0:
        return np.zeros(len(x))
    if p.beta == 0 and not math.isinf(p.coeff):
        out = np.empty(len(x))
        for i, (xi, yi) in enumerate(zip(x, y)):
            out[i] = _piece_integral(p, float(xi), float(yi))
        return out
    return np.array([_piece_integral(p, float(xi), float(yi)) for xi, yi in zip(x, y)])


def primitive(w: Weight, a: float, b: float, method: str = "auto") -> float:
    """Integral of ``w`` over ``[a, b]``.

    Parameters
    ----------
    w : Weight
    a : float
        Lower limit, ``a >= 0``.
    b : float
        Upper limit, ``b > a``; may be ``inf``.
    method : {"auto", "quad"}
        ``"quad"`` forces the log-variable quadrature on every piece, which
        gives an independent check of the closed forms.

    Returns
    -------
    float
        The integral, or ``inf`` when a head or tail diverges.
    """
    if a < 0 or not b > a:
        raise ValueError("primitive requires 0 <= a < b")
    his = list(w._los[1:]) + [math.inf]
    total = 0.0
    for p, hi in zip(w.pieces, his):
        lo = max(p.lo, a)
        top = min(hi, b)
        if top > lo:
            total += _piece_integral(p, lo, top, method=method)
            if math.isinf(total):
                return math.inf
    return total


def cumulative_B(b: Weight, t: ArrayLike) -> ArrayLike:
    """``B(t) = integral of b over (0, t]``, required to be positive and finite."""
    scalar = np.ndim(t) == 0
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    first = b.pieces[0]
    if first.coeff > 0 and not _converges_at_zero(first.a, first.beta):
        raise ValidationError("B diverges: b is not integrable near 0",
                              ["b integrable near 0"])
    out = b.cumulative(tt)
    bad = ~(np.isfinite(out) & (out > 0))
    if np.any(bad):
        raise ValidationError(f"B(t) must satisfy 0 < B(t) < inf; fails at t={tt[bad][0]:g}",
                              ["0 < B(t) < inf"])
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# structural checks


@dataclass(frozen=True)
class AdmissibilityReport:
    nontriv_ok: bool
    nondegen_ok: bool
    diagnostics: dict

    @property
    def member(self) -> bool:
        return self.nontriv_ok and self.nondegen_ok


def check_admissibility(v: Weight, m: float, p: float, grid: Grid | None = None) -> AdmissibilityReport:
    """Decide the finiteness and non-degeneracy conditions for ``v``.

    Finiteness of ``int_0^t v s^{m/p}`` and ``int_t^inf v`` is probed at
    ``t`` in ``{t_min, 1, t_max}``; non-degeneracy requires
    ``int_0^1 v = int_1^inf v s^{m/p} = inf``.
    """
    grid = grid or Grid()
    k = m / p
    vk = v.times_power(k)
    probes = [grid.t_min, 1.0, grid.t_max]
    diag: dict = {"probes": probes, "head": [], "tail": []}
    ok = True
    for t in probes:
        h = primitive(vk, 0.0, t)
        tl = primitive(v, t, math.inf)
        diag["head"].append(h)
        diag["tail"].append(tl)
        ok = ok and math.isfinite(h) and math.isfinite(tl)
    d0 = primitive(v, 0.0, 1.0)
    d1 = primitive(vk, 1.0, math.inf)
    diag["int_0^1 v"] = d0
    diag["int_1^inf v s^(m/p)"] = d1
    nondegen = math.isinf(d0) and math.isinf(d1)
    return AdmissibilityReport(nontriv_ok=ok, nondegen_ok=nondegen, diagnostics=diag)


HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "boundary-inconclusive"


def _end_trend(a: float, beta: float, end: str) -> int:
    """Sign of growth of ``t^a L^beta`` as ``t`` increases, near one end.

    Returns +1 (increasing), -1 (decreasing) or 0 (constant). Near zero
    ``L`` decreases as ``t`` increases, so the log factor flips sign there.
    """
    if a != 0:
        return 1 if a > 0 else -1
    if beta == 0:
        return 0
    if end == "zero":
        return 1 if beta < 0 else -1
    return 1 if beta > 0 else -1


def _quasi_increasing(w: Weight) -> str:
    pieces = w.pieces
    seen_positive = False
    for p in pieces:
        if p.coeff == 0 and seen_positive:
            return FAILS
        if p.coeff > 0:
            seen_positive = True
    first, last = pieces[0], pieces[-1]
    if first.coeff > 0 and _end_trend(first.a, first.beta, "zero") < 0:
        return FAILS
    if last.coeff > 0 and _end_trend(last.a, last.beta, "inf") < 0:
        return FAILS
    if any(p.coeff > 0 and p.a == 0 and p.beta < 0 for p in pieces):
        return INCONCLUSIVE
    return HOLDS


def _q_r(w: Weight, r: float) -> str:
    # phi in Q_r when phi^r(t)/t is quasi-decreasing; the decisive exponent
    # at each unbounded end is lambda*r - 1 with the log factor as tie-break.
    if any(p.coeff == 0 for p in w.pieces):
        return FAILS
    for p, end in ((w.pieces[0], "zero"), (w.pieces[-1], "inf")):
        e = p.a * r - 1.0
        if abs(e) < 1e-12:
            if p.beta != 0:
                return INCONCLUSIVE
            continue
        if e > 0:
            return FAILS
    return HOLDS


def check_shape(f: Weight, kind: str, r: float | None = None, alpha: float | None = None) -> str:
    """Analytic shape conditions for power-log weights.

    Parameters
    ----------
    f : Weight
    kind : {"delta2", "quasi_increasing", "q_r", "b_over_power"}
        ``"b_over_power"`` treats ``f`` as ``b`` and tests whether
        ``B(t) / t**(alpha/r)`` is quasi-increasing.
    r, alpha : float, optional
        Required by ``"q_r"`` and ``"b_over_power"``.

    Returns
    -------
    str
        ``"holds"``, ``"fails"`` or ``"boundary-inconclusive"``.
    """
    if kind == "delta2":
        # pieces are continuous on bounded intervals and regularly varying at
        # both ends; only a jump from zero to a positive value breaks doubling
        for k in range(1, len(f.pieces)):
            if f.pieces[k - 1].coeff == 0 and f.pieces[k].coeff > 0:
                return FAILS
        return HOLDS
    if kind == "quasi_increasing":
        return _quasi_increasing(f)
    if kind == "q_r":
        if r is None or r <= 0:
            raise ValueError("q_r needs r > 0")
        return _q_r(f, r)
    if kind == "b_over_power":
        if r is None or alpha is None:
            raise ValueError("b_over_power needs alpha and r")
        return _b_over_power(f, alpha, r)
    raise ValueError(f"unknown shape kind {kind!r}")


def _growth_of_B(b: Weight, end: str) -> tuple[float, float]:
    """Leading ``(exponent, log exponent)`` of ``B`` near an end."""
    if end == "zero":
        p = b.pieces[0]
        if p.coeff == 0:
            return (math.inf, 0.0)
        return (p.a + 1.0, p.beta)
    p = b.pieces[-1]
    if p.coeff == 0 or _converges_at_inf(p.a, p.beta):
        return (0.0, 0.0)
    if p.a == -1:
        return (0.0, p.beta + 1.0 if p.beta != -1 else 1e-12)
    return (p.a + 1.0, p.beta)


def _b_over_power(b: Weight, alpha: float, r: float) -> str:
    lam = alpha / r
    for end in ("zero", "inf"):
        e, beta = _growth_of_B(b, end)
        e = e - lam
        if abs(e) < 1e-12:
            trend = _end_trend(0.0, beta, end)
        else:
            trend = 1 if e > 0 else -1
        if trend < 0:
            return FAILS
    return HOLDS


# ---------------------------------------------------------------------------
# literal grammar


def parse_weight(text: str) -> Weight:
    """Parse ``[(lo, coeff, a, beta), ...]``; ``beta`` may be omitted."""
    try:
        data = ast.literal_eval(text.strip())
    except (ValueError, SyntaxError) as exc:
        raise ParseError(f"bad weight literal {text!r}: {exc}") from None
    if isinstance(data, tuple) and data and not isinstance(data[0], (tuple, list)):
        data = [data]
    if not isinstance(data, (list, tuple)) or not data:
        raise ParseError(f"weight literal must be a non-empty list of pieces: {text!r}")
    pieces = []
    for item in data:
        if not isinstance(item, (list, tuple)) or len(item) not in (3, 4):
            raise ParseError(f"weight piece must be (lo, coeff, a[, beta]): {item!r}")
        if not all(isinstance(x, (int, float)) for x in item):
            raise ParseError(f"weight piece entries must be numbers: {item!r}")
        pieces.append(tuple(float(x) for x in item))
    return Weight(pieces)


def render_weight(w: Weight) -> str:
    return "[" + ",".join(
        "(" + ",".join(repr(float(x)) for x in t) + ")" for t in w.as_tuples()) + "]"
