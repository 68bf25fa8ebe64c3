"""Brute-force extremal search giving certified lower bounds on best constants.

Candidates are step functions on a coarse logarithmic lattice of cells
``(c[k-1], c[k]]`` with ``c[-1] = 0``. Every functional needed by the ratios
is linear in the cell values before the final powers, so whole batches of
candidates are scored with a few matrix products on a fine lattice that
extends beyond the coarse one on both sides.

The search runs in a fixed order: structured candidates, random candidates,
then coordinate ascent started from the best structured candidate. The
reported bound is the running maximum, so it never decreases when the
number of random samples or ascent rounds grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import grid as G
from .characterize import RestrictedSpec, k_restricted
from .constants import JUMP_OFFSET, ConstantReport, breakpoints_of, values
from .errors import HardyLorentzError
from .grid import Grid
from .stepfn import StepFn
from .weights import Weight, cumulative_B

#: Coarse cells per decade for candidate step functions.
COARSE_PER_DECADE = 4
#: Fine lattice points per decade for the functionals.
FINE_PER_DECADE = 16
#: Decades added beyond the coarse lattice on each side.
PAD_DECADES = 3.0
#: Multiplicative moves tried by coordinate ascent.
ASCENT_FACTORS = (4.0, 1.5, 1.1)
_BATCH = 2048


@dataclass
class VerifyReport:
    """Formula value against the brute-force lower bound of the best constant.

    ``ratio`` is ``formula_value / oracle_lower_bound`` with ``0/0 = 1``.
    """

    formula_value: float
    oracle_lower_bound: float
    ratio: float
    n_samples: int
    best_witness: StepFn
    regime: str
    window: float | None = None
    passed: bool | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            "formula_value": self.formula_value,
            "oracle_lower_bound": self.oracle_lower_bound,
            "ratio": self.ratio,
            "n_samples": self.n_samples,
            "window": self.window,
            "passed": self.passed,
            "witness": self.best_witness.to_dict(),
            "notes": list(self.notes),
        }


def _ratio(formula: float, oracle: float) -> float:
    if formula == 0 and oracle == 0:
        return 1.0
    if math.isinf(formula) and math.isinf(oracle):
        return 1.0
    return float(G.safe_div(formula, oracle))


# ---------------------------------------------------------------------------
# lattices and column integrals


def _coarse(grid: Grid) -> np.ndarray:
    decades = math.log10(grid.t_max / grid.t_min)
    return np.geomspace(grid.t_min, grid.t_max, int(round(COARSE_PER_DECADE * decades)) + 1)


def _fine(coarse: np.ndarray, *weights) -> np.ndarray:
    lo, hi = coarse[0] * 10 ** -PAD_DECADES, coarse[-1] * 10 ** PAD_DECADES
    n = int(round(FINE_PER_DECADE * math.log10(hi / lo))) + 1
    bps = np.array(breakpoints_of(*weights), dtype=float)
    pts = np.concatenate([np.geomspace(lo, hi, n), coarse, bps, bps * (1.0 + JUMP_OFFSET)])
    return np.unique(pts[(pts >= lo) & (pts <= hi)])


def _cell_matrix(x: np.ndarray, coarse: np.ndarray, cum: Callable[[np.ndarray], np.ndarray]):
    """``M[i, k] = mu((c[k-1], c[k]] & (0, x[i]])`` for ``mu`` with distribution ``cum``."""
    edges = np.concatenate([[0.0], coarse])
    Ce = cum(edges[1:])
    Ce = np.concatenate([[0.0], Ce])
    Cx = cum(x)
    lo, hi = Ce[:-1], Ce[1:]
    return np.clip(Cx[:, None], lo[None, :], hi[None, :]) - lo[None, :]


def _cells_2d(x: np.ndarray, F: np.ndarray) -> np.ndarray:
    """Column-wise cell integrals under power-law interpolation (rows = lattice)."""
    f0, f1 = F[:-1], F[1:]
    L = np.log(x[1:] / x[:-1])[:, None]
    x0 = x[:-1][:, None]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        k = np.log(f1 / f0) / L + 1.0
        z = k * L
        phi = np.where(np.abs(z) > 1e-12, np.expm1(z) / z, 1.0)
        powl = f0 * x0 * L * phi
        lin = 0.5 * (f0 + f1) * (x[1:] - x[:-1])[:, None]
    pos = (f0 > 0) & (f1 > 0) & np.isfinite(f0) & np.isfinite(f1)
    out = np.where(pos, powl, lin)
    out = np.where(np.isinf(f0) | np.isinf(f1), np.inf, out)
    return np.nan_to_num(out, nan=0.0, posinf=np.inf)


def _tail_2d(x: np.ndarray, F: np.ndarray) -> np.ndarray:
    """Column-wise power-law tail integrals beyond the last lattice point."""
    f0, f1 = F[-2], F[-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.log(f1 / f0) / math.log(x[-1] / x[-2])
        val = -f1 * x[-1] / (g + 1.0)
    val = np.where(g + 1.0 >= -G.EXP_TOL, np.inf, val)
    val = np.where(np.isnan(g), np.where(f1 > 0, np.inf, 0.0), val)
    val = np.where(np.isinf(f1), np.inf, val)
    return np.where(f1 == 0, 0.0, val)


def _integral_2d(x: np.ndarray, F: np.ndarray, head: np.ndarray | None = None,
                 tail: bool = True) -> np.ndarray:
    total = np.sum(_cells_2d(x, F), axis=0)
    if head is not None:
        total = total + head
    if tail:
        total = total + _tail_2d(x, F)
    return total


def _root(x: np.ndarray, e: float) -> np.ndarray:
    return G.safe_pow(x, 1.0 / e)


# ---------------------------------------------------------------------------
# restricted ratio


class RestrictedEvaluator:
    """Scores ``||T_{u,b} f||_{q,w} / ||f||_{GGamma(p,m,v)}`` for cell-valued ``f``.

    Parameters
    ----------
    spec : RestrictedSpec
    grid : Grid
        Cutoffs of the coarse candidate lattice.
    """

    def __init__(self, spec: RestrictedSpec, grid: Grid):
        self.spec = spec
        self.coarse = _coarse(grid)
        x = _fine(self.coarse, spec.u, spec.b, spec.v, spec.w)
        self.x = x
        B = cumulative_B(spec.b, x)
        self.R = G.safe_div(values(spec.u, x), B)
        self.R_unbounded = G.limit_at_inf_unbounded(x, self.R)
        self.Mb = _cell_matrix(x, self.coarse, lambda t: cumulative_B(spec.b, t))
        self.Ml = _cell_matrix(x, self.coarse, lambda t: np.asarray(t, dtype=float))
        self.wx = values(spec.w, x)
        self.vx = values(spec.v, x)
        self.W0 = float(spec.w.cumulative(x[:1])[0])
        k = spec.m / spec.p
        self.v_head = float(spec.v.times_power(k).cumulative(x[:1])[0])
        self.v_tail = float(spec.v.tail(x[-1:])[0])

    @property
    def n_cells(self) -> int:
        return len(self.coarse)

    def ratios(self, C: np.ndarray) -> np.ndarray:
        """Ratios for a batch ``C`` of shape ``(n_cells, n_candidates)``."""
        s = self.spec
        C = np.asarray(C, dtype=float)
        nz = np.any(C > 0, axis=0)
        out = np.zeros(C.shape[1])
        if not np.any(nz):
            return out
        C = C[:, nz]
        if s.w.is_zero():
            return out
        # numerator
        Cb = self.Mb @ C
        F = G.safe_mul(self.R[:, None], Cb)
        T = np.maximum.accumulate(F[::-1], axis=0)[::-1]
        if self.R_unbounded:
            T = np.full_like(T, np.inf)
        Tq = G.safe_pow(T, s.q)
        num = _integral_2d(self.x, G.safe_mul(Tq, self.wx[:, None]), head=G.safe_mul(Tq[0], self.W0))
        # denominator
        k = s.m / s.p
        H = self.Ml @ G.safe_pow(C, s.p)
        inner = G.safe_mul(G.safe_pow(H, k), self.vx[:, None])
        head = G.safe_mul(G.safe_pow(C[0], s.m), self.v_head)
        tail = G.safe_mul(G.safe_pow(H[-1], k), self.v_tail)
        den = _integral_2d(self.x, inner, head=head + tail, tail=False)
        out[nz] = G.safe_div(_root(num, s.q), _root(den, s.m))
        return out

    def witness(self, c: np.ndarray) -> StepFn:
        keep = c > 0
        if not np.any(keep):
            return StepFn.zero()
        last = int(np.nonzero(keep)[0][-1])
        return StepFn(self.coarse[: last + 1], c[: last + 1])

    def ratio_of(self, f: StepFn) -> float:
        """Re-evaluate a witness whose breakpoints lie on the coarse lattice."""
        idx = np.searchsorted(self.coarse, f.breakpoints)
        if np.any(idx >= len(self.coarse)) or not np.allclose(self.coarse[idx], f.breakpoints,
                                                              rtol=1e-12, atol=0.0):
            raise ValueError("witness breakpoints must lie on the coarse lattice")
        c = np.zeros(self.n_cells)
        prev = 0
        for i, val in zip(idx, f.values):
            c[prev: i + 1] = val
            prev = i + 1
        return float(self.ratios(c[:, None])[0])


# ---------------------------------------------------------------------------
# candidate generators


def _indicators(K: int) -> np.ndarray:
    return np.triu(np.ones((K, K)))


def _staircases(K: int, levels=(0.5, 0.1)) -> np.ndarray:
    i, j = np.triu_indices(K, k=1)
    cols = []
    rows = np.arange(K)[:, None]
    for h in levels:
        C = np.where(rows <= i[None, :], 1.0, np.where(rows <= j[None, :], h, 0.0))
        cols.append(C)
    return np.concatenate(cols, axis=1)


def _power_profiles(coarse: np.ndarray, gammas=(0.25, 0.5, 0.75, 1.0)) -> np.ndarray:
    K = len(coarse)
    cols = []
    for g in gammas:
        prof = (coarse / coarse[0]) ** (-g)
        C = np.where(np.arange(K)[:, None] <= np.arange(K)[None, :], prof[:, None], 0.0)
        cols.append(C)
    return np.concatenate(cols, axis=1)


def _random_cone(rng: np.random.Generator, K: int, n: int) -> np.ndarray:
    C = np.zeros((K, n))
    for col in range(n):
        k = int(rng.integers(1, min(K, 8) + 1))
        cuts = np.sort(rng.choice(K, size=k, replace=False))
        vals = np.sort(np.exp(rng.uniform(-4.0, 4.0, size=k)))[::-1]
        prev = 0
        for cut, val in zip(cuts, vals):
            C[prev: cut + 1, col] = val
            prev = cut + 1
    return C


def _monotone_moves(c: np.ndarray, factor: float) -> np.ndarray:
    """All single-cell rescalings of ``c`` that keep it non-increasing."""
    K = len(c)
    moves = []
    for k in range(K):
        for fac in (factor, 1.0 / factor):
            d = c.copy()
            d[k] *= fac
            if k > 0 and d[k] > d[k - 1]:
                d[k] = d[k - 1]
            if k < K - 1 and d[k] < d[k + 1]:
                d[k] = d[k + 1]
            moves.append(d)
    # extending the support by one cell at the last value
    nz = np.nonzero(c > 0)[0]
    if nz.size and nz[-1] < K - 1:
        d = c.copy()
        d[nz[-1] + 1] = c[nz[-1]]
        moves.append(d)
    return np.array(moves).T


def _free_moves(c: np.ndarray, factor: float) -> np.ndarray:
    """All single-cell rescalings of a non-negative ``c`` (no monotonicity)."""
    K = len(c)
    base = np.where(c > 0, c, np.max(c) * 1e-3 if np.max(c) > 0 else 1.0)
    up = np.tile(c[:, None], (1, K))
    down = up.copy()
    idx = np.arange(K)
    up[idx, idx] = base * factor
    down[idx, idx] = c / factor
    return np.concatenate([up, down], axis=1)


class _Search:
    """Running maximum over batches of candidates."""

    def __init__(self, score: Callable[[np.ndarray], np.ndarray]):
        self.score = score
        self.best = -1.0
        self.best_c: np.ndarray | None = None
        self.count = 0

    def feed(self, C: np.ndarray) -> tuple[float, np.ndarray | None]:
        """Score a batch; returns the batch maximum and its column."""
        top, top_c = -1.0, None
        for start in range(0, C.shape[1], _BATCH):
            chunk = C[:, start: start + _BATCH]
            r = np.nan_to_num(self.score(chunk), nan=0.0, posinf=np.inf)
            self.count += chunk.shape[1]
            k = int(np.argmax(r))
            if r[k] > top:
                top, top_c = float(r[k]), chunk[:, k].copy()
        if top > self.best:
            self.best, self.best_c = top, top_c
        return top, top_c

    def ascend(self, c: np.ndarray, value: float, steps: int, moves) -> None:
        for _ in range(steps):
            if not math.isfinite(value):
                return
            improved = False
            for fac in ASCENT_FACTORS:
                top, top_c = self.feed(moves(c, fac))
                if top > value * (1.0 + 1e-12):
                    c, value, improved = top_c, top, True
                    break
            if not improved:
                return


def brute_force_k(spec: RestrictedSpec, n_samples: int = 1000, refine_steps: int = 20,
                  rng_seed: int = 0, grid: Grid | None = None,
                  formula: ConstantReport | None = None) -> VerifyReport:
    """Lower bound on the best constant of the restricted inequality by search.

    Parameters
    ----------
    spec : RestrictedSpec
    n_samples : int
        Random non-increasing step functions drawn after the structured ones.
    refine_steps : int
        Rounds of coordinate ascent from the best structured candidate.
    rng_seed : int
    grid : Grid, optional
        Cutoffs of the candidate lattice; default ``Grid(1e-6, 1e6)``.
    formula : ConstantReport, optional
        Precomputed formula value; computed with :func:`k_restricted` when
        omitted. Regime errors leave ``formula_value`` as ``nan``.

    Returns
    -------
    VerifyReport
    """
    grid = grid or Grid(1e-6, 1e6)
    regime, fval, notes = _formula_for(spec, formula)
    ev = RestrictedEvaluator(spec, grid)
    K = ev.n_cells
    search = _Search(ev.ratios)
    structured = np.concatenate([_indicators(K), _staircases(K), _power_profiles(ev.coarse)],
                                axis=1)
    s_val, s_c = search.feed(structured)
    rng = np.random.default_rng(rng_seed)
    if n_samples > 0:
        search.feed(_random_cone(rng, K, n_samples))
    if s_c is not None and refine_steps > 0:
        search.ascend(s_c, s_val, refine_steps, _monotone_moves)
    best = max(search.best, 0.0)
    witness = ev.witness(search.best_c) if search.best_c is not None else StepFn.zero()
    return VerifyReport(fval, best, _ratio(fval, best), search.count, witness, regime,
                        notes=notes)


def _formula_for(spec: RestrictedSpec, formula: ConstantReport | None):
    if formula is not None:
        return formula.regime, formula.value, []
    try:
        rep = k_restricted(spec)
    except HardyLorentzError as exc:
        return type(exc).__name__, math.nan, [str(exc)]
    return rep.regime, rep.value, []


# ---------------------------------------------------------------------------
# background inequalities over all non-negative h


BACKGROUND = ("hardy", "copson", "gks", "krepick", "supD", "supE")


class BackgroundEvaluator:
    """Scores ``LHS(h) / ||h||_{p,v}`` for the background inequalities.

    ``inputs`` carries ``p``, ``v``, ``w`` and, depending on ``which``,
    ``q`` (hardy, copson, gks, krepick), ``m`` and ``u`` (gks, krepick) or
    ``u`` (supD, supE, offset zero).
    """

    def __init__(self, which: str, inputs: dict, grid: Grid):
        if which not in BACKGROUND:
            raise ValueError(f"unknown inequality {which!r}")
        self.which = which
        self.inp = inputs
        v, w = inputs["v"], inputs["w"]
        u = inputs.get("u")
        ws = [x for x in (u, v, w) if x is not None]
        self.coarse = _coarse(grid)
        x = _fine(self.coarse, *ws)
        self.x = x
        self.Ml = _cell_matrix(x, self.coarse, lambda t: np.asarray(t, dtype=float))
        edges = np.concatenate([[0.0], self.coarse])
        self.Vk = np.array([v.primitive(a, b) for a, b in zip(edges[:-1], edges[1:])])
        self.wx = values(w, x)
        self.W0 = float(w.cumulative(x[:1])[0])
        self.Wtail = float(w.tail(x[-1:])[0])
        if u is not None:
            self.ux = values(u, x)
            self.U_tail = float(u.tail(x[-1:])[0]) if which in ("gks", "krepick") else 0.0
            self.u_unbounded = G.limit_at_inf_unbounded(x, self.ux)
        q = inputs.get("q", 1.0)
        self.wq_head = float(w.times_power(q).cumulative(x[:1])[0])

    @property
    def n_cells(self) -> int:
        return len(self.coarse)

    def dual_profile(self) -> np.ndarray:
        """Cell values of ``v^{1 - p'}``, the shape of the testing densities."""
        p = self.inp["p"]
        mid = np.sqrt(np.concatenate([[self.coarse[0] ** 2 / 4], self.coarse[:-1] * self.coarse[1:]]))
        return values(self.inp["v"], mid) ** (1.0 - p / (p - 1.0))

    def ratios(self, Hc: np.ndarray) -> np.ndarray:
        inp = self.inp
        p = inp["p"]
        Hc = np.asarray(Hc, dtype=float)
        den = _root(np.sum(G.safe_mul(G.safe_pow(Hc, p), self.Vk[:, None]), axis=0), p)
        H0 = self.Ml @ Hc
        tot = H0[-1]
        x, wx = self.x, self.wx[:, None]
        which = self.which
        if which == "hardy":
            q = inp["q"]
            f = G.safe_mul(G.safe_pow(H0, q), wx)
            head = G.safe_mul(G.safe_pow(Hc[0], q), self.wq_head)
            tail = G.safe_mul(G.safe_pow(tot, q), self.Wtail)
            num = _root(_integral_2d(x, f, head=head + tail, tail=False), q)
        elif which == "copson":
            q = inp["q"]
            Hi = np.maximum(tot[None, :] - H0, 0.0)
            f = G.safe_mul(G.safe_pow(Hi, q), wx)
            head = G.safe_mul(G.safe_pow(Hi[0], q), self.W0)
            num = _root(_integral_2d(x, f, head=head, tail=False), q)
        elif which in ("gks", "krepick"):
            q, m = inp["q"], inp["m"]
            Hin = H0 if which == "gks" else np.maximum(tot[None, :] - H0, 0.0)
            g = G.safe_mul(G.safe_pow(Hin, m), self.ux[:, None])
            cells = _cells_2d(x, g)
            J = np.zeros_like(g)
            J[:-1] = np.cumsum(cells[::-1], axis=0)[::-1]
            if which == "gks":
                J = J + G.safe_mul(G.safe_pow(tot, m), self.U_tail)[None, :]
            Jq = G.safe_pow(J, q / m)
            f = G.safe_mul(Jq, wx)
            head = G.safe_mul(Jq[0], self.W0)
            num = _root(_integral_2d(x, f, head=head, tail=(which == "gks")), q)
        else:
            Hin = H0 if which == "supD" else np.maximum(tot[None, :] - H0, 0.0)
            Fx = G.safe_mul(self.ux[:, None], Hin)
            S = np.maximum.accumulate(Fx[::-1], axis=0)[::-1]
            if which == "supD" and self.u_unbounded:
                S = np.where(tot[None, :] > 0, np.inf, S)
            f = G.safe_mul(S, wx)
            head = G.safe_mul(S[0], self.W0)
            num = _integral_2d(x, f, head=head, tail=(which == "supD"))
        return G.safe_div(num, den)

    def witness(self, h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.coarse.copy(), h.copy()


def _interval_families(profile: np.ndarray, coarse: np.ndarray, stride: int,
                       gammas=(-0.5, -0.25, 0.0, 0.25, 0.5)) -> np.ndarray:
    K = len(coarse)
    idx = np.arange(0, K, stride)
    i, j = np.meshgrid(idx, idx, indexing="ij")
    sel = i <= j
    i, j = i[sel], j[sel]
    rows = np.arange(K)[:, None]
    mask = (rows >= i[None, :]) & (rows <= j[None, :])
    cols = []
    scale = coarse / coarse[K // 2]
    for g in gammas:
        prof = profile * scale ** g
        cols.append(np.where(mask, prof[:, None], 0.0))
    return np.concatenate(cols, axis=1)


def brute_force_background(which: str, inputs: dict, n_samples: int = 500,
                           refine_steps: int = 20, rng_seed: int = 0,
                           grid: Grid | None = None,
                           formula: ConstantReport | None = None) -> VerifyReport:
    """Lower bound on the best constant of a background inequality.

    Parameters
    ----------
    which : {"hardy", "copson", "gks", "krepick", "supD", "supE"}
    inputs : dict
        Exponents and weights; see :class:`BackgroundEvaluator`.
    n_samples, refine_steps, rng_seed, grid
        As in :func:`brute_force_k`; candidates are arbitrary non-negative
        step densities.
    formula : ConstantReport, optional
        Value to compare against; ``nan`` when omitted.

    Returns
    -------
    VerifyReport
        The witness is stored as a :class:`StepFn` only when the best density
        happens to be non-increasing; its cell values are in ``notes``.
    """
    grid = grid or Grid(1e-6, 1e6)
    ev = BackgroundEvaluator(which, inputs, grid)
    K = ev.n_cells
    search = _Search(ev.ratios)
    if inputs["w"].is_zero():
        return VerifyReport(formula.value if formula else math.nan, 0.0,
                            _ratio(formula.value, 0.0) if formula else math.nan, 0,
                            StepFn.zero(), which)
    prof = ev.dual_profile()
    prof = prof / np.max(prof[np.isfinite(prof)]) if np.any(np.isfinite(prof)) else prof
    prof = np.nan_to_num(prof, nan=0.0, posinf=0.0)
    structured = np.concatenate([_interval_families(prof, ev.coarse, 1, (0.0,)),
                                 _interval_families(np.ones(K), ev.coarse, 2)], axis=1)
    s_val, s_c = search.feed(structured)
    rng = np.random.default_rng(rng_seed)
    if n_samples > 0:
        R = np.exp(rng.uniform(-4.0, 4.0, size=(K, n_samples)))
        R *= rng.random((K, n_samples)) < 0.3
        search.feed(R)
    if s_c is not None and refine_steps > 0:
        search.ascend(s_c, s_val, refine_steps, _free_moves)
    best = max(search.best, 0.0)
    c = search.best_c if search.best_c is not None else np.zeros(K)
    nz = np.nonzero(c > 0)[0]
    witness = StepFn.zero()
    if nz.size and np.all(np.diff(c[: nz[-1] + 1]) <= 0):
        witness = StepFn(ev.coarse[: nz[-1] + 1], c[: nz[-1] + 1])
    fval = formula.value if formula is not None else math.nan
    regime = formula.regime if formula is not None else which
    notes = [f"density cells: {c.tolist()}"]
    return VerifyReport(fval, best, _ratio(fval, best), search.count, witness, regime,
                        notes=notes)


# ---------------------------------------------------------------------------
# equivalence


@dataclass(frozen=True)
class Equivalence:
    """Outcome of a two-sided window comparison."""

    passed: bool
    formula: float
    oracle: float
    ratio: float
    window: float


def equivalence_report(formula, oracle, window: float) -> Equivalence:
    """Two-sided window test: ``oracle <= window * formula`` and ``formula <= window * oracle``.

    Parameters
    ----------
    formula : ConstantReport or float
    oracle : VerifyReport or float
    window : float
        At least one.
    """
    if not window >= 1:
        raise ValueError("window must be at least 1")
    f = formula.value if isinstance(formula, ConstantReport) else float(formula)
    o = oracle.oracle_lower_bound if isinstance(oracle, VerifyReport) else float(oracle)
    if math.isnan(f) or math.isnan(o):
        return Equivalence(False, f, o, math.nan, window)
    if f == 0 and o == 0:
        return Equivalence(True, f, o, 1.0, window)
    ok = o <= window * f and f <= window * o
    return Equivalence(bool(ok), f, o, _ratio(f, o), window)
