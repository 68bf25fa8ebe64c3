"""Non-increasing step functions: the discretised cone of rearrangements."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError
from .grid import Grid
from .weights import Weight, primitive

__all__ = ["StepFn", "Grid", "rearrange", "double_star", "sample_cone"]


@dataclass(frozen=True, eq=False)
class StepFn:
    """Right-continuous non-increasing step function of finite support.

    The value ``values[i]`` is taken on ``(breakpoints[i-1], breakpoints[i]]``
    with ``breakpoints[-1] = 0`` by convention; the function vanishes beyond
    the last breakpoint.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.breakpoints, dtype=float).copy()
        v = np.asarray(self.values, dtype=float).copy()
        if t.ndim != 1 or v.shape != t.shape:
            raise ValidationError("breakpoints and values must be 1-d of equal length")
        if np.any(~np.isfinite(t)) or np.any(t <= 0) or np.any(np.diff(t) <= 0):
            raise ValidationError("breakpoints must be finite, positive and strictly increasing")
        if np.any(~np.isfinite(v)) or np.any(v < 0) or np.any(np.diff(v) > 0):
            raise ValidationError("values must be finite, non-negative and non-increasing")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "breakpoints", t)
        object.__setattr__(self, "values", v)

    @classmethod
    def zero(cls) -> "StepFn":
        return cls(np.array([1.0]), np.array([0.0]))

    @classmethod
    def indicator(cls, t: float, c: float = 1.0) -> "StepFn":
        """``c`` times the indicator of ``(0, t]``."""
        return cls(np.array([float(t)]), np.array([float(c)]))

    def __call__(self, t):
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.searchsorted(self.breakpoints, tt, side="left")
        vals = np.append(self.values, 0.0)
        out = vals[idx]
        return float(out[0]) if np.ndim(t) == 0 else out

    def scaled(self, lam: float) -> "StepFn":
        return StepFn(self.breakpoints, self.values * lam)

    @property
    def lefts(self) -> np.ndarray:
        return np.concatenate([[0.0], self.breakpoints[:-1]])

    @property
    def measures(self) -> np.ndarray:
        return np.diff(np.concatenate([[0.0], self.breakpoints]))

    def integral(self) -> float:
        return float(np.sum(self.values * self.measures))

    def cumulative(self, t) -> np.ndarray:
        """``int_0^t f`` at each entry of ``t``."""
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        lefts = self.lefts
        inside = np.clip(tt[:, None] - lefts[None, :], 0.0, self.measures[None, :])
        return inside @ self.values

    def integrate_power(self, p: float, w: Weight) -> float:
        """``int_0^inf f(t)**p w(t) dt`` exactly, piece by piece."""
        total = 0.0
        for lo, hi, val in zip(self.lefts, self.breakpoints, self.values):
            if val == 0:
                continue
            total += val ** p * primitive(w, lo, hi)
        return total

    def as_pieces(self) -> list[tuple[float, float]]:
        return list(zip(self.measures.tolist(), self.values.tolist()))

    def to_dict(self) -> dict:
        return {"breakpoints": self.breakpoints.tolist(), "values": self.values.tolist()}

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, StepFn)
                and np.array_equal(self.breakpoints, other.breakpoints)
                and np.array_equal(self.values, other.values))

    def __hash__(self) -> int:
        return hash((self.breakpoints.tobytes(), self.values.tobytes()))


def rearrange(pieces: Iterable[Sequence[float]]) -> StepFn:
    """Non-increasing rearrangement of a simple function.

    Parameters
    ----------
    pieces : iterable of (measure, value)
        Disjoint level sets of a non-negative simple function.

    Returns
    -------
    StepFn
        Values sorted in decreasing order, equal values merged and
        zero-valued mass dropped (it lies beyond the support).
    """
    arr = np.array([(float(m), float(v)) for m, v in pieces], dtype=float).reshape(-1, 2)
    if arr.size == 0:
        return StepFn.zero()
    if np.any(arr[:, 0] < 0) or np.any(arr[:, 1] < 0):
        raise ValidationError("measures and values must be non-negative")
    arr = arr[(arr[:, 0] > 0) & (arr[:, 1] > 0)]
    if arr.size == 0:
        return StepFn.zero()
    levels, inv = np.unique(arr[:, 1], return_inverse=True)
    mass = np.bincount(inv, weights=arr[:, 0])
    order = np.argsort(levels)[::-1]
    vals = levels[order]
    ends = np.cumsum(mass[order])
    return StepFn(ends, vals)


def double_star(f: StepFn, t):
    """``f**(t) = (1/t) int_0^t f*`` computed from the step structure."""
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(tt <= 0):
        raise ValueError("double_star needs t > 0")
    out = f.cumulative(tt) / tt
    return float(out[0]) if np.ndim(t) == 0 else out


def sample_cone(rng_seed: int, grid: Grid, k: int) -> StepFn:
    """Random non-increasing step function with ``k`` breakpoints on ``grid``.

    Values are the exponentials of uniform draws on ``[-3, 3]`` sorted in
    decreasing order; identical seeds give identical functions.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    rng = np.random.default_rng(rng_seed)
    pts = grid.points
    k = min(k, len(pts))
    idx = np.sort(rng.choice(len(pts), size=k, replace=False))
    vals = np.sort(np.exp(rng.uniform(-3.0, 3.0, size=k)))[::-1]
    return StepFn(pts[idx], vals)
