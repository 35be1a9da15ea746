"""Looping-default (Freund) models as continuous-time Markov chains on
survival-indicator states.

States are indexed as described in :mod:`mosim.core`: row 0 is all-alive,
the last row is the absorbing all-dead state, and for ``d = 2`` the order is
``(1,1), (0,1), (1,0), (0,0)``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.linalg import expm

from .core import IndicatorPath, TimeGrid, as_generator, index_to_bits

__all__ = [
    "MAX_DIM",
    "NumericalError",
    "FreundParams",
    "LoopingRateSpec",
    "build_freund_generator",
    "build_looping_generator",
    "transition_matrix",
    "freund_transition_closed_form",
    "freund_survival",
    "acbve_to_freund",
    "sample_ctmc_states",
    "sample_ctmc_path",
    "states_to_bits",
    "states_to_default_times",
    "chained_survival",
]

MAX_DIM = 12
SINGULAR_TOL = 1e-8
ROW_SUM_SLACK = 1e-12


class NumericalError(ArithmeticError):
    """A matrix computation produced non-finite or non-stochastic output."""


@dataclass(frozen=True)
class FreundParams:
    lam1: float
    lam2: float
    lam1_tilde: float
    lam2_tilde: float

    def __post_init__(self):
        for name in ("lam1", "lam2", "lam1_tilde", "lam2_tilde"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite rate")


def acbve_to_freund(eta1: float, eta2: float, eta12: float) -> FreundParams:
    if eta1 <= 0 or eta2 <= 0 or eta12 < 0:
        raise ValueError("need eta1, eta2 > 0 and eta12 >= 0")
    share = eta12 / (eta1 + eta2)
    return FreundParams(eta1 + share * eta1, eta2 + share * eta2, eta1 + eta12, eta2 + eta12)


def _index(mask: int, d: int) -> int:
    return (1 << d) - 1 - mask


@dataclass(frozen=True)
class LoopingRateSpec:
    """Transition rates between alive-sets, keyed by ``(alive_mask, target_mask)``.

    Bit ``k-1`` of a mask is component ``k``. Unlisted pairs have rate 0.
    """

    d: int
    rates: Mapping[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        d = int(self.d)
        if not 1 <= d <= MAX_DIM:
            raise ValueError(f"dimension must be in 1..{MAX_DIM}")
        full = (1 << d) - 1
        clean: dict[tuple[int, int], float] = {}
        for (src, dst), rate in dict(self.rates).items():
            src, dst = int(src), int(dst)
            if not (0 <= src <= full and 0 <= dst <= full):
                raise ValueError(f"mask pair {(src, dst)} outside dimension {d}")
            if dst & ~src or dst == src:
                raise ValueError(f"target {dst:#b} is not a proper subset of {src:#b}")
            rate = float(rate)
            if not math.isfinite(rate) or rate < 0:
                raise ValueError("rates must be finite and >= 0")
            if rate > 0:
                clean[(src, dst)] = clean.get((src, dst), 0.0) + rate
        out_rate: dict[int, float] = {}
        nbrs: dict[int, list[int]] = {}
        for (src, dst), rate in clean.items():
            out_rate[src] = out_rate.get(src, 0.0) + rate
            nbrs.setdefault(src, []).append(dst)
        seen = {full}
        queue = deque([full])
        while queue:
            s = queue.popleft()
            if s and out_rate.get(s, 0.0) <= 0:
                raise ValueError(f"reachable state {s:#0{d + 2}b} has no exit: defaults never complete")
            for t in nbrs.get(s, ()):
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "rates", clean)

    @classmethod
    def from_freund(cls, p: FreundParams) -> "LoopingRateSpec":
        return cls(2, {(0b11, 0b10): p.lam1, (0b11, 0b01): p.lam2, (0b10, 0): p.lam2_tilde, (0b01, 0): p.lam1_tilde})


def build_freund_generator(p: FreundParams) -> np.ndarray:
    l1, l2, t1, t2 = p.lam1, p.lam2, p.lam1_tilde, p.lam2_tilde
    return np.array(
        [
            [-(l1 + l2), l1, l2, 0.0],
            [0.0, -t2, 0.0, t2],
            [0.0, 0.0, -t1, t1],
            [0.0, 0.0, 0.0, 0.0],
        ]
    )


def build_looping_generator(spec: LoopingRateSpec) -> np.ndarray:
    d = spec.d
    q = np.zeros((1 << d, 1 << d))
    for (src, dst), rate in spec.rates.items():
        q[_index(src, d), _index(dst, d)] += rate
    q[np.diag_indices_from(q)] = -q.sum(axis=1)
    return q


def _dimension_of(q: np.ndarray) -> int:
    size = q.shape[0]
    d = size.bit_length() - 1
    if q.ndim != 2 or q.shape[1] != size or size != 1 << d or d < 1:
        raise ValueError("generator must be square with 2^d rows")
    if d > MAX_DIM:
        raise ValueError(f"dense generators limited to d <= {MAX_DIM}")
    return d


def _support_mask(d: int) -> np.ndarray:
    masks = (1 << d) - 1 - np.arange(1 << d)
    # target must be a subset of source
    return (masks[None, :] & ~masks[:, None]) == 0


def transition_matrix(q: np.ndarray, t: float) -> np.ndarray:
    """``expm(t Q)`` with the no-resurrection support enforced.

    Only the block of states other than all-dead is exponentiated; the
    all-dead column then follows from conservation of probability. Squaring
    the full matrix instead can leave ~1e-11 of mass drift in that column
    for nearly defective generators.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    q = np.asarray(q, dtype=float)
    d = _dimension_of(q)
    if np.any(q[-1] != 0.0):
        raise ValueError("the all-dead state must be absorbing (zero last row)")
    if t == 0:
        return np.eye(1 << d)
    m = (1 << d) - 1
    block = expm(t * q[:m, :m])
    if not np.all(np.isfinite(block)):
        raise NumericalError("matrix exponential produced non-finite entries")
    block = np.where(_support_mask(d)[:m, :m], block, 0.0)
    block = np.clip(block, 0.0, None)
    alive_mass = block.sum(axis=1)
    drift = float(np.max(alive_mass - 1.0, initial=0.0))
    if drift > ROW_SUM_SLACK:
        raise NumericalError(f"transition rows exceed 1 by {drift:.3g}")
    p = np.zeros((m + 1, m + 1))
    p[:m, :m] = block / np.maximum(alive_mass, 1.0)[:, None]
    p[:m, m] = np.clip(1.0 - p[:m, :m].sum(axis=1), 0.0, 1.0)
    p[m, m] = 1.0
    return p


def _decay_gap(a: float, b: float, t: float) -> float:
    """``(exp(-b t) - exp(-a t)) / (a - b)``, continuous through ``a == b``.

    Written as ``exp(-lo t) * (1 - exp(-x)) / (hi - lo)`` with ``x = (hi - lo) t``
    so the difference of exponentials never cancels.
    """
    lo, hi = min(a, b), max(a, b)
    gap = hi - lo
    x = gap * t
    if gap < SINGULAR_TOL:
        return t * math.exp(-lo * t) * (1.0 - x / 2.0 + x * x / 6.0)
    return math.exp(-lo * t) * -math.expm1(-x) / gap


def freund_transition_closed_form(p: FreundParams, t: float) -> np.ndarray:
    if t < 0:
        raise ValueError("t must be nonnegative")
    a = p.lam1 + p.lam2
    stay = math.exp(-a * t)
    to_01 = p.lam1 * _decay_gap(a, p.lam2_tilde, t)
    to_10 = p.lam2 * _decay_gap(a, p.lam1_tilde, t)
    to_00 = max(-math.expm1(-a * t) - to_01 - to_10, 0.0)
    return np.array(
        [
            [stay, to_01, to_10, to_00],
            [0.0, math.exp(-p.lam2_tilde * t), 0.0, -math.expm1(-p.lam2_tilde * t)],
            [0.0, 0.0, math.exp(-p.lam1_tilde * t), -math.expm1(-p.lam1_tilde * t)],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def freund_survival(p: FreundParams, t1: float, t2: float) -> float:
    """``P(tau_1 > t1, tau_2 > t2)``.

    Both-alive up to ``min(t1, t2)``, then the later-horizon name must
    survive the remaining gap, either with the other name still alive or
    after it has defaulted.
    """
    if t1 < 0 or t2 < 0:
        raise ValueError("times must be nonnegative")
    a = p.lam1 + p.lam2
    lo, gap = min(t1, t2), abs(t2 - t1)
    if t2 >= t1:
        after = math.exp(-a * gap) + p.lam1 * _decay_gap(a, p.lam2_tilde, gap)
    else:
        after = math.exp(-a * gap) + p.lam2 * _decay_gap(a, p.lam1_tilde, gap)
    return math.exp(-a * lo) * after


def sample_ctmc_states(q: np.ndarray, grid: TimeGrid, n: int = 1, rng=None, start: int = 0) -> np.ndarray:
    """State indices on an equally spaced grid, shape (n, len(grid)); ``start`` at ``grid[0]``."""
    rng = as_generator(rng)
    q = np.asarray(q, dtype=float)
    size = 1 << _dimension_of(q)
    out = np.empty((n, len(grid)), dtype=np.intp)
    out[:, 0] = start
    if len(grid) == 1:
        return out
    p = transition_matrix(q, grid.step())
    cum = np.cumsum(p, axis=1)
    cum[:, -1] = 1.0
    absorbing = np.diag(p) == 1.0
    current = out[:, 0].copy()
    for j in range(1, len(grid)):
        moving = ~absorbing[current]
        if moving.any():
            idx = np.flatnonzero(moving)
            u = rng.random(idx.size)
            before = current[idx]
            for s in np.unique(before):
                hit = before == s
                current[idx[hit]] = np.minimum(np.searchsorted(cum[s], u[hit], side="right"), size - 1)
        out[:, j] = current
    return out


def states_to_bits(states: np.ndarray, d: int) -> np.ndarray:
    masks = (1 << d) - 1 - np.asarray(states)
    return ((masks[..., None] >> np.arange(d)) & 1).astype(np.uint8)


def sample_ctmc_path(q: np.ndarray, grid: TimeGrid, rng=None, start: Sequence[int] | None = None) -> IndicatorPath:
    """One indicator path of the chain; ``start`` bits default to all-alive."""
    d = _dimension_of(np.asarray(q))
    start_idx = 0 if start is None else (1 << d) - 1 - sum(int(b) << k for k, b in enumerate(start))
    states = sample_ctmc_states(q, grid, 1, rng, start=start_idx)[0]
    return IndicatorPath(grid, states_to_bits(states, d))


def states_to_default_times(states: np.ndarray, grid: TimeGrid, d: int) -> np.ndarray:
    """First grid point at which each component is dead; ``inf`` if alive throughout."""
    bits = states_to_bits(states, d)
    pts = grid.as_array()
    dead = bits == 0
    first = np.argmax(dead, axis=1)
    ever = dead.any(axis=1)
    return np.where(ever, pts[first], np.inf)


def chained_survival(q: np.ndarray, t: Sequence[float]) -> float:
    """``P(tau_k > t_k for all k)`` for the chain started all-alive, by chaining
    transition matrices over the sorted distinct horizons."""
    q = np.asarray(q, dtype=float)
    d = _dimension_of(q)
    t = np.asarray(t, dtype=float)
    if t.shape != (d,) or np.any(t < 0):
        raise ValueError(f"need {d} nonnegative times")
    bits = np.array([index_to_bits(i, d) for i in range(1 << d)])
    vec = np.zeros(1 << d)
    vec[0] = 1.0
    prev = 0.0
    for horizon in np.unique(t):
        vec = vec @ transition_matrix(q, horizon - prev)
        must_live = t == horizon
        vec = vec * np.all(bits[:, must_live] == 1, axis=1)
        prev = horizon
    return float(vec.sum())
