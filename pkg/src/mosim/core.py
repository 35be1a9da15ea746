"""Shared value types: time grids, subset/indicator encoding, indicator paths
and deterministic random streams.

State indexing
--------------
Indicator states of dimension ``d`` are vectors of bits ``(b_1, ..., b_d)``
with ``1 = alive``. The bitmask of a state is ``sum(b_k << (k - 1))`` and the
row/column index used in generator and transition matrices is
``(2**d - 1) - mask``. Index 0 is therefore the all-alive state and the last
index is the absorbing all-dead state. For ``d = 2`` this yields the order
``(1,1), (0,1), (1,0), (0,0)``, the usual layout of the bivariate
looping-default intensity matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "TimeGrid",
    "IndicatorPath",
    "RandomStream",
    "as_generator",
    "subset_to_indicator",
    "indicator_to_subset",
    "subset_to_mask",
    "mask_to_subset",
    "state_index",
    "index_to_bits",
    "bits_label",
    "path_from_default_times",
    "indicators_from_default_times",
]


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing, nonnegative time points."""

    points: tuple[float, ...]

    def __post_init__(self):
        pts = tuple(float(p) for p in self.points)
        if not pts:
            raise ValueError("time grid needs at least one point")
        arr = np.asarray(pts)
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError("time grid points must be finite and >= 0")
        if np.any(np.diff(arr) <= 0):
            raise ValueError("time grid points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, dt: float, steps: int, t0: float = 0.0) -> "TimeGrid":
        if dt <= 0 or steps < 0:
            raise ValueError("need dt > 0 and steps >= 0")
        return cls(tuple(t0 + dt * k for k in range(steps + 1)))

    def __len__(self) -> int:
        return len(self.points)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)

    @property
    def horizon(self) -> float:
        return self.points[-1]

    def step(self, rtol: float = 1e-9) -> float:
        """Common spacing of an equally spaced grid; raises otherwise."""
        diffs = np.diff(self.as_array())
        if diffs.size == 0:
            raise ValueError("grid has no steps")
        if not np.allclose(diffs, diffs[0], rtol=rtol, atol=0.0):
            raise ValueError("grid is not equally spaced")
        return float(diffs[0])

    def index_of(self, t: float, atol: float = 1e-9) -> int | None:
        arr = self.as_array()
        hit = np.flatnonzero(np.abs(arr - t) <= atol)
        return int(hit[0]) if hit.size else None


def subset_to_indicator(members: Iterable[int], d: int) -> tuple[int, ...]:
    """Map a subset of ``{1..d}`` to its indicator vector."""
    members = set(members)
    if d < 1:
        raise ValueError("dimension must be >= 1")
    bad = [k for k in members if not (1 <= k <= d)]
    if bad:
        raise ValueError(f"members {sorted(bad)} outside 1..{d}")
    return tuple(1 if k in members else 0 for k in range(1, d + 1))


def indicator_to_subset(bits: Sequence[int], d: int | None = None) -> frozenset[int]:
    bits = tuple(int(b) for b in bits)
    if d is not None and len(bits) != d:
        raise ValueError(f"indicator has length {len(bits)}, expected {d}")
    if any(b not in (0, 1) for b in bits):
        raise ValueError("indicator entries must be 0 or 1")
    return frozenset(k + 1 for k, b in enumerate(bits) if b)


def subset_to_mask(members: Iterable[int]) -> int:
    mask = 0
    for k in members:
        if k < 1:
            raise ValueError("subset members are 1-based")
        mask |= 1 << (k - 1)
    return mask


def mask_to_subset(mask: int) -> frozenset[int]:
    if mask < 0:
        raise ValueError("mask must be nonnegative")
    return frozenset(k + 1 for k in range(mask.bit_length()) if mask >> k & 1)


def state_index(bits: Sequence[int]) -> int:
    """Matrix row of an indicator state (all-alive is row 0)."""
    d = len(bits)
    mask = sum(int(b) << k for k, b in enumerate(bits))
    return (1 << d) - 1 - mask


def index_to_bits(index: int, d: int) -> tuple[int, ...]:
    mask = (1 << d) - 1 - index
    if not 0 <= mask < (1 << d):
        raise ValueError(f"state index {index} out of range for d={d}")
    return tuple(mask >> k & 1 for k in range(d))


def bits_label(bits: Sequence[int]) -> str:
    return "".join(str(int(b)) for b in bits)


@dataclass(frozen=True)
class IndicatorPath:
    """Survival indicators on a grid; ``states[j, k] = 1`` iff component k alive at grid point j."""

    grid: TimeGrid
    states: np.ndarray = field(repr=False)

    def __post_init__(self):
        states = np.asarray(self.states, dtype=np.uint8)
        if states.ndim != 2 or states.shape[0] != len(self.grid):
            raise ValueError("states must have shape (len(grid), d)")
        if np.any(states > 1):
            raise ValueError("indicator entries must be 0 or 1")
        if np.any(np.diff(states.astype(np.int8), axis=0) > 0):
            raise ValueError("indicator path resurrects a component")
        states.setflags(write=False)
        object.__setattr__(self, "states", states)

    @property
    def d(self) -> int:
        return self.states.shape[1]

    def state_at(self, j: int) -> tuple[int, ...]:
        return tuple(int(b) for b in self.states[j])

    def labels(self) -> list[str]:
        return [bits_label(row) for row in self.states]


def indicators_from_default_times(taus: np.ndarray, grid_points: np.ndarray) -> np.ndarray:
    """Batch version: ``taus`` of shape (n, d) -> uint8 array (n, len(grid), d)."""
    taus = np.asarray(taus, dtype=float)
    pts = np.asarray(grid_points, dtype=float)
    return (taus[:, None, :] > pts[None, :, None]).astype(np.uint8)


def path_from_default_times(taus: Sequence[float], grid: TimeGrid) -> IndicatorPath:
    """Discretize default times: bit k at grid point t is ``tau_k > t``."""
    taus = np.asarray(taus, dtype=float)
    if taus.ndim != 1:
        raise ValueError("taus must be a vector")
    if np.any(taus < 0) or np.any(np.isnan(taus)):
        raise ValueError("default times must be nonnegative")
    states = indicators_from_default_times(taus[None, :], grid.as_array())[0]
    return IndicatorPath(grid, states)


@dataclass(frozen=True)
class RandomStream:
    """Deterministic substream ``index`` of a 64-bit ``seed``.

    Identical ``(seed, index)`` pairs give identical generators; distinct
    indices give statistically independent streams (``SeedSequence`` spawn
    keys feeding PCG64).
    """

    seed: int
    index: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.index < 0:
            raise ValueError("stream index must be nonnegative")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.index,))
        return np.random.Generator(np.random.PCG64(ss))

    def substream(self, index: int) -> "RandomStream":
        return RandomStream(self.seed, index)


def as_generator(rng=None) -> np.random.Generator:
    """Coerce ``None``/int/RandomStream/Generator into a numpy ``Generator``."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RandomStream):
        return rng.generator()
    if rng is None or isinstance(rng, (int, np.integer)):
        return np.random.default_rng(rng)
    raise TypeError(f"cannot build a random generator from {type(rng).__name__}")
