"""Levy-frailty models: default times as first passages of subordinators
across independent exponential triggers.

Grid sampling follows the classic stepwise scheme: per grid step draw one
increment of each factor (shared by all components), then kill each alive
component with conditional probability ``1 - exp(-increment)``, either by
comparing against a fresh unit exponential or by a Bernoulli draw. Killed
components get the right endpoint of the step as default time; survivors
past the horizon get ``inf``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import IndicatorPath, TimeGrid, as_generator, indicators_from_default_times
from .marshall_olkin import MOParameters
from .subordinators import Subordinator, laplace_exponent

__all__ = [
    "TriggerMode",
    "OneFactorLFM",
    "MultiFactorLFM",
    "sample_lfm",
    "sample_lfm_path",
    "survival_one_factor",
    "survival_multi_factor",
    "hierarchical_weights",
    "bivariate_mo_from_psi",
]


class TriggerMode(str, enum.Enum):
    EXPONENTIAL = "exponential"
    BERNOULLI = "bernoulli"


@dataclass(frozen=True)
class OneFactorLFM:
    spec: Subordinator
    d: int
    trigger_rates: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        if self.trigger_rates is not None:
            rates = tuple(float(r) for r in self.trigger_rates)
            if len(rates) != self.d or any(r <= 0 for r in rates):
                raise ValueError("need d positive trigger rates")
            object.__setattr__(self, "trigger_rates", rates)

    @property
    def homogeneous(self) -> bool:
        return self.trigger_rates is None or all(r == 1.0 for r in self.trigger_rates)

    def factors(self) -> list[Subordinator]:
        return [self.spec]

    def loading_matrix(self) -> np.ndarray:
        rates = np.ones(self.d) if self.trigger_rates is None else np.asarray(self.trigger_rates)
        return rates[:, None]


@dataclass(frozen=True)
class MultiFactorLFM:
    """``Lambda^(k) = sum_l weights[k, l] * factor_l``; ``weights`` is d x m."""

    factors_: tuple[Subordinator, ...]
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        factors = tuple(self.factors_)
        w = np.array(self.weights, dtype=float, copy=True)
        if w.ndim != 2 or w.shape[1] != len(factors) or w.shape[0] < 1:
            raise ValueError("weights must be a d x m matrix matching the factors")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        if np.any(w.sum(axis=1) <= 0):
            raise ValueError("every component needs a positive weight on some factor")
        w.setflags(write=False)
        object.__setattr__(self, "factors_", factors)
        object.__setattr__(self, "weights", w)

    @property
    def d(self) -> int:
        return self.weights.shape[0]

    @property
    def m(self) -> int:
        return self.weights.shape[1]

    def factors(self) -> list[Subordinator]:
        return list(self.factors_)

    def loading_matrix(self) -> np.ndarray:
        return self.weights


def _component_increments(increments: np.ndarray, loadings: np.ndarray) -> np.ndarray:
    # (n, m) factor increments -> (n, d); 0 * inf counts as 0
    with np.errstate(invalid="ignore"):
        prod = increments[:, None, :] * loadings[None, :, :]
    prod = np.where(loadings[None, :, :] > 0, prod, 0.0)
    return prod.sum(axis=2)


def sample_lfm(
    model: OneFactorLFM | MultiFactorLFM,
    grid: TimeGrid,
    mode: TriggerMode | str = TriggerMode.EXPONENTIAL,
    n: int = 1,
    rng=None,
) -> np.ndarray:
    """``n`` grid-valued default-time vectors, shape (n, d); ``inf`` = alive at horizon."""
    mode = TriggerMode(mode)
    rng = as_generator(rng)
    pts = grid.as_array()
    if pts[0] != 0.0:
        raise ValueError("grid must start at t0 = 0")
    factors = model.factors()
    loadings = model.loading_matrix()
    d = loadings.shape[0]
    taus = np.full((n, d), np.inf)
    alive = np.ones((n, d), dtype=bool)
    active = np.arange(n)
    for step in range(len(pts) - 1):
        if active.size == 0:
            break
        t_star = pts[step + 1]
        dt = t_star - pts[step]
        inc = np.column_stack([f.sample(dt, active.size, rng) for f in factors])
        hazard = _component_increments(inc, loadings)
        if mode is TriggerMode.EXPONENTIAL:
            kill = hazard > rng.standard_exponential(hazard.shape)
        else:
            kill = rng.random(hazard.shape) < -np.expm1(-hazard)
        kill &= alive[active]
        rows, cols = np.nonzero(kill)
        taus[active[rows], cols] = t_star
        alive[active[rows], cols] = False
        active = active[alive[active].any(axis=1)]
    return taus


def sample_lfm_path(
    model: OneFactorLFM | MultiFactorLFM,
    grid: TimeGrid,
    mode: TriggerMode | str = TriggerMode.EXPONENTIAL,
    rng=None,
) -> tuple[np.ndarray, IndicatorPath]:
    """One path: grid-valued default times and the indicator path on ``grid``."""
    taus = sample_lfm(model, grid, mode, 1, rng)
    states = indicators_from_default_times(taus, grid.as_array())[0]
    return taus[0], IndicatorPath(grid, states)


def survival_one_factor(spec: Subordinator, t: Sequence[float]) -> float:
    """Homogeneous one-factor survival: ``prod_k exp(-(t_(k) - t_(k-1)) psi(d + 1 - k))``."""
    t = np.asarray(t, dtype=float)
    if t.ndim != 1 or np.any(t < 0):
        raise ValueError("t must be a vector of nonnegative times")
    d = t.size
    ts = np.sort(t)
    gaps = np.diff(ts, prepend=0.0)
    psis = laplace_exponent(spec, np.arange(d, 0, -1, dtype=float))
    return float(np.exp(-(gaps * psis).sum()))


def survival_multi_factor(
    model: MultiFactorLFM, t: Sequence[float], order: Sequence[int] | None = None
) -> float:
    """Multifactor survival; ``order`` (0-based permutation sorting ``t``) is optional."""
    t = np.asarray(t, dtype=float)
    if t.shape != (model.d,) or np.any(t < 0):
        raise ValueError(f"t must be {model.d} nonnegative times")
    perm = np.argsort(t, kind="stable") if order is None else np.asarray(order)
    ts = t[perm]
    if np.any(np.diff(ts) < 0):
        raise ValueError("order does not sort t")
    gaps = np.diff(ts, prepend=0.0)
    # tail sums of sorted weights: loads[j, l] = sum_{k >= j} theta_{pi(k), l}
    loads = np.cumsum(model.weights[perm][::-1], axis=0)[::-1]
    total = 0.0
    for ell, factor in enumerate(model.factors_):
        total += float((laplace_exponent(factor, loads[:, ell]) * gaps).sum())
    return float(np.exp(-total))


def hierarchical_weights(
    groups: Sequence[Sequence[int]], alpha: Sequence[float], beta: Sequence[float]
) -> np.ndarray:
    """d x (J+1) loadings: column 0 global (``alpha_g``), column ``1+g`` group (``beta_g``).

    ``groups`` lists the 1-based members of each of the J groups.
    """
    if not (len(groups) == len(alpha) == len(beta)):
        raise ValueError("need one alpha and one beta per group")
    members = [k for g in groups for k in g]
    d = len(members)
    if sorted(members) != list(range(1, d + 1)):
        raise ValueError("groups must partition 1..d")
    w = np.zeros((d, len(groups) + 1))
    for j, g in enumerate(groups):
        if alpha[j] < 0 or beta[j] < 0:
            raise ValueError("loads must be nonnegative")
        if g and alpha[j] + beta[j] <= 0:
            raise ValueError(f"group {j + 1} has zero total load")
        for k in g:
            w[k - 1, 0] = alpha[j]
            w[k - 1, 1 + j] = beta[j]
    return w


def bivariate_mo_from_psi(spec: Subordinator) -> MOParameters:
    """Shock rates of the bivariate homogeneous one-factor model."""
    p1 = laplace_exponent(spec, 1.0)
    p2 = laplace_exponent(spec, 2.0)
    if not (np.isfinite(p1) and np.isfinite(p2)):
        raise ValueError("psi(1), psi(2) must be finite")
    joint = 2.0 * p1 - p2
    if joint < -1e-12 * max(1.0, p2):
        raise ValueError("2 psi(1) - psi(2) < 0: psi is not concave")
    single = p2 - p1
    return MOParameters(2, {1: max(single, 0.0), 2: max(single, 0.0), 3: max(joint, 0.0)})
