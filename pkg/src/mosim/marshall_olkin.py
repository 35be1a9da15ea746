"""Marshall-Olkin exponential distributions.

Survival function, the exogenous shock sampler, Arnold's compound-sum sampler
and the bivariate Marshall-Olkin survival copula with its ``(alpha, beta)``
parameterization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .core import as_generator, mask_to_subset, subset_to_mask

__all__ = [
    "MOParameters",
    "BivariateMOCopulaParams",
    "survival_mo",
    "sample_mo_shock",
    "sample_mo_arnold",
    "mo_copula_cdf",
    "alpha_beta_from_rates",
    "rates_from_alpha_beta_and_margins",
    "SHOCK_MAX_DIM",
]

SHOCK_MAX_DIM = 25


def _build_alias(probs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vose alias table for a discrete distribution."""
    m = probs.size
    scaled = probs * m
    prob = np.zeros(m)
    alias = np.zeros(m, dtype=np.intp)
    small = [i for i in range(m) if scaled[i] < 1.0]
    large = [i for i in range(m) if scaled[i] >= 1.0]
    while small and large:
        s, g = small.pop(), large.pop()
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = scaled[g] + scaled[s] - 1.0
        (small if scaled[g] < 1.0 else large).append(g)
    for i in large + small:
        prob[i] = 1.0
        alias[i] = i
    return prob, alias


@dataclass(frozen=True)
class MOParameters:
    """Shock rates ``lambda_I`` for nonempty subsets ``I`` of ``{1..d}``.

    ``rates`` may be keyed by bitmask integers or by iterables of 1-based
    members. Zero rates are dropped; only the positive-rate subsets are kept.
    """

    d: int
    rates: Mapping = field(default_factory=dict)
    masks: np.ndarray = field(init=False, repr=False, compare=False)
    values: np.ndarray = field(init=False, repr=False, compare=False)
    members: np.ndarray = field(init=False, repr=False, compare=False)
    _alias: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        d = int(self.d)
        if d < 1:
            raise ValueError("dimension must be >= 1")
        canon: dict[int, float] = {}
        for key, rate in dict(self.rates).items():
            mask = int(key) if isinstance(key, (int, np.integer)) else subset_to_mask(key)
            if mask <= 0 or mask >= (1 << d):
                raise ValueError(f"subset {key!r} is empty or outside 1..{d}")
            rate = float(rate)
            if not np.isfinite(rate) or rate < 0:
                raise ValueError(f"rate for {key!r} must be finite and >= 0")
            if rate > 0:
                canon[mask] = canon.get(mask, 0.0) + rate
        masks = np.array(sorted(canon), dtype=np.int64)
        values = np.array([canon[m] for m in masks], dtype=float)
        members = (masks[:, None] >> np.arange(d)[None, :]) & 1 == 1
        if values.size == 0 or np.any(members.T @ values <= 0):
            raise ValueError("every component needs a positive total shock rate")
        object.__setattr__(self, "d", d)
        object.__setattr__(
            self, "rates", {tuple(sorted(mask_to_subset(int(m)))): float(v) for m, v in zip(masks, values)}
        )
        object.__setattr__(self, "masks", masks)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "_alias", _build_alias(values / values.sum()))

    @property
    def total_rate(self) -> float:
        return float(self.values.sum())

    def marginal_rates(self) -> np.ndarray:
        """Exponential rate of each component, ``sum_{I ni k} lambda_I``."""
        return self.members.T.astype(float) @ self.values

    def rate(self, subset: Iterable[int]) -> float:
        return self.rates.get(tuple(sorted(subset)), 0.0)

    def margin(self, keep: Iterable[int]) -> "MOParameters":
        """Parameters of the sub-vector ``(tau_k)_{k in keep}`` (1-based, order kept)."""
        keep = list(keep)
        new: dict[int, float] = {}
        for mask, rate in zip(self.masks, self.values):
            sub = 0
            for pos, k in enumerate(keep):
                if mask >> (k - 1) & 1:
                    sub |= 1 << pos
            if sub:
                new[sub] = new.get(sub, 0.0) + rate
        return MOParameters(len(keep), new)

    def to_masks(self) -> dict[int, float]:
        return {int(m): float(v) for m, v in zip(self.masks, self.values)}


def survival_mo(params: MOParameters, t) -> float | np.ndarray:
    """``P(tau > t) = exp(-sum_I lambda_I max_{i in I} t_i)``; ``t`` may be batched (..., d)."""
    t = np.asarray(t, dtype=float)
    if t.shape[-1] != params.d:
        raise ValueError(f"expected {params.d} times, got {t.shape[-1]}")
    if np.any(t < 0):
        raise ValueError("times must be nonnegative")
    maxes = np.where(params.members, t[..., None, :], 0.0).max(axis=-1)
    out = np.exp(-(maxes * params.values).sum(axis=-1))
    return float(out) if out.ndim == 0 else out


def sample_mo_shock(params: MOParameters, n: int = 1, rng=None) -> np.ndarray:
    """``n`` exact draws via ``tau_k = min{E_I : k in I}``; shape (n, d)."""
    if params.d > SHOCK_MAX_DIM:
        raise ValueError(f"shock sampler limited to d <= {SHOCK_MAX_DIM}")
    rng = as_generator(rng)
    shocks = rng.exponential(1.0 / params.values, size=(n, params.values.size))
    out = np.empty((n, params.d))
    for k in range(params.d):
        out[:, k] = shocks[:, params.members[:, k]].min(axis=1)
    return out


def sample_mo_arnold(params: MOParameters, n: int = 1, rng=None) -> np.ndarray:
    """``n`` exact draws via Arnold's marked Poisson construction; shape (n, d).

    Arrivals of a rate-``lambda`` Poisson process carry iid subset marks with
    ``P(Y = K) = lambda_K / lambda``; ``tau_k`` is the first arrival whose mark
    contains ``k``.
    """
    rng = as_generator(rng)
    prob, alias = params._alias
    m = prob.size
    scale = 1.0 / params.total_rate
    taus = np.full((n, params.d), np.inf)
    clock = np.zeros(n)
    active = np.arange(n)
    while active.size:
        clock[active] += rng.exponential(scale, active.size)
        slot = rng.integers(0, m, active.size)
        keep = rng.random(active.size) < prob[slot]
        marks = np.where(keep, slot, alias[slot])
        hit = params.members[marks] & np.isinf(taus[active])
        rows, cols = np.nonzero(hit)
        taus[active[rows], cols] = clock[active[rows]]
        active = active[np.isinf(taus[active]).any(axis=1)]
    return taus


@dataclass(frozen=True)
class BivariateMOCopulaParams:
    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")


def mo_copula_cdf(p: BivariateMOCopulaParams, u, v):
    """``min(v u**(1-alpha), u v**(1-beta))``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    out = np.minimum(v * u ** (1.0 - p.alpha), u * v ** (1.0 - p.beta))
    return float(out) if out.ndim == 0 else out


def alpha_beta_from_rates(lam1: float, lam2: float, lam12: float) -> BivariateMOCopulaParams:
    if min(lam1, lam2, lam12) < 0:
        raise ValueError("rates must be nonnegative")
    if lam1 + lam12 <= 0 or lam2 + lam12 <= 0:
        raise ValueError("each component needs a positive marginal rate")
    return BivariateMOCopulaParams(lam12 / (lam1 + lam12), lam12 / (lam2 + lam12))


def rates_from_alpha_beta_and_margins(
    alpha: float, beta: float, r1: float, r2: float, rtol: float = 1e-12
) -> MOParameters:
    """Invert the ``(alpha, beta)`` map given marginal rates.

    Only margins with ``alpha r1 == beta r2`` give a proper Marshall-Olkin law;
    anything else is rejected.
    """
    BivariateMOCopulaParams(alpha, beta)
    if r1 <= 0 or r2 <= 0:
        raise ValueError("marginal rates must be positive")
    lam12 = alpha * r1
    if not np.isclose(lam12, beta * r2, rtol=rtol, atol=1e-300):
        raise ValueError(
            f"alpha*r1 = {alpha * r1!r} != beta*r2 = {beta * r2!r}: "
            "these margins with this copula are not a Marshall-Olkin law"
        )
    return MOParameters(2, {1: max(r1 - lam12, 0.0), 2: max(r2 - lam12, 0.0), 3: lam12})
