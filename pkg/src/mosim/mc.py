"""Small Monte Carlo helpers shared by the samplers and the test suite."""

from __future__ import annotations

import math

import numpy as np

__all__ = ["binomial_estimate", "empirical_survival", "z_score", "two_sample_z"]


def binomial_estimate(hits) -> tuple[float, float]:
    """Frequency of a boolean array and its standard error ``sqrt(p(1-p)/n)``."""
    hits = np.asarray(hits, dtype=bool)
    n = hits.size
    if n == 0:
        raise ValueError("no samples")
    p = float(np.count_nonzero(hits)) / n
    return p, math.sqrt(p * (1.0 - p) / n)


def empirical_survival(taus: np.ndarray, t) -> tuple[float, float]:
    """Empirical ``P(tau_1 > t_1, ..., tau_d > t_d)`` from samples of shape (n, d)."""
    taus = np.asarray(taus, dtype=float)
    t = np.asarray(t, dtype=float)
    return binomial_estimate(np.all(taus > t, axis=1))


def z_score(estimate: float, target: float, n: int) -> float:
    """Deviation of a frequency from a known probability, in binomial standard errors."""
    se = math.sqrt(target * (1.0 - target) / n)
    if se == 0.0:
        return 0.0 if estimate == target else math.inf
    return (estimate - target) / se


def two_sample_z(p1: float, se1: float, p2: float, se2: float) -> float:
    se = math.hypot(se1, se2)
    if se == 0.0:
        return 0.0 if p1 == p2 else math.inf
    return (p1 - p2) / se
