"""Bivariate copulas used to link exponential margins: Gaussian, Gumbel and
Marshall-Olkin.

Copulas here act as *survival* copulas:
``P(X1 > t1, X2 > t2) = C(exp(-lam1 t1), exp(-lam2 t2))``. Sampling a pair
``(U1, U2) ~ C`` and setting ``Xi = -log(Ui) / lam_i`` realizes exactly that.

The Gumbel copula uses the parameterization
``C(u, v) = exp(-((-log u)**(1/theta) + (-log v)**(1/theta))**theta)`` with
``theta`` in ``(0, 1]``; ``theta = 1`` is independence and ``1/theta`` is the
more common ``theta >= 1`` parameter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import stats
from scipy.special import ndtr, ndtri

from .core import as_generator
from .marshall_olkin import (
    BivariateMOCopulaParams,
    mo_copula_cdf,
    rates_from_alpha_beta_and_margins,
    sample_mo_shock,
)
from .subordinators import positive_stable

__all__ = [
    "GaussianCopula",
    "GumbelCopula",
    "MOCopula",
    "CopulaSpec",
    "bivariate_normal_cdf",
    "copula_cdf",
    "sample_copula",
    "sample_default_times_copula",
    "kendall_tau_empirical",
]

_TWO_PI = 2.0 * math.pi


@lru_cache(maxsize=None)
def _legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def _bvn_upper(h: float, k: float, r: float) -> float:
    """``P(X > h, Y > k)`` for standard normals with correlation ``r``.

    Drezner-Wesolowsky single-integral form evaluated by Gauss-Legendre
    quadrature, with Genz's rearrangement for ``|r| >= 0.925``.
    """
    if abs(r) < 0.3:
        x, w = _legendre(6)
    elif abs(r) < 0.75:
        x, w = _legendre(12)
    else:
        x, w = _legendre(20)
    hk = h * k
    if abs(r) < 0.925:
        hs = (h * h + k * k) / 2.0
        asr = math.asin(r) / 2.0
        sn = np.sin(asr * (1.0 + x))
        bvn = float(np.sum(w * np.exp((sn * hk - hs) / (1.0 - sn * sn))))
        return bvn * asr / _TWO_PI + float(ndtr(-h) * ndtr(-k))

    if r < 0:
        k = -k
        hk = -hk
    bvn = 0.0
    if abs(r) < 1:
        a2 = (1.0 - r) * (1.0 + r)
        a = math.sqrt(a2)
        bs = (h - k) ** 2
        c = (4.0 - hk) / 8.0
        d = (12.0 - hk) / 16.0
        asr = -(bs / a2 + hk) / 2.0
        if asr > -100:
            bvn = a * math.exp(asr) * (1 - c * (bs - a2) * (1 - d * bs / 5) / 3 + c * d * a2 * a2 / 5)
        if hk > -100:
            b = math.sqrt(bs)
            sp = math.sqrt(_TWO_PI) * float(ndtr(-b / a))
            bvn -= math.exp(-hk / 2.0) * sp * b * (1 - c * bs * (1 - d * bs / 5) / 3)
        a /= 2.0
        xs = (a * (x + 1.0)) ** 2
        rs = np.sqrt(1.0 - xs)
        asr_v = -(bs / xs + hk) / 2.0
        ok = asr_v > -100
        sp_v = 1.0 + c * xs * (1.0 + d * xs)
        ep_v = np.exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs
        bvn += a * float(np.sum((w * np.exp(asr_v) * (ep_v - sp_v))[ok]))
        bvn = -bvn / _TWO_PI
    if r > 0:
        bvn += float(ndtr(-max(h, k)))
    elif h >= k:
        bvn = -bvn
    else:
        if h < 0:
            gap = float(ndtr(k) - ndtr(h))
        else:
            gap = float(ndtr(-h) - ndtr(-k))
        bvn = gap - bvn
    return bvn


def bivariate_normal_cdf(x: float, y: float, rho: float) -> float:
    """``P(X <= x, Y <= y)`` for a standard bivariate normal with correlation ``rho``."""
    if not -1.0 < rho < 1.0:
        raise ValueError("rho must lie in (-1, 1)")
    if math.isnan(x) or math.isnan(y):
        raise ValueError("nan input")
    if x == -math.inf or y == -math.inf:
        return 0.0
    if x == math.inf:
        return float(ndtr(y))
    if y == math.inf:
        return float(ndtr(x))
    return min(max(_bvn_upper(-x, -y, rho), 0.0), 1.0)


def _boundary(u: float, v: float) -> float | None:
    if not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0):
        raise ValueError("copula arguments must lie in [0, 1]")
    if u == 0.0 or v == 0.0:
        return 0.0
    if u == 1.0:
        return v
    if v == 1.0:
        return u
    return None


@dataclass(frozen=True)
class GaussianCopula:
    rho: float

    def __post_init__(self):
        if not -1.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (-1, 1)")

    def cdf(self, u: float, v: float) -> float:
        edge = _boundary(u, v)
        if edge is not None:
            return edge
        return bivariate_normal_cdf(float(ndtri(u)), float(ndtri(v)), self.rho)

    def sample(self, n: int, rng=None) -> np.ndarray:
        # Cholesky factor of [[1, rho], [rho, 1]]; radially symmetric, so this
        # also samples the survival copula
        rng = as_generator(rng)
        z = rng.standard_normal((n, 2))
        z2 = self.rho * z[:, 0] + math.sqrt(1.0 - self.rho**2) * z[:, 1]
        return np.column_stack([ndtr(z[:, 0]), ndtr(z2)])


@dataclass(frozen=True)
class GumbelCopula:
    theta: float

    def __post_init__(self):
        if not 0.0 < self.theta <= 1.0:
            raise ValueError("theta must lie in (0, 1]")

    def cdf(self, u: float, v: float) -> float:
        edge = _boundary(u, v)
        if edge is not None:
            return edge
        p = 1.0 / self.theta
        return math.exp(-((-math.log(u)) ** p + (-math.log(v)) ** p) ** self.theta)

    def sample(self, n: int, rng=None) -> np.ndarray:
        # Marshall-Olkin frailty: positive stable mixing variable, Laplace
        # transform exp(-s**theta) as generator
        rng = as_generator(rng)
        s = positive_stable(self.theta, n, rng)
        e = rng.standard_exponential((n, 2))
        return np.exp(-((e / s[:, None]) ** self.theta))


@dataclass(frozen=True)
class MOCopula:
    alpha: float
    beta: float

    def __post_init__(self):
        BivariateMOCopulaParams(self.alpha, self.beta)

    @property
    def params(self) -> BivariateMOCopulaParams:
        return BivariateMOCopulaParams(self.alpha, self.beta)

    def cdf(self, u: float, v: float) -> float:
        edge = _boundary(u, v)
        if edge is not None:
            return edge
        return mo_copula_cdf(self.params, u, v)

    def sample(self, n: int, rng=None) -> np.ndarray:
        rng = as_generator(rng)
        if self.alpha == 0.0 or self.beta == 0.0:
            # min(v u^(1-a), u v^(1-b)) collapses to u v
            return rng.random((n, 2))
        # margins r1 = 1/alpha, r2 = 1/beta give common shock rate 1
        r1, r2 = 1.0 / self.alpha, 1.0 / self.beta
        params = rates_from_alpha_beta_and_margins(self.alpha, self.beta, r1, r2)
        taus = sample_mo_shock(params, n, rng)
        return np.exp(-taus * np.array([r1, r2]))


CopulaSpec = GaussianCopula | GumbelCopula | MOCopula


def copula_cdf(spec: CopulaSpec, u, v):
    if np.ndim(u) == 0 and np.ndim(v) == 0:
        return spec.cdf(float(u), float(v))
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    return np.array([spec.cdf(a, b) for a, b in zip(u.ravel(), v.ravel())]).reshape(u.shape)


def sample_copula(spec: CopulaSpec, n: int, rng=None) -> np.ndarray:
    """``n`` uniform pairs from the copula, shape (n, 2)."""
    return spec.sample(n, as_generator(rng))


def sample_default_times_copula(spec: CopulaSpec, lam1: float, lam2: float, n: int = 1, rng=None) -> np.ndarray:
    """Exponential default times linked by ``spec`` as survival copula; shape (n, 2)."""
    if lam1 <= 0 or lam2 <= 0:
        raise ValueError("marginal rates must be positive")
    u = sample_copula(spec, n, rng)
    with np.errstate(divide="ignore"):
        return -np.log(u) / np.array([lam1, lam2])


def kendall_tau_empirical(pairs) -> float:
    """Sample Kendall's tau (tau-b, identical to concordant-minus-discordant without ties)."""
    pairs = np.asarray(pairs, dtype=float)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ValueError("pairs must have shape (n, 2)")
    if pairs.shape[0] < 2:
        raise ValueError("need at least two pairs")
    return float(stats.kendalltau(pairs[:, 0], pairs[:, 1]).statistic)
