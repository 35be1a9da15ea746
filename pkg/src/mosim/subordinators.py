"""Levy subordinators with closed-form Laplace exponents and exact increment samplers.

Every subordinator ``Lambda`` is described by its Laplace exponent ``psi``,
``E[exp(-x Lambda_t)] = exp(-t psi(x))``. Increments over a step ``dt`` are
drawn exactly from the law of ``Lambda_dt``; killed drifts may return ``inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import as_generator

__all__ = [
    "Subordinator",
    "Drift",
    "KilledDrift",
    "ExponentialJumps",
    "ConstantJumps",
    "CompoundPoissonDrift",
    "Gamma",
    "InverseGaussian",
    "Stable",
    "Sum",
    "laplace_exponent",
    "sample_increment",
    "empirical_laplace_check",
    "positive_stable",
]


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


def positive_stable(alpha: float, size, rng) -> np.ndarray:
    """Positive stable variates with ``E[exp(-x S)] = exp(-x**alpha)``.

    Kanter's representation (the totally skewed case of Chambers-Mallows-Stuck):
    ``S = sin(a U) / sin(U)**(1/a) * (sin((1-a) U) / E)**((1-a)/a)``
    with ``U ~ Uniform(0, pi)`` and ``E ~ Exp(1)``.
    """
    rng = as_generator(rng)
    if alpha == 1.0:
        return np.ones(size)
    u = rng.uniform(0.0, math.pi, size)
    e = rng.standard_exponential(size)
    a = alpha
    return (
        np.sin(a * u)
        / np.sin(u) ** (1.0 / a)
        * (np.sin((1.0 - a) * u) / e) ** ((1.0 - a) / a)
    )


class Subordinator:
    """Base class; subclasses are frozen dataclasses."""

    def psi(self, x):
        raise NotImplementedError

    def sample(self, dt: float, size=None, rng=None):
        raise NotImplementedError

    def __call__(self, x):
        return self.psi(x)


@dataclass(frozen=True)
class Drift(Subordinator):
    mu: float

    def __post_init__(self):
        _check(self.mu > 0, "Drift needs mu > 0")

    def psi(self, x):
        return self.mu * np.asarray(x, dtype=float)

    def sample(self, dt, size=None, rng=None):
        return np.full(size, self.mu * dt) if size is not None else self.mu * dt


@dataclass(frozen=True)
class KilledDrift(Subordinator):
    """Drift ``mu`` plus a jump to infinity at an ``Exp(lam)`` time."""

    mu: float
    lam: float

    def __post_init__(self):
        _check(self.mu >= 0, "KilledDrift needs mu >= 0")
        _check(self.lam > 0, "KilledDrift needs lam > 0")

    def psi(self, x):
        x = np.asarray(x, dtype=float)
        return self.mu * x + self.lam * (x > 0)

    def sample(self, dt, size=None, rng=None):
        rng = as_generator(rng)
        killed = rng.random(size) < -math.expm1(-self.lam * dt)
        return np.where(killed, np.inf, self.mu * dt)


@dataclass(frozen=True)
class ExponentialJumps:
    rate: float

    def __post_init__(self):
        _check(self.rate > 0, "jump rate must be positive")

    def laplace_complement(self, x):
        # E[1 - exp(-x J)] for J ~ Exp(rate)
        x = np.asarray(x, dtype=float)
        return x / (x + self.rate)

    def sum_of(self, counts, rng):
        counts = np.asarray(counts)
        out = np.zeros(counts.shape)
        pos = counts > 0
        out[pos] = rng.gamma(counts[pos], 1.0 / self.rate)
        return out


@dataclass(frozen=True)
class ConstantJumps:
    size: float

    def __post_init__(self):
        _check(self.size > 0, "jump size must be positive")

    def laplace_complement(self, x):
        return -np.expm1(-self.size * np.asarray(x, dtype=float))

    def sum_of(self, counts, rng):
        return self.size * np.asarray(counts, dtype=float)


@dataclass(frozen=True)
class CompoundPoissonDrift(Subordinator):
    mu: float
    lam: float
    jumps: ExponentialJumps | ConstantJumps

    def __post_init__(self):
        _check(self.mu >= 0, "CompoundPoissonDrift needs mu >= 0")
        _check(self.lam > 0, "CompoundPoissonDrift needs lam > 0")

    def psi(self, x):
        x = np.asarray(x, dtype=float)
        return self.mu * x + self.lam * self.jumps.laplace_complement(x)

    def sample(self, dt, size=None, rng=None):
        rng = as_generator(rng)
        counts = rng.poisson(self.lam * dt, size)
        return self.mu * dt + self.jumps.sum_of(counts, rng)


@dataclass(frozen=True)
class Gamma(Subordinator):
    """``Lambda_t ~ Gamma(shape=beta t, rate=eta)``."""

    beta: float
    eta: float

    def __post_init__(self):
        _check(self.beta > 0 and self.eta > 0, "Gamma needs beta, eta > 0")

    def psi(self, x):
        return self.beta * np.log1p(np.asarray(x, dtype=float) / self.eta)

    def sample(self, dt, size=None, rng=None):
        # numpy's gamma sampler is a rejection method valid for shape < 1
        return as_generator(rng).gamma(self.beta * dt, 1.0 / self.eta, size)


@dataclass(frozen=True)
class InverseGaussian(Subordinator):
    """``Lambda_t`` is inverse Gaussian with mean ``beta t / eta`` and shape ``(beta t)**2``."""

    beta: float
    eta: float

    def __post_init__(self):
        _check(self.beta > 0 and self.eta > 0, "InverseGaussian needs beta, eta > 0")

    def psi(self, x):
        x = np.asarray(x, dtype=float)
        return self.beta * (np.sqrt(2.0 * x + self.eta**2) - self.eta)

    def sample(self, dt, size=None, rng=None):
        rng = as_generator(rng)
        mean = self.beta * dt / self.eta
        shape = (self.beta * dt) ** 2
        # Michael-Schucany-Haas transformation with one root selection
        y = rng.standard_normal(size) ** 2
        my = mean * y
        x = mean + mean / (2.0 * shape) * (my - np.sqrt(4.0 * shape * my + my * my))
        u = rng.random(size)
        return np.where(u <= mean / (mean + x), x, mean * mean / x)


@dataclass(frozen=True)
class Stable(Subordinator):
    """``psi(x) = x**alpha``; ``alpha = 1`` is the unit drift."""

    alpha: float

    def __post_init__(self):
        _check(0 < self.alpha <= 1, "Stable needs alpha in (0, 1]")

    def psi(self, x):
        return np.asarray(x, dtype=float) ** self.alpha

    def sample(self, dt, size=None, rng=None):
        if self.alpha == 1.0:
            return np.full(size, float(dt)) if size is not None else float(dt)
        s = positive_stable(self.alpha, size, rng)
        return dt ** (1.0 / self.alpha) * s


@dataclass(frozen=True)
class Sum(Subordinator):
    """``sum_i c_i Lambda^(i)`` for independent building blocks."""

    terms: tuple[tuple[float, Subordinator], ...]

    def __post_init__(self):
        terms = tuple((float(c), s) for c, s in self.terms)
        _check(len(terms) > 0, "Sum needs at least one term")
        _check(all(c > 0 for c, _ in terms), "Sum weights must be positive")
        object.__setattr__(self, "terms", terms)

    def psi(self, x):
        x = np.asarray(x, dtype=float)
        return sum(s.psi(c * x) for c, s in self.terms)

    def sample(self, dt, size=None, rng=None):
        rng = as_generator(rng)
        return sum(c * np.asarray(s.sample(dt, size, rng)) for c, s in self.terms)


def laplace_exponent(spec: Subordinator, x):
    """``psi(x)``; scalar in, float out."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0):
        raise ValueError("Laplace exponent needs x >= 0")
    out = spec.psi(x_arr)
    return float(out) if np.ndim(out) == 0 else out


def sample_increment(spec: Subordinator, dt: float, rng=None, size=None):
    """Exact draw(s) of ``Lambda_dt``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    out = spec.sample(dt, size, as_generator(rng))
    return float(out) if size is None else np.asarray(out, dtype=float)


def empirical_laplace_check(spec: Subordinator, x: float, t: float, n: int, rng=None):
    """Monte Carlo ``E[exp(-x Lambda_t)]`` against ``exp(-t psi(x))``.

    Returns ``(empirical, target, z)`` where ``z`` is the deviation in units
    of the empirical standard error (0 when the sample is degenerate).
    """
    if n < 10_000:
        raise ValueError("use at least 10^4 samples")
    draws = sample_increment(spec, t, rng, size=n)
    with np.errstate(over="ignore"):
        vals = np.exp(-x * draws)
    # a degenerate sample has its mean exactly, without summation rounding
    emp = float(vals[0]) if np.all(vals == vals[0]) else float(vals.mean())
    target = math.exp(-t * laplace_exponent(spec, x))
    se = float(vals.std(ddof=1)) / math.sqrt(n)
    if se == 0.0:
        z = 0.0 if math.isclose(emp, target, rel_tol=1e-12, abs_tol=1e-15) else math.inf
    else:
        z = (emp - target) / se
    return emp, target, z

