"""Stable laws, Lévy-measure conversions, and samplers.

The characteristic exponent convention is ``E exp(iu l_t) = exp(t Psi(u))`` with

    Psi(u) = -c |u|^alpha (1 - i beta sgn(u) tan(pi alpha / 2)),        alpha != 1
    Psi(u) = -c |u| (1 + i beta (2/pi) sgn(u) ln|u|),                  alpha == 1

which corresponds to the Lévy measure

    nu(dy) = c_- |y|^(-1-alpha) dy on y < 0,   c_+ y^(-1-alpha) dy on y > 0

with truncation function ``1{|y| <= 1}`` in the Lévy-Khinchine formula.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

__all__ = [
    "StableParams",
    "StableTails",
    "FiniteJumps",
    "LevyDecomposition",
    "CompoundPoissonPath",
    "char_exponent",
    "levy_exponent",
    "params_from_levy_measure",
    "levy_measure_from_params",
    "sample_stable",
    "sample_stable_increment",
    "decompose",
    "sample_compound_poisson_path",
    "path_rng",
    "empirical_cf",
]

EULER_GAMMA = 0.5772156649015329


def path_rng(seed: int, *keys: int) -> np.random.Generator:
    """Counter-based generator for one path.

    The stream depends only on ``(seed, *keys)``, so a path is reproducible
    from its index no matter how work is split across processes.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *keys])))


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _tail_constant(alpha: float) -> float:
    # c / (c_- + c_+); continuous at alpha = 1
    if alpha == 1.0:
        return math.pi / 2
    return math.gamma(2 - alpha) / (alpha * (1 - alpha)) * math.cos(math.pi * alpha / 2)


def _drift_factor(alpha: float) -> float:
    # mu / (c_+ - c_-)
    if alpha == 1.0:
        return -(1.0 - EULER_GAMMA)
    return 1.0 / (1.0 - alpha)


@dataclass(frozen=True)
class StableParams:
    """Strictly alpha-stable law in the ``(alpha, beta, c)`` parametrization.

    Use :meth:`from_levy_measure` to build from ``(c_-, c_+)``. For
    ``alpha == 1`` and ``beta != 0`` the law is stable but not strictly stable.
    """

    alpha: float
    beta: float = 0.0
    c: float = 1.0

    def __post_init__(self):
        if not 0 < self.alpha < 2:
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha}")
        if not -1 <= self.beta <= 1:
            raise ValueError(f"beta must lie in [-1, 1], got {self.beta}")
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c}")

    @classmethod
    def from_levy_measure(cls, cminus: float, cplus: float, alpha: float) -> StableParams:
        beta, c, _ = params_from_levy_measure(cminus, cplus, alpha)
        return cls(alpha, beta, c)

    @property
    def cminus(self) -> float:
        return levy_measure_from_params(self)[0]

    @property
    def cplus(self) -> float:
        return levy_measure_from_params(self)[1]

    @property
    def mu(self) -> float:
        return levy_measure_from_params(self)[2]

    @property
    def tails(self) -> StableTails:
        cm, cp, _ = levy_measure_from_params(self)
        return StableTails(cm, cp, self.alpha)


def params_from_levy_measure(cminus: float, cplus: float, alpha: float) -> tuple[float, float, float]:
    """Map ``(c_-, c_+, alpha)`` to ``(beta, c, mu)``."""
    if not 0 < alpha < 2:
        raise ValueError(f"alpha must lie in (0, 2), got {alpha}")
    if cminus < 0 or cplus < 0:
        raise ValueError("tail constants must be nonnegative")
    total = cminus + cplus
    if total <= 0:
        raise ValueError("c_- + c_+ must be positive")
    beta = (cplus - cminus) / total
    c = total * _tail_constant(alpha)
    mu = (cplus - cminus) * _drift_factor(alpha)
    return beta, c, mu


def levy_measure_from_params(p: StableParams) -> tuple[float, float, float]:
    """Inverse of :func:`params_from_levy_measure`: ``(c_-, c_+, mu)``."""
    total = p.c / _tail_constant(p.alpha)
    cplus = total * (1 + p.beta) / 2
    cminus = total * (1 - p.beta) / 2
    return cminus, cplus, (cplus - cminus) * _drift_factor(p.alpha)


def char_exponent(p: StableParams, u):
    """Characteristic exponent ``Psi(u)``; vectorized over ``u``.

    ``Psi(0) = 0`` and ``Psi(-u) = conj(Psi(u))``. The ``alpha == 1`` branch
    uses ``ln|u|``.
    """
    u = np.asarray(u, dtype=float)
    au = np.abs(u)
    s = np.sign(u)
    if p.alpha == 1.0:
        with np.errstate(divide="ignore", invalid="ignore"):
            log_au = np.where(au > 0, np.log(np.where(au > 0, au, 1.0)), 0.0)
        out = -p.c * au * (1 + 1j * p.beta * (2 / math.pi) * s * log_au)
    else:
        out = -p.c * au**p.alpha * (1 - 1j * p.beta * s * math.tan(math.pi * p.alpha / 2))
    out = np.where(au == 0, 0j, out)
    return out[()] if out.ndim == 0 else out


# --------------------------------------------------------------------------
# Jump measures and the a-threshold decomposition
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class StableTails:
    """Power-law Lévy measure ``c_-|y|^{-1-alpha}`` / ``c_+ y^{-1-alpha}``."""

    cminus: float
    cplus: float
    alpha: float

    def __post_init__(self):
        if self.cminus < 0 or self.cplus < 0 or self.cminus + self.cplus <= 0:
            raise ValueError("need c_-, c_+ >= 0 with c_- + c_+ > 0")
        if not 0 < self.alpha < 2:
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha}")

    def mass_beyond(self, a: float) -> float:
        return (self.cminus + self.cplus) * a ** -self.alpha / self.alpha

    def second_moment_below(self, a: float) -> float:
        return (self.cminus + self.cplus) * a ** (2 - self.alpha) / (2 - self.alpha)

    def first_moment_between(self, a: float, b: float = 1.0) -> float:
        """``int_{a <= |y| <= b} y nu(dy)``."""
        if self.alpha == 1.0:
            core = math.log(b / a)
        else:
            core = (b ** (1 - self.alpha) - a ** (1 - self.alpha)) / (1 - self.alpha)
        return (self.cplus - self.cminus) * core

    def sample_big_jumps(self, a: float, size: int, rng: np.random.Generator) -> np.ndarray:
        positive = rng.random(size) < self.cplus / (self.cminus + self.cplus)
        # Pareto(alpha) magnitudes on [a, inf)
        mag = a * (1.0 - rng.random(size)) ** (-1.0 / self.alpha)
        return np.where(positive, mag, -mag)


@dataclass(frozen=True)
class FiniteJumps:
    """Finite Lévy measure: jump ``sizes[k]`` arrives at rate ``rates[k]``.

    ``mu`` and ``sigma`` complete the Lévy triplet. An empty list (or zero
    rates) gives a Brownian motion with drift, or a pure drift.
    """

    sizes: np.ndarray = field(default_factory=lambda: np.zeros(0))
    rates: np.ndarray = field(default_factory=lambda: np.zeros(0))
    mu: float = 0.0
    sigma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "sizes", _frozen(self.sizes))
        object.__setattr__(self, "rates", _frozen(self.rates))
        if self.sizes.shape != self.rates.shape or self.sizes.ndim != 1:
            raise ValueError("sizes and rates must be 1-d arrays of equal length")
        if np.any(self.rates < 0):
            raise ValueError("jump rates must be nonnegative")
        if np.any(self.sizes == 0):
            raise ValueError("jump sizes must be nonzero")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")

    def mass_beyond(self, a: float) -> float:
        return float(self.rates[np.abs(self.sizes) >= a].sum())

    def second_moment_below(self, a: float) -> float:
        sel = np.abs(self.sizes) < a
        return float((self.rates[sel] * self.sizes[sel] ** 2).sum())

    def first_moment_between(self, a: float, b: float = 1.0) -> float:
        m = np.abs(self.sizes)
        sel = (m >= a) & (m <= b)
        return float((self.rates[sel] * self.sizes[sel]).sum())

    def sample_big_jumps(self, a: float, size: int, rng: np.random.Generator) -> np.ndarray:
        sel = np.abs(self.sizes) >= a
        rates = self.rates[sel]
        if size == 0 or rates.sum() == 0:
            return np.zeros(0) if size == 0 else np.full(size, np.nan)
        return rng.choice(self.sizes[sel], size=size, p=rates / rates.sum())

    def exponent(self, u):
        u = np.asarray(u, dtype=float)
        y = self.sizes
        small = (np.abs(y) <= 1).astype(float)
        uy = np.multiply.outer(u, y)
        jumps = (self.rates * (np.exp(1j * uy) - 1 - 1j * uy * small)).sum(axis=-1)
        return -0.5 * self.sigma**2 * u**2 + 1j * self.mu * u + jumps


JumpSpec = Union[StableTails, FiniteJumps]


@dataclass(frozen=True)
class LevyDecomposition:
    """``L = sigma B + xi + eta`` split at jump threshold ``a``.

    ``eta`` is compound Poisson with intensity ``beta_a`` plus drift ``mu_a``;
    ``xi`` is the compensated small-jump martingale with variance rate
    ``small_jump_variance``.
    """

    sigma: float
    mu: float
    jumps: JumpSpec
    a: float
    mu_a: float
    beta_a: float
    small_jump_variance: float

    def exponent(self, u):
        """Full Lévy-Khinchine exponent of ``L``."""
        if isinstance(self.jumps, StableTails):
            p = StableParams.from_levy_measure(self.jumps.cminus, self.jumps.cplus, self.jumps.alpha)
            base_mu = levy_measure_from_params(p)[2]
            u = np.asarray(u, dtype=float)
            return (
                char_exponent(p, u)
                - 0.5 * self.sigma**2 * u**2
                + 1j * (self.mu - base_mu) * u
            )
        fj = FiniteJumps(self.jumps.sizes, self.jumps.rates, self.mu, self.sigma)
        return fj.exponent(u)

    def sample_jump_sizes(self, size: int, rng: np.random.Generator) -> np.ndarray:
        return self.jumps.sample_big_jumps(self.a, size, rng)


def levy_exponent(law, u):
    """Exponent of either a :class:`StableParams` or a :class:`LevyDecomposition`."""
    if isinstance(law, StableParams):
        return char_exponent(law, u)
    if isinstance(law, (LevyDecomposition, FiniteJumps)):
        return law.exponent(u)
    raise TypeError(f"unsupported law {type(law).__name__}")


def decompose(law, a: float, sigma: float | None = None) -> LevyDecomposition:
    """Split a Lévy law at jump threshold ``a`` in (0, 1].

    ``law`` is a :class:`StableParams` (sigma defaults to 0) or a
    :class:`FiniteJumps`.
    """
    if not a > 0:
        raise ValueError(f"threshold a must be positive, got {a}")
    if a > 1:
        raise ValueError(f"threshold a must be at most 1, got {a}")
    if isinstance(law, StableParams):
        jumps: JumpSpec = law.tails
        mu = law.mu
        sig = 0.0 if sigma is None else sigma
    elif isinstance(law, FiniteJumps):
        if np.any(np.abs(law.sizes) == a):
            raise ValueError("the Lévy measure must not charge the threshold +-a")
        jumps = law
        mu = law.mu
        sig = law.sigma if sigma is None else sigma
    else:
        raise TypeError(f"unsupported law {type(law).__name__}")
    if sig < 0:
        raise ValueError("sigma must be nonnegative")
    return LevyDecomposition(
        sigma=sig,
        mu=mu,
        jumps=jumps,
        a=a,
        mu_a=mu - jumps.first_moment_between(a, 1.0),
        beta_a=jumps.mass_beyond(a),
        small_jump_variance=jumps.second_moment_below(a),
    )


# --------------------------------------------------------------------------
# Samplers
# --------------------------------------------------------------------------


def sample_stable(p: StableParams, dt, size=None, rng: np.random.Generator | None = None) -> np.ndarray:
    """Chambers-Mallows-Stuck draws of the increment ``l_{dt}``.

    ``dt`` may be an array; it broadcasts against ``size``.
    """
    rng = np.random.default_rng() if rng is None else rng
    dt = np.asarray(dt, dtype=float)
    if np.any(dt < 0):
        raise ValueError("dt must be nonnegative")
    shape = dt.shape if size is None else size
    half_pi = math.pi / 2
    v = math.pi * (rng.random(shape) - 0.5)
    v = np.clip(v, -half_pi + 1e-15, half_pi - 1e-15)
    w = rng.standard_exponential(shape)
    a, b = p.alpha, p.beta
    if a == 1.0:
        hb = half_pi + b * v
        x = (hb * np.tan(v) - b * np.log(half_pi * w * np.cos(v) / hb)) / half_pi
        scale = p.c * dt
        with np.errstate(divide="ignore", invalid="ignore"):
            shift = np.where(scale > 0, b * scale * np.log(np.where(scale > 0, scale, 1.0)) / half_pi, 0.0)
        out = scale * x + shift
    else:
        zeta = b * math.tan(math.pi * a / 2)
        b0 = math.atan(zeta) / a
        s0 = (1 + zeta**2) ** (1 / (2 * a))
        x = (
            s0
            * np.sin(a * (v + b0))
            / np.cos(v) ** (1 / a)
            * (np.cos(v - a * (v + b0)) / w) ** ((1 - a) / a)
        )
        out = (p.c * dt) ** (1 / a) * x
    return np.where(dt == 0, 0.0, out)


def sample_stable_increment(p: StableParams, dt: float, rng: np.random.Generator) -> float:
    """One draw of ``l_{dt}``."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    if dt == 0:
        return 0.0
    return float(sample_stable(p, dt, size=(), rng=rng))


@dataclass(frozen=True)
class CompoundPoissonPath:
    """``eta_t = sum_{tau_k <= t} J_k + drift * t`` on ``[0, horizon]``."""

    times: np.ndarray
    sizes: np.ndarray
    drift: float
    horizon: float

    def __post_init__(self):
        object.__setattr__(self, "times", _frozen(self.times))
        object.__setattr__(self, "sizes", _frozen(self.sizes))
        if self.times.shape != self.sizes.shape:
            raise ValueError("times and sizes must have equal length")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if self.times.size:
            if np.any(np.diff(self.times) <= 0):
                raise ValueError("arrival times must be strictly increasing")
            if self.times[0] <= 0 or self.times[-1] > self.horizon:
                raise ValueError("arrival times must lie in (0, horizon]")

    @property
    def n_jumps(self) -> int:
        return int(self.times.size)

    def value(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.times, t, side="right")
        csum = np.concatenate([[0.0], np.cumsum(self.sizes)])
        return csum[idx] + self.drift * t


def sample_compound_poisson_path(d: LevyDecomposition, T: float, rng: np.random.Generator) -> CompoundPoissonPath:
    """Big-jump part ``eta`` of ``d`` on ``[0, T]``."""
    if not T > 0:
        raise ValueError("T must be positive")
    n = rng.poisson(d.beta_a * T) if d.beta_a > 0 else 0
    times = np.sort(T * (1.0 - rng.random(n)))  # uniform on (0, T]
    sizes = d.sample_jump_sizes(n, rng)
    return CompoundPoissonPath(times, sizes, d.mu_a, T)


def empirical_cf(samples, u) -> np.ndarray:
    """Empirical characteristic function ``mean(exp(i u X))``."""
    samples = np.asarray(samples, dtype=float)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    return np.array([np.mean(np.exp(1j * uk * samples)) for uk in u])
