"""First-passage statistics and characteristic-function checks."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, interpolate

from ._parallel import ordered_map
from .cadlag_paths import CadlagPath, first_passage
from .levy_core import LevyDecomposition, StableParams, levy_exponent, path_rng
from .ou_dynamics import (
    GridSpec,
    brownian_driver,
    integrate_langevin,
    levy_driver,
    stable_driver,
    time_change_map,
)

__all__ = [
    "FptSampleSet",
    "CfCheckSpec",
    "brownian_fpt_cdf",
    "stable_cdf_reference",
    "stable_cdf_table",
    "ks_statistic",
    "two_sample_ks",
    "cf_convergence_analytic",
    "cf_convergence_montecarlo",
    "fpt_scaling_experiment",
    "simulate_fpt_samples",
]

log = logging.getLogger(__name__)

#: censored fraction above which an experiment is flagged
CENSORING_LIMIT = 0.5


@dataclass(frozen=True, eq=False)
class FptSampleSet:
    """Passage times with ``nan`` marking paths that stayed below the level up to ``horizon``."""

    samples: np.ndarray
    horizon: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        ok = s[~np.isnan(s)]
        if np.any(ok < 0) or np.any(ok > self.horizon):
            raise ValueError("passage times must lie in [0, horizon]")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def n(self) -> int:
        return int(self.samples.size)

    @property
    def uncensored(self) -> np.ndarray:
        return np.sort(self.samples[~np.isnan(self.samples)])

    @property
    def n_censored(self) -> int:
        return int(np.isnan(self.samples).sum())

    @property
    def censored_fraction(self) -> float:
        return self.n_censored / self.n if self.n else 0.0

    @property
    def excess_censoring(self) -> bool:
        return self.censored_fraction > CENSORING_LIMIT


def brownian_fpt_cdf(a: float, A: float, t):
    """``P(tau <= t)`` for the passage of Brownian motion above ``a / A``.

    The integrand ``s^{-3/2} exp(-a^2 / (2 A^2 s))`` is singular at 0; after
    ``s = a^2 / (2 A^2 r^2)`` the integral becomes
    ``(2 / sqrt(pi)) int_{r0}^inf exp(-r^2) dr`` with ``r0 = a / (A sqrt(2 t))``.
    """
    if not (a > 0 and A > 0):
        raise ValueError("a and A must be positive")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("t must be nonnegative")
    out = np.empty(t_arr.shape)
    for idx, tk in np.ndenumerate(t_arr):
        if tk == 0:
            out[idx] = 0.0
            continue
        r0 = a / (A * math.sqrt(2 * tk))
        val, _ = integrate.quad(lambda r: math.exp(-r * r), r0, np.inf, epsabs=0, epsrel=1e-10)
        out[idx] = min(1.0, 2 / math.sqrt(math.pi) * val)
    return out[()] if out.ndim == 0 else out


def stable_cdf_reference(p: StableParams, x):
    """Stable CDF by Gil-Pelaez inversion of ``exp(Psi)``.

    ``F(x) = 1/2 - (1/pi) int_0^inf Im(exp(-iux) phi(u)) / u du``.
    """
    x_arr = np.asarray(x, dtype=float)
    out = np.empty(x_arr.shape)

    def integrand(u, xk):
        if u == 0.0:
            u = 1e-300
        phi = complex(np.exp(levy_exponent(p, u)))
        return (complex(math.cos(u * xk), -math.sin(u * xk)) * phi).imag / u

    # exp(Psi) decays like exp(-c u^alpha); past u_max the tail is negligible
    u_max = (40.0 / p.c) ** (1 / p.alpha)
    for idx, xk in np.ndenumerate(x_arr):
        val, _ = integrate.quad(integrand, 0.0, u_max, args=(xk,), limit=2000, epsabs=1e-11)
        out[idx] = 0.5 - val / math.pi
    return out[()] if out.ndim == 0 else out


def stable_cdf_table(p: StableParams, lo: float, hi: float, n: int = 801) -> Callable:
    """Reference CDF: Gil-Pelaez on a grid, monotone cubic in between, direct beyond."""
    grid = np.linspace(lo, hi, n)
    spline = interpolate.PchipInterpolator(grid, stable_cdf_reference(p, grid))

    def cdf(x):
        x = np.asarray(x, dtype=float)
        out = np.asarray(spline(np.clip(x, lo, hi)), dtype=float)
        outside = (x < lo) | (x > hi)
        if np.any(outside):
            out = out.copy()
            out[outside] = stable_cdf_reference(p, x[outside])
        return out

    return cdf


def _observed(samples) -> tuple[np.ndarray, int, float | None]:
    # (sorted observed values, total count, horizon or None without censoring)
    if isinstance(samples, FptSampleSet):
        h = samples.horizon if samples.n_censored else None
        return samples.uncensored, samples.n, h
    s = np.asarray(samples, dtype=float).ravel()
    ok = np.sort(s[~np.isnan(s)])
    return ok, s.size, (float(ok[-1]) if ok.size and ok.size < s.size else None)


def ks_statistic(samples, cdf: Callable) -> float:
    """Sup distance between the empirical CDF and ``cdf`` up to the horizon.

    Censored samples count in the denominator and carry their mass beyond the
    horizon, so the comparison is over ``[0, horizon]`` only. Without
    censoring this is the ordinary one-sample KS statistic.
    """
    x, n, horizon = _observed(samples)
    if x.size == 0:
        raise ValueError("all samples are censored")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, x.size + 1)
    d = max(np.max(i / n - F), np.max(F - (i - 1) / n))
    if horizon is not None:
        d = max(d, abs(float(cdf(horizon)) - x.size / n))
    return float(d)


def two_sample_ks(s1, s2) -> float:
    """Two-sample KS distance, restricted to the common horizon under censoring."""
    x1, n1, h1 = _observed(s1)
    x2, n2, h2 = _observed(s2)
    H = min(h for h in (h1, h2, np.inf) if h is not None)
    x1, x2 = x1[x1 <= H], x2[x2 <= H]
    pts = np.concatenate([x1, x2])
    if pts.size == 0:
        raise ValueError("all samples are censored")
    F1 = np.searchsorted(x1, pts, side="right") / n1
    F2 = np.searchsorted(x2, pts, side="right") / n2
    return float(np.max(np.abs(F1 - F2)))


# --------------------------------------------------------------------------
# Finite-dimensional distributions
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CfCheckSpec:
    """Target ``E exp(i sum_k u_k (A X_{t_k} - L_{t_k}))`` for one gamma."""

    times: Sequence[float]
    weights: Sequence[float]
    gamma: float
    law: StableParams | LevyDecomposition
    A: float = 1.0

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        u = np.array(self.weights, dtype=float)
        if t.ndim != 1 or t.size < 1:
            raise ValueError("need at least one time point")
        if t.shape != u.shape:
            raise ValueError("times and weights must have equal length")
        if t[0] <= 0 or np.any(np.diff(t) <= 0):
            raise ValueError("times must be positive and strictly increasing")
        if self.gamma < 0 or not self.A > 0:
            raise ValueError("need gamma >= 0 and A > 0")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "weights", u)


def cf_convergence_analytic(spec: CfCheckSpec, quad_nodes: int = 500) -> complex:
    """``exp(sum_j int_{t_{j-1}}^{t_j} Psi(u_j(s)) ds)``,
    ``u_j(s) = -sum_{k >= j} u_k exp(-gamma A (t_k - s))``.

    ``quad_nodes`` caps the adaptive subdivisions per piece; failure to reach
    tolerance raises ``RuntimeError``.
    """
    t, u = spec.times, spec.weights
    if not np.any(u):
        return 1.0 + 0.0j
    rate = spec.gamma * spec.A
    edges = np.concatenate([[0.0], t])
    total = 0.0 + 0.0j
    for j in range(t.size):
        a, b = edges[j], edges[j + 1]
        tk, uk = t[j:], u[j:]

        def arg(s):
            return -np.sum(uk * np.exp(-rate * (tk - s)))

        def part(s, which):
            z = complex(levy_exponent(spec.law, arg(s)))
            return z.real if which == 0 else z.imag

        # the integrand changes on a 1/rate layer below each t_k
        cuts = [a]
        if rate > 0:
            for w in (50.0, 10.0, 1.0):
                c = b - w / rate
                if a < c < b:
                    cuts.append(c)
        cuts.append(b)
        cuts = sorted(set(cuts))
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            for which in (0, 1):
                val, err, *rest = integrate.quad(
                    part, lo, hi, args=(which,), limit=quad_nodes,
                    epsabs=1e-12, epsrel=1e-10, full_output=1,
                )
                if len(rest) > 1 and err > 1e-8 * max(1.0, abs(val)):
                    raise RuntimeError(f"quadrature did not converge on [{lo}, {hi}]: {rest[1]}")
                total += val if which == 0 else 1j * val
    return complex(np.exp(total))


def _driver_for(law, grid, rng, extra_nodes=(), include_gaussian=True):
    if isinstance(law, StableParams):
        return stable_driver(law, grid, rng, extra_nodes)
    if isinstance(law, LevyDecomposition):
        return levy_driver(law, grid, rng, include_gaussian, extra_nodes)
    if law == "brownian":
        return brownian_driver(grid, rng, 1.0, extra_nodes)
    raise TypeError(f"unsupported law {law!r}")


def _cf_path_term(args):
    spec, n_steps, seed, index = args
    t = spec.times
    grid = GridSpec(n_steps, float(t[-1]))
    rng = path_rng(seed, index)
    driver = _driver_for(spec.law, grid, rng, extra_nodes=t)
    _, _, x = integrate_langevin(driver, spec.gamma * spec.A, 1.0, spec.gamma)
    idx = np.searchsorted(driver.times, t)
    L = driver.values()[idx]
    return float(np.sum(spec.weights * (spec.A * x[idx] - L)))


def cf_convergence_montecarlo(spec: CfCheckSpec, n_paths: int, n_steps: int, seed: int, workers: int = 1) -> complex:
    """Monte Carlo estimate of the same expectation from coupled ``(X, L)`` paths."""
    if not np.any(spec.weights):
        return 1.0 + 0.0j
    sums = ordered_map(_cf_path_term, [(spec, n_steps, seed, i) for i in range(n_paths)], workers)
    return complex(np.mean(np.exp(1j * np.asarray(sums))))


# --------------------------------------------------------------------------
# First passage scaling
# --------------------------------------------------------------------------


def _fpt_one(args):
    law, gamma, A, level, n_steps, horizon, seed, keys = args
    grid = GridSpec(n_steps, horizon)
    driver = _driver_for(law, grid, path_rng(seed, *keys))
    _, _, x = integrate_langevin(driver, gamma * A, 1.0, gamma)
    tau = first_passage(CadlagPath.continuous(driver.times, x, horizon), level)
    return np.nan if tau is None else tau


def simulate_fpt_samples(law, gamma: float, A: float, level: float, n_paths: int, n_steps: int,
                         horizon: float, seed: int, stream: int = 0, workers: int = 1) -> FptSampleSet:
    """Passage times of ``X^gamma`` (zero initial conditions) above ``level``."""
    jobs = [(law, gamma, A, level, n_steps, horizon, seed, (stream, i)) for i in range(n_paths)]
    taus = ordered_map(_fpt_one, jobs, workers)
    meta = dict(gamma=gamma, A=A, level=level, n_paths=n_paths, h=horizon / n_steps, seed=seed)
    return FptSampleSet(np.array(taus, dtype=float), horizon, meta)


def fpt_scaling_experiment(alpha: float, A: float, a: float, eps_list: Sequence[float], n_paths: int,
                           n_steps: int, horizon: float, seed: int, beta: float = 0.0, c: float = 1.0,
                           workers: int = 1) -> list[tuple[float, FptSampleSet]]:
    """Samples of ``eps^alpha tau_a(x^eps)`` for each ``eps``.

    ``x^eps`` on ``[0, horizon / eps^alpha]`` equals ``X^gamma`` on
    ``[0, horizon]`` in law with ``gamma = eps^-alpha``, so the rescaled
    passage times are simulated directly on the short horizon. ``alpha == 2``
    selects a standard Brownian driver. Each ``eps`` uses its own streams.
    """
    if not a > 0:
        raise ValueError("level a must be positive")
    if alpha == 2:
        law = "brownian"
    else:
        if beta <= -1:
            raise ValueError("beta = -1 is excluded: the running supremum may stay bounded")
        law = StableParams(alpha, beta, c)
    out = []
    for k, eps in enumerate(eps_list):
        gamma = time_change_map(eps, alpha)
        s = simulate_fpt_samples(law, gamma, A, a, n_paths, n_steps, horizon, seed, stream=k, workers=workers)
        s.meta.update(eps=eps, alpha=alpha)
        if s.excess_censoring:
            log.warning("eps=%g: %.0f%% of paths censored", eps, 100 * s.censored_fraction)
        out.append((eps, s))
    return out
