"""Velocity and displacement of the Lévy-driven Langevin system.

Two formulations share one integrator:

* small noise:      v = v0 - A int v ds + eps l,     x = x0 + int v ds
* large friction:   V = v0 - gamma A int V ds + L,   X = x0 + gamma int V ds

The driver is a :class:`DriverPath`: a piecewise-constant jump part on a time
grid plus a constant drift rate. Given such a driver the recursion is exact;
the only approximation is replacing a general Lévy path by its values on the
grid. Jump times of finite-activity drivers are grid nodes, so those cases are
exact up to rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .cadlag_paths import CadlagPath
from .levy_core import (
    CompoundPoissonPath,
    LevyDecomposition,
    StableParams,
    sample_compound_poisson_path,
    sample_stable,
)

__all__ = [
    "LangevinSpec",
    "GridSpec",
    "DriverPath",
    "stable_driver",
    "brownian_driver",
    "jump_driver",
    "levy_driver",
    "simulate_vx",
    "simulate_large_friction",
    "integrate_langevin",
    "integrated_ou_cp_exact",
    "local_extremum_time",
    "time_change_map",
]


@dataclass(frozen=True)
class LangevinSpec:
    """Friction ``A``, horizon ``T`` and exactly one of ``eps`` / ``gamma``."""

    A: float
    T: float
    eps: float | None = None
    gamma: float | None = None
    v0: float = 0.0
    x0: float = 0.0

    def __post_init__(self):
        if not self.A > 0:
            raise ValueError("friction A must be positive")
        if not self.T > 0:
            raise ValueError("horizon T must be positive")
        if (self.eps is None) == (self.gamma is None):
            raise ValueError("set exactly one of eps and gamma")
        if self.eps is not None and self.eps < 0:
            raise ValueError("eps must be nonnegative")
        if self.gamma is not None and self.gamma < 0:
            raise ValueError("gamma must be nonnegative")


@dataclass(frozen=True)
class GridSpec:
    n_steps: int
    T: float

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be a positive integer")
        if not self.T > 0:
            raise ValueError("T must be positive")

    @property
    def h(self) -> float:
        return self.T / self.n_steps

    def nodes(self, extra=()) -> np.ndarray:
        t = np.linspace(0.0, self.T, self.n_steps + 1)
        extra = np.asarray(extra, dtype=float)
        if extra.size:
            if np.any(extra < 0) or np.any(extra > self.T):
                raise ValueError("extra nodes must lie in [0, T]")
            t = np.union1d(t, extra)
        return t


@dataclass(frozen=True, eq=False)
class DriverPath:
    """``L_t = sum_{times[i] <= t} increments[i] + drift * t``.

    ``times[0] == 0`` and ``increments[0] == 0``; the last node is the horizon.
    """

    times: np.ndarray
    increments: np.ndarray
    drift: float = 0.0

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        inc = np.array(self.increments, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("a driver needs a grid with at least one step")
        if t.shape != inc.shape:
            raise ValueError("times and increments must have equal length")
        if t[0] != 0 or np.any(np.diff(t) <= 0):
            raise ValueError("driver times must start at 0 and increase strictly")
        if inc[0] != 0:
            raise ValueError("the driver starts at 0")
        t.setflags(write=False)
        inc.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "increments", inc)

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def values(self) -> np.ndarray:
        return np.cumsum(self.increments) + self.drift * self.times

    def to_path(self) -> CadlagPath:
        right = self.values()
        if self.drift == 0:
            # shift rather than subtract so left limits match exactly
            left = np.concatenate([right[:1], right[:-1]])
            return CadlagPath(self.times, left, right, self.horizon, "step")
        return CadlagPath(self.times, right - self.increments, right, self.horizon)

    def scaled(self, factor: float) -> DriverPath:
        return DriverPath(self.times, factor * self.increments, factor * self.drift)

    def time_changed(self, eps: float, alpha: float) -> DriverPath:
        """Driver ``t -> eps * l(t / eps^alpha)``."""
        s = eps**alpha
        return DriverPath(self.times * s, eps * self.increments, eps * self.drift / s)


def stable_driver(p: StableParams, grid: GridSpec, rng: np.random.Generator, extra_nodes=()) -> DriverPath:
    """Exact stable increments over each grid step."""
    t = grid.nodes(extra_nodes)
    inc = np.concatenate([[0.0], sample_stable(p, np.diff(t), rng=rng)])
    return DriverPath(t, inc)


def brownian_driver(grid: GridSpec, rng: np.random.Generator, sigma: float = 1.0, extra_nodes=()) -> DriverPath:
    t = grid.nodes(extra_nodes)
    inc = np.concatenate([[0.0], sigma * np.sqrt(np.diff(t)) * rng.standard_normal(t.size - 1)])
    return DriverPath(t, inc)


def jump_driver(cp: CompoundPoissonPath, grid: GridSpec | None = None) -> DriverPath:
    """Exact driver for ``eta``: jump times become nodes."""
    base = np.array([0.0, cp.horizon]) if grid is None else grid.nodes()
    if base[-1] != cp.horizon:
        raise ValueError("grid and path horizons differ")
    t = np.union1d(base, cp.times)
    inc = np.zeros(t.size)
    inc[np.searchsorted(t, cp.times)] = cp.sizes
    return DriverPath(t, inc, cp.drift)


def levy_driver(d: LevyDecomposition, grid: GridSpec, rng: np.random.Generator,
                include_gaussian: bool = True, extra_nodes=()) -> DriverPath:
    """``sigma B + xi + eta`` with ``xi`` replaced by a variance-matched Gaussian.

    ``include_gaussian=False`` drops ``sigma B`` and keeps the pure-jump part.
    """
    cp = sample_compound_poisson_path(d, grid.T, rng)
    t = np.union1d(grid.nodes(extra_nodes), cp.times)
    var = d.small_jump_variance + (d.sigma**2 if include_gaussian else 0.0)
    inc = np.zeros(t.size)
    if var > 0:
        inc[1:] = math.sqrt(var) * np.sqrt(np.diff(t)) * rng.standard_normal(t.size - 1)
    inc[np.searchsorted(t, cp.times)] += cp.sizes
    return DriverPath(t, inc, cp.drift)


@njit(cache=True)
def _integrate(times, inc, drift, kappa, gain, pos_gain, v0, x0):
    n = times.size
    v_left = np.empty(n)
    v_right = np.empty(n)
    x = np.empty(n)
    v_left[0] = v0
    v_right[0] = v0
    x[0] = x0
    v = v0
    for i in range(1, n):
        h = times[i] - times[i - 1]
        if kappa > 0:
            kh = kappa * h
            decay = math.exp(-kh)
            phi1 = -math.expm1(-kh) / kappa
            # (h - phi1) / kappa without cancellation for small kh
            if kh < 1e-4:
                phi2 = h * h * (0.5 - kh / 6.0 + kh * kh / 24.0)
            else:
                phi2 = (h - phi1) / kappa
        else:
            decay = 1.0
            phi1 = h
            phi2 = 0.5 * h * h
        x[i] = x[i - 1] + pos_gain * (v * phi1 + gain * drift * phi2)
        v = decay * v + gain * drift * phi1
        v_left[i] = v
        v = v + gain * inc[i]
        v_right[i] = v
    return v_left, v_right, x


def integrate_langevin(driver: DriverPath, kappa: float, gain: float, pos_gain: float, v0: float = 0.0, x0: float = 0.0):
    """Arrays ``(v_left, v_right, x)`` at the driver nodes.

    Solves ``dv = -kappa v dt + gain dL``, ``dx = pos_gain v dt``.
    """
    return _integrate(driver.times, driver.increments, float(driver.drift), float(kappa),
                      float(gain), float(pos_gain), float(v0), float(x0))


def _paths(driver, v_left, v_right, x):
    T = driver.horizon
    return CadlagPath(driver.times, v_left, v_right, T), CadlagPath.continuous(driver.times, x, T)


def simulate_vx(spec: LangevinSpec, driver: DriverPath):
    """Small-noise system: ``(v, x)`` as paths on the driver's grid."""
    if spec.eps is None:
        raise ValueError("simulate_vx needs the eps form")
    if driver.horizon != spec.T:
        raise ValueError("driver horizon differs from spec.T")
    return _paths(driver, *integrate_langevin(driver, spec.A, spec.eps, 1.0, spec.v0, spec.x0))


def simulate_large_friction(spec: LangevinSpec, driver: DriverPath):
    """Large-friction system: ``(V, X)``; ``A X`` approximates ``L`` for large gamma.

    With ``gamma == 0`` the velocity is ``v0 + L`` and ``X`` stays at ``x0``.
    """
    if spec.gamma is None:
        raise ValueError("simulate_large_friction needs the gamma form")
    if driver.horizon != spec.T:
        raise ValueError("driver horizon differs from spec.T")
    g = spec.gamma
    arrays = integrate_langevin(driver, g * spec.A, 1.0, g, spec.v0, spec.x0)
    return _paths(driver, *arrays)


def time_change_map(eps: float, alpha: float) -> float:
    """Friction multiplier ``gamma = eps^-alpha`` matching noise level ``eps``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not 0 < alpha <= 2:
        raise ValueError("alpha must lie in (0, 2]")
    return eps**-alpha


def integrated_ou_cp_exact(cp: CompoundPoissonPath, gamma: float, t):
    """Closed form of ``X^{gamma,eta}_t`` (``A = 1``) for a compound Poisson driver with drift."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > cp.horizon):
        raise ValueError("t outside [0, horizon]")
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    if gamma == 0:
        return np.zeros_like(t)[()] if t.ndim == 0 else np.zeros_like(t)
    lag = t[..., None] - cp.times
    jumps = np.where(lag >= 0, cp.sizes * -np.expm1(-gamma * np.maximum(lag, 0.0)), 0.0).sum(axis=-1)
    drift = cp.drift * (t + np.expm1(-gamma * t) / gamma)
    out = jumps + drift
    return out[()] if np.ndim(out) == 0 else out


def local_extremum_time(cp: CompoundPoissonPath, gamma: float, k: int) -> float | None:
    """Interior critical point of ``X^{gamma,eta}`` after the ``k``-th jump (0-based).

    On ``(tau_k, tau_{k+1})`` the derivative is
    ``mu_a + exp(-gamma t) (gamma S_k - mu_a)`` with
    ``S_k = sum_{j <= k} J_j exp(gamma tau_j)``; it is monotone, so there is at
    most one zero, at ``t* = log(1 - gamma S_k / mu_a) / gamma``. Returns
    ``None`` when ``mu_a == 0`` or the zero is not inside the interval.
    """
    if not 0 <= k < cp.n_jumps:
        raise IndexError(f"jump index {k} out of range for {cp.n_jumps} jumps")
    mu = cp.drift
    if mu == 0 or gamma <= 0:
        return None
    tau = cp.times
    # S_k = exp(gamma tau_k) R_k, scaled to stay finite
    r = float(np.sum(cp.sizes[: k + 1] * np.exp(-gamma * (tau[k] - tau[: k + 1]))))
    q = -r / mu
    if q <= 0:
        return None
    # log(1 + gamma q exp(gamma tau_k)) = gamma tau_k + log(exp(-gamma tau_k) + gamma q)
    t_star = tau[k] + float(np.logaddexp(-gamma * tau[k], math.log(gamma * q))) / gamma
    upper = tau[k + 1] if k + 1 < cp.n_jumps else cp.horizon
    if tau[k] < t_star < upper:
        return t_star
    return None
