"""Càdlàg paths on ``[0, T]`` and functionals on them.

A path is stored by its breakpoints: at every node ``t_i`` both the left
limit ``x(t_i-)`` and the value ``x(t_i)`` are kept. Between consecutive nodes
the path is linear from ``right[i]`` to ``left[i + 1]``; a step path is the
special case ``left[i + 1] == right[i]``. After the last node the path is
constant up to the horizon.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np
from numba import njit
from scipy.special import roots_legendre

__all__ = [
    "CadlagPath",
    "CompletedGraphPolyline",
    "completed_graph",
    "refine_polyline",
    "discrete_frechet",
    "m1_distance",
    "m1_whole_line_distance",
    "uniform_distance",
    "oscillation_M",
    "m1_oscillation_sup",
    "running_supremum",
    "first_passage",
    "write_path_csv",
    "read_path_csv",
]

INTERPOLATIONS = ("linear", "step")


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CadlagPath:
    times: np.ndarray
    left: np.ndarray
    right: np.ndarray
    horizon: float
    interpolation: str = "linear"

    def __post_init__(self):
        for name in ("times", "left", "right"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        t = self.times
        if t.ndim != 1 or t.size == 0:
            raise ValueError("a path needs at least one breakpoint")
        if self.left.shape != t.shape or self.right.shape != t.shape:
            raise ValueError("times, left and right must have equal length")
        if t[0] != 0.0:
            raise ValueError("the first breakpoint must be t = 0")
        if np.any(np.diff(t) <= 0):
            raise ValueError("breakpoint times must be strictly increasing")
        if t[-1] > self.horizon:
            raise ValueError("breakpoints must lie in [0, horizon]")
        if self.left[0] != self.right[0]:
            raise ValueError("no jump is allowed at t = 0")
        if self.interpolation not in INTERPOLATIONS:
            raise ValueError(f"interpolation must be one of {INTERPOLATIONS}")
        if self.interpolation == "step" and np.any(self.left[1:] != self.right[:-1]):
            raise ValueError("a step path must be constant between breakpoints")

    # -- constructors ---------------------------------------------------
    @classmethod
    def continuous(cls, times, values, horizon: float | None = None) -> CadlagPath:
        """Piecewise-linear continuous path through ``(times, values)``."""
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        return cls(times, values, values, float(times[-1]) if horizon is None else horizon)

    @classmethod
    def step(cls, times, values, horizon: float) -> CadlagPath:
        """Right-continuous step path equal to ``values[i]`` on ``[times[i], times[i+1])``."""
        values = np.asarray(values, dtype=float)
        left = np.concatenate([values[:1], values[:-1]])
        return cls(times, left, values, horizon, "step")

    # -- evaluation -----------------------------------------------------
    def __call__(self, t):
        """Right-continuous evaluation."""
        t = np.asarray(t, dtype=float)
        self._check_domain(t)
        i = np.searchsorted(self.times, t, side="right") - 1
        return self._interp(i, t)

    def left_limit(self, t):
        t = np.asarray(t, dtype=float)
        self._check_domain(t)
        i = np.searchsorted(self.times, t, side="right") - 1
        out = np.asarray(self._interp(i, t), dtype=float)
        at_node = self.times[i] == t
        out = np.where(at_node, self.left[i], out)
        return out[()] if out.ndim == 0 else out

    def _check_domain(self, t):
        if np.any(t < 0) or np.any(t > self.horizon):
            raise ValueError("evaluation time outside [0, horizon]")

    def _interp(self, i, t):
        n = self.times.size
        nxt = np.minimum(i + 1, n - 1)
        t0, t1 = self.times[i], self.times[nxt]
        r0, l1 = self.right[i], self.left[nxt]
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(nxt > i, (t - t0) / np.where(nxt > i, t1 - t0, 1.0), 0.0)
        out = r0 + w * (l1 - r0)
        return out[()] if np.ndim(out) == 0 else out

    # -- structure ------------------------------------------------------
    @property
    def jump_mask(self) -> np.ndarray:
        return self.left != self.right

    @property
    def jump_times(self) -> np.ndarray:
        return self.times[self.jump_mask]

    def restrict(self, T: float) -> CadlagPath:
        """Path on ``[0, T]``; a ``T`` past the horizon extends the last value."""
        if not T > 0:
            raise ValueError("T must be positive")
        if T >= self.times[-1]:
            return CadlagPath(self.times, self.left, self.right, T, self.interpolation)
        k = int(np.searchsorted(self.times, T, side="right"))  # nodes <= T
        times, left, right = self.times[:k], self.left[:k], self.right[:k]
        if times[-1] < T:
            end = float(self(T))
            times = np.append(times, T)
            left = np.append(left, end)
            right = np.append(right, end)
        return CadlagPath(times, left, right, T, self.interpolation)

    def window(self, t0: float, t1: float) -> CadlagPath:
        """Path ``s -> x(t0 + s)`` on ``[0, t1 - t0]``."""
        if not 0 <= t0 < t1 <= self.horizon:
            raise ValueError("need 0 <= t0 < t1 <= horizon")
        p = self.restrict(t1) if t1 < self.horizon else self
        k = int(np.searchsorted(p.times, t0, side="right"))
        start = float(p(t0))
        times = np.concatenate([[t0], p.times[k:]]) - t0
        left = np.concatenate([[start], p.left[k:]])
        right = np.concatenate([[start], p.right[k:]])
        return CadlagPath(times, left, right, t1 - t0, p.interpolation)

    def affine(self, scale: float = 1.0, shift: float = 0.0) -> CadlagPath:
        """Path ``scale * x + shift``."""
        return CadlagPath(
            self.times, scale * self.left + shift, scale * self.right + shift,
            self.horizon, self.interpolation,
        )


@dataclass(frozen=True, eq=False)
class CompletedGraphPolyline:
    """Vertices ``(z, t)`` of the completed graph in graph order."""

    z: np.ndarray
    t: np.ndarray

    @property
    def vertices(self) -> np.ndarray:
        return np.column_stack([self.z, self.t])

    def __len__(self):
        return self.z.size


def completed_graph(p: CadlagPath) -> CompletedGraphPolyline:
    """Polyline through the graph of ``p`` with vertical segments at jumps.

    Continuity points give one vertex, jumps give ``(x(t-), t), (x(t), t)``.
    """
    jump = p.jump_mask
    reps = np.where(jump, 2, 1)
    t = np.repeat(p.times, reps)
    z = np.empty(t.size)
    ends = np.cumsum(reps) - 1
    z[ends] = p.right
    z[ends[jump] - 1] = p.left[jump]
    if p.times[-1] < p.horizon:
        t = np.append(t, p.horizon)
        z = np.append(z, p.right[-1])
    return CompletedGraphPolyline(_frozen(z), _frozen(t))


def refine_polyline(g: CompletedGraphPolyline, pitch: float) -> CompletedGraphPolyline:
    """Subdivide so every segment has sup-norm length at most ``pitch``."""
    if not pitch > 0:
        raise ValueError("pitch must be positive")
    if len(g) < 2:
        return g
    dz, dt = np.diff(g.z), np.diff(g.t)
    pieces = np.maximum(1, np.ceil(np.maximum(np.abs(dz), dt) / pitch).astype(np.int64))
    seg = np.repeat(np.arange(pieces.size), pieces)
    start = np.repeat(np.cumsum(pieces) - pieces, pieces)
    frac = (np.arange(seg.size) - start) / pieces[seg]
    z = np.append(g.z[seg] + frac * dz[seg], g.z[-1])
    t = np.append(g.t[seg] + frac * dt[seg], g.t[-1])
    return CompletedGraphPolyline(_frozen(z), _frozen(t))


@njit(cache=True)
def _greedy_bound(z1, t1, z2, t2):
    # cost of the coupling that advances in time order; an upper bound
    n, m = z1.size, z2.size
    i = j = 0
    ub = max(abs(z1[0] - z2[0]), abs(t1[0] - t2[0]))
    while i < n - 1 or j < m - 1:
        if i == n - 1:
            j += 1
        elif j == m - 1:
            i += 1
        elif t1[i + 1] < t2[j + 1]:
            i += 1
        elif t2[j + 1] < t1[i + 1]:
            j += 1
        else:
            i += 1
            j += 1
        d = max(abs(z1[i] - z2[j]), abs(t1[i] - t2[j]))
        if d > ub:
            ub = d
    return ub


@njit(cache=True)
def _frechet_banded(z1, t1, z2, t2, bound):
    # Discrete Fréchet DP restricted to pairs with |t1 - t2| <= bound.
    # Exact whenever the answer is <= bound; t1, t2 must be nondecreasing.
    n, m = z1.size, z2.size
    prev = np.full(m, np.inf)
    cur = np.full(m, np.inf)
    lo = 0
    hi = -1
    plo = 0
    phi = -1
    for i in range(n):
        while lo < m and t2[lo] < t1[i] - bound:
            lo += 1
        if hi < lo - 1:
            hi = lo - 1
        while hi + 1 < m and t2[hi + 1] <= t1[i] + bound:
            hi += 1
        for j in range(lo, hi + 1):
            d = max(abs(z1[i] - z2[j]), abs(t1[i] - t2[j]))
            if i == 0 and j == 0:
                cur[j] = d
                continue
            best = np.inf
            if i > 0:
                if prev[j] < best:
                    best = prev[j]
                if j > 0 and prev[j - 1] < best:
                    best = prev[j - 1]
            if j > 0 and cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = d if d > best else best
        for j in range(plo, phi + 1):
            prev[j] = np.inf
        prev, cur = cur, prev
        plo = lo
        phi = hi
    return prev[m - 1]


def discrete_frechet(g1: CompletedGraphPolyline, g2: CompletedGraphPolyline) -> float:
    """Discrete Fréchet distance under ``max(|dz|, |dt|)``.

    Minimum over monotone couplings of the two vertex sequences. A coupling
    never needs a pair farther apart in time than the distance itself, so the
    DP is restricted to a time band set by a cheap upper bound.
    """
    if len(g1) == 0 or len(g2) == 0:
        raise ValueError("polylines must not be empty")
    args = (np.ascontiguousarray(g1.z), np.ascontiguousarray(g1.t),
            np.ascontiguousarray(g2.z), np.ascontiguousarray(g2.t))
    ub = _greedy_bound(*args)
    d = _frechet_banded(*args, ub * (1 + 1e-12) + 1e-300)
    if not d <= ub:
        d = _frechet_banded(*args, np.inf)
    return float(d)


def _common_T(p1: CadlagPath, p2: CadlagPath, T: float | None) -> float:
    if T is None:
        if p1.horizon != p2.horizon:
            raise ValueError(f"mismatched horizons {p1.horizon} and {p2.horizon}")
        return p1.horizon
    if T > min(p1.horizon, p2.horizon):
        raise ValueError("T exceeds a path horizon")
    return T


def m1_distance(p1: CadlagPath, p2: CadlagPath, T: float | None = None, mesh: int | None = 1000) -> float:
    """Skorokhod M1 distance on ``[0, T]``.

    Both completed graphs are refined to segments of length at most
    ``1/mesh`` and matched by the discrete Fréchet DP. The result overshoots
    the true infimum by at most ``1/mesh``. ``mesh=None`` uses the raw
    vertices of the completed graphs.
    """
    T = _common_T(p1, p2, T)
    g1 = completed_graph(p1.restrict(T))
    g2 = completed_graph(p2.restrict(T))
    if mesh is not None:
        if mesh <= 0:
            raise ValueError("mesh must be a positive integer")
        g1 = refine_polyline(g1, 1.0 / mesh)
        g2 = refine_polyline(g2, 1.0 / mesh)
    return discrete_frechet(g1, g2)


def uniform_distance(p1: CadlagPath, p2: CadlagPath, T: float | None = None) -> float:
    """``sup_{t <= T} |x1(t) - x2(t)|``."""
    T = _common_T(p1, p2, T)
    q1, q2 = p1.restrict(T), p2.restrict(T)
    t = np.union1d(q1.times, q2.times)
    t = np.union1d(t, [T])
    d_right = np.abs(q1(t) - q2(t))
    d_left = np.abs(q1.left_limit(t) - q2.left_limit(t))
    return float(max(d_right.max(), d_left.max()))


def m1_whole_line_distance(
    p1: CadlagPath,
    p2: CadlagPath,
    T_max: float = 10.0,
    quad_nodes: int = 64,
    mesh: int | None = 1000,
) -> float:
    """``int_0^T_max exp(-T) min(1, d_M1,T) dT``; the neglected tail is below ``exp(-T_max)``.

    Paths shorter than ``T_max`` are continued by their last value. The
    integrand may jump at breakpoints, so the range is split there and each
    panel gets Gauss-Legendre nodes in proportion to its length.
    """
    if not T_max > 0:
        raise ValueError("T_max must be positive")
    q1 = p1.restrict(T_max) if T_max != p1.horizon else p1
    q2 = p2.restrict(T_max) if T_max != p2.horizon else p2
    edges = np.union1d(np.union1d(q1.times, q2.times), [T_max])
    edges = edges[edges > 0]
    edges = np.concatenate([[0.0], edges])
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        k = max(2, int(math.ceil(quad_nodes * (b - a) / T_max)))
        x, w = roots_legendre(k)
        nodes = 0.5 * (b - a) * (x + 1) + a
        vals = [
            math.exp(-T) * min(1.0, m1_distance(q1, q2, T, mesh)) for T in nodes
        ]
        total += 0.5 * (b - a) * float(np.dot(w, vals))
    return total


def oscillation_M(x1, x, x2):
    """Distance from ``x`` to the segment between ``x1`` and ``x2``."""
    x1, x, x2 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x1, x, x2)))
    lo, hi = np.minimum(x1, x2), np.maximum(x1, x2)
    out = np.maximum(0.0, np.maximum(lo - x, x - hi))
    return out[()] if out.ndim == 0 else out


@njit(cache=True)
def _oscillation_sup(t, x, delta):
    # For a middle index k the best pair (i, j) minimises max(x_i, x_j) (point
    # above the segment) or maximises min(x_i, x_j) (point below). For fixed j
    # the admissible i form [lo(j), k-1] with lo(j) nondecreasing in j.
    n = x.size
    best = 0.0
    smin = np.empty(n)
    smax = np.empty(n)
    for k in range(1, n - 1):
        if t[k + 1] - t[k - 1] > delta:
            continue
        lo = k - 1
        while lo > 0 and t[k + 1] - t[lo - 1] <= delta:
            lo -= 1
        mn = np.inf
        mx = -np.inf
        for i in range(k - 1, lo - 1, -1):
            if x[i] < mn:
                mn = x[i]
            if x[i] > mx:
                mx = x[i]
            smin[i] = mn
            smax[i] = mx
        up = np.inf
        dn = -np.inf
        j = k + 1
        while j < n and t[j] - t[k - 1] <= delta:
            while t[j] - t[lo] > delta:
                lo += 1
            hi_pair = max(x[j], smin[lo])
            lo_pair = min(x[j], smax[lo])
            if hi_pair < up:
                up = hi_pair
            if lo_pair > dn:
                dn = lo_pair
            j += 1
        v = max(x[k] - up, dn - x[k])
        if v > best:
            best = v
    return best


def _samples(p: CadlagPath, max_step: float | None):
    # (t, value) sequence in graph order; left limits precede values at jumps
    g = completed_graph(p)
    t, x = g.t, g.z
    if max_step is not None:
        dt = np.diff(t)
        pieces = np.maximum(1, np.ceil(dt / max_step).astype(np.int64))
        pieces[dt == 0] = 1
        seg = np.repeat(np.arange(pieces.size), pieces)
        start = np.repeat(np.cumsum(pieces) - pieces, pieces)
        frac = (np.arange(seg.size) - start) / pieces[seg]
        x = np.append(x[seg] + frac * np.diff(x)[seg], x[-1])
        t = np.append(t[seg] + frac * dt[seg], t[-1])
    return np.ascontiguousarray(t), np.ascontiguousarray(x)


def m1_oscillation_sup(p: CadlagPath, delta: float, T: float | None = None, max_step: float | None = "auto") -> float:
    """``sup M(x(t1), x(t), x(t2))`` over ``t1 < t < t2 <= T``, ``t2 - t1 <= delta``.

    The supremum is taken over breakpoints and left limits, with linear
    segments subdivided to spacing ``max_step`` (default ``delta / 16``).
    """
    T = p.horizon if T is None else T
    if not 0 < delta:
        raise ValueError("delta must be positive")
    if delta > T:
        raise ValueError("delta must not exceed T")
    if max_step == "auto":
        max_step = delta / 16
    q = p.restrict(T) if T != p.horizon else p
    t, x = _samples(q, max_step)
    return float(_oscillation_sup(t, x, delta))


def running_supremum(p: CadlagPath) -> CadlagPath:
    """``S(t) = sup_{s <= t} x(s)`` as a path of the same kind."""
    times, left, right = [], [], []
    m = -np.inf
    n = p.times.size
    for i in range(n):
        t = p.times[i]
        s_left = max(m, p.left[i]) if i else p.right[0]
        m = max(s_left, p.right[i])
        times.append(t)
        left.append(s_left)
        right.append(m)
        if i + 1 < n:
            r, l1, t1 = p.right[i], p.left[i + 1], p.times[i + 1]
            if l1 > m and r < m:
                # the segment climbs past the running max inside (t, t1)
                tc = t + (m - r) / (l1 - r) * (t1 - t)
                if t < tc < t1:
                    times.append(tc)
                    left.append(m)
                    right.append(m)
            if l1 > m:
                m = l1
    return CadlagPath(np.array(times), np.array(left), np.array(right), p.horizon, p.interpolation)


def first_passage(p: CadlagPath, a: float) -> float | None:
    """``inf{t >= 0 : x(t) > a}``, or ``None`` if the level is never exceeded."""
    over_node = p.right > a
    n = p.times.size
    r = p.right[:-1]
    l1 = p.left[1:]
    over_seg = (l1 > a) & ~over_node[:-1]
    idx_node = np.flatnonzero(over_node)
    idx_seg = np.flatnonzero(over_seg)
    first_node = idx_node[0] if idx_node.size else n
    first_seg = idx_seg[0] if idx_seg.size else n
    if first_node == n and first_seg == n:
        return None
    if first_node <= first_seg:
        return float(p.times[first_node])
    i = first_seg
    t0, t1 = p.times[i], p.times[i + 1]
    tc = t0 + (a - r[i]) / (l1[i] - r[i]) * (t1 - t0)
    return float(min(max(tc, t0), t1))


# --------------------------------------------------------------------------
# CSV
# --------------------------------------------------------------------------


def write_path_csv(p: CadlagPath, dest, comments: Iterable[str] = ()) -> None:
    """Write ``p`` as ``t,left,right,kind`` rows behind a one-line preamble.

    Extra ``comments`` follow the preamble as further ``#`` lines.
    """
    lines = [f"# horizon={p.horizon!r} interpolation={p.interpolation}"]
    lines += [f"# {c}" for c in comments]
    lines.append("t,left,right,kind")
    kinds = np.where(p.jump_mask, "jump", "node")
    lines += [
        f"{t!r},{l!r},{r!r},{k}"
        for t, l, r, k in zip(p.times.tolist(), p.left.tolist(), p.right.tolist(), kinds)
    ]
    Path(dest).write_text("\n".join(lines) + "\n")


def read_path_csv(src) -> CadlagPath:
    text = Path(src).read_text().splitlines()
    if not text or not text[0].startswith("#"):
        raise ValueError(f"{src}: missing preamble line")
    meta = dict(kv.split("=", 1) for kv in text[0].lstrip("# ").split())
    body = [ln for ln in text[1:] if not ln.startswith("#")]
    if body[0] != "t,left,right,kind":
        raise ValueError(f"{src}: unexpected header {body[0]!r}")
    rows = [ln.split(",") for ln in body[1:] if ln]
    t = np.array([float(r[0]) for r in rows])
    left = np.array([float(r[1]) for r in rows])
    right = np.array([float(r[2]) for r in rows])
    return CadlagPath(t, left, right, float(meta["horizon"]), meta["interpolation"])
