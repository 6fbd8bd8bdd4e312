"""Command-line experiments.

Configuration is a flat ``key=value`` text file (``#`` starts a comment).
Every CSV written here starts with ``# key=value`` lines holding the full
configuration, so any output file can be passed back as ``--config`` to
reproduce it. Floats are written with ``repr`` and results are aggregated in
path-index order, so output bytes do not depend on ``--workers``.

Subcommands and their CSV columns:

``sample-paths``
    one file per path and coordinate, ``t,left,right,kind``
``m1-sweep``
    ``gamma,median,q25,q75,mean``; with ``T_max`` set the whole-line
    distance is used, with ``quad_nodes`` Gauss-Legendre nodes per panel
``tightness-probe``
    ``gamma,delta,q50,q90,q99,max,exceed_fraction``
``fpt``
    ``eps,gamma,n_paths,n_censored,censored_fraction,ks,ks_reference,flag``
``cf-check``
    ``gamma,analytic_re,analytic_im,analytic_dist,mc_re,mc_im,mc_diff``
``decompose-demo``
    ``path_index,k,tau,J,t_star,t_brute,diff``
"""
from __future__ import annotations

import argparse
import dataclasses
import io
import logging
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from ._parallel import default_workers, ordered_map
from .cadlag_paths import CadlagPath, m1_distance, m1_oscillation_sup, m1_whole_line_distance, write_path_csv
from .fpt_stats import (
    CfCheckSpec,
    brownian_fpt_cdf,
    cf_convergence_analytic,
    cf_convergence_montecarlo,
    fpt_scaling_experiment,
    ks_statistic,
    two_sample_ks,
)
from .levy_core import (
    CompoundPoissonPath,
    FiniteJumps,
    LevyDecomposition,
    StableParams,
    decompose,
    path_rng,
    sample_compound_poisson_path,
)
from .ou_dynamics import (
    DriverPath,
    GridSpec,
    LangevinSpec,
    integrated_ou_cp_exact,
    jump_driver,
    levy_driver,
    local_extremum_time,
    simulate_large_friction,
    simulate_vx,
    stable_driver,
)

__all__ = ["ExperimentConfig", "ConfigError", "load_config", "parse_config", "build_parser", "main", "run"]

log = logging.getLogger(__name__)

SUBCOMMANDS = ("sample-paths", "m1-sweep", "tightness-probe", "fpt", "cf-check", "decompose-demo")
LAWS = ("stable", "brownian", "finite_jumps", "deterministic_jumps")


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    subcommand: str | None = None
    # law
    law: str = "stable"
    alpha: float | None = None
    beta: float | None = None
    scale_c: float | None = None
    c_minus: float | None = None
    c_plus: float | None = None
    sigma: float | None = None
    mu: float | None = None
    jump_sizes: tuple[float, ...] | None = None
    jump_rates: tuple[float, ...] | None = None
    jump_times: tuple[float, ...] | None = None
    jump_threshold_a: float | None = None
    # dynamics
    friction_A: float = 1.0
    eps: float | None = None
    gamma: float | None = None
    v0: float = 0.0
    x0: float = 0.0
    horizon_T: float = 1.0
    # numerics
    grid_steps: int = 1000
    mesh: int = 1000
    quad_nodes: int = 500
    T_max: float | None = None
    m1_start_time: float = 0.0
    # statistics
    n_paths: int = 100
    eps_list: tuple[float, ...] | None = None
    gamma_list: tuple[float, ...] | None = None
    level_a: float = 1.0
    delta_list: tuple[float, ...] | None = None
    threshold_Delta: float = 0.25
    cf_times: tuple[float, ...] | None = None
    cf_weights: tuple[float, ...] | None = None
    seed: int = 0

    def to_lines(self) -> list[str]:
        """``key=value`` lines for every field that is set, in field order."""
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if isinstance(v, tuple):
                text = ",".join(repr(float(x)) for x in v)
            elif isinstance(v, float):
                text = repr(v)
            else:
                text = str(v)
            out.append(f"{f.name}={text}")
        return out

    def replace(self, **changes) -> ExperimentConfig:
        return dataclasses.replace(self, **changes)


def _field_kinds() -> dict[str, str]:
    kinds = {}
    for f in fields(ExperimentConfig):
        t = str(f.type)
        if "tuple" in t:
            kinds[f.name] = "list"
        elif "int" in t:
            kinds[f.name] = "int"
        elif "float" in t:
            kinds[f.name] = "float"
        else:
            kinds[f.name] = "str"
    return kinds


_KINDS = _field_kinds()


def _convert(key: str, text: str):
    kind = _KINDS[key]
    try:
        if kind == "list":
            items = [s for s in (p.strip() for p in text.split(",")) if s]
            return tuple(float(s) for s in items)
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r} as {kind}") from None
    return text


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse ``key=value`` lines.

    Commented ``# key=value`` lines with a known key are read too, which lets
    a result CSV serve as its own config. Parsing stops at the first plain
    line without ``=`` (a CSV header).
    """
    values: dict = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        commented = line.startswith("#")
        body = line.lstrip("#").strip()
        if "=" not in body:
            if commented:
                continue
            break
        key, val = (s.strip() for s in body.split("=", 1))
        if key not in _KINDS:
            if commented:
                continue
            raise ConfigError(f"{source}:{n}: unknown key {key!r}")
        values[key] = _convert(key, val)
    return ExperimentConfig(**values)


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    return parse_config(text, str(path))


# --------------------------------------------------------------------------
# Validation
# --------------------------------------------------------------------------


def _need(cfg, *keys):
    missing = [k for k in keys if getattr(cfg, k) is None]
    if missing:
        raise ConfigError(f"{cfg.subcommand}: missing {', '.join(missing)}")


def _positive(cfg, *keys):
    for k in keys:
        v = getattr(cfg, k)
        if v is not None and not v > 0:
            raise ConfigError(f"{k} must be positive, got {v!r}")


def _positive_list(cfg, key):
    v = getattr(cfg, key)
    if v is not None:
        if not v:
            raise ConfigError(f"{key} must not be empty")
        if any(not x > 0 for x in v):
            raise ConfigError(f"{key} entries must be positive")


def validate(cfg: ExperimentConfig) -> None:
    """Check ranges and required keys; raises :class:`ConfigError`."""
    if cfg.subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {cfg.subcommand!r}")
    if cfg.law not in LAWS:
        raise ConfigError(f"law must be one of {', '.join(LAWS)}; got {cfg.law!r}")
    _positive(cfg, "friction_A", "horizon_T", "grid_steps", "mesh", "quad_nodes", "T_max",
              "level_a", "threshold_Delta", "scale_c", "jump_threshold_a")
    if cfg.n_paths < 1:
        raise ConfigError("n_paths must be at least 1")
    if cfg.seed < 0:
        raise ConfigError("seed must be nonnegative")
    for k in ("eps_list", "gamma_list", "delta_list"):
        _positive_list(cfg, k)
    if cfg.eps is not None and cfg.eps < 0:
        raise ConfigError("eps must be nonnegative")
    if cfg.gamma is not None and cfg.gamma < 0:
        raise ConfigError("gamma must be nonnegative")
    if cfg.sigma is not None and cfg.sigma < 0:
        raise ConfigError("sigma must be nonnegative")
    if not 0 <= cfg.m1_start_time < cfg.horizon_T:
        raise ConfigError("m1_start_time must lie in [0, horizon_T)")
    if cfg.jump_threshold_a is not None and cfg.jump_threshold_a > 1:
        raise ConfigError("jump_threshold_a must lie in (0, 1]")
    _validate_law(cfg)

    sub = cfg.subcommand
    if sub == "sample-paths":
        if (cfg.eps is None) == (cfg.gamma is None):
            raise ConfigError("sample-paths: set exactly one of eps and gamma")
    elif sub == "m1-sweep":
        _need(cfg, "gamma_list")
    elif sub == "tightness-probe":
        _need(cfg, "gamma_list", "delta_list")
        if max(cfg.delta_list) > cfg.horizon_T:
            raise ConfigError("delta_list entries must not exceed horizon_T")
    elif sub == "fpt":
        _need(cfg, "eps_list")
        if cfg.law not in ("stable", "brownian"):
            raise ConfigError("fpt: law must be stable or brownian")
        if cfg.law == "brownian" and cfg.sigma not in (None, 1.0):
            raise ConfigError("fpt: the Brownian reference law is standard (sigma=1)")
        if cfg.law == "stable" and (cfg.jump_threshold_a is not None):
            raise ConfigError("fpt: jump_threshold_a is not used for the stable law")
        if cfg.law == "stable" and _stable_params(cfg).beta <= -1:
            raise ConfigError("fpt: beta = -1 is excluded (the supremum may stay bounded)")
    elif sub == "cf-check":
        _need(cfg, "gamma_list", "cf_times", "cf_weights")
        if cfg.law == "deterministic_jumps":
            raise ConfigError("cf-check needs a random law")
        if len(cfg.cf_times) != len(cfg.cf_weights) or not cfg.cf_times:
            raise ConfigError("cf_times and cf_weights must be nonempty and of equal length")
        t = np.asarray(cfg.cf_times)
        if t[0] <= 0 or np.any(np.diff(t) <= 0):
            raise ConfigError("cf_times must be positive and strictly increasing")
    elif sub == "decompose-demo":
        _need(cfg, "gamma")
        if cfg.law in ("stable", "finite_jumps"):
            _need(cfg, "jump_threshold_a")
        elif cfg.law != "deterministic_jumps":
            raise ConfigError("decompose-demo: law must be stable, finite_jumps or deterministic_jumps")


def _validate_law(cfg):
    if cfg.law == "stable":
        if cfg.c_minus is not None or cfg.c_plus is not None:
            _need(cfg, "alpha", "c_minus", "c_plus")
            if cfg.beta is not None or cfg.scale_c is not None:
                raise ConfigError("give either (beta, scale_c) or (c_minus, c_plus), not both")
        else:
            _need(cfg, "alpha")
        try:
            _stable_params(cfg)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    elif cfg.law == "finite_jumps":
        sizes, rates = cfg.jump_sizes or (), cfg.jump_rates or ()
        if len(sizes) != len(rates):
            raise ConfigError("jump_sizes and jump_rates must have equal length")
        try:
            FiniteJumps(np.array(sizes), np.array(rates), cfg.mu or 0.0, cfg.sigma or 0.0)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    elif cfg.law == "deterministic_jumps":
        times, sizes = cfg.jump_times or (), cfg.jump_sizes or ()
        if len(times) != len(sizes):
            raise ConfigError("jump_times and jump_sizes must have equal length")
        try:
            CompoundPoissonPath(np.array(times), np.array(sizes), cfg.mu or 0.0, cfg.horizon_T)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


# --------------------------------------------------------------------------
# Laws and drivers
# --------------------------------------------------------------------------


def _stable_params(cfg) -> StableParams:
    if cfg.c_minus is not None:
        return StableParams.from_levy_measure(cfg.c_minus, cfg.c_plus, cfg.alpha)
    return StableParams(cfg.alpha, 0.0 if cfg.beta is None else cfg.beta, 1.0 if cfg.scale_c is None else cfg.scale_c)


def build_law(cfg):
    """Law object used to build drivers: StableParams, LevyDecomposition or CompoundPoissonPath."""
    if cfg.law == "stable":
        p = _stable_params(cfg)
        if cfg.jump_threshold_a is None:
            return p
        return decompose(p, cfg.jump_threshold_a, cfg.sigma)
    if cfg.law == "brownian":
        sig = 1.0 if cfg.sigma is None else cfg.sigma
        return decompose(FiniteJumps(mu=cfg.mu or 0.0, sigma=sig), 1.0)
    if cfg.law == "finite_jumps":
        fj = FiniteJumps(np.array(cfg.jump_sizes or ()), np.array(cfg.jump_rates or ()),
                         cfg.mu or 0.0, cfg.sigma or 0.0)
        return decompose(fj, 1.0 if cfg.jump_threshold_a is None else cfg.jump_threshold_a)
    return CompoundPoissonPath(np.array(cfg.jump_times or ()), np.array(cfg.jump_sizes or ()),
                               cfg.mu or 0.0, cfg.horizon_T)


def make_driver(law, grid: GridSpec, rng, extra_nodes=()) -> DriverPath:
    if isinstance(law, StableParams):
        return stable_driver(law, grid, rng, extra_nodes)
    if isinstance(law, LevyDecomposition):
        return levy_driver(law, grid, rng, True, extra_nodes)
    if isinstance(law, CompoundPoissonPath):
        return jump_driver(law, grid)
    raise TypeError(f"unsupported law {law!r}")


def _quantiles(x) -> tuple[float, ...]:
    return tuple(float(q) for q in np.quantile(np.asarray(x, dtype=float), [0.25, 0.5, 0.75]))


def _csv(cfg: ExperimentConfig, header: str, rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    for line in cfg.to_lines():
        buf.write(f"# {line}\n")
    buf.write(header + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------


def _sample_one(args):
    cfg, i = args
    law = build_law(cfg)
    grid = GridSpec(cfg.grid_steps, cfg.horizon_T)
    driver = make_driver(law, grid, path_rng(cfg.seed, i))
    spec = LangevinSpec(cfg.friction_A, cfg.horizon_T, eps=cfg.eps, gamma=cfg.gamma, v0=cfg.v0, x0=cfg.x0)
    if cfg.eps is not None:
        v, x = simulate_vx(spec, driver)
    else:
        v, x = simulate_large_friction(spec, driver)
    return driver.to_path(), v, x


def cmd_sample_paths(cfg: ExperimentConfig, out, workers: int = 1) -> list[Path]:
    """Write driver, velocity and displacement CSVs for each path into directory ``out``."""
    if out is None:
        raise ConfigError("sample-paths writes several files; pass --out DIR")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    names = ("l", "v", "x") if cfg.eps is not None else ("L", "V", "X")
    comments = cfg.to_lines()
    written = []
    results = ordered_map(_sample_one, [(cfg, i) for i in range(cfg.n_paths)], workers)
    for i, paths in enumerate(results):
        for name, p in zip(names, paths):
            dest = out / f"path_{i}_{name}.csv"
            write_path_csv(p, dest, comments + [f"path_index={i}", f"coordinate={name}"])
            written.append(dest)
    return written


def _compare_paths(cfg, X: CadlagPath, L: CadlagPath):
    # A(X - x0) - v0 tends to L away from t = 0
    AX = X.affine(cfg.friction_A, -cfg.friction_A * cfg.x0 - cfg.v0)
    t0 = cfg.m1_start_time
    if t0 > 0:
        return AX.window(t0, cfg.horizon_T), L.window(t0, cfg.horizon_T)
    return AX, L


def _m1_one(args):
    cfg, i = args
    law = build_law(cfg)
    grid = GridSpec(cfg.grid_steps, cfg.horizon_T)
    driver = make_driver(law, grid, path_rng(cfg.seed, i))
    L = driver.to_path()
    out = []
    for g in cfg.gamma_list:
        spec = LangevinSpec(cfg.friction_A, cfg.horizon_T, gamma=g, v0=cfg.v0, x0=cfg.x0)
        _, X = simulate_large_friction(spec, driver)
        a, b = _compare_paths(cfg, X, L)
        if cfg.T_max is None:
            out.append(m1_distance(a, b, mesh=cfg.mesh))
        else:
            out.append(m1_whole_line_distance(a, b, cfg.T_max, cfg.quad_nodes, cfg.mesh))
    return out


def m1_sweep_distances(cfg: ExperimentConfig, workers: int = 1) -> np.ndarray:
    """``(n_paths, len(gamma_list))`` array of M1 distances between ``A X^gamma`` and ``L``."""
    jobs = [(cfg, i) for i in range(cfg.n_paths)]
    return np.array(ordered_map(_m1_one, jobs, workers), dtype=float).reshape(cfg.n_paths, -1)


def cmd_m1_sweep(cfg: ExperimentConfig, workers: int = 1) -> str:
    d = m1_sweep_distances(cfg, workers)
    rows = []
    for j, g in enumerate(cfg.gamma_list):
        q25, q50, q75 = _quantiles(d[:, j])
        rows.append((float(g), q50, q25, q75, float(np.mean(d[:, j]))))
    return _csv(cfg, "gamma,median,q25,q75,mean", rows)


def _tight_one(args):
    cfg, i = args
    law = build_law(cfg)
    grid = GridSpec(cfg.grid_steps, cfg.horizon_T)
    driver = make_driver(law, grid, path_rng(cfg.seed, i))
    # one sampling pitch for all deltas keeps the sups nested in delta
    step = min(cfg.delta_list) / 16
    out = []
    for g in cfg.gamma_list:
        spec = LangevinSpec(cfg.friction_A, cfg.horizon_T, gamma=g, v0=cfg.v0, x0=cfg.x0)
        _, X = simulate_large_friction(spec, driver)
        AX = X.affine(cfg.friction_A)
        out.append([m1_oscillation_sup(AX, d, max_step=step) for d in cfg.delta_list])
    return out


def tightness_sups(cfg: ExperimentConfig, workers: int = 1) -> np.ndarray:
    """``(n_paths, len(gamma_list), len(delta_list))`` oscillation sups of ``A X^gamma``."""
    jobs = [(cfg, i) for i in range(cfg.n_paths)]
    return np.array(ordered_map(_tight_one, jobs, workers), dtype=float)


def cmd_tightness_probe(cfg: ExperimentConfig, workers: int = 1) -> str:
    s = tightness_sups(cfg, workers)
    rows = []
    for j, g in enumerate(cfg.gamma_list):
        for k, d in enumerate(cfg.delta_list):
            col = s[:, j, k]
            q = np.quantile(col, [0.5, 0.9, 0.99])
            rows.append((float(g), float(d), *map(float, q), float(col.max()),
                         float(np.mean(col > cfg.threshold_Delta))))
    return _csv(cfg, "gamma,delta,q50,q90,q99,max,exceed_fraction", rows)


def cmd_fpt(cfg: ExperimentConfig, workers: int = 1) -> str:
    if cfg.law == "brownian":
        alpha, beta, c = 2.0, 0.0, 1.0
    else:
        p = _stable_params(cfg)
        alpha, beta, c = p.alpha, p.beta, p.c
    res = fpt_scaling_experiment(alpha, cfg.friction_A, cfg.level_a, cfg.eps_list, cfg.n_paths,
                                 cfg.grid_steps, cfg.horizon_T, cfg.seed, beta, c, workers)
    rows = []
    prev = None
    for eps, s in res:
        if s.n_censored == s.n:
            ks, ref = math.nan, "none"
        elif alpha == 2:
            # A X ~ B, so X passes level a when B passes A a
            level = cfg.friction_A * cfg.level_a
            ks, ref = ks_statistic(s, lambda t: brownian_fpt_cdf(level, 1.0, t)), "brownian_cdf"
        elif prev is not None and prev.n_censored < prev.n:
            ks, ref = two_sample_ks(prev, s), "previous_eps"
        else:
            ks, ref = math.nan, "none"
        flag = "excess_censoring" if s.excess_censoring else "ok"
        rows.append((float(eps), float(s.meta["gamma"]), s.n, s.n_censored, s.censored_fraction, ks, ref, flag))
        prev = s
    return _csv(cfg, "eps,gamma,n_paths,n_censored,censored_fraction,ks,ks_reference,flag", rows)


def cmd_cf_check(cfg: ExperimentConfig, workers: int = 1) -> str:
    law = build_law(cfg)
    rows = []
    for g in cfg.gamma_list:
        spec = CfCheckSpec(cfg.cf_times, cfg.cf_weights, float(g), law, cfg.friction_A)
        an = cf_convergence_analytic(spec, cfg.quad_nodes)
        mc = cf_convergence_montecarlo(spec, cfg.n_paths, cfg.grid_steps, cfg.seed, workers)
        rows.append((float(g), an.real, an.imag, abs(an - 1), mc.real, mc.imag, abs(mc - an)))
    return _csv(cfg, "gamma,analytic_re,analytic_im,analytic_dist,mc_re,mc_im,mc_diff", rows)


def brute_force_extremum(cp: CompoundPoissonPath, gamma: float, k: int, grid: np.ndarray) -> float | None:
    """Interior argmax or argmin of the exact ``X^{gamma,eta}`` on ``grid`` after jump ``k``."""
    lo = cp.times[k]
    hi = cp.times[k + 1] if k + 1 < cp.n_jumps else cp.horizon
    inner = grid[(grid > lo) & (grid < hi)]
    if inner.size == 0:
        return None
    t = np.concatenate([[lo], inner, [hi]])
    x = integrated_ou_cp_exact(cp, gamma, t)
    last = t.size - 1
    # ignore rounding ripples on a saturated plateau
    tol = 64 * np.finfo(float).eps * max(1.0, float(np.max(np.abs(x))))
    hi_idx, lo_idx = int(np.argmax(x)), int(np.argmin(x))
    if 0 < hi_idx < last and x[hi_idx] - max(x[0], x[last]) > tol:
        return float(t[hi_idx])
    if 0 < lo_idx < last and min(x[0], x[last]) - x[lo_idx] > tol:
        return float(t[lo_idx])
    return None


def _demo_one(args):
    cfg, i = args
    law = build_law(cfg)
    if isinstance(law, CompoundPoissonPath):
        cp = law
    else:
        cp = sample_compound_poisson_path(law, cfg.horizon_T, path_rng(cfg.seed, i))
    grid = np.linspace(0.0, cfg.horizon_T, cfg.grid_steps + 1)
    rows = []
    for k in range(cp.n_jumps):
        ts = local_extremum_time(cp, cfg.gamma, k)
        tb = brute_force_extremum(cp, cfg.gamma, k, grid)
        if ts is None and tb is None:
            continue
        ts_v = math.nan if ts is None else ts
        tb_v = math.nan if tb is None else tb
        rows.append((i, k, float(cp.times[k]), float(cp.sizes[k]), ts_v, tb_v, abs(ts_v - tb_v)))
    return rows


def decompose_demo_rows(cfg: ExperimentConfig, workers: int = 1) -> list[tuple]:
    jobs = [(cfg, i) for i in range(cfg.n_paths)]
    return [r for rows in ordered_map(_demo_one, jobs, workers) for r in rows]


def cmd_decompose_demo(cfg: ExperimentConfig, workers: int = 1) -> str:
    law = build_law(cfg)
    rows = decompose_demo_rows(cfg, workers)
    text = _csv(cfg, "path_index,k,tau,J,t_star,t_brute,diff", rows)
    if isinstance(law, LevyDecomposition):
        info = f"# mu_a={law.mu_a!r} beta_a={law.beta_a!r} small_jump_variance={law.small_jump_variance!r}\n"
        head, _, body = text.partition("path_index,")
        text = head + info + "path_index," + body
    return text


_COMMANDS = {
    "m1-sweep": cmd_m1_sweep,
    "tightness-probe": cmd_tightness_probe,
    "fpt": cmd_fpt,
    "cf-check": cmd_cf_check,
    "decompose-demo": cmd_decompose_demo,
}


def run(cfg: ExperimentConfig, out=None, workers: int = 1):
    """Validate ``cfg`` and run it. CSV text goes to ``out`` (a path) or is returned."""
    validate(cfg)
    if cfg.subcommand == "sample-paths":
        return cmd_sample_paths(cfg, out, workers)
    text = _COMMANDS[cfg.subcommand](cfg, workers)
    if out is not None:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write {out}: {exc.strerror or exc}") from exc
    return text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stableou", description="Stable-driven Langevin experiments.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="key=value file (a previous output CSV also works)")
        p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        p.add_argument("--out", default=None, help="output file (directory for sample-paths); default stdout")
        p.add_argument("--workers", type=int, default=default_workers(), help="worker processes")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        cfg = load_config(args.config)
        if cfg.subcommand is not None and cfg.subcommand != args.subcommand:
            log.warning("config subcommand %s overridden by %s", cfg.subcommand, args.subcommand)
        cfg = cfg.replace(subcommand=args.subcommand)
        if args.seed is not None:
            cfg = cfg.replace(seed=args.seed)
        result = run(cfg, args.out, args.workers)
    except (ConfigError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.out is None and isinstance(result, str):
        sys.stdout.write(result)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
