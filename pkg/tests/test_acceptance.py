"""Acceptance checks at their stated tolerances and runtime budgets.

Each check prints one ``PASS``/``FAIL`` line before asserting.
"""

import math
import time

import numpy as np
import pytest

from stableou.cadlag_paths import CadlagPath, completed_graph, discrete_frechet
from stableou.experiments_cli import (
    ExperimentConfig,
    build_law,
    decompose_demo_rows,
    m1_sweep_distances,
    main,
    tightness_sups,
)
from stableou.fpt_stats import (
    CfCheckSpec,
    brownian_fpt_cdf,
    cf_convergence_analytic,
    cf_convergence_montecarlo,
    fpt_scaling_experiment,
    ks_statistic,
    simulate_fpt_samples,
    stable_cdf_table,
    two_sample_ks,
)
from stableou.levy_core import StableParams, char_exponent, empirical_cf, path_rng, sample_stable

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report(capsys):
    def _report(label, ok, detail, elapsed, budget=None):
        within = budget is None or elapsed < budget
        line = f"{'PASS' if ok and within else 'FAIL'} {label}: {detail} ({elapsed:.1f}s"
        line += ")" if budget is None else f" of {budget:.0f}s)"
        with capsys.disabled():
            print("\n" + line)
        assert ok, line
        assert within, line

    return _report


def test_01_stable_sampler_law(report):
    t0 = time.perf_counter()
    p = StableParams(1.5, 0.0)
    x = sample_stable(p, 1.0, 100_000, rng=path_rng(2024, 1))
    ks = ks_statistic(x, stable_cdf_table(p, -60.0, 60.0, 2401))
    report("1 stable sampler KS", ks < 0.01, f"KS={ks:.5f} < 0.01", time.perf_counter() - t0, 30)


def test_02_cf_identity(report):
    t0 = time.perf_counter()
    n = 100_000
    u = np.array([-3.0, -1.5, -0.7, -0.2, 0.3, 0.9, 1.6, 2.5])
    worst = 0.0
    for i, (alpha, beta) in enumerate([(0.8, 0.0), (1.5, 0.0), (1.5, 0.5), (1.0, 0.0)]):
        p = StableParams(alpha, beta)
        x = sample_stable(p, 1.0, n, rng=path_rng(2024, 2, i))
        worst = max(worst, float(np.max(np.abs(empirical_cf(x, u) - np.exp(char_exponent(p, u))))))
    tol = 4 / math.sqrt(n)
    report("2 CF identity", worst < tol, f"max|ECF-exp(Psi)|={worst:.5f} < {tol:.5f}", time.perf_counter() - t0, 60)


def test_03_fdd_convergence(report):
    t0 = time.perf_counter()
    p = StableParams(1.5)
    specs = {"m=1": ([1.0], [1.0]), "m=2": ([0.5, 1.0], [1.0, -1.0])}
    ok, parts = True, []
    for name, (times, weights) in specs.items():
        d = [abs(cf_convergence_analytic(CfCheckSpec(times, weights, g, p)) - 1) for g in (10.0, 1e2, 1e3, 1e4)]
        dec = all(a > b for a, b in zip(d, d[1:]))
        spec = CfCheckSpec(times, weights, 100.0, p)
        an = cf_convergence_analytic(spec)
        mc = cf_convergence_montecarlo(spec, 10_000, 200, seed=2024)
        gap = abs(mc - an)
        tol = 3 / math.sqrt(10_000)
        ok &= dec and gap < tol
        parts.append(f"{name} decreasing={dec} |MC-analytic|={gap:.4f} < {tol:.2f}")
    report("3 fdd convergence", ok, "; ".join(parts), time.perf_counter() - t0, 120)


def _brute_m1(p1, p2):
    """Exhaustive search over monotone couplings of the completed-graph vertices."""
    g1, g2 = completed_graph(p1), completed_graph(p2)
    z1, t1, z2, t2 = g1.z, g1.t, g2.z, g2.t
    n, m = len(z1), len(z2)
    best = math.inf

    def walk(i, j, cur):
        nonlocal best
        cur = max(cur, abs(z1[i] - z2[j]), abs(t1[i] - t2[j]))
        if cur >= best:
            return
        if i == n - 1 and j == m - 1:
            best = cur
            return
        if i < n - 1:
            walk(i + 1, j, cur)
        if j < m - 1:
            walk(i, j + 1, cur)
        if i < n - 1 and j < m - 1:
            walk(i + 1, j + 1, cur)

    walk(0, 0, 0.0)
    return best


def _random_path(rng):
    n = int(rng.integers(1, 4))
    times = np.concatenate([[0.0], np.sort(rng.uniform(0.05, 0.95, n - 1)), [1.0]])
    times = np.unique(times)
    vals = rng.normal(size=times.size)
    if rng.random() < 0.5:
        return CadlagPath.continuous(times, vals)
    left = vals.copy()
    left[1:-1] += rng.normal(size=times.size - 2)
    return CadlagPath(times, left, vals, 1.0)


def test_04_m1_oracle(report):
    t0 = time.perf_counter()
    rng = path_rng(2024, 4)
    worst, done = 0.0, 0
    while done < 200:
        p1, p2 = _random_path(rng), _random_path(rng)
        if max(len(completed_graph(p)) for p in (p1, p2)) > 5:
            continue
        dp = discrete_frechet(completed_graph(p1), completed_graph(p2))
        worst = max(worst, abs(dp - _brute_m1(p1, p2)))
        done += 1
    report("4 M1 oracle", worst < 1e-9, f"max|DP-brute|={worst:.2e} over 200 pairs", time.perf_counter() - t0, 60)


def test_05_m1_convergence(report):
    t0 = time.perf_counter()
    cfg = ExperimentConfig(subcommand="m1-sweep", alpha=1.5, gamma_list=(10.0, 100.0), horizon_T=1.0,
                           n_paths=100, grid_steps=2000, mesh=1000, seed=2024)
    d = m1_sweep_distances(cfg)
    q25_10, med_10 = np.quantile(d[:, 0], [0.25, 0.5])
    med_100 = float(np.median(d[:, 1]))
    ok = med_100 < med_10 and med_100 < q25_10
    report("5 M1 convergence", ok,
           f"median(100)={med_100:.4f} < median(10)={med_10:.4f}, q25(10)={q25_10:.4f}",
           time.perf_counter() - t0, 300)


def test_06_brownian_fpt(report):
    t0 = time.perf_counter()
    quad = float(brownian_fpt_cdf(1.0, 1.0, 1.0))
    law = build_law(ExperimentConfig(subcommand="fpt", law="brownian"))
    eps = 0.05
    s = simulate_fpt_samples(law, eps ** -2, 1.0, 1.0, n_paths=10_000, n_steps=10_000, horizon=10.0, seed=2024)
    ks = ks_statistic(s, lambda t: brownian_fpt_cdf(1.0, 1.0, t))
    ok = ks < 0.05 and abs(quad - 0.3173) < 1e-3
    report("6 Brownian FPT", ok, f"KS={ks:.4f} < 0.05, F(1)={quad:.5f} vs 0.3173", time.perf_counter() - t0, 300)


def test_07_stable_fpt_stability(report):
    t0 = time.perf_counter()
    res = fpt_scaling_experiment(1.5, 1.0, 1.0, [0.1, 0.05], n_paths=10_000, n_steps=5000, horizon=10.0, seed=2024)
    ks = two_sample_ks(res[0][1], res[1][1])
    report("7 stable FPT stability", ks < 0.05, f"two-sample KS={ks:.4f} < 0.05", time.perf_counter() - t0, 300)


EXTREMA_CFG = ExperimentConfig(subcommand="decompose-demo", alpha=1.5, beta=0.8, jump_threshold_a=0.3,
                               gamma=100.0, horizon_T=1.0, n_paths=100, grid_steps=20_000, seed=2024)


def test_08a_extrema_match_brute_force(report):
    t0 = time.perf_counter()
    law = build_law(EXTREMA_CFG)
    rows = decompose_demo_rows(EXTREMA_CFG)
    h = EXTREMA_CFG.horizon_T / EXTREMA_CFG.grid_steps
    predicted = [r for r in rows if not math.isnan(r[4])]
    worst = max((r[6] for r in predicted), default=0.0)
    ok = law.mu_a != 0 and len(predicted) > 0 and all(r[6] <= 2 * h for r in predicted)
    report("8a extrema vs brute force", ok,
           f"mu_a={law.mu_a:.4f}, {len(predicted)} predictions, max diff={worst:.2e} <= {2 * h:.0e}",
           time.perf_counter() - t0, 60)


def test_08b_no_extremum_when_ratio_nonpositive(report):
    t0 = time.perf_counter()
    law = build_law(EXTREMA_CFG)
    rows = decompose_demo_rows(EXTREMA_CFG)
    bad = [r for r in rows if not math.isnan(r[4]) and r[3] / law.mu_a <= 0]
    report("8b no extremum when J_k/mu_a <= 0", not bad,
           f"{len(bad)} predictions with J_k/mu_a <= 0", time.perf_counter() - t0, 60)


def test_09_tightness_probe(report):
    t0 = time.perf_counter()
    deltas = (0.1, 0.05, 0.01)
    cfg = ExperimentConfig(subcommand="tightness-probe", alpha=1.5, gamma_list=(100.0,), delta_list=deltas,
                           threshold_Delta=0.25, n_paths=200, grid_steps=2000, seed=2024)
    s = tightness_sups(cfg)[:, 0, :]
    frac = [float(np.mean(s[:, k] > cfg.threshold_Delta)) for k in range(len(deltas))]
    ok = all(a >= b for a, b in zip(frac, frac[1:]))
    report("9 tightness probe", ok, "exceedance " + ", ".join(f"{d}:{f:.3f}" for d, f in zip(deltas, frac)),
           time.perf_counter() - t0, 300)


DETERMINISM_CONFIGS = {
    "sample-paths": "alpha=1.5\ngamma=50\nn_paths=8\ngrid_steps=100\nseed=7\n",
    "m1-sweep": "alpha=1.5\ngamma_list=10,100\nn_paths=8\ngrid_steps=200\nmesh=200\nseed=7\n",
    "tightness-probe": "alpha=1.5\ngamma_list=100\ndelta_list=0.1,0.05\nn_paths=8\ngrid_steps=200\nseed=7\n",
    "fpt": "alpha=1.5\neps_list=0.3,0.2\nn_paths=16\ngrid_steps=200\nhorizon_T=2\nseed=7\n",
    "cf-check": "alpha=1.5\ngamma_list=10,100\ncf_times=0.5,1\ncf_weights=1,-1\nn_paths=16\ngrid_steps=50\nseed=7\n",
    "decompose-demo": "alpha=1.5\nbeta=0.8\njump_threshold_a=0.3\ngamma=100\nn_paths=8\ngrid_steps=2000\nseed=7\n",
}


def test_10_determinism(report, tmp_path):
    t0 = time.perf_counter()
    differing = []
    for sub, text in DETERMINISM_CONFIGS.items():
        cfg = tmp_path / f"{sub}.cfg"
        cfg.write_text(text)
        outs = []
        for w in ("1", "8"):
            dest = tmp_path / f"{sub}-{w}" if sub == "sample-paths" else tmp_path / f"{sub}-{w}.csv"
            assert main([sub, "--config", str(cfg), "--out", str(dest), "--workers", w]) == 0
            if dest.is_dir():
                outs.append([(f.name, f.read_bytes()) for f in sorted(dest.iterdir())])
            else:
                outs.append(dest.read_bytes())
        if outs[0] != outs[1]:
            differing.append(sub)
    report("10 determinism", not differing,
           f"{len(DETERMINISM_CONFIGS)} subcommands, differing: {differing or 'none'}", time.perf_counter() - t0)
