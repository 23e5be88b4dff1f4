"""End-to-end acceptance checks; each prints a PASS/FAIL line in the run summary."""

import itertools
import math
import time

import numpy as np
import pytest

from ising_rc.cli import ExperimentConfig, ScheduleConfig, dump_config, main, run_fit, run_scan
from ising_rc.cli.config import preset
from ising_rc.cli.output import STAT_COLUMNS, write_csv
from ising_rc.cli.tilt import run_tilt_experiment
from ising_rc.cli.verify import (
    check_backbone_expansion, check_concat, check_reflection, check_rho_trend, check_switching,
    orders_for, small_graphs, switching_instances, tfin_instances,
)
from ising_rc.exact import correlation_matrix, verify_tfin
from ising_rc.lattice import PERIODIC, build_box, build_rect
from ising_rc.observables import mgf_estimate, two_point_table
from ising_rc.spin_mc import ModelParams, Schedule, critical_beta, sample_ensemble


def worst(results):
    return max(r.value for r in results)


# -- exact identities ----------------------------------------------------------------

def test_c1_switching_identity(criterion):
    t0 = time.perf_counter()
    inst = switching_instances()
    res = check_switching(instances=inst)
    dt = time.perf_counter() - t0
    graphs = small_graphs()
    assert all(graphs[i.graph].n_edges <= 8 and i.cap <= 4 for i in inst)
    ok = len(res) >= 20 and all(r.passed for r in res) and worst(res) < 1e-10 and dt < 120
    criterion("C1", ok, f"{len(res)} instances, max deviation {worst(res):.1e}, {dt:.1f}s")


def test_c2_backbone_expansion_and_concat(criterion):
    t0 = time.perf_counter()
    graphs = small_graphs()
    assert all(g.n_edges <= 10 for g in graphs.values())
    assert all(len({o.name for o in orders_for(g)}) >= 2 for g in graphs.values())
    exp = check_backbone_expansion(graphs)
    cat = check_concat(graphs)
    dt = time.perf_counter() - t0
    dev = max(worst(exp), worst(cat))
    ok = all(r.passed for r in exp + cat) and dev < 1e-10 and dt < 120
    criterion("C2", ok, f"{len(exp)} expansion + {len(cat)} concat checks over {len(graphs)} graphs, "
                        f"max deviation {dev:.1e}, {dt:.1f}s")


def test_c3_reflection_inequality(criterion):
    res = check_reflection(radii=(1, 2), betas=(0.2, 0.44, 0.8), n_sets=50)
    margin = min(r.value for r in res)
    ok = len(res) == 6 and margin >= -1e-12
    criterion("C3", ok, f"2 boxes x 3 betas x 50 sets, smallest margin {margin:.2e}")


def test_c4_finite_volume_bound(criterion):
    betas = (0.2, 0.44, 0.8)
    rows = []
    for outer, n, x, y, method in tfin_instances():
        method = "closed_form" if outer.dim == 1 else "transfer"
        for beta in betas:
            r = verify_tfin(outer, n, beta, x, y, method)
            rows.append((outer.dim, r["holds"], r["slack"]))
    dims = {d for d, _, _ in rows}
    bad = sum(not h for _, h, _ in rows)
    ok = dims == {1, 2} and bad == 0
    criterion("C4", ok, f"{len(rows)} cases over d=1,2 at 3 betas, {bad} violations, "
                        f"min slack {min(s for *_, s in rows):.2e}")


def test_c5_rho_trend(criterion):
    res = check_rho_trend()
    ok = all(r.passed for r in res)
    detail = ", ".join(f"{r.instance}: {np.round(r.detail['differences'], 6).tolist()}" for r in res[:2])
    criterion("C5", ok, f"{sum(r.passed for r in res)}/{len(res)} backbones shrink ({detail}, ...)")


# -- Monte Carlo against the exact oracle ------------------------------------------------

@pytest.mark.parametrize("sampler", ["wolff", "metropolis", "metropolis-classic"])
def test_c6_monte_carlo_against_exact(criterion, sampler):
    beta = critical_beta(2)
    boxes = [build_box(2, 1), build_rect((4, 4)), build_rect((2, 8))]
    hits = total = 0
    for g in boxes:
        assert g.n_vertices <= 16
        _, C = correlation_matrix(g, beta)
        pairs = list(itertools.combinations(range(g.n_vertices), 2))
        for seed in range(20):
            st = sample_ensemble(g, ModelParams(beta), Schedule(5000, burn_in=200, seed=seed), sampler)
            table = two_point_table(st, pairs)
            hits += sum(table[p].agrees(C[p]) for p in pairs)
            total += len(pairs)
    frac = hits / total
    criterion("C6", frac >= 0.95, f"{sampler}: {hits}/{total} pairs within 3 sigma ({frac:.3f})")


# -- d=4 scaling ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def d4_scans(tmp_path_factory):
    out = tmp_path_factory.mktemp("d4")
    cfg = preset("scan", "full")
    assert cfg.d == 4 and cfg.radii == (3, 4, 5, 6, 7, 8) and cfg.M == 2
    files = {}
    for bc in ("free", PERIODIC):
        t0 = time.perf_counter()
        res = run_scan(cfg.with_overrides(bc=bc))
        assert not res.partial
        files[bc] = (write_csv(res.rows, out / f"{bc}.csv"), time.perf_counter() - t0)
    return files


@pytest.mark.slow
def test_c7_two_point_exponent(criterion, d4_scans):
    path, dt = d4_scans["free"]
    rep = run_fit([path], "two_point")
    ok = abs(rep["exponent"] + 2.0) <= 0.3
    criterion("C7", ok, f"d=4 two-point exponent {rep['exponent']:.3f} +- {rep['exponent_error']:.3f} "
                        f"(target -2 +- 0.3), scan {dt / 60:.1f} min")


@pytest.mark.slow
def test_c7_d3_smoke(criterion):
    cfg = preset("scan", "quick")
    t0 = time.perf_counter()
    rows = run_scan(cfg).rows
    dt = time.perf_counter() - t0
    g = [r["value"] for r in rows if r["observable"] == "two_point"]
    chi = [r["value"] for r in rows if r["observable"] == "chi"]
    ok = (cfg.d == 3 and np.all(np.diff(g) < 0) and np.all(np.diff(chi) > 0)
          and np.all(np.array(g) > 0) and dt < 600)
    criterion("C7", ok, f"d=3 smoke: two-point falls {g[0]:.4f} -> {g[-1]:.4f}, "
                        f"chi rises {chi[0]:.2f} -> {chi[-1]:.2f}, {dt:.0f}s")


@pytest.mark.slow
def test_c8_susceptibility_exponent(criterion, d4_scans):
    free = run_fit([d4_scans["free"][0]], "chi")
    per = run_fit([d4_scans[PERIODIC][0]], "chi")
    ok = abs(free["exponent"] - 2.0) <= 0.3 and per["exponent"] > free["exponent"]
    criterion("C8", ok, f"free chi exponent {free['exponent']:.3f} +- {free['exponent_error']:.3f}, "
                        f"periodic {per['exponent']:.3f} +- {per['exponent_error']:.3f}")


# -- tilting ------------------------------------------------------------------------------------

@pytest.mark.parametrize("profile", ["quick", "full"])
def test_c9_tilting(criterion, profile):
    cfg = preset("tilt", profile)
    res = run_tilt_experiment(cfg)
    rows = [r for r in res.report["comparison"] if r["quantity"] in ("mean", "variance")]
    assert len({r["test_function"] for r in rows}) == 3 and len({r["h"] for r in rows}) == 2
    zmax = max(abs(r["z"]) for r in rows)
    shape = "x".join(map(str, cfg.shape))
    criterion("C9", zmax <= 3, f"{shape}: {len(rows)} mean/variance pairs, max |z| {zmax:.2f}")


def test_c9_gaussian_control(criterion):
    rng = np.random.default_rng(2024)
    mu, sigma = 0.2, 0.7
    x = rng.normal(mu, sigma, 400_000)
    ts = np.array([-1.0, -0.5, -0.25, 0.25, 0.5, 1.0])
    recs = [mgf_estimate(x[:, None], [1.0], t, d=0) for t in ts]
    y = np.array([r.meta["log_value"] for r in recs])
    e = np.array([r.meta["log_error"] for r in recs])
    X = np.column_stack([ts, ts**2 / 2]) / e[:, None]
    coef, *_ = np.linalg.lstsq(X, y / e, rcond=None)
    resid = (y - np.column_stack([ts, ts**2 / 2]) @ coef) / e
    ok = np.all(np.abs(resid) <= 3) and abs(coef[1] - sigma**2) < 0.02 and abs(coef[0] - mu) < 0.01
    criterion("C9", ok, f"Gaussian control: fitted mean {coef[0]:.4f}, variance {coef[1]:.4f}, "
                        f"max |residual|/error {np.abs(resid).max():.2f}")


# -- reproducibility -------------------------------------------------------------------------------

REFERENCE = ExperimentConfig(d=2, radii=(1, 2, 3), beta="critical:2", sampler="sw",
                             schedule=ScheduleConfig(n_sweeps=400, burn_in=50), seed=11)


def stat_columns(path):
    lines = path.read_text().splitlines()
    head = lines[0].split(",")
    keep = [head.index(c) for c in STAT_COLUMNS]
    return [",".join(line.split(",")[k] for k in keep) for line in lines]


def test_c10_reproducibility(criterion, tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(dump_config(REFERENCE))
    for run in ("a", "b"):
        assert main(["scan", "--config", str(cfg), "--out", str(tmp_path / run)]) == 0
    a, b = (stat_columns(tmp_path / run / "results.csv") for run in ("a", "b"))
    same = a == b and len(a) == 7
    stable = REFERENCE.config_hash() == "10b6ff22230a898b"
    criterion("C10", same and stable, f"rerun statistics identical: {same}; config hash stable: {stable}")
