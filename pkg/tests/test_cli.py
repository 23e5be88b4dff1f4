import csv
import json
import math

import numpy as np
import pytest

from ising_rc.cli import (
    ConfigError, ExperimentConfig, ScheduleConfig, config_from_dict, dump_config, load_config, main,
    run_fit, run_scan, run_tilt_experiment, run_verify,
)
from ising_rc.cli.output import CSV_COLUMNS, read_csv, write_csv
from ising_rc.cli.verify import exit_code, switching_instances
from ising_rc.observables import fit_exponential


def small_scan(**kw):
    base = dict(d=2, radii=(1, 2, 3), beta=0.3, sampler="sw",
                schedule=ScheduleConfig(n_sweeps=300, burn_in=20), seed=4)
    base.update(kw)
    return ExperimentConfig(**base)


# -- configuration ---------------------------------------------------------------

def test_yaml_roundtrip(tmp_path):
    cfg = small_scan(h=(0.0,), shape=None, experiment_id="x")
    p = tmp_path / "c.yaml"
    p.write_text(dump_config(cfg))
    assert load_config(p) == cfg


def test_yaml_file_with_nesting(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("schema_version: 1\nd: 3\nradii: [2, 4]\nbeta: critical:3\nsampler: wolff\n"
                 "schedule:\n  n_sweeps: 50\n  burn_in: 5\n")
    cfg = load_config(p)
    assert cfg.radii == (2, 4) and cfg.schedule.n_sweeps == 50
    assert cfg.beta_value == pytest.approx(0.22165463)


@pytest.mark.parametrize("raw", [
    {"radii": [4, 2]}, {"radii": [2, 2]}, {"sampler": "gibbs"}, {"bc": "plus"}, {"M": 0},
    {"beta": "critical:9"}, {"beta": -1}, {"schema_version": 2}, {"colour": "red"},
    {"schedule": {"sweeps": 10}}, {"d": 4, "radii": [40], "M": 2}, {"a": 0},
])
def test_invalid_configs(raw):
    with pytest.raises(ConfigError):
        config_from_dict(raw)


def test_hash_ignores_bookkeeping_fields():
    cfg = small_scan()
    h = cfg.config_hash()
    assert len(h) == 16
    assert cfg.with_overrides(experiment_id="other", out="/tmp/x", threads=4).config_hash() == h
    assert small_scan(beta=0.3).config_hash() == h


def test_hash_tracks_semantic_fields():
    cfg = small_scan()
    variants = [
        dict(seed=5), dict(beta=0.31), dict(radii=(1, 2, 4)), dict(M=3), dict(bc="periodic"),
        dict(sampler="wolff"), dict(schedule=ScheduleConfig(n_sweeps=301, burn_in=20)),
        dict(h=(0.1,)), dict(a=0.5), dict(d=3), dict(t_grid=(1.0,)),
    ]
    hashes = {cfg.with_overrides(**v).config_hash() for v in variants}
    assert len(hashes) == len(variants) and cfg.config_hash() not in hashes


def test_symbolic_beta_hashes_like_its_value():
    a = small_scan(beta="critical:2")
    b = small_scan(beta=0.5 * math.log(1 + math.sqrt(2)))
    assert a.config_hash() == b.config_hash()


# -- verification ------------------------------------------------------------------

def test_empty_profile_reports_nothing_ran():
    rep = run_verify("empty")
    assert rep["n_checks"] == 0 and rep["status"] == "nothing-ran" and exit_code(rep) != 0


def test_corrupted_weights_fail_switching():
    rep = run_verify("corrupted")
    assert rep["status"] == "fail" and exit_code(rep) == 1
    assert rep["n_failed"] > 0
    assert all(r["check"] == "switching" for r in rep["results"])


def test_unknown_profile():
    with pytest.raises(ValueError):
        run_verify("nightly")


def test_switching_matrix_shape():
    inst = switching_instances()
    assert len(inst) >= 20
    assert {len(i.A) for i in inst} == {0, 2, 4}
    assert max(i.cap for i in inst) <= 4


# -- scans ---------------------------------------------------------------------------

def test_scan_rows_follow_schema():
    res = run_scan(small_scan())
    assert [(r["observable"], r["n"]) for r in res.rows] == [
        (o, n) for n in (1, 2, 3) for o in ("two_point", "chi")]
    assert all(set(CSV_COLUMNS) <= set(r) for r in res.rows)
    assert all(r["seed"] == 4 for r in res.rows)
    assert res.config_hash == small_scan().config_hash() and not res.partial


def test_scan_chain_decays_exponentially():
    cfg = ExperimentConfig(d=1, radii=(4, 8, 16), beta=1.0, sampler="sw",
                           schedule=ScheduleConfig(n_sweeps=4000, burn_in=100), seed=1)
    pts = [(r["n"], r["value"], r["std_error"]) for r in run_scan(cfg).rows
           if r["observable"] == "two_point"]
    fit = fit_exponential(pts)
    assert abs(fit.rate + math.log(math.tanh(1.0))) <= 3 * fit.rate_error
    for n, v, e in pts:
        assert abs(v - math.tanh(1.0) ** n) <= 3 * e


def test_scan_subcritical_chi_saturates():
    cfg = ExperimentConfig(d=2, radii=(2, 4, 8, 16), beta=0.25, sampler="sw",
                           schedule=ScheduleConfig(n_sweeps=2000, burn_in=200), seed=2)
    chi = [r["value"] for r in run_scan(cfg).rows if r["observable"] == "chi"]
    steps = np.diff(chi)
    assert np.all(steps[1:] < steps[:-1])
    assert math.log(chi[-1] / chi[-2]) / math.log(2) < 0.1


@pytest.mark.parametrize("sampler", ["sw", "metropolis"])
def test_scan_infinite_temperature_chi_is_one(sampler):
    cfg = small_scan(beta=0.0, sampler=sampler, schedule=ScheduleConfig(n_sweeps=2000, burn_in=10))
    for r in run_scan(cfg).rows:
        if r["observable"] == "chi":
            assert abs(r["value"] - 1.0) <= 3 * r["std_error"]


def test_scan_replicas_thread_independent():
    cfg = small_scan(schedule=ScheduleConfig(n_sweeps=200, burn_in=10, replicas=3))
    assert run_scan(cfg, threads=1).rows == run_scan(cfg, threads=3).rows


def test_scan_time_budget_flags_partial():
    res = run_scan(small_scan(max_seconds=0.0))
    assert res.partial and res.rows == []
    assert res.report["skipped_radii"] == [1, 2, 3]


# -- tilting -------------------------------------------------------------------------

def tilt_cfg(**kw):
    base = dict(d=2, radii=(4,), shape=(8, 8), beta=0.35, a=1 / 8, h=(0.0, 0.5), sampler="wolff",
                schedule=ScheduleConfig(n_sweeps=8000, burn_in=200), seed=3)
    base.update(kw)
    return ExperimentConfig(**base)


def test_tilt_zero_field_pipelines_coincide():
    res = run_tilt_experiment(tilt_cfg(h=(0.0,)))
    for row in res.report["comparison"]:
        assert row["reweighted"] == row["direct"]
        assert row["reweighted_error"] == row["direct_error"]
        assert row["z"] == 0.0


def test_tilt_single_site_is_tanh():
    H = 0.5
    cfg = ExperimentConfig(d=1, radii=(1,), shape=(1,), beta=0.0, a=1.0, h=(H,), sampler="metropolis",
                           schedule=ScheduleConfig(n_sweeps=20_000, burn_in=10), seed=1,
                           test_functions=("indicator",))
    rows = [r for r in run_tilt_experiment(cfg).report["comparison"] if r["quantity"] == "mean"]
    (row,) = rows
    assert abs(row["reweighted"] - math.tanh(H)) <= 3 * row["reweighted_error"]
    assert abs(row["direct"] - math.tanh(H)) <= 3 * row["direct_error"]


def test_tilt_small_field_agrees():
    res = run_tilt_experiment(tilt_cfg(h=(0.5,)))
    table = res.report["comparison"]
    assert len(table) == 3 * (2 + 4)
    assert all(abs(r["z"]) <= 3 for r in table)
    assert not res.report["ess_collapse"]
    assert {r["observable"].split("/")[-1] for r in res.rows} == {"reweighted", "direct"}


# -- fits -----------------------------------------------------------------------------

def synthetic(path, observable, fn, ns, rel=0.0, seed=0):
    rng = np.random.default_rng(seed)
    rows = []
    for n in ns:
        v = fn(n) * (1 + rel * rng.normal())
        rows.append({"experiment_id": "syn", "observable": observable, "n": n, "beta": 0.15,
                     "bc": "free", "h": 0.0, "value": v, "std_error": rel * fn(n),
                     "n_samples": 1000, "tau": 0.5, "seed": seed})
    write_csv(rows, path)
    return path


def test_fit_synthetic_square(tmp_path):
    p = synthetic(tmp_path / "r.csv", "chi", lambda n: 3 * n * n, range(3, 9))
    rep = run_fit([p])
    assert rep["exponent"] == pytest.approx(2.0, abs=1e-9)
    assert len(rep["table"]) == 6 and rep["window"]


def test_fit_synthetic_decay(tmp_path):
    p = synthetic(tmp_path / "r.csv", "two_point", lambda n: n**-2.0, range(3, 9), rel=0.03, seed=4)
    rep = run_fit([p], "two_point")
    assert abs(rep["exponent"] + 2.0) <= 3 * rep["exponent_error"]


def test_fit_rejects_mixed_and_short_input(tmp_path):
    a = synthetic(tmp_path / "a.csv", "chi", lambda n: n * n, range(3, 9))
    b = synthetic(tmp_path / "b.csv", "two_point", lambda n: n**-2.0, range(3, 9))
    with pytest.raises(ValueError, match="mixes observables"):
        run_fit([a, b])
    with pytest.raises(ValueError, match="at least 3"):
        run_fit([a], window=(7, None))
    with pytest.raises(ValueError, match="not in input"):
        run_fit([a], "energy")


# -- command line --------------------------------------------------------------------------

def test_cli_verify_empty(tmp_path):
    assert main(["verify", "--profile", "empty", "--out", str(tmp_path)]) == 2
    rep = json.loads((tmp_path / "verify.json").read_text())
    assert rep["status"] == "nothing-ran"


def test_cli_scan_and_fit(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(dump_config(small_scan(radii=(1, 2, 3, 4))))
    out = tmp_path / "out"
    assert main(["scan", "--config", str(cfg), "--out", str(out), "--seed", "9"]) == 0
    rows = read_csv(out / "results.csv")
    assert list(rows[0]) == list(CSV_COLUMNS)
    assert {r["seed"] for r in rows} == {"9"}
    meta = json.loads((out / "scan.json").read_text())
    assert meta["config"]["seed"] == 9
    assert main(["fit", str(out / "results.csv"), "--observable", "chi", "--out", str(out)]) == 0
    with open(out / "fit.csv") as fh:
        assert next(csv.reader(fh)) == ["n", "value", "error", "fit"]
    assert main(["fit", str(out / "results.csv"), "--out", str(out)]) == 2


def test_cli_bad_config(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("radii: [3, 1]\n")
    assert main(["scan", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_cli_partial_scan_exit(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(dump_config(small_scan(max_seconds=0.0)))
    assert main(["scan", "--config", str(cfg), "--out", str(tmp_path)]) == 3


def test_cli_tilt_writes_tables(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(dump_config(tilt_cfg(h=(0.5,), schedule=ScheduleConfig(n_sweeps=500, burn_in=50))))
    assert main(["tilt", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "tilt.csv").exists() and (tmp_path / "results.csv").exists()
