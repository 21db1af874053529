import json
import subprocess
import sys

import numpy as np
import pytest

from scthresh.cli import ConfigError, RunConfig, main, parse_int_range, parse_model
from scthresh.export import read_csv, write_json

from conftest import EPS0


def run(capsys, *args):
    code = main([str(a) for a in args])
    out, err = capsys.readouterr()
    return code, out, err


def test_threshold_minratio(capsys, tmp_path):
    out_file = tmp_path / "t.json"
    code, out, _ = run(capsys, "threshold", "--model", "ldpc:3,6", "--method", "minratio", "--out", out_file)
    assert code == 0
    assert out.startswith("method=minratio threshold=")
    doc = json.loads(out_file.read_text())
    assert doc["value"] == pytest.approx(EPS0, abs=1e-6)
    assert doc["config"]["model"] == "ldpc:3,6" and "version" in doc


def test_threshold_coupled(capsys):
    code, out, _ = run(
        capsys, "threshold", "--model", "ldpc:3,6", "--method", "coupled-de", "--L", 33, "--w", 3, "--epsilon-tol", 1e-3
    )
    lo = float(out.split("threshold=")[1].split("..")[0])
    assert code == 0 and lo > EPS0


def test_zero_tolerance_is_a_config_error(capsys):
    code, _, err = run(capsys, "threshold", "--model", "ldpc:3,6", "--method", "potential", "--epsilon-tol", 0)
    assert code == 2 and "epsilon_tol" in err


def test_numeric_failure_exit_code(capsys):
    code, _, err = run(capsys, "evolve", "--model", "ldpc:3,6", "--L", 33, "--w", 3, "--epsilon", 0.45, "--max-iter", 3)
    assert code == 0  # evolve reports an unfinished run, it does not fail
    code, _, err = run(capsys, "spectral", "--model", "ldpc:3,6", "--L", 33, "--w", 3, "--epsilon", 0.5, "--max-iter", 3)
    assert code == 3 and "numeric" in err


@pytest.mark.parametrize(
    "spec,field",
    [("ldpc:1,6", "model"), ("nope:1", "model"), ("cancelation:g=zzz", "model"), ("ldpc:3,6:odd", "model")],
)
def test_bad_model_specs(capsys, spec, field):
    code, _, err = run(capsys, "threshold", "--model", spec)
    assert code == 2 and field in err


def test_model_catalog():
    assert parse_model("ldpc:4,8").params["l"] == 4
    assert parse_model("ldpc:3,6:folded").params["folded"]
    m = parse_model("cancelation:g=hill,sigma2=0.01,alpha=0.3")
    assert m.default_epsilon == 0.3 and m.params["sigma2"] == 0.01


def test_int_ranges():
    assert parse_int_range("1..6") == [1, 2, 3, 4, 5, 6]
    assert parse_int_range("2,4,8") == [2, 4, 8]
    with pytest.raises(ConfigError):
        parse_int_range("0..2")


def test_evolve_anchored(capsys, tmp_path):
    out_file, rep = tmp_path / "e.csv", tmp_path / "e.json"
    code, _, _ = run(
        capsys, "evolve", "--model", "ldpc:3,6", "--L", 33, "--w", 3, "--epsilon", 0.45,
        "--out", out_file, "--report", rep,
    )
    assert code == 0
    cfg, header, rows = read_csv(out_file)
    assert header == ["iteration", "i", "value"] and cfg["L"] == 33
    last = max(int(r[0]) for r in rows)
    # the run stops once the step is below the default tolerance 1e-10
    assert all(float(r[2]) <= 1e-10 for r in rows if int(r[0]) == last)
    assert json.loads(rep.read_text())["converged_to_zero"] is True


def _final_states(path):
    _, _, rows = read_csv(path)
    table = {}
    for it, i, v in rows:
        table.setdefault(int(it), {})[int(i)] = float(v)
    return table


def test_evolve_circular_uniform(capsys, tmp_path):
    out_file = tmp_path / "c.csv"
    run(capsys, "evolve", "--L", 9, "--w", 3, "--boundary", "circular", "--epsilon", 0.46, "--out", out_file)
    for state in _final_states(out_file).values():
        assert len(set(state.values())) == 1


def test_evolve_width_one_replicates_single(capsys, tmp_path):
    from scthresh.dynamics import iterate_single
    from scthresh.models import make_ldpc_regular

    out_file = tmp_path / "s.csv"
    run(capsys, "evolve", "--L", 4, "--w", 1, "--epsilon", 0.45, "--max-iter", 30, "--out", out_file)
    single = iterate_single(make_ldpc_regular(3, 6), 1.0, 0.45, max_iter=30)
    for it, state in _final_states(out_file).items():
        assert all(v == single.states[it] for v in state.values())


def test_potential_at_threshold(capsys, tmp_path):
    out_file = tmp_path / "u.csv"
    code, out, _ = run(capsys, "potential", "--model", "ldpc:3,6", "--epsilon", 0.4294398, "--grid", 4096, "--out", out_file)
    _, header, rows = read_csv(out_file)
    assert code == 0 and header == ["x", "U"] and len(rows) == 4096
    assert min(float(r[1]) for r in rows) >= -1e-10


def test_potential_lyapunov_report(capsys, tmp_path):
    rep = tmp_path / "l.json"
    code, out, _ = run(
        capsys, "potential", "--epsilon-range", "0.40:0.50:3", "--grid", 201, "--check-lyapunov", "--report", rep
    )
    assert code == 0
    reports = json.loads(rep.read_text())["reports"]
    assert [r["positivity_ok"] for r in reports] == [True, True, False]


def test_spectral_rho_lemma(capsys):
    code, out, _ = run(capsys, "spectral", "--check-rho-lemma", "--w", "1..6")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 6 and all(l.startswith("PASS") for l in lines)


def test_spectral_dump(capsys, tmp_path):
    out_file = tmp_path / "d.csv"
    run(capsys, "spectral", "--dump-matrix", "--L", 5, "--w", 2, "--out", out_file)
    _, header, rows = read_csv(out_file)
    assert len(header) == 5 and float(rows[2][2]) == 0.5
    run(capsys, "spectral", "--dump-matrix", "--L", 80, "--w", 2, "--out", out_file)
    _, header, rows = read_csv(out_file)
    assert header == ["i", "j", "value"] and len(rows) == 80 + 2 * 79


def test_spectral_instability(capsys, tmp_path):
    out_file = tmp_path / "s.json"
    code, out, _ = run(capsys, "spectral", "--L", 33, "--w", 3, "--epsilon", 0.44, "--out", out_file)
    assert code == 0 and "at_origin=True" in out


def test_continuum_gap(capsys, tmp_path):
    prof, rep = tmp_path / "v.csv", tmp_path / "r.json"
    code, out, _ = run(
        capsys, "continuum", "--model", "ldpc:3,6", "--alpha", 4, "--w", 8, "--epsilon", 0.45,
        "--out", prof, "--report", rep,
    )
    doc = json.loads(rep.read_text())
    assert code == 0 and doc["sup_gap"] <= 2 / 8
    assert read_csv(prof)[1] == ["x", "v"]


def test_sweep_with_workers(capsys, tmp_path):
    out_file = tmp_path / "sw.csv"
    code, out, _ = run(
        capsys, "sweep", "--L-list", "17,33", "--w-list", "3", "--variants", "inside,outside",
        "--epsilon-tol", 1e-2, "--jobs", 2, "--out", out_file,
    )
    _, header, rows = read_csv(out_file)
    assert code == 0
    assert header == ["L", "w", "variant", "method", "threshold_lo", "threshold_hi", "evaluations"]
    assert [(r[0], r[2]) for r in rows] == [("17", "inside"), ("17", "outside"), ("33", "inside"), ("33", "outside")]


# -- configuration ------------------------------------------------------------------------


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "base.cfg"
    cfg.write_text("# base\nmodel = ldpc:3,6\nmethod = de\nepsilon_tol = 1e-3\n")
    code, out, _ = run(capsys, "threshold", "--config", cfg, "--method", "minratio")
    assert code == 0 and out.startswith("method=minratio")


def test_unknown_config_key(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("modle = ldpc:3,6\n")
    code, _, err = run(capsys, "threshold", "--config", cfg)
    assert code == 2 and "modle" in err


def test_config_round_trip():
    cfg = RunConfig(model="ldpc:4,8", L=17, w="2", epsilon=0.41, method="coupled-de").validated()
    again = RunConfig.from_text(cfg.to_text())
    assert again == cfg


def test_seed_env_fallback(monkeypatch):
    monkeypatch.setenv("ANALYZER_SEED", "17")
    assert RunConfig().validated().seed == 17
    assert RunConfig(seed=3).validated().seed == 3


def test_outputs_are_deterministic(capsys, tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        run(capsys, "threshold", "--method", "potential", "--epsilon-tol", 1e-4, "--seed", 5, "--out", tmp_path / "x.json")
        p.write_bytes((tmp_path / "x.json").read_bytes())
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_rerun_from_embedded_config(capsys, tmp_path):
    out_file = tmp_path / "first.json"
    run(capsys, "threshold", "--method", "de", "--epsilon-tol", 1e-4, "--out", out_file)
    before = out_file.read_bytes()
    embedded = json.loads(before)["config"]
    cfg_file = tmp_path / "again.cfg"
    cfg_file.write_text(RunConfig(**embedded).to_text())
    assert run(capsys, "threshold", "--config", cfg_file)[0] == 0
    assert out_file.read_bytes() == before


def test_atomic_json_leaves_no_temp_files(tmp_path):
    write_json(tmp_path / "r.json", {"a": np.float64(1.5), "b": np.arange(3)}, {"k": 1})
    assert [p.name for p in tmp_path.iterdir()] == ["r.json"]
    assert json.loads((tmp_path / "r.json").read_text())["b"] == [0, 1, 2]


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "scthresh", "threshold", "--model", "ldpc:3,6", "--method", "minratio"],
        capture_output=True, text=True, check=False,
    )
    assert res.returncode == 0 and "threshold=0.42943981" in res.stdout
