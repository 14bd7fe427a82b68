import itertools
import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sbclift.errors import ParseError
from sbclift.hypothesis import parse_constraints
from sbclift.pipeline_cli import (
    BenchRow,
    RunConfig,
    benchmark_stats,
    bench_one,
    cmd_benchmark,
    cmd_pipeline,
    load_instance,
    main,
    rows_from_csv,
    rows_to_csv,
    wilcoxon_signed_rank,
)
from sbclift.pup_core import generate_instance, write_instance

ABK = parse_constraints(
    ":- closesensors(V1,V2), unit2sensorGEQ(V1,V2), unit2sensorGEQ(V2,V1).\n"
    ":- closezones(V1,V2), partnerunits(V1,V2), not zone2sensor(V1,V2).\n"
)


def small_config(**kw):
    base = dict(training=["dbl-6"], generalization=["dbl-8"], cells=3, max_cell_size=2,
                seeds=[1], learn_timeout_ms=60_000, check_timeout_ms=5_000, solve_timeout_ms=5_000)
    base.update(kw)
    return RunConfig(**base)


# ---------------------------------------------------------------- configuration

def test_defaults_validate():
    RunConfig().validate()


@pytest.mark.parametrize("change", [
    dict(strategy="scalable_enum", n=0), dict(cells=0), dict(max_cell_size=-1), dict(seeds=[]),
    dict(scheme="weighted"), dict(strategy="other"), dict(training=[]), dict(workers=0), dict(seeds=[-1]),
])
def test_config_validation_errors(change):
    with pytest.raises(ValueError):
        small_config(**change).validate()


def test_config_text_round_trip():
    cfg = RunConfig.from_text("# run\nseeds = 0-3, 7\ntraining = dbl-6\ncells = 4  # small\nscheme=default\n")
    assert cfg.seeds == [0, 1, 2, 3, 7]
    assert cfg.cells == 4 and cfg.scheme == "default"
    assert RunConfig.from_text(cfg.to_text()) == cfg


@pytest.mark.parametrize("bad", ["cells = x", "nonsense", "colour = red"])
def test_config_parse_errors(bad):
    with pytest.raises(ParseError):
        RunConfig.from_text(bad)


def test_pipeline_rejects_n_zero(tmp_path):
    with pytest.raises(ValueError):
        cmd_pipeline(small_config(strategy="scalable_enum", n=0), tmp_path)
    assert main(["pipeline", "--config", _write(tmp_path, "strategy = scalable_enum\nn = 0\n")]) == 1


def _write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_load_instance(tmp_path):
    assert load_instance("fig1").name == "dbl-6"
    assert len(load_instance("un-dbl-8").units) == 4
    inst = generate_instance("doublev", 5)
    assert load_instance(_write(tmp_path, write_instance(inst), "i.lp")).edges == inst.edges


# ---------------------------------------------------------------- pipeline

def test_pipeline_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir()
    b.mkdir()
    sa = cmd_pipeline(small_config(), a)
    sb = cmd_pipeline(small_config(), b)
    for name in ("constraints_seed1.lp", "examples_seed1.las", "best_constraints.lp"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert [r["constraints"] for r in sa["runs"]] == [r["constraints"] for r in sb["runs"]]
    report = json.loads((a / "report_seed1.json").read_text())
    assert report["hypothesis"] == (a / "constraints_seed1.lp").read_text().splitlines()
    assert "selection" in json.loads((a / "pipeline_summary.json").read_text())


def test_one_sided_run_is_skipped(tmp_path):
    summary = cmd_pipeline(small_config(max_cell_size=0), tmp_path)
    assert summary["runs"][0]["status"] == "skipped"
    assert not (tmp_path / "constraints_seed1.lp").exists()


# ---------------------------------------------------------------- benchmark

def test_unsat_benchmark_instance():
    row = bench_one(generate_instance("double", 6, unsat=True), (), "plain", 0, 10_000)
    assert row.verdict == "unsat" and row.runtime_ms is not None


def test_benchmark_rows_and_csv():
    rows = cmd_benchmark([generate_instance("double", 6, unsat=True), generate_instance("double", 8)],
                         ABK, 10_000, seeds=[0, 1])
    assert [(r.instance, r.condition, r.seed) for r in rows][:2] == [("un-dbl-6", "plain", 0), ("un-dbl-6", "with_abk", 0)]
    assert len(rows) == 8
    assert {r.verdict for r in rows if r.instance == "un-dbl-6"} == {"unsat"}
    assert {r.verdict for r in rows if r.instance == "dbl-8"} == {"sat"}
    text = rows_to_csv(rows)
    assert text.splitlines()[0] == "instance,condition,seed,verdict,runtime_ms,nodes,timeout_ms"
    back = rows_from_csv(text)
    assert [(r.instance, r.verdict, r.nodes) for r in back] == [(r.instance, r.verdict, r.nodes) for r in rows]


def test_timeout_row_round_trip():
    row = BenchRow("x", "plain", 0, "timeout", None, 5, 100.0)
    assert rows_from_csv(rows_to_csv([row])) == [row]
    assert "TIMEOUT" in rows_to_csv([row])


def test_benchmark_stats_counts_timeouts_at_limit():
    rows = [BenchRow("a", "plain", s, "timeout", None, 10, 100.0) for s in range(3)]
    rows += [BenchRow("a", "with_abk", s, "unsat", 10.0 + s, 1, 100.0) for s in range(3)]
    st_ = benchmark_stats(rows)
    assert st_["pairs"] == 3 and st_["timeouts"] == {"plain": 3, "with_abk": 0}
    assert st_["median_ms"] == {"plain": 100.0, "with_abk": 11.0}
    assert st_["statistic"] == 0


# ---------------------------------------------------------------- statistics

def exact_p(pairs):
    """P(min(W+, W-) <= observed) under all 2^n equally likely sign flips."""
    diffs = [a - b for a, b in pairs if a != b]
    mags = sorted(abs(d) for d in diffs)
    ranks = {}
    for v in set(mags):
        idx = [i + 1 for i, m in enumerate(mags) if m == v]
        ranks[v] = sum(idx) / len(idx)
    r = [ranks[abs(d)] for d in diffs]
    obs = min(sum(x for x, d in zip(r, diffs) if d > 0), sum(x for x, d in zip(r, diffs) if d < 0))
    hits = 0
    for signs in itertools.product((1, -1), repeat=len(r)):
        wp = sum(x for x, s in zip(r, signs) if s > 0)
        hits += min(wp, sum(r) - wp) <= obs + 1e-12
    return obs, hits / 2 ** len(r)


def test_wilcoxon_doubling_pairs():
    res = wilcoxon_signed_rank([(k, 2 * k) for k in range(1, 7)])
    assert res.statistic == 0 and res.method == "exact"
    assert abs(res.p_value - 2 / 64) < 1e-12


def test_wilcoxon_all_tied_is_undefined():
    res = wilcoxon_signed_rank([(3.0, 3.0)] * 5)
    assert not res.defined and math.isnan(res.p_value)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=1, max_size=10))
def test_wilcoxon_matches_sign_flip_enumeration(pairs):
    res = wilcoxon_signed_rank(pairs)
    if all(a == b for a, b in pairs):
        assert not res.defined
        return
    obs, p = exact_p(pairs)
    assert res.statistic == obs
    assert abs(res.p_value - p) < 1e-9


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 100), st.floats(0, 100)), min_size=1, max_size=40))
def test_wilcoxon_swap_symmetry(pairs):
    a = wilcoxon_signed_rank(pairs)
    b = wilcoxon_signed_rank([(y, x) for x, y in pairs])
    assert a.method == b.method
    if a.defined:
        assert a.statistic == b.statistic
        assert abs(a.p_value - b.p_value) < 1e-12


def test_wilcoxon_normal_approximation_large_n():
    res = wilcoxon_signed_rank([(k, k + (1 if k % 3 else -1) * k) for k in range(1, 41)])
    assert res.method == "normal" and 0 < res.p_value < 1


# ---------------------------------------------------------------- command line

def test_cli_enumerate_fig1(capsys):
    assert main(["enumerate", "fig1"]) == 0
    assert json.loads(capsys.readouterr().out)["count"] == 145368


def test_cli_solve_and_detect(capsys):
    assert main(["detect-sym", "fig1"]) == 0
    assert capsys.readouterr().out.splitlines()[2] == "units: (1 2); vertices: ()"
    assert main(["solve", "un-dbl-6"]) == 0
    assert "unsat" in capsys.readouterr().out.lower()


def test_cli_global_flags_after_subcommand(tmp_path, capsys):
    assert main(["gen-instance", "dbl-8", "--out", str(tmp_path), "--seed", "3"]) == 0
    assert list(tmp_path.iterdir())


def test_cli_bad_instance_reports_error(capsys):
    assert main(["solve", "quad-4"]) == 1
    assert "sbclift: error" in capsys.readouterr().err


def test_cli_examples_learn_benchmark_stats(tmp_path, capsys):
    assert main(["gen-examples", "fig1", "--cells", "3", "--max-cell-size", "2", "--out", str(tmp_path)]) == 0
    ex = [p for p in tmp_path.iterdir() if p.suffix == ".las"]
    assert len(ex) == 1
    capsys.readouterr()
    assert main(["learn", str(ex[0]), "--gen", "dbl-8", "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    lp = [p for p in tmp_path.iterdir() if p.suffix == ".lp"]
    assert lp
    assert main(["benchmark", "un-dbl-6", "--abk", str(lp[0]), "--seeds", "0-2", "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    csv_path = next(p for p in tmp_path.iterdir() if p.suffix == ".csv")
    assert len(rows_from_csv(csv_path.read_text())) == 6
    assert main(["stats", str(csv_path)]) == 0
    assert json.loads(capsys.readouterr().out)["pairs"] == 3
