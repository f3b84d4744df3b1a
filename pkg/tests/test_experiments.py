import csv
import io
import math

import numpy as np
import pytest

from streamcover.baselines import brute_force_kstar
from streamcover.experiments import (
    COLUMNS,
    ConfigError,
    ExperimentConfig,
    emit_summary,
    open_offline,
    read_summary,
    run_baseline,
    run_stream,
)
from streamcover.hard import TreeSpec, build_instance, random_pointer_input
from streamcover.utilities import setcover_oracle

from conftest import random_graph


@pytest.fixture
def graph_file(tmp_path, rng):
    g = random_graph(rng, 40, 0.08)
    path = tmp_path / "g.edges"
    path.write_text("".join(f"{u} {v}\n" for u, v in g.edges()))
    return path, g


@pytest.fixture
def adj_file(tmp_path, graph_file):
    _, g = graph_file
    path = tmp_path / "g.adj"
    lines = [f"{g.n} {g.num_edges}"] + [" ".join(map(str, [v, *g.neighbors(v)])) for v in range(g.n)]
    path.write_text("\n".join(lines) + "\n")
    return path


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig("domset", Q=1, q_frac=0.5)
    with pytest.raises(ConfigError):
        ExperimentConfig("domset")
    with pytest.raises(ConfigError):
        ExperimentConfig("setcover", format="edges", Q=1)
    with pytest.raises(ConfigError):
        ExperimentConfig("domset", Q=1, eps_tilde=(0.5, 1.0))
    assert ExperimentConfig("domset", Q=1, eps_tilde=(0.1, 0.5, 0.1)).eps_tilde == (0.5, 0.1)


def test_empty_stream_is_all_violated(tmp_path):
    p = tmp_path / "empty.sets"
    p.write_text("3 0\n")
    rep = run_stream(ExperimentConfig("setcover", p, Q=2, eps_tilde=(0.5, 0.1)))
    assert rep.all_violated and len(rep.rows) == 2


def test_stream_rows_share_one_pass(graph_file):
    path, g = graph_file
    cfg = ExperimentConfig("domset", path, q_frac=0.7, memory=64, eps_tilde=(0.5, 0.1, 0.01))
    rep = run_stream(cfg)
    assert rep.passes == 1 and rep.lines_read == g.num_edges
    assert len({r["calls"] for r in rep.rows}) == 1
    assert rep.query_calls.total == 0
    assert rep.rows[0]["Q"] == pytest.approx(0.7 * g.n)
    assert rep.rows[0]["calls"] <= g.n * (rep.sieve.t + 1)


def test_adjacency_stream_agrees_with_edges(graph_file, adj_file):
    path, _ = graph_file
    for util in ("domset", "vcover"):
        a = run_stream(ExperimentConfig(util, path, q_frac=0.6, memory=32, eps_tilde=(0.5, 0.2)))
        b = run_stream(ExperimentConfig(util, adj_file, format="adj", q_frac=0.6, memory=32, eps_tilde=(0.5, 0.2)))
        assert emit_summary([a]) == emit_summary([b])
        assert b.passes == 1


def test_stream_on_hard_instance_meets_bound(tmp_path):
    spec = TreeSpec(2, 3, 4)
    hard = build_instance(spec, random_pointer_input(spec, np.random.default_rng(4), case=1))
    path = tmp_path / "h.sets"
    hard.write(path)
    rep = run_stream(ExperimentConfig("setcover", path, Q=hard.Q, memory=32, eps_tilde=(0.5,)))
    k = brute_force_kstar(setcover_oracle(hard.instance), range(hard.instance.m), hard.Q).k_star
    size = rep.rows[0]["size"]
    assert not math.isnan(size) and size <= 2 / 0.5 * k


def test_logdet_fraction_needs_f_total(tmp_path, rng):
    p = tmp_path / "pts.csv"
    np.savetxt(p, rng.normal(size=(20, 3)), delimiter=",")
    with pytest.raises(ConfigError, match="--f-total"):
        run_stream(ExperimentConfig("logdet", p, q_frac=0.5))
    rep = run_stream(ExperimentConfig("logdet", p, q_frac=0.5, f_total=4.0, memory=16))
    assert rep.rows[0]["Q"] == 2.0


def test_baselines_match_and_are_deterministic(graph_file):
    path, _ = graph_file
    cfg = ExperimentConfig("vcover", path, q_frac=0.8, eps_tilde=(0.5, 0.1))
    g, l = run_baseline(cfg, "greedy"), run_baseline(cfg, "lazy")
    assert [r["size"] for r in g.rows] == [r["size"] for r in l.rows]
    assert all(a["calls"] >= b["calls"] for a, b in zip(g.rows, l.rows))
    r1, r2 = run_baseline(cfg, "random"), run_baseline(cfg, "random")
    assert emit_summary([r1]) == emit_summary([r2])


def test_baseline_milestones_are_nested(graph_file):
    path, _ = graph_file
    rep = run_baseline(ExperimentConfig("domset", path, q_frac=0.9, eps_tilde=(0.5, 0.2, 0.01)), "greedy")
    sizes = [r["size"] for r in rep.rows]
    assert sizes == sorted(sizes)
    assert rep.trace.picks[: int(sizes[0])] == rep.trace.picks[: int(sizes[-1])][: int(sizes[0])]


def test_summary_columns_and_ratios(graph_file):
    path, _ = graph_file
    cfg = ExperimentConfig("domset", path, q_frac=0.7, memory=64, eps_tilde=(0.5, 0.1))
    esc, greedy = run_stream(cfg), run_baseline(cfg, "greedy")
    text = emit_summary([esc, greedy])
    rows = list(csv.DictReader(io.StringIO(text)))
    assert list(rows[0]) == COLUMNS + ["size_ratio", "calls_ratio"]
    assert len(rows) == 4
    for r in rows:
        for c in COLUMNS[2:] + ["size_ratio", "calls_ratio"]:
            float(r[c])
    for e_row, g_row in zip(rows[:2], rows[2:]):
        if e_row["size"] != "nan":
            assert float(e_row["size_ratio"]) == pytest.approx(float(e_row["size"]) / float(g_row["size"]))
        assert float(g_row["size_ratio"]) == 1.0


def test_summary_without_reference_has_no_ratios(graph_file):
    path, _ = graph_file
    text = emit_summary([run_stream(ExperimentConfig("domset", path, Q=10))])
    assert text.splitlines()[0] == ",".join(COLUMNS)


def test_summary_roundtrip(tmp_path, graph_file):
    path, _ = graph_file
    cfg = ExperimentConfig("domset", path, q_frac=0.7, memory=64)
    out = tmp_path / "s.csv"
    out.write_text(emit_summary([run_stream(cfg)]))
    rows = read_summary(out)
    assert rows[0]["algorithm"] == "esc" and rows[0]["M"] == 64.0


def test_emit_requires_reports():
    with pytest.raises(ValueError):
        emit_summary([])


def test_missing_input():
    with pytest.raises(ConfigError):
        run_stream(ExperimentConfig("domset", Q=1))
    with pytest.raises(ConfigError):
        run_stream(ExperimentConfig("domset", "/nonexistent/file", Q=1))


def test_offline_adjacency(adj_file, graph_file):
    _, g = graph_file
    p = open_offline(ExperimentConfig("vcover", adj_file, format="adj", Q=1))
    assert p.f_total == g.num_edges and p.ground_size == g.n
