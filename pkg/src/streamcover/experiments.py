"""Experiment orchestration: streaming runs, offline baselines, CSV summaries."""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .baselines import GreedyTrace, greedy_cover, lazy_greedy_cover, random_baseline
from .oracle import CallCounts, UtilityOracle, load_cover_instance
from .sieve import Sieve, SieveConfig
from .utilities import (
    AdjacencyStream,
    Graph,
    KernelConfig,
    SetStream,
    DominatingSetOracle,
    LogDetOracle,
    SetCoverOracle,
    VertexCoverOracle,
    load_points,
    median_pairwise_distance,
    read_edge_list,
)

UTILITIES = ("domset", "vcover", "setcover", "logdet")
FORMATS = ("edges", "adj", "points", "sets")
DEFAULT_FORMAT = {"domset": "edges", "vcover": "edges", "setcover": "sets", "logdet": "points"}
ALLOWED_FORMATS = {
    "domset": ("edges", "adj"),
    "vcover": ("edges", "adj"),
    "setcover": ("sets",),
    "logdet": ("points",),
}
COLUMNS = ["utility", "algorithm", "alpha", "M", "Q", "eps_tilde", "size",
           "f_achieved", "calls", "stored", "ms"]
RATIO_COLUMNS = ["size_ratio", "calls_ratio"]


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    utility: str
    input: Path | None = None
    format: str | None = None
    Q: float | None = None
    q_frac: float | None = None
    memory: int = 2 ** 15
    alpha: float = 2.0
    eps_tilde: Sequence[float] = (0.5,)
    sigma: float = 1.0
    bandwidth: float | None = None
    seed: int = 0
    f_total: float | None = None
    timing: bool = False

    def __post_init__(self) -> None:
        if self.utility not in UTILITIES:
            raise ConfigError(f"unknown utility {self.utility!r}; choose from {UTILITIES}")
        if self.format is None:
            self.format = DEFAULT_FORMAT[self.utility]
        if self.format not in ALLOWED_FORMATS[self.utility]:
            raise ConfigError(f"format {self.format!r} not supported for {self.utility}")
        if (self.Q is None) == (self.q_frac is None):
            raise ConfigError("give exactly one of Q and q_frac")
        if self.Q is not None and self.Q <= 0:
            raise ConfigError("Q must be positive")
        if self.q_frac is not None and not (0 < self.q_frac <= 1):
            raise ConfigError("q_frac must lie in (0, 1]")
        eps = sorted({float(e) for e in self.eps_tilde}, reverse=True)
        if not eps or any(not (0 < e < 1) for e in eps):
            raise ConfigError("eps_tilde values must lie in (0, 1)")
        self.eps_tilde = tuple(eps)
        if self.input is not None:
            self.input = Path(self.input)


@dataclass
class RunReport:
    utility: str
    algorithm: str
    alpha: float
    memory: float
    Q: float
    rows: list[dict] = field(default_factory=list)
    query_calls: CallCounts = CallCounts()
    trace: GreedyTrace | None = None
    sieve: Sieve | None = None
    lines_read: int = 0
    passes: int = 0

    def add(self, **row) -> None:
        base = {"utility": self.utility, "algorithm": self.algorithm, "alpha": self.alpha,
                "M": self.memory, "Q": self.Q}
        base.update(row)
        self.rows.append(base)

    @property
    def all_violated(self) -> bool:
        return bool(self.rows) and all(math.isnan(r["size"]) for r in self.rows)


class CountingReader:
    """Line iterator that records how many lines were read and how many passes began."""

    def __init__(self, lines: Iterable[str]):
        self._lines = lines
        self.lines_read = 0
        self.passes = 0

    def close(self) -> None:
        close = getattr(self._lines, "close", None)
        if close is not None:
            close()

    def __iter__(self) -> Iterator[str]:
        self.passes += 1
        for line in self._lines:
            self.lines_read += 1
            yield line


@dataclass
class Problem:
    oracle: UtilityOracle
    stream: Iterable[int]
    f_total: float | None
    ground_size: int


def _open_lines(config: ExperimentConfig) -> CountingReader:
    if config.input is None:
        raise ConfigError("--input is required")
    try:
        return CountingReader(open(config.input))
    except OSError as exc:
        raise ConfigError(f"cannot read {config.input}: {exc.strerror}") from None


def _points_problem(config: ExperimentConfig) -> Problem:
    pts = load_points(config.input)
    h = config.bandwidth if config.bandwidth is not None else median_pairwise_distance(pts)
    oracle = LogDetOracle(KernelConfig(pts, config.sigma, h))
    return Problem(oracle, range(len(pts)), config.f_total, len(pts))


def open_stream(config: ExperimentConfig) -> tuple[Problem, CountingReader | None]:
    """Oracle plus a one-pass element stream for the configured input."""
    if config.format == "points":
        return _points_problem(config), None
    reader = _open_lines(config)
    path = str(config.input)
    if config.format == "edges":
        graph = Graph.from_edges(read_edge_list(reader, path))
        oracle = DominatingSetOracle(graph) if config.utility == "domset" else VertexCoverOracle(graph)
        total = graph.n if config.utility == "domset" else graph.num_edges
        return Problem(oracle, range(graph.n), total, graph.n), reader
    if config.format == "adj":
        adj = AdjacencyStream(reader, path)
        oracle = DominatingSetOracle(adj) if config.utility == "domset" else VertexCoverOracle(adj)
        total = adj.n if config.utility == "domset" else adj.num_edges
        return Problem(oracle, adj, total, adj.n), reader
    sets = SetStream(reader, path)
    return Problem(SetCoverOracle(sets), sets, sets.n, sets.m), reader


def open_offline(config: ExperimentConfig) -> Problem:
    """Fully materialized problem for algorithms that need random access."""
    if config.format == "points":
        return _points_problem(config)
    if config.input is None:
        raise ConfigError("--input is required")
    path = str(config.input)
    if config.format == "sets":
        inst = load_cover_instance(config.input)
        return Problem(SetCoverOracle(inst), range(inst.m), inst.n, inst.m)
    with open(config.input) as fh:
        if config.format == "edges":
            graph = Graph.from_edges(read_edge_list(fh, path))
        else:
            adj = AdjacencyStream(fh, path)
            edges = [(v, int(u)) for v in adj for u in adj.neighbors(v)]
            graph = Graph.from_edges(edges, adj.n)
    oracle = DominatingSetOracle(graph) if config.utility == "domset" else VertexCoverOracle(graph)
    total = graph.n if config.utility == "domset" else graph.num_edges
    return Problem(oracle, range(graph.n), total, graph.n)


def resolve_Q(config: ExperimentConfig, f_total: float | None) -> float:
    if config.Q is not None:
        return float(config.Q)
    if f_total is None:
        raise ConfigError(
            f"fractional Q for {config.utility} needs f(V); supply it with --f-total "
            "(e.g. from a prior greedy run) or give an absolute --Q")
    return config.q_frac * f_total


def run_stream(config: ExperimentConfig) -> RunReport:
    problem, reader = open_stream(config)
    try:
        Q = resolve_Q(config, problem.f_total)
        sieve = Sieve(SieveConfig(config.memory, config.alpha, Q), problem.oracle)
        t0 = time.perf_counter()
        sieve.run(problem.stream)
        ms = 1000 * (time.perf_counter() - t0) if config.timing else 0.0
    finally:
        if reader is not None:
            reader.close()
    phase1 = sieve.calls
    report = RunReport(config.utility, "esc", config.alpha, config.memory, Q, sieve=sieve)
    if reader is not None:
        report.lines_read, report.passes = reader.lines_read, reader.passes
    before = problem.oracle.counter.snapshot()
    stored = sieve.footprint().stored
    for eps in config.eps_tilde:
        res = sieve.query(eps)
        report.add(eps_tilde=eps,
                   size=float(len(res.members)) if res.found else math.nan,
                   f_achieved=res.utility, calls=phase1.gain, stored=stored, ms=ms)
    report.query_calls = problem.oracle.counter.snapshot() - before
    return report


def run_baseline(config: ExperimentConfig, algorithm: str) -> RunReport:
    problem = open_offline(config)
    Q = resolve_Q(config, problem.f_total)
    ground = range(problem.ground_size)
    smallest = min(config.eps_tilde)
    t0 = time.perf_counter()
    if algorithm == "greedy":
        trace = greedy_cover(problem.oracle, ground, Q, smallest)
    elif algorithm == "lazy":
        trace = lazy_greedy_cover(problem.oracle, ground, Q, smallest)
    elif algorithm == "random":
        trace = random_baseline(problem.oracle, ground, (1 - smallest) * Q, config.seed)
    else:
        raise ConfigError(f"unknown baseline {algorithm!r}")
    ms = 1000 * (time.perf_counter() - t0) if config.timing else 0.0
    report = RunReport(config.utility, algorithm, math.nan, problem.ground_size, Q, trace=trace)
    for eps in config.eps_tilde:
        size = trace.milestone((1 - eps) * Q)
        if size is None:
            report.add(eps_tilde=eps, size=math.nan, f_achieved=math.nan,
                       calls=trace.counts.gain, stored=problem.ground_size, ms=ms)
            continue
        report.add(eps_tilde=eps, size=float(size),
                   f_achieved=trace.utilities[size - 1] if size else 0.0,
                   calls=trace.calls[size - 1] if size else 0,
                   stored=problem.ground_size, ms=ms)
    return report


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return f"{x:.12g}"


def _ratio(a: float, b: float) -> float:
    if math.isnan(a) or math.isnan(b) or b == 0:
        return math.nan
    return a / b


def emit_summary(reports: Sequence[RunReport]) -> str:
    """Merge report rows into one CSV.

    Ratio columns (size and calls relative to the eager-greedy row with the same
    utility, Q and eps_tilde; lazy greedy if no eager run is present) are added
    when such a reference report exists.
    """
    if not reports:
        raise ValueError("need at least one report")
    rows = [r for rep in reports for r in rep.rows]
    return rows_to_csv(rows)


def rows_to_csv(rows: Sequence[dict]) -> str:
    ref: dict[tuple, dict] = {}
    for preferred in ("lazy", "greedy"):
        for r in rows:
            if r["algorithm"] == preferred:
                ref[(r["utility"], _fmt(r["Q"]), _fmt(r["eps_tilde"]))] = r
    columns = COLUMNS + (RATIO_COLUMNS if ref else [])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        out = [_fmt(r[c]) for c in COLUMNS]
        if ref:
            g = ref.get((r["utility"], _fmt(r["Q"]), _fmt(r["eps_tilde"])))
            if g is None:
                out += ["nan", "nan"]
            else:
                out += [_fmt(_ratio(float(r["size"]), float(g["size"]))),
                        _fmt(_ratio(float(r["calls"]), float(g["calls"])))]
        w.writerow(out)
    return buf.getvalue()


def read_summary(path: str | Path) -> list[dict]:
    """Rows of a summary CSV with numeric cells parsed to floats."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        for c in COLUMNS:
            if c not in ("utility", "algorithm"):
                r[c] = float(r[c])
    return rows
