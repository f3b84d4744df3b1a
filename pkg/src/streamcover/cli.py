"""Command-line front end.

Exit status: 0 on success, 2 when every query answered "Assumption Violated"
(or no baseline milestone was reached), 1 on errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .experiments import (
    FORMATS,
    UTILITIES,
    ConfigError,
    ExperimentConfig,
    emit_summary,
    open_offline,
    read_summary,
    rows_to_csv,
    run_baseline,
    run_stream,
)
from .hard import TreeSpec, build_instance, random_pointer_input
from .oracle import InputFormatError, OracleError, check_submodular_monotone


def _eps_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad epsilon list {text!r}") from None


def _run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--utility", choices=UTILITIES, required=True)
    p.add_argument("--input", type=Path)
    p.add_argument("--format", choices=FORMATS)
    q = p.add_mutually_exclusive_group(required=True)
    q.add_argument("--Q", type=float, help="absolute target utility")
    q.add_argument("--q-frac", type=float, help="target as a fraction of f(V)")
    p.add_argument("--f-total", type=float, help="known f(V), needed for --q-frac with logdet")
    p.add_argument("--memory", type=int, default=2 ** 15, help="memory budget M in stored-element slots")
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--eps-tilde", type=_eps_list, default=[0.5], help="comma-separated list")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--bandwidth", type=float, help="kernel bandwidth h (default: median pairwise distance)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timing", action="store_true", help="fill the ms column with wall time")
    p.add_argument("--out", type=Path, help="CSV output (default: stdout)")
    p.add_argument("--figures", type=Path, help="also render figures into this directory")


def _config(args) -> ExperimentConfig:
    return ExperimentConfig(
        utility=args.utility, input=args.input, format=args.format, Q=args.Q,
        q_frac=args.q_frac, memory=args.memory, alpha=args.alpha, eps_tilde=args.eps_tilde,
        sigma=args.sigma, bandwidth=args.bandwidth, seed=args.seed, f_total=args.f_total,
        timing=args.timing)


def _write(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _figures(args, rows) -> None:
    if getattr(args, "figures", None) is not None:
        from .plotting import render_figures

        for path in render_figures(rows, args.figures):
            print(f"wrote {path}", file=sys.stderr)


def cmd_stream(args) -> int:
    report = run_stream(_config(args))
    fp = report.sieve.footprint()
    print(f"stored {fp.stored} ids in {fp.levels} levels (capacity sum {fp.capacity_sum} <= M={args.memory} slots); "
          f"estimated {fp.estimated_bytes} bytes including oracle state. "
          "M counts element slots, not bytes.", file=sys.stderr)
    if args.snapshot is not None:
        report.sieve.save(args.snapshot)
    _write(emit_summary([report]), args.out)
    _figures(args, report.rows)
    return 2 if report.all_violated else 0


def cmd_baseline(args) -> int:
    report = run_baseline(_config(args), args.command)
    if args.trace is not None:
        args.trace.write_text(report.trace.to_csv())
    _write(emit_summary([report]), args.out)
    _figures(args, report.rows)
    return 2 if report.all_violated else 0


def cmd_gen_hard(args) -> int:
    spec = TreeSpec(args.t, args.k, args.ell)
    rng = np.random.default_rng(args.seed)
    hard = build_instance(spec, random_pointer_input(spec, rng, args.case))
    inst = hard.shuffled(rng) if args.shuffle else hard.instance
    if args.out is None:
        sys.stdout.write(inst.dumps())
        print(hard.metadata(), file=sys.stderr)
        return 0
    inst.write(args.out)
    meta = args.out.with_name(args.out.name + ".meta")
    meta.write_text("# t k ell case path-leaf Q\n" + hard.metadata() + "\n")
    print(f"wrote {args.out} ({inst.m} sets) and {meta}", file=sys.stderr)
    return 0


def cmd_check(args) -> int:
    if args.input is None and args.utility is None:
        problems = _synthetic_problems(args.seed)
    else:
        if args.utility is None:
            raise ConfigError("--utility is required with --input")
        cfg = ExperimentConfig(utility=args.utility, input=args.input, format=args.format, Q=1.0,
                               sigma=args.sigma, bandwidth=args.bandwidth)
        problems = {args.utility: open_offline(cfg)}
    failed = 0
    for name, problem in problems.items():
        universe = range(min(problem.ground_size, args.max_elements))
        rep = check_submodular_monotone(problem.oracle, universe, args.trials, args.seed)
        ok = rep.ok
        print(f"{'PASS' if ok else 'FAIL'} submodular/monotone {name}: {rep.violations} violations "
              f"in {rep.trials} chains, worst gap {rep.worst_gap:.3g}")
        rng = np.random.default_rng(args.seed)
        worst = 0.0
        for _ in range(20):
            k = int(rng.integers(0, len(universe) + 1))
            S = [int(x) for x in rng.choice(np.asarray(universe), size=k, replace=False)]
            inc = problem.oracle.value(problem.oracle.state_of(S))
            ref = problem.oracle.evaluate(S)
            worst = max(worst, abs(inc - ref) / max(1.0, abs(ref)))
        ok_ref = worst <= 1e-8
        print(f"{'PASS' if ok_ref else 'FAIL'} incremental vs recompute {name}: worst relative error {worst:.3g}")
        failed += (not ok) + (not ok_ref)
    return 1 if failed else 0


def _synthetic_problems(seed: int) -> dict:
    from .experiments import Problem
    from .oracle import CoverInstance
    from .utilities import (DominatingSetOracle, Graph, KernelConfig, LogDetOracle,
                            SetCoverOracle, VertexCoverOracle, median_pairwise_distance)

    rng = np.random.default_rng(seed)
    n = 30
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.15]
    g = Graph.from_edges(edges, n)
    inst = CoverInstance(25, [sorted(set(rng.integers(0, 25, rng.integers(1, 7)).tolist())) for _ in range(30)])
    pts = rng.normal(size=(40, 5))
    kc = KernelConfig(pts, 1.0, median_pairwise_distance(pts))
    return {
        "domset": Problem(DominatingSetOracle(g), range(n), n, n),
        "vcover": Problem(VertexCoverOracle(g), range(n), g.num_edges, n),
        "setcover": Problem(SetCoverOracle(inst), range(inst.m), inst.n, inst.m),
        "logdet": Problem(LogDetOracle(kc), range(40), None, 40),
    }


def cmd_report(args) -> int:
    rows = [r for path in args.csv for r in read_summary(path)]
    if not rows:
        raise ConfigError("no rows in the given summaries")
    _write(rows_to_csv(rows), args.out)
    _figures(args, rows)
    return 0 if any(not math.isnan(r["size"]) for r in rows) else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="streamcover",
                                     description="One-pass streaming submodular cover experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stream", help="one streaming pass, then answer every eps-tilde")
    _run_args(p)
    p.add_argument("--snapshot", type=Path, help="write the sieve state here")
    p.set_defaults(func=cmd_stream)

    for name, text in [("greedy", "offline eager greedy"), ("lazy", "offline lazy greedy"),
                       ("random", "random-permutation baseline")]:
        p = sub.add_parser(name, help=text)
        _run_args(p)
        p.add_argument("--trace", type=Path, help="write per-pick trace CSV here")
        p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("gen-hard", help="write a tree-derived hard set-cover instance")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--case", type=int, choices=(0, 1), default=1, help="bit at the pointer-path leaf")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shuffle", action="store_true", help="shuffle the stream order")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_gen_hard)

    p = sub.add_parser("check", help="submodularity and incremental-vs-recompute checks")
    p.add_argument("--utility", choices=UTILITIES)
    p.add_argument("--input", type=Path)
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--bandwidth", type=float)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--max-elements", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("report", help="merge summary CSVs and render figures")
    p.add_argument("csv", nargs="+", type=Path)
    p.add_argument("--out", type=Path)
    p.add_argument("--figures", type=Path)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InputFormatError, OracleError, ValueError, OSError) as exc:
        print(f"streamcover: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
