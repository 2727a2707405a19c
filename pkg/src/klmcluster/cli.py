"""Command-line entry point: ``klmcluster <subcommand> ...``.

Exit codes: 0 success, 1 a checked threshold failed, 2 usage or input error.
Every output starts with ``#`` metadata lines; the rest is CSV or plain text.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dualrail import correspondence_suite
from .graphstate import GraphError, loads_graph
from .growth import (GateModel, GrowthError, GrowthStats, frontier_schedule, grow_alternating,
                     grow_cluster, ladder, resource_report, run_trials)
from .graphstate import ClusterGraph
from .mbqc import CircuitError, compile_circuit, loads_circuit, verify_all_branches, verify_equivalence
from .microcluster import RULES, GlueError, dangling_scaling, glue_success_probability, glue_trials
from .rng import RngStream

FIDELITY_TOL = 1e-9


class UsageError(Exception):
    pass


def _num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return f"{x:.10g}" if math.isfinite(x) else ""


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _circuit(path: str):
    try:
        return loads_circuit(_read(path))
    except CircuitError as exc:
        raise UsageError(f"{path}: {exc}") from None


class Output:
    """Collects header lines and a body; written once at the end."""

    def __init__(self, args, command: str, **meta):
        self.lines = [f"# klmcluster {command}", f"# version: {__version__}"]
        for key in ("seed", "trials"):
            if getattr(args, key, None) is not None:
                self.lines.append(f"# {key}: {getattr(args, key)}")
        if getattr(args, "model", None) is not None:
            self.lines.append(f"# model: n={args.model} ({GateModel(args.model)})")
        for k, v in meta.items():
            self.lines.append(f"# {k}: {v}")
        self.fmt = getattr(args, "format", "csv")

    def note(self, text: str) -> None:
        self.lines.append(f"# {text}")

    def table(self, header: list[str], rows: list[list]) -> None:
        rows = [[r if isinstance(r, str) else _num(r) for r in row] for row in rows]
        if self.fmt == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
            self.lines.extend(buf.getvalue().rstrip("\n").split("\n"))
        else:
            widths = [max(len(str(c)) for c in col) for col in zip(header, *rows)]
            for row in [header, *rows]:
                self.lines.append("  ".join(str(c).ljust(wd) for c, wd in zip(row, widths)).rstrip())

    def text(self, body: str) -> None:
        self.lines.extend(body.rstrip("\n").split("\n"))

    def render(self) -> str:
        return "\n".join(self.lines) + "\n"


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise UsageError(f"cannot write {path}: {exc.strerror}") from None


# subcommands --------------------------------------------------------------------

def cmd_simulate(args) -> int:
    c = _circuit(args.circuit)
    rng = RngStream(args.seed)
    rep = verify_all_branches(c) if args.exhaustive else verify_equivalence(c, args.trials, rng)
    ok = rep.passed(FIDELITY_TOL)
    out = Output(args, "simulate", input=args.circuit, mode="exhaustive" if args.exhaustive else "sampled")
    out.table(["trials", "min_fidelity", "mean_fidelity", "distinct_branches", "passed"],
              [[rep.trials, rep.min_fidelity, rep.mean_fidelity, len(rep.branch_counts), ok]])
    _emit(out.render(), args.out)
    return 0 if ok else 1


PER_TRIAL_COLUMNS = ["trial", "site_attempts", "gate_attempts", "gate_successes", "nodes_removed", "final_size"]
GROW_SUMMARY_COLUMNS = ["target", "sites", "trials", "completed", "attempts_per_site", "attempts_per_site_se",
                        "successes_per_site", "successes_per_site_se", "net_gain_per_attempt",
                        "net_gain_per_attempt_se", "mean_reseeds"]


def cmd_grow(args) -> int:
    model = GateModel(args.model)
    rng = RngStream(args.seed)
    if args.target == "alternating":
        size = args.sites
        fn = lambda r: grow_alternating(size, model, r, args.max_attempts)  # noqa: E731
    else:
        if args.target == "chain":
            g, order = ClusterGraph.path(args.sites), None
        elif args.target == "ladder":
            if args.sites % 2:
                raise UsageError("ladder targets need an even number of sites")
            g, order = ladder(args.sites // 2)
        else:
            if args.graph is None:
                raise UsageError("--target graph needs --graph FILE")
            try:
                g, order = loads_graph(_read(args.graph)), None
            except GraphError as exc:
                raise UsageError(f"{args.graph}: {exc}") from None
        size = len(g)
        fn = lambda r: grow_cluster(g, model, r, order, args.max_attempts)  # noqa: E731
    try:
        traces = run_trials(fn, args.trials, rng)
    except GrowthError as exc:
        raise UsageError(str(exc)) from None
    st = GrowthStats.from_traces(traces, size)
    out = Output(args, "grow", target=args.target)
    out.table(GROW_SUMMARY_COLUMNS, [[args.target, size, st.trials, st.completed,
                                      st.attempts_per_site.value, st.attempts_per_site.stderr,
                                      st.successes_per_site.value, st.successes_per_site.stderr,
                                      st.mean_net_gain_per_step.value, st.mean_net_gain_per_step.stderr,
                                      st.mean_reseeds]])
    _emit(out.render(), args.out)
    if args.per_trial:
        per = Output(args, "grow per-trial", target=args.target)
        per.fmt = "csv"
        per.table(PER_TRIAL_COLUMNS, [[i, t.counters.site_attempts, t.counters.gate_attempts,
                                       t.counters.gate_successes, t.counters.nodes_removed, t.final_size]
                                      for i, t in enumerate(traces)])
        _emit(per.render(), args.per_trial)
    return 0 if st.completed == st.trials else 1


def cmd_glue(args) -> int:
    model = GateModel(args.model)
    rng = RngStream(args.seed)
    rows, ok = [], True
    for i, k in enumerate(args.k):
        exact = glue_success_probability(k, model, args.rule)
        est = glue_trials(k, model, args.trials, rng.spawn(i), args.rule)
        ok &= est.within(float(exact), 3.0) or est.stderr == 0 and est.value == float(exact)
        rows.append([k, float(exact), est.value, est.stderr])
    out = Output(args, "glue", rule=args.rule)
    out.table(["k", "analytic_prob", "empirical_prob", "stderr"], rows)
    _emit(out.render(), args.out)
    return 0 if ok else 1


def cmd_dangling(args) -> int:
    model = GateModel(args.model)
    try:
        ks, c, b = dangling_scaling(args.sizes, args.success, model, args.rule)
    except GlueError as exc:
        raise UsageError(str(exc)) from None
    out = Output(args, "dangling", rule=args.rule, overall_success=args.success)
    out.note(f"fit: k = {_num(c)} * log2(s) + {_num(b)}")
    out.table(["s", "required_k", "glue_prob"],
              [[s, k, float(glue_success_probability(k, model, args.rule))] for s, k in zip(args.sizes, ks)])
    _emit(out.render(), args.out)
    return 0


def cmd_resources(args) -> int:
    c = _circuit(args.circuit)
    model = GateModel(args.model)
    rep = resource_report(c, model, args.trials, RngStream(args.seed), label_trials=args.label_trials)
    out = Output(args, "resources", input=args.circuit)
    if args.format == "csv":
        if not rep.viable:
            out.note("NOT VIABLE: non-positive growth drift; per-site figures are per layout node")
        out.table(["quantity", "measured", "stderr", "reference"], [list(r) for r in rep.rows()])
    else:
        out.text(rep.to_text())
    _emit(out.render(), args.out)
    expected = rep.analytic_successes_per_site
    if rep.viable and expected is not None and not rep.successes_per_site.within(float(expected), 3.0):
        return 1
    return 0


def cmd_compile(args) -> int:
    import json

    c = _circuit(args.circuit)
    p = compile_circuit(c)
    if args.format == "json":
        text = json.dumps(p.to_dict(), indent=2, sort_keys=True) + "\n"
    else:
        out = Output(args, "compile", input=args.circuit)
        out.text(f"nodes: {len(p.graph)}\nedges: {p.graph.num_edges()}\ncolumns: {p.num_columns()}\n"
                 f"vertical_edges: {len(p.vertical_edges())}")
        rows = []
        for v in p.graph.nodes:
            row, col = p.coords[v]
            r = p.records.get(v)
            rows.append([v, row, col, "" if r is None else r.base_angle, "" if r is None else r.time_label,
                         "" if r is None else " ".join(map(str, sorted(r.sign_dependencies)))])
        out.fmt = "text"
        out.table(["node", "row", "col", "angle", "time", "depends_on"], rows)
        text = out.render()
    _emit(text, args.out)
    return 0


def cmd_frontier(args) -> int:
    c = _circuit(args.circuit)
    try:
        rep = frontier_schedule(c, GateModel(args.model), args.trials, RngStream(args.seed), args.slack,
                                args.growth_rate)
    except GrowthError as exc:
        raise UsageError(str(exc)) from None
    out = Output(args, "frontier", input=args.circuit, growth_rate=args.growth_rate)
    out.table(["depth", "breadth", "slack", "total_nodes", "window_nodes", "peak_live", "mean_peak_live",
               "starvation_rate", "mean_stalls"],
              [[rep.depth, rep.breadth, rep.slack, rep.total_nodes, rep.window_nodes, rep.peak_live,
                rep.mean_peak_live, rep.starvation_rate, rep.mean_stalls]])
    _emit(out.render(), args.out)
    return 0


def cmd_dualrail_check(args) -> int:
    angles = RngStream(args.seed).angles(args.angles)
    checks = correspondence_suite(angles)
    out = Output(args, "dualrail-check", angles=args.angles)
    out.table(["check", "max_error", "tolerance", "result"],
              [[c.name, c.error, c.tolerance, "pass" if c.passed else "FAIL"] for c in checks])
    _emit(out.render(), args.out)
    return 0 if all(c.passed for c in checks) else 1


# parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="klmcluster", description="Cluster-state optical computing experiments.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, seed=True, trials=None, model=None, fmt=("csv", "text")):
        if seed:
            p.add_argument("--seed", type=_u64, required=True, help="master seed (unsigned 64-bit)")
        if trials is not None:
            p.add_argument("--trials", type=_positive, default=trials)
        if model is not None:
            p.add_argument("--model", type=int, choices=(1, 2), default=model,
                           help="gate model n: CZ succeeds with probability n^2/(n+1)^2")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--format", choices=fmt, default=fmt[0])

    p = sub.add_parser("simulate", help="check a circuit file against its measurement pattern")
    p.add_argument("circuit")
    p.add_argument("--exhaustive", action="store_true", help="enumerate every outcome branch")
    common(p, trials=64)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("grow", help="Monte Carlo cluster growth")
    p.add_argument("--target", choices=("alternating", "chain", "ladder", "graph"), default="alternating")
    p.add_argument("--sites", type=_positive, default=100)
    p.add_argument("--graph", help="edge-list file for --target graph")
    p.add_argument("--max-attempts", type=_positive)
    p.add_argument("--per-trial", metavar="PATH", help="also write per-trial counters as CSV")
    common(p, trials=1000, model=2)
    p.set_defaults(fn=cmd_grow)

    p = sub.add_parser("glue", help="microcluster gluing success rates")
    p.add_argument("--k", type=_positive, nargs="+", default=[1, 2, 4, 8], help="dangling nodes per side")
    p.add_argument("--rule", choices=RULES, default="retire")
    common(p, trials=10_000, model=1)
    p.set_defaults(fn=cmd_glue)

    p = sub.add_parser("dangling", help="dangling nodes needed for s glued sites")
    p.add_argument("--sizes", type=_positive, nargs="+", default=[10, 100, 1000])
    p.add_argument("--success", type=float, default=0.9, help="required overall success probability")
    p.add_argument("--rule", choices=RULES, default="retire")
    common(p, seed=False, model=1)
    p.set_defaults(fn=cmd_dangling)

    p = sub.add_parser("resources", help="gate and optical costs of growing a circuit's cluster")
    p.add_argument("circuit")
    p.add_argument("--label-trials", type=int, default=None, help="trials for label-exact layout growth")
    common(p, trials=2000, model=2)
    p.set_defaults(fn=cmd_resources)

    p = sub.add_parser("compile", help="compile a circuit file to its cluster layout")
    p.add_argument("circuit")
    common(p, seed=False, fmt=("json", "text"))
    p.set_defaults(fn=cmd_compile)

    p = sub.add_parser("frontier", help="grow-ahead schedule: peak live nodes and starvation")
    p.add_argument("circuit")
    p.add_argument("--slack", type=_positive, help="window in circuit layers (default 2*log2(depth+1))")
    p.add_argument("--growth-rate", type=float, default=3.0,
                   help="growth attempts per measured column, in units of the expected need")
    common(p, trials=1000, model=2)
    p.set_defaults(fn=cmd_frontier)

    p = sub.add_parser("dualrail-check", help="dual-rail optics correspondence table")
    p.add_argument("--angles", type=_positive, default=20)
    p.add_argument("--seed", type=_u64, default=0, help="seed for the random test angles")
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "text"), default="text")
    p.set_defaults(fn=cmd_dualrail_check)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"klmcluster: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
