"""Command-line entry point: ``netrecon <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import sys
import warnings
from pathlib import Path

from .evaluation import auc, precision_at_e
from .graph import GeneratorParams, GraphError, generate, load_dataset, load_edge_list, stats_row, STATS_HEADER, \
    write_edge_list
from .harness import (SWEEP_HEADER, ExperimentSpec, StageError, resolve_beta, run_benchmark, sweep_beta,
                      write_benchmark, write_outputs)
from .similarity import parse_metrics, read_scores, similarity_scores, write_scores
from .spreading import SpreadParams, read_cascades, run_cascades, write_cascades

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _add_graph_source(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--graph", help="edge-list file")
    g.add_argument("--dataset", help="bundled network name (zkc)")
    p.add_argument("--id-mode", choices=["remap", "dense"], default="remap")


def _add_spread(p):
    p.add_argument("--model", choices=["sir", "si", "ltm"])
    p.add_argument("--beta", type=float)
    p.add_argument("--beta-mult", type=float, help="beta as a multiple of the epidemic threshold")
    p.add_argument("--mu", type=float)
    p.add_argument("--f", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--m", type=int, help="cascades per repeat")
    p.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="netrecon", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="write a synthetic BA or SW network")
    p.add_argument("--model", choices=["ba", "sw"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True, help="mean degree")
    p.add_argument("--m0", type=int, help="BA seed-graph size (default k)")
    p.add_argument("--p", type=float, default=0.1, help="SW rewiring probability")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="edge-list path")

    p = sub.add_parser("stats", help="graph statistics as CSV")
    p.add_argument("graphs", nargs="*", help="edge-list files")
    p.add_argument("--dataset", action="append", default=[])
    p.add_argument("--id-mode", choices=["remap", "dense"], default="remap")
    p.add_argument("--out")

    p = sub.add_parser("simulate", help="run cascades and write node,item,time")
    _add_graph_source(p)
    _add_spread(p)
    p.add_argument("--out")

    p = sub.add_parser("score", help="similarity scores from a cascade log")
    p.add_argument("--cascades", required=True)
    p.add_argument("--n", type=int, help="node count (default: from --graph or the log)")
    _add_graph_source(p, required=False)
    p.add_argument("--metrics", default="all")
    p.add_argument("--top-k", type=int, default=10000, help="pairs kept for PA dumps")
    p.add_argument("--out", required=True, help="output directory, one <METRIC>.csv per metric")

    p = sub.add_parser("evaluate", help="precision@E and AUC of score files")
    p.add_argument("scores", nargs="+")
    _add_graph_source(p)
    p.add_argument("--out")

    for name, helptext in (("benchmark", "full pipeline with repeats"),
                           ("sweep-beta", "benchmark over a grid of beta values")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="experiment JSON or a run manifest to replay")
        p.add_argument("--graph", action="append", default=[])
        p.add_argument("--dataset", action="append", default=[])
        p.add_argument("--id-mode", choices=["remap", "dense"], default="remap")
        p.add_argument("--generator", choices=["ba", "sw"])
        p.add_argument("--n", type=int)
        p.add_argument("--k", type=int)
        p.add_argument("--m0", type=int)
        p.add_argument("--p", type=float)
        p.add_argument("--graph-seed", type=int, default=0)
        _add_spread(p)
        p.add_argument("--repeats", type=int)
        p.add_argument("--metrics")
        p.add_argument("--auc-samples", type=int)
        p.add_argument("--out", required=True, help="output directory")
        if name == "sweep-beta":
            p.add_argument("--betas", type=_floats)
            p.add_argument("--beta-mults", type=_floats)
    return parser


def _load_graph(args):
    if getattr(args, "dataset", None):
        return load_dataset(args.dataset)
    return load_edge_list(Path(args.graph), id_mode=args.id_mode)


def _open_out(path):
    return open(path, "w", newline="", encoding="utf-8") if path else sys.stdout


def cmd_generate(args):
    params = GeneratorParams(model=args.model, n=args.n, k_avg=args.k, m0=args.m0, p=args.p, seed=args.seed)
    g = generate(params)
    with open(args.out, "w", encoding="utf-8") as fh:
        write_edge_list(g, fh)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(STATS_HEADER)
    w.writerow(stats_row(Path(args.out).stem, g))


def cmd_stats(args):
    if not args.graphs and not args.dataset:
        raise UsageError("give edge-list files or --dataset")
    rows = [stats_row(Path(p).stem, load_edge_list(Path(p), id_mode=args.id_mode)) for p in args.graphs]
    rows += [stats_row(name, load_dataset(name)) for name in args.dataset]
    fh = _open_out(args.out)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(STATS_HEADER)
        w.writerows(rows)
    finally:
        if fh is not sys.stdout:
            fh.close()


def _spread_from_args(args, g):
    model = args.model or "sir"
    beta = None
    if model in ("sir", "si"):
        beta, _ = resolve_beta(g, args.beta, args.beta_mult)
    return SpreadParams(model=model, beta=beta, mu=args.mu, f=0.5 if args.f is None else args.f,
                        theta=args.theta, max_steps=args.max_steps)


def cmd_simulate(args):
    g = _load_graph(args)
    try:
        params = _spread_from_args(args, g)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    cs = run_cascades(g, params, args.m or 50, args.seed or 0)
    fh = _open_out(args.out)
    try:
        write_cascades(cs, fh)
    finally:
        if fh is not sys.stdout:
            fh.close()


def cmd_score(args):
    n = args.n
    if n is None and (args.graph or args.dataset):
        n = _load_graph(args).n
    with open(args.cascades, encoding="utf-8") as fh:
        cs = read_cascades(fh, n=n)
    try:
        specs = parse_metrics(args.metrics)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    scores = similarity_scores(cs, specs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for spec, s in scores.items():
        with open(out / f"{spec.display_name}.csv", "w", newline="", encoding="utf-8") as fh:
            write_scores(s, fh, top_k=args.top_k if spec.cls == "PA" else None)


def cmd_evaluate(args):
    g = _load_graph(args)
    rows = []
    for path in args.scores:
        with open(path, encoding="utf-8") as fh:
            s = read_scores(fh, g.n)
        rows.append([Path(path).stem, format(precision_at_e(s, g), ".12g"), format(auc(s, g), ".12g")])
    fh = _open_out(args.out)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric", "precision", "auc"])
        w.writerows(rows)
    finally:
        if fh is not sys.stdout:
            fh.close()


def _experiment_from_args(args) -> ExperimentSpec:
    base = ExperimentSpec.from_file(args.config).to_dict() if args.config else {"networks": []}
    nets = [{"name": Path(p).stem, "path": p, "id_mode": args.id_mode} for p in args.graph]
    nets += [{"name": d, "dataset": d} for d in args.dataset]
    if args.generator:
        if args.n is None or args.k is None:
            raise UsageError("--generator needs --n and --k")
        gen = {"model": args.generator, "n": args.n, "k_avg": args.k, "m0": args.m0,
               "p": 0.1 if args.p is None else args.p, "seed": args.graph_seed}
        nets.append({"name": f"{args.generator}_n{args.n}_k{args.k}", "generator": gen})
    if nets:
        base["networks"] = nets
    overrides = {"model": args.model, "mu": args.mu, "f": args.f, "theta": args.theta,
                 "max_steps": args.max_steps, "m": args.m, "repeats": args.repeats,
                 "master_seed": args.seed, "auc_samples": args.auc_samples, "output_dir": args.out}
    if args.metrics is not None:
        overrides["metrics"] = args.metrics.split(",")
    if args.beta is not None or args.beta_mult is not None:
        overrides["beta"], overrides["beta_mult"] = args.beta, args.beta_mult
        base["beta"] = base["beta_mult"] = None
    base.update({k: v for k, v in overrides.items() if v is not None})
    if base.get("model") == "ltm":
        base["beta"] = base["beta_mult"] = None
    return ExperimentSpec.from_dict(base)


def cmd_benchmark(args):
    spec = _experiment_from_args(args)
    res = run_benchmark(spec)
    write_benchmark(res, args.out)
    print(f"wrote {len(res.report)} rows to {args.out}", file=sys.stderr)


def cmd_sweep(args):
    args.beta = args.beta_mult = None
    spec = _experiment_from_args(args)
    rows, manifests = sweep_beta(spec, betas=args.betas, beta_mults=args.beta_mults)
    write_outputs(args.out, {"sweep.csv": (SWEEP_HEADER, rows)},
                  {"tool": "netrecon", "spec": spec.to_dict(), "betas": args.betas,
                   "beta_mults": args.beta_mults, "points": manifests})


COMMANDS = {"generate": cmd_generate, "stats": cmd_stats, "simulate": cmd_simulate, "score": cmd_score,
            "evaluate": cmd_evaluate, "benchmark": cmd_benchmark, "sweep-beta": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    warnings.simplefilter("default")
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"netrecon {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as exc:
        print(f"netrecon {args.command}: stage {exc.stage} failed: {exc.cause}", file=sys.stderr)
        return EXIT_DATA
    except (GraphError, ValueError, OSError) as exc:
        print(f"netrecon {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
