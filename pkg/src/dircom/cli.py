"""Command-line front end.

Every subcommand writes a self-describing artifact: JSON and delimited
outputs embed the resolved configuration and the library version, contain
no timestamps, and are byte-identical across repeated runs with the same
flags and seed. Exit codes: 0 success, 1 validation/usage error, 2
numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .detect import FIRST_NONNEGATIVE, GREEDY, agglomerative_detect
from .errors import ConvergenceError, ValidationError
from .graph import load_edge_list_file
from .measures import (
    Partition,
    centrality,
    community_strength,
    is_community,
    modularity,
    relative_centrality,
)
from .sampling import BivariateDistribution, SamplerSpec, sampled_distribution
from .sbm import DIRECTED, UNDIRECTED, run_experiment
from .report import render_benchmark_figure, render_modularity_curve


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the CLI contract reserves 2 for
    # non-convergence, so remap usage problems to exit code 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_sampler_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--sampler", choices=["simple", "pagerank", "backward"],
                     default="backward", help="walk used to sample the graph")
    sub.add_argument("--lambda", dest="damping", type=float, default=0.9,
                     metavar="L", help="PageRank damping factor")
    sub.add_argument("--l0", type=float, default=0.05, help="self-loop weight")
    sub.add_argument("--l1", type=float, default=0.85, help="forward-edge weight")
    sub.add_argument("--l2", type=float, default=0.1, help="backward-edge weight")
    sub.add_argument("--tol", type=float, default=1e-10,
                     help="stationary-distribution residual tolerance")
    sub.add_argument("--max-iter", type=int, default=None,
                     help="power iteration cap (default 100n + 1000)")


def _add_input_flags(sub: argparse.ArgumentParser, allow_bivariate: bool = True) -> None:
    sub.add_argument("--input", help="edge-list file (src<TAB>dst[<TAB>weight])")
    if allow_bivariate:
        sub.add_argument("--bivariate",
                         help="precomputed bivariate-distribution file (skips sampling)")


def _sampler_spec(args) -> SamplerSpec:
    return SamplerSpec(
        kind=args.sampler,
        damping=args.damping,
        self_weight=args.l0,
        forward_weight=args.l1,
        backward_weight=args.l2,
    )


def _resolve_distribution(args) -> tuple[BivariateDistribution, tuple[str, ...]]:
    """Sample the input graph, or load a stored distribution (labels become
    the stringified indices)."""
    if getattr(args, "bivariate", None):
        if args.input:
            raise ValidationError("--input and --bivariate are mutually exclusive")
        with open(args.bivariate, "r", encoding="utf-8") as fh:
            p = BivariateDistribution.load(fh)
        return p, tuple(str(i) for i in range(p.n))
    if not args.input:
        raise ValidationError("an --input edge list is required")
    g = load_edge_list_file(args.input)
    p = sampled_distribution(g, _sampler_spec(args), tol=args.tol, max_iter=args.max_iter)
    return p, g.labels


def _config_echo(args, command: str) -> dict:
    skip = {"func"}
    cfg = {k: v for k, v in vars(args).items() if k not in skip}
    cfg["command"] = command
    cfg.setdefault("seed", None)
    return cfg


def _emit(args, command: str, result: dict) -> None:
    artifact = {
        "config": _config_echo(args, command),
        "version": __version__,
        "result": result,
    }
    text = json.dumps(artifact, indent=2, sort_keys=True) + "\n"
    if getattr(args, "output", None):
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _parse_indices(text: str, what: str) -> list[int]:
    try:
        value = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{what} must be a JSON list of indices: {exc}") from None
    if not isinstance(value, list) or not all(isinstance(i, int) for i in value):
        raise ValidationError(f"{what} must be a JSON list of integer indices")
    return value


def _parse_partition(text: str) -> list[list[int]]:
    try:
        value = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"--partition must be JSON: {exc}") from None
    if not isinstance(value, list) or not all(
        isinstance(s, list) and all(isinstance(i, int) for i in s) for s in value
    ):
        raise ValidationError("--partition must be a JSON list of index lists")
    return value


def _labelled(indices, labels) -> list[str]:
    return [labels[i] for i in sorted(set(indices))]


def _cmd_centrality(args) -> int:
    p, labels = _resolve_distribution(args)
    s = _parse_indices(args.set, "--set")
    _emit(args, "centrality", {"set": _labelled(s, labels), "centrality": centrality(p, s)})
    return 0


def _cmd_relcen(args) -> int:
    p, labels = _resolve_distribution(args)
    s1 = _parse_indices(args.set1, "--set1")
    s2 = _parse_indices(args.set2, "--set2")
    _emit(args, "relcen", {
        "set1": _labelled(s1, labels),
        "set2": _labelled(s2, labels),
        "relative_centrality": relative_centrality(p, s1, s2),
    })
    return 0


def _cmd_strength(args) -> int:
    p, labels = _resolve_distribution(args)
    s = _parse_indices(args.set, "--set")
    check = is_community(p, s)
    _emit(args, "strength", {
        "set": _labelled(s, labels),
        "strength": community_strength(p, s),
        "centrality": centrality(p, s),
        "is_community": check.is_community,
    })
    return 0


def _cmd_modularity(args) -> int:
    p, labels = _resolve_distribution(args)
    part = Partition.from_lists(p.n, _parse_partition(args.partition))
    _emit(args, "modularity", {
        "partition": [_labelled(s, labels) for s in part.sets],
        "modularity": modularity(p, part),
    })
    return 0


def _cmd_sample(args) -> int:
    p, _ = _resolve_distribution(args)
    comments = [
        f"config: {json.dumps(_config_echo(args, 'sample'), sort_keys=True)}",
        f"version: {__version__}",
    ]
    with open(args.output, "w", encoding="utf-8") as fh:
        p.save(fh, comments=comments)
    return 0


def _cmd_detect(args) -> int:
    p, labels = _resolve_distribution(args)
    stop = args.stop
    if stop != "natural":
        if not stop.startswith("k="):
            raise ValidationError("--stop must be 'natural' or 'k=<count>'")
        try:
            stop = int(stop[2:])
        except ValueError:
            raise ValidationError(f"bad --stop value {args.stop!r}") from None
    trace = agglomerative_detect(p, policy=args.policy, stop=stop)
    _emit(args, "detect", {
        "communities": [[labels[i] for i in s] for s in trace.partition.sets],
        "self_correlation": list(trace.self_correlation),
        "strength": list(trace.strength),
        "modularity": trace.modularity,
        "initial_modularity": trace.initial_modularity,
        "negative_merges": trace.negative_merges,
        "merge_trace": [
            {
                "step": r.step,
                "set_a": r.set_a,
                "set_b": r.set_b,
                "new_set": r.new_set,
                "pair_correlation": r.pair_correlation,
                "avg_correlation": r.avg_correlation,
                "modularity": r.modularity,
            }
            for r in trace.records
        ],
    })
    if args.dendrogram:
        with open(args.dendrogram, "w", encoding="utf-8") as fh:
            fh.write(f"# config: {json.dumps(_config_echo(args, 'detect'), sort_keys=True)}\n")
            fh.write(f"# version: {__version__}\n")
            fh.write("step,set_a,set_b,new_set,pair_correlation,avg_correlation,modularity\n")
            for r in trace.records:
                fh.write(
                    f"{r.step},{r.set_a},{r.set_b},{r.new_set},"
                    f"{r.pair_correlation!r},{r.avg_correlation!r},{r.modularity!r}\n"
                )
    if args.figure:
        render_modularity_curve(trace, args.figure)
    return 0


def _parse_grid(text: str) -> list[float]:
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValidationError("--grid range must be start:stop:step")
        try:
            start, stop, step = (float(x) for x in parts)
        except ValueError:
            raise ValidationError(f"bad --grid value {text!r}") from None
        if step <= 0 or stop < start:
            raise ValidationError("--grid range needs stop >= start and step > 0")
        count = int(round((stop - start) / step)) + 1
        return [round(start + i * step, 10) for i in range(count)]
    try:
        return [float(x) for x in text.split(",") if x]
    except ValueError:
        raise ValidationError(f"bad --grid value {text!r}") from None


def _cmd_sbm_bench(args) -> int:
    kinds = [k.strip() for k in args.samplers.split(",") if k.strip()]
    specs = []
    for kind in kinds:
        if kind not in ("simple", "pagerank", "backward"):
            raise ValidationError(f"unknown sampler {kind!r}")
        specs.append(SamplerSpec(
            kind=kind, damping=args.damping, self_weight=args.l0,
            forward_weight=args.l1, backward_weight=args.l2,
        ))
    result = run_experiment(
        separations=_parse_grid(args.grid),
        replicates=args.replicates,
        samplers=specs,
        n=args.n,
        avg_degree=args.avg_degree,
        edge_mode=DIRECTED if args.edge_mode == "directed" else UNDIRECTED,
        seed=args.seed,
        tol=args.tol,
        max_iter=args.max_iter,
        workers=args.workers,
        retry_disconnected=args.retry_disconnected,
    )
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(f"# config: {json.dumps(_config_echo(args, 'sbm-bench'), sort_keys=True)}\n")
        fh.write(f"# version: {__version__}\n")
        result.write_csv(fh)
    if not args.no_figure:
        figure = args.figure or str(Path(args.output).with_suffix(".png"))
        render_benchmark_figure(result, figure)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dircom",
                     description="Structural analysis of directed networks "
                                 "via sampled bivariate distributions.")
    parser.add_argument("--version", action="version", version=f"dircom {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    for name, func, extra in (
        ("centrality", _cmd_centrality, "set"),
        ("relcen", _cmd_relcen, "set12"),
        ("strength", _cmd_strength, "set"),
        ("modularity", _cmd_modularity, "partition"),
    ):
        sub = subs.add_parser(name, help=f"compute {name} of node sets")
        _add_input_flags(sub)
        _add_sampler_flags(sub)
        if extra == "set":
            sub.add_argument("--set", required=True, help="JSON list of node indices")
        elif extra == "set12":
            sub.add_argument("--set1", required=True,
                             help="target set (JSON indices); result is RC(set1|set2)")
            sub.add_argument("--set2", required=True,
                             help="conditioning set (JSON indices)")
        else:
            sub.add_argument("--partition", required=True,
                             help="JSON list of index lists covering all nodes")
        sub.add_argument("--output", help="write the JSON artifact here instead of stdout")
        sub.set_defaults(func=func)

    sub = subs.add_parser("sample", help="write the sampled bivariate distribution to a file")
    _add_input_flags(sub, allow_bivariate=False)
    _add_sampler_flags(sub)
    sub.add_argument("--output", required=True, help="bivariate-distribution file to write")
    sub.set_defaults(func=_cmd_sample)

    sub = subs.add_parser("detect", help="agglomerative community detection")
    _add_input_flags(sub)
    _add_sampler_flags(sub)
    sub.add_argument("--policy", choices=[GREEDY, FIRST_NONNEGATIVE], default=GREEDY)
    sub.add_argument("--stop", default="natural",
                     help="'natural' (merge while nonnegative pairs exist) or 'k=<count>'")
    sub.add_argument("--output", help="write the JSON artifact here instead of stdout")
    sub.add_argument("--dendrogram", help="also write the merge trace as CSV")
    sub.add_argument("--figure", help="also render the modularity curve (PNG)")
    sub.set_defaults(func=_cmd_detect)

    sub = subs.add_parser("sbm-bench",
                          help="two-block SBM benchmark comparing samplers")
    sub.add_argument("--n", type=int, default=200, help="nodes (two equal blocks)")
    sub.add_argument("--avg-degree", type=float, default=3.0)
    sub.add_argument("--grid", default="2.5:5.9:0.1",
                     help="c_in-c_out values: 'start:stop:step' or comma list")
    sub.add_argument("--replicates", type=int, default=100)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--samplers", default="pagerank,backward",
                     help="comma list drawn from simple,pagerank,backward")
    sub.add_argument("--edge-mode", choices=["directed", "undirected"], default="undirected")
    sub.add_argument("--lambda", dest="damping", type=float, default=0.9, metavar="L")
    sub.add_argument("--l0", type=float, default=0.05)
    sub.add_argument("--l1", type=float, default=0.85)
    sub.add_argument("--l2", type=float, default=0.1)
    sub.add_argument("--tol", type=float, default=1e-10)
    sub.add_argument("--max-iter", type=int, default=None)
    sub.add_argument("--workers", type=int, default=1, help="replicate worker processes")
    sub.add_argument("--retry-disconnected", type=int, default=0,
                     help="regenerate disconnected replicates up to this many times")
    sub.add_argument("--output", default="sbm_bench.csv", help="result CSV path")
    sub.add_argument("--figure", help="figure path (default: CSV path with .png)")
    sub.add_argument("--no-figure", action="store_true", help="skip figure rendering")
    sub.set_defaults(func=_cmd_sbm_bench)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("DIRCOM_LOG", "WARNING"))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConvergenceError as exc:
        print(f"dircom: non-convergence: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, OSError) as exc:
        print(f"dircom: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
