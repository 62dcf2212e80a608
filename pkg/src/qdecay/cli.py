"""Command line: ``qdecay bound | simulate | verify | arch``.

Exit codes: 0 success, 1 verification failure, 2 usage or validation error.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from . import arch, bounds, verify
from .circuits import circuit_channel, entropy_trajectory, fixed_point_projection, layer_channel, make_layout
from .config import CapacityError
from .entropy import SAMPLERS
from .moments import global_twirl

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


@dataclass
class RunConfig:
    """Resolved settings of one command invocation."""

    command: str
    source: str | None = None
    params: dict = field(default_factory=dict)
    k: int | None = None
    seed: int | None = None
    samples: int | None = None
    aux_dim: int = 1
    output: str | None = None
    format: str = "json"


class UsageError(Exception):
    pass


# ----------------------------------------------------------------------------
# bound
# ----------------------------------------------------------------------------

def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


# formula id -> (calculator, [(parameter, cli dest)])
FORMULAS = {
    "glue": (bounds.glue_error, [("eps1", "eps1"), ("eps2", "eps2"), ("k", "k"), ("dim_b", "dimB")]),
    "glue-chain": (bounds.glue_chain, [("overlap_dims", "overlaps"), ("k", "k")]),
    "parallel-r": (bounds.parallel_r, [("q", "q"), ("k", "k"), ("n", "n"), ("eps", "eps"), ("variant", "variant")]),
    "parallel-delta": (bounds.parallel_delta, [("q", "q"), ("k", "k"), ("n", "n"), ("r", "r"), ("variant", "variant")]),
    "parallel-lambda": (bounds.parallel_lambda, [("q", "q"), ("k", "k"), ("n", "n"), ("c_k", "Ck")]),
    "c-qk": (bounds.c_qk, [("q", "q"), ("k", "k"), ("mode", "mode"), ("value", "value"), ("log_base", "log_base")]),
    "parallel-depth": (bounds.parallel_depth, [("q", "q"), ("k", "k"), ("n", "n"), ("eps", "eps"), ("ell", "ell"),
                                               ("c_qk_value", "C")]),
    "tree-lambda": (bounds.tree_lambda, [("q", "q"), ("k", "k"), ("n", "n"), ("ell", "ell"), ("eps_prime", "eps"),
                                         ("min_p_lambda", "min_p_lambda"), ("c_qk_value", "C")]),
    "random-graph-lambda": (bounds.random_graph_lambda,
                            [("q", "q"), ("k", "k"), ("n", "n"), ("ell", "ell"), ("eps", "eps"),
                             ("min_p_lambda", "min_p_lambda"), ("c_qk_value", "C"), ("variant", "variant")]),
    "compose-sdpi": (bounds.compose_sdpi, [("lambdas", "lambdas"), ("eps", "eps"), ("delta", "delta")]),
    "brickwork-lambda": (bounds.brickwork_lambda, [("n", "n"), ("k", "k"), ("prefactor", "prefactor"), ("c_k", "Ck")]),
}

_INT_DESTS = {"q", "k", "n", "r", "ell"}
_LIST_DESTS = {"overlaps", "lambdas"}


def _coerce(dest: str, value):
    if value is None or not isinstance(value, str):
        return value
    if dest in _LIST_DESTS:
        return _floats(value)
    if dest in _INT_DESTS:
        return int(value)
    if dest in ("variant", "mode"):
        return value
    if dest == "log_base":
        return value if value in ("e", "q") else float(value)
    return _number(value)


def _number(text: str) -> float:
    if "/" in text:
        num, den = text.split("/")
        return float(num) / float(den)
    if text in ("inf", "infinity"):
        return math.inf
    return float(text)


def _parse_sweep(items: list[str]) -> dict[str, list[str]]:
    grid = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"--sweep expects name=v1,v2,... (got {item!r})")
        name, values = item.split("=", 1)
        grid[name.strip()] = [v for v in values.split(",") if v]
    return grid


def cmd_bound(args) -> int:
    fn, params = FORMULAS[args.formula]
    base = {dest: getattr(args, dest, None) for _, dest in params}
    grid = _parse_sweep(args.sweep)
    unknown = set(grid) - set(base)
    if unknown:
        raise UsageError(f"cannot sweep {sorted(unknown)} for {args.formula}; parameters: {sorted(base)}")
    combos = [dict(zip(grid, vals)) for vals in itertools.product(*grid.values())] if grid else [{}]
    reports = []
    for combo in combos:
        values = {**base, **combo}
        kwargs = {}
        for pname, dest in params:
            v = _coerce(dest, values[dest])
            if v is not None:
                kwargs[pname] = v
        try:
            reports.append(fn(**kwargs))
        except (TypeError, ValueError) as exc:
            raise UsageError(f"{args.formula}: {exc}") from exc
    if args.format == "csv":
        text = bounds.reports_to_csv(reports)
    elif len(reports) == 1:
        text = reports[0].to_json(indent=2) + "\n"
    else:
        text = "[\n" + ",\n".join(r.to_json(indent=2) for r in reports) + "\n]" + "\n"
    _emit(text, args.output)
    for r in reports:
        for name, ok in r.validity:
            if not ok:
                print(f"warning: {r.formula_id}: precondition '{name}' not satisfied", file=sys.stderr)
    return EXIT_OK


# ----------------------------------------------------------------------------
# simulate
# ----------------------------------------------------------------------------

def _spec_from_args(args) -> arch.ArchitectureSpec | None:
    if args.source == "brickwork":
        return arch.brickwork(args.n, args.q)
    if args.source == "lattice":
        return arch.lattice(args.D, args.side, args.q)
    if args.source == "file":
        if not args.arch:
            raise UsageError("simulate file needs --arch PATH")
        with open(args.arch) as fh:
            return arch.loads(fh.read())
    return None


def _trial(job) -> list[tuple]:
    """One trajectory; module-level so worker processes can run it."""
    cfg, trial = job
    rng = np.random.default_rng([cfg["seed"], trial])
    k, q = cfg["k"], cfg["q"]
    if cfg["source"] == "spurious":
        n = cfg["n"]
        layout = make_layout(arch.ArchitectureSpec(n, q, ()), k)
        realisations = arch.spurious_circuit(n, cfg["layers"], cfg["alpha"], seed=rng)
        steps = [layer_channel(layer, layout) for layer in realisations]
        e = global_twirl(layout)
    else:
        spec = arch.from_dict(cfg["spec"]) if cfg["source"] == "file" else (
            arch.brickwork(cfg["n"], q) if cfg["source"] == "brickwork" else arch.lattice(cfg["D"], cfg["side"], q))
        layout = make_layout(spec, k)
        step = circuit_channel(spec, k)
        steps = [step] * cfg["layers"]
        e = fixed_point_projection(spec, k)
    rho = SAMPLERS[cfg["sampler"]](rng, e)
    tr = entropy_trajectory(steps, e, rho, base=q)
    ratios = tr.ratios
    return [(trial, t + 1, float(tr.entropy[t + 1]), None if np.isnan(ratios[t]) else float(ratios[t]))
            for t in range(len(steps))]


def cmd_simulate(args) -> int:
    spec = _spec_from_args(args)
    if spec is not None:
        q, n = spec.q, spec.n
    else:
        q, n = args.q, args.n
        if n < 2:
            raise UsageError("spurious needs n >= 2")
    try:
        make_layout(arch.ArchitectureSpec(n, q, ()), args.k)
    except CapacityError as exc:
        raise UsageError(str(exc)) from exc
    run = RunConfig("simulate", args.source, {"n": n, "q": q, "D": args.D, "side": args.side, "layers": args.layers,
                                              "alpha": args.alpha, "sampler": args.sampler},
                    k=args.k, seed=args.seed, samples=args.samples, output=args.output, format="csv")
    cfg = {**run.params, "source": run.source, "k": run.k, "seed": run.seed,
           "spec": arch.to_dict(spec) if args.source == "file" else None}
    jobs = [(cfg, t) for t in range(args.samples)]
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            results = list(pool.map(_trial, jobs))
    else:
        results = [_trial(j) for j in jobs]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial", "layer", "entropy", "ratio"])
    for rows in results:
        for trial, layer, ent, ratio in rows:
            w.writerow([trial, layer, repr(ent), "" if ratio is None else repr(ratio)])
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


def read_trajectories(text: str) -> list[dict]:
    """Parse simulate CSV output back into typed rows."""
    rows = []
    for row in csv.DictReader(io.StringIO(text)):
        rows.append({"trial": int(row["trial"]), "layer": int(row["layer"]), "entropy": float(row["entropy"]),
                     "ratio": float(row["ratio"]) if row["ratio"] else None})
    return rows


# ----------------------------------------------------------------------------
# verify
# ----------------------------------------------------------------------------

def cmd_verify(args) -> int:
    names = list(verify.SUITES) if args.suite == "all" else [args.suite]
    ok = True
    for name in names:
        kwargs = {}
        if name == "entropy":
            kwargs.update(trials=args.trials, seed=args.seed)
        elif name == "walks":
            kwargs.update(trees=args.trees, seed=args.seed)
        elif name == "glue":
            kwargs.update(n=args.n, k=args.k, seed=args.seed)
        elif name == "moments":
            kwargs.update(samples=args.samples, seed=args.seed)
        elif name == "brickwork":
            kwargs.update(seed=args.seed)
        res = verify.SUITES[name](**kwargs)
        print(res.summary())
        ok &= res.passed
    return EXIT_OK if ok else EXIT_FAIL


# ----------------------------------------------------------------------------
# arch
# ----------------------------------------------------------------------------

def cmd_arch(args) -> int:
    if args.arch_command == "generate":
        if args.family == "brickwork":
            spec = arch.brickwork(args.n, args.q)
        elif args.family == "lattice":
            spec = arch.lattice(args.D, args.side, args.q)
        else:
            spec = arch.complete_graph_layer(args.n, args.q)
        _emit(arch.dumps(spec) + "\n", args.output)
        return EXIT_OK
    with open(args.file) as fh:
        text = fh.read()
    try:
        spec = arch.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.file}: not valid JSON ({exc})") from exc
    except arch.ArchitectureError as exc:
        for path, msg in exc.problems:
            print(f"{args.file}: {path}: {msg}", file=sys.stderr)
        return EXIT_USAGE
    info = {"n": spec.n, "q": spec.q, "layers": len(spec.layers)}
    if all(isinstance(layer, arch.ParallelLayer) for layer in spec.layers):
        cg = arch.cluster_graph(spec)
        info.update(cluster_graph_connected=cg.connected, bipartite_by_layer=cg.bipartite_by_layer)
    else:
        info["connected"] = all(nx.is_connected(layer.graph)
                                for layer in spec.layers if isinstance(layer, arch.UnstructuredLayer))
    print(json.dumps({"valid": True, **info}))
    return EXIT_OK


# ----------------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------------

def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qdecay", description="Entropy decay of random circuits toward unitary designs.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bound", help="evaluate a closed-form bound")
    b.add_argument("formula", choices=sorted(FORMULAS))
    for flag in ("q", "k", "n", "r", "ell"):
        b.add_argument(f"--{flag}")
    for flag in ("eps", "eps1", "eps2", "delta", "dimB", "Ck", "C", "value", "prefactor"):
        b.add_argument(f"--{flag}")
    b.add_argument("--eps-prime", dest="eps", help="alias of --eps for tree-lambda")
    b.add_argument("--min-p-lambda", dest="min_p_lambda")
    b.add_argument("--overlaps", help="comma-separated overlap dimensions")
    b.add_argument("--lambdas", help="comma-separated decay constants")
    b.add_argument("--variant", choices=[bounds.AS_STATED, bounds.AS_DERIVED])
    b.add_argument("--mode", choices=["general_bound", "user_override"])
    b.add_argument("--log-base", dest="log_base", help="e, q or a number")
    b.add_argument("--sweep", action="append", help="name=v1,v2,... (repeatable; grid product)")
    b.add_argument("--format", choices=["json", "csv"], default="json")
    b.add_argument("--output", "-o")
    b.set_defaults(func=cmd_bound)

    s = sub.add_parser("simulate", help="entropy trajectories of a circuit")
    s.add_argument("source", choices=["brickwork", "lattice", "spurious", "file"])
    s.add_argument("--n", type=int, default=4)
    s.add_argument("--q", type=int, default=2)
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--D", type=int, default=2)
    s.add_argument("--side", type=int, default=4)
    s.add_argument("--alpha", type=float, default=0.1)
    s.add_argument("--arch", help="architecture JSON file (source 'file')")
    s.add_argument("--layers", type=int, default=10)
    s.add_argument("--samples", type=int, default=10)
    s.add_argument("--sampler", choices=sorted(SAMPLERS), default="haar")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="run self-check suites")
    v.add_argument("suite", choices=sorted(verify.SUITES) + ["all"])
    v.add_argument("--trials", type=int, default=200)
    v.add_argument("--trees", type=int, default=500)
    v.add_argument("--samples", type=int, default=100_000)
    v.add_argument("--n", type=int, default=5)
    v.add_argument("--k", type=int, default=1)
    v.add_argument("--seed", type=int, default=1)
    v.set_defaults(func=cmd_verify)

    a = sub.add_parser("arch", help="generate or validate architecture files")
    asub = a.add_subparsers(dest="arch_command", required=True)
    g = asub.add_parser("generate")
    g.add_argument("family", choices=["brickwork", "lattice", "complete"])
    g.add_argument("--n", type=int, default=8)
    g.add_argument("--q", type=int, default=2)
    g.add_argument("--D", type=int, default=2)
    g.add_argument("--side", type=int, default=4)
    g.add_argument("--output", "-o")
    val = asub.add_parser("validate")
    val.add_argument("file")
    a.set_defaults(func=cmd_arch)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CapacityError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
