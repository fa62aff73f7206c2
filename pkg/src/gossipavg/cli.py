"""Command-line front end: ``gossipavg {generate,spectrum,run,rates,verify}``.

Exit status: 0 success, 1 runtime or numerical failure (including failed
verification), 2 usage error.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, graph, solvers, spectrum, verify
from .errors import DenseCapError, FormatError, GenerationError, ParameterError, ValidationError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunSpec:
    subcommand: str
    n: int = 1000
    k: int = 3
    d: int = 50
    iterations: int = 100
    seeds: list[int] = field(default_factory=lambda: [0])
    methods: list[str] = field(default_factory=list)
    out: str | None = None
    bins: int = 50
    quad_nodes: int = spectrum.DEFAULT_NODES
    suites: list[str] = field(default_factory=list)
    graph_file: str | None = None
    monte_carlo: bool = False
    init: str = "normal"

    def describe(self) -> str:
        items = {k: v for k, v in asdict(self).items() if v not in (None, [])}
        return "runspec: " + " ".join(f"{k}={v}" for k, v in items.items())


def _int_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if ":" in part:
            a, b = part.split(":")
            out.extend(range(int(a), int(b)))
        elif part:
            out.append(int(part))
    return out


def _methods(text: str) -> list[str]:
    names = [m.strip() for m in text.split(",") if m.strip()]
    if names == ["all"]:
        return list(solvers.ALL_METHODS)
    bad = [m for m in names if m not in solvers.ALL_METHODS]
    if bad:
        raise UsageError(f"unknown method(s) {', '.join(bad)}; choose from {', '.join(solvers.ALL_METHODS)} or all")
    return names


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gossipavg", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="subcommand", required=True)

    def graph_flags(sp, n_default):
        sp.add_argument("--n", type=int, default=n_default, help="vertices (default %(default)s)")
        sp.add_argument("--k", type=int, default=3, help="degree (default %(default)s)")

    g = sub.add_parser("generate", help="sample a random k-regular graph, write an edge list")
    graph_flags(g, 1000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", help="edge-list path (default graph_k<k>_n<n>_seed<seed>.edg)")

    s = sub.add_parser("spectrum", help="empirical spectrum histogram vs Kesten-McKay law")
    graph_flags(s, 1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--bins", type=int, default=50)
    s.add_argument("--graph", dest="graph_file", help="load this edge list instead of sampling")
    s.add_argument("--out", help="histogram CSV path (default spectrum_k<k>_n<n>_seed<seed>.csv)")

    r = sub.add_parser("run", help="simulate methods, write one trace CSV per method and seed")
    graph_flags(r, 1000)
    r.add_argument("--d", type=int, default=50, help="vector dimension per agent")
    r.add_argument("--iters", type=int, default=100)
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--seeds", default=None, help="comma list or a:b range")
    r.add_argument("--methods", default="all")
    r.add_argument("--init", choices=solvers.INIT_DISTRIBUTIONS, default="normal",
                   help="x0 entry distribution, unit variance (default %(default)s)")
    r.add_argument("--out", default="traces", help="output directory")

    rt = sub.add_parser("rates", help="expected-error table: quadrature, closed form, Monte Carlo")
    rt.add_argument("--k", type=int, default=3)
    rt.add_argument("--iters", type=int, default=30, help="largest t")
    rt.add_argument("--methods", default="optimal", help="optimal and/or heavyball (others: no closed form)")
    rt.add_argument("--quad-nodes", type=int, default=spectrum.DEFAULT_NODES)
    rt.add_argument("--seeds", default=None, help="Monte Carlo seeds; omit to skip Monte Carlo")
    rt.add_argument("--n", type=int, default=1000, help="Monte Carlo graph size")
    rt.add_argument("--d", type=int, default=1, help="Monte Carlo vector dimension")
    rt.add_argument("--init", choices=solvers.INIT_DISTRIBUTIONS, default="normal",
                    help="Monte Carlo x0 entry distribution (default %(default)s)")
    rt.add_argument("--out", default="rates", help="output directory")

    v = sub.add_parser("verify", help="run invariant suites; exit 0 iff all pass")
    v.add_argument("--suites", default=",".join(verify.SUITES), help="comma list of suites")
    v.add_argument("--inject-delta0", type=float, default=None, help=argparse.SUPPRESS)
    return p


def _spec_from_args(a) -> RunSpec:
    spec = RunSpec(a.subcommand)
    for name in ("n", "k", "d", "bins", "out", "graph_file", "quad_nodes", "init"):
        if hasattr(a, name):
            setattr(spec, name, getattr(a, name))
    if hasattr(a, "iters"):
        spec.iterations = a.iters
    if getattr(a, "seeds", None):
        spec.seeds = _int_list(a.seeds)
    elif getattr(a, "seed", None) is not None:
        spec.seeds = [a.seed]
    if hasattr(a, "methods"):
        spec.methods = _methods(a.methods)
    if a.subcommand == "rates":
        spec.monte_carlo = bool(a.seeds)
    if a.subcommand == "verify":
        spec.suites = [s.strip() for s in a.suites.split(",") if s.strip()]
        bad = [s for s in spec.suites if s not in verify.SUITES]
        if bad:
            raise UsageError(f"unknown suite(s) {', '.join(bad)}; choose from {', '.join(verify.SUITES)}")
    _validate(spec)
    return spec


def _validate(spec: RunSpec) -> None:
    if spec.subcommand in ("generate", "spectrum", "run") and spec.graph_file is None:
        graph.check_parameters(spec.n, spec.k)
    if spec.subcommand == "rates" and spec.k < 3:
        raise ParameterError(f"degree k must be >= 3, got k={spec.k}")
    if spec.d < 1:
        raise UsageError("--d must be >= 1")
    if spec.iterations < 1:
        raise UsageError("--iters must be >= 1")
    if spec.bins < 10:
        raise UsageError("--bins must be >= 10")
    if spec.quad_nodes < 16:
        raise UsageError("--quad-nodes must be >= 16")
    if not spec.seeds:
        raise UsageError("no seeds given")
    if spec.subcommand == "rates":
        bad = [m for m in spec.methods if m == "cg"]
        if bad:
            raise UsageError("cg has no residual polynomial; not available in rates")


def cmd_generate(spec: RunSpec) -> int:
    seed = spec.seeds[0]
    g = graph.generate_regular(spec.n, spec.k, seed)
    out = spec.out or f"graph_k{spec.k}_n{spec.n}_seed{seed}.edg"
    graph.write_edge_list(g, out)
    print(f"n={g.n} k={g.k} seed={seed} connected=true")
    print(f"wrote {out} ({len(g.edges())} edges)")
    return EXIT_OK


def cmd_spectrum(spec: RunSpec) -> int:
    seed = spec.seeds[0]
    g = graph.read_edge_list(spec.graph_file) if spec.graph_file else graph.generate_regular(spec.n, spec.k, seed)
    eigs = graph.dense_eigenvalues(g)
    h = spectrum.empirical_histogram(eigs, spec.bins, g.k)
    out = spec.out or f"spectrum_k{g.k}_n{g.n}_seed{seed}.csv"
    h.to_csv(out)
    print(f"n={g.n} k={g.k} bins={spec.bins} underflow={h.underflow:.6g} overflow={h.overflow:.6g}")
    print(f"l1_distance={spectrum.l1_density_distance(h):.6g}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_run(spec: RunSpec) -> int:
    outdir = Path(spec.out)
    status = EXIT_OK
    for seed in spec.seeds:
        g = graph.generate_regular(spec.n, spec.k, seed)
        x0 = solvers.initial_state(spec.n, spec.d, seed, spec.init)
        for method in spec.methods:
            tr = solvers.run(g, x0, solvers.MethodConfig(method, spec.k, spec.iterations))
            path = tr.to_csv(outdir / solvers.ConvergenceTrace.filename(method, spec.k, spec.n, seed))
            flag = " DIVERGED" if tr.diverged else ""
            print(f"seed={seed} method={method} final_t={int(tr.iters[-1])} "
                  f"error={tr.errors[-1]:.6e}{flag} -> {path}")
            if tr.diverged:
                status = EXIT_FAIL
    return status


def cmd_rates(spec: RunSpec) -> int:
    outdir = Path(spec.out)
    mc = spec.seeds if spec.monte_carlo else ()
    for method in spec.methods:
        rep = analysis.rate_report(spec.k, spec.iterations, method, nodes=spec.quad_nodes,
                                   mc_n=spec.n if mc else 0, mc_d=spec.d, seeds=mc, init=spec.init)
        path = outdir / f"rates_{method}_k{spec.k}.csv"
        rep.to_csv(path)
        window = (5, spec.iterations) if spec.iterations > 5 else (0, spec.iterations)
        slope = analysis.fit_log_slope(rep.t, rep.quadrature, window)
        inside = np.all((rep.quadrature >= rep.closed_lower * (1 - verify.SANDWICH_SLACK))
                        & (rep.quadrature <= rep.closed_upper * (1 + verify.SANDWICH_SLACK)))
        line = f"method={method} k={spec.k} quadrature_log_slope={slope:.6f} log(1/(k-1))={np.log(1 / (spec.k - 1)):.6f}"
        if method in ("optimal", "heavyball"):
            line += f" sandwich={'ok' if inside else 'VIOLATED'}"
        print(line + f" -> {path}")
    return EXIT_OK


def cmd_verify(spec: RunSpec, delta0: float | None = None) -> int:
    checks = verify.run_suites(spec.suites, delta0=delta0)
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # argparse exits 2 on usage errors
    try:
        spec = _spec_from_args(args)
    except (UsageError, ParameterError) as exc:
        print(f"gossipavg {args.subcommand}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(spec.describe())
    try:
        if spec.subcommand == "generate":
            return cmd_generate(spec)
        if spec.subcommand == "spectrum":
            return cmd_spectrum(spec)
        if spec.subcommand == "run":
            return cmd_run(spec)
        if spec.subcommand == "rates":
            return cmd_rates(spec)
        return cmd_verify(spec, args.inject_delta0)
    except DenseCapError as exc:
        print(f"gossipavg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, ValidationError, OSError) as exc:
        print(f"gossipavg: error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (GenerationError, ArithmeticError) as exc:
        print(f"gossipavg: runtime failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
