"""Command-line entry point: ``vccount <subcommand> ...``.

Every output carries the run configuration and a version string so a file
can be regenerated from its own header. Errors go to stdout as a single JSON
object ``{"error": kind, "message": ..., "exit_code": ...}``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import subprocess
import sys
import time
from collections import Counter
from pathlib import Path

from . import __version__
from . import counter as C
from . import stats as S
from .graph import EdgeListParseError, ErdosRenyi, GenSpec, GraphError, ScaleFree, generate, read_graph, serialize_edge_list
from .oracle import DEFAULT_BOUND, OracleBoundExceeded, enumerate_min_covers
from .rsg import (
    Exactness,
    RSGConstructionError,
    build_rsg_heuristic,
    build_rsg_oracle,
    rsg_from_json,
    rsg_to_json,
    verify_rsg,
)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_BUDGET = 4
EXIT_ORACLE_BOUND = 5
EXIT_VERIFICATION = 6
EXIT_NOT_CONVERGED = 7

EXIT_CODES_HELP = f"""exit codes:
  {EXIT_OK}  success
  {EXIT_INTERNAL}  internal error
  {EXIT_USAGE}  bad command line
  {EXIT_PARSE}  input file missing or malformed
  {EXIT_BUDGET}  counting budget exceeded
  {EXIT_ORACLE_BOUND}  graph larger than the oracle bound
  {EXIT_VERIFICATION}  rsg failed verification, or is unverified without --allow-unverified
  {EXIT_NOT_CONVERGED}  influence fixed point did not converge

environment:
  VCCOUNT_THREADS         default for --threads
  VCCOUNT_MAX_BRANCHES    default for --max-branches
  VCCOUNT_MAX_EXHAUSTION  default for --max-exhaustion
"""


class CliError(Exception):
    def __init__(self, kind: str, message: str, code: int):
        super().__init__(message)
        self.kind = kind
        self.code = code


def version_string() -> str:
    """Package version plus ``git describe`` of the source tree when available."""
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"vccount {__version__}-g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return f"vccount {__version__}"


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise CliError("usage", f"{name}={raw!r} is not an integer", EXIT_USAGE) from None


def _config(args) -> dict:
    skip = {"func"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        out[k] = v
    return out


def _budget(args) -> C.CountBudget:
    return C.CountBudget(
        max_exhaustion_vertices=args.max_exhaustion,
        max_branches=args.max_branches,
        on_exceed=C.OnExceed(args.on_exceed),
    )


def _emit_json(args, payload: dict) -> None:
    doc = {"version": version_string(), "config": _config(args), **payload}
    text = json.dumps(doc, indent=2, sort_keys=False) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _csv_header(args) -> str:
    return f"# version: {version_string()}\n# config: {json.dumps(_config(args), sort_keys=True)}\n"


def _prepend_header(path: Path, args) -> None:
    body = path.read_text()
    path.write_text(_csv_header(args) + body)


def _load_graph(path: str):
    try:
        return read_graph(path)
    except FileNotFoundError:
        raise CliError("parse", f"no such file: {path}", EXIT_PARSE) from None
    except (EdgeListParseError, GraphError) as exc:
        raise CliError("parse", str(exc), EXIT_PARSE) from None


def _load_rsg(path: str):
    """A graph file is reduced on the fly; a JSON RSG document is read as is."""
    p = Path(path)
    if not p.exists():
        raise CliError("parse", f"no such file: {path}", EXIT_PARSE)
    text = p.read_text()
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
            return rsg_from_json(doc.get("rsg", doc))
        except (ValueError, KeyError, TypeError) as exc:
            raise CliError("parse", f"bad rsg document: {exc}", EXIT_PARSE) from None
    return None


def _reduce(g, args):
    try:
        if args.builder == "oracle":
            return build_rsg_oracle(g, args.bound), None
        rep = verify_rsg(g, build_rsg_heuristic(g), decodes=args.decodes, seed=args.seed, bound=args.bound)
        return rep.rsg, rep
    except OracleBoundExceeded as exc:
        raise CliError("oracle_bound", str(exc), EXIT_ORACLE_BOUND) from None
    except RSGConstructionError as exc:
        raise CliError("verification", f"rsg construction failed: {exc}", EXIT_VERIFICATION) from None


def _rsg_or_reduce(args):
    rsg = _load_rsg(args.input)
    if rsg is not None:
        return rsg, None
    return _reduce(_load_graph(args.input), args)


def _report_json(rep) -> dict | None:
    if rep is None:
        return None
    return {
        "exactness": rep.exactness.value,
        "checks": rep.checks,
        "messages": rep.messages,
        "implied_size": rep.implied_size,
        "reference_size": rep.reference_size,
        "reference": rep.reference,
    }


# --------------------------------------------------------------------------- subcommands


def cmd_gen(args) -> int:
    g = generate(_genspec(args, args.param, args.seed))
    text = f"# version: {version_string()}\n# config: {json.dumps(_config(args), sort_keys=True)}\n"
    text += serialize_edge_list(g)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_reduce(args) -> int:
    g = _load_graph(args.input)
    rsg, rep = _reduce(g, args)
    _emit_json(args, {"rsg": rsg_to_json(rsg), "verification": _report_json(rep)})
    return EXIT_OK


def cmd_verify(args) -> int:
    g = _load_graph(args.input)
    if args.rsg:
        rsg = _load_rsg(args.rsg)
        if rsg is None:
            raise CliError("parse", f"{args.rsg} is not an rsg document", EXIT_PARSE)
        if rsg.base != g:
            raise CliError("parse", "rsg base graph differs from the input graph", EXIT_PARSE)
    else:
        rsg = build_rsg_heuristic(g)
    rep = verify_rsg(g, rsg, decodes=args.decodes, seed=args.seed, bound=args.bound)
    _emit_json(args, {"verification": _report_json(rep), "rsg": rsg_to_json(rep.rsg)})
    return EXIT_VERIFICATION if rep.exactness is Exactness.INEXACT else EXIT_OK


def cmd_count(args) -> int:
    rsg, rep = _rsg_or_reduce(args)
    t0 = time.perf_counter()
    try:
        res = C.count_solutions(
            rsg, _budget(args), strategy=C.Strategy(args.strategy), allow_unverified=args.allow_unverified
        )
    except C.UntrustedRSGError as exc:
        raise CliError("verification", str(exc), EXIT_VERIFICATION) from None
    except C.BudgetExceeded as exc:
        raise CliError("budget", str(exc), EXIT_BUDGET) from None
    payload = res.to_json()
    payload["entropy_density"] = C.entropy_density(res.count, rsg.base.n) if res.exact and res.count else None
    if args.timing:
        payload["wall_time_ms"] = round((time.perf_counter() - t0) * 1000, 3)
    payload["verification"] = _report_json(rep)
    _emit_json(args, payload)
    return EXIT_OK


def cmd_oracle(args) -> int:
    g = _load_graph(args.input)
    try:
        res = enumerate_min_covers(g, args.bound)
    except OracleBoundExceeded as exc:
        raise CliError("oracle_bound", str(exc), EXIT_ORACLE_BOUND) from None
    doc = res.to_json()
    if not args.list_covers:
        doc.pop("covers", None)
    _emit_json(args, doc)
    return EXIT_OK


def cmd_marginals(args) -> int:
    rsg, rep = _rsg_or_reduce(args)
    if args.mode == "exact":
        try:
            table = S.marginal_exact(rsg, _budget(args))
        except C.UntrustedRSGError as exc:
            raise CliError("verification", str(exc), EXIT_VERIFICATION) from None
        except C.BudgetExceeded as exc:
            raise CliError("budget", str(exc), EXIT_BUDGET) from None
        rows = [{"vertex": v, "p_cover": str(p)} for v, p in enumerate(table.p_cover)]
    else:
        rows = []
        for v in sorted(rsg.unfrozen):
            try:
                m = S.marginal_iterative(rsg, v)
            except C.NotATreeError:
                rows.append({"vertex": v, "p_cover_raw": None, "p_cover_normalized": None, "note": "cycle"})
                continue
            rows.append({"vertex": v, "p_cover_raw": m.p_cover_raw, "p_cover_normalized": m.p_cover_normalized})
    if args.format == "csv":
        keys = list(rows[0]) if rows else ["vertex"]
        lines = [",".join(keys)] + [",".join("" if r.get(k) is None else str(r.get(k)) for k in keys) for r in rows]
        text = _csv_header(args) + "\n".join(lines) + "\n"
        if args.output:
            Path(args.output).write_text(text)
        else:
            sys.stdout.write(text)
    else:
        _emit_json(args, {"mode": args.mode, "marginals": rows, "verification": _report_json(rep)})
    return EXIT_OK


def _parse_sweep(text: str) -> list[float]:
    try:
        a, b, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise CliError("usage", f"--sweep-c expects a:b:step, got {text!r}", EXIT_USAGE) from None
    if step <= 0 or b < a:
        raise CliError("usage", "--sweep-c needs step > 0 and b >= a", EXIT_USAGE)
    k = int(math.floor((b - a) / step + 1e-9))
    return [round(a + i * step, 10) for i in range(k + 1)]


def _genspec(args, param: float, seed: int) -> GenSpec:
    kind = ErdosRenyi(param) if args.model == "er" else ScaleFree(param)
    return GenSpec(kind, args.n, seed, f"{args.model}:{param}")


def cmd_stats(args) -> int:
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    figures = set(args.figures.split(","))
    budget = _budget(args)
    written: list[str] = []
    summary: dict = {}

    if args.gamma:
        hists = {}
        for gamma in args.gamma:
            tables = []
            skipped = 0
            for i in range(args.instances):
                g = generate(GenSpec(ScaleFree(gamma), args.n, args.seed + i))
                rsg = verify_rsg(g, build_rsg_heuristic(g), seed=args.seed + i).rsg
                try:
                    tables.append(S.marginal_exact(rsg, budget))
                except (C.UntrustedRSGError, C.BudgetExceeded):
                    skipped += 1
            if tables:
                hists[f"sf:{gamma}"] = S.marginal_histogram(tables)
            summary[f"sf:{gamma}"] = {"tables": len(tables), "skipped": skipped}
        S.write_fig6(out / "fig6.csv", hists)
        _prepend_header(out / "fig6.csv", args)
        written.append("fig6.csv")
    else:
        grid = _parse_sweep(args.sweep_c)
        want_entropy = "fig5" in figures
        reports = []
        for c in grid:
            rep = S.measure_ensemble(
                GenSpec(ErdosRenyi(c), args.n, args.seed, f"er:{c}"),
                args.instances,
                count=want_entropy,
                budget=budget,
                threads=args.threads,
            )
            reports.append(rep)
            summary[str(c)] = {
                "q0": rep.q0,
                "q_edg": rep.q_edg,
                "entropy_mean": None if not rep.entropy_samples else rep.entropy_mean,
                "exactness": rep.exactness_tally,
            }
        if "fig2" in figures:
            S.write_fig2(out / "fig2.csv", reports)
            S.write_fig2_inset(out / "fig2_inset.csv", reports)
            written += ["fig2.csv", "fig2_inset.csv"]
        if want_entropy:
            S.write_fig5(out / "fig5.csv", reports)
            written.append("fig5.csv")
        if "influence" in figures:
            r = reports[-1]
            try:
                dist = S.influence_distribution(
                    r.param, r.q0, r.q_plus, 1.0 - r.q0 - r.q_plus, args.s_max, raise_on_failure=True
                )
            except S.InfluenceNotConverged as exc:
                raise CliError("not_converged", str(exc), EXIT_NOT_CONVERGED) from None
            S.write_influence(out / "influence.csv", dist)
            written.append("influence.csv")
        for name in written:
            _prepend_header(out / name, args)
    _emit_json(args, {"written": written, "summary": summary})
    return EXIT_OK


def cmd_trace(args) -> int:
    schedule = S.random_edge_schedule(args.n, args.c_final, args.seed)
    trace = S.edge_addition_experiment(args.n, schedule, _budget(args))
    if args.csv:
        S.write_trace(args.csv, trace)
        _prepend_header(Path(args.csv), args)
    lc = trace.log_counts()
    _emit_json(
        args,
        {
            "steps": len(trace.steps),
            "truncated": trace.truncated,
            "reason": trace.reason,
            "cases": dict(sorted(Counter(s.case for s in trace.steps).items())),
            "final_log_count": None if len(lc) == 0 or math.isnan(lc[-1]) else float(lc[-1]),
            "window_mean_log_change": [
                None if math.isnan(x) else float(x) for x in S.windowed_mean(trace.log_changes(), args.window or args.n)
            ][-1:],
        },
    )
    return EXIT_OK


# --------------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="64-bit base seed (default 0)")
    common.add_argument("-o", "--output", help="write the JSON result here instead of stdout")
    common.add_argument("--threads", type=int, default=None, help="worker processes for ensembles")
    common.add_argument("--max-branches", type=int, default=None, help="counting branch cap")
    common.add_argument("--max-exhaustion", type=int, default=None, help="cap on vertices fixed by branching")
    common.add_argument("--on-exceed", choices=[e.value for e in C.OnExceed], default="fail")
    common.add_argument("--bound", type=int, default=DEFAULT_BOUND, help="oracle vertex bound")
    common.add_argument("--decodes", type=int, default=64, help="random decodes during verification")
    common.add_argument("--builder", choices=["heuristic", "oracle"], default="heuristic")

    p = argparse.ArgumentParser(
        prog="vccount",
        description="Minimum vertex cover counting through reduced solution graphs.",
        epilog=EXIT_CODES_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("--version", action="version", version=version_string())
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_, epilog=EXIT_CODES_HELP,
                            formatter_class=argparse.RawDescriptionHelpFormatter)
        sp.set_defaults(func=func)
        return sp

    sp = add("gen", cmd_gen, "generate a random graph as an edge list")
    sp.add_argument("--model", choices=["er", "sf"], default="er")
    sp.add_argument("--param", type=float, required=True, help="mean degree c (er) or exponent gamma (sf)")
    sp.add_argument("--n", type=int, required=True)

    sp = add("reduce", cmd_reduce, "build and verify the reduced solution graph")
    sp.add_argument("input", help="edge list or DIMACS graph")

    sp = add("verify", cmd_verify, "verify an rsg against its graph")
    sp.add_argument("input", help="edge list or DIMACS graph")
    sp.add_argument("--rsg", help="rsg JSON to check (default: build one)")

    sp = add("count", cmd_count, "count minimum vertex covers")
    sp.add_argument("input", help="graph file or rsg JSON")
    sp.add_argument("--allow-unverified", action="store_true", help="count an UNVERIFIED rsg anyway")
    sp.add_argument("--strategy", choices=[s.value for s in C.Strategy], default=C.Strategy.MAX_INFLUENCE.value)
    sp.add_argument("--timing", action="store_true", help="add wall_time_ms (output no longer reproducible)")

    sp = add("oracle", cmd_oracle, "brute-force enumeration of minimum covers")
    sp.add_argument("input")
    sp.add_argument("--list-covers", action="store_true")

    sp = add("marginals", cmd_marginals, "per-vertex cover probabilities")
    sp.add_argument("input", help="graph file or rsg JSON")
    sp.add_argument("--mode", choices=["exact", "iterative"], default="exact")
    sp.add_argument("--format", choices=["json", "csv"], default="json")

    sp = add("stats", cmd_stats, "ensemble sweeps writing figure CSVs")
    sp.add_argument("--sweep-c", default="0.25:2.75:0.25", help="a:b:step grid over mean degree")
    sp.add_argument("--gamma", type=float, nargs="+", help="scale-free exponents (marginal histograms)")
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--instances", type=int, default=20)
    sp.add_argument("--figures", default="fig2,fig5", help="comma list of fig2, fig5, influence")
    sp.add_argument("--s-max", type=int, default=200)
    sp.add_argument("--outdir", default=".")

    sp = add("trace", cmd_trace, "edge-addition experiment")
    sp.add_argument("--n", type=int, default=200)
    sp.add_argument("--c-final", type=float, default=2.5)
    sp.add_argument("--window", type=int, default=None, help="windowed mean length (default n)")
    sp.add_argument("--csv", help="write trace.csv here")
    return p


def _fill_env_defaults(args) -> None:
    if args.threads is None:
        args.threads = _env_int("VCCOUNT_THREADS", 1)
    if args.max_branches is None:
        args.max_branches = _env_int("VCCOUNT_MAX_BRANCHES", C.CountBudget.max_branches)
    if args.max_exhaustion is None:
        args.max_exhaustion = _env_int("VCCOUNT_MAX_EXHAUSTION", C.CountBudget.max_exhaustion_vertices)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _fill_env_defaults(args)
        if args.threads < 1 or args.max_branches < 1 or args.max_exhaustion < 1:
            raise CliError("usage", "--threads and budget caps must be positive", EXIT_USAGE)
        return args.func(args)
    except CliError as exc:
        err = {"error": exc.kind, "message": str(exc), "exit_code": exc.code}
        sys.stdout.write(json.dumps(err) + "\n")
        return exc.code
    except Exception as exc:  # last resort, still machine readable
        err = {"error": "internal", "message": f"{type(exc).__name__}: {exc}", "exit_code": EXIT_INTERNAL}
        sys.stdout.write(json.dumps(err) + "\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
