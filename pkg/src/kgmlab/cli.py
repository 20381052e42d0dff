"""Command-line surface.

Subcommands: solve, branch, sweep, diagnose, ineqlab, emit-plots.
Exit codes: 0 success, 1 nonconvergence, 2 invalid input.
"""

from __future__ import annotations

import argparse
import sys

from . import ineq
from .branch import continue_in_epsilon, solve_coupled, sweep
from .config import load_config
from .diagnostics import diagnose
from .errors import (ConfigError, NoBracketError, NonconvergenceError,
                     SchemaVersionError)
from .records import (emit_plot_columns, load_record, output_dir,
                      persist_record, write_manifest)

EXIT_OK = 0
EXIT_NONCONVERGED = 1
EXIT_INVALID = 2


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="kgmlab",
        description="Radial Klein-Gordon-Maxwell standing-wave laboratory")
    sub = top.add_subparsers(dest="command", required=True)

    for name, doc in (("solve", "solve one epsilon"),
                      ("branch", "continue along the epsilon schedule"),
                      ("sweep", "scan the (p, omega/m) plane"),
                      ("ineqlab", "run the inequality stress suites")):
        cmd = sub.add_parser(name, help=doc)
        cmd.add_argument("--config", required=True)

    diag = sub.add_parser("diagnose", help="re-diagnose stored fields")
    diag.add_argument("--record", required=True)

    plots = sub.add_parser("emit-plots", help="write plot column files")
    plots.add_argument("--record", required=True)
    plots.add_argument("--output", default=None)
    return top


def _cmd_solve(cfg) -> int:
    record = solve_coupled(cfg.params(), cfg.solve_settings(), grid=cfg.grid())
    out = output_dir(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "solution.jsonl"
    persist_record(record, path)
    write_manifest(out, cfg.hash(), {"solution": path.name})
    print(f"converged in {record.outer_iterations} outer iterations; "
          f"wrote {path}")
    return EXIT_OK


def _cmd_branch(cfg) -> int:
    branch = continue_in_epsilon(cfg.params(), cfg.effective_schedule(),
                                 cfg.solve_settings(), grid=cfg.grid())
    out = output_dir(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "branch.jsonl"
    persist_record(branch, path)
    write_manifest(out, cfg.hash(), {"branch": path.name})
    print(f"branch of {len(branch.records)} records "
          f"({'truncated' if branch.truncated else 'complete'}); wrote {path}")
    return EXIT_NONCONVERGED if branch.truncated else EXIT_OK


def _cmd_sweep(cfg) -> int:
    spec = cfg.sweep_spec
    if not spec.get("p_values") or not spec.get("omega_over_m_values"):
        raise ConfigError("sweep needs [sweep] p_values and omega_over_m_values")
    result = sweep(spec["p_values"], spec["omega_over_m_values"],
                   cfg.params().e, cfg.solve_settings(), grid=cfg.grid())
    print(result.table())
    return EXIT_OK


def _cmd_ineqlab(cfg) -> int:
    grid = cfg.grid()
    params = cfg.params()
    reports = []
    for kind in ineq.FAMILY_KINDS:
        family = ineq.TestFunctionFamily(kind=kind, seed=cfg.seed, count=8)
        fields = family.sample(grid)
        reports.append(ineq.family_report(
            lambda u: ineq.lemma_due_check(u, params), fields,
            f"min-kernel [{kind}]"))
        reports.append(ineq.family_report(
            lambda u: ineq.weight_lemma_check(u, 1.0, 2.0), fields,
            f"log-weight [{kind}]"))
        reports.append(ineq.family_report(
            lambda u: ineq.lp_embedding_check(u, 4.0, 2.0), fields,
            f"L^4 embedding [{kind}]"))
    out = output_dir(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "ratio_reports.jsonl"
    persist_record(reports, path)
    write_manifest(out, cfg.hash(), {"ratio_reports": path.name})
    for rep in reports:
        print(f"{rep.label}: sup ratio {rep.empirical_sup_constant:.4g}")
    return EXIT_OK


def _cmd_diagnose(path) -> int:
    record = load_record(path)
    report = diagnose(record.u, record.phi, record.params)
    for key, val in vars(report).items():
        print(f"{key}: {val}")
    return EXIT_OK


def _cmd_emit_plots(path, out_arg) -> int:
    record = load_record(path)
    out = output_dir(out_arg if out_arg is not None else "out")
    out.mkdir(parents=True, exist_ok=True)
    target = out / "columns.csv"
    emit_plot_columns(record, target)
    print(f"wrote {target}")
    return EXIT_OK


def run_command(argv) -> int:
    """Dispatch one CLI invocation; returns the process exit status."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code not in (0, None) else EXIT_OK

    try:
        if args.command == "solve":
            return _cmd_solve(load_config(args.config))
        if args.command == "branch":
            return _cmd_branch(load_config(args.config))
        if args.command == "sweep":
            return _cmd_sweep(load_config(args.config))
        if args.command == "ineqlab":
            return _cmd_ineqlab(load_config(args.config))
        if args.command == "diagnose":
            return _cmd_diagnose(args.record)
        if args.command == "emit-plots":
            return _cmd_emit_plots(args.record, args.output)
        return EXIT_INVALID
    except (ConfigError, SchemaVersionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NonconvergenceError, NoBracketError) as exc:
        print(f"nonconvergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))
