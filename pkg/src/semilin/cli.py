"""Command-line entry point: ``semilin <subcommand> --config run.yaml``.

Exit codes: 0 success, 1 validation error, 2 degenerate result, 3 I/O error.
"""
from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .config import MODES, load_config
from .errors import DegenerateDenominatorError, ValidationError
from .estimators import estimate_discrete, weights_for
from .experiments import compare_schemes, convergence_diagnostics, run_monte_carlo
from .model import simulate_discrete
from .results import write_results
from .series import format_series, ingest_series

EXIT_OK, EXIT_INVALID, EXIT_DEGENERATE, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    # usage errors are validation errors; argparse's own code 2 means "degenerate" here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="semilin", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"semilin {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for mode in MODES:
        p = sub.add_parser(mode)
        p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--out", help="override the output directory")
        p.add_argument("--reps", type=int, help="override the replicate count")
        p.add_argument("--quiet", action="store_true", help="suppress the console summary")
    return parser


def _resolve_input(path: str, config_path: str) -> str:
    if os.path.isabs(path) or os.path.exists(path):
        return path
    return os.path.join(os.path.dirname(os.path.abspath(config_path)), path)


def _summary_lines(summary):
    for s in summary.schemes:
        ts = s.times[-1]
        yield (f"{s.scheme:>12}  t={ts.t:g}  var={ts.variance:.6g}  mean V_n={s.V_mean:.6g}"
               f"  degenerate={s.degenerate}{'' if s.valid else '  INVALID'}")


def run(args) -> int:
    cfg = load_config(args.config).with_overrides(
        mode=args.command, seed=args.seed, output_dir=args.out, reps=args.reps)
    say = (lambda *a: None) if args.quiet else print
    out = cfg.output_dir
    mode = cfg.mode
    status = EXIT_OK
    if mode == "simulate":
        path = simulate_discrete(cfg.model, cfg.experiment.n, cfg.seed)
        write_results(out, cfg, files={"path.csv": format_series(path)})
        say(f"simulated n={path.n} steps -> {out}/path.csv")
    elif mode == "estimate":
        schemes = cfg.experiment.schemes
        need_var = any(s.kind == "Optimal" for s in schemes)
        data = ingest_series(_resolve_input(cfg.input, args.config), require_variance=need_var)
        path = data.to_path(cfg.model.f)
        estimates = {s.label: estimate_discrete(path, weights_for(s, path)) for s in schemes}
        write_results(out, cfg, estimates=estimates)
        for name, r in estimates.items():
            say(f"{name:>12}  a_hat={r.a_hat:.10g}  V_n={r.V_n:.6g}")
    elif mode in ("monte-carlo", "continuous", "compare"):
        ecfg = cfg.experiment_config()
        summary = run_monte_carlo(ecfg)
        tables = {"comparison": compare_schemes(ecfg, summary)} if mode == "compare" else None
        write_results(out, cfg, summary=summary, tables=tables)
        for line in _summary_lines(summary):
            say(line)
        if not summary.valid:
            status = EXIT_DEGENERATE
    elif mode == "diagnostics":
        e = cfg.experiment
        tables = convergence_diagnostics(cfg.experiment_config(), e.r_grid, e.n_grid)
        write_results(out, cfg, tables=tables)
        for row in tables["limit"]:
            say(f"r={row['r']:>5}  n={row['n']:>8}  V={row['limit_V']:.6g}")
    return status


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except DegenerateDenominatorError as exc:
        print(f"semilin: degenerate result: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ValidationError as exc:
        print(f"semilin: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"semilin: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
