"""Command-line entry point.

Subcommands: minimize (ground-state energy), sample (plain chains), scan
(phase or concentration scan, chosen by gamma), ou (free-field-limit
covariance test), logz (thermodynamic integration), tail (large-deviation
tail fit).

Exit codes: 0 success, 1 usage/config error, 2 solver failure, 3 results
tainted by a mixing warning.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SOLVER = 2
EXIT_TAINTED = 3


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on usage errors; the CLI contract
    reserves 2 for solver failures and uses 1 for usage/config problems."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_common(sub):
    sub.add_argument("--config", required=True, help="INI config file")
    sub.add_argument("--out", default="results", help="output directory")
    sub.add_argument("--seed", type=int, default=None, help="master seed override")
    sub.add_argument("--threads", type=int, default=1, help="worker pool cap")
    sub.add_argument("--force", action="store_true",
                     help="overwrite existing result files")
    sub.add_argument("--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="torusgibbs",
        description="Gibbs measures for the focusing NLS on a torus: sampling, "
                    "ground states, partition functions, phase scans.")
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    mini = subs.add_parser("minimize", help="constrained ground-state energy")
    mini.add_argument("--p", type=float, required=True)
    mini.add_argument("--beta", type=float, required=True)
    mini.add_argument("--mass", type=float, required=True)
    mini.add_argument("--half-width", type=float, default=None,
                      help="line half-width R (default: auto)")
    mini.add_argument("--points", type=int, default=2048)
    mini.add_argument("--torus-length", type=float, default=None,
                      help="minimize the torus mean-zero analogue instead")
    mini.add_argument("--out", default=None, help="profile CSV path")
    mini.add_argument("--force", action="store_true")
    mini.add_argument("--verbose", action="store_true")

    for name, desc in [("sample", "run plain chains and summarize"),
                       ("scan", "phase/concentration scan over (beta, L)"),
                       ("ou", "windowed covariance vs the exponential kernel"),
                       ("logz", "thermodynamic integration of log Z"),
                       ("tail", "large-deviation tail slope fit")]:
        _add_common(subs.add_parser(name, help=desc))
    return parser


def _write_outputs(record, out_dir: str, tag: str, force: bool) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    json_path = out / f"{tag}.json"
    csv_path = out / f"{tag}.csv"
    for path in (json_path, csv_path):
        if path.exists() and not force:
            raise FileExistsError(f"{path} exists; pass --force to overwrite")
    json_path.write_text(record.to_json(), encoding="utf-8", newline="\n")
    csv_path.write_text(record.to_csv(), encoding="utf-8", newline="\n")


def _print_cells(record) -> None:
    for cell in record.cells:
        if "error" in cell:
            line = f"[{cell.get('cell_index', '?')}] ERROR {cell['error']}"
        else:
            keys = [k for k in ("length", "beta", "lag", "interval") if k in cell]
            head = " ".join(f"{k}={cell[k]:g}" for k in keys)
            stat = next((k for k in ("order_param", "mean_distance", "cov",
                                     "slope", "log_z", "mean_mass") if k in cell), None)
            tail = f" {stat}={cell[stat]:.6g}" if stat else ""
            line = f"[{cell.get('cell_index', '?')}] {head}{tail}"
        print(line)


def _cmd_minimize(args) -> int:
    from .variational import NonConvergenceError, minimize_a, minimize_b
    from .grid import TorusGrid

    try:
        if args.torus_length is not None:
            grid = TorusGrid(args.torus_length, args.points)
            result = minimize_b(args.p, args.beta, args.mass, grid)
            label = "B"
        else:
            result = minimize_a(args.p, args.beta, args.mass,
                                half_width=args.half_width, n_points=args.points)
            label = "A"
    except NonConvergenceError as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    prof = result.profile
    print(f"{label} = {result.energy:.10g}  lambda = {prof.lambda_mult:.10g}  "
          f"iterations = {result.iterations}  grad_norm = {result.grad_norm:.3g}")
    if args.out:
        path = Path(args.out)
        if path.exists() and not args.force:
            print(f"error: {path} exists; pass --force", file=sys.stderr)
            return EXIT_USAGE
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = ["x,Q"]
        lines += [f"{x:.17g},{q:.17g}" for x, q in zip(prof.grid.x, prof.values)]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return EXIT_OK


def _cmd_logz(config, args) -> tuple:
    from .grid import TorusGrid
    from .partition import log_z_thermo

    length = config.length_list[0]
    grid = TorusGrid(length, config.points_for(0, length, max(config.beta_list)))
    params = config.params_for(max(config.beta_list), length)
    result = log_z_thermo(params, grid, sorted(config.beta_list), config.seed,
                          n_steps=config.steps, burn_in=config.burn_in,
                          thin=config.thin, step_size=config.step_size,
                          init=config.init)
    from .experiments import ResultRecord, _config_echo

    cells = []
    for i, beta in enumerate(result.beta_grid):
        cells.append({
            "experiment": "logz", "cell_index": i, "length": float(length),
            "beta": float(beta), "integrand": float(result.integrand_means[i]),
            "integrand_err": float(result.integrand_errors[i]),
            "log_z": float(result.log_z[i]),
            "log_z_err": float(result.log_z_errors[i]),
            "ess": float(result.ess[i]),
            "anchor": float(result.anchor), "anchor_err": float(result.anchor_error),
            "note": result.note,
        })
    record = ResultRecord("logz", _config_echo(config), config.seed, cells)
    return record, result.tainted


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "minimize":
        return _cmd_minimize(args)

    from .experiments import (chain_summary, config_from_ini, ld_tail_experiment,
                              ou_limit_test, phase_scan,
                              supercritical_concentration)

    try:
        config = config_from_ini(args.config)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.seed is not None:
        config.seed = args.seed
    if args.verbose:
        print(f"config: {config}", file=sys.stderr)

    tainted = False
    try:
        if args.command == "sample":
            record = chain_summary(config, threads=args.threads)
        elif args.command == "scan":
            if abs(config.gamma - (config.p / 2 - 1)) < 1e-9:
                record = phase_scan(config, threads=args.threads)
            elif config.gamma < config.p / 2 - 1:
                record = supercritical_concentration(config, threads=args.threads)
            else:
                print("error: scan needs gamma <= p/2 - 1 (use `ou` above the "
                      "critical line)", file=sys.stderr)
                return EXIT_USAGE
        elif args.command == "ou":
            record = ou_limit_test(config, threads=args.threads)
        elif args.command == "logz":
            record, tainted = _cmd_logz(config, args)
        elif args.command == "tail":
            record = ld_tail_experiment(config)
        else:  # pragma: no cover
            return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        _write_outputs(record, args.out, config.tag, args.force)
    except FileExistsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _print_cells(record)
    tainted = tainted or any(cell.get("tainted") for cell in record.cells)
    return EXIT_TAINTED if tainted else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
