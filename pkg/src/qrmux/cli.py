"""Command-line front end for the sweep runner and analysis tools.

Subcommands: run (quantum-reservoir sweeps), esn (echo-state-network
baselines), analyze (improvement ratios, composition-theory certificates).
A JSON config file given with --config overrides the command-line flags;
the QRMUX_WORKERS environment variable sets the default worker count.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness
from .harness import ExperimentConfig, PRESETS, config_from_preset, resolve_workers
from .tasks import PhaseProtocol


def _parse_protocol(text: str) -> PhaseProtocol:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(
            "protocol must be three comma-separated integers: washout,train,eval")
    washout, train, evaluation = (int(p) for p in parts)
    return PhaseProtocol(washout, train, evaluation)


def _parse_number_list(text: str, cast):
    return tuple(cast(part) for part in text.split(",") if part)


def _parse_grid_item(text: str) -> tuple[str, tuple]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"grid item must be key=v1,v2,..: {text!r}")
    key, _, values = text.partition("=")
    key = key.strip()
    casts = {"n_qubits": int, "tau": float, "V": int, "orders": int}
    if key not in casts:
        raise argparse.ArgumentTypeError(
            f"unknown grid key {key!r}; choose from {sorted(casts)}")
    return key, _parse_number_list(values, casts[key])


def _apply_config_file(args: argparse.Namespace) -> None:
    """Values from the JSON config file take precedence over flags."""
    if not getattr(args, "config", None):
        return
    data = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise SystemExit(f"config file {args.config} must hold a JSON object")
    converters = {
        "protocol": lambda v: _parse_protocol(v) if isinstance(v, str)
        else PhaseProtocol(*v),
        "grid": lambda v: [_parse_grid_item(item) for item in v],
        "nodes": lambda v: tuple(int(x) for x in v),
        "sigmas": lambda v: tuple(float(x) for x in v),
        "radii": lambda v: tuple(float(x) for x in v),
        "out": Path,
        "in_path": Path,
        "partner": Path,
        "target": Path,
        "config": Path,
    }
    for key, value in data.items():
        if not hasattr(args, key):
            raise SystemExit(f"config file key {key!r} matches no flag")
        setattr(args, key, converters.get(key, lambda v: v)(value))


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--trials", type=int, default=None,
                        help="trials per grid cell")
    parser.add_argument("--seed", type=int, default=0, help="base seed")
    parser.add_argument("--out", type=Path, default=Path("results"),
                        help="output directory")
    parser.add_argument("--workers", type=int, default=None,
                        help=f"parallel workers (default from "
                             f"${harness.WORKERS_ENV_VAR}, else 1)")
    parser.add_argument("--paper-scale", action="store_true",
                        help="restore the full-scale trial counts and grids")
    parser.add_argument("--protocol", type=_parse_protocol, default=None,
                        help="washout,train,eval lengths (default 2000,2000,2000)")
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON file whose keys override these flags")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qrmux",
        description="Spatially multiplexed quantum reservoir computing sweeps")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="sweep quantum-reservoir grid cells")
    run.add_argument("--preset", choices=sorted(PRESETS), default=None)
    run.add_argument("--grid", type=_parse_grid_item, action="append",
                     default=None, metavar="KEY=V1,V2,..",
                     help="explicit grid values (n_qubits, tau, V, orders)")
    run.add_argument("--task", choices=("narma", "mc", "both"), default=None)
    run.add_argument("--save-features", action="store_true",
                     help="write per-trial feature and target CSVs")
    _add_common(run)

    esn = sub.add_parser("esn", help="echo-state-network baseline sweeps")
    esn.add_argument("--mode", choices=("narma_sweep", "mc_fixed"), required=True)
    esn.add_argument("--nodes", type=lambda s: _parse_number_list(s, int),
                     default=None, help="comma-separated node counts")
    esn.add_argument("--sigmas", type=lambda s: _parse_number_list(s, float),
                     default=None, help="input-scale grid (narma_sweep)")
    esn.add_argument("--radii", type=lambda s: _parse_number_list(s, float),
                     default=None, help="spectral-radius grid (narma_sweep)")
    esn.add_argument("--esns", type=int, default=None,
                     help="ESN draws per node count (narma_sweep)")
    _add_common(esn)

    analyze = sub.add_parser("analyze", help="derive tables from saved results")
    analyze.add_argument("--kind", choices=("improvement_ratio", "theory_bounds"),
                         required=True)
    analyze.add_argument("--in", dest="in_path", type=Path, required=True,
                         help="trials.csv (improvement_ratio) or a feature CSV "
                              "(theory_bounds)")
    analyze.add_argument("--partner", type=Path, default=None,
                         help="second feature CSV (theory_bounds)")
    analyze.add_argument("--target", type=Path, default=None,
                         help="targets CSV (theory_bounds)")
    analyze.add_argument("--target-column", default=None,
                         help="column of the targets CSV (default: first)")
    analyze.add_argument("--out", type=Path, default=Path("results"))
    analyze.add_argument("--config", type=Path, default=None)
    return parser


def _run_command(args: argparse.Namespace) -> int:
    overrides: dict = {}
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.paper_scale:
        overrides["trials"] = harness.PAPER_TRIALS
    if args.task is not None:
        overrides["task"] = args.task
    if args.protocol is not None:
        overrides["protocol"] = args.protocol
    overrides["base_seed"] = args.seed
    overrides["workers"] = resolve_workers(args.workers)
    overrides["save_features"] = args.save_features

    if args.grid:
        grid = dict(args.grid)
        field_names = {"n_qubits": "n_qubits", "tau": "taus",
                       "V": "virtual_nodes", "orders": "orders"}
        for key, values in grid.items():
            overrides[field_names[key]] = values
        config = ExperimentConfig(preset="custom", **overrides)
    elif args.preset:
        config = config_from_preset(args.preset, **overrides)
    else:
        raise SystemExit("run requires --preset or --grid")

    paths = harness.run_experiment(config, args.out)
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


def _esn_command(args: argparse.Namespace) -> int:
    paths = harness.run_esn_baseline(
        mode=args.mode, out_dir=args.out, nodes=args.nodes, trials=args.trials,
        n_esns=args.esns, sigmas=args.sigmas, radii=args.radii,
        base_seed=args.seed, protocol=args.protocol or PhaseProtocol(),
        workers=resolve_workers(args.workers), paper_scale=args.paper_scale)
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


def _analyze_command(args: argparse.Namespace) -> int:
    if args.kind == "improvement_ratio":
        paths = harness.improvement_ratios(args.in_path, args.out)
        for name, path in paths.items():
            print(f"{name}: {path}")
        return 0
    if args.partner is None or args.target is None:
        raise SystemExit("theory_bounds requires --partner and --target")
    out_path = args.out if args.out.suffix == ".csv" else args.out / "bounds.csv"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    bounds = harness.theory_bounds_report(
        args.in_path, args.partner, args.target,
        target_column=args.target_column, out_path=out_path)
    print(f"bounds: {out_path}")
    print(f"residual bracket: [{bounds.residual_lower:.6g}, "
          f"{bounds.residual_upper:.6g}], exact {bounds.residual_combined:.6g}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config_file(args)
        if args.command == "run":
            return _run_command(args)
        if args.command == "esn":
            return _esn_command(args)
        return _analyze_command(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
