"""Command-line front end: ``fujita simulate|sweep|kernel|verify-lemmas|plots``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import yaml

from . import experiments as ex
from .semilinear import Status

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _cmd_simulate(args) -> int:
    cfg = ex.load_config(args.config)
    raw = ex.load_yaml(args.config)
    result = ex.simulate(cfg, args.out)
    (Path(args.out) / "config.echo.yaml").write_text(
        yaml.safe_dump(ex.echo_config(cfg, raw.get("symbol")), sort_keys=True)
    )
    line = f"status={result.status.value}"
    if result.status is Status.BLEW_UP:
        line += f" t_star={result.t_star:.6g}"
    elif result.fitted_rate is not None:
        line += f" rate={result.fitted_rate:.4f}"
    print(line)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    spec = ex.SweepSpec.from_dict(ex.load_yaml(args.spec), Path(args.spec).parent)
    points, summary = ex.run_sweep(spec, args.out, threads=args.threads)
    for p in points:
        extra = f"t*={p.t_star:.4g}" if p.t_star is not None else (
            f"rate={p.fitted_rate:.3f}" if p.fitted_rate is not None else (p.error or ""))
        print(f"alpha={p.alpha:<6g} amp={p.amplitude:<10.4g} level={p.grid_level} {p.status:<9} {extra}")
    print(f"alpha_hat={summary['alpha_hat']} (tested {summary['tested_alpha']})")
    return EXIT_FAIL if summary["errors"] else EXIT_OK


def _cmd_kernel(args) -> int:
    cfg = ex.load_config(args.config)
    if not args.t > 0:
        raise ex.ConfigError("--t must be positive")
    info = ex.write_kernel(cfg, args.t, args.out)
    print(json.dumps({k: info[k] for k in ("t", "dirac_weight", "total_mass", "warnings")}))
    return EXIT_OK


def _cmd_verify(args) -> int:
    cfg = ex.load_config(args.config)
    tags = [t for t in (args.select or "").split(",") if t]
    report = ex.verify_lemmas(cfg, tags, seed=args.seed, out_dir=args.out)
    for tag, chk in report["checks"].items():
        print(f"{tag:<16} {'PASS' if chk['passed'] else 'FAIL'}")
    return EXIT_OK if report["passed"] else EXIT_FAIL


def _cmd_plots(args) -> int:
    try:
        written = ex.emit_plots(args.artifact, args.out)
    except FileNotFoundError as exc:
        raise ex.ConfigError(str(exc)) from None
    for p in written:
        print(p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fujita", description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    parser.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized property checks")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one simulation")
    p.add_argument("config", type=Path)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="phase-diagram sweep over alpha and amplitude")
    p.add_argument("spec", type=Path)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("kernel", help="write the semigroup kernel snapshot G(t)")
    p.add_argument("config", type=Path)
    p.add_argument("--t", type=float, required=True)
    p.set_defaults(func=_cmd_kernel)

    p = sub.add_parser("verify-lemmas", help="run the linear/kernel verification bundle")
    p.add_argument("config", type=Path)
    p.add_argument("--select", default="", help=f"comma-separated tags from: {', '.join(ex.LEMMA_TAGS)}")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("plots", help="emit gnuplot scripts for a result.json or phase.csv")
    p.add_argument("artifact", type=Path)
    p.set_defaults(func=_cmd_plots)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ex.ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
