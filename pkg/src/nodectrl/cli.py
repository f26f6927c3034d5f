"""Command-line entry point.

Each subcommand runs one experiment and writes its CSV/SVG outputs plus a JSON
manifest into <out>/<subcommand>/. All file contents except the manifest are
byte-identical across reruns with the same config and seed.

    nodectrl decay --out runs
    nodectrl micro-surface --seed 7 --threads 4
    nodectrl mf-descent --config my.cfg --set meanfield.gamma=0.02
"""

import argparse
import os
import sys

from . import experiments
from .config import apply_overrides, load_config
from .errors import NodectrlError

_COMMANDS = {
    "decay": (experiments.run_decay, "closed-form decay under three static controls"),
    "micro-surface": (
        experiments.run_micro_surface,
        "particle training-loss grid plus its kernel surrogate",
    ),
    "micro-descent": (
        experiments.run_micro_descent,
        "projected gradient descent on the particle-loss surrogate",
    ),
    "mf-surface": (
        experiments.run_mf_surface,
        "Monte-Carlo transport-loss grid plus its kernel surrogate",
    ),
    "mf-descent": (
        experiments.run_mf_descent,
        "projected gradient descent on the transport-loss surrogate",
    ),
    "hum": (experiments.run_hum_demo, "exact bias control of the linear ensemble"),
    "static-control": (
        experiments.run_static_control_demo,
        "constant-bias steering table over weights and step sizes",
    ),
    "consistency": (
        experiments.run_particle_pde_consistency,
        "particle push-forward vs grid solution in Wasserstein distance",
    ),
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nodectrl",
        description="continuous residual networks: simulation, exact control, "
        "and surrogate-based training experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in _COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="INI config file overlaying the defaults")
        p.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
        p.add_argument("--out", default=None, help="output directory (default: config [common] out)")
        p.add_argument("--threads", type=int, default=None, help="worker threads for grid sweeps")
        p.add_argument(
            "--set", dest="overrides", action="append", metavar="SECTION.KEY=VALUE",
            help="override one config value (repeatable)",
        )
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cp = load_config(args.config)
        apply_overrides(cp, args.overrides)
        if args.seed is not None:
            cp.set("common", "seed", str(args.seed))
        if args.out is not None:
            cp.set("common", "out", args.out)
        if args.threads is not None:
            cp.set("common", "threads", str(args.threads))
        out_dir = os.path.join(cp.get("common", "out"), args.command.replace("-", "_"))
        os.makedirs(out_dir, exist_ok=True)
        runner, _ = _COMMANDS[args.command]
        result = runner(cp, out_dir, threads=cp.getint("common", "threads"))
    except NodectrlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {len(result['files'])} files to {out_dir}")
    for key, value in result.items():
        if key != "files":
            print(f"  {key} = {value}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
