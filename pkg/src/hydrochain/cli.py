"""hydrochain command line: run experiment configs, or the matrix sweep.

Exit codes: 0 all hard tolerances pass, 1 tolerance failure, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, ExperimentConfig
from .experiments import run_experiment

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hydrochain")
    sub = p.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run an experiment configuration file")
    runp.add_argument("config", help="path to the JSON experiment document")
    runp.add_argument("--seed", type=int, default=None,
                      help="override the config seed")
    runp.add_argument("--threads", type=int, default=1,
                      help="worker processes for the trajectory ensemble")
    runp.add_argument("--max-events", type=float, default=None,
                      help="abort if the estimated flip count exceeds this")
    runp.add_argument("--deterministic", action="store_true", default=True,
                      help="byte-stable outputs (default; kept for symmetry)")

    verp = sub.add_parser("verify-matrix",
                          help="run the resolvent identity and limit sweep")
    verp.add_argument("--preset", default="default", choices=["default"])
    verp.add_argument("--seed", type=int, default=0)
    verp.add_argument("--out", default="hydrochain_out")
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = ExperimentConfig.from_file(args.config)
            if args.seed is not None:
                cfg.seed = int(args.seed)
                cfg.validate()
            _, code = run_experiment(cfg, threads=args.threads,
                                     max_events=args.max_events)
        else:
            cfg = ExperimentConfig.from_dict({
                "schema": 1, "kind": "matrix_verify", "n_list": [1024],
                "seed": args.seed, "output_dir": args.out})
            _, code = run_experiment(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return code


if __name__ == "__main__":
    sys.exit(main())
