"""Command-line front end.

Subcommands ``sweep``, ``prob``, ``wigner``, ``state`` and ``acceptance``.
Settings are layered: defaults, then ``--config`` file, then ``--preset``,
then individual flags. Exit status is 0 on success, 1 for configuration or
I/O errors and 2 for numerical failures (including failed acceptance checks).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import acceptance, sweep
from .config import PRESETS, apply_preset, config_from_mapping, parse_config
from .errors import ConfigError, DegenerateTraceError, NumericalError, TruncationError

log = logging.getLogger("jcpostselect")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2

_FLAG_KEYS = {
    "alpha": "alpha",
    "atoms": "atoms",
    "r_min": "r_min",
    "r_max": "r_max",
    "r_step": "r_step",
    "phi": "phi",
    "cutoff": "cutoff",
    "out": "out",
    "jobs": "jobs",
}


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="flat 'key = value' config file")
    common.add_argument("--alpha", help="coherent amplitude as RE or RE,IM")
    common.add_argument("--atoms", help="comma-separated atom counts, e.g. 1,2,5")
    common.add_argument("--r-min", dest="r_min")
    common.add_argument("--r-max", dest="r_max")
    common.add_argument("--r-step", dest="r_step")
    common.add_argument("--phi", help="quadrature phase in radians")
    common.add_argument("--cutoff", help="Fock cutoff (overrides the default policy)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--preset", choices=PRESETS)
    common.add_argument("--jobs", help="worker processes")
    common.add_argument("-v", "--verbose", action="store_true")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="jcps", description="Post-selected Jaynes-Cummings cavity states: sweeps, Wigner grids, acceptance."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep", parents=[common], help="variance, squeezing, Mandel Q, <n>, P_N per (r, N)")
    sub.add_parser("prob", parents=[common], help="success probability curves P_N(r)")
    wig = sub.add_parser("wigner", parents=[common], help="Wigner grids (CSV + JSON summary)")
    wig.add_argument("--r", type=float, help="single coupling; default is the wigner_r list")
    st = sub.add_parser("state", parents=[common], help="dump the post-selected density matrix as JSON")
    st.add_argument("--r", type=float, required=True)
    sub.add_parser("acceptance", parents=[common], help="run the acceptance checks")
    return parser


def load_config(args):
    config = None
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigError("config", str(exc)) from None
        config = parse_config(text)
    if args.preset:
        config = apply_preset(config or config_from_mapping({}), args.preset)
    overrides = {key: getattr(args, attr) for attr, key in _FLAG_KEYS.items() if getattr(args, attr) is not None}
    return config_from_mapping(overrides, config)


def _run(args) -> int:
    config = load_config(args)
    if args.command == "sweep":
        path = sweep.run_sweep(config)
        log.info("wrote %s", path)
    elif args.command == "prob":
        path = sweep.run_prob(config)
        log.info("wrote %s", path)
    elif args.command == "wigner":
        if args.r is not None:
            jobs = [sweep.run_wigner_job(config, args.r, n) for n in sorted(config.atoms)]
        else:
            jobs = sweep.run_wigner_batch(config)
        for _, csv_path, _ in jobs:
            log.info("wrote %s", csv_path)
    elif args.command == "state":
        for n in sorted(config.atoms):
            log.info("wrote %s", sweep.run_state(config, args.r, n))
    elif args.command == "acceptance":
        results = acceptance.run_acceptance(config)
        for result in results:
            print(result.line())
        config.out_dir.mkdir(parents=True, exist_ok=True)
        report = config.out_dir / "acceptance.json"
        report.write_text(acceptance.report_json(results) + "\n")
        log.info("wrote %s", report)
        if any(r.verdict == acceptance.FAIL for r in results):
            return EXIT_NUMERIC
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TruncationError, DegenerateTraceError, NumericalError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
