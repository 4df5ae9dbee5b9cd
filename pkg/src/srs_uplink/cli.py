"""Command line entry point: ``srs-uplink <verb> <scenario.json>``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from typing import Optional, Sequence

from . import experiments
from .model import ConfigError, check_seed
from .scenario import Kind, Scenario, bundled_names, load_scenario

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3

_RUNNERS = {
    "sps-sweep": Kind.SPS_SWEEP,
    "collision-sweep": Kind.COLLISION_SWEEP,
    "grouping": Kind.GROUPING,
}


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _seed(text: str) -> int:
    try:
        return check_seed(int(text, 0))
    except (ValueError, ConfigError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srs-uplink",
        description="Collision and capacity experiments for subband random sensing grant-free uplink.",
        epilog=f"bundled scenarios: {', '.join(bundled_names())}",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in (*_RUNNERS, "validate"):
        p = sub.add_parser(verb)
        p.add_argument("scenario", help="scenario JSON path or bundled scenario name")
        p.add_argument("--seed", type=_seed, help="override the scenario seed")
        p.add_argument("--trials", type=_positive_int, help="override Monte Carlo trials per point")
        p.add_argument("--out", help="override output_path")
        p.add_argument("--workers", type=_positive_int, default=1, help="worker processes for Monte Carlo")
    return parser


def _apply_overrides(scenario: Scenario, args: argparse.Namespace) -> Scenario:
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.trials is not None:
        changes["trials"] = args.trials
    return dataclasses.replace(scenario, **changes) if changes else scenario


def _describe(s: Scenario) -> str:
    lines = [f"{s.name}: {s.kind.value} -> {s.output_path}"]
    if s.kind is Kind.SPS_SWEEP:
        lines.append(f"  sps: {s.sps.to_dict()}  grid: {list(s.n_users_grid)}")
    elif s.kind is Kind.COLLISION_SWEEP:
        lines.append(f"  group: {s.group.to_dict()}  q={s.external.busy_probability:g}")
        lines.append(f"  lambda grid: {len(s.lambda_grid)} points, trials={s.trials}, seed={s.seed}")
        if s.sensing is not None:
            lines.append(f"  worst-case sensing time: {float(s.sensing.worst_case):g} us")
    else:
        lines.append(f"  positions: {s.positions_path}  range={s.hearing_range:g} m  SRs={s.total_srs}")
    return "\n".join(lines)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        scenario = _apply_overrides(load_scenario(args.scenario), args)
        if args.verb == "validate":
            if scenario.kind is Kind.GROUPING:
                from .grouping import read_positions
                read_positions(scenario.positions_path)
            print(_describe(scenario))
            return EXIT_OK
        expected = _RUNNERS[args.verb]
        if scenario.kind is not expected:
            raise ConfigError(f"{args.verb} needs a {expected.value} scenario, got {scenario.kind.value}")
        if expected is Kind.SPS_SWEEP:
            path = experiments.run_sps_sweep(scenario, args.out)
        elif expected is Kind.COLLISION_SWEEP:
            path = experiments.run_collision_sweep(scenario, args.out, workers=args.workers)
        else:
            path = experiments.run_grouping(scenario, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
