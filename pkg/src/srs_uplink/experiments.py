"""Scenario runners that write the CSV outputs."""

from __future__ import annotations

import csv
import logging
import math
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import analytic, grouping
from .analytic import NonPositiveTransmitTime
from .model import Scheme, TrafficModel
from .scenario import Kind, Scenario
from .sim import SimConfig, monte_carlo_poc

log = logging.getLogger(__name__)

SPS_HEADER = ["n_users", "required_rate_bps"]
SWEEP_HEADER = [
    "lambda",
    "analytic_srs",
    "analytic_contention",
    "mc_srs",
    "mc_srs_stderr",
    "mc_contention",
    "mc_contention_stderr",
    "seed",
]


def fmt_prob(p: float) -> str:
    return f"{p:.6g}"


def fmt_rate(rate: Fraction) -> str:
    # a required rate: round non-integral values up
    return str(math.ceil(rate))


def _writer(path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    fh = path.open("w", newline="")
    return fh, csv.writer(fh, lineterminator="\n")


def _expect(scenario: Scenario, kind: Kind) -> None:
    if scenario.kind is not kind:
        raise ValueError(f"scenario {scenario.name!r} is {scenario.kind.value}, not {kind.value}")


def sps_rows(scenario: Scenario) -> list[list[str]]:
    rows = []
    for n in scenario.n_users_grid:
        try:
            rate = fmt_rate(analytic.sps_required_rate(n, scenario.sps))
        except NonPositiveTransmitTime:
            rate = "INFEASIBLE"
        rows.append([str(n), rate])
    return rows


def run_sps_sweep(scenario: Scenario, out: Optional[Path] = None) -> Path:
    _expect(scenario, Kind.SPS_SWEEP)
    path = Path(out) if out is not None else scenario.output_path
    fh, w = _writer(path)
    with fh:
        w.writerow(SPS_HEADER)
        w.writerows(sps_rows(scenario))
    return path


def sweep_row(scenario: Scenario, lam: float, workers: int = 1) -> list[str]:
    g = scenario.group
    traffic = TrafficModel(lam, g.n_group_size)
    row = [f"{lam:g}"]
    row += [fmt_prob(analytic.overall_collision(traffic, g, s)) for s in (Scheme.SRS, Scheme.CONTENTION)]
    for scheme in (Scheme.SRS, Scheme.CONTENTION):
        cfg = SimConfig(g, scheme, traffic, scenario.external, scenario.trials, scenario.seed)
        est = monte_carlo_poc(cfg, workers=workers)
        row += [fmt_prob(est.p_hat), fmt_prob(est.stderr)]
    row.append(str(scenario.seed))
    return row


def run_collision_sweep(scenario: Scenario, out: Optional[Path] = None, workers: int = 1) -> Path:
    _expect(scenario, Kind.COLLISION_SWEEP)
    path = Path(out) if out is not None else scenario.output_path
    rows = []
    for lam in scenario.lambda_grid:
        rows.append(sweep_row(scenario, lam, workers))
        log.info("%s lambda=%g done", scenario.name, lam)
    fh, w = _writer(path)
    with fh:
        w.writerow(SWEEP_HEADER)
        w.writerows(rows)
    return path


def run_grouping(scenario: Scenario, out: Optional[Path] = None) -> Path:
    """Membership rows ``group_id,ue_id``, then a ``group_id,size,sr_lo,sr_hi`` block.

    ``sr_hi`` is exclusive.
    """
    _expect(scenario, Kind.GROUPING)
    positions = grouping.read_positions(scenario.positions_path)
    assignment = grouping.group_users(positions, scenario.hearing_range)
    ranges = grouping.assign_group_resources(assignment, scenario.total_srs)
    path = Path(out) if out is not None else scenario.output_path
    fh, w = _writer(path)
    with fh:
        w.writerow(["group_id", "ue_id"])
        for gid, members in enumerate(assignment.groups):
            w.writerows([gid, uid] for uid in members)
        w.writerow(["group_id", "size", "sr_lo", "sr_hi"])
        for gid, (members, r) in enumerate(zip(assignment.groups, ranges)):
            w.writerow([gid, len(members), r.start, r.stop])
    return path
