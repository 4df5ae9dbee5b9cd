"""Geolocation-based user grouping and orthogonal SR allocation across groups."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .model import ConfigError, UePosition


@dataclass(frozen=True)
class GroupAssignment:
    groups: tuple[tuple[int, ...], ...]
    hearing_range: float

    def group_of(self, ue_id: int) -> int:
        for gid, members in enumerate(self.groups):
            if ue_id in members:
                return gid
        raise KeyError(ue_id)


def _distance(a: UePosition, b: UePosition) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def group_users(positions: Sequence[UePosition], hearing_range: float) -> GroupAssignment:
    """Greedy clique partition: every pair inside a group is within ``hearing_range``.

    UEs are scanned in ascending id.  The first ungrouped UE anchors a new
    group and each later ungrouped UE joins if it hears every current member.
    """
    if not positions:
        raise ConfigError("positions must be nonempty")
    if not (hearing_range > 0 and math.isfinite(hearing_range)):
        raise ConfigError(f"hearing_range must be a positive finite distance, got {hearing_range!r}")
    by_id: dict[int, UePosition] = {}
    for p in positions:
        if p.ue_id in by_id:
            raise ConfigError(f"duplicate ue_id {p.ue_id}")
        by_id[p.ue_id] = p

    remaining = sorted(by_id)
    groups = []
    while remaining:
        members = [by_id[remaining[0]]]
        rest = []
        for uid in remaining[1:]:
            cand = by_id[uid]
            if all(_distance(cand, m) <= hearing_range for m in members):
                members.append(cand)
            else:
                rest.append(uid)
        groups.append(tuple(m.ue_id for m in members))
        remaining = rest
    return GroupAssignment(groups=tuple(groups), hearing_range=float(hearing_range))


def assign_group_resources(assignment: GroupAssignment, total_srs: int) -> list[range]:
    """Split ``range(total_srs)`` into contiguous blocks proportional to group size.

    Largest-remainder rounding (ties to the lower group index).  A group
    rounded down to zero then takes one SR from the currently largest block.
    """
    sizes = [len(g) for g in assignment.groups]
    if total_srs < len(sizes):
        raise ConfigError(f"total_srs={total_srs} is fewer than the {len(sizes)} groups")
    members = sum(sizes)
    quotas = [Fraction(total_srs * s, members) for s in sizes]
    alloc = [math.floor(q) for q in quotas]
    leftover = total_srs - sum(alloc)
    by_remainder = sorted(range(len(sizes)), key=lambda i: (-(quotas[i] - alloc[i]), i))
    for i in by_remainder[:leftover]:
        alloc[i] += 1
    for i, a in enumerate(alloc):
        if a == 0:
            donor = max(range(len(alloc)), key=lambda j: (alloc[j], -j))
            alloc[donor] -= 1
            alloc[i] = 1

    ranges, lo = [], 0
    for a in alloc:
        ranges.append(range(lo, lo + a))
        lo += a
    return ranges


def read_positions(path: "str | Path") -> list[UePosition]:
    """Load ``ue_id,x,y`` rows (header required).  Duplicate ids are rejected by name."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["ue_id", "x", "y"]:
            raise ConfigError(f"{path}: expected header 'ue_id,x,y', got {header!r}")
        out: list[UePosition] = []
        seen: set[int] = set()
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ConfigError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            try:
                uid, x, y = int(row[0]), float(row[1]), float(row[2])
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: malformed row {row!r}") from None
            if uid in seen:
                raise ConfigError(f"{path}:{lineno}: duplicate ue_id {uid}")
            seen.add(uid)
            out.append(UePosition(uid, x, y))
    return out


def max_group_diameter(assignment: GroupAssignment, positions: Iterable[UePosition]) -> float:
    by_id = {p.ue_id: p for p in positions}
    worst = 0.0
    for g in assignment.groups:
        for i, a in enumerate(g):
            for b in g[i + 1:]:
                worst = max(worst, _distance(by_id[a], by_id[b]))
    return worst
